//! One IMEX step of the coupled system.
//!
//! Sub-steps, in order:
//! 1. phase field: linearly implicit biharmonic update with `-tau sΔ` stabilization,
//!    nonlinear potential and advection explicit;
//! 2. deformation gradient: explicit Euler with `phi^{n+1}`;
//! 3. momentum: constant-viscosity implicit solve around `eta_bar` with the
//!    variable remainder explicit, then pointwise implicit friction;
//! 4. incremental pressure projection onto discretely solenoidal fields.
//!
//! The projection inverts `divergence ∘ gradient` exactly (see `spectral`), so
//! the discrete divergence after a step is at round-off level.

use crate::error::{Error, Result};
use crate::fields::{
    div_coef_grad, divergence, gradient, laplacian, Bc, Grid, ScalarField, VectorField2,
};
use crate::model::{
    advection_conservative, capillary_force, convection, elastic_force, f_rhs,
    friction_coefficient, local_potential, viscosity_field, Params, State,
};
use crate::spectral::{apply_ch, apply_helmholtz, relative_residual, Basis, Spectral2d, SOLVE_TOL};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig {
    /// Time step ceiling.
    pub dt: f64,
    /// Stabilization constant, in units of the chemical potential; it enters the
    /// phase-field update as `dt tau s Δ`. `None` means `2 lambda gamma / h^2`.
    pub stab_s: Option<f64>,
    /// Splitting viscosity; `None` means `max(eta_b, eta_t)`.
    pub visc_split: Option<f64>,
    pub cfl_safety: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            stab_s: None,
            visc_split: None,
            cfl_safety: 0.5,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Param(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Param(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if let Some(s) = self.stab_s {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Param(format!("stab_s must be non-negative, got {s}")));
            }
        }
        if let Some(v) = self.visc_split {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Param(format!("visc_split must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn stab(&self, p: &Params) -> f64 {
        self.stab_s
            .unwrap_or(2.0 * p.lambda * p.gamma / (p.h * p.h))
    }

    pub fn eta_bar(&self, p: &Params) -> f64 {
        self.visc_split.unwrap_or_else(|| p.eta_max())
    }
}

/// Cached transforms for one grid.
#[derive(Clone, Debug)]
pub struct Stepper {
    params: Params,
    cfg: StepConfig,
    cosine: Spectral2d,
    sine: Spectral2d,
}

impl Stepper {
    pub fn new(grid: Grid, params: Params, cfg: StepConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        Ok(Self {
            params,
            cfg,
            cosine: Spectral2d::new(grid, Basis::Cosine),
            sine: Spectral2d::new(grid, Basis::Sine),
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        self.cosine.grid()
    }

    pub fn cfl_dt(&self, state: &State) -> f64 {
        cfl_dt(state, &self.params, &self.cfg).expect("validated config")
    }

    /// Advance by the configured step ceiling.
    pub fn step(&self, state: &State) -> Result<State> {
        self.advance(state, self.cfg.dt)
    }

    pub fn advance(&self, state: &State, dt: f64) -> Result<State> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Param(format!("dt must be positive, got {dt}")));
        }
        if state.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        state.check_consistent()?;
        let p = &self.params;

        // (a) phase field
        let s = self.cfg.stab(p);
        let mut rhs = state.phi.clone();
        rhs.axpy(-dt, &advection_conservative(&state.u, &state.phi));
        rhs.axpy(dt * p.tau, &laplacian(&local_potential(&state.phi, &state.f, p)));
        rhs.axpy(-dt * p.tau * s, &laplacian(&state.phi));
        let (b, sd) = (dt * p.tau * p.lambda, dt * p.tau * s);
        let phi = self.cosine.ch_implicit(&rhs, b, sd)?;
        check_residual("phase-field solve", apply_ch(&phi, b, sd).values(), rhs.values())?;

        // (b) deformation gradient
        let dfdt = f_rhs(&state.u, &phi, &state.f, p);
        let mut f = state.f.clone();
        for (c, d) in f.c.iter_mut().zip(&dfdt.c) {
            c.axpy(dt, d);
        }

        // (c) momentum predictor
        let eta = viscosity_field(&phi, p);
        let eta_bar = self.cfg.eta_bar(p);
        let excess = eta.map(|e| e - eta_bar);
        let conv = convection(&state.u);
        let cap = capillary_force(&phi, p.lambda);
        let ela = elastic_force(&phi, &f, p);
        let gp = gradient(&state.p);
        let fric = friction_coefficient(&phi, p);
        let a = dt * eta_bar / p.rho;
        let mut comps = Vec::with_capacity(2);
        for (uc, cv, cp, el, g) in [
            (&state.u.x, &conv.x, &cap.x, &ela.x, &gp.x),
            (&state.u.y, &conv.y, &cap.y, &ela.y, &gp.y),
        ] {
            let mut force = div_coef_grad(&excess, uc);
            force.axpy(1.0, cp);
            force.axpy(1.0, el);
            force.axpy(-1.0, g);
            force.scale(1.0 / p.rho);
            force.axpy(-1.0, cv);
            let mut r = uc.clone();
            r.axpy(dt, &force);
            let r = r.with_bc(Bc::DirichletZero);
            let mut w = self.sine.helmholtz(&r, a)?;
            check_residual("momentum solve", apply_helmholtz(&w, a).values(), r.values())?;
            for (v, c) in w.values_mut().iter_mut().zip(fric.values()) {
                *v /= 1.0 + dt * c / p.rho;
            }
            comps.push(w);
        }
        let uy = comps.pop().expect("two components");
        let ux = comps.pop().expect("two components");
        let u_star = VectorField2 { x: ux, y: uy };

        // (d) projection
        let (u, dp) = self.project_scaled(&u_star, dt)?;
        let mut pressure = state.p.clone();
        pressure.axpy(1.0, &dp);

        let next = State {
            t: state.t + dt,
            u,
            p: pressure,
            phi,
            f,
        };
        next.check_finite()?;
        Ok(next)
    }

    /// Returns `(v - dt ∇q, q)` with `div(∇q) = div(v)/dt`.
    fn project_scaled(&self, v: &VectorField2, dt: f64) -> Result<(VectorField2, ScalarField)> {
        let mut rhs = divergence(v);
        rhs.scale(1.0 / dt);
        let q = self.cosine.pressure(&rhs)?;
        let gq = gradient(&q);
        let mut out = v.clone();
        out.axpy(-dt, &gq);
        out.x = out.x.with_bc(Bc::DirichletZero);
        out.y = out.y.with_bc(Bc::DirichletZero);
        Ok((out, q))
    }

    pub fn project(&self, v: &VectorField2) -> Result<(VectorField2, ScalarField)> {
        self.project_scaled(v, 1.0)
    }
}

fn check_residual(solver: &'static str, applied: &[f64], rhs: &[f64]) -> Result<()> {
    let residual = relative_residual(applied, rhs);
    if residual > SOLVE_TOL {
        return Err(Error::Residual {
            solver,
            residual,
            tol: SOLVE_TOL,
        });
    }
    Ok(())
}

/// Discrete Helmholtz-Leray projection: returns the solenoidal part of `v` and
/// the zero-mean potential whose gradient was removed.
pub fn project(v: &VectorField2) -> Result<(VectorField2, ScalarField)> {
    v.check_finite()?;
    let s = Spectral2d::new(*v.grid(), Basis::Cosine);
    let rhs = divergence(v);
    let q = s.pressure(&rhs)?;
    let mut out = v.clone();
    out.axpy(-1.0, &gradient(&q));
    out.x = out.x.with_bc(Bc::DirichletZero);
    out.y = out.y.with_bc(Bc::DirichletZero);
    Ok((out, q))
}

pub fn step(state: &State, params: &Params, cfg: &StepConfig) -> Result<State> {
    Stepper::new(*state.grid(), *params, *cfg)?.step(state)
}

/// Largest stable step: advective limits, explicit deformation diffusion, and
/// the ceiling `cfg.dt`. Implicit terms impose no bound.
pub fn cfl_dt(state: &State, params: &Params, cfg: &StepConfig) -> Result<f64> {
    cfg.validate()?;
    let g = state.grid();
    let umax = state.u.max_norm() + 1e-12;
    let mut dt = (g.dx / umax).min(g.dy / umax);
    let kn = params.k * params.nu_max();
    if kn > 0.0 {
        let h = g.dx.min(g.dy);
        dt = dt.min(h * h / (4.0 * kn));
    }
    Ok((cfg.cfl_safety * dt).min(cfg.dt))
}

/// Divergence of a projected field relative to the size of the field it came
/// from: `||div out||_2 / (||input||_2 / min(dx, dy) + 1e-30)`.
pub fn scaled_divergence(out: &VectorField2, input: &VectorField2) -> f64 {
    let g = out.grid();
    let d = crate::fields::norm_l2(&divergence(out));
    d / (crate::fields::norm_l2_vec(input) / g.dx.min(g.dy) + 1e-30)
}
