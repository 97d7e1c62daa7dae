//! Constitutive laws, chemical potential, body forces and pointwise residuals of
//! the coupled momentum / incompressibility / deformation / phase-field system.
//!
//! Phase convention: `phi = 1` is blood, `phi = 0` is thrombus. Every
//! phase-dependent coefficient (viscosity, permeability, viscoelasticity) uses
//! the same clamped cubic Hermite blend between its thrombus and blood values,
//! `v(phi) = v_t + (v_b - v_t) phi^2 (3 - 2 phi)`, with `phi` clamped to `[0, 1]`
//! before evaluation. The transported `phi` itself is never clamped.

use crate::error::{Error, Result};
use crate::fields::{
    divergence, gradient, laplacian, norm_l2, norm_l2_vec, Bc, Grid, ScalarField, TensorField2,
    VectorField2,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub eta_b: f64,
    pub eta_t: f64,
    pub kappa_b: f64,
    pub kappa_t: f64,
    pub nu_b: f64,
    pub nu_t: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub tau: f64,
    pub h: f64,
    pub k: f64,
    pub rho: f64,
}

impl Params {
    pub const DEFAULT_K: f64 = 1e-5;

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta_b", self.eta_b),
            ("eta_t", self.eta_t),
            ("kappa_b", self.kappa_b),
            ("kappa_t", self.kappa_t),
            ("nu_b", self.nu_b),
            ("nu_t", self.nu_t),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("tau", self.tau),
            ("h", self.h),
            ("rho", self.rho),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Param(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(Error::Param(format!("k must be non-negative, got {}", self.k)));
        }
        if self.rho != 1.0 {
            return Err(Error::Param(format!("rho is fixed at 1, got {}", self.rho)));
        }
        Ok(())
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_b.max(self.eta_t)
    }

    pub fn nu_max(&self) -> f64 {
        self.nu_b.max(self.nu_t)
    }

    /// Lower and upper coefficient bounds `(alpha, beta)` over all endpoints.
    pub fn coefficient_bounds(&self) -> (f64, f64) {
        let v = [
            self.eta_b,
            self.eta_t,
            self.kappa_b,
            self.kappa_t,
            self.nu_b,
            self.nu_t,
        ];
        (
            v.iter().copied().fold(f64::INFINITY, f64::min),
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: VectorField2,
    pub p: ScalarField,
    pub phi: ScalarField,
    pub f: TensorField2,
}

impl State {
    /// `u = 0`, `p = 0`, `F = I` around the given phase field.
    pub fn at_rest(phi: ScalarField) -> Self {
        let g = *phi.grid();
        Self {
            t: 0.0,
            u: VectorField2::zeros(g, Bc::DirichletZero),
            p: ScalarField::zeros(g, Bc::NeumannZero),
            phi: phi.with_bc(Bc::NeumannZero),
            f: TensorField2::identity(g),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn check_consistent(&self) -> Result<()> {
        let g = self.grid();
        if self.u.grid() != g || self.p.grid() != g || self.f.grid() != g {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        self.u.check_finite()?;
        self.p.check_finite()?;
        self.phi.check_finite()?;
        self.f.check_finite()
    }
}

/// `f = phi^2 (phi - 1)^2 / (4 h^2)` and its first two derivatives.
pub fn double_well(phi: f64, h: f64) -> Result<(f64, f64, f64)> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Param(format!("interface thickness must be positive, got {h}")));
    }
    Ok(double_well_unchecked(phi, h))
}

#[inline]
pub(crate) fn double_well_unchecked(phi: f64, h: f64) -> (f64, f64, f64) {
    let h2 = h * h;
    let a = phi * (phi - 1.0);
    (
        a * a / (4.0 * h2),
        a * (2.0 * phi - 1.0) / (2.0 * h2),
        (6.0 * phi * phi - 6.0 * phi + 1.0) / (2.0 * h2),
    )
}

/// Clamped cubic Hermite blend and its derivative with respect to `phi`.
#[inline]
fn hermite(phi: f64, v_t: f64, v_b: f64) -> (f64, f64) {
    let p = phi.clamp(0.0, 1.0);
    let s = p * p * (3.0 - 2.0 * p);
    // convex-combination form keeps both endpoints exact
    let v = v_t * (1.0 - s) + v_b * s;
    let dv = if (0.0..=1.0).contains(&phi) {
        6.0 * (v_b - v_t) * p * (1.0 - p)
    } else {
        0.0
    };
    (v, dv)
}

/// Viscoelastic modulus `nu(phi)` and `nu'(phi)`; `nu(0) = nu_t`, `nu(1) = nu_b`.
pub fn visco(phi: f64, nu_t: f64, nu_b: f64) -> (f64, f64) {
    hermite(phi, nu_t, nu_b)
}

/// Shared interpolant for viscosity and permeability.
pub fn material(phi: f64, v_t: f64, v_b: f64) -> f64 {
    hermite(phi, v_t, v_b).0
}

pub fn viscosity_field(phi: &ScalarField, p: &Params) -> ScalarField {
    phi.map(|v| material(v, p.eta_t, p.eta_b)).with_bc(Bc::NeumannZero)
}

pub fn nu_field(phi: &ScalarField, p: &Params) -> ScalarField {
    phi.map(|v| visco(v, p.nu_t, p.nu_b).0).with_bc(Bc::NeumannZero)
}

/// Pointwise part of the chemical potential: `lambda gamma f'(phi) + nu'(phi)/2 tr(FF^T - I)`.
pub fn local_potential(phi: &ScalarField, f: &TensorField2, p: &Params) -> ScalarField {
    let tr = f.trace_excess();
    let mut out = ScalarField::zeros(*phi.grid(), Bc::NeumannZero);
    for (k, o) in out.values_mut().iter_mut().enumerate() {
        let ph = phi.values()[k];
        let (_, df, _) = double_well_unchecked(ph, p.h);
        let (_, dnu) = visco(ph, p.nu_t, p.nu_b);
        *o = p.lambda * p.gamma * df + 0.5 * dnu * tr.values()[k];
    }
    out
}

/// `mu = -lambda Δphi + lambda gamma f'(phi) + nu'(phi)/2 tr(FF^T - I)`.
pub fn chemical_potential(state: &State, params: &Params) -> ScalarField {
    chemical_potential_of(&state.phi, &state.f, params)
}

pub fn chemical_potential_of(phi: &ScalarField, f: &TensorField2, params: &Params) -> ScalarField {
    let mut mu = local_potential(phi, f, params);
    mu.axpy(-params.lambda, &laplacian(phi));
    mu
}

/// Capillary force `-lambda Δphi ∇phi - lambda ∇(|∇phi|^2 / 2)`, the expanded form
/// of `-lambda div(∇phi ⊗ ∇phi)`. The gradient part is kept so the projection
/// can absorb it into the pressure.
pub fn capillary_force(phi: &ScalarField, lambda: f64) -> VectorField2 {
    let grad = gradient(phi);
    let lap = laplacian(phi);
    let half_sq = grad
        .x
        .zip_map(&grad.y, |a, b| 0.5 * (a * a + b * b))
        .with_bc(Bc::NeumannZero);
    let g2 = gradient(&half_sq);
    let mut out = VectorField2::zeros(*phi.grid(), Bc::DirichletZero);
    for k in 0..phi.grid().len() {
        let l = lap.values()[k];
        out.x.values_mut()[k] = -lambda * (l * grad.x.values()[k] + g2.x.values()[k]);
        out.y.values_mut()[k] = -lambda * (l * grad.y.values()[k] + g2.y.values()[k]);
    }
    out
}

/// `div(nu(phi)(FF^T - I))`, row-wise divergence of the symmetric stress.
pub fn elastic_force(phi: &ScalarField, f: &TensorField2, params: &Params) -> VectorField2 {
    let g = *phi.grid();
    let mut s11 = ScalarField::zeros(g, Bc::NeumannZero);
    let mut s12 = ScalarField::zeros(g, Bc::NeumannZero);
    let mut s22 = ScalarField::zeros(g, Bc::NeumannZero);
    for k in 0..g.len() {
        let (nu, _) = visco(phi.values()[k], params.nu_t, params.nu_b);
        let [a, b, c, d] = f.at(k);
        s11.values_mut()[k] = nu * (a * a + b * b - 1.0);
        s12.values_mut()[k] = nu * (a * c + b * d);
        s22.values_mut()[k] = nu * (c * c + d * d - 1.0);
    }
    let d11 = gradient(&s11);
    let d12 = gradient(&s12);
    let d22 = gradient(&s22);
    let mut out = VectorField2::zeros(g, Bc::DirichletZero);
    for k in 0..g.len() {
        out.x.values_mut()[k] = d11.x.values()[k] + d12.y.values()[k];
        out.y.values_mut()[k] = d12.x.values()[k] + d22.y.values()[k];
    }
    out
}

/// Darcy-type friction coefficient `eta(phi)(1 - phi)/kappa(phi)`, nonnegative.
pub fn friction_coefficient(phi: &ScalarField, params: &Params) -> ScalarField {
    phi.map(|v| {
        let eta = material(v, params.eta_t, params.eta_b);
        let kappa = material(v, params.kappa_t, params.kappa_b);
        eta * (1.0 - v.clamp(0.0, 1.0)) / kappa
    })
    .with_bc(Bc::NeumannZero)
}

/// Right-hand side of the deformation-gradient equation,
/// `∇u F + k(nu ΔF + 2 ∇nu·∇F) - u·∇F`, per component.
pub fn f_rhs(u: &VectorField2, phi: &ScalarField, f: &TensorField2, params: &Params) -> TensorField2 {
    let g = *phi.grid();
    let nu = nu_field(phi, params);
    let grad_nu = gradient(&nu);
    let gu = [gradient(&u.x), gradient(&u.y)];
    let gf: Vec<VectorField2> = f.c.iter().map(gradient).collect();
    let lf: Vec<ScalarField> = f.c.iter().map(laplacian).collect();
    let mut out = TensorField2::identity(g);
    for c in out.c.iter_mut() {
        c.scale(0.0);
    }
    for k in 0..g.len() {
        let (ux, uy) = (u.x.values()[k], u.y.values()[k]);
        let fk = f.at(k);
        let nuk = nu.values()[k];
        let (gnx, gny) = (grad_nu.x.values()[k], grad_nu.y.values()[k]);
        for i in 0..2 {
            // ∂_x u^i, ∂_y u^i
            let du = [gu[i].x.values()[k], gu[i].y.values()[k]];
            for j in 0..2 {
                let c = 2 * i + j;
                let stretch = du[0] * fk[j] + du[1] * fk[2 + j];
                let (fx, fy) = (gf[c].x.values()[k], gf[c].y.values()[k]);
                let diff = params.k * (nuk * lf[c].values()[k] + 2.0 * (gnx * fx + gny * fy));
                let adv = ux * fx + uy * fy;
                out.c[c].values_mut()[k] = stretch + diff - adv;
            }
        }
    }
    out
}

/// L2 norms of the discrete equation residuals between two states.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    pub momentum: f64,
    pub divergence: f64,
    pub deformation: f64,
    pub cahn_hilliard: f64,
    pub det_f_max_err: f64,
}

/// Backward-difference residuals: time derivatives are `(now - prev)/dt`,
/// spatial terms are evaluated at `state`.
pub fn residuals(state: &State, params: &Params, prev: &State, dt: f64) -> Result<Residuals> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Param(format!("dt must be positive, got {dt}")));
    }
    let g = *state.grid();
    let phi = &state.phi;
    let u = &state.u;

    // momentum
    let eta = viscosity_field(phi, params);
    let visc = [
        crate::fields::div_coef_grad(&eta, &u.x),
        crate::fields::div_coef_grad(&eta, &u.y),
    ];
    let conv = convection(u);
    let gp = gradient(&state.p);
    let cap = capillary_force(phi, params.lambda);
    let ela = elastic_force(phi, &state.f, params);
    let fric = friction_coefficient(phi, params);
    let mut mom = VectorField2::zeros(g, Bc::DirichletZero);
    let comps = [
        (&u.x, &prev.u.x, &conv.x, &gp.x, &visc[0], &cap.x, &ela.x),
        (&u.y, &prev.u.y, &conv.y, &gp.y, &visc[1], &cap.y, &ela.y),
    ];
    for (out, (un, up, cv, gpd, vs, cp, el)) in [&mut mom.x, &mut mom.y].into_iter().zip(comps) {
        for (k, o) in out.values_mut().iter_mut().enumerate() {
            let uk = un.values()[k];
            *o = params.rho * ((uk - up.values()[k]) / dt + cv.values()[k]) + gpd.values()[k]
                - vs.values()[k]
                - cp.values()[k]
                - el.values()[k]
                + fric.values()[k] * uk;
        }
    }

    // deformation gradient
    let rhs = f_rhs(u, phi, &state.f, params);
    let mut def_sq = 0.0;
    for c in 0..4 {
        let mut r = state.f.c[c].clone();
        r.axpy(-1.0, &prev.f.c[c]);
        r.scale(1.0 / dt);
        r.axpy(-1.0, &rhs.c[c]);
        def_sq += norm_l2(&r).powi(2);
    }

    // phase field
    let mu = chemical_potential(state, params);
    let mut ch = phi.clone();
    ch.axpy(-1.0, &prev.phi);
    ch.scale(1.0 / dt);
    ch.axpy(1.0, &advection_conservative(u, phi));
    ch.axpy(-params.tau, &laplacian(&mu));

    let det = state.f.det();
    Ok(Residuals {
        momentum: norm_l2_vec(&mom),
        divergence: norm_l2(&divergence(u)),
        deformation: def_sq.sqrt(),
        cahn_hilliard: norm_l2(&ch),
        det_f_max_err: det.values().iter().fold(0.0, |m, d| m.max((d - 1.0).abs())),
    })
}

/// `(u·∇)u` with central differences and wall ghosts from `u`.
pub fn convection(u: &VectorField2) -> VectorField2 {
    let gx = gradient(&u.x);
    let gy = gradient(&u.y);
    let g = *u.grid();
    let mut out = VectorField2::zeros(g, Bc::DirichletZero);
    for k in 0..g.len() {
        let (a, b) = (u.x.values()[k], u.y.values()[k]);
        out.x.values_mut()[k] = a * gx.x.values()[k] + b * gx.y.values()[k];
        out.y.values_mut()[k] = a * gy.x.values()[k] + b * gy.y.values()[k];
    }
    out
}

/// `div(u phi)`. Equal to `u·∇phi` for solenoidal `u`; its discrete integral
/// telescopes to zero because the flux vanishes on the walls.
pub fn advection_conservative(u: &VectorField2, phi: &ScalarField) -> ScalarField {
    let flux = VectorField2 {
        x: u.x.zip_map(phi, |a, b| a * b).with_bc(Bc::DirichletZero),
        y: u.y.zip_map(phi, |a, b| a * b).with_bc(Bc::DirichletZero),
    };
    divergence(&flux)
}
