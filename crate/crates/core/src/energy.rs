//! Total energy, its kinetic / mixed / elastic split, the four dissipation
//! channels, and the variational consistency check between energy and `mu`.
//!
//! The gradient terms use face differences (`face_gradient_energy`), whose first
//! variation is exactly the five-point Laplacian used in `mu`. The discrete
//! energy is therefore the one the discrete chemical potential derives from.

use crate::error::{Error, Result};
use crate::fields::{face_gradient_energy, inner, ScalarField};
use crate::model::{
    chemical_potential, double_well_unchecked, friction_coefficient, nu_field, visco,
    viscosity_field, Params, State,
};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub e_total: f64,
    pub e_kinetic: f64,
    pub e_mixed: f64,
    pub e_elastic: f64,
    pub d_visc: f64,
    pub d_mu: f64,
    pub d_fdiff: f64,
    pub d_friction: f64,
    /// Finite-difference `dE/dt` against the previous report; 0 for the first.
    pub de_dt_est: f64,
}

impl EnergyReport {
    pub fn dissipation_total(&self) -> f64 {
        self.d_visc + self.d_mu + self.d_fdiff + self.d_friction
    }
}

pub fn kinetic_energy(state: &State) -> f64 {
    inner(&state.u.x, &state.u.x) + inner(&state.u.y, &state.u.y)
}

/// `∫ lambda |∇phi|^2 + 2 lambda gamma f(phi)`.
pub fn mixed_energy(phi: &ScalarField, params: &Params) -> f64 {
    let well: f64 = phi
        .values()
        .iter()
        .map(|&p| double_well_unchecked(p, params.h).0)
        .sum::<f64>()
        * phi.grid().cell_area();
    params.lambda * face_gradient_energy(phi, None) + 2.0 * params.lambda * params.gamma * well
}

/// `∫ nu(phi) tr(FF^T - I)`; may be negative.
pub fn elastic_energy(phi: &ScalarField, f: &crate::fields::TensorField2, params: &Params) -> f64 {
    let tr = f.trace_excess();
    phi.values()
        .iter()
        .zip(tr.values())
        .map(|(&p, &t)| visco(p, params.nu_t, params.nu_b).0 * t)
        .sum::<f64>()
        * phi.grid().cell_area()
}

/// Energy parts only; dissipation fields stay zero.
pub fn total_energy(state: &State, params: &Params) -> EnergyReport {
    let e_kinetic = kinetic_energy(state);
    let e_mixed = mixed_energy(&state.phi, params);
    let e_elastic = elastic_energy(&state.phi, &state.f, params);
    EnergyReport {
        t: state.t,
        e_total: e_kinetic + e_mixed + e_elastic,
        e_kinetic,
        e_mixed,
        e_elastic,
        ..Default::default()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dissipation {
    pub visc: f64,
    pub mu: f64,
    pub fdiff: f64,
    pub friction: f64,
}

/// Nonnegative dissipation channels: `∫ eta |∇u|^2`, `∫ tau |∇mu|^2`,
/// `k ∫ nu^2 Σ|∇F_ij|^2` and `∫ (eta/kappa)(1 - phi)|u|^2`.
pub fn dissipation_channels(state: &State, params: &Params) -> Dissipation {
    let eta = viscosity_field(&state.phi, params);
    let visc = face_gradient_energy(&state.u.x, Some(&eta))
        + face_gradient_energy(&state.u.y, Some(&eta));
    let mu = chemical_potential(state, params);
    let d_mu = params.tau * face_gradient_energy(&mu, None);
    let nu = nu_field(&state.phi, params);
    let nu2 = nu.map(|v| v * v);
    let fdiff = params.k
        * state
            .f
            .c
            .iter()
            .map(|c| face_gradient_energy(c, Some(&nu2)))
            .sum::<f64>();
    let c = friction_coefficient(&state.phi, params);
    let friction: f64 = c
        .values()
        .iter()
        .zip(state.u.x.values().iter().zip(state.u.y.values()))
        .map(|(c, (a, b))| c * (a * a + b * b))
        .sum::<f64>()
        * state.grid().cell_area();
    Dissipation {
        visc,
        mu: d_mu,
        fdiff,
        friction,
    }
}

pub fn energy_report(state: &State, params: &Params) -> EnergyReport {
    let d = dissipation_channels(state, params);
    EnergyReport {
        d_visc: d.visc,
        d_mu: d.mu,
        d_fdiff: d.fdiff,
        d_friction: d.friction,
        ..total_energy(state, params)
    }
}

/// Largest normal derivative over the walls, relative to the largest interior
/// gradient. Uses the second-order one-sided extrapolation
/// `(-2 f0 + 3 f1 - f2) / h` to the wall face.
pub fn neumann_defect(psi: &ScalarField) -> f64 {
    let g = psi.grid();
    let (nx, ny) = (g.nx, g.ny);
    let mut wall: f64 = 0.0;
    for j in 0..ny {
        let w = (-2.0 * psi.get(0, j) + 3.0 * psi.get(1, j) - psi.get(2, j)) / g.dx;
        let e = (-2.0 * psi.get(nx - 1, j) + 3.0 * psi.get(nx - 2, j) - psi.get(nx - 3, j)) / g.dx;
        wall = wall.max(w.abs()).max(e.abs());
    }
    for i in 0..nx {
        let s = (-2.0 * psi.get(i, 0) + 3.0 * psi.get(i, 1) - psi.get(i, 2)) / g.dy;
        let n = (-2.0 * psi.get(i, ny - 1) + 3.0 * psi.get(i, ny - 2) - psi.get(i, ny - 3)) / g.dy;
        wall = wall.max(s.abs()).max(n.abs());
    }
    let mut interior: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx - 1 {
            interior = interior.max(((psi.get(i + 1, j) - psi.get(i, j)) / g.dx).abs());
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            interior = interior.max(((psi.get(i, j + 1) - psi.get(i, j)) / g.dy).abs());
        }
    }
    if interior == 0.0 {
        0.0
    } else {
        wall / interior
    }
}

/// Accepted `neumann_defect` for a first-variation test direction.
pub const NEUMANN_TOL: f64 = 0.1;

/// Relative mismatch between the central difference
/// `(E(phi + eps psi) - E(phi - eps psi)) / (2 eps)` and `(2 mu, psi)`.
/// Only the phase-dependent energy parts are perturbed.
pub fn first_variation_check(state: &State, params: &Params, psi: &ScalarField, eps: f64) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&eps) {
        return Err(Error::Param(format!("eps must lie in [1e-6, 1e-3], got {eps}")));
    }
    psi.check_finite()?;
    let defect = neumann_defect(psi);
    if defect > NEUMANN_TOL {
        return Err(Error::NotNeumann(defect));
    }
    let energy = |sign: f64| {
        let mut phi = state.phi.clone();
        phi.axpy(sign * eps, psi);
        mixed_energy(&phi, params) + elastic_energy(&phi, &state.f, params)
    };
    let fd = (energy(1.0) - energy(-1.0)) / (2.0 * eps);
    let mu = chemical_potential(state, params);
    let exact = 2.0 * inner(&mu, psi);
    Ok((fd - exact).abs() / exact.abs().max(1e-30))
}

/// One row of the dissipation balance between two reports.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub de_dt_est: f64,
    /// `-(D_visc + D_mu + D_Fdiff + D_friction)`, averaged over both ends.
    pub dissipation_rate: f64,
    /// `dE/dt / 2 - dissipation_rate`; the balance reads `dE/dt / 2 = -ΣD`.
    pub gap: f64,
}

pub fn ledger_append(prev: &EnergyReport, now: &mut EnergyReport) -> LedgerRow {
    let dt = now.t - prev.t;
    let de_dt_est = if dt > 0.0 {
        (now.e_total - prev.e_total) / dt
    } else {
        0.0
    };
    now.de_dt_est = de_dt_est;
    let dissipation_rate = -0.5 * (prev.dissipation_total() + now.dissipation_total());
    LedgerRow {
        t: now.t,
        de_dt_est,
        dissipation_rate,
        gap: 0.5 * de_dt_est - dissipation_rate,
    }
}
