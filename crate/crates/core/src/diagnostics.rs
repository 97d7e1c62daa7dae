//! Scalar monitors and axial profiles.

use crate::error::{Error, Result};
use crate::fields::{divergence, integrate, norm_l2, ScalarField};
use crate::model::State;

/// Axial probe line and midpoint probe used by the benchmark figures.
pub const AXIS_Y: f64 = 0.0;
pub const MIDPOINT: (f64, f64) = (1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRow {
    pub t: f64,
    pub mean_phi: f64,
    /// `|mean - mean_0| / |mean_0|`.
    pub mean_phi_drift: f64,
    /// `||div u||_2`.
    pub div_u_norm: f64,
    pub det_f_max_err: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    /// `None` when the axial profile has no complete interface flank.
    pub interface_width: Option<f64>,
    /// Max deviation from the initial axial section.
    pub linf_vs_init: f64,
    /// Max deviation from the initial field over all cells.
    pub linf_full: f64,
}

pub fn metrics(state: &State, init: &State) -> Result<MetricsRow> {
    if state.grid() != init.grid() {
        return Err(Error::GridMismatch);
    }
    let area = state.grid().area();
    let mean_phi = integrate(&state.phi) / area;
    let mean0 = integrate(&init.phi) / area;
    let mean_phi_drift = if mean0 == 0.0 {
        (mean_phi - mean0).abs()
    } else {
        ((mean_phi - mean0) / mean0).abs()
    };
    let det_f_max_err = state.f.det().values().iter().fold(0.0f64, |m, d| m.max((d - 1.0).abs()));
    let now = axial_section(&state.phi, AXIS_Y);
    let then = axial_section(&init.phi, AXIS_Y);
    let linf_vs_init = now
        .values
        .iter()
        .zip(&then.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let linf_full = state
        .phi
        .values()
        .iter()
        .zip(init.phi.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(MetricsRow {
        t: state.t,
        mean_phi,
        mean_phi_drift,
        div_u_norm: norm_l2(&divergence(&state.u)),
        det_f_max_err,
        phi_min: state.phi.min(),
        phi_max: state.phi.max(),
        interface_width: interface_width(&now).ok(),
        linf_vs_init,
        linf_full,
    })
}

/// Field values along a horizontal line, at cell-center abscissae.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

/// Linear interpolation between the two cell rows adjacent to `y0`; rows are
/// clamped at the walls.
pub fn axial_section(f: &ScalarField, y0: f64) -> Profile {
    let g = f.grid();
    let s = ((y0 - g.origin.1) / g.dy - 0.5).clamp(0.0, (g.ny - 1) as f64);
    let j0 = (s.floor() as usize).min(g.ny - 1);
    let j1 = (j0 + 1).min(g.ny - 1);
    let w = s - j0 as f64;
    let x = (0..g.nx).map(|i| g.x(i)).collect();
    let values = (0..g.nx)
        .map(|i| {
            let (a, b) = (f.get(i, j0), f.get(i, j1));
            if w == 0.0 {
                a
            } else {
                a + w * (b - a)
            }
        })
        .collect();
    Profile { x, values }
}

fn crossing(x: &[f64], v: &[f64], k: usize, level: f64) -> f64 {
    let (a, b) = (v[k], v[k + 1]);
    x[k] + (level - a) / (b - a) * (x[k + 1] - x[k])
}

/// Width of the right flank of the deepest dip: from its innermost 0.1
/// crossing to its outermost 0.9 crossing, both linearly interpolated.
pub fn interface_width(profile: &Profile) -> Result<f64> {
    let (x, v) = (&profile.x, &profile.values);
    if x.len() != v.len() || x.len() < 2 {
        return Err(Error::Param("profile needs at least two matching samples".into()));
    }
    let kmin = v
        .iter()
        .enumerate()
        .fold(0, |best, (k, &val)| if val < v[best] { k } else { best });
    let mut lo = None;
    let mut hi = None;
    for k in kmin..v.len() - 1 {
        if lo.is_none() {
            if v[k] < 0.1 && v[k + 1] >= 0.1 {
                lo = Some(crossing(x, v, k, 0.1));
            }
            continue;
        }
        // the flank ends where the profile falls back into the next dip
        if v[k] >= 0.1 && v[k + 1] < 0.1 {
            break;
        }
        if v[k] < 0.9 && v[k + 1] >= 0.9 {
            hi = Some(crossing(x, v, k, 0.9));
        }
    }
    let lo = lo.ok_or(Error::NoCrossing("phi = 0.1"))?;
    let hi = hi.ok_or(Error::NoCrossing("phi = 0.9"))?;
    Ok(hi - lo)
}

pub fn midpoint_phi(state: &State) -> f64 {
    state.phi.sample(MIDPOINT.0, MIDPOINT.1)
}
