//! Parameter registry for the seven reference cases and their initial data.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fields::{Bc, Grid, ScalarField};
use crate::model::{Params, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseName {
    A,
    B,
    Bp,
    C,
    Cp,
    D,
    Dp,
}

impl CaseName {
    pub const ALL: [CaseName; 7] = [
        CaseName::A,
        CaseName::B,
        CaseName::Bp,
        CaseName::C,
        CaseName::Cp,
        CaseName::D,
        CaseName::Dp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseName::A => "A",
            CaseName::B => "B",
            CaseName::Bp => "Bp",
            CaseName::C => "C",
            CaseName::Cp => "Cp",
            CaseName::D => "D",
            CaseName::Dp => "Dp",
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseName {
    type Err = Error;

    /// Accepts `Bp`, `B'` and `B′` for the primed variants.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let base = t
            .strip_suffix('\'')
            .or_else(|| t.strip_suffix('′'))
            .or_else(|| t.strip_suffix('p'))
            .map(|b| (b, true))
            .unwrap_or((t, false));
        Ok(match base {
            ("A", false) => CaseName::A,
            ("B", false) => CaseName::B,
            ("B", true) => CaseName::Bp,
            ("C", false) => CaseName::C,
            ("C", true) => CaseName::Cp,
            ("D", false) => CaseName::D,
            ("D", true) => CaseName::Dp,
            _ => return Err(Error::UnknownCase(s.to_string())),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phi0Kind {
    Single,
    Two,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseSpec {
    pub name: CaseName,
    pub label: &'static str,
    pub params: Params,
    pub phi0_kind: Phi0Kind,
    /// Energy-adaptive sampling was used for this case.
    pub aa_sampling: bool,
    pub t_end: f64,
    pub window_dt: f64,
}

/// Thrombus center and radius for the single-clot initial profile.
pub const THROMBUS_CENTER: (f64, f64) = (1.0, 0.0);
pub const THROMBUS_RADIUS: f64 = 0.25;
/// Horizontal offset of each clot from `x = 1` in the two-clot profile.
pub const TWO_CLOT_OFFSET: f64 = 0.23;
pub const DEFAULT_WINDOW_DT: f64 = 0.05;

// Table columns: eta_b eta_t kappa_b kappa_t nu_b nu_t h gamma tau lambda
struct Row(f64, f64, f64, f64, f64, f64, f64, f64, f64, f64);

impl Row {
    fn params(&self) -> Params {
        Params {
            eta_b: self.0,
            eta_t: self.1,
            kappa_b: self.2,
            kappa_t: self.3,
            nu_b: self.4,
            nu_t: self.5,
            h: self.6,
            gamma: self.7,
            tau: self.8,
            lambda: self.9,
            k: Params::DEFAULT_K,
            rho: 1.0,
        }
    }
}

pub fn case_spec(name: CaseName) -> CaseSpec {
    use CaseName::*;
    let (row, label, kind, aa, t_end) = match name {
        A => (Row(0.5, 1.0, 5e4, 1e-4, 1e-5, 1.0, 0.08, 1e-1, 1e-4, 1e-3), "Base line (static)", Phi0Kind::Single, false, 0.6),
        B => (Row(5.0, 10.0, 5e4, 1.0, 5e-2, 1e-1, 0.08, 5e-2, 1e-2, 2e-3), "Diffusive thrombus", Phi0Kind::Single, false, 0.2),
        Bp => (Row(5.0, 10.0, 5e4, 1.0, 5e-2, 1e-1, 0.08, 1e-1, 1e-2, 1e-3), "Diffusive thrombus", Phi0Kind::Single, false, 0.2),
        C => (Row(5.0, 10.0, 5e4, 1.0, 5e-2, 1e-1, 0.08, 5.0, 1e-2, 1e-3), "Two thrombi", Phi0Kind::Two, true, 0.5),
        Cp => (Row(5.0, 10.0, 5e4, 1.0, 5e-2, 1e-1, 0.08, 1e-3, 1e-2, 1e-3), "Two thrombi", Phi0Kind::Two, true, 0.5),
        D => (Row(0.5, 1.0, 5e4, 1e-4, 1e-5, 1.0, 0.035, 1e-1, 1e-4, 1e-3), "Thin interface", Phi0Kind::Single, true, 0.1),
        Dp => (Row(0.5, 1.0, 5e4, 1e-4, 1e-5, 1.0, 0.05, 1e-1, 1e-4, 1e-3), "Thin interface", Phi0Kind::Single, false, 0.1),
    };
    CaseSpec {
        name,
        label,
        params: row.params(),
        phi0_kind: kind,
        aa_sampling: aa,
        t_end,
        window_dt: DEFAULT_WINDOW_DT,
    }
}

pub fn case_params(name: &str) -> Result<CaseSpec> {
    Ok(case_spec(name.parse()?))
}

pub fn all_cases() -> Vec<CaseSpec> {
    CaseName::ALL.iter().map(|&n| case_spec(n)).collect()
}

/// Single-clot profile: about 0 inside the disc of radius `r`, about 1 outside.
pub fn phi0_single(x: f64, y: f64, x0: f64, y0: f64, r: f64, h: f64) -> f64 {
    let dist = ((x - x0).powi(2) + (y - y0).powi(2)).sqrt();
    0.5 * (1.0 - (1.0 - 1e-12) * (2.6 * (-dist + r) / (8f64.sqrt() * h)).tanh())
}

/// Smooth minimum of two single-clot profiles centered at `x = 1 -/+ 0.23`.
pub fn phi0_two(x: f64, y: f64, h: f64) -> f64 {
    let (cx, cy) = THROMBUS_CENTER;
    let z0 = phi0_single(x, y, cx - TWO_CLOT_OFFSET, cy, THROMBUS_RADIUS, h);
    let z1 = phi0_single(x, y, cx + TWO_CLOT_OFFSET, cy, THROMBUS_RADIUS, h);
    z0 * z1 / (z0 + z1 - z0 * z1 + 1e-20)
}

pub fn initial_phi(spec: &CaseSpec, grid: Grid) -> ScalarField {
    let h = spec.params.h;
    let (cx, cy) = THROMBUS_CENTER;
    match spec.phi0_kind {
        Phi0Kind::Single => ScalarField::from_fn(grid, Bc::NeumannZero, |x, y| {
            phi0_single(x, y, cx, cy, THROMBUS_RADIUS, h)
        }),
        Phi0Kind::Two => ScalarField::from_fn(grid, Bc::NeumannZero, |x, y| phi0_two(x, y, h)),
    }
}

/// `u = 0`, `p = 0`, `F = I`, `t = 0` and the case's initial phase field.
pub fn init_state(spec: &CaseSpec, grid: Grid) -> State {
    State::at_rest(initial_phi(spec, grid))
}
