//! Energy-adaptive collocation points: a pointwise energy-variation density and
//! a random-walk Metropolis-Hastings chain over it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::fields::{gradient, integrate, Bc, ScalarField};
use crate::model::{chemical_potential, Params, State};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub burn_in: usize,
    /// Proposal standard deviation as a fraction of `min(Lx, Ly)`.
    pub proposal_std: f64,
    pub seed: u64,
    /// Weight of the uniform floor relative to the mean of the energy term.
    pub floor_frac: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            burn_in: 1_000,
            proposal_std: 0.1,
            seed: 0,
            floor_frac: 0.1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Param("n_samples must be at least 1".into()));
        }
        if !(self.proposal_std > 0.0 && self.proposal_std.is_finite()) {
            return Err(Error::Param(format!("proposal_std must be positive, got {}", self.proposal_std)));
        }
        if !(self.floor_frac > 0.0 && self.floor_frac < 1.0) {
            return Err(Error::Param(format!("floor_frac must lie in (0, 1), got {}", self.floor_frac)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    pub density_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub points: Vec<SamplePoint>,
    /// Accepted proposals over all proposals, burn-in included.
    pub acceptance_rate: f64,
}

/// `|2 mu| |∇phi|` plus a uniform floor, normalized to unit integral.
pub fn energy_density(state: &State, params: &Params, floor_frac: f64) -> Result<ScalarField> {
    state.check_finite()?;
    if !(floor_frac > 0.0 && floor_frac < 1.0) {
        return Err(Error::Param(format!("floor_frac must lie in (0, 1), got {floor_frac}")));
    }
    let mu = chemical_potential(state, params);
    let grad = gradient(&state.phi);
    let mut d = ScalarField::zeros(*state.grid(), Bc::NeumannZero);
    for (k, v) in d.values_mut().iter_mut().enumerate() {
        let (gx, gy) = (grad.x.values()[k], grad.y.values()[k]);
        *v = (2.0 * mu.values()[k]).abs() * gx.hypot(gy);
    }
    let mean = d.mean();
    if mean > 0.0 {
        let floor = floor_frac * mean;
        d = d.map(|v| v + floor);
    } else {
        d = d.map(|_| 1.0);
    }
    let total = integrate(&d);
    d.scale(1.0 / total);
    Ok(d)
}

fn check_density(density: &ScalarField) -> Result<()> {
    density.check_finite()?;
    if density.min() < 0.0 {
        return Err(Error::Param(format!("density has negative value {}", density.min())));
    }
    let total = integrate(density);
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(total));
    }
    Ok(())
}

/// Random-walk chain started at the densest cell center. Proposals leaving the
/// domain are rejected; the density is interpolated bilinearly.
pub fn metropolis_hastings(density: &ScalarField, cfg: &SamplerConfig) -> Result<Chain> {
    cfg.validate()?;
    check_density(density)?;
    let g = *density.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let step = Normal::new(0.0, cfg.proposal_std * g.lx.min(g.ly))
        .map_err(|e| Error::Param(e.to_string()))?;

    let kmax = density
        .values()
        .iter()
        .enumerate()
        .fold(0, |best, (k, &v)| if v > density.values()[best] { k } else { best });
    let (mut x, mut y) = (g.x(kmax % g.nx), g.y(kmax / g.nx));
    let mut d = density.sample(x, y);

    let total = cfg.burn_in + cfg.n_samples;
    let mut points = Vec::with_capacity(cfg.n_samples);
    let mut accepted = 0usize;
    for it in 0..total {
        let (xp, yp) = (x + step.sample(&mut rng), y + step.sample(&mut rng));
        // the uniform draw is taken unconditionally so the stream stays aligned
        let u: f64 = rng.gen();
        if g.contains(xp, yp) {
            let dp = density.sample(xp, yp);
            if dp >= d || u * d < dp {
                x = xp;
                y = yp;
                d = dp;
                accepted += 1;
            }
        }
        if it >= cfg.burn_in {
            points.push(SamplePoint { x, y, density_value: d });
        }
    }
    Ok(Chain {
        points,
        acceptance_rate: accepted as f64 / total as f64,
    })
}

pub fn sample_state(state: &State, params: &Params, cfg: &SamplerConfig) -> Result<Chain> {
    cfg.validate()?;
    let density = energy_density(state, params, cfg.floor_frac)?;
    metropolis_hastings(&density, cfg)
}
