//! Direct solvers for constant-coefficient operators on the rectangle.
//!
//! With mirror ghosts the cell-centered five-point Laplacian is diagonal in the
//! DCT-II basis `cos(pi k (i + 1/2) / n)`; with negated ghosts it is diagonal in
//! the DST-II basis `sin(pi (k + 1)(i + 1/2) / n)`. Every implicit operator of
//! the stepper (Poisson, Helmholtz, the biharmonic Cahn-Hilliard operator and
//! the collocated projection operator `div grad`) is a polynomial in these
//! one-dimensional symbols, so a solve is transform, divide, inverse transform.
//!
//! Transforms are dense orthonormal matrix products. At the resolutions this
//! crate targets that is cheaper to reason about than an FFT and is bitwise
//! reproducible; rows may be processed in parallel without changing results.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{laplacian, Bc, Grid, ScalarField};

static PARALLEL: AtomicBool = AtomicBool::new(false);

/// Enable row-parallel transforms. Output is identical either way.
pub fn set_parallel(on: bool) {
    PARALLEL.store(on, Ordering::Relaxed);
}

fn parallel() -> bool {
    PARALLEL.load(Ordering::Relaxed)
}

/// Relative residual accepted from any direct solve.
pub const SOLVE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// DCT-II, homogeneous Neumann.
    Cosine,
    /// DST-II, homogeneous Dirichlet.
    Sine,
}

impl Basis {
    pub fn for_bc(bc: Bc) -> Self {
        match bc {
            Bc::NeumannZero => Basis::Cosine,
            Bc::DirichletZero => Basis::Sine,
        }
    }
}

#[derive(Clone, Debug)]
struct Transform1d {
    n: usize,
    /// `mat[k * n + i]`, orthonormal rows.
    mat: Vec<f64>,
    /// Eigenvalues of the 1D second difference times `h^2`, i.e. `-4 sin^2(.)`.
    second_diff: Vec<f64>,
    /// Eigenvalues of the 1D wide central second difference times `h^2`
    /// (cosine basis only; `-sin^2(pi k / n)`).
    wide_diff: Vec<f64>,
}

impl Transform1d {
    fn new(n: usize, basis: Basis) -> Self {
        let nf = n as f64;
        let mut mat = vec![0.0; n * n];
        let mut second_diff = vec![0.0; n];
        let mut wide_diff = vec![0.0; n];
        for k in 0..n {
            let (freq, scale) = match basis {
                Basis::Cosine => (k as f64, if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() }),
                Basis::Sine => (
                    (k + 1) as f64,
                    if k == n - 1 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() },
                ),
            };
            for i in 0..n {
                let arg = PI * freq * (i as f64 + 0.5) / nf;
                mat[k * n + i] = scale
                    * match basis {
                        Basis::Cosine => arg.cos(),
                        Basis::Sine => arg.sin(),
                    };
            }
            let s = (PI * freq / (2.0 * nf)).sin();
            second_diff[k] = -4.0 * s * s;
            let w = (PI * freq / nf).sin();
            wide_diff[k] = -w * w;
        }
        Self {
            n,
            mat,
            second_diff,
            wide_diff,
        }
    }
}

/// Cached 2D transform pair for one grid and one boundary family.
#[derive(Clone, Debug)]
pub struct Spectral2d {
    grid: Grid,
    basis: Basis,
    tx: Transform1d,
    ty: Transform1d,
}

impl Spectral2d {
    pub fn new(grid: Grid, basis: Basis) -> Self {
        Self {
            grid,
            basis,
            tx: Transform1d::new(grid.nx, basis),
            ty: Transform1d::new(grid.ny, basis),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Symbol of the five-point Laplacian for mode `(kx, ky)`.
    #[inline]
    pub fn laplacian_symbol(&self, kx: usize, ky: usize) -> f64 {
        self.tx.second_diff[kx] / (self.grid.dx * self.grid.dx)
            + self.ty.second_diff[ky] / (self.grid.dy * self.grid.dy)
    }

    /// Symbol of `divergence(gradient(.))` with Neumann ghosts for the scalar and
    /// negated ghosts for the resulting vector (cosine basis only).
    #[inline]
    pub fn wide_laplacian_symbol(&self, kx: usize, ky: usize) -> f64 {
        debug_assert_eq!(self.basis, Basis::Cosine);
        self.tx.wide_diff[kx] / (self.grid.dx * self.grid.dx)
            + self.ty.wide_diff[ky] / (self.grid.dy * self.grid.dy)
    }

    pub fn forward(&self, data: &[f64]) -> Vec<f64> {
        let tmp = apply_x(&self.tx, data, self.grid.ny, false);
        apply_y(&self.ty, &tmp, self.grid.nx, false)
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let tmp = apply_y(&self.ty, coeffs, self.grid.nx, true);
        apply_x(&self.tx, &tmp, self.grid.ny, true)
    }

    /// Transform, multiply mode `(kx, ky)` by `mult(kx, ky)`, transform back.
    pub fn apply_diagonal(&self, f: &ScalarField, mult: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        debug_assert_eq!(f.grid(), &self.grid);
        let mut c = self.forward(f.values());
        let nx = self.grid.nx;
        for (k, v) in c.iter_mut().enumerate() {
            *v *= mult(k % nx, k / nx);
        }
        self.inverse(&c)
    }
}

/// Transform along x for every row. `data` is `rows x n` row-major.
fn apply_x(t: &Transform1d, data: &[f64], rows: usize, inverse: bool) -> Vec<f64> {
    let n = t.n;
    let mut out = vec![0.0; rows * n];
    let row = |src: &[f64], dst: &mut [f64]| {
        if inverse {
            dst.iter_mut().for_each(|d| *d = 0.0);
            for (k, &c) in src.iter().enumerate() {
                let m = &t.mat[k * n..(k + 1) * n];
                for (d, &mk) in dst.iter_mut().zip(m) {
                    *d += c * mk;
                }
            }
        } else {
            for (k, d) in dst.iter_mut().enumerate() {
                let m = &t.mat[k * n..(k + 1) * n];
                *d = m.iter().zip(src).map(|(a, b)| a * b).sum();
            }
        }
    };
    if parallel() {
        out.par_chunks_mut(n)
            .zip(data.par_chunks(n))
            .for_each(|(dst, src)| row(src, dst));
    } else {
        out.chunks_mut(n)
            .zip(data.chunks(n))
            .for_each(|(dst, src)| row(src, dst));
    }
    out
}

/// Transform along y. `data` is `n x cols` row-major.
fn apply_y(t: &Transform1d, data: &[f64], cols: usize, inverse: bool) -> Vec<f64> {
    let n = t.n;
    let mut out = vec![0.0; n * cols];
    let row = |k: usize, dst: &mut [f64]| {
        for j in 0..n {
            let m = if inverse { t.mat[j * n + k] } else { t.mat[k * n + j] };
            let src = &data[j * cols..(j + 1) * cols];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += m * s;
            }
        }
    };
    if parallel() {
        out.par_chunks_mut(cols)
            .enumerate()
            .for_each(|(k, dst)| row(k, dst));
    } else {
        out.chunks_mut(cols)
            .enumerate()
            .for_each(|(k, dst)| row(k, dst));
    }
    out
}

fn check_input(f: &ScalarField) -> Result<()> {
    f.check_finite()
}

fn check_coef(name: &str, a: f64) -> Result<()> {
    if a.is_finite() && a >= 0.0 {
        Ok(())
    } else {
        Err(Error::Param(format!("{name} must be finite and non-negative, got {a}")))
    }
}

/// Result of a Neumann Poisson solve.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    /// Zero-mean `q` with `laplacian(q) = rhs - mean(rhs)`.
    pub q: ScalarField,
    /// `|mean(rhs)| / ||rhs||_inf` before the mean was removed.
    pub incompatibility: f64,
}

/// Neumann Poisson solve for the five-point Laplacian.
pub fn solve_poisson_neumann(rhs: &ScalarField) -> Result<PoissonSolution> {
    Spectral2d::new(*rhs.grid(), Basis::Cosine).poisson(rhs)
}

/// `(I - a Δ) w = f` with homogeneous Neumann data.
pub fn solve_helmholtz_neumann(f: &ScalarField, a: f64) -> Result<ScalarField> {
    Spectral2d::new(*f.grid(), Basis::Cosine).helmholtz(f, a)
}

/// `(I + b Δ² - s Δ) w = f` with `∂n w = ∂n Δw = 0`.
pub fn solve_ch_implicit(f: &ScalarField, b: f64, s: f64) -> Result<ScalarField> {
    Spectral2d::new(*f.grid(), Basis::Cosine).ch_implicit(f, b, s)
}

impl Spectral2d {
    fn bc(&self) -> Bc {
        match self.basis {
            Basis::Cosine => Bc::NeumannZero,
            Basis::Sine => Bc::DirichletZero,
        }
    }

    fn output(&self, values: Vec<f64>) -> ScalarField {
        ScalarField::from_values(self.grid, self.bc(), values).expect("transform preserves length")
    }

    pub fn poisson(&self, rhs: &ScalarField) -> Result<PoissonSolution> {
        check_input(rhs)?;
        let scale = rhs.max_abs();
        let incompatibility = if scale > 0.0 { rhs.mean().abs() / scale } else { 0.0 };
        let v = match self.basis {
            Basis::Cosine => self.apply_diagonal(rhs, |kx, ky| {
                if kx == 0 && ky == 0 {
                    0.0
                } else {
                    1.0 / self.laplacian_symbol(kx, ky)
                }
            }),
            Basis::Sine => self.apply_diagonal(rhs, |kx, ky| 1.0 / self.laplacian_symbol(kx, ky)),
        };
        Ok(PoissonSolution {
            q: self.output(v),
            incompatibility,
        })
    }

    /// Zero-mean `q` with `divergence(gradient(q)) = rhs - mean(rhs)`, where the
    /// gradient uses mirror ghosts and the divergence negated ghosts.
    pub fn pressure(&self, rhs: &ScalarField) -> Result<ScalarField> {
        check_input(rhs)?;
        let v = self.apply_diagonal(rhs, |kx, ky| {
            if kx == 0 && ky == 0 {
                0.0
            } else {
                1.0 / self.wide_laplacian_symbol(kx, ky)
            }
        });
        Ok(self.output(v))
    }

    pub fn helmholtz(&self, f: &ScalarField, a: f64) -> Result<ScalarField> {
        check_input(f)?;
        check_coef("helmholtz coefficient", a)?;
        if a == 0.0 {
            return Ok(f.clone().with_bc(self.bc()));
        }
        let v = self.apply_diagonal(f, |kx, ky| 1.0 / (1.0 - a * self.laplacian_symbol(kx, ky)));
        Ok(self.output(v))
    }

    pub fn ch_implicit(&self, f: &ScalarField, b: f64, s: f64) -> Result<ScalarField> {
        check_input(f)?;
        check_coef("biharmonic coefficient", b)?;
        check_coef("stabilization", s)?;
        if b == 0.0 && s == 0.0 {
            return Ok(f.clone().with_bc(self.bc()));
        }
        let v = self.apply_diagonal(f, |kx, ky| {
            let l = self.laplacian_symbol(kx, ky);
            1.0 / (1.0 + b * l * l - s * l)
        });
        Ok(self.output(v))
    }
}

/// `||a - b||_2 / max(||b||_2, tiny)` over raw values.
pub fn relative_residual(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    num.sqrt() / den.sqrt().max(1e-300)
}

/// Forward operator `(I - a Δ) w`.
pub fn apply_helmholtz(w: &ScalarField, a: f64) -> ScalarField {
    let mut out = w.clone();
    out.axpy(-a, &laplacian(w));
    out
}

/// Forward operator `(I + b Δ² - s Δ) w` under Neumann ghosts.
pub fn apply_ch(w: &ScalarField, b: f64, s: f64) -> ScalarField {
    let l = laplacian(w);
    let ll = laplacian(&l);
    let mut out = w.clone();
    out.axpy(b, &ll);
    out.axpy(-s, &l);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{divergence, gradient};

    fn grid() -> Grid {
        Grid::channel(24, 12).unwrap()
    }

    #[test]
    fn transforms_are_orthonormal() {
        for basis in [Basis::Cosine, Basis::Sine] {
            let t = Transform1d::new(10, basis);
            for a in 0..10 {
                for b in 0..10 {
                    let d: f64 = (0..10).map(|i| t.mat[a * 10 + i] * t.mat[b * 10 + i]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((d - want).abs() < 1e-13, "{basis:?} {a} {b} {d}");
                }
            }
        }
    }

    #[test]
    fn round_trip_identity() {
        let g = grid();
        let f = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| (x * 3.1).sin() + y * y);
        for basis in [Basis::Cosine, Basis::Sine] {
            let s = Spectral2d::new(g, basis);
            let back = s.inverse(&s.forward(f.values()));
            assert!(relative_residual(&back, f.values()) < 1e-14);
        }
    }

    #[test]
    fn symbols_match_stencils() {
        let g = grid();
        for (basis, bc) in [(Basis::Cosine, Bc::NeumannZero), (Basis::Sine, Bc::DirichletZero)] {
            let s = Spectral2d::new(g, basis);
            let f = ScalarField::from_fn(g, bc, |x, y| (x * 1.7).cos() * (y * 4.0 + 0.3).sin() + x);
            let direct = laplacian(&f);
            let spec = s.apply_diagonal(&f, |kx, ky| s.laplacian_symbol(kx, ky));
            assert!(relative_residual(&spec, direct.values()) < 1e-12);
        }
        let s = Spectral2d::new(g, Basis::Cosine);
        let f = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| (x * 1.7).cos() * (y * 4.0 + 0.3).sin() + x);
        let direct = divergence(&gradient(&f));
        let spec = s.apply_diagonal(&f, |kx, ky| s.wide_laplacian_symbol(kx, ky));
        assert!(relative_residual(&spec, direct.values()) < 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = grid();
        let z = ScalarField::zeros(g, Bc::NeumannZero);
        let p = solve_poisson_neumann(&z).unwrap();
        assert_eq!(p.q.max_abs(), 0.0);
        assert_eq!(p.incompatibility, 0.0);
    }

    #[test]
    fn constants_pass_through_helmholtz_and_ch() {
        let g = grid();
        let c = ScalarField::constant(g, Bc::NeumannZero, 0.7);
        let h = solve_helmholtz_neumann(&c, 0.3).unwrap();
        let w = solve_ch_implicit(&c, 0.2, 0.1).unwrap();
        for v in h.values().iter().chain(w.values()) {
            assert!((v - 0.7).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_coefficients_are_identity() {
        let g = grid();
        let f = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| x * y);
        assert_eq!(solve_helmholtz_neumann(&f, 0.0).unwrap().values(), f.values());
        assert_eq!(solve_ch_implicit(&f, 0.0, 0.0).unwrap().values(), f.values());
    }

    #[test]
    fn rejects_bad_input() {
        let g = grid();
        let mut f = ScalarField::zeros(g, Bc::NeumannZero);
        assert!(solve_helmholtz_neumann(&f, -1.0).is_err());
        f.set(2, 3, f64::NAN);
        assert!(solve_poisson_neumann(&f).is_err());
        assert!(solve_ch_implicit(&f, 1.0, 0.0).is_err());
    }

    #[test]
    fn incompatibility_is_reported() {
        let g = grid();
        let f = ScalarField::constant(g, Bc::NeumannZero, 2.0);
        let p = solve_poisson_neumann(&f).unwrap();
        assert!((p.incompatibility - 1.0).abs() < 1e-14);
        assert!(p.q.max_abs() < 1e-12);
    }
}
