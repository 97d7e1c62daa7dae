//! Uniform collocated grid, field containers and finite-difference operators.
//!
//! Values live at cell centers and are stored row-major (`j * nx + i`, rows run
//! along y). Ghost cells are never stored: each operator reconstructs them from
//! the field's boundary condition. A `NeumannZero` field mirrors its boundary
//! cell into the ghost (zero normal derivative at the wall face), a
//! `DirichletZero` field negates it (zero value at the wall face).

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub origin: (f64, f64),
    pub dx: f64,
    pub dy: f64,
}

impl Grid {
    pub const MIN_CELLS: usize = 8;

    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, origin: (f64, f64)) -> Result<Self> {
        if nx < Self::MIN_CELLS || ny < Self::MIN_CELLS {
            return Err(Error::Grid(format!(
                "need at least {m}x{m} cells, got {nx}x{ny}",
                m = Self::MIN_CELLS
            )));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::Grid(format!("non-positive extent {lx}x{ly}")));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(Error::Grid("non-finite origin".into()));
        }
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            origin,
            dx: lx / nx as f64,
            dy: ly / ny as f64,
        })
    }

    /// The default channel `[0, 2] x [-0.5, 0.5]`.
    pub fn channel(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, 2.0, 1.0, (0.0, -0.5))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + (i as f64 + 0.5) * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + (j as f64 + 0.5) * self.dy
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.origin.0
            && x <= self.origin.0 + self.lx
            && y >= self.origin.1
            && y <= self.origin.1 + self.ly
    }

    pub fn x_max(&self) -> f64 {
        self.origin.0 + self.lx
    }

    pub fn y_max(&self) -> f64 {
        self.origin.1 + self.ly
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bc {
    NeumannZero,
    DirichletZero,
}

impl Bc {
    #[inline]
    fn ghost(self, inner: f64) -> f64 {
        match self {
            Bc::NeumannZero => inner,
            Bc::DirichletZero => -inner,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    bc: Bc,
}

impl ScalarField {
    pub fn zeros(grid: Grid, bc: Bc) -> Self {
        Self::constant(grid, bc, 0.0)
    }

    pub fn constant(grid: Grid, bc: Bc, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
            bc,
        }
    }

    pub fn from_fn(grid: Grid, bc: Bc, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                values.push(f(grid.x(i), y));
            }
        }
        Self { grid, values, bc }
    }

    pub fn from_values(grid: Grid, bc: Bc, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values, bc })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn bc(&self) -> Bc {
        self.bc
    }

    pub fn with_bc(mut self, bc: Bc) -> Self {
        self.bc = bc;
        self
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    /// Value at `(i, j)` where either index may step one cell outside the grid.
    #[inline]
    pub fn ghosted(&self, i: isize, j: isize) -> f64 {
        let (nx, ny) = (self.grid.nx as isize, self.grid.ny as isize);
        let mut flip = false;
        let ii = if i < 0 {
            flip = !flip;
            0
        } else if i >= nx {
            flip = !flip;
            nx - 1
        } else {
            i
        };
        let jj = if j < 0 {
            flip = !flip;
            0
        } else if j >= ny {
            flip = !flip;
            ny - 1
        } else {
            j
        };
        let v = self.values[self.grid.idx(ii as usize, jj as usize)];
        if flip {
            self.bc.ghost(v)
        } else {
            v
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            bc: self.bc,
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            bc: self.bc,
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (s, &o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::NonFinite {
                i: k % self.grid.nx,
                j: k / self.grid.nx,
            }),
        }
    }

    pub fn mean(&self) -> f64 {
        integrate(self) / self.grid.area()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub_mean(&mut self) {
        let m = self.mean();
        self.values.iter_mut().for_each(|v| *v -= m);
    }

    /// Bilinear interpolation between cell centers; coordinates within half a
    /// cell of the boundary are clamped onto the outermost centers.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let fx = ((x - g.origin.0) / g.dx - 0.5).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((y - g.origin.1) / g.dy - 0.5).clamp(0.0, (g.ny - 1) as f64);
        let i0 = (fx.floor() as usize).min(g.nx - 2);
        let j0 = (fy.floor() as usize).min(g.ny - 2);
        let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
        let a = self.get(i0, j0) * (1.0 - tx) + self.get(i0 + 1, j0) * tx;
        let b = self.get(i0, j0 + 1) * (1.0 - tx) + self.get(i0 + 1, j0 + 1) * tx;
        a * (1.0 - ty) + b * ty
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField2 {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField2 {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        if x.grid != y.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self { x, y })
    }

    pub fn zeros(grid: Grid, bc: Bc) -> Self {
        Self {
            x: ScalarField::zeros(grid, bc),
            y: ScalarField::zeros(grid, bc),
        }
    }

    pub fn from_fn(grid: Grid, bc: Bc, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        Self {
            x: ScalarField::from_fn(grid, bc, |x, y| f(x, y).0),
            y: ScalarField::from_fn(grid, bc, |x, y| f(x, y).1),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.x.grid()
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.x.axpy(a, &other.x);
        self.y.axpy(a, &other.y);
    }

    pub fn scale(&mut self, a: f64) {
        self.x.scale(a);
        self.y.scale(a);
    }

    pub fn check_finite(&self) -> Result<()> {
        self.x.check_finite()?;
        self.y.check_finite()
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_norm(&self) -> f64 {
        self.x
            .values()
            .iter()
            .zip(self.y.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn magnitude(&self) -> ScalarField {
        self.x.zip_map(&self.y, f64::hypot).with_bc(Bc::NeumannZero)
    }
}

/// Row-major 2x2 tensor field: `[F11, F12, F21, F22]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField2 {
    pub c: [ScalarField; 4],
}

impl TensorField2 {
    pub fn new(c: [ScalarField; 4]) -> Result<Self> {
        let g = c[0].grid;
        if c.iter().any(|f| f.grid != g) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { c })
    }

    pub fn identity(grid: Grid) -> Self {
        let one = ScalarField::constant(grid, Bc::NeumannZero, 1.0);
        let zero = ScalarField::zeros(grid, Bc::NeumannZero);
        Self {
            c: [one.clone(), zero.clone(), zero, one],
        }
    }

    pub fn grid(&self) -> &Grid {
        self.c[0].grid()
    }

    #[inline]
    pub fn at(&self, k: usize) -> [f64; 4] {
        [
            self.c[0].values[k],
            self.c[1].values[k],
            self.c[2].values[k],
            self.c[3].values[k],
        ]
    }

    pub fn det(&self) -> ScalarField {
        let mut d = ScalarField::zeros(*self.grid(), Bc::NeumannZero);
        for (k, v) in d.values.iter_mut().enumerate() {
            let [a, b, c, e] = self.at(k);
            *v = a * e - b * c;
        }
        d
    }

    /// Pointwise `tr(F F^T - I) = |F|^2 - 2`.
    pub fn trace_excess(&self) -> ScalarField {
        let mut t = ScalarField::zeros(*self.grid(), Bc::NeumannZero);
        for (k, v) in t.values.iter_mut().enumerate() {
            let [a, b, c, e] = self.at(k);
            *v = a * a + b * b + c * c + e * e - 2.0;
        }
        t
    }

    pub fn check_finite(&self) -> Result<()> {
        self.c.iter().try_for_each(ScalarField::check_finite)
    }
}

/// Central differences, ghosts from `f.bc()`. The result carries `DirichletZero`,
/// the convention for the velocity-like fields gradients feed into.
pub fn gradient(f: &ScalarField) -> VectorField2 {
    let g = *f.grid();
    let mut gx = ScalarField::zeros(g, Bc::DirichletZero);
    let mut gy = ScalarField::zeros(g, Bc::DirichletZero);
    let (sx, sy) = (0.5 / g.dx, 0.5 / g.dy);
    for j in 0..g.ny {
        let jj = j as isize;
        for i in 0..g.nx {
            let ii = i as isize;
            let k = g.idx(i, j);
            gx.values[k] = (f.ghosted(ii + 1, jj) - f.ghosted(ii - 1, jj)) * sx;
            gy.values[k] = (f.ghosted(ii, jj + 1) - f.ghosted(ii, jj - 1)) * sy;
        }
    }
    VectorField2 { x: gx, y: gy }
}

/// Central-difference divergence; each component uses its own ghosts.
pub fn divergence(v: &VectorField2) -> ScalarField {
    let g = *v.grid();
    let mut d = ScalarField::zeros(g, Bc::NeumannZero);
    let (sx, sy) = (0.5 / g.dx, 0.5 / g.dy);
    for j in 0..g.ny {
        let jj = j as isize;
        for i in 0..g.nx {
            let ii = i as isize;
            d.values[g.idx(i, j)] = (v.x.ghosted(ii + 1, jj) - v.x.ghosted(ii - 1, jj)) * sx
                + (v.y.ghosted(ii, jj + 1) - v.y.ghosted(ii, jj - 1)) * sy;
        }
    }
    d
}

/// Five-point Laplacian; the result keeps `f.bc()`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let mut out = ScalarField::zeros(g, f.bc);
    let (ax, ay) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy));
    for j in 0..g.ny {
        let jj = j as isize;
        for i in 0..g.nx {
            let ii = i as isize;
            let c = f.get(i, j);
            out.values[g.idx(i, j)] = (f.ghosted(ii + 1, jj) - 2.0 * c + f.ghosted(ii - 1, jj))
                * ax
                + (f.ghosted(ii, jj + 1) - 2.0 * c + f.ghosted(ii, jj - 1)) * ay;
        }
    }
    out
}

/// Face-centered `div(c grad f)` with `c` averaged onto faces. Boundary faces
/// take the adjacent cell's coefficient; with `c == 1` this is `laplacian`.
pub fn div_coef_grad(coef: &ScalarField, f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let mut out = ScalarField::zeros(g, f.bc);
    let (ax, ay) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy));
    let face = |a: isize, b: isize, c: isize, d: isize| -> f64 {
        0.5 * (coef.ghosted_neumann(a, b) + coef.ghosted_neumann(c, d))
    };
    for j in 0..g.ny {
        let jj = j as isize;
        for i in 0..g.nx {
            let ii = i as isize;
            let c = f.get(i, j);
            let fe = face(ii, jj, ii + 1, jj) * (f.ghosted(ii + 1, jj) - c);
            let fw = face(ii, jj, ii - 1, jj) * (c - f.ghosted(ii - 1, jj));
            let fnn = face(ii, jj, ii, jj + 1) * (f.ghosted(ii, jj + 1) - c);
            let fs = face(ii, jj, ii, jj - 1) * (c - f.ghosted(ii, jj - 1));
            out.values[g.idx(i, j)] = (fe - fw) * ax + (fnn - fs) * ay;
        }
    }
    out
}

impl ScalarField {
    #[inline]
    fn ghosted_neumann(&self, i: isize, j: isize) -> f64 {
        let ii = i.clamp(0, self.grid.nx as isize - 1) as usize;
        let jj = j.clamp(0, self.grid.ny as isize - 1) as usize;
        self.values[self.grid.idx(ii, jj)]
    }
}

/// Face-based discrete `∫ w |∇f|^2`, including wall faces through the ghost
/// rule of `f`. Its first variation in `f` is `-2 div_coef_grad(w, f)`, which
/// makes it the energy-consistent partner of `laplacian`.
pub fn face_gradient_energy(f: &ScalarField, weight: Option<&ScalarField>) -> f64 {
    let g = *f.grid();
    let w = |a: isize, b: isize, c: isize, d: isize| -> f64 {
        weight.map_or(1.0, |w| {
            0.5 * (w.ghosted_neumann(a, b) + w.ghosted_neumann(c, d))
        })
    };
    let mut sx = 0.0;
    let mut sy = 0.0;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    // wall faces sit half a cell from the center they difference against
    let wall = |edge: bool| if edge { 0.5 } else { 1.0 };
    for j in 0..ny {
        for i in 0..=nx {
            let d = f.ghosted(i, j) - f.ghosted(i - 1, j);
            if d != 0.0 {
                sx += wall(i == 0 || i == nx) * w(i - 1, j, i, j) * d * d;
            }
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            let d = f.ghosted(i, j) - f.ghosted(i, j - 1);
            if d != 0.0 {
                sy += wall(j == 0 || j == ny) * w(i, j - 1, i, j) * d * d;
            }
        }
    }
    (sx / (g.dx * g.dx) + sy / (g.dy * g.dy)) * g.cell_area()
}

/// Midpoint quadrature `Σ f dx dy`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.values.iter().sum::<f64>() * f.grid.cell_area()
}

pub fn inner(f: &ScalarField, g: &ScalarField) -> f64 {
    debug_assert_eq!(f.grid, g.grid);
    f.values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * f.grid.cell_area()
}

pub fn inner_vec(a: &VectorField2, b: &VectorField2) -> f64 {
    inner(&a.x, &b.x) + inner(&a.y, &b.y)
}

pub fn norm_l2(f: &ScalarField) -> f64 {
    inner(f, f).sqrt()
}

pub fn norm_l2_vec(v: &VectorField2) -> f64 {
    inner_vec(v, v).sqrt()
}

pub fn norm_linf(f: &ScalarField) -> f64 {
    f.max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(nx: usize, ny: usize) -> Grid {
        Grid::channel(nx, ny).unwrap()
    }

    #[test]
    fn grid_rejects_small_and_degenerate() {
        assert!(Grid::channel(7, 8).is_err());
        assert!(Grid::new(8, 8, 0.0, 1.0, (0.0, 0.0)).is_err());
        let g = grid(64, 32);
        assert_eq!(g.dx, 2.0 / 64.0);
        assert_eq!(g.dy, 1.0 / 32.0);
        assert_eq!(g.x(0), g.dx / 2.0);
        assert_eq!(g.y(0), -0.5 + g.dy / 2.0);
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let g = grid(16, 8);
        let f = ScalarField::constant(g, Bc::NeumannZero, 3.5);
        let gr = gradient(&f);
        assert_eq!(gr.max_norm(), 0.0);
        assert_eq!(laplacian(&f).max_abs(), 0.0);
        let v = VectorField2 {
            x: ScalarField::constant(g, Bc::NeumannZero, 1.0),
            y: ScalarField::constant(g, Bc::NeumannZero, -2.0),
        };
        assert_eq!(divergence(&v).max_abs(), 0.0);
    }

    #[test]
    fn linear_fields_are_exact_in_the_interior() {
        let g = grid(16, 16);
        let f = ScalarField::from_fn(g, Bc::DirichletZero, |x, _| x);
        let gr = gradient(&f);
        let v = VectorField2::from_fn(g, Bc::NeumannZero, |x, y| (x, y));
        let rot = VectorField2::from_fn(g, Bc::NeumannZero, |x, y| (-y, x));
        let d = divergence(&v);
        let dr = divergence(&rot);
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                assert!((gr.x.get(i, j) - 1.0).abs() < 1e-12);
                assert!(gr.y.get(i, j).abs() < 1e-12);
                assert!((d.get(i, j) - 2.0).abs() < 1e-12);
                assert!(dr.get(i, j).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadratic_laplacian_interior() {
        let g = grid(32, 16);
        let f = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| x * x + y * y);
        let l = laplacian(&f);
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                assert!((l.get(i, j) - 4.0).abs() < 1e-9);
            }
        }
    }

    fn cos_errors(n: usize) -> (f64, f64) {
        let g = grid(2 * n, n);
        let k = PI / g.lx;
        let f = ScalarField::from_fn(g, Bc::NeumannZero, |x, _| (k * x).cos());
        let gr = gradient(&f);
        let l = laplacian(&f);
        let mut eg: f64 = 0.0;
        let mut el: f64 = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let x = g.x(i);
                eg = eg.max((gr.x.get(i, j) + k * (k * x).sin()).abs());
                el = el.max((l.get(i, j) + k * k * (k * x).cos()).abs());
            }
        }
        (eg, el)
    }

    #[test]
    fn cosine_derivatives_converge_second_order() {
        let (g1, l1) = cos_errors(16);
        let (g2, l2) = cos_errors(32);
        assert!((g1 / g2 - 4.0).abs() < 0.1, "{}", g1 / g2);
        assert!((l1 / l2 - 4.0).abs() < 0.1, "{}", l1 / l2);
    }

    #[test]
    fn integral_of_x_over_channel() {
        let g = grid(64, 32);
        let one = ScalarField::constant(g, Bc::NeumannZero, 1.0);
        assert!((integrate(&one) - 2.0).abs() < 1e-14);
        let f = ScalarField::from_fn(g, Bc::NeumannZero, |x, _| x);
        // midpoint rule is exact for linear integrands
        assert!((integrate(&f) - 2.0).abs() < 1e-12);
        let s = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| (x * y).sin());
        assert!((inner(&s, &s) - norm_l2(&s).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn ghost_rules() {
        let g = grid(8, 8);
        let f = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| x + 10.0 * y);
        assert_eq!(f.ghosted(-1, 3), f.get(0, 3));
        assert_eq!(f.ghosted(8, 3), f.get(7, 3));
        let d = f.clone().with_bc(Bc::DirichletZero);
        assert_eq!(d.ghosted(-1, 3), -d.get(0, 3));
        assert_eq!(d.ghosted(3, 8), -d.get(3, 7));
        // corner ghosts are never used by the 5-point stencils but stay consistent
        assert_eq!(d.ghosted(-1, -1), d.get(0, 0));
    }

    #[test]
    fn face_energy_is_dual_to_laplacian() {
        let g = grid(16, 8);
        for bc in [Bc::NeumannZero, Bc::DirichletZero] {
            let f = ScalarField::from_fn(g, bc, |x, y| (3.0 * x).sin() + (x * y).cos() + y);
            let e = face_gradient_energy(&f, None);
            assert!((e + inner(&f, &laplacian(&f))).abs() < 1e-10 * e.abs());
            let w = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| 1.0 + x * x + y);
            let ew = face_gradient_energy(&f, Some(&w));
            assert!((ew + inner(&f, &div_coef_grad(&w, &f))).abs() < 1e-10 * ew.abs());
        }
    }

    #[test]
    fn div_coef_grad_with_unit_coefficient_is_laplacian() {
        let g = grid(16, 8);
        let f = ScalarField::from_fn(g, Bc::DirichletZero, |x, y| (x * 2.0).sin() * (y * 3.0).cos());
        let one = ScalarField::constant(g, Bc::NeumannZero, 1.0);
        let a = div_coef_grad(&one, &f);
        let b = laplacian(&f);
        for (p, q) in a.values().iter().zip(b.values()) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn bilinear_sample_reproduces_linear_fields() {
        let g = grid(16, 8);
        let f = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| 2.0 * x - y + 0.5);
        for &(x, y) in &[(0.3, 0.1), (1.0, 0.0), (1.7, -0.33)] {
            assert!((f.sample(x, y) - (2.0 * x - y + 0.5)).abs() < 1e-12);
        }
    }
}
