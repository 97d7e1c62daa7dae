//! Snapshot files and CSV emission.
//!
//! A snapshot component file is little-endian: the magic `NSCH`, `u32 nx`,
//! `u32 ny`, `f64 Lx`, `f64 Ly`, `f64 t`, then `nx * ny` row-major `f64`
//! values. A state is stored as one file per component, `<stem>.<name>.bin`,
//! with names from [`COMPONENTS`]. The channel origin `(0, -Ly/2)` is implied.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::{MetricsRow, Profile};
use crate::energy::EnergyReport;
use crate::error::{Error, Result};
use crate::fields::{Bc, Grid, ScalarField, TensorField2, VectorField2};
use crate::model::State;
use crate::sampler::SamplePoint;

const MAGIC: &[u8; 4] = b"NSCH";

pub const COMPONENTS: [&str; 8] = ["phi", "u", "v", "p", "F11", "F12", "F21", "F22"];

pub const ENERGY_HEADER: [&str; 10] = [
    "t", "E_total", "E_k", "E_m", "E_e", "D_visc", "D_mu", "D_Fdiff", "D_friction", "dE_dt_est",
];

pub const METRICS_HEADER: [&str; 10] = [
    "t",
    "mean_phi",
    "mean_phi_drift",
    "div_u_norm",
    "detF_max_err",
    "phi_min",
    "phi_max",
    "interface_width",
    "linf_vs_init",
    "linf_full",
];

pub fn write_field(path: &Path, f: &ScalarField, t: f64) -> Result<()> {
    let g = f.grid();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(g.nx as u32).to_le_bytes())?;
    w.write_all(&(g.ny as u32).to_le_bytes())?;
    for v in [g.lx, g.ly, t] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in f.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one component file; returns the field (with `bc`) and its time.
pub fn read_field(path: &Path, bc: Bc) -> Result<(ScalarField, f64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("{}: bad magic", path.display())));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    let mut u32_ = |r: &mut BufReader<File>| -> Result<usize> {
        r.read_exact(&mut b4)?;
        Ok(u32::from_le_bytes(b4) as usize)
    };
    let nx = u32_(&mut r)?;
    let ny = u32_(&mut r)?;
    let mut f64_ = |r: &mut BufReader<File>| -> Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let (lx, ly, t) = (f64_(&mut r)?, f64_(&mut r)?, f64_(&mut r)?);
    let grid = Grid::new(nx, ny, lx, ly, (0.0, -ly / 2.0))?;
    let mut values = Vec::with_capacity(nx * ny);
    for _ in 0..nx * ny {
        values.push(f64_(&mut r).map_err(|_| Error::Format(format!("{}: truncated", path.display())))?);
    }
    if r.read(&mut b8)? != 0 {
        return Err(Error::Format(format!("{}: trailing bytes", path.display())));
    }
    Ok((ScalarField::from_values(grid, bc, values)?, t))
}

pub fn component_path(stem: &Path, name: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(format!(".{name}.bin"));
    PathBuf::from(s)
}

/// Accepts either a stem or the path of its `phi` component.
pub fn snapshot_stem(path: &Path) -> PathBuf {
    let s = path.to_string_lossy();
    match s.strip_suffix(".phi.bin") {
        Some(stem) => PathBuf::from(stem),
        None => path.to_path_buf(),
    }
}

pub fn write_snapshot(stem: &Path, state: &State) -> Result<Vec<PathBuf>> {
    let fields = [
        &state.phi, &state.u.x, &state.u.y, &state.p, &state.f.c[0], &state.f.c[1], &state.f.c[2], &state.f.c[3],
    ];
    let mut paths = Vec::with_capacity(fields.len());
    for (name, f) in COMPONENTS.iter().zip(fields) {
        let path = component_path(stem, name);
        write_field(&path, f, state.t)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Loads a snapshot. `phi` is required; missing velocity and pressure files
/// read as zero and missing deformation files as the identity.
pub fn read_snapshot(path: &Path) -> Result<State> {
    let stem = snapshot_stem(path);
    let (phi, t) = read_field(&component_path(&stem, "phi"), Bc::NeumannZero)?;
    let grid = *phi.grid();
    let optional = |name: &str, bc: Bc, fill: f64| -> Result<ScalarField> {
        let p = component_path(&stem, name);
        if !p.exists() {
            return Ok(ScalarField::constant(grid, bc, fill));
        }
        let (f, _) = read_field(&p, bc)?;
        if f.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        Ok(f)
    };
    let u = VectorField2::new(optional("u", Bc::DirichletZero, 0.0)?, optional("v", Bc::DirichletZero, 0.0)?)?;
    let p = optional("p", Bc::NeumannZero, 0.0)?;
    let f = TensorField2::new([
        optional("F11", Bc::NeumannZero, 1.0)?,
        optional("F12", Bc::NeumannZero, 0.0)?,
        optional("F21", Bc::NeumannZero, 0.0)?,
        optional("F22", Bc::NeumannZero, 1.0)?,
    ])?;
    let state = State { t, u, p, phi, f };
    state.check_consistent()?;
    Ok(state)
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub struct EnergyCsv {
    w: csv::Writer<File>,
}

impl EnergyCsv {
    pub fn create(path: &Path) -> Result<Self> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(ENERGY_HEADER)?;
        Ok(Self { w })
    }

    pub fn write(&mut self, r: &EnergyReport) -> Result<()> {
        let row = [
            r.t, r.e_total, r.e_kinetic, r.e_mixed, r.e_elastic, r.d_visc, r.d_mu, r.d_fdiff, r.d_friction, r.de_dt_est,
        ];
        self.w.write_record(row.map(num))?;
        self.w.flush()?;
        Ok(())
    }
}

pub struct MetricsCsv {
    w: csv::Writer<File>,
}

impl MetricsCsv {
    pub fn create(path: &Path) -> Result<Self> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(METRICS_HEADER)?;
        Ok(Self { w })
    }

    pub fn write(&mut self, m: &MetricsRow) -> Result<()> {
        let row = [
            num(m.t),
            num(m.mean_phi),
            num(m.mean_phi_drift),
            num(m.div_u_norm),
            num(m.det_f_max_err),
            num(m.phi_min),
            num(m.phi_max),
            m.interface_width.map(num).unwrap_or_default(),
            num(m.linf_vs_init),
            num(m.linf_full),
        ];
        self.w.write_record(row)?;
        self.w.flush()?;
        Ok(())
    }
}

pub fn write_section(path: &Path, profile: &Profile) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "phi"])?;
    for (x, v) in profile.x.iter().zip(&profile.values) {
        w.write_record([num(*x), num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_samples(path: &Path, points: &[SamplePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "density_value"])?;
    for p in points {
        w.write_record([num(p.x), num(p.y), num(p.density_value)])?;
    }
    w.flush()?;
    Ok(())
}
