//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Wall-clock budgets are part of each criterion.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nsch::cases::{case_spec, init_state, CaseName, THROMBUS_CENTER, THROMBUS_RADIUS};
use nsch::cli::{run, RunConfig};
use nsch::diagnostics::{axial_section, interface_width, midpoint_phi, AXIS_Y};
use nsch::energy::{first_variation_check, mixed_energy, total_energy};
use nsch::fields::{divergence, gradient, integrate, laplacian, norm_l2_vec, Bc, Grid, ScalarField, VectorField2};
use nsch::model::State;
use nsch::sampler::{energy_density, metropolis_hastings, sample_state, SamplerConfig};
use nsch::spectral::{
    apply_ch, apply_helmholtz, relative_residual, solve_ch_implicit, solve_helmholtz_neumann, solve_poisson_neumann,
    Basis, Spectral2d,
};
use nsch::stepper::{project, scaled_divergence, StepConfig, Stepper};

/// det F drift of the reference Case A run at t = 0.1 (64x32, default stepping).
const DET_DRIFT_REFERENCE: f64 = 3.867e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn reference_grid() -> Grid {
    Grid::channel(64, 32).unwrap()
}

/// Runs `name` to `t_end` with default stepping, calling `each` after every step.
fn integrate_case(name: CaseName, t_end: f64, mut each: impl FnMut(&State, &State)) -> State {
    let g = reference_grid();
    let spec = case_spec(name);
    let stepper = Stepper::new(g, spec.params, StepConfig::default()).unwrap();
    let mut s = init_state(&spec, g);
    while s.t < t_end - 1e-12 {
        let dt = stepper.cfl_dt(&s).min(t_end - s.t);
        let next = stepper.advance(&s, dt).unwrap();
        each(&s, &next);
        s = next;
    }
    s
}

fn linf_err(a: &ScalarField, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let g = a.grid();
    let mut e: f64 = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            e = e.max((a.get(i, j) - exact(g.x(i), g.y(j))).abs());
        }
    }
    e
}

fn operator_mms() -> Outcome {
    let f = |x: f64, y: f64| (PI * x).cos() * (2.0 * PI * (y + 0.5)).cos();
    let fx = |x: f64, y: f64| -PI * (PI * x).sin() * (2.0 * PI * (y + 0.5)).cos();
    let fy = |x: f64, y: f64| -2.0 * PI * (PI * x).cos() * (2.0 * PI * (y + 0.5)).sin();
    let lap = |x: f64, y: f64| -5.0 * PI * PI * f(x, y);
    let vx = |x: f64, y: f64| (PI * x).sin() * (PI * y).cos();
    let vy = |x: f64, y: f64| (PI * x).cos() * (2.0 * PI * (y + 0.5)).sin();
    let div = |x: f64, y: f64| PI * (PI * x).cos() * (PI * y).cos() + 2.0 * PI * (PI * x).cos() * (2.0 * PI * (y + 0.5)).cos();

    let mut errs = [[0.0; 3]; 3];
    for (k, n) in [32usize, 64, 128].into_iter().enumerate() {
        let g = Grid::channel(n, n / 2).unwrap();
        let s = ScalarField::from_fn(g, Bc::NeumannZero, f);
        let gr = gradient(&s);
        errs[0][k] = linf_err(&gr.x, fx).max(linf_err(&gr.y, fy));
        errs[1][k] = linf_err(&laplacian(&s), lap);
        let v = VectorField2::from_fn(g, Bc::DirichletZero, |x, y| (vx(x, y), vy(x, y)));
        errs[2][k] = linf_err(&divergence(&v), div);
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, e) in ["gradient", "laplacian", "divergence"].iter().zip(errs) {
        let orders = [(e[0] / e[1]).log2(), (e[1] / e[2]).log2()];
        pass &= orders.iter().all(|o| (o - 2.0).abs() <= 0.15);
        parts.push(format!("{name} {:.3}/{:.3}", orders[0], orders[1]));
    }
    outcome(pass, format!("orders 32->64->128: {} (need 2.00 +/- 0.15)", parts.join(", ")))
}

fn solver_round_trips() -> Outcome {
    let g = reference_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sine = Spectral2d::new(g, Basis::Sine);
    let mut worst = [0.0f64; 3];
    for _ in 0..20 {
        let mut rhs = ScalarField::from_fn(g, Bc::NeumannZero, |_, _| rng.gen_range(-1.0..1.0));
        rhs.sub_mean();
        let q = solve_poisson_neumann(&rhs).unwrap().q;
        worst[0] = worst[0].max(relative_residual(laplacian(&q).values(), rhs.values()));

        let f = ScalarField::from_fn(g, Bc::NeumannZero, |_, _| rng.gen_range(-1.0..1.0));
        let a = 10f64.powf(rng.gen_range(-5.0..-1.0));
        let w = solve_helmholtz_neumann(&f, a).unwrap();
        worst[1] = worst[1].max(relative_residual(apply_helmholtz(&w, a).values(), f.values()));
        let fd = f.clone().with_bc(Bc::DirichletZero);
        let wd = sine.helmholtz(&fd, a).unwrap();
        worst[1] = worst[1].max(relative_residual(apply_helmholtz(&wd, a).values(), fd.values()));

        let b = 10f64.powf(rng.gen_range(-9.0..-5.0));
        let s = 10f64.powf(rng.gen_range(-8.0..-3.0));
        let w = solve_ch_implicit(&f, b, s).unwrap();
        worst[2] = worst[2].max(relative_residual(apply_ch(&w, b, s).values(), f.values()));
    }
    let pass = worst.iter().all(|&r| r <= 1e-10);
    outcome(
        pass,
        format!(
            "max relative residual over 20 rhs: poisson {:.2e}, helmholtz {:.2e}, ch {:.2e} (need <= 1e-10)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn projection() -> Outcome {
    let g = reference_grid();
    let q = ScalarField::from_fn(g, Bc::NeumannZero, |x, _| (PI * x / g.lx).cos());
    let input = gradient(&q);
    let (rest, _) = project(&input).unwrap();
    let grad_div = scaled_divergence(&rest, &input);
    let grad_norm = norm_l2_vec(&rest);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut noise = || ScalarField::from_fn(g, Bc::DirichletZero, |_, _| rng.gen_range(-1.0..1.0));
    let raw = VectorField2::new(noise(), noise()).unwrap();
    let (sol, _) = project(&raw).unwrap();
    let sol_div = scaled_divergence(&sol, &raw);
    let (again, _) = project(&sol).unwrap();
    let mut d = again;
    d.axpy(-1.0, &sol);
    let change = d.max_norm();
    let pass = grad_div <= 1e-8 && grad_norm <= 1e-8 && sol_div <= 1e-8 && change <= 1e-10;
    outcome(
        pass,
        format!(
            "gradient input: scaled div {grad_div:.2e}, residual norm {grad_norm:.2e} (need <= 1e-8); \
             random input: scaled div {sol_div:.2e} (need <= 1e-8); div-free input change {change:.2e} (need <= 1e-10)"
        ),
    )
}

fn mass_and_det() -> (Outcome, Outcome) {
    let spec = case_spec(CaseName::A);
    let g = reference_grid();
    let m0 = integrate(&init_state(&spec, g).phi);
    let mut drift: f64 = 0.0;
    let fin = integrate_case(CaseName::A, 0.1, |_, s| {
        drift = drift.max(((integrate(&s.phi) - m0) / m0).abs());
    });
    let mass = outcome(
        drift <= 1e-10,
        format!("Case A 64x32 to t = {:.2}: max relative mean drift {drift:.2e} (need <= 1e-10)", fin.t),
    );

    // det F through the driver's metrics output
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::for_case(CaseName::A);
    cfg.t_end = 0.1;
    cfg.out_dir = dir.path().to_path_buf();
    run(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let col = rdr.headers().unwrap().iter().position(|h| h == "detF_max_err").unwrap();
    let rows: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[col].parse().unwrap())
        })
        .collect();
    let times: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let at0 = rows[0].1;
    let last = rows.last().unwrap().1;
    let band = (last - DET_DRIFT_REFERENCE).abs() <= 0.2 * DET_DRIFT_REFERENCE;
    let det = outcome(
        at0 == 0.0 && times == [0.0, 0.05, 0.1] && band,
        format!(
            "detF_max_err at t=0: {at0:e}; rows at t = {times:?}; drift at t=0.1 {last:.4e} vs reference {DET_DRIFT_REFERENCE:.3e} (+/- 20%)"
        ),
    );
    (mass, det)
}

fn energy_dissipation() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in [CaseName::A, CaseName::B, CaseName::Bp] {
        let p = case_spec(name).params;
        let e0 = total_energy(&init_state(&case_spec(name), reference_grid()), &p).e_total;
        let mut worst = f64::NEG_INFINITY;
        let mut steps = 0;
        integrate_case(name, 0.1, |prev, next| {
            let inc = total_energy(next, &p).e_total - total_energy(prev, &p).e_total;
            worst = worst.max(inc - (1e-8 * e0 + 1e-12));
            steps += 1;
        });
        pass &= worst <= 0.0;
        parts.push(format!("{name} max(dE - tol) {worst:.2e} over {steps} steps"));
    }
    outcome(pass, format!("{} (need <= 0)", parts.join("; ")))
}

fn variation_duality() -> Outcome {
    let spec = case_spec(CaseName::A);
    let g = reference_grid();
    let state = init_state(&spec, g);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut coef = [[0.0; 5]; 5];
        for row in coef.iter_mut() {
            for c in row.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
        let psi = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| {
            let mut s = 0.0;
            for (m, row) in coef.iter().enumerate() {
                for (n, c) in row.iter().enumerate() {
                    s += c * (m as f64 * PI * x / g.lx).cos() * (n as f64 * PI * (y + 0.5) / g.ly).cos();
                }
            }
            s
        });
        worst = worst.max(first_variation_check(&state, &spec.params, &psi, 1e-4).unwrap());
    }
    outcome(worst <= 1e-4, format!("max relative error over 20 random directions at eps = 1e-4: {worst:.2e} (need <= 1e-4)"))
}

fn width_at(name: CaseName, t: f64) -> Result<f64, String> {
    let s = integrate_case(name, t, |_, _| {});
    interface_width(&axial_section(&s.phi, AXIS_Y)).map_err(|e| e.to_string())
}

fn case_b_ordering() -> Outcome {
    match (width_at(CaseName::B, 0.2), width_at(CaseName::Bp, 0.2)) {
        (Ok(b), Ok(bp)) => outcome(b > bp, format!("interface width at t = 0.2: B {b:.5} vs B' {bp:.5} (need B > B')")),
        (b, bp) => outcome(false, format!("width unavailable: B {b:?}, B' {bp:?}")),
    }
}

fn case_c_polarization() -> Outcome {
    let c = midpoint_phi(&integrate_case(CaseName::C, 0.3, |_, _| {}));
    let cp = midpoint_phi(&integrate_case(CaseName::Cp, 0.3, |_, _| {}));
    outcome(c < cp, format!("phi(1, 0) at t = 0.3: C {c:.5} vs C' {cp:.5} (need C < C')"))
}

fn case_d_energy() -> Outcome {
    let g = reference_grid();
    let e = |h: f64| {
        let mut spec = case_spec(CaseName::Dp);
        spec.params.h = h;
        mixed_energy(&init_state(&spec, g).phi, &spec.params)
    };
    let (thin, thick) = (e(0.05), e(0.08));
    outcome(thin > thick, format!("E_mixed(t=0): h=0.05 {thin:.6e} vs h=0.08 {thick:.6e} (need thin > thick)"))
}

fn sampler_fidelity() -> Outcome {
    let g = reference_grid();
    let sigma: f64 = 0.1;
    let mut bump = ScalarField::from_fn(g, Bc::NeumannZero, |x, y| {
        (-((x - 1.0).powi(2) + y * y) / (2.0 * sigma * sigma)).exp()
    });
    let total = integrate(&bump);
    bump.scale(1.0 / total);
    let cfg = SamplerConfig { n_samples: 200_000, burn_in: 10_000, seed: 11, ..Default::default() };
    let chain = metropolis_hastings(&bump, &cfg).unwrap();
    let n = chain.points.len() as f64;
    let mx = chain.points.iter().map(|p| p.x).sum::<f64>() / n;
    let my = chain.points.iter().map(|p| p.y).sum::<f64>() / n;
    let mean_err = (mx - 1.0).abs().max(my.abs());

    // 16x8 bins; target mass by midpoint quadrature of the interpolated density
    let (bx, by) = (16usize, 8usize);
    let bin = |x: f64, y: f64| {
        let i = ((x / g.lx * bx as f64) as usize).min(bx - 1);
        let j = (((y - g.origin.1) / g.ly * by as f64) as usize).min(by - 1);
        j * bx + i
    };
    let mut emp = vec![0.0; bx * by];
    for p in &chain.points {
        emp[bin(p.x, p.y)] += 1.0 / n;
    }
    let (qx, qy) = (512usize, 256usize);
    let mut target = vec![0.0; bx * by];
    let mut mass = 0.0;
    for j in 0..qy {
        for i in 0..qx {
            let x = (i as f64 + 0.5) * g.lx / qx as f64;
            let y = g.origin.1 + (j as f64 + 0.5) * g.ly / qy as f64;
            let d = bump.sample(x, y);
            target[bin(x, y)] += d;
            mass += d;
        }
    }
    let tv = 0.5 * emp.iter().zip(&target).map(|(e, t)| (e - t / mass).abs()).sum::<f64>();

    let spec = case_spec(CaseName::A);
    let state = init_state(&spec, g);
    let band = 3.0 * spec.params.h;
    let (cx, cy) = THROMBUS_CENTER;
    let near = |x: f64, y: f64| ((x - cx).hypot(y - cy) - THROMBUS_RADIUS).abs() <= band;
    let density = energy_density(&state, &spec.params, cfg.floor_frac).unwrap();
    let mut dmass = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            if near(g.x(i), g.y(j)) {
                dmass += density.get(i, j) * g.cell_area();
            }
        }
    }
    let samples = sample_state(&state, &spec.params, &cfg).unwrap();
    let frac = samples.points.iter().filter(|p| near(p.x, p.y)).count() as f64 / samples.points.len() as f64;

    let pass = mean_err <= 0.01 && tv <= 0.05 && dmass >= 0.7 && frac >= 0.6;
    outcome(
        pass,
        format!(
            "bump mean error {mean_err:.4} (<= 0.01), binned TV {tv:.4} (<= 0.05); \
             annulus density mass {dmass:.3} (>= 0.7), annulus sample share {frac:.3} (>= 0.6)"
        ),
    )
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let mut cfg = RunConfig::for_case(CaseName::A);
        cfg.t_end = 0.1;
        cfg.seed = 5;
        cfg.out_dir = d.path().to_path_buf();
        cfg.emit = nsch::cli::Emit::ALL.into();
        cfg.sampler.n_samples = 2_000;
        cfg.sampler.burn_in = 200;
        run(&cfg).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    let mut differing = Vec::new();
    for n in &names {
        let a = std::fs::read(dirs[0].path().join(n)).unwrap();
        let b = std::fs::read(dirs[1].path().join(n)).ok();
        if b.as_deref() != Some(&a[..]) {
            differing.push(n.to_string_lossy().into_owned());
        }
    }
    outcome(
        differing.is_empty() && names.len() >= 4,
        format!("{} CSV files compared, {} differ {:?}", names.len(), differing.len(), differing),
    )
}

type Criterion = (&'static str, Duration, fn() -> Vec<Outcome>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("operator MMS", Duration::from_secs(5), || vec![operator_mms()]),
        ("solver round-trips", Duration::from_secs(5), || vec![solver_round_trips()]),
        ("projection", Duration::from_secs(1), || vec![projection()]),
        ("mass conservation | det F monitoring", Duration::from_secs(60), || {
            let (a, b) = mass_and_det();
            vec![a, b]
        }),
        ("energy dissipation", Duration::from_secs(180), || vec![energy_dissipation()]),
        ("variation-potential duality", Duration::from_secs(10), || vec![variation_duality()]),
        ("Case B ordering", Duration::from_secs(180), || vec![case_b_ordering()]),
        ("Case C polarization", Duration::from_secs(300), || vec![case_c_polarization()]),
        ("Case D energy ordering", Duration::from_secs(1), || vec![case_d_energy()]),
        ("sampler fidelity", Duration::from_secs(30), || vec![sampler_fidelity()]),
        ("determinism", Duration::from_secs(120), || vec![determinism()]),
    ];
    // sequential, so each timing is the criterion's own
    let results: Vec<(Vec<Outcome>, Duration)> = criteria
        .iter()
        .map(|(_, _, f)| {
            let start = Instant::now();
            let out = f();
            (out, start.elapsed())
        })
        .collect();

    let mut failed = 0;
    for ((label, budget, _), (outs, took)) in criteria.iter().zip(&results) {
        let labels: Vec<&str> = label.split(" | ").collect();
        for (name, o) in labels.iter().zip(outs) {
            let pass = o.pass && took <= budget;
            let verdict = if pass { "PASS" } else { "FAIL" };
            if !pass {
                failed += 1;
            }
            println!("{verdict} {name}: {} [{:.1}s, budget {}s]", o.detail, took.as_secs_f64(), budget.as_secs());
        }
    }
    let total: usize = results.iter().map(|r| r.0.len()).sum();
    println!("acceptance: {} of {total} criteria passed", total - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
