//! End-to-end acceptance gate. Each test exercises one contract-level
//! property against an independent oracle (exact Riemann solutions, the
//! Godunov reference scheme, closed-form envelopes, Gaussian convolution)
//! and prints a single pass/fail line.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use sbl_core::{
    bump_battery, calibrate_entropy_tol, chi_positive_distance, entropy_battery, godunov_reference,
    kruzkov_constants, picard_map, project_density, reconstruct_density, sample_shift,
    sequence_distance, solve_pathwise_direct, solve_pathwise_shift, DensityField, FluxModel,
    ForcingModel, KineticField, NoiseModel, SolverConfig, SpaceGrid, Trajectory, VelocityGrid,
};

fn report(name: &str, pass: bool, detail: &str) {
    println!("{name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} failed: {detail}");
}

fn budget(name: &str, start: Instant, seconds: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < seconds,
        "{name} exceeded runtime budget: {elapsed:.1}s > {seconds}s"
    );
}

/// Smooth compactly supported profile, C1, nonnegative.
fn smooth_bump(center: f64, width: f64, height: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x: f64| {
        let s = (x - center) / width;
        if s.abs() < 1.0 {
            height * (1.0 - s * s).powi(2)
        } else {
            0.0
        }
    }
}

/// Random sum of two smooth bumps, supported well inside [lo + m, hi - m].
fn random_profile(rng: &mut ChaCha12Rng, lo: f64, hi: f64, max_height: f64) -> impl Fn(f64) -> f64 + Copy {
    let m = 0.25 * (hi - lo);
    let c1 = rng.random_range(lo + m..hi - m);
    let c2 = rng.random_range(lo + m..hi - m);
    let w1 = rng.random_range(0.1..0.5) * m;
    let w2 = rng.random_range(0.1..0.5) * m;
    let h1 = rng.random_range(0.2..1.0) * max_height;
    let h2 = rng.random_range(0.0..1.0) * (max_height - h1).max(0.0);
    let b1 = smooth_bump(c1, w1, h1);
    let b2 = smooth_bump(c2, w2, h2);
    move |x| b1(x) + b2(x)
}

/// Exact entropy solution of Burgers with box data: height 1 on (xl, 0),
/// zero elsewhere. For t < -2 xl the rarefaction from xl and the shock from
/// 0 (speed 1/2) have not interacted:
///   rho = (x - xl)/t on (xl, xl + t), 1 on [xl + t, t/2), 0 outside.
/// Returned as exact cell averages via the closed-form antiderivative.
fn burgers_box_exact(xl: f64, t: f64, grid: SpaceGrid<f64>) -> DensityField<f64> {
    assert!(t > 0.0 && t < -2.0 * xl);
    let anti = |x: f64| -> f64 {
        if x <= xl {
            0.0
        } else if x <= xl + t {
            (x - xl) * (x - xl) / (2.0 * t)
        } else if x <= t / 2.0 {
            t / 2.0 + (x - xl - t)
        } else {
            -xl
        }
    };
    let values = (0..grid.n_cells)
        .map(|i| {
            let lo = grid.x_min + grid.dx * i as f64;
            (anti(lo + grid.dx) - anti(lo)) / grid.dx
        })
        .collect();
    DensityField::new(grid, values)
}

fn burgers_shock_config(nx: usize, eps: f64) -> (SolverConfig<f64>, DensityField<f64>) {
    let xgrid = SpaceGrid::new(-1.0, 2.0, nx).unwrap();
    let vgrid = VelocityGrid::for_support(1.0, 0.0, 64).unwrap();
    let mut config = SolverConfig::new(
        FluxModel::burgers(),
        ForcingModel::zero(),
        xgrid,
        vgrid,
        eps,
        0.5,
    );
    config.record_every = usize::MAX;
    let rho0 = DensityField::from_fn(xgrid, |x: f64| {
        if (-0.9..0.0).contains(&x) {
            1.0
        } else {
            0.0
        }
    });
    (config, rho0)
}

#[test]
fn chi_identities() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let xgrid = SpaceGrid::new(0.0, 1.0, 4).unwrap();
    let mut worst_round = 0.0f64;
    let mut worst_pos = 0.0f64;
    for _ in 0..1000 {
        let n = 2 * rng.random_range(4..40usize);
        let band = rng.random_range(1.0..3.0);
        let vgrid = VelocityGrid::new(-band, band, n).unwrap();
        let values: Vec<f64> = (0..4)
            .map(|_| rng.random_range(-0.95..0.95) * band)
            .collect();
        let rho = DensityField::new(xgrid, values.clone());
        let u = project_density(&rho, &vgrid).unwrap();
        let back = reconstruct_density(&u);
        for (a, b) in values.iter().zip(&back.values) {
            worst_round = worst_round.max((a - b).abs());
        }
        let d = chi_positive_distance(values[0], values[1], &vgrid);
        worst_pos = worst_pos.max((d - (values[0] - values[1]).max(0.0)).abs());
    }
    let pass = worst_round < 1e-12 && worst_pos < 1e-12;
    report(
        "chi identities",
        pass,
        &format!("roundtrip {worst_round:.2e}, positive-part {worst_pos:.2e}"),
    );
    budget("chi identities", start, 1.0);
}

#[test]
fn shock_convergence() {
    let start = Instant::now();
    let cases = [(200usize, 4e-3), (400, 2e-3), (800, 1e-3)];
    let mut errors = Vec::new();
    for &(nx, eps) in &cases {
        let (config, rho0) = burgers_shock_config(nx, eps);
        let traj = config.run(&rho0).unwrap();
        let exact = burgers_box_exact(-0.9, 0.5, config.xgrid);
        errors.push(traj.final_density().l1_distance(&exact));
    }
    let mid_ok = errors[1] <= 0.05;
    let decreasing = errors[0] > errors[1] && errors[1] > errors[2];
    report(
        "shock convergence",
        mid_ok && decreasing,
        &format!(
            "L1 errors {:.4} > {:.4} > {:.4}, mid <= 0.05",
            errors[0], errors[1], errors[2]
        ),
    );
    budget("shock convergence", start, 60.0);
}

#[test]
fn comparison_principle() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(202);
    let mut worst = f64::NEG_INFINITY;
    for pair in 0..20 {
        let bl = pair % 2 == 1;
        let forced = pair % 4 >= 2;
        let (flux, forcing, max_h, t_final) = if bl {
            (
                FluxModel::buckley_leverett(),
                if forced {
                    ForcingModel::bl_forcing_const(0.25)
                } else {
                    ForcingModel::zero()
                },
                0.85,
                0.3,
            )
        } else {
            (
                FluxModel::burgers(),
                if forced {
                    ForcingModel::linear_decay_const(-0.5)
                } else {
                    ForcingModel::zero()
                },
                0.8,
                0.3,
            )
        };
        let xgrid = SpaceGrid::new(-2.0, 2.0, 120).unwrap();
        let vgrid =
            VelocityGrid::for_support(1.0, forcing.band_exponent(t_final, 64), 32).unwrap();
        let low_f = random_profile(&mut rng, -2.0, 2.0, max_h * 0.6);
        let extra = random_profile(&mut rng, -2.0, 2.0, max_h * 0.35);
        let low = DensityField::from_fn(xgrid, low_f);
        let high = DensityField::from_fn(xgrid, move |x| low_f(x) + extra(x));
        let mut config = SolverConfig::new(flux, forcing, xgrid, vgrid, 5e-3, t_final);
        config.record_every = 4;
        let ta = config.run(&low).unwrap();
        let tb = config.run(&high).unwrap();
        for (sa, sb) in ta.snapshots.iter().zip(&tb.snapshots) {
            for (a, b) in sa.density.values.iter().zip(&sb.density.values) {
                worst = worst.max(a - b);
            }
        }
    }
    report(
        "comparison principle",
        worst <= 1e-12,
        &format!("worst ordering violation {worst:.2e}"),
    );
    budget("comparison principle", start, 60.0);
}

#[test]
fn l1_contraction() {
    let start = Instant::now();
    // unforced: strict contraction
    let xgrid = SpaceGrid::new(-2.0, 2.0, 200).unwrap();
    let vgrid = VelocityGrid::for_support(1.0, 0.0, 48).unwrap();
    let a0 = DensityField::from_fn(xgrid, smooth_bump(-0.4, 0.5, 0.7));
    let b0 = DensityField::from_fn(xgrid, smooth_bump(-0.1, 0.7, 0.5));
    let mut config = SolverConfig::new(
        FluxModel::burgers(),
        ForcingModel::zero(),
        xgrid,
        vgrid,
        2e-3,
        0.6,
    );
    config.record_every = 5;
    let ta = config.run(&a0).unwrap();
    let tb = config.run(&b0).unwrap();
    let d0 = a0.l1_distance(&b0);
    let mut worst_unforced = 0.0f64;
    for (sa, sb) in ta.snapshots.iter().zip(&tb.snapshots) {
        worst_unforced = worst_unforced.max(sa.density.l1_distance(&sb.density) / d0);
    }

    // growing forcing xi = 1 over t = 1: envelope e^t
    let xgrid = SpaceGrid::new(-2.0, 3.0, 250).unwrap();
    let forcing = ForcingModel::linear_decay_const(1.0);
    let vgrid = VelocityGrid::for_support(0.55, 1.0, 64).unwrap();
    let a0 = DensityField::from_fn(xgrid, smooth_bump(-0.2, 0.5, 0.5));
    let b0 = DensityField::from_fn(xgrid, smooth_bump(0.1, 0.4, 0.4));
    let mut config = SolverConfig::new(FluxModel::burgers(), forcing, xgrid, vgrid, 2e-3, 1.0);
    config.record_every = 10;
    let ta = config.run(&a0).unwrap();
    let tb = config.run(&b0).unwrap();
    let d0 = a0.l1_distance(&b0);
    let mut worst_forced = 0.0f64;
    for (sa, sb) in ta.snapshots.iter().zip(&tb.snapshots) {
        let envelope = d0 * sa.t.exp();
        worst_forced = worst_forced.max(sa.density.l1_distance(&sb.density) / envelope);
    }
    let pass = worst_unforced <= 1.0 + 1e-10 && worst_forced <= 1.0 + 1e-6;
    report(
        "l1 contraction",
        pass,
        &format!("unforced ratio {worst_unforced:.12}, forced ratio {worst_forced:.8}"),
    );
    budget("l1 contraction", start, 30.0);
}

#[test]
fn linf_bound_and_sign() {
    let start = Instant::now();
    // growing forcing: sup-norm envelope with one velocity cell of slack
    let xgrid = SpaceGrid::new(-2.0, 3.0, 250).unwrap();
    let forcing = ForcingModel::linear_decay_const(0.5);
    let vgrid = VelocityGrid::for_support(0.65, 0.5, 64).unwrap();
    let rho0 = DensityField::from_fn(xgrid, smooth_bump(0.0, 0.6, 0.6));
    let mut config = SolverConfig::new(FluxModel::burgers(), forcing, xgrid, vgrid, 2e-3, 1.0);
    config.record_every = 10;
    let traj = config.run(&rho0).unwrap();
    let m0 = rho0.linf_norm();
    let mut worst = 0.0f64;
    for s in &traj.snapshots {
        let envelope = m0 * (0.5 * s.t).exp() + vgrid.dv;
        worst = worst.max(s.density.linf_norm() / envelope);
    }

    // sign preservation on the Buckley-Leverett setup
    let xgrid = SpaceGrid::new(-2.0, 2.0, 200).unwrap();
    let forcing = ForcingModel::bl_forcing_const(0.25);
    let vgrid = VelocityGrid::for_support(1.0, forcing.band_exponent(0.4, 64), 48).unwrap();
    let rho0 = DensityField::from_fn(xgrid, smooth_bump(-0.3, 0.6, 0.8));
    let mut config = SolverConfig::new(FluxModel::buckley_leverett(), forcing, xgrid, vgrid, 5e-3, 0.4);
    config.record_every = 5;
    let traj = config.run(&rho0).unwrap();
    let mut min_rho = f64::INFINITY;
    for s in &traj.snapshots {
        for &v in &s.density.values {
            min_rho = min_rho.min(v);
        }
    }
    let pass = worst <= 1.0 && min_rho >= -1e-12;
    report(
        "linf bound and sign",
        pass,
        &format!("envelope ratio {worst:.6}, min density {min_rho:.2e}"),
    );
    budget("linf bound and sign", start, 20.0);
}

#[test]
fn defect_nonnegativity() {
    let start = Instant::now();
    // representative battery: unforced Burgers, forced Burgers, forced BL
    let mut min_scaled = f64::INFINITY;
    let mut worst_total = 0.0f64;
    let mut n_fields = 0usize;
    let runs: Vec<(FluxModel<f64>, ForcingModel<f64>, f64, f64)> = vec![
        (FluxModel::burgers(), ForcingModel::zero(), 0.8, 0.5),
        (
            FluxModel::burgers(),
            ForcingModel::linear_decay_const(-0.8),
            0.8,
            0.5,
        ),
        (
            FluxModel::buckley_leverett(),
            ForcingModel::bl_forcing_const(0.25),
            0.85,
            0.3,
        ),
    ];
    for (flux, forcing, height, t_final) in runs {
        let xgrid = SpaceGrid::new(-2.0, 2.0, 160).unwrap();
        let vgrid =
            VelocityGrid::for_support(1.0, forcing.band_exponent(t_final, 64), 48).unwrap();
        let rho0 = DensityField::from_fn(xgrid, smooth_bump(-0.4, 0.6, height));
        let mut config = SolverConfig::new(flux, forcing, xgrid, vgrid, 1e-3, t_final);
        config.record_every = 4;
        let traj = config.run(&rho0).unwrap();
        for s in &traj.snapshots {
            let defect = s.defect.as_ref().unwrap();
            let scale = defect
                .values
                .iter()
                .fold(1.0 / config.eps, |m, v| m.max(v.abs()));
            min_scaled = min_scaled.min(defect.min_value() / scale);
            let nv = defect.vgrid.n_cells;
            for i in 0..xgrid.n_cells {
                worst_total = worst_total.max(defect.at_edge(i, nv).abs() / scale);
            }
            n_fields += 1;
        }
    }
    let pass = min_scaled >= -1e-10 && worst_total <= 1e-10;
    report(
        "defect nonnegativity",
        pass,
        &format!(
            "{n_fields} fields, scaled min {min_scaled:.2e}, scaled worst per-x total {worst_total:.2e}"
        ),
    );
    budget("defect nonnegativity", start, 60.0);
}

#[test]
fn picard_consistency() {
    let start = Instant::now();
    let xgrid = SpaceGrid::new(-1.0, 2.0, 32).unwrap();
    let vgrid = VelocityGrid::for_support(1.0, 0.0, 16).unwrap();
    let mut config = SolverConfig::new(
        FluxModel::burgers(),
        ForcingModel::zero(),
        xgrid,
        vgrid,
        0.1,
        0.2,
    );
    config.dt = Some(0.01);
    let rho0 = DensityField::from_fn(xgrid, smooth_bump(0.3, 0.4, 0.8));
    let (dt, n_steps) = config.time_steps().unwrap();
    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * dt).collect();

    // contraction of the integral operator on random sequence pairs
    let mut rng = ChaCha12Rng::seed_from_u64(707);
    let factor = 1.0 - (-config.t_final / config.eps).exp();
    let mut worst_ratio = 0.0f64;
    for _ in 0..4 {
        let make_seq = |rng: &mut ChaCha12Rng| -> Vec<KineticField<f64>> {
            (0..=n_steps)
                .map(|_| {
                    let p = random_profile(rng, -1.0, 2.0, 0.8);
                    project_density(&DensityField::from_fn(xgrid, p), &vgrid).unwrap()
                })
                .collect()
        };
        let sa = make_seq(&mut rng);
        let sb = make_seq(&mut rng);
        let before = sequence_distance(&sa, &sb);
        let fa = picard_map(&sa, &times, &config, &rho0).unwrap();
        let fb = picard_map(&sb, &times, &config, &rho0).unwrap();
        let after = sequence_distance(&fa, &fb);
        worst_ratio = worst_ratio.max(after / before);
    }
    let contraction_ok = worst_ratio <= factor * 1.02;

    // ten iterations land near the splitting solution
    let traj = config.run(&rho0).unwrap();
    let split_seq: Vec<KineticField<f64>> = traj
        .snapshots
        .iter()
        .map(|s| s.kinetic.clone().unwrap())
        .collect();
    let mut seq: Vec<KineticField<f64>> =
        vec![project_density(&rho0, &vgrid).unwrap(); n_steps + 1];
    for _ in 0..10 {
        seq = picard_map(&seq, &times, &config, &rho0).unwrap();
    }
    let dist = sequence_distance(&seq, &split_seq);
    let tol = 5.0 * (xgrid.dx + vgrid.dv + dt);
    let pass = contraction_ok && dist <= tol;
    report(
        "picard consistency",
        pass,
        &format!(
            "contraction ratio {worst_ratio:.4} vs factor {factor:.4}, fixed-point distance {dist:.4} <= {tol:.4}"
        ),
    );
    budget("picard consistency", start, 120.0);
}

#[test]
fn stochastic_consistency() {
    let start = Instant::now();
    // (a) pure noise, one path: translation of the initial profile
    let xgrid = SpaceGrid::new(-2.0, 2.0, 400).unwrap();
    let vgrid = VelocityGrid::for_support(0.9, 0.0, 32).unwrap();
    let profile = smooth_bump(0.0, 0.5, 0.8);
    let rho0 = DensityField::from_fn(xgrid, profile);
    let mut still = SolverConfig::new(
        FluxModel::linear(0.0),
        ForcingModel::zero(),
        xgrid,
        vgrid,
        1e-3,
        0.5,
    );
    still.record_every = usize::MAX;
    let noise = NoiseModel::constant(0.2);
    let (dt, _) = still.time_steps().unwrap();
    let path = sample_shift(&noise, 31, dt, 0.5).unwrap();
    let traj = solve_pathwise_shift(&still, &rho0, &path).unwrap();
    let last = traj.snapshots.last().unwrap();
    let m_t = path.at(last.step);
    let exact = DensityField::from_fn(xgrid, move |x| profile(x - m_t));
    let err_a = last.density.l1_distance(&exact);
    let a_ok = err_a <= 3.0 * xgrid.dx;

    // (b) Burgers with noise: shift construction vs per-step direct scheme
    let xgrid = SpaceGrid::new(-2.0, 2.0, 400).unwrap();
    let vgrid = VelocityGrid::for_support(0.9, 0.0, 48).unwrap();
    let rho0 = DensityField::from_fn(xgrid, smooth_bump(-0.2, 0.5, 0.8));
    let mut config = SolverConfig::new(
        FluxModel::burgers(),
        ForcingModel::zero(),
        xgrid,
        vgrid,
        2e-3,
        0.5,
    );
    config.record_every = usize::MAX;
    let (dt, _) = config.time_steps().unwrap();
    let mut worst_b = 0.0f64;
    for seed in 0..10u64 {
        let path = sample_shift(&noise, 400 + seed, dt, 0.5).unwrap();
        let shifted = solve_pathwise_shift(&config, &rho0, &path).unwrap();
        let direct = solve_pathwise_direct(&config, &rho0, &path).unwrap();
        let d = shifted
            .final_density()
            .l1_distance(direct.final_density());
        worst_b = worst_b.max(d);
    }
    let b_ok = worst_b <= 0.05;

    // (c) ensemble mean of pure noise transport vs Gaussian convolution
    let xgrid = SpaceGrid::new(-2.0, 2.0, 200).unwrap();
    let rho0 = DensityField::from_fn(xgrid, profile);
    let mut still = SolverConfig::new(
        FluxModel::linear(0.0),
        ForcingModel::zero(),
        xgrid,
        VelocityGrid::for_support(0.9, 0.0, 32).unwrap(),
        1e-3,
        1.0,
    );
    still.record_every = usize::MAX;
    let noise_c = NoiseModel::constant(0.25);
    let stats = sbl_core::ensemble(&still, &rho0, &noise_c, 1000, 9000).unwrap();
    let mean_final = stats.mean.last().unwrap();
    let sigma = 0.25f64 * 1.0f64.sqrt();
    let conv = DensityField::from_fn(xgrid, move |x: f64| {
        // direct quadrature of (rho0 * gaussian)(x)
        let n = 400;
        let (lo, hi) = (-1.0, 1.0);
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let y: f64 = lo + (k as f64 + 0.5) * h;
            let g = (-(x - y) * (x - y) / (2.0 * sigma * sigma)).exp()
                / (sigma * (2.0 * std::f64::consts::PI).sqrt());
            acc += profile(y) * g * h;
        }
        acc
    });
    let err_c = mean_final.l1_distance(&conv);
    let c_ok = err_c <= 0.05;

    report(
        "stochastic consistency",
        a_ok && b_ok && c_ok,
        &format!(
            "translation err {err_a:.4} <= {:.4}, shift-vs-direct worst {worst_b:.4} <= 0.05, ensemble-mean err {err_c:.4} <= 0.05",
            3.0 * 4.0 / 400.0
        ),
    );
    budget("stochastic consistency", start, 300.0);
}

#[test]
fn decay_rates() {
    let start = Instant::now();
    // constant sink xi = -1: exact exponential L1 envelope
    let xgrid = SpaceGrid::new(-2.0, 2.0, 200).unwrap();
    let forcing = ForcingModel::linear_decay_const(-1.0);
    let vgrid = VelocityGrid::for_support(0.9, 0.0, 48).unwrap();
    let rho0 = DensityField::from_fn(xgrid, smooth_bump(-0.3, 0.5, 0.8));
    let mut config = SolverConfig::new(FluxModel::burgers(), forcing, xgrid, vgrid, 2e-3, 1.0);
    config.record_every = 10;
    let traj = config.run(&rho0).unwrap();
    let l10 = rho0.l1_norm();
    let mut worst_env = 0.0f64;
    for s in &traj.snapshots {
        worst_env = worst_env.max(s.density.l1_norm() / (l10 * (-s.t).exp()));
    }
    let env_ok = worst_env <= 1.0 + 1e-6;

    // branch xi = -2/t beyond r1 = 0.1: algebraic t^{-2} decay
    let forcing = ForcingModel::decay_branch(2.0, 0.1, 0.0);
    let mut config = SolverConfig::new(
        FluxModel::linear(0.0),
        forcing,
        xgrid,
        VelocityGrid::for_support(0.9, 0.0, 48).unwrap(),
        2e-3,
        2.0,
    );
    config.dt = Some(0.005);
    config.record_every = 10;
    let traj = config.run(&rho0).unwrap();
    let slope = sbl_core::decay_slope(&traj, 0.1).unwrap();
    let slope_ok = (-2.2..=-1.8).contains(&slope);
    report(
        "decay rates",
        env_ok && slope_ok,
        &format!("envelope ratio {worst_env:.8}, fitted slope {slope:.3}"),
    );
    budget("decay rates", start, 30.0);
}

#[test]
fn entropy_residuals() {
    let start = Instant::now();
    let t_final = 0.8;
    let xgrid = SpaceGrid::new(-2.0, 2.0, 200).unwrap();
    let bumps = bump_battery(xgrid, t_final);

    let mut all_ok = true;
    let mut details = Vec::new();
    let cases: Vec<(FluxModel<f64>, f64, (f64, f64))> = vec![
        (FluxModel::burgers(), 0.9, (-0.1, 1.0)),
        (FluxModel::buckley_leverett(), 0.85, (-0.1, 1.0)),
    ];
    for (flux, height, c_range) in cases {
        let forcing = ForcingModel::zero();
        let rho0 = DensityField::from_fn(xgrid, smooth_bump(-0.5, 0.5, height));
        let cs = kruzkov_constants(c_range, 21);
        let reference =
            godunov_reference(&flux, &forcing, &rho0, t_final, 0.9, 1).unwrap();
        let tol = calibrate_entropy_tol(&reference, &flux, &forcing, &bumps, &cs);
        let vgrid = VelocityGrid::for_support(1.0, 0.0, 48).unwrap();
        let config = SolverConfig::new(flux.clone(), forcing.clone(), xgrid, vgrid, 1e-3, t_final);
        let traj = config.run(&rho0).unwrap();
        let rep = entropy_battery(&traj, &flux, &forcing, &bumps, &cs, tol);
        details.push(format!(
            "{}: min residual {:.2e} >= -{tol:.2e}",
            flux.name, rep.min_residual
        ));
        all_ok &= rep.pass;
    }

    // planted non-entropic trace must be flagged
    let flux = FluxModel::burgers();
    let forcing = ForcingModel::zero();
    let frozen = DensityField::from_fn(xgrid, |x: f64| {
        if (-1.2..0.0).contains(&x) {
            -0.5
        } else if (0.0..1.2).contains(&x) {
            0.5
        } else {
            0.0
        }
    });
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.02).collect();
    let planted = Trajectory::from_densities(&times, vec![frozen.clone(); times.len()]);
    let cs = kruzkov_constants((-0.6, 0.6), 21);
    let honest = godunov_reference(&flux, &forcing, &frozen, t_final, 0.9, 1).unwrap();
    let tol = calibrate_entropy_tol(&honest, &flux, &forcing, &bumps, &cs);
    let rep = entropy_battery(&planted, &flux, &forcing, &bumps, &cs, tol);
    let planted_flagged = !rep.pass;
    details.push(format!(
        "planted violation {:.2e} flagged with tol {tol:.2e}",
        rep.min_residual
    ));

    report(
        "entropy residuals",
        all_ok && planted_flagged,
        &details.join("; "),
    );
    budget("entropy residuals", start, 60.0);
}

#[test]
fn reproducibility() {
    let start = Instant::now();
    // deterministic solve twice: bitwise identical fields
    let (config, rho0) = burgers_shock_config(200, 4e-3);
    let t1 = config.run(&rho0).unwrap();
    let t2 = config.run(&rho0).unwrap();
    let solver_identical = t1
        .snapshots
        .iter()
        .zip(&t2.snapshots)
        .all(|(a, b)| {
            a.density
                .values
                .iter()
                .zip(&b.density.values)
                .all(|(x, y)| x.to_bits() == y.to_bits())
        });

    // seeded ensemble twice: identical formatted artifacts
    let xgrid = SpaceGrid::new(-2.0, 2.0, 100).unwrap();
    let rho0 = DensityField::from_fn(xgrid, smooth_bump(0.0, 0.5, 0.7));
    let mut still = SolverConfig::new(
        FluxModel::linear(0.0),
        ForcingModel::zero(),
        xgrid,
        VelocityGrid::for_support(0.8, 0.0, 16).unwrap(),
        1e-2,
        0.25,
    );
    still.record_every = 20;
    let noise = NoiseModel::constant(0.3);
    let render = |stats: &sbl_core::EnsembleStats<f64>| -> String {
        let mut out = String::new();
        for (t, field) in stats.times.iter().zip(&stats.mean) {
            for (i, v) in field.values.iter().enumerate() {
                out.push_str(&format!("{t:.17e},{i},{v:.17e}\n"));
            }
        }
        out
    };
    let s1 = render(&sbl_core::ensemble(&still, &rho0, &noise, 64, 5).unwrap());
    let s2 = render(&sbl_core::ensemble(&still, &rho0, &noise, 64, 5).unwrap());
    let ensemble_identical = s1 == s2;

    report(
        "reproducibility",
        solver_identical && ensemble_identical,
        &format!("solver bitwise {solver_identical}, ensemble artifacts {ensemble_identical}"),
    );
    budget("reproducibility", start, 60.0);
}
