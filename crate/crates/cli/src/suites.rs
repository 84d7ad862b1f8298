//! The `verify` subcommand: canned batteries for each theorem-level
//! property, each emitting one JSON report per check.

use std::fs;
use std::path::Path;

use serde_json::json;

use sbl_core::{
    bump_battery, calibrate_entropy_tol, check_comparison, check_contraction_pair,
    check_kinetic_contraction, convergence_study, decay_slope, ensemble, entropy_battery,
    godunov_reference, kruzkov_constants, sample_shift, solve_pathwise_direct,
    solve_pathwise_shift, DensityField64, FluxModel64, ForcingModel64, NoiseModel64,
    SolverConfig64, SpaceGrid64, Trajectory64, VelocityGrid64,
};

use crate::artifacts::write_json;
use crate::error::{CliError, Result};

pub const SUITES: [&str; 6] = [
    "contraction",
    "comparison",
    "entropy",
    "decay",
    "convergence",
    "stochastic-consistency",
];

struct Check {
    suite: &'static str,
    name: &'static str,
    pass: bool,
    details: serde_json::Value,
}

pub fn verify(suite: &str, out: &Path) -> Result<()> {
    let selected: Vec<&'static str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        match SUITES.iter().find(|s| **s == suite) {
            Some(s) => vec![*s],
            None => {
                return Err(CliError::Config(format!(
                    "unknown suite '{suite}', expected one of {} or all",
                    SUITES.join(", ")
                )))
            }
        }
    };

    fs::create_dir_all(out)?;
    let mut failed = Vec::new();
    for name in selected {
        for check in run_suite(name)? {
            let report = json!({
                "schema": 1,
                "suite": check.suite,
                "check": check.name,
                "pass": check.pass,
                "details": check.details,
            });
            write_json(&out.join(format!("{}-{}.json", check.suite, check.name)), &report)?;
            println!(
                "{}/{}: {}",
                check.suite,
                check.name,
                if check.pass { "PASS" } else { "FAIL" }
            );
            if !check.pass {
                failed.push(format!("{}/{}", check.suite, check.name));
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

fn run_suite(name: &'static str) -> Result<Vec<Check>> {
    match name {
        "contraction" => contraction(),
        "comparison" => comparison(),
        "entropy" => entropy(),
        "decay" => decay(),
        "convergence" => convergence(),
        "stochastic-consistency" => stochastic(),
        _ => unreachable!(),
    }
}

fn bump(center: f64, width: f64, height: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x: f64| {
        let s = (x - center) / width;
        if s.abs() < 1.0 {
            height * (1.0 - s * s).powi(2)
        } else {
            0.0
        }
    }
}

fn contraction() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // unforced Burgers pair: plain contraction
    let xgrid = SpaceGrid64::new(-2.0, 2.0, 200)?;
    let vgrid = VelocityGrid64::for_support(1.0, 0.0, 48)?;
    let a0 = DensityField64::from_fn(xgrid, bump(-0.4, 0.5, 0.7));
    let b0 = DensityField64::from_fn(xgrid, bump(-0.1, 0.7, 0.5));
    let mut config = SolverConfig64::new(
        FluxModel64::burgers(),
        ForcingModel64::zero(),
        xgrid,
        vgrid,
        2e-3,
        0.6,
    );
    config.record_every = 5;
    let ta = config.run(&a0)?;
    let tb = config.run(&b0)?;
    let rep = check_contraction_pair(&ta, &tb, &config.forcing);
    checks.push(Check {
        suite: "contraction",
        name: "l1-unforced",
        pass: rep.pass,
        details: serde_json::to_value(&rep).unwrap(),
    });
    let rep = check_kinetic_contraction(&ta, &tb, &config.forcing);
    checks.push(Check {
        suite: "contraction",
        name: "kinetic",
        pass: rep.pass,
        details: serde_json::to_value(&rep).unwrap(),
    });

    // growing forcing xi = 1 over t = 1: envelope exp(t)
    let xgrid = SpaceGrid64::new(-2.0, 3.0, 250)?;
    let forcing = ForcingModel64::linear_decay_const(1.0);
    let vgrid = VelocityGrid64::for_support(0.55, 1.0, 64)?;
    let a0 = DensityField64::from_fn(xgrid, bump(-0.2, 0.5, 0.5));
    let b0 = DensityField64::from_fn(xgrid, bump(0.1, 0.4, 0.4));
    let mut config = SolverConfig64::new(FluxModel64::burgers(), forcing, xgrid, vgrid, 2e-3, 1.0);
    config.record_every = 10;
    let ta = config.run(&a0)?;
    let tb = config.run(&b0)?;
    let rep = check_contraction_pair(&ta, &tb, &config.forcing);
    checks.push(Check {
        suite: "contraction",
        name: "l1-forced",
        pass: rep.pass,
        details: serde_json::to_value(&rep).unwrap(),
    });
    Ok(checks)
}

fn comparison() -> Result<Vec<Check>> {
    // fixed battery of ordered pairs: high = low + nonnegative extra
    let profiles: [((f64, f64, f64), (f64, f64, f64)); 3] = [
        ((-0.6, 0.5, 0.4), (0.2, 0.4, 0.3)),
        ((0.0, 0.8, 0.5), (-0.4, 0.3, 0.2)),
        ((0.5, 0.4, 0.3), (0.4, 0.6, 0.25)),
    ];
    let cases: [(&'static str, FluxModel64, ForcingModel64, f64); 2] = [
        (
            "burgers",
            FluxModel64::burgers(),
            ForcingModel64::linear_decay_const(-0.5),
            0.3,
        ),
        (
            "buckley-leverett",
            FluxModel64::buckley_leverett(),
            ForcingModel64::bl_forcing_const(0.25),
            0.3,
        ),
    ];
    let mut checks = Vec::new();
    for (name, flux, forcing, t_final) in cases {
        let xgrid = SpaceGrid64::new(-2.0, 2.0, 120)?;
        let vgrid = VelocityGrid64::for_support(1.0, forcing.band_exponent(t_final, 64), 32)?;
        let mut worst = 0.0f64;
        let mut pass = true;
        for ((c1, w1, h1), (c2, w2, h2)) in profiles {
            let low_f = bump(c1, w1, h1);
            let extra = bump(c2, w2, h2);
            let low = DensityField64::from_fn(xgrid, low_f);
            let high = DensityField64::from_fn(xgrid, move |x| low_f(x) + extra(x));
            let mut config =
                SolverConfig64::new(flux.clone(), forcing.clone(), xgrid, vgrid, 5e-3, t_final);
            config.record_every = 4;
            let ta = config.run(&low)?;
            let tb = config.run(&high)?;
            let rep = check_comparison(&ta, &tb, 1e-12);
            worst = worst.max(rep.worst_ratio);
            pass &= rep.pass;
        }
        checks.push(Check {
            suite: "comparison",
            name,
            pass,
            details: json!({ "pairs": profiles.len(), "worst_ratio": worst, "tol": 1e-12 }),
        });
    }
    Ok(checks)
}

fn entropy() -> Result<Vec<Check>> {
    let t_final = 0.8;
    let xgrid = SpaceGrid64::new(-2.0, 2.0, 200)?;
    let bumps = bump_battery(xgrid, t_final);
    let mut checks = Vec::new();

    let cases: [(&'static str, FluxModel64, f64); 2] = [
        ("burgers", FluxModel64::burgers(), 0.9),
        ("buckley-leverett", FluxModel64::buckley_leverett(), 0.85),
    ];
    for (name, flux, height) in cases {
        let forcing = ForcingModel64::zero();
        let rho0 = DensityField64::from_fn(xgrid, bump(-0.5, 0.5, height));
        let cs = kruzkov_constants((-0.1, 1.0), 21);
        let reference = godunov_reference(&flux, &forcing, &rho0, t_final, 0.9, 1)?;
        let tol = calibrate_entropy_tol(&reference, &flux, &forcing, &bumps, &cs);
        let vgrid = VelocityGrid64::for_support(1.0, 0.0, 48)?;
        let config = SolverConfig64::new(flux.clone(), forcing.clone(), xgrid, vgrid, 1e-3, t_final);
        let traj = config.run(&rho0)?;
        let rep = entropy_battery(&traj, &flux, &forcing, &bumps, &cs, tol);
        checks.push(Check {
            suite: "entropy",
            name,
            pass: rep.pass,
            details: serde_json::to_value(&rep).unwrap(),
        });
    }

    // a frozen expansion shock must be rejected by the same battery
    let flux = FluxModel64::burgers();
    let forcing = ForcingModel64::zero();
    let frozen = DensityField64::from_fn(xgrid, |x: f64| {
        if (-1.2..0.0).contains(&x) {
            -0.5
        } else if (0.0..1.2).contains(&x) {
            0.5
        } else {
            0.0
        }
    });
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.02).collect();
    let planted = Trajectory64::from_densities(&times, vec![frozen.clone(); times.len()]);
    let cs = kruzkov_constants((-0.6, 0.6), 21);
    let honest = godunov_reference(&flux, &forcing, &frozen, t_final, 0.9, 1)?;
    let tol = calibrate_entropy_tol(&honest, &flux, &forcing, &bumps, &cs);
    let rep = entropy_battery(&planted, &flux, &forcing, &bumps, &cs, tol);
    checks.push(Check {
        suite: "entropy",
        name: "planted-shock-flagged",
        pass: !rep.pass,
        details: serde_json::to_value(&rep).unwrap(),
    });
    Ok(checks)
}

fn decay() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // constant sink xi = -1: exact exponential L1 envelope
    let xgrid = SpaceGrid64::new(-2.0, 2.0, 200)?;
    let forcing = ForcingModel64::linear_decay_const(-1.0);
    let vgrid = VelocityGrid64::for_support(0.9, 0.0, 48)?;
    let rho0 = DensityField64::from_fn(xgrid, bump(-0.3, 0.5, 0.8));
    let mut config = SolverConfig64::new(FluxModel64::burgers(), forcing, xgrid, vgrid, 2e-3, 1.0);
    config.record_every = 10;
    let traj = config.run(&rho0)?;
    let l10 = rho0.l1_norm();
    let mut worst = 0.0f64;
    for s in &traj.snapshots {
        worst = worst.max(s.density.l1_norm() / (l10 * (-s.t).exp()));
    }
    checks.push(Check {
        suite: "decay",
        name: "exponential-envelope",
        pass: worst <= 1.0 + 1e-6,
        details: json!({ "worst_ratio": worst, "tol": 1e-6 }),
    });

    // branch xi = -2/t beyond r1: algebraic decay with slope near -2
    let forcing = ForcingModel64::decay_branch(2.0, 0.1, 0.0);
    let mut config = SolverConfig64::new(
        FluxModel64::linear(0.0),
        forcing,
        xgrid,
        VelocityGrid64::for_support(0.9, 0.0, 48)?,
        2e-3,
        2.0,
    );
    config.dt = Some(0.005);
    config.record_every = 10;
    let traj = config.run(&rho0)?;
    let slope = decay_slope(&traj, 0.1);
    let pass = slope.map(|s| (-2.2..=-1.8).contains(&s)).unwrap_or(false);
    checks.push(Check {
        suite: "decay",
        name: "algebraic-slope",
        pass,
        details: json!({ "slope": slope, "expected": [-2.2, -1.8] }),
    });
    Ok(checks)
}

fn convergence() -> Result<Vec<Check>> {
    let flux = FluxModel64::burgers();
    let forcing = ForcingModel64::zero();
    let t_final = 0.4;
    let fine = SpaceGrid64::new(-2.0, 2.0, 1600)?;
    let rho0_fine = DensityField64::from_fn(fine, bump(-0.5, 0.5, 0.8));
    let reference = godunov_reference(&flux, &forcing, &rho0_fine, t_final, 0.9, usize::MAX)?;

    let solve = |nx: usize| -> sbl_core::Result<DensityField64> {
        let xgrid = SpaceGrid64::new(-2.0, 2.0, nx).unwrap();
        let vgrid = VelocityGrid64::for_support(1.0, 0.0, 48)?;
        let rho0 = DensityField64::from_fn(xgrid, bump(-0.5, 0.5, 0.8));
        let eps = xgrid.dx / 4.0;
        let mut config =
            SolverConfig64::new(flux.clone(), forcing.clone(), xgrid, vgrid, eps, t_final);
        config.record_every = usize::MAX;
        Ok(config.run(&rho0)?.final_density().clone())
    };
    let rep = convergence_study(solve, reference.final_density(), &[100, 200, 400])?;
    let orders_ok = rep.orders.iter().all(|o| *o > 0.4);
    let pass = rep.monotone && orders_ok;
    Ok(vec![Check {
        suite: "convergence",
        name: "burgers-bump",
        pass,
        details: serde_json::to_value(&rep).unwrap(),
    }])
}

fn stochastic() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let noise = NoiseModel64::constant(0.2);

    // one path of pure noise: exact translation of the initial profile
    let xgrid = SpaceGrid64::new(-2.0, 2.0, 400)?;
    let vgrid = VelocityGrid64::for_support(0.9, 0.0, 32)?;
    let profile = bump(0.0, 0.5, 0.8);
    let rho0 = DensityField64::from_fn(xgrid, profile);
    let mut still = SolverConfig64::new(
        FluxModel64::linear(0.0),
        ForcingModel64::zero(),
        xgrid,
        vgrid,
        1e-3,
        0.5,
    );
    still.record_every = usize::MAX;
    let (dt, _) = still.time_steps()?;
    let path = sample_shift(&noise, 31, dt, 0.5)?;
    let traj = solve_pathwise_shift(&still, &rho0, &path)?;
    let last = traj.snapshots.last().unwrap();
    let m_t = path.at(last.step);
    let exact = DensityField64::from_fn(xgrid, move |x| profile(x - m_t));
    let err = last.density.l1_distance(&exact);
    let tol = 3.0 * xgrid.dx;
    checks.push(Check {
        suite: "stochastic-consistency",
        name: "translation",
        pass: err <= tol,
        details: json!({ "l1_error": err, "tol": tol }),
    });

    // shift construction against the per-step direct scheme
    let xgrid = SpaceGrid64::new(-2.0, 2.0, 400)?;
    let vgrid = VelocityGrid64::for_support(0.9, 0.0, 48)?;
    let rho0 = DensityField64::from_fn(xgrid, bump(-0.2, 0.5, 0.8));
    let mut config = SolverConfig64::new(
        FluxModel64::burgers(),
        ForcingModel64::zero(),
        xgrid,
        vgrid,
        2e-3,
        0.5,
    );
    config.record_every = usize::MAX;
    let (dt, _) = config.time_steps()?;
    let mut worst = 0.0f64;
    for seed in 0..3u64 {
        let path = sample_shift(&noise, 400 + seed, dt, 0.5)?;
        let shifted = solve_pathwise_shift(&config, &rho0, &path)?;
        let direct = solve_pathwise_direct(&config, &rho0, &path)?;
        worst = worst.max(shifted.final_density().l1_distance(direct.final_density()));
    }
    checks.push(Check {
        suite: "stochastic-consistency",
        name: "shift-vs-direct",
        pass: worst <= 0.05,
        details: json!({ "seeds": 3, "worst_l1": worst, "tol": 0.05 }),
    });

    // ensemble mean of pure noise transport against Gaussian convolution
    let xgrid = SpaceGrid64::new(-2.0, 2.0, 200)?;
    let rho0 = DensityField64::from_fn(xgrid, profile);
    let mut still = SolverConfig64::new(
        FluxModel64::linear(0.0),
        ForcingModel64::zero(),
        xgrid,
        VelocityGrid64::for_support(0.9, 0.0, 32)?,
        1e-3,
        1.0,
    );
    still.record_every = usize::MAX;
    let noise_c = NoiseModel64::constant(0.25);
    let stats = ensemble(&still, &rho0, &noise_c, 400, 9000)?;
    let mean_final = stats.mean.last().unwrap();
    let sigma = 0.25f64;
    let conv = DensityField64::from_fn(xgrid, move |x: f64| {
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
    let err = mean_final.l1_distance(&conv);
    checks.push(Check {
        suite: "stochastic-consistency",
        name: "ensemble-mean",
        pass: err <= 0.05,
        details: json!({ "paths": 400, "l1_error": err, "tol": 0.05 }),
    });
    Ok(checks)
}
