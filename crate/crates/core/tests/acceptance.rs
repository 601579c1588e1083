//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::cell::Cell;
use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use gridcascade::cia::{identify, sweep, CiaConfig};
use gridcascade::facts::{pid_control, step_tcsc, TcscState};
use gridcascade::grid::TcscParams;
use gridcascade::ieee118::{hvdc_link, DELTA_BOUNDS, DISTURBED_BRANCH, HVDC_BRANCHES, IEEE118_JSON};
use gridcascade::jfnk::{jfnk_solve, jvp, JfnkConfig};
use gridcascade::kkt::Bounds;
use gridcascade::krylov::{gmres, GmresConfig};
use gridcascade::{simulate_cascade, CascadeConfig, CascadeTrace, Disturbance, NetworkCase, PreparedCase};
use nalgebra::{DMatrix, DVector};
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn case() -> PreparedCase {
    PreparedCase::new(&NetworkCase::from_json_str(IEEE118_JSON).unwrap()).unwrap()
}

fn bounds() -> Bounds {
    Bounds::new(DELTA_BOUNDS.0, DELTA_BOUNDS.1).unwrap()
}

fn scenarios() -> [(&'static str, CascadeConfig); 3] {
    let base = CascadeConfig::default();
    [
        (
            "no FACTS, T=1",
            CascadeConfig {
                facts_enabled: false,
                relay_period: 1.0,
                ..base
            },
        ),
        (
            "FACTS, T=0.5",
            CascadeConfig {
                facts_enabled: true,
                relay_period: 0.5,
                ..base
            },
        ),
        (
            "FACTS, T=1",
            CascadeConfig {
                facts_enabled: true,
                relay_period: 1.0,
                ..base
            },
        ),
    ]
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn no_facts_identification() -> Outcome {
    let case = case();
    let start = Instant::now();
    let r = identify(&case, DISTURBED_BRANCH, bounds(), &CiaConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let at_bound = (r.best_delta - DELTA_BOUNDS.1).abs() <= 1e-6;
    let severed = r.trace_of_best.steps[0].tripped.contains(&DISTURBED_BRANCH);
    check(
        at_bound && severed && elapsed < Duration::from_secs(60),
        format!(
            "best_delta = {:.6} (want 37.45 ± 1e-6), J = {:.4}, branch 8 severed at step 1: {severed}, {:.2?}",
            r.best_delta, r.best_cost, elapsed
        ),
    )
}

fn scenario_ordering() -> Outcome {
    let case = case();
    let run = |delta: f64, cfg: &CascadeConfig| {
        simulate_cascade(
            &case,
            &Disturbance {
                branch: DISTURBED_BRANCH,
                delta,
            },
            cfg,
        )
        .unwrap()
    };
    let summary = |traces: &[CascadeTrace]| {
        let n: Vec<usize> = traces.iter().map(CascadeTrace::outage_count).collect();
        let j: Vec<f64> = traces.iter().map(|t| t.final_cost).collect();
        (n, j)
    };
    let ordered = |n: &[usize], j: &[f64]| n[0] > n[1] && n[1] > n[2] && j[0] < j[1] && j[1] < j[2];

    let common: Vec<CascadeTrace> = scenarios().iter().map(|(_, c)| run(DELTA_BOUNDS.1, c)).collect();
    let (n, j) = summary(&common);
    // Informational: the per-scenario magnitudes reported for the source case.
    let own: Vec<CascadeTrace> = scenarios()
        .iter()
        .zip([37.45, 36.77, 35.98])
        .map(|((_, c), d)| run(d, c))
        .collect();
    let (n2, j2) = summary(&own);
    let within = |x: f64, target: f64| (x - target).abs() <= 0.2 * target;
    let stretch = n.iter().zip([95.0, 40.0, 6.0]).all(|(&a, t)| within(a as f64, t))
        && j.iter().zip([53.28, 102.56, 153.69]).all(|(&a, t)| within(a, t));
    check(
        ordered(&n, &j),
        format!(
            "delta 37.45: N = {n:?}, J = [{:.2}, {:.2}, {:.2}]; stretch targets met: {stretch}; \
             at deltas (37.45, 36.77, 35.98): N = {n2:?}, J = [{:.2}, {:.2}, {:.2}], ordered: {}",
            j[0],
            j[1],
            j[2],
            j2[0],
            j2[1],
            j2[2],
            ordered(&n2, &j2)
        ),
    )
}

fn baseline_feasibility() -> Outcome {
    let case = case();
    let b = case.base_susceptance();
    let (_, flows) = case.solve(&b, &case.partition(&b)).map_err(|e| e.to_string())?;
    let worst = flows
        .iter()
        .zip(&case.threshold)
        .zip(&b.0)
        .filter(|(_, &bi)| bi != 0.0)
        .map(|((p, s), _)| p.abs() / s)
        .fold(0.0, f64::max);
    let trace = simulate_cascade(
        &case,
        &Disturbance {
            branch: DISTURBED_BRANCH,
            delta: 0.0,
        },
        &CascadeConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    check(
        worst <= 1.0 && trace.outage_count() == 0,
        format!(
            "max |P|/sigma = {worst:.4}, outages at delta 0 = {}",
            trace.outage_count()
        ),
    )
}

fn power_flow_properties() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    let (max_sum, max_res, max_lin) = (Cell::new(0.0f64), Cell::new(0.0f64), Cell::new(0.0f64));
    let result = runner.run(&common::random_net(), |net| {
        let case = PreparedCase::new(&common::build(&net)).unwrap();
        let b = case.base_susceptance();
        let partition = case.partition(&b);
        let (theta, flows, balanced) = common::solve(&case, &case.injection);
        for island in &partition.islands {
            let sum: f64 = island.bus_columns().iter().map(|&c| balanced[c]).sum();
            max_sum.set(max_sum.get().max(sum.abs()));
        }
        // ‖Aᵀ diag(B) A θ − P_b‖∞
        let bat: Vec<f64> = case
            .incidence
            .mul(&theta)
            .iter()
            .zip(b.iter())
            .map(|(x, w)| w * x)
            .collect();
        let lhs = case.incidence.mul_transpose(&bat);
        let res = lhs
            .iter()
            .zip(&balanced)
            .map(|(l, p)| (l - p).abs())
            .fold(0.0, f64::max);
        max_res.set(max_res.get().max(res));

        let (_, oracle, _) = common::dense_oracle(&net, &net.p);
        let scaled: Vec<f64> = case.injection.iter().map(|p| 2.5 * p).collect();
        let (_, flows_c, _) = common::solve(&case, &scaled);
        let s = common::scale(&oracle);
        for ((f, o), fc) in flows.iter().zip(&oracle).zip(&flows_c) {
            max_lin.set(max_lin.get().max((fc - 2.5 * f).abs() / s));
            if (f - o).abs() > 1e-9 * s {
                return Err(TestCaseError::fail(format!("flow {f} vs dense {o}")));
            }
        }
        Ok(())
    });
    let (max_sum, max_res, max_lin) = (max_sum.get(), max_res.get(), max_lin.get());
    let detail =
        format!("100 cases: max island sum {max_sum:.1e}, max residual {max_res:.1e}, max scaling error {max_lin:.1e}");
    match result {
        Ok(()) => check(max_sum < 1e-10 && max_res < 1e-8 && max_lin < 1e-9, detail),
        Err(e) => Err(format!("{detail}; {e}")),
    }
}

fn hvdc_closed_forms() -> Outcome {
    // Hand evaluation: α = π/15, γ = π/4, R_cr = R_ci = R_L = 0.1.
    let (alpha, gamma, r) = (PI / 15.0, PI / 4.0, 0.1);
    let k = 3.0 * 3f64.sqrt() / PI;
    let i_d = k * (alpha.cos() - gamma.cos()) / r;
    let p_r = k * i_d * alpha.cos() - r * i_d * i_d;
    let hand = [i_d, p_r, p_r - r * i_d * i_d];
    let pinned = [4.4829790697, 5.2430466609, 3.2333365270];
    let mut ok = true;
    let mut worst = 0.0f64;
    for branch in HVDC_BRANCHES {
        let t = hvdc_link(branch).terminal_powers().map_err(|e| e.to_string())?;
        for ((got, h), p) in [t.i_d, t.p_r, t.p_i].iter().zip(hand).zip(pinned) {
            worst = worst.max((got - h).abs()).max((got - p).abs());
        }
        ok &= (t.p_i - (t.p_r - 0.1 * t.i_d * t.i_d)).abs() <= 1e-9;
    }
    check(
        ok && worst <= 1e-6,
        format!(
            "I_d, P_r, P_i = {:.10}, {:.10}, {:.10}; max deviation {worst:.1e}",
            hand[0], hand[1], hand[2]
        ),
    )
}

fn solver_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut gmres_err = 0.0f64;
    for _ in 0..50 {
        let m = DMatrix::from_fn(7, 7, |i, j| rng.gen_range(-1.0..1.0) + if i == j { 6.0 } else { 0.0 });
        let b: Vec<f64> = (0..7).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let direct = m.clone().lu().solve(&DVector::from_column_slice(&b)).unwrap();
        let mv = |v: &[f64]| Ok((&m * DVector::from_column_slice(v)).as_slice().to_vec());
        let out = gmres(mv, &b, &[0.0; 7], &GmresConfig::default()).map_err(|e| e.to_string())?;
        for (a, d) in out.x.iter().zip(direct.iter()) {
            gmres_err = gmres_err.max((a - d).abs());
        }
    }

    let cfg = JfnkConfig {
        eps_min: 1e-8,
        ..Default::default()
    };
    let c = [1.0, -2.0, 3.0, 0.5, 0.0, 4.0, -1.0];
    let mut affine = |z: &[f64]| Ok(z.iter().zip(&c).map(|(a, b)| 2.0 * a - b).collect());
    let a = jfnk_solve(&mut affine, &[0.0; 7], &cfg).map_err(|e| e.to_string())?;
    let affine_ok = a.converged && a.z.iter().zip(&c).all(|(z, b)| (z - b / 2.0).abs() < 1e-6);

    let mut cubic = |z: &[f64]| {
        let mut out = z.to_vec();
        out[0] = z[0].powi(3) - 8.0;
        Ok(out)
    };
    let q = jfnk_solve(&mut cubic, &[1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0], &cfg).map_err(|e| e.to_string())?;
    let cubic_ok = q.converged && (q.z[0] - 2.0).abs() < 1e-6;

    let mut smooth = |z: &[f64]| Ok(vec![z[0].sin() * z[1], (z[0] * z[1]).exp()]);
    let (z, v) = ([0.7, 0.4], [1.0, -0.5]);
    let exact = [
        0.7f64.cos() * 0.4 - 0.5 * 0.7f64.sin(),
        (0.4 - 0.5 * 0.7) * 0.28f64.exp(),
    ];
    let err = |xi: f64, f: &mut dyn gridcascade::jfnk::ResidualFunction| {
        let j = jvp(f, &z, &v, xi).unwrap();
        ((j[0] - exact[0]).powi(2) + (j[1] - exact[1]).powi(2)).sqrt()
    };
    let ratio = err(1e-3, &mut smooth) / err(5e-4, &mut smooth);
    check(
        gmres_err < 1e-8 && affine_ok && cubic_ok && (ratio - 2.0).abs() < 0.1,
        format!(
            "GMRES vs LU max error {gmres_err:.1e} over 50 systems; affine converged: {affine_ok} ({} iterations); \
             cubic converged: {cubic_ok} ({} iterations); jvp error ratio at halved xi {ratio:.3}",
            a.iterations.len() - 1,
            q.iterations.len() - 1
        ),
    )
}

fn oracle_dominance() -> Outcome {
    let case = case();
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, cascade) in scenarios() {
        let start = Instant::now();
        let grid = sweep(&case, DISTURBED_BRANCH, bounds(), 150, &cascade, 1).map_err(|e| e.to_string())?;
        let sweep_time = start.elapsed();
        let best = grid.argmin.ok_or("sweep produced no successful point")?;
        let j_sweep = best.cost.expect("argmin has a cost");
        let cia = identify(
            &case,
            DISTURBED_BRANCH,
            bounds(),
            &CiaConfig {
                cascade,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let pass = cia.best_cost <= j_sweep + 1e-6 * (1.0 + j_sweep.abs()) && sweep_time < Duration::from_secs(600);
        ok &= pass;
        lines.push(format!(
            "{label}: search J({:.4}) = {:.4} vs sweep J({:.4}) = {:.4} [{}] sweep {:.2?}",
            cia.best_delta,
            cia.best_cost,
            best.delta,
            j_sweep,
            if pass { "ok" } else { "violated" },
            sweep_time
        ));
    }
    check(ok, lines.join("; "))
}

fn tcsc_integrator() -> Outcome {
    let params = TcscParams {
        tc: 1.0,
        xref: 0.0,
        xmin: 0.0,
        xmax: 10.0,
        kp: 4.0,
        ki: 3.0,
        kd: 2.0,
    };
    let dt = 1e-3;
    let mut s = TcscState {
        x_c: 1.0,
        integral: 0.0,
        prev_error: 0.0,
    };
    for _ in 0..1000 {
        let pid = pid_control(0.0, &s, &params, dt);
        s = step_tcsc(&s, 0.0, &pid, &params, dt);
    }
    let decay_err = (s.x_c - (-1f64).exp()).abs();

    use proptest::prelude::*;
    let inputs = (
        0.0f64..=10.0,
        prop::collection::vec((-1e12f64..1e12, -1e4f64..1e4), 1..100),
        1e-5f64..20.0,
    );
    let mut runner = TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    });
    let clamp = runner.run(&inputs, |(x0, seq, dt)| {
        let mut s = TcscState {
            x_c: x0,
            integral: 0.0,
            prev_error: 0.0,
        };
        for (u, e) in seq {
            let pid = pid_control(e, &s, &params, dt);
            s = step_tcsc(&s, u, &pid, &params, dt);
            prop_assert!((params.xmin..=params.xmax).contains(&s.x_c));
        }
        Ok(())
    });
    check(
        decay_err < 1e-3 && clamp.is_ok(),
        format!(
            "X_C(1) = {:.6} vs exp(-1), error {decay_err:.1e}; clamp property over 256 cases: {}",
            s.x_c,
            clamp.map_or_else(|e| e.to_string(), |_| "held".into())
        ),
    )
}

fn determinism() -> Outcome {
    let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let mut outputs = Vec::new();
    for dir in &dirs {
        let out = dir.path().to_str().unwrap();
        for (sub, args) in [
            ("sim", vec!["simulate", "--facts", "on", "--timer", "0.5"]),
            ("cia", vec!["identify", "--lmax", "4", "--seed", "3"]),
        ] {
            let target = format!("{out}/{sub}");
            let status = Command::new(env!("CARGO_BIN_EXE_gridcascade"))
                .args(&args)
                .args(["--out", &target])
                .env("RUST_LOG", "error")
                .output()
                .map_err(|e| e.to_string())?
                .status;
            if !status.success() {
                return Err(format!("{sub} run failed: {status}"));
            }
        }
        let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
        let manifest: serde_json::Value = serde_json::from_slice(&read("sim/manifest.json")).unwrap();
        outputs.push((
            read("sim/trace.json"),
            read("sim/timeline.csv"),
            read("cia/identification.json"),
            manifest["config"].clone(),
        ));
    }
    check(
        outputs[0] == outputs[1],
        format!(
            "two CLI runs: trace.json {} bytes, timeline.csv {} bytes, identification.json {} bytes; identical: {}",
            outputs[0].0.len(),
            outputs[0].1.len(),
            outputs[0].2.len(),
            outputs[0] == outputs[1]
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("no-FACTS identification hits the upper bound", no_facts_identification),
        ("scenario ordering of outages and cost", scenario_ordering),
        ("baseline feasibility", baseline_feasibility),
        ("power-flow properties", power_flow_properties),
        ("HVDC closed forms", hvdc_closed_forms),
        ("solver correctness", solver_correctness),
        ("search dominates the 150-point sweep", oracle_dominance),
        ("TCSC integrator", tcsc_integrator),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
