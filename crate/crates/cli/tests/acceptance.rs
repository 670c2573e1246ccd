//! End-to-end acceptance checks. Runs without the test harness and prints one
//! `[PASS]` or `[FAIL]` line per criterion; exits nonzero if any fail.

use std::process::Command;
use std::time::{Duration, Instant};

use neqfridge::dissipation::Refrigerator;
use neqfridge::experiments::{
    critical_coupling_numeric, fig5_point, high_temperature_saturation, random_ensemble, sweep_fig3, sweep_fig4,
    sweep_fig5, CurveClass, EndpointKind, EnsembleSpec, Fig3Spec, Fig4Spec, Fig5Spec,
};
use neqfridge::invariants::{check_point, sample_points};
use neqfridge::model::{Frame, ThermalPopulations};
use neqfridge::observables::{critical_coupling, eta_star_max, heat_currents, max_cop_as_printed};
use neqfridge::steadystate::{numeric_from, validate};
use neqfridge::{ModelParams, PopulationConvention};
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn reference_family() -> Vec<ModelParams<f64>> {
    let p0 = ModelParams::reference();
    vec![
        p0,
        p0.with_g(0.0),
        p0.with_gamma(0.0),
        ModelParams { t3: p0.t2, ..p0 },
        p0.with_t1(1.0),
        p0.with_gamma(0.45),
    ]
}

fn ac1() -> Outcome {
    let mut points: Vec<ModelParams<f64>> = sample_points(101, 20).into_iter().map(|(p, _)| p).collect();
    points.extend(reference_family());
    let reports: Vec<_> = points
        .par_iter()
        .map(|p| validate(p, 1e-8, PopulationConvention::Physical).map_err(|e| format!("{e} at {p:?}")))
        .collect::<Result<_, _>>()?;
    let delta = reports.iter().map(|r| r.max_delta).fold(0.0, f64::max);
    let residual = reports.iter().map(|r| r.numeric_residual).fold(0.0, f64::max);
    let passed = reports.iter().all(|r| r.passed) && residual <= 1e-10;
    check(
        passed,
        format!("{} points, max coefficient delta {delta:.2e} (tol 1e-8), max residual {residual:.2e} (tol 1e-10)", points.len()),
    )
}

fn ac2() -> Outcome {
    let points = sample_points(202, 200);
    let worst: Vec<(f64, f64)> = points
        .par_iter()
        .map(|(p, _)| {
            let fridge = Refrigerator::new(*p).map_err(|e| e.to_string())?;
            let steady = numeric_from(&fridge).map_err(|e| e.to_string())?;
            let q = heat_currents(&fridge, &steady).trace;
            Ok(((q.q1 + q.q2 + q.q3).abs(), (q.q1g - q.q1).abs()))
        })
        .collect::<Result<_, String>>()?;
    let sum = worst.iter().map(|w| w.0).fold(0.0, f64::max);
    let q1g = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    check(sum <= 1e-10 && q1g <= 1e-10, format!("200 points, max |Q1+Q2+Q3| {sum:.2e}, max |Q1g-Q1| {q1g:.2e} (tol 1e-10)"))
}

fn ac3() -> Outcome {
    let exact = (2.0 * 17f64.sqrt() - 8.0).sqrt();
    let closed = critical_coupling(1.0, 4.0);
    let closed_err = (closed - exact).abs();
    let numeric = critical_coupling_numeric(1.0, 4.0, 2.0).map_err(|e| e.to_string())?;
    let fd_err = (numeric - closed).abs();
    check(
        closed_err <= 1e-12 && fd_err <= 1e-6,
        format!("gamma_c {closed:.12}, closed-form error {closed_err:.1e} (tol 1e-12), finite-difference error {fd_err:.1e} (tol 1e-6)"),
    )
}

fn ac4() -> Outcome {
    let start = Instant::now();
    let curves = sweep_fig3(&Fig3Spec::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let classes: Vec<CurveClass> = curves.iter().map(|c| c.class).collect();
    let expected = [CurveClass::Positive, CurveClass::SignChanging, CurveClass::Negative, CurveClass::Negative];
    let mut root_gap = 0.0f64;
    let mut roots_match = true;
    for c in &curves {
        roots_match &= c.q1g_roots.len() == c.delta_c_roots.len();
        for (a, b) in c.q1g_roots.iter().zip(&c.delta_c_roots) {
            root_gap = root_gap.max((a - b).abs());
        }
    }
    let has_root = curves[1].q1g_roots.len() == 1;
    check(
        classes == expected && roots_match && has_root && root_gap <= 1e-8 && elapsed <= Duration::from_secs(10),
        format!("classes {classes:?}, root gap {root_gap:.1e} (tol 1e-8), {:.2} s at 200 points (limit 10 s)", elapsed.as_secs_f64()),
    )
}

fn ac5() -> Outcome {
    let curves = sweep_fig4(&Fig4Spec::default()).map_err(|e| e.to_string())?;
    let (mut tot, mut identity, mut order, mut carnot) = (0.0f64, 0.0f64, true, true);
    let mut kinds = true;
    let mut printed_gap = 0.0f64;
    for c in &curves {
        for ep in &c.endpoints {
            kinds &= ep.kind == EndpointKind::Deviation;
            tot = tot.max(ep.eta_tot.abs());
            identity = identity.max((ep.eta_g - ep.eta_max_identity).abs());
            let params = Fig4Spec::default().base.with_gamma(c.gamma).with_e1(ep.e1);
            let frame = Frame::from_params(&params).map_err(|e| e.to_string())?;
            let pops = ThermalPopulations::new(&params, &frame);
            printed_gap = printed_gap.max((max_cop_as_printed(params.beta1(), &frame, &pops.tilde) - ep.eta_g).abs());
        }
        for r in &c.rows {
            order &= r.eta_g >= r.eta_tot;
            carnot &= r.eta_g <= 1.0;
        }
    }
    println!("       info: the COP identity with the printed sign differs by up to {printed_gap:.3e} at the endpoints");
    check(
        kinds && tot <= 1e-8 && identity <= 1e-10 && order && carnot,
        format!(
            "windows {}, max |eta_tot| at endpoints {tot:.1e} (tol 1e-8), identity gap {identity:.1e} (tol 1e-10), \
             eta_g >= eta_tot: {order}, eta_g <= 1: {carnot}",
            curves.iter().map(|c| format!("[{:.4}, {:.4}]", c.window.lo, c.window.hi)).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn ac6() -> Outcome {
    let spec = Fig5Spec::default();
    let curves = sweep_fig5(&spec).map_err(|e| e.to_string())?;
    let complete = curves.iter().all(|c| c.skipped.is_empty() && c.rows.len() == spec.points);
    let mut ordered = complete;
    if complete {
        for i in 0..spec.points {
            for w in curves.windows(2) {
                let (a, b) = (&w[0].rows[i], &w[1].rows[i]);
                ordered &= b.ratio < a.ratio && b.coherence > a.coherence;
            }
        }
    }
    let beta2 = 1.0 / spec.t2;
    let mut limit_gap = 0.0f64;
    for &gamma in &spec.gammas {
        let row = fig5_point(&spec, gamma, beta2 - 1e-4).map_err(|e| e.to_string())?.ok_or("T_v undefined near beta2")?;
        limit_gap = limit_gap.max((row.ratio - 1.0).abs());
    }
    check(
        ordered && limit_gap <= 1e-3,
        format!("ordering at all {} sampled beta3: {ordered}, |ratio - 1| at beta2 - 1e-4: {limit_gap:.1e} (tol 1e-3)", spec.points),
    )
}

fn ac7() -> Outcome {
    let spec = EnsembleSpec::default();
    let start = Instant::now();
    let result = random_ensemble(&spec).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (mut above, mut below, mut near, mut near_c) = (0usize, 0usize, 0usize, 0.0f64);
    for r in &result.rows {
        let eta = r.eta_g_star_over_eta_c * spec.eta_c;
        above += usize::from(eta > r.eta_star_max + 1e-9);
        below += usize::from(eta < r.eta_star_min - 1e-9);
        if r.near_bound {
            near += 1;
            near_c = near_c.max(r.coherence);
        }
    }
    check(
        result.rows.len() == 1000 && above == 0 && below == 0 && near_c <= 0.12 && elapsed <= Duration::from_secs(120),
        format!(
            "{} models (seed {}), above bound {above}, below minimum {below}, {near} near-bound with max C {near_c:.4} \
             (limit 0.12), {:.1} s (limit 120 s)",
            result.rows.len(),
            spec.seed,
            elapsed.as_secs_f64()
        ),
    )
}

fn ac8() -> Outcome {
    let base = Fig4Spec::default().base;
    let mut gaps = Vec::new();
    for x in [0.0, 0.05, 0.1] {
        let rows = high_temperature_saturation(&base, x, &[20.0]).map_err(|e| e.to_string())?;
        gaps.push(rows[0].relative_gap);
    }
    let at_zero = high_temperature_saturation(&base, 0.0, &[20.0]).map_err(|e| e.to_string())?[0].eta_g_star;
    let half = eta_star_max(1.0_f64, 0.0).map_err(|e| e.to_string())?;
    check(
        gaps.iter().all(|g| g.abs() <= 0.02) && (half - 0.5).abs() < 1e-15 && (at_zero - 0.5).abs() <= 0.01,
        format!("relative gaps at kappa = 20: {gaps:.4?} (limit 0.02), eta* at gamma = 0: {at_zero:.4} vs eta_c/2 = {half}"),
    )
}

fn ac9() -> Outcome {
    let points = sample_points(909, 1000);
    let failures: Vec<String> = points
        .par_iter()
        .map(|(p, probe)| match check_point(p, probe, PopulationConvention::Physical) {
            Ok(outcomes) => outcomes.into_iter().filter(|o| !o.passed).map(|o| format!("{}: {}", o.group, o.detail)).collect(),
            Err(e) => vec![format!("solver: {e}")],
        })
        .flatten()
        .collect();
    check(
        failures.is_empty(),
        match failures.first() {
            None => "1000 random trials, 7 groups each, zero failures".into(),
            Some(first) => format!("{} failures, first {first}", failures.len()),
        },
    )
}

fn data_section(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn ac10() -> Outcome {
    let root = std::env::temp_dir().join(format!("neqfridge-acceptance-{}", std::process::id()));
    let mut sections = Vec::new();
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let dir = root.join(run);
        let out = Command::new(env!("CARGO_BIN_EXE_neqfridge"))
            .args(["figure", "fig6", "--seed", "7", "--out"])
            .arg(&dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("run {run} failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        let text = std::fs::read_to_string(dir.join("fig6.csv")).map_err(|e| e.to_string())?;
        sections.push(data_section(&text));
        files.push(text);
    }
    let _ = std::fs::remove_dir_all(&root);
    let rows = sections[0].lines().count().saturating_sub(1);
    check(
        sections[0] == sections[1] && rows == 1000,
        format!("{rows} rows, data sections identical: {}, whole files identical: {}", sections[0] == sections[1], files[0] == files[1]),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1 oracle equivalence", ac1),
        ("AC2 first law", ac2),
        ("AC3 critical coupling", ac3),
        ("AC4 Q1g classes against beta3", ac4),
        ("AC5 COPs across the cooling window", ac5),
        ("AC6 COP on the T1 = Tv surface", ac6),
        ("AC7 COP bound over the ensemble", ac7),
        ("AC8 high-temperature saturation", ac8),
        ("AC9 invariant suite", ac9),
        ("AC10 deterministic ensemble output", ac10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.2} s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail} ({secs:.2} s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
