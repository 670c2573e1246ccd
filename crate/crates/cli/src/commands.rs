use std::path::{Path, PathBuf};

use neqfridge::dissipation::Refrigerator;
use neqfridge::experiments::{
    self, maximize_cooling_power, minimize_cop, random_ensemble, sweep, sweep_fig3, sweep_fig4, sweep_fig5, Axis,
    EnsembleResult, EnsembleSpec, ExperimentError, Fig3Spec, Fig4Spec, Fig5Spec, SweepSpec, OUTPUTS,
};
use neqfridge::invariants::{check_point_with, random_hermitian_seeded, sample_points, Outcome};
use neqfridge::linalg::LinalgError;
use neqfridge::model::ModelError;
use neqfridge::observables::{heat_currents, performance, CurrentReport, PerformanceReport};
use neqfridge::steadystate::{analytic_from, numeric_from, SteadyDecomposition, SteadyStateError};
use neqfridge::{ModelParams64, PopulationConvention};
use serde::Serialize;

use crate::config::{ConfigError, Overrides, RunConfig};
use crate::output::{num, opt, write_json, Table};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config, infeasible parameters, I/O.
    User(String),
    Degenerate(String),
    Invariant(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::User(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::User(m) | CliError::Degenerate(m) | CliError::Invariant(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::User(e.0)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<SteadyStateError> for CliError {
    fn from(e: SteadyStateError) -> Self {
        match e {
            SteadyStateError::Model(m) => m.into(),
            SteadyStateError::Linalg(l @ LinalgError::DimensionMismatch { .. }) => CliError::User(l.to_string()),
            SteadyStateError::Linalg(l) => CliError::Degenerate(l.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::User(format!("i/o error: {e}"))
    }
}

fn feasible(params: ModelParams64) -> Result<ModelParams64, CliError> {
    params.check_feasible()?;
    Ok(params)
}

fn positive(points: usize, name: &str) -> Result<usize, CliError> {
    if points < 2 {
        return Err(CliError::User(format!("{name} must be at least 2")));
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// steady

#[derive(Serialize)]
struct FrameReport {
    e2: f64,
    delta_e: f64,
    theta: f64,
    eps2: f64,
    eps3: f64,
    e_bar: f64,
    lambda: f64,
}

#[derive(Serialize)]
struct Route {
    decomposition: SteadyDecomposition<f64>,
    residual: f64,
}

#[derive(Serialize)]
struct SteadyReport {
    frame: FrameReport,
    analytic: Route,
    numeric: Route,
    max_coefficient_delta: f64,
    currents: CurrentReport<f64>,
    performance: PerformanceReport<f64>,
}

pub fn steady(o: Overrides) -> Result<(), CliError> {
    let params = feasible(o.params(ModelParams64::reference()))?;
    let fridge = Refrigerator::new(params)?;
    let numeric = numeric_from(&fridge)?;
    let analytic = analytic_from(&fridge, PopulationConvention::Physical)?;
    let currents = heat_currents(&fridge, &numeric);
    let fr = &fridge.frame;
    let report = SteadyReport {
        frame: FrameReport {
            e2: fr.e2,
            delta_e: fr.delta_e,
            theta: fr.theta,
            eps2: fr.eps2,
            eps3: fr.eps3,
            e_bar: fr.e_bar,
            lambda: fr.lambda,
        },
        max_coefficient_delta: analytic.decomposition.max_abs_diff(&numeric.decomposition),
        analytic: Route { decomposition: analytic.decomposition, residual: analytic.residual },
        performance: performance(&fridge, &numeric, &currents),
        numeric: Route { decomposition: numeric.decomposition, residual: numeric.residual },
        currents,
    };
    let config = RunConfig::new("steady").with_params(&params);
    write_json(&config, &report, o.out.as_deref())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// figure

fn out_dir(o: &Overrides) -> Result<PathBuf, CliError> {
    let dir = o.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn gammas(o: &Overrides, defaults: Vec<f64>) -> Vec<f64> {
    o.gamma.map_or(defaults, |g| vec![g])
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(" "))
}

pub fn fig3(o: &Overrides, dir: &Path) -> Result<(), CliError> {
    let d = Fig3Spec::default();
    let spec = Fig3Spec {
        e1: o.e1.unwrap_or(d.e1),
        e3: o.e3.unwrap_or(d.e3),
        t1: o.t1.unwrap_or(d.t1),
        t2: o.t2.unwrap_or(d.t2),
        p: o.p.unwrap_or(d.p),
        g: o.g.unwrap_or(d.g),
        gammas: gammas(o, d.gammas),
        beta3_lo: d.beta3_lo,
        points: positive(o.points.unwrap_or(d.points), "points")?,
    };
    for &gamma in &spec.gammas {
        let (e1, e3, t1, t2, p, g) = (spec.e1, spec.e3, spec.t1, spec.t2, spec.p, spec.g);
        feasible(ModelParams64 { e1, e3, gamma, t1, t2, t3: t2, p, g })?;
    }
    let curves = sweep_fig3(&spec)?;
    let config = RunConfig::new("figure fig3")
        .with("e1", spec.e1)
        .with("e3", spec.e3)
        .with("t1", spec.t1)
        .with("t2", spec.t2)
        .with("p", spec.p)
        .with("g", spec.g)
        .with("gammas", &spec.gammas)
        .with("beta3-lo", spec.beta3_lo)
        .with("points", spec.points);
    let mut t = Table::new(
        vec!["beta3", "gamma", "Q1g", "deltaC"],
        "beta3 = 1/T3; gamma; Q1g heat extracted from the target; deltaC = C(rho_v) - C(rho_v at T3 = T2)",
    );
    for c in &curves {
        t.note(format!(
            "curve gamma={} class={} monotone={} q1g_roots={} deltaC_roots={}",
            num(c.gamma),
            serde_json::to_value(c.class).unwrap_or_default().as_str().unwrap_or(""),
            c.monotone,
            fmt_list(&c.q1g_roots),
            fmt_list(&c.delta_c_roots)
        ));
        for r in &c.rows {
            t.push(vec![num(r.beta3), num(r.gamma), num(r.q1g), num(r.delta_c)]);
        }
    }
    t.save(&config, &dir.join("fig3.csv"))?;
    Ok(())
}

pub fn fig4(o: &Overrides, dir: &Path) -> Result<(), CliError> {
    let d = Fig4Spec::default();
    let base = o.params(d.base);
    let spec = Fig4Spec {
        base,
        gammas: gammas(o, d.gammas),
        points: positive(o.points.unwrap_or(d.points), "points")?,
    };
    if spec.gammas.iter().any(|g| !(*g >= 0.0)) {
        return Err(CliError::User("gamma must be non-negative".into()));
    }
    let curves = sweep_fig4(&spec)?;
    let config = RunConfig::new("figure fig4")
        .with("e3", base.e3)
        .with("t1", base.t1)
        .with("t2", base.t2)
        .with("t3", base.t3)
        .with("p", base.p)
        .with("g", base.g)
        .with("gammas", &spec.gammas)
        .with("points", spec.points);
    let mut t = Table::new(
        vec!["E1", "gamma", "eta_g", "eta_tot", "C", "d"],
        "E1 across the cooling window; eta_g = Q1g/Q3g; eta_tot = Q1/Q3; C virtual-qubit coherence; d deviation",
    );
    let mut ends = Table::new(
        vec!["gamma", "side", "E1", "kind", "eta_g", "eta_tot", "eta_max_identity", "d"],
        "cooling-window endpoints; kind deviation (T1 = Tv) or cooling-condition; eta_max_identity is the tilde-temperature COP form",
    );
    for c in &curves {
        for r in &c.rows {
            t.push(vec![num(r.e1), num(r.gamma), num(r.eta_g), num(r.eta_tot), num(r.coherence), num(r.d)]);
        }
        for (side, e) in ["lo", "hi"].iter().zip(&c.endpoints) {
            let kind = serde_json::to_value(e.kind).unwrap_or_default();
            ends.push(vec![
                num(c.gamma),
                side.to_string(),
                num(e.e1),
                kind.as_str().unwrap_or("").to_string(),
                num(e.eta_g),
                num(e.eta_tot),
                num(e.eta_max_identity),
                num(e.d),
            ]);
        }
    }
    t.save(&config, &dir.join("fig4.csv"))?;
    ends.save(&config, &dir.join("fig4_endpoints.csv"))?;
    Ok(())
}

pub fn fig5(o: &Overrides, dir: &Path) -> Result<(), CliError> {
    let d = Fig5Spec::default();
    let spec = Fig5Spec {
        e1: o.e1.unwrap_or(d.e1),
        e3: o.e3.unwrap_or(d.e3),
        t2: o.t2.unwrap_or(d.t2),
        p: o.p.unwrap_or(d.p),
        g: o.g.unwrap_or(d.g),
        gammas: gammas(o, d.gammas),
        beta3_lo: d.beta3_lo,
        points: positive(o.points.unwrap_or(d.points), "points")?,
    };
    let curves = sweep_fig5(&spec)?;
    let config = RunConfig::new("figure fig5")
        .with("e1", spec.e1)
        .with("e3", spec.e3)
        .with("t2", spec.t2)
        .with("p", spec.p)
        .with("g", spec.g)
        .with("gammas", &spec.gammas)
        .with("beta3-lo", spec.beta3_lo)
        .with("points", spec.points);
    let mut t = Table::new(
        vec!["beta3", "gamma", "T1", "eta_g", "eta_c", "ratio", "C"],
        "beta3 = 1/T3 below beta2; T1 set to the virtual temperature; ratio = eta_g/eta_c; C virtual-qubit coherence",
    );
    for c in &curves {
        if !c.skipped.is_empty() {
            t.note(format!("curve gamma={} skipped {} points with non-positive Tv", num(c.gamma), c.skipped.len()));
        }
        for r in &c.rows {
            t.push(vec![num(r.beta3), num(r.gamma), num(r.t1), num(r.eta_g), num(r.eta_c), num(r.ratio), num(r.coherence)]);
        }
    }
    t.save(&config, &dir.join("fig5.csv"))?;
    Ok(())
}

fn ensemble_spec(o: &Overrides) -> Result<EnsembleSpec, CliError> {
    let d = EnsembleSpec::default();
    let spec = EnsembleSpec { n: o.n.unwrap_or(d.n), eta_c: o.eta_c.unwrap_or(d.eta_c), seed: o.seed.unwrap_or(d.seed), ..d };
    spec.check()?;
    Ok(spec)
}

fn ensemble_table(spec: &EnsembleSpec, result: &EnsembleResult, command: &str) -> (RunConfig, Table) {
    let config = RunConfig::new(command)
        .with("n", spec.n)
        .with("eta-c", spec.eta_c)
        .with("seed", spec.seed)
        .with("gamma-steps", spec.gamma_steps)
        .with("e3-range", spec.e3_range)
        .with("t2-range", spec.t2_range)
        .with("t3-factor", spec.t3_factor)
        .with("rate-per-e3", spec.rate_per_e3)
        .with("near-bound-gap", spec.near_bound_gap);
    let mut t = Table::new(
        vec![
            "index", "x", "E3", "gamma", "T1", "T2", "T3", "E1_star", "eta_g_star_over_eta_c", "eta_tot_star", "C",
            "eta_star_max", "eta_star_min", "near_bound",
        ],
        "x = gamma/E3; E1_star maximises Q1g; eta_star_max bound at x; eta_star_min lowest eta_g in the window; \
         near_bound = 1 when (eta_star_max - eta_g*)/(eta_star_max - eta_star_min) is below the gap",
    );
    t.note(format!("rng: {}", experiments::RNG_ALGORITHM));
    t.note(format!("rejected candidates: {}", result.rejected));
    for r in &result.rows {
        t.push(vec![
            r.index.to_string(),
            num(r.x),
            num(r.e3),
            num(r.gamma),
            num(r.t1),
            num(r.t2),
            num(r.t3),
            num(r.e1_star),
            num(r.eta_g_star_over_eta_c),
            num(r.eta_tot_star),
            num(r.coherence),
            num(r.eta_star_max),
            num(r.eta_star_min),
            u8::from(r.near_bound).to_string(),
        ]);
    }
    (config, t)
}

pub fn fig6(o: &Overrides, dir: &Path) -> Result<(), CliError> {
    let spec = ensemble_spec(o)?;
    let result = random_ensemble(&spec)?;
    let (config, t) = ensemble_table(&spec, &result, "figure fig6");
    t.save(&config, &dir.join("fig6.csv"))?;
    Ok(())
}

pub fn figure(name: &str, o: Overrides) -> Result<(), CliError> {
    let dir = out_dir(&o)?;
    match name {
        "fig3" => fig3(&o, &dir),
        "fig4" => fig4(&o, &dir),
        "fig5" => fig5(&o, &dir),
        "fig6" => fig6(&o, &dir),
        other => Err(CliError::User(format!("unknown figure {other}; expected fig3, fig4, fig5 or fig6"))),
    }
}

fn save_or_print(table: &Table, config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => table.save(config, path)?,
        None => table.write(config, &mut std::io::stdout().lock())?,
    }
    Ok(())
}

pub fn ensemble(o: Overrides) -> Result<(), CliError> {
    let spec = ensemble_spec(&o)?;
    let result = random_ensemble(&spec)?;
    let (config, t) = ensemble_table(&spec, &result, "ensemble");
    save_or_print(&t, &config, o.out.as_deref())
}

// ---------------------------------------------------------------------------
// sweep, maximize

pub fn sweep_cmd(o: Overrides, axis: &str, from: f64, to: f64, outputs: &str) -> Result<(), CliError> {
    let axis = Axis::parse(axis)
        .ok_or_else(|| CliError::User(format!("unknown axis {axis}; expected beta3, e1 or gamma")))?;
    let base = o.params(ModelParams64::reference());
    let outputs: Vec<String> = outputs.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    let spec = SweepSpec { base, axis, range: [from, to], points: o.points.unwrap_or(101), outputs };
    spec.check().map_err(|e| CliError::User(format!("{e} (outputs: {})", OUTPUTS.join(","))))?;
    let rows = sweep(&spec)?;
    let config = RunConfig::new("sweep")
        .with_params(&base)
        .with("axis", axis.name())
        .with("from", from)
        .with("to", to)
        .with("points", spec.points)
        .with("outputs", spec.outputs.join(","));
    let columns: Vec<&'static str> = std::iter::once(axis.name())
        .chain(spec.outputs.iter().filter_map(|o| OUTPUTS.iter().copied().find(|k| k == o)))
        .collect();
    let mut t = Table::new(columns, "swept value then the requested outputs; nan marks infeasible or undefined points");
    for r in &rows {
        let mut line = vec![num(r.x)];
        match &r.values {
            Some(values) => line.extend(values.iter().map(|v| opt(*v))),
            None => line.extend(spec.outputs.iter().map(|_| opt(None))),
        }
        t.push(line);
    }
    save_or_print(&t, &config, o.out.as_deref())
}

#[derive(Serialize)]
struct MaximizeReport {
    max_power: experiments::MaxPower,
    min_cop: experiments::Optimum,
}

pub fn maximize(o: Overrides) -> Result<(), CliError> {
    let base = feasible(o.params(ModelParams64::reference()))?;
    let report = MaximizeReport { max_power: maximize_cooling_power(&base)?, min_cop: minimize_cop(&base)? };
    let config = RunConfig::new("maximize").with_params(&base);
    write_json(&config, &report, o.out.as_deref())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// validate

#[derive(Serialize)]
struct PointReport {
    params: ModelParams64,
    passed: bool,
    outcomes: Vec<Outcome>,
}

#[derive(Serialize)]
struct ValidateReport {
    passed: bool,
    failed_groups: Vec<&'static str>,
    points: Vec<PointReport>,
}

pub fn validate(o: Overrides, point: Option<&str>, flip: bool) -> Result<(), CliError> {
    let tol = o.tol.unwrap_or(1e-8);
    if !(tol > 0.0) {
        return Err(CliError::User("tol must be positive".into()));
    }
    let seed = o.seed.unwrap_or(7);
    let points = match point {
        Some(name) if name.eq_ignore_ascii_case("p0") => {
            let params = feasible(o.params(ModelParams64::reference()))?;
            vec![(params, random_hermitian_seeded(seed))]
        }
        Some(other) => return Err(CliError::User(format!("unknown point {other}; expected p0"))),
        None => sample_points(seed, o.n.unwrap_or(20)),
    };
    let convention = if flip { PopulationConvention::PrintedExponent } else { PopulationConvention::Physical };
    let mut reports = Vec::with_capacity(points.len());
    for (params, probe) in &points {
        let outcomes = check_point_with(params, probe, convention, tol)?;
        reports.push(PointReport { params: *params, passed: outcomes.iter().all(|x| x.passed), outcomes });
    }
    let mut failed: Vec<&'static str> =
        reports.iter().flat_map(|r| r.outcomes.iter().filter(|x| !x.passed).map(|x| x.group)).collect();
    failed.sort_unstable();
    failed.dedup();
    let report = ValidateReport { passed: failed.is_empty(), failed_groups: failed.clone(), points: reports };
    let mut config = RunConfig::new("validate").with("tol", tol).with("seed", seed);
    config = match point {
        Some(_) => config.with("point", "p0").with_params(&points[0].0),
        None => config.with("n", points.len()),
    };
    if flip {
        config = config.with("flip-population-sign", true);
    }
    write_json(&config, &report, o.out.as_deref())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("invariant failure: {}", failed.join(", "))))
    }
}
