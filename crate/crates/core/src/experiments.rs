//! Sweeps, root finding and one-dimensional optimisation over the closed-form
//! model, plus the seeded random-refrigerator ensemble.
//!
//! Everything here is double precision. Points are independent, so they are
//! evaluated with rayon and collected in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    inverse_virtual_temperature, virtual_coherence, Frame, ModelError, ModelParams, ThermalPopulations,
};
use crate::observables::{
    carnot_cop, cooling_condition, cop_g, eta_star_max, max_cop_identity, summarize, PointSummary,
};

pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

/// Grid size of the bracketing scans and of the coarse optimisation stage.
pub const SCAN_POINTS: usize = 400;
/// Grid size of the optimiser audit.
pub const AUDIT_POINTS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("empty cooling window at gamma = {gamma}")]
    EmptyWindow { gamma: f64 },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

/// Closed-form evaluation of one point; `None` when infeasible.
pub fn evaluate(params: &ModelParams<f64>) -> Option<PointSummary<f64>> {
    summarize(params).ok()
}

/// Bisection on a bracketed sign change, to absolute width `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

// ---------------------------------------------------------------------------
// Generic sweep

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Beta3,
    E1,
    Gamma,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "beta3" => Some(Axis::Beta3),
            "e1" => Some(Axis::E1),
            "gamma" => Some(Axis::Gamma),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Beta3 => "beta3",
            Axis::E1 => "E1",
            Axis::Gamma => "gamma",
        }
    }

    pub fn apply(self, base: &ModelParams<f64>, x: f64) -> ModelParams<f64> {
        match self {
            Axis::Beta3 => base.with_t3(1.0 / x),
            Axis::E1 => base.with_e1(x),
            Axis::Gamma => base.with_gamma(x),
        }
    }
}

/// Observables a sweep can emit.
pub const OUTPUTS: [&str; 16] = [
    "d", "Q1", "Q2", "Q3", "Q23", "Q1g", "Q2g", "Q3g", "Qt2g", "Qt3g", "eta_g", "eta_tot", "eta_c", "beta_v",
    "C", "theta",
];

fn output_value(name: &str, params: &ModelParams<f64>, s: &PointSummary<f64>) -> Option<f64> {
    let q = &s.currents;
    Some(match name {
        "d" => s.d,
        "Q1" => q.q1,
        "Q2" => q.q2,
        "Q3" => q.q3,
        "Q23" => q.q23,
        "Q1g" => q.q1g,
        "Q2g" => q.q2g,
        "Q3g" => q.q3g,
        "Qt2g" => q.qt2g,
        "Qt3g" => q.qt3g,
        "eta_g" => return s.eta_g,
        "eta_tot" => s.eta_tot,
        "eta_c" => carnot_cop(params.beta1(), params.beta2(), params.beta3()),
        "beta_v" => s.beta_v,
        "C" => s.coherence,
        "theta" => s.theta,
        _ => return None,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ModelParams<f64>,
    pub axis: Axis,
    pub range: [f64; 2],
    pub points: usize,
    pub outputs: Vec<String>,
}

impl SweepSpec {
    pub fn check(&self) -> Result<(), ExperimentError> {
        if !(self.range[0] < self.range[1]) {
            return Err(ExperimentError::InvalidSpec(format!("range {:?} must satisfy lo < hi", self.range)));
        }
        if self.points < 2 {
            return Err(ExperimentError::InvalidSpec("points must be at least 2".into()));
        }
        if let Some(bad) = self.outputs.iter().find(|o| !OUTPUTS.contains(&o.as_str())) {
            return Err(ExperimentError::InvalidSpec(format!("unknown output {bad}; known: {}", OUTPUTS.join(", "))));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub params: ModelParams<f64>,
    /// `None` marks an infeasible point, or an output undefined there.
    pub values: Option<Vec<Option<f64>>>,
}

pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, ExperimentError> {
    spec.check()?;
    Ok(linspace(spec.range[0], spec.range[1], spec.points)
        .into_par_iter()
        .map(|x| {
            let params = spec.axis.apply(&spec.base, x);
            let values = evaluate(&params)
                .map(|s| spec.outputs.iter().map(|o| output_value(o, &params, &s)).collect());
            SweepRow { x, params, values }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// fig3: Q1g and the virtual-coherence change against beta3

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fig3Spec {
    pub e1: f64,
    pub e3: f64,
    pub t1: f64,
    pub t2: f64,
    pub p: f64,
    pub g: f64,
    pub gammas: Vec<f64>,
    pub beta3_lo: f64,
    pub points: usize,
}

impl Default for Fig3Spec {
    fn default() -> Self {
        Fig3Spec {
            e1: 1.0,
            e3: 4.0,
            t1: 2.0,
            t2: 2.0,
            p: 0.01,
            g: 0.01,
            gammas: vec![0.48, 0.49, crate::observables::critical_coupling(1.0, 4.0), 0.50],
            beta3_lo: 1e-3,
            points: 200,
        }
    }
}

impl Fig3Spec {
    fn params(&self, gamma: f64, beta3: f64) -> ModelParams<f64> {
        ModelParams { e1: self.e1, e3: self.e3, gamma, t1: self.t1, t2: self.t2, t3: 1.0 / beta3, p: self.p, g: self.g }
    }

    pub fn q1g(&self, gamma: f64, beta3: f64) -> f64 {
        evaluate(&self.params(gamma, beta3)).map_or(f64::NAN, |s| s.currents.q1g)
    }

    /// `C(rho_v)` relative to its value at `T3 = T2`.
    pub fn delta_c(&self, gamma: f64, beta3: f64) -> f64 {
        let coherence = |t3: f64| {
            let params = ModelParams { t3, ..self.params(gamma, beta3) };
            Frame::from_params(&params)
                .map(|fr| virtual_coherence(&fr, &ThermalPopulations::new(&params, &fr).tilde))
                .unwrap_or(f64::NAN)
        };
        coherence(1.0 / beta3) - coherence(self.t2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveClass {
    /// `Q1g > 0` for every `beta3 < beta2`.
    Positive,
    SignChanging,
    /// `Q1g < 0` for every `beta3 < beta2`.
    Negative,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Fig3Row {
    pub beta3: f64,
    pub gamma: f64,
    pub q1g: f64,
    pub delta_c: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig3Curve {
    pub gamma: f64,
    pub class: CurveClass,
    /// Whether Q1g decreases strictly along increasing beta3.
    pub monotone: bool,
    pub rows: Vec<Fig3Row>,
    pub q1g_roots: Vec<f64>,
    pub delta_c_roots: Vec<f64>,
}

pub const ROOT_TOL: f64 = 1e-12;

fn sign_change_roots(xs: &[f64], ys: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    xs.windows(2)
        .zip(ys.windows(2))
        .filter(|(_, y)| (y[0] < 0.0) != (y[1] < 0.0) && y[0] != 0.0 && y[1] != 0.0)
        .map(|(x, _)| bisect(&f, x[0], x[1], ROOT_TOL))
        .collect()
}

pub fn sweep_fig3(spec: &Fig3Spec) -> Result<Vec<Fig3Curve>, ExperimentError> {
    let beta2 = 1.0 / spec.t2;
    if !(spec.beta3_lo > 0.0 && spec.beta3_lo < beta2) || spec.points < 2 {
        return Err(ExperimentError::InvalidSpec(format!(
            "need 0 < beta3_lo < beta2 = {beta2} and points >= 2"
        )));
    }
    spec.gammas
        .iter()
        .map(|&gamma| {
            spec.params(gamma, spec.beta3_lo).check_feasible()?;
            let grid = linspace(spec.beta3_lo, beta2, spec.points);
            let rows: Vec<Fig3Row> = grid
                .par_iter()
                .map(|&beta3| Fig3Row {
                    beta3,
                    gamma,
                    q1g: spec.q1g(gamma, beta3),
                    delta_c: spec.delta_c(gamma, beta3),
                })
                .collect();
            // The last row sits on beta3 = beta2 where both curves vanish identically.
            let interior = &rows[..rows.len() - 1];
            let q: Vec<f64> = interior.iter().map(|r| r.q1g).collect();
            let dc: Vec<f64> = interior.iter().map(|r| r.delta_c).collect();
            let xs: Vec<f64> = interior.iter().map(|r| r.beta3).collect();
            let class = if q.iter().all(|&v| v > 0.0) {
                CurveClass::Positive
            } else if q.iter().all(|&v| v < 0.0) {
                CurveClass::Negative
            } else {
                CurveClass::SignChanging
            };
            Ok(Fig3Curve {
                gamma,
                class,
                monotone: q.windows(2).all(|w| w[1] < w[0]),
                q1g_roots: sign_change_roots(&xs, &q, |b| spec.q1g(gamma, b)),
                delta_c_roots: sign_change_roots(&xs, &dc, |b| spec.delta_c(gamma, b)),
                rows,
            })
        })
        .collect()
}

/// `dT_v/dT3` at `T3 = T2` by central differences.
pub fn virtual_temperature_slope(e1: f64, e3: f64, gamma: f64, t2: f64, h: f64) -> Result<f64, ModelError> {
    let frame = crate::model::resolve_resonance(e1, e3, gamma)?;
    let tv = |t3: f64| {
        let pops = crate::model::tilde_populations(&frame, t2, t3);
        1.0 / inverse_virtual_temperature(&frame, &pops)
    };
    Ok((tv(t2 + h) - tv(t2 - h)) / (2.0 * h))
}

/// Coupling at which `dT_v/dT3` at `T3 = T2` changes sign, by bisection on
/// finite differences. Independent of the closed-form cooling condition.
pub fn critical_coupling_numeric(e1: f64, e3: f64, t2: f64) -> Result<f64, ModelError> {
    let h = 1e-4 * t2;
    let slope = |gamma: f64| virtual_temperature_slope(e1, e3, gamma, t2, h).unwrap_or(f64::NAN);
    let (lo, hi) = (0.0, 0.5 * e1 * (1.0 - 1e-9));
    if (slope(lo) < 0.0) == (slope(hi) < 0.0) {
        return Err(ModelError::ResonanceInfeasible { gamma: hi, e1 });
    }
    Ok(bisect(slope, lo, hi, 1e-14))
}

// ---------------------------------------------------------------------------
// Cooling window over E1

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointKind {
    /// `d = 0`, i.e. `T1 = T_v`.
    Deviation,
    /// Boundary of the cooling condition on the fridge Hamiltonian.
    CoolingCondition,
    /// The window runs into the edge of the scanned range: `E1 = 2 gamma` below,
    /// the scan limit above.
    ScanBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoolingWindow {
    pub lo: f64,
    pub hi: f64,
    pub lo_kind: EndpointKind,
    pub hi_kind: EndpointKind,
}

impl CoolingWindow {
    pub fn contains(&self, e1: f64) -> bool {
        self.lo <= e1 && e1 <= self.hi
    }
}

pub const WINDOW_TOL: f64 = 1e-13;

fn cools(params: &ModelParams<f64>) -> bool {
    cooling_condition(params.e1, params.e3, params.gamma) && evaluate(params).is_some_and(|s| s.d < 0.0)
}

/// Upper end of the E1 scan: twice the `gamma = 0` right endpoint when the
/// baths admit cooling at all.
pub fn window_scan_limit(base: &ModelParams<f64>) -> f64 {
    let eta_c = carnot_cop(base.beta1(), base.beta2(), base.beta3());
    if base.beta1() > base.beta2() && eta_c > 0.0 {
        2.0 * base.gamma + 2.0 * base.e3 * eta_c
    } else {
        2.0 * base.gamma + 20.0 * (base.e3 + base.t1)
    }
}

/// Range of E1 where the stationary target is colder than its bath (`d < 0`)
/// under the cooling condition. If the scan finds several disjoint pieces, the
/// one with the largest Q1g is returned.
pub fn cooling_window(base: &ModelParams<f64>) -> Result<CoolingWindow, ExperimentError> {
    let gamma = base.gamma;
    let lo = 2.0 * gamma * (1.0 + 1e-12) + 1e-12;
    let hi = window_scan_limit(base).max(lo * 2.0);
    let grid = linspace(lo, hi, SCAN_POINTS);
    let scan: Vec<(bool, f64)> = grid
        .iter()
        .map(|&e1| {
            let params = base.with_e1(e1);
            let q = evaluate(&params).map_or(f64::NEG_INFINITY, |s| s.currents.q1g);
            (cools(&params), q)
        })
        .collect();
    let best = (0..grid.len())
        .filter(|&i| scan[i].0)
        .max_by(|&i, &j| scan[i].1.total_cmp(&scan[j].1))
        .ok_or(ExperimentError::EmptyWindow { gamma })?;
    let (mut i, mut j) = (best, best);
    while i > 0 && scan[i - 1].0 {
        i -= 1;
    }
    while j + 1 < grid.len() && scan[j + 1].0 {
        j += 1;
    }
    let endpoint = |inside: f64, outside: Option<f64>| -> (f64, EndpointKind) {
        let Some(out) = outside else { return (inside, EndpointKind::ScanBoundary) };
        let condition = |e1: f64| cooling_condition(e1, base.e3, gamma);
        let d = |e1: f64| evaluate(&base.with_e1(e1)).map_or(f64::NAN, |s| s.d);
        if condition(out) {
            return (bisect(d, inside, out, WINDOW_TOL), EndpointKind::Deviation);
        }
        let indicator = |e1: f64| if condition(e1) { -1.0 } else { 1.0 };
        let edge = bisect(indicator, inside, out, WINDOW_TOL);
        // Step back onto the side where the condition holds.
        let edge = if condition(edge) { edge } else { edge + (inside - edge).signum() * WINDOW_TOL };
        // d may still change sign between the condition boundary and the grid node.
        if d(edge) < 0.0 {
            (edge, EndpointKind::CoolingCondition)
        } else {
            (bisect(d, inside, edge, WINDOW_TOL), EndpointKind::Deviation)
        }
    };
    let (wlo, lo_kind) = endpoint(grid[i], i.checked_sub(1).map(|k| grid[k]));
    let (whi, hi_kind) = endpoint(grid[j], grid.get(j + 1).copied());
    Ok(CoolingWindow { lo: wlo, hi: whi, lo_kind, hi_kind })
}

// ---------------------------------------------------------------------------
// fig4: COPs across the cooling window

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fig4Spec {
    pub base: ModelParams<f64>,
    pub gammas: Vec<f64>,
    pub points: usize,
}

impl Default for Fig4Spec {
    fn default() -> Self {
        Fig4Spec {
            base: ModelParams { e1: 1.0, e3: 4.0, gamma: 0.2, t1: 4.0 / 3.0, t2: 2.0, t3: 4.0, p: 0.01, g: 0.01 },
            gammas: vec![0.2, 0.4, 0.6],
            points: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Fig4Row {
    pub e1: f64,
    pub gamma: f64,
    pub eta_g: f64,
    pub eta_tot: f64,
    pub coherence: f64,
    pub d: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WindowEndpoint {
    pub e1: f64,
    pub kind: EndpointKind,
    pub eta_g: f64,
    pub eta_tot: f64,
    /// The tilde-temperature form of the COP on `T1 = T_v`.
    pub eta_max_identity: f64,
    pub d: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig4Curve {
    pub gamma: f64,
    pub window: CoolingWindow,
    pub endpoints: [WindowEndpoint; 2],
    pub rows: Vec<Fig4Row>,
}

fn fig4_row(params: &ModelParams<f64>) -> Option<Fig4Row> {
    let s = evaluate(params)?;
    Some(Fig4Row {
        e1: params.e1,
        gamma: params.gamma,
        eta_g: s.eta_g?,
        eta_tot: s.eta_tot,
        coherence: s.coherence,
        d: s.d,
    })
}

fn window_endpoint(params: &ModelParams<f64>, kind: EndpointKind) -> Result<WindowEndpoint, ExperimentError> {
    let frame = Frame::from_params(params)?;
    let pops = ThermalPopulations::new(params, &frame);
    let s = summarize(params)?;
    Ok(WindowEndpoint {
        e1: params.e1,
        kind,
        eta_g: cop_g(&frame).unwrap_or(f64::NAN),
        eta_tot: s.eta_tot,
        eta_max_identity: max_cop_identity(params.beta1(), &frame, &pops.tilde),
        d: s.d,
    })
}

pub fn sweep_fig4(spec: &Fig4Spec) -> Result<Vec<Fig4Curve>, ExperimentError> {
    if spec.points < 2 {
        return Err(ExperimentError::InvalidSpec("points must be at least 2".into()));
    }
    spec.gammas
        .iter()
        .map(|&gamma| {
            let base = spec.base.with_gamma(gamma);
            let window = cooling_window(&base)?;
            let rows = linspace(window.lo, window.hi, spec.points)
                .into_par_iter()
                .filter_map(|e1| fig4_row(&base.with_e1(e1)))
                .collect();
            let endpoints = [
                window_endpoint(&base.with_e1(window.lo), window.lo_kind)?,
                window_endpoint(&base.with_e1(window.hi), window.hi_kind)?,
            ];
            Ok(Fig4Curve { gamma, window, endpoints, rows })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// fig5: the COP on the T1 = T_v surface against beta3

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fig5Spec {
    pub e1: f64,
    pub e3: f64,
    pub t2: f64,
    pub p: f64,
    pub g: f64,
    pub gammas: Vec<f64>,
    pub beta3_lo: f64,
    pub points: usize,
}

impl Default for Fig5Spec {
    fn default() -> Self {
        Fig5Spec { e1: 1.0, e3: 4.0, t2: 2.0, p: 0.01, g: 0.01, gammas: vec![0.1, 0.2, 0.3], beta3_lo: 1e-3, points: 200 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Fig5Row {
    pub beta3: f64,
    pub gamma: f64,
    /// `T1` set to the virtual temperature.
    pub t1: f64,
    pub eta_g: f64,
    pub eta_c: f64,
    pub ratio: f64,
    pub coherence: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig5Curve {
    pub gamma: f64,
    pub rows: Vec<Fig5Row>,
    /// beta3 values where `T_v <= 0` or infinite.
    pub skipped: Vec<f64>,
}

/// One point of the fig5 surface; `None` when `T_v` is not a positive temperature.
pub fn fig5_point(spec: &Fig5Spec, gamma: f64, beta3: f64) -> Result<Option<Fig5Row>, ExperimentError> {
    let frame = crate::model::resolve_resonance(spec.e1, spec.e3, gamma)?;
    let pops = crate::model::tilde_populations(&frame, spec.t2, 1.0 / beta3);
    let beta_v = inverse_virtual_temperature(&frame, &pops);
    if !(beta_v > 0.0 && beta_v.is_finite()) {
        return Ok(None);
    }
    let eta_g = cop_g(&frame).map_err(|e| ExperimentError::InvalidSpec(e.to_string()))?;
    let eta_c = carnot_cop(beta_v, 1.0 / spec.t2, beta3);
    Ok(Some(Fig5Row {
        beta3,
        gamma,
        t1: 1.0 / beta_v,
        eta_g,
        eta_c,
        ratio: eta_g / eta_c,
        coherence: virtual_coherence(&frame, &pops),
    }))
}

pub fn sweep_fig5(spec: &Fig5Spec) -> Result<Vec<Fig5Curve>, ExperimentError> {
    let beta2 = 1.0 / spec.t2;
    if !(spec.beta3_lo > 0.0 && spec.beta3_lo < beta2) || spec.points < 2 {
        return Err(ExperimentError::InvalidSpec(format!(
            "need 0 < beta3_lo < beta2 = {beta2} and points >= 2"
        )));
    }
    // beta3 = beta2 itself is a 0/0 point for eta_c and is left out.
    let grid: Vec<f64> = linspace(spec.beta3_lo, beta2, spec.points + 1)[..spec.points].to_vec();
    spec.gammas
        .iter()
        .map(|&gamma| {
            let points: Vec<(f64, Option<Fig5Row>)> = grid
                .par_iter()
                .map(|&b| fig5_point(spec, gamma, b).map(|r| (b, r)))
                .collect::<Result<_, _>>()?;
            let skipped = points.iter().filter(|(_, r)| r.is_none()).map(|(b, _)| *b).collect();
            let rows = points.into_iter().filter_map(|(_, r)| r).collect();
            Ok(Fig5Curve { gamma, rows, skipped })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Optimisation over E1

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Optimum {
    pub e1: f64,
    pub value: f64,
    /// Best value on the uniform audit grid over the same window.
    pub audit_best: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MaxPower {
    pub window: CoolingWindow,
    pub e1_star: f64,
    pub q1g_max: f64,
    pub eta_g_star: f64,
    pub eta_tot_star: f64,
    pub coherence: f64,
    pub audit_best: f64,
}

pub const GOLDEN_TOL: f64 = 1e-8;

/// Coarse grid over the open window, then golden section around the best node.
fn maximize_on(window: &CoolingWindow, f: impl Fn(f64) -> f64) -> Optimum {
    let grid = linspace(window.lo, window.hi, SCAN_POINTS + 2);
    let inner = &grid[1..grid.len() - 1];
    let best = (0..inner.len()).max_by(|&i, &j| f(inner[i]).total_cmp(&f(inner[j]))).unwrap_or(0);
    let a = grid[best];
    let b = grid[best + 2];
    let x = golden_max(&f, a, b, GOLDEN_TOL);
    let x = if f(x) >= f(inner[best]) { x } else { inner[best] };
    let audit = linspace(window.lo, window.hi, AUDIT_POINTS + 2);
    let audit_best = audit[1..audit.len() - 1].iter().map(|&e| f(e)).fold(f64::NEG_INFINITY, f64::max);
    Optimum { e1: x, value: f(x), audit_best }
}

/// Maximises Q1g over E1 inside the cooling window at fixed other parameters.
pub fn maximize_cooling_power(base: &ModelParams<f64>) -> Result<MaxPower, ExperimentError> {
    let window = cooling_window(base)?;
    maximize_in(base, window)
}

fn maximize_in(base: &ModelParams<f64>, window: CoolingWindow) -> Result<MaxPower, ExperimentError> {
    let q1g = |e1: f64| evaluate(&base.with_e1(e1)).map_or(f64::NEG_INFINITY, |s| s.currents.q1g);
    let opt = maximize_on(&window, q1g);
    let s = summarize(&base.with_e1(opt.e1))?;
    Ok(MaxPower {
        window,
        e1_star: opt.e1,
        q1g_max: opt.value,
        eta_g_star: s.eta_g.unwrap_or(f64::NAN),
        eta_tot_star: s.eta_tot,
        coherence: s.coherence,
        audit_best: opt.audit_best,
    })
}

/// Minimum of eta_g over E1 inside the cooling window.
pub fn minimize_cop(base: &ModelParams<f64>) -> Result<Optimum, ExperimentError> {
    let window = cooling_window(base)?;
    Ok(minimize_in(base, &window))
}

fn minimize_in(base: &ModelParams<f64>, window: &CoolingWindow) -> Optimum {
    let neg_eta = |e1: f64| {
        Frame::from_params(&base.with_e1(e1))
            .ok()
            .and_then(|fr| cop_g(&fr).ok())
            .map_or(f64::NEG_INFINITY, |eta| -eta)
    };
    let opt = maximize_on(window, neg_eta);
    Optimum { e1: opt.e1, value: -opt.value, audit_best: -opt.audit_best }
}

// ---------------------------------------------------------------------------
// Random-refrigerator ensemble

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub eta_c: f64,
    pub seed: u64,
    /// gamma = k E3 eta_c / gamma_steps, k uniform over integers with a defined bound.
    pub gamma_steps: u32,
    pub e3_range: [f64; 2],
    /// T2 is log-uniform on this range.
    pub t2_range: [f64; 2],
    /// T3 is uniform on (T2, factor T2].
    pub t3_factor: f64,
    /// p = g = rate_per_e3 E3.
    pub rate_per_e3: f64,
    pub near_bound_gap: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            n: 1000,
            eta_c: 1.0,
            seed: 7,
            gamma_steps: 200,
            e3_range: [2.0, 8.0],
            t2_range: [1.0, 40.0],
            t3_factor: 5.0,
            rate_per_e3: 0.0025,
            near_bound_gap: 0.05,
        }
    }
}

impl EnsembleSpec {
    pub fn check(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidSpec(m.into()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(self.eta_c > 0.0 && self.eta_c.is_finite()) {
            return bad("eta_c must be positive");
        }
        if !(self.e3_range[0] > 0.0 && self.e3_range[0] < self.e3_range[1]) {
            return bad("E3 range must be positive and increasing");
        }
        if !(self.t2_range[0] > 0.0 && self.t2_range[0] < self.t2_range[1]) {
            return bad("T2 range must be positive and increasing");
        }
        if !(self.t3_factor > 1.0) {
            return bad("T3 factor must exceed 1");
        }
        if !(self.rate_per_e3 > 0.0) || self.gamma_steps == 0 {
            return bad("rates and gamma steps must be positive");
        }
        Ok(())
    }

    /// Number of admissible gamma multiples: `x = k eta_c / steps < sqrt(eta_c) / 2`.
    pub fn gamma_multiples(&self) -> u32 {
        let limit = f64::from(self.gamma_steps) / (2.0 * self.eta_c.sqrt());
        limit.ceil() as u32
    }

    /// Draws one candidate. Always consumes exactly four random numbers.
    pub fn sample(&self, rng: &mut impl Rng) -> ModelParams<f64> {
        let e3 = rng.random_range(self.e3_range[0]..self.e3_range[1]);
        let (l0, l1) = (self.t2_range[0].ln(), self.t2_range[1].ln());
        let t2 = rng.random_range(l0..l1).exp();
        let t3 = t2 * (self.t3_factor - (self.t3_factor - 1.0) * rng.random::<f64>());
        let k = rng.random_range(0..self.gamma_multiples());
        let beta1 = 1.0 / t2 + (1.0 / t2 - 1.0 / t3) / self.eta_c;
        let rate = self.rate_per_e3 * e3;
        ModelParams {
            e1: e3,
            e3,
            gamma: f64::from(k) * e3 * self.eta_c / f64::from(self.gamma_steps),
            t1: 1.0 / beta1,
            t2,
            t3,
            p: rate,
            g: rate,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnsembleRow {
    pub index: usize,
    pub x: f64,
    pub e3: f64,
    pub gamma: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub e1_star: f64,
    pub eta_g_star_over_eta_c: f64,
    pub eta_tot_star: f64,
    pub coherence: f64,
    pub eta_star_max: f64,
    pub eta_star_min: f64,
    pub near_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleResult {
    pub rows: Vec<EnsembleRow>,
    /// Candidates rejected (empty window or undefined bound) before `n` were accepted.
    pub rejected: usize,
}

fn ensemble_model(spec: &EnsembleSpec, params: &ModelParams<f64>) -> Option<(MaxPower, Optimum, f64)> {
    let x = params.gamma / params.e3;
    let bound = eta_star_max(spec.eta_c, x).ok()?;
    let window = cooling_window(params).ok()?;
    let power = maximize_in(params, window).ok()?;
    let lowest = minimize_in(params, &window);
    Some((power, lowest, bound))
}

const ENSEMBLE_CHUNK: usize = 256;

pub fn random_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult, ExperimentError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.n);
    let mut rejected = 0;
    while rows.len() < spec.n {
        let candidates: Vec<ModelParams<f64>> = (0..ENSEMBLE_CHUNK).map(|_| spec.sample(&mut rng)).collect();
        let results: Vec<_> = candidates.par_iter().map(|c| ensemble_model(spec, c)).collect();
        for (params, result) in candidates.iter().zip(results) {
            if rows.len() == spec.n {
                break;
            }
            let Some((power, lowest, bound)) = result else {
                rejected += 1;
                continue;
            };
            let eta = power.eta_g_star;
            rows.push(EnsembleRow {
                index: rows.len(),
                x: params.gamma / params.e3,
                e3: params.e3,
                gamma: params.gamma,
                t1: params.t1,
                t2: params.t2,
                t3: params.t3,
                e1_star: power.e1_star,
                eta_g_star_over_eta_c: eta / spec.eta_c,
                eta_tot_star: power.eta_tot_star,
                coherence: power.coherence,
                eta_star_max: bound,
                eta_star_min: lowest.value,
                near_bound: (bound - eta) / (bound - lowest.value) < spec.near_bound_gap,
            });
        }
    }
    Ok(EnsembleResult { rows, rejected })
}

// ---------------------------------------------------------------------------
// High-temperature saturation of the COP bound

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SaturationRow {
    pub kappa: f64,
    pub x: f64,
    pub e1_star: f64,
    pub eta_g_star: f64,
    pub eta_star_max: f64,
    /// `(eta_max - eta*) / eta_max`.
    pub relative_gap: f64,
    /// `E1* / T1`.
    pub e1_over_t1: f64,
}

/// Scales all three bath temperatures by each `kappa` (keeping eta_c fixed),
/// sets `gamma = x E3`, and compares the COP at maximum power with the bound.
pub fn high_temperature_saturation(
    base: &ModelParams<f64>,
    x: f64,
    kappas: &[f64],
) -> Result<Vec<SaturationRow>, ExperimentError> {
    if kappas.iter().any(|&k| !(k >= 1.0)) {
        return Err(ExperimentError::InvalidSpec("kappa must be >= 1".into()));
    }
    let eta_c = carnot_cop(base.beta1(), base.beta2(), base.beta3());
    let bound = eta_star_max(eta_c, x).map_err(|e| ExperimentError::InvalidSpec(e.to_string()))?;
    kappas
        .par_iter()
        .map(|&kappa| {
            let params = ModelParams {
                gamma: x * base.e3,
                t1: base.t1 * kappa,
                t2: base.t2 * kappa,
                t3: base.t3 * kappa,
                ..*base
            };
            let power = maximize_cooling_power(&params)?;
            Ok(SaturationRow {
                kappa,
                x,
                e1_star: power.e1_star,
                eta_g_star: power.eta_g_star,
                eta_star_max: bound,
                relative_gap: (bound - power.eta_g_star) / bound,
                e1_over_t1: power.e1_star / params.t1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_and_golden() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        let m = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((m - 0.3).abs() < 1e-8);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(0.1, 0.7, 7);
        assert_eq!(v.len(), 7);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[6], 0.7);
    }

    #[test]
    fn gamma_multiples_keep_bound_defined() {
        let spec = EnsembleSpec::default();
        assert_eq!(spec.gamma_multiples(), 100);
        assert!(eta_star_max(1.0, 99.0 / 200.0).is_ok());
        assert!(eta_star_max(1.0, 100.0 / 200.0).is_err());
        let spec = EnsembleSpec { eta_c: 0.5, ..spec };
        let k = spec.gamma_multiples();
        assert!(eta_star_max(0.5, f64::from(k - 1) * 0.5 / 200.0).is_ok());
        assert!(eta_star_max(0.5, f64::from(k) * 0.5 / 200.0).is_err());
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let spec = SweepSpec {
            base: ModelParams::reference(),
            axis: Axis::E1,
            range: [1.0, 0.5],
            points: 10,
            outputs: vec!["d".into()],
        };
        assert!(sweep(&spec).is_err());
        let spec = SweepSpec { range: [0.7, 1.5], outputs: vec!["nope".into()], ..spec };
        assert!(sweep(&spec).is_err());
    }
}
