//! Heat currents, temperatures and coefficients of performance derived from a
//! stationary state.
//!
//! Currents are evaluated twice: from their trace definitions on the stationary
//! density matrix, and from closed forms in the deviation coefficient `d`. The
//! two routes are cross-checked by the test suites.

use serde::Serialize;
use thiserror::Error;

use crate::dissipation::{probe_channel, Refrigerator};
use crate::linalg::ComplexMatrix;
use crate::model::{
    inverse_virtual_temperature, virtual_coherence, Frame, ModelParams, Temperature, ThermalPopulations,
    TildePopulations,
};
use crate::scalar::{Real, C};
use crate::steadystate::{product_steady_state, SteadyStateResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("outside the cooling regime: COP denominator {denominator} <= 0")]
    NotCooling { denominator: f64 },
    #[error("COP bound undefined for eta_c = {eta_c}, gamma/E3 = {x}")]
    BoundOutOfRange { eta_c: f64, x: f64 },
    #[error("target population inverted (a1 = {a1}); no positive temperature")]
    PopulationInversion { a1: f64 },
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// The nine stationary currents. Positive values flow into the register.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeatCurrents<T> {
    pub q1: T,
    pub q2: T,
    pub q3: T,
    /// Internal fridge current maintaining `tau~2 (x) tau~3`.
    pub q23: T,
    pub q1g: T,
    pub q2g: T,
    pub q3g: T,
    /// Tilde-frame currents `Q~^g_2`, `Q~^g_3`.
    pub qt2g: T,
    pub qt3g: T,
}

impl<T: Real> HeatCurrents<T> {
    pub fn to_array(&self) -> [T; 9] {
        [self.q1, self.q2, self.q3, self.q23, self.q1g, self.q2g, self.q3g, self.qt2g, self.qt3g]
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Currents from both evaluation routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurrentReport<T> {
    /// `tr[H D(rho)]` definitions on the stationary matrix.
    pub trace: HeatCurrents<T>,
    /// Closed forms in `d`.
    pub closed_form: HeatCurrents<T>,
}

impl<T: Real> CurrentReport<T> {
    pub fn route_discrepancy(&self) -> T {
        self.trace.max_abs_diff(&self.closed_form)
    }
}

/// Internal fridge current `tr[H_fridge D_3(tau~2 tau~3)]` in closed form.
pub fn internal_current<T: Real>(p: T, frame: &Frame<T>, pops: &TildePopulations<T>) -> T {
    p * frame.cos2_half()
        * frame.sin2_half()
        * (frame.eps3 * (pops.r33 - pops.r32) + frame.eps2 * (pops.r23 - pops.r22))
}

/// Closed-form currents for deviation `d`.
pub fn closed_form_currents<T: Real>(
    params: &ModelParams<T>,
    frame: &Frame<T>,
    pops: &TildePopulations<T>,
    d: T,
) -> HeatCurrents<T> {
    let (c2, s2) = (frame.cos2_half(), frame.sin2_half());
    let (e2, e3) = (frame.eps2, frame.eps3);
    let k = params.g * d * T::lit(0.25);
    let q23 = internal_current(params.p, frame, pops);
    let q1 = -k * params.e1;
    let q2g = k * (e2 * c2 - e3 * s2);
    let q3g = -k * (e3 * c2 - e2 * s2);
    HeatCurrents {
        q1,
        q2: -q23 + q2g,
        q3: q23 + q3g,
        q23,
        q1g: q1,
        q2g,
        q3g,
        qt2g: k * e2,
        qt3g: -k * e3,
    }
}

fn tr_re<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    (a * b).trace().re
}

pub fn heat_currents<T: Real>(fridge: &Refrigerator<T>, steady: &SteadyStateResult<T>) -> CurrentReport<T> {
    let rho = steady.rho.matrix();
    let hams = &fridge.hamiltonians;
    let diss = &fridge.dissipators;
    let h = &hams.h_tot;
    let q1 = tr_re(h, &diss.target.apply(rho));
    let q2 = tr_re(h, &diss.bath2.apply(rho));
    let q3 = tr_re(h, &diss.bath3.apply(rho));
    let tau0 = product_steady_state(fridge);
    let q23 = tr_re(&hams.h_fridge, &diss.bath3.apply(&tau0));
    let dg = hams.h_g.commutator(rho).scale(C::new(T::zero(), -T::one()));
    let q1g = -tr_re(&hams.h1, &dg);
    let half = T::half();
    let qt2g = -tr_re(&fridge.paulis.sz2.scale_real(fridge.frame.eps2 * half), &dg);
    let qt3g = -tr_re(&fridge.paulis.sz3.scale_real(fridge.frame.eps3 * half), &dg);
    let trace = HeatCurrents { q1, q2, q3, q23, q1g, q2g: q2 + q23, q3g: q3 - q23, qt2g, qt3g };
    let closed_form =
        closed_form_currents(&fridge.params, &fridge.frame, &fridge.pops.tilde, steady.decomposition.d);
    CurrentReport { trace, closed_form }
}

/// Necessary cooling condition on the fridge Hamiltonian: `2 gamma^2 < E3 dE`.
pub fn cooling_condition<T: Real>(e1: T, e3: T, gamma: T) -> bool {
    let delta_e = (e1 * e1 - T::lit(4.0) * gamma * gamma).max(T::zero()).sqrt();
    T::two() * gamma * gamma < e3 * delta_e
}

/// Coupling at which the cooling condition becomes an equality:
/// `gamma_c^2 = (E3/2) (sqrt(E3^2 + E1^2) - E3)`.
pub fn critical_coupling<T: Real>(e1: T, e3: T) -> T {
    (e3 * T::half() * ((e3 * e3 + e1 * e1).sqrt() - e3)).sqrt()
}

/// COP counting only the currents induced by the tripartite interaction.
pub fn cop_g<T: Real>(frame: &Frame<T>) -> Result<T, ObservableError> {
    let denominator = frame.eps3 * frame.cos2_half() - frame.eps2 * frame.sin2_half();
    if denominator > T::zero() {
        Ok(frame.e1 / denominator)
    } else {
        Err(ObservableError::NotCooling { denominator: f(denominator) })
    }
}

/// Carnot COP of an absorption refrigerator, `(b2 - b3) / (b1 - b2)`.
pub fn carnot_cop<T: Real>(beta1: T, beta2: T, beta3: T) -> T {
    (beta2 - beta3) / (beta1 - beta2)
}

/// `(b~2 - b~3) / (b1 - b~2)`: the Carnot COP of the tilde-frame machine.
pub fn tilde_cop<T: Real>(beta1: T, frame: &Frame<T>, pops: &TildePopulations<T>) -> T {
    let (bt2, bt3) = (pops.beta_tilde2(frame), pops.beta_tilde3(frame));
    (bt2 - bt3) / (beta1 - bt2)
}

/// COP on the `T1 = T_v` surface from tilde-frame temperatures:
/// `(b~2 - b~3) / (b1 cos(theta) - b~2 cos^2(theta/2) + b~3 sin^2(theta/2))`.
pub fn max_cop_identity<T: Real>(beta1: T, frame: &Frame<T>, pops: &TildePopulations<T>) -> T {
    let (bt2, bt3) = (pops.beta_tilde2(frame), pops.beta_tilde3(frame));
    (bt2 - bt3) / (beta1 * frame.theta.cos() - bt2 * frame.cos2_half() + bt3 * frame.sin2_half())
}

/// The same expression with `- b~3 sin^2(theta/2)` in the denominator. It only agrees
/// with [`cop_g`] at `theta = 0`; kept for comparison.
pub fn max_cop_as_printed<T: Real>(beta1: T, frame: &Frame<T>, pops: &TildePopulations<T>) -> T {
    let (bt2, bt3) = (pops.beta_tilde2(frame), pops.beta_tilde3(frame));
    (bt2 - bt3) / (beta1 * frame.theta.cos() - bt2 * frame.cos2_half() - bt3 * frame.sin2_half())
}

/// Upper bound on the COP at maximum power as a function of `x = gamma / E3`.
pub fn eta_star_max<T: Real>(eta_c: T, x: T) -> Result<T, ObservableError> {
    let x2 = x * x;
    let denominator = eta_c * T::half() - T::two() * x2;
    if denominator > T::zero() {
        Ok((T::lit(0.25) * eta_c * eta_c + T::lit(4.0) * x2) / denominator)
    } else {
        Err(ObservableError::BoundOutOfRange { eta_c: f(eta_c), x: f(x) })
    }
}

/// `gamma / E3` at which the thermodynamic COP at maximum power reaches zero.
pub fn eta_tot_star_endpoint<T: Real>(eta_c: T) -> T {
    eta_c / (T::lit(16.0) + T::lit(8.0) * eta_c).sqrt()
}

/// Temperature of the target from the Bloch-z component `a1` of its reduced state.
pub fn local_target_temperature<T: Real>(a1: T, e1: T) -> Result<Temperature<T>, ObservableError> {
    if a1 > T::zero() {
        return Err(ObservableError::PopulationInversion { a1: f(a1) });
    }
    Ok(Temperature::from_beta(((T::one() - a1) / (T::one() + a1)).ln() / e1))
}

/// Bloch-z component of the target's reduced state.
pub fn target_bloch_z<T: Real>(steady: &SteadyStateResult<T>) -> T {
    let rho1 = steady.rho.partial_trace(&[1]).expect("qubit 1 of a 3-qubit state");
    rho1[(0, 0)].re - rho1[(1, 1)].re
}

/// Heat flowing from a fictitious target bath at temperature `t` into the stationary state.
pub fn probe_bath_flow<T: Real>(fridge: &Refrigerator<T>, steady: &SteadyStateResult<T>, t: T) -> T {
    let probe = probe_channel(fridge.params.e1, t, fridge.params.p);
    tr_re(&fridge.hamiltonians.h_tot, &probe.apply(steady.rho.matrix()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerformanceReport<T> {
    /// `None` outside the cooling regime of the fridge Hamiltonian.
    pub eta_g: Option<T>,
    pub eta_tot: T,
    pub eta_c: T,
    pub eta_tilde: T,
    pub tv: Temperature<T>,
    /// `None` when the target population is inverted.
    pub t1s: Option<Temperature<T>>,
    pub coherence: T,
    pub cooling: bool,
}

pub fn performance<T: Real>(
    fridge: &Refrigerator<T>,
    steady: &SteadyStateResult<T>,
    currents: &CurrentReport<T>,
) -> PerformanceReport<T> {
    let params = &fridge.params;
    let (frame, tilde) = (&fridge.frame, &fridge.pops.tilde);
    let q = &currents.trace;
    PerformanceReport {
        eta_g: cop_g(frame).ok(),
        eta_tot: q.q1 / q.q3,
        eta_c: carnot_cop(params.beta1(), params.beta2(), params.beta3()),
        eta_tilde: tilde_cop(params.beta1(), frame, tilde),
        tv: Temperature::from_beta(inverse_virtual_temperature(frame, tilde)),
        t1s: local_target_temperature(target_bloch_z(steady), params.e1).ok(),
        coherence: virtual_coherence(frame, tilde),
        cooling: q.q1g > T::zero(),
    }
}

/// Scalar summary of one parameter point from closed forms only (no matrices).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointSummary<T> {
    pub d: T,
    pub currents: HeatCurrents<T>,
    pub eta_g: Option<T>,
    pub eta_tot: T,
    pub beta_v: T,
    pub coherence: T,
    pub theta: T,
}

pub fn summarize<T: Real>(params: &ModelParams<T>) -> Result<PointSummary<T>, crate::model::ModelError> {
    params.check_feasible()?;
    let frame = Frame::from_params(params)?;
    let pops = ThermalPopulations::new(params, &frame);
    let d = crate::steadystate::deviation(params.p, params.g, &pops);
    let currents = closed_form_currents(params, &frame, &pops.tilde, d);
    Ok(PointSummary {
        d,
        eta_g: cop_g(&frame).ok(),
        eta_tot: currents.q1 / currents.q3,
        beta_v: inverse_virtual_temperature(&frame, &pops.tilde),
        coherence: virtual_coherence(&frame, &pops.tilde),
        theta: frame.theta,
        currents,
    })
}
