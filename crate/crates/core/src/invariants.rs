//! Named invariant groups evaluated at a single parameter point.
//!
//! Shared by the property tests, the `validate` command and the acceptance
//! suite. Tolerances are double-precision contracts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dissipation::Refrigerator;
use crate::linalg::ComplexMatrix;
use crate::model::{inverse_virtual_temperature, ModelParams, PopulationConvention};
use crate::observables::{cooling_condition, heat_currents, local_target_temperature, probe_bath_flow, target_bloch_z};
use crate::scalar::C;
use crate::steadystate::{analytic_from, numeric_from, validate, OperatorFamily, SteadyStateError};

pub const GROUPS: [&str; 7] =
    ["channels", "localization", "steady-state", "first-law", "sign-chain", "tilde-currents", "probe-bath"];

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub group: &'static str,
    pub passed: bool,
    /// Largest violation measure seen in the group.
    pub worst: f64,
    pub detail: String,
}

impl Outcome {
    fn bound(group: &'static str, worst: f64, tol: f64) -> Self {
        Outcome { group, passed: worst <= tol, worst, detail: format!("max {worst:.3e} (tol {tol:.0e})") }
    }
}

/// Random feasible point over a broad range, temperatures unordered.
pub fn sample_feasible(rng: &mut impl Rng) -> ModelParams<f64> {
    let e1 = rng.random_range(0.3..3.0);
    let log_t = |rng: &mut dyn rand::RngCore| rng.random_range(0.5f64.ln()..10f64.ln()).exp();
    ModelParams {
        e1,
        e3: rng.random_range(0.5..8.0),
        gamma: rng.random_range(0.0..0.495) * e1,
        t1: log_t(rng),
        t2: log_t(rng),
        t3: log_t(rng),
        p: rng.random_range(0.002..0.05),
        g: rng.random_range(0.0..0.05),
    }
}

/// Random Hermitian 8 x 8 matrix with entries of order one.
pub fn random_hermitian(rng: &mut impl Rng) -> ComplexMatrix<f64> {
    let m = ComplexMatrix::from_fn(8, 8, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    m.hermitian_part()
}

pub fn random_hermitian_seeded(seed: u64) -> ComplexMatrix<f64> {
    random_hermitian(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// `n` random points with their channel probes, reproducible from `seed`.
pub fn sample_points(seed: u64, n: usize) -> Vec<(ModelParams<f64>, ComplexMatrix<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let params = sample_feasible(&mut rng);
            (params, random_hermitian(&mut rng))
        })
        .collect()
}

/// Runs every group at `params`; `probe` is an arbitrary Hermitian matrix for the channel checks.
/// `convention` feeds the closed-form populations only; the generator always uses the physical one.
pub fn check_point(
    params: &ModelParams<f64>,
    probe: &ComplexMatrix<f64>,
    convention: PopulationConvention,
) -> Result<Vec<Outcome>, SteadyStateError> {
    check_point_with(params, probe, convention, 1e-8)
}

/// As [`check_point`] with coefficient tolerance `tol` for the two steady-state routes.
pub fn check_point_with(
    params: &ModelParams<f64>,
    probe: &ComplexMatrix<f64>,
    convention: PopulationConvention,
    tol: f64,
) -> Result<Vec<Outcome>, SteadyStateError> {
    let fridge = Refrigerator::new(*params)?;
    let d = &fridge.dissipators;
    let mut out = Vec::with_capacity(GROUPS.len());

    let channels = [&d.target, &d.bath2, &d.bath3, &d.tilde2, &d.tilde3];
    let worst = channels
        .iter()
        .map(|ch| {
            let y = ch.apply(probe);
            y.trace().norm().max(y.max_abs_diff(&y.adjoint()))
        })
        .fold(0.0, f64::max);
    out.push(Outcome::bound("channels", worst, 1e-12));

    let family = OperatorFamily::new(&fridge.paulis);
    let worst = std::iter::once(&family.identity)
        .chain(family.operators.iter())
        .map(|x| {
            let lab = &d.bath2.apply(x) + &d.bath3.apply(x);
            let tilde = &d.tilde2.apply(x) + &d.tilde3.apply(x);
            lab.max_abs_diff(&tilde)
        })
        .fold(0.0, f64::max);
    out.push(Outcome::bound("localization", worst, 1e-12));

    let numeric = numeric_from(&fridge)?;
    let report = validate(params, tol, convention)?;
    let min_eig = numeric.rho.min_eigenvalue();
    let analytic_min = analytic_from(&fridge, PopulationConvention::Physical).map(|a| a.rho.min_eigenvalue());
    let positive = min_eig >= -1e-12 && analytic_min.as_ref().is_ok_and(|m| *m >= -1e-12);
    out.push(Outcome {
        group: "steady-state",
        passed: report.passed && report.numeric_residual <= 1e-10 && positive,
        worst: report.max_delta,
        detail: format!(
            "max coefficient delta {:.3e}, numeric residual {:.3e}, min eigenvalue {:.3e}",
            report.max_delta, report.numeric_residual, min_eig
        ),
    });

    let currents = heat_currents(&fridge, &numeric);
    let (q, qc) = (&currents.trace, &currents.closed_form);
    let worst = [
        (q.q1 + q.q2 + q.q3).abs(),
        (qc.q1 + qc.q2 + qc.q3).abs(),
        (q.q1g - q.q1).abs(),
        currents.route_discrepancy() / 10.0,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    out.push(Outcome::bound("first-law", worst, 1e-10));

    // d < 0  <=>  beta_v > beta_1  <=>  Q1g > 0  <=>  a1 < s1 (colder target).
    let dev = numeric.decomposition.d;
    let beta_v = inverse_virtual_temperature(&fridge.frame, &fridge.pops.tilde);
    let a1 = target_bloch_z(&numeric);
    let margin = params.g * 1e-9;
    let chain = if dev.abs() <= 1e-10 || (beta_v - params.beta1()).abs() <= 1e-9 {
        true
    } else {
        let cold = dev < 0.0;
        cold == (beta_v > params.beta1()) && cold == (q.q1g > 0.0) && cold == (a1 < fridge.pops.s1)
    };
    let guard = !(q.q1g > margin && cooling_condition(params.e1, params.e3, params.gamma)) || q.q3g > 0.0;
    out.push(Outcome {
        group: "sign-chain",
        passed: chain && guard,
        worst: if chain && guard { 0.0 } else { 1.0 },
        detail: format!("d {dev:.3e}, beta_v - beta1 {:.3e}, Q1g {:.3e}, Q3g {:.3e}", beta_v - params.beta1(), q.q1g, q.q3g),
    });

    let (c2, s2) = (fridge.frame.cos2_half(), fridge.frame.sin2_half());
    let worst = [
        (q.q1g + q.qt2g + q.qt3g).abs(),
        (q.q2g - q.qt2g * c2 - q.qt3g * s2).abs(),
        (q.q3g - q.qt3g * c2 - q.qt2g * s2).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    out.push(Outcome::bound("tilde-currents", worst, 1e-10));

    let probe_outcome = match local_target_temperature(a1, params.e1).ok().and_then(|t| t.finite()) {
        Some(t1s) if t1s > 0.0 => {
            let flow = probe_bath_flow(&fridge, &numeric, t1s).abs() / params.p;
            Outcome::bound("probe-bath", flow, 1e-10)
        }
        _ => Outcome { group: "probe-bath", passed: true, worst: 0.0, detail: format!("skipped, a1 = {a1:.3e}") },
    };
    out.push(probe_outcome);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point_passes_every_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let probe = random_hermitian(&mut rng);
        let outcomes = check_point(&ModelParams::reference(), &probe, PopulationConvention::Physical).unwrap();
        assert_eq!(outcomes.len(), GROUPS.len());
        for o in outcomes {
            assert!(o.passed, "{o:?}");
        }
    }

    #[test]
    fn flipped_exponent_fails_steady_state() {
        let probe = ComplexMatrix::identity(8);
        let outcomes = check_point(&ModelParams::reference(), &probe, PopulationConvention::PrintedExponent).unwrap();
        let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.group).collect();
        assert_eq!(failed, ["steady-state"]);
    }
}
