//! Physical parameters, the diagonalizing frame of the two-qubit fridge, thermal
//! populations, and the virtual qubit (temperature and coherence).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{embed, identity2, kron, sigma_minus, sigma_plus, sigma_z, ComplexMatrix};
use crate::scalar::{re, Real, C};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("resonance infeasible: gamma > E1/2 (gamma = {gamma}, E1 = {e1})")]
    ResonanceInfeasible { gamma: f64, e1: f64 },
    #[error("temperatures must satisfy T1 <= T2 <= T3 (got {t1}, {t2}, {t3})")]
    TemperatureOrdering { t1: f64, t2: f64, t3: f64 },
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// The eight physical inputs of one refrigerator instance. `E2` is not an input:
/// it follows from the resonance condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Target gap.
    pub e1: T,
    /// Engine gap.
    pub e3: T,
    /// Spiral-engine coupling.
    pub gamma: T,
    pub t1: T,
    pub t2: T,
    pub t3: T,
    /// Dissipation rate, common to all three baths.
    pub p: T,
    /// Tripartite coupling.
    pub g: T,
}

impl<T: Real> ModelParams<T> {
    pub fn beta1(&self) -> T {
        self.t1.recip()
    }

    pub fn beta2(&self) -> T {
        self.t2.recip()
    }

    pub fn beta3(&self) -> T {
        self.t3.recip()
    }

    /// Positivity and resonance feasibility. Temperature ordering is not required.
    pub fn check_feasible(&self) -> Result<(), ModelError> {
        let positive = [
            ("E1", self.e1),
            ("E3", self.e3),
            ("T1", self.t1),
            ("T2", self.t2),
            ("T3", self.t3),
            ("p", self.p),
        ];
        for (name, value) in positive {
            if !(value > T::zero()) {
                return Err(ModelError::NonPositive { name, value: f(value) });
            }
        }
        for (name, value) in [("gamma", self.gamma), ("g", self.g)] {
            if !(value >= T::zero()) {
                return Err(ModelError::Negative { name, value: f(value) });
            }
        }
        if self.gamma > self.e1 * T::half() {
            return Err(ModelError::ResonanceInfeasible { gamma: f(self.gamma), e1: f(self.e1) });
        }
        Ok(())
    }

    /// Fridge operating regime `T1 <= T2 <= T3`.
    pub fn check_ordering(&self) -> Result<(), ModelError> {
        if self.t1 <= self.t2 && self.t2 <= self.t3 {
            Ok(())
        } else {
            Err(ModelError::TemperatureOrdering { t1: f(self.t1), t2: f(self.t2), t3: f(self.t3) })
        }
    }

    /// [`check_feasible`](Self::check_feasible) plus the temperature ordering.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.check_feasible()?;
        self.check_ordering()
    }

    pub fn with_e1(mut self, e1: T) -> Self {
        self.e1 = e1;
        self
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_t1(mut self, t1: T) -> Self {
        self.t1 = t1;
        self
    }

    pub fn with_t3(mut self, t3: T) -> Self {
        self.t3 = t3;
        self
    }

    pub fn with_g(mut self, g: T) -> Self {
        self.g = g;
        self
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        let c = |x: T| U::lit(f(x));
        ModelParams {
            e1: c(self.e1),
            e3: c(self.e3),
            gamma: c(self.gamma),
            t1: c(self.t1),
            t2: c(self.t2),
            t3: c(self.t3),
            p: c(self.p),
            g: c(self.g),
        }
    }
}

impl ModelParams<f64> {
    /// Reference point used throughout the tests and examples:
    /// `E1=1, E3=4, gamma=0.3, T1=4/3, T2=2, T3=4, p=g=0.01`.
    pub fn reference() -> Self {
        Self { e1: 1.0, e3: 4.0, gamma: 0.3, t1: 4.0 / 3.0, t2: 2.0, t3: 4.0, p: 0.01, g: 0.01 }
    }
}

/// Diagonalization data of the spiral-engine Hamiltonian at resonance.
#[derive(Clone, Debug)]
pub struct Frame<T> {
    pub e1: T,
    pub e3: T,
    pub gamma: T,
    pub e2: T,
    pub delta_e: T,
    pub e_bar: T,
    pub lambda: T,
    pub eps2: T,
    pub eps3: T,
    /// Mixing angle in `[0, pi/2]`.
    pub theta: T,
    /// Two-qubit unitary on qubits (2, 3) with `H_fridge = U^dagger (eps2 sz2 + eps3 sz3)/2 U`.
    pub u: ComplexMatrix<T>,
}

/// Derives `E2` from the resonance `eps2 - eps3 = E1` and builds the frame.
pub fn resolve_resonance<T: Real>(e1: T, e3: T, gamma: T) -> Result<Frame<T>, ModelError> {
    if !(e1 > T::zero()) {
        return Err(ModelError::NonPositive { name: "E1", value: f(e1) });
    }
    if !(gamma >= T::zero()) {
        return Err(ModelError::Negative { name: "gamma", value: f(gamma) });
    }
    if gamma > e1 * T::half() {
        return Err(ModelError::ResonanceInfeasible { gamma: f(gamma), e1: f(e1) });
    }
    let two = T::two();
    let delta_e = (e1 * e1 - two * two * gamma * gamma).max(T::zero()).sqrt();
    let e2 = e3 + delta_e;
    let e_bar = (e2 + e3) * T::half();
    let lambda = ((delta_e * T::half()).powi(2) + gamma * gamma).sqrt();
    let theta = if delta_e == T::zero() {
        T::FRAC_PI_2()
    } else {
        (two * gamma / delta_e).atan()
    };
    let q = theta / T::lit(4.0);
    let (c4, s4) = (q.cos(), q.sin());
    let s2 = (theta * T::half()).sin();
    let zz = kron(&sigma_z::<T>(), &sigma_z());
    let hop = &kron(&sigma_plus::<T>(), &sigma_minus()) - &kron(&sigma_minus::<T>(), &sigma_plus());
    let u = &(&ComplexMatrix::identity(4).scale_real(c4 * c4) + &zz.scale_real(s4 * s4))
        + &hop.scale_real(s2);
    Ok(Frame {
        e1,
        e3,
        gamma,
        e2,
        delta_e,
        e_bar,
        lambda,
        eps2: e_bar + lambda,
        eps3: e_bar - lambda,
        theta,
        u,
    })
}

impl<T: Real> Frame<T> {
    pub fn from_params(params: &ModelParams<T>) -> Result<Self, ModelError> {
        resolve_resonance(params.e1, params.e3, params.gamma)
    }

    pub fn cos_half(&self) -> T {
        (self.theta * T::half()).cos()
    }

    pub fn sin_half(&self) -> T {
        (self.theta * T::half()).sin()
    }

    /// `cos^2(theta/2)`.
    pub fn cos2_half(&self) -> T {
        self.cos_half().powi(2)
    }

    /// `sin^2(theta/2)`.
    pub fn sin2_half(&self) -> T {
        self.sin_half().powi(2)
    }

    /// `I (x) U` on the full register.
    pub fn u_register(&self) -> ComplexMatrix<T> {
        kron(&identity2(), &self.u)
    }

    /// `|psi_ij> = U^dagger |ij>` as a 4-component vector.
    pub fn eigenvector(&self, i: usize, j: usize) -> Vec<C<T>> {
        let idx = 2 * i + j;
        (0..4).map(|k| self.u[(idx, k)].conj()).collect()
    }

    /// Fridge energies of `|psi_00>, |psi_01>, |psi_10>, |psi_11>`: `E, lambda, -lambda, -E`.
    pub fn fridge_energies(&self) -> [T; 4] {
        let h = T::half();
        [
            h * (self.eps2 + self.eps3),
            h * (self.eps2 - self.eps3),
            -h * (self.eps2 - self.eps3),
            -h * (self.eps2 + self.eps3),
        ]
    }
}

/// Pauli operators of the target and of the two tilde-frame qubits, on the full register.
#[derive(Clone, Debug)]
pub struct TildePaulis<T> {
    pub sp1: ComplexMatrix<T>,
    pub sz1: ComplexMatrix<T>,
    pub sp2: ComplexMatrix<T>,
    pub sz2: ComplexMatrix<T>,
    pub sp3: ComplexMatrix<T>,
    pub sz3: ComplexMatrix<T>,
}

impl<T: Real> TildePaulis<T> {
    pub fn new(frame: &Frame<T>) -> Self {
        let u = frame.u_register();
        let ud = u.adjoint();
        let tilde = |op: ComplexMatrix<T>| &(&ud * &op) * &u;
        let on = |op: ComplexMatrix<T>, q| embed(&op, &[q]).expect("valid qubit");
        Self {
            sp1: on(sigma_plus(), 1),
            sz1: on(sigma_z(), 1),
            sp2: tilde(on(sigma_plus(), 2)),
            sz2: tilde(on(sigma_z(), 2)),
            sp3: tilde(on(sigma_plus(), 3)),
            sz3: tilde(on(sigma_z(), 3)),
        }
    }

    /// Raising operator of qubit 1, 2~ or 3~.
    pub fn plus(&self, qubit: usize) -> &ComplexMatrix<T> {
        match qubit {
            1 => &self.sp1,
            2 => &self.sp2,
            3 => &self.sp3,
            _ => panic!("qubit {qubit} out of range"),
        }
    }

    pub fn z(&self, qubit: usize) -> &ComplexMatrix<T> {
        match qubit {
            1 => &self.sz1,
            2 => &self.sz2,
            3 => &self.sz3,
            _ => panic!("qubit {qubit} out of range"),
        }
    }

    /// Virtual-qubit raising operator `|psi_01><psi_10| = sp2~ sm3~`.
    pub fn sigma_v_plus(&self) -> ComplexMatrix<T> {
        &self.sp2 * &self.sp3.adjoint()
    }
}

/// Excited-state population `1 / (1 + exp(E/T))` of a two-level system in equilibrium.
pub fn thermal_population<T: Real>(e: T, t: T) -> T {
    (T::one() + (e / t).exp()).recip()
}

/// Sign convention for the fridge populations `r_{nu mu}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PopulationConvention {
    /// `1 / (1 + exp(+beta_mu eps_nu))`: excited-state population, detailed balance with the reset channels.
    #[default]
    Physical,
    /// `1 / (1 + exp(-beta_mu eps_nu))`. Kept only as a regression guard.
    PrintedExponent,
}

impl PopulationConvention {
    fn population<T: Real>(self, e: T, t: T) -> T {
        match self {
            Self::Physical => thermal_population(e, t),
            Self::PrintedExponent => thermal_population(-e, t),
        }
    }
}

/// Populations driving the tilde-frame qubits 2~ and 3~.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TildePopulations<T> {
    /// `r_{nu mu}`: gap `eps_nu` at the temperature of bath `mu`.
    pub r22: T,
    pub r23: T,
    pub r32: T,
    pub r33: T,
    pub rtilde2: T,
    pub rtilde3: T,
    pub ttilde2: T,
    pub ttilde3: T,
}

impl<T: Real> TildePopulations<T> {
    /// `1/T~_2`, computed from the population ratio.
    pub fn beta_tilde2(&self, frame: &Frame<T>) -> T {
        ((T::one() - self.rtilde2) / self.rtilde2).ln() / frame.eps2
    }

    pub fn beta_tilde3(&self, frame: &Frame<T>) -> T {
        ((T::one() - self.rtilde3) / self.rtilde3).ln() / frame.eps3
    }
}

pub fn tilde_populations<T: Real>(frame: &Frame<T>, t2: T, t3: T) -> TildePopulations<T> {
    tilde_populations_with(frame, t2, t3, PopulationConvention::Physical)
}

pub fn tilde_populations_with<T: Real>(
    frame: &Frame<T>,
    t2: T,
    t3: T,
    convention: PopulationConvention,
) -> TildePopulations<T> {
    let (c2, s2) = (frame.cos2_half(), frame.sin2_half());
    let r22 = convention.population(frame.eps2, t2);
    let r23 = convention.population(frame.eps2, t3);
    let r32 = convention.population(frame.eps3, t2);
    let r33 = convention.population(frame.eps3, t3);
    let rtilde2 = c2 * r22 + s2 * r23;
    let rtilde3 = c2 * r33 + s2 * r32;
    let temp = |eps: T, r: T| eps / ((T::one() - r) / r).ln();
    TildePopulations {
        r22,
        r23,
        r32,
        r33,
        rtilde2,
        rtilde3,
        ttilde2: temp(frame.eps2, rtilde2),
        ttilde3: temp(frame.eps3, rtilde3),
    }
}

/// Populations of the target and the tilde qubits with their Bloch-z components `s_i = r_i - (1 - r_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermalPopulations<T> {
    pub r1: T,
    pub tilde: TildePopulations<T>,
    pub s1: T,
    pub s2: T,
    pub s3: T,
}

impl<T: Real> ThermalPopulations<T> {
    pub fn new(params: &ModelParams<T>, frame: &Frame<T>) -> Self {
        Self::with_convention(params, frame, PopulationConvention::Physical)
    }

    pub fn with_convention(
        params: &ModelParams<T>,
        frame: &Frame<T>,
        convention: PopulationConvention,
    ) -> Self {
        let r1 = thermal_population(params.e1, params.t1);
        let tilde = tilde_populations_with(frame, params.t2, params.t3, convention);
        let bloch = |r: T| T::two() * r - T::one();
        Self { r1, tilde, s1: bloch(r1), s2: bloch(tilde.rtilde2), s3: bloch(tilde.rtilde3) }
    }

    pub fn rtilde2(&self) -> T {
        self.tilde.rtilde2
    }

    pub fn rtilde3(&self) -> T {
        self.tilde.rtilde3
    }
}

/// A temperature that may be infinite (vanishing inverse temperature).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Temperature<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Temperature<T> {
    pub fn from_beta(beta: T) -> Self {
        if beta == T::zero() {
            Self::Infinite
        } else {
            Self::Finite(beta.recip())
        }
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Self::Finite(t) => Some(t),
            Self::Infinite => None,
        }
    }

    pub fn beta(self) -> T {
        match self {
            Self::Finite(t) => t.recip(),
            Self::Infinite => T::zero(),
        }
    }
}

/// Inverse virtual temperature from the `|psi_01>` / `|psi_10>` population ratio of `tau~2 (x) tau~3`.
pub fn inverse_virtual_temperature<T: Real>(frame: &Frame<T>, pops: &TildePopulations<T>) -> T {
    let (r2, r3) = (pops.rtilde2, pops.rtilde3);
    (((T::one() - r2) * r3) / (r2 * (T::one() - r3))).ln() / (frame.eps2 - frame.eps3)
}

pub fn virtual_temperature<T: Real>(frame: &Frame<T>, pops: &TildePopulations<T>) -> Temperature<T> {
    Temperature::from_beta(inverse_virtual_temperature(frame, pops))
}

/// Coherence of the virtual qubit: off-diagonal weight of `tau~2 (x) tau~3` in the
/// `{|01>, |10>}` block, times `sin(theta)`.
pub fn virtual_coherence<T: Real>(frame: &Frame<T>, pops: &TildePopulations<T>) -> T {
    let (r2, r3) = (pops.rtilde2, pops.rtilde3);
    ((r2 - r3) / (r2 + r3 - T::two() * r2 * r3)).abs() * frame.theta.sin()
}

/// Register Hamiltonians.
#[derive(Clone, Debug)]
pub struct Hamiltonians<T> {
    pub h1: ComplexMatrix<T>,
    pub h_fridge: ComplexMatrix<T>,
    pub h_g: ComplexMatrix<T>,
    pub h_tot: ComplexMatrix<T>,
}

pub fn build_hamiltonians<T: Real>(
    params: &ModelParams<T>,
    frame: &Frame<T>,
    paulis: &TildePaulis<T>,
) -> Hamiltonians<T> {
    let on = |op: ComplexMatrix<T>, q| embed(&op, &[q]).expect("valid qubit");
    let h = T::half();
    let h1 = on(sigma_z(), 1).scale_real(params.e1 * h);
    let hop = embed(&kron(&sigma_plus::<T>(), &sigma_minus()), &[2, 3]).expect("valid qubits");
    let h_fridge = &(&on(sigma_z(), 2).scale_real(frame.e2 * h) + &on(sigma_z(), 3).scale_real(params.e3 * h))
        + &(&hop + &hop.adjoint()).scale_real(params.gamma);
    let a = &paulis.sp1 * &paulis.sigma_v_plus().adjoint();
    let h_g = (&a + &a.adjoint()).scale(re(params.g));
    let h_tot = &(&h1 + &h_fridge) + &h_g;
    Hamiltonians { h1, h_fridge, h_g, h_tot }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_examples() {
        let fr = resolve_resonance(1.0_f64, 4.0, 0.0).unwrap();
        assert_eq!((fr.delta_e, fr.e2, fr.theta), (1.0, 5.0, 0.0));
        assert!((fr.lambda - 0.5).abs() < 1e-15);
        assert!((fr.eps2 - 5.0).abs() < 1e-15 && (fr.eps3 - 4.0).abs() < 1e-15);
        assert!(fr.u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);

        let fr = resolve_resonance(1.0_f64, 4.0, 0.5).unwrap();
        assert_eq!(fr.delta_e, 0.0);
        assert_eq!(fr.theta, std::f64::consts::FRAC_PI_2);

        let fr = resolve_resonance(1.0_f64, 4.0, 0.3).unwrap();
        assert!((fr.delta_e - 0.8).abs() < 1e-14);
        assert!((fr.e2 - 4.8).abs() < 1e-14);
        assert!((fr.lambda - 0.5).abs() < 1e-14);
        assert!((fr.theta - 0.643501108793284).abs() < 1e-12);
        assert!((fr.eps2 - 4.9).abs() < 1e-14 && (fr.eps3 - 3.9).abs() < 1e-14);
    }

    #[test]
    fn resonance_infeasible() {
        assert!(matches!(
            resolve_resonance(1.0_f64, 4.0, 0.6),
            Err(ModelError::ResonanceInfeasible { .. })
        ));
    }

    #[test]
    fn thermal_population_examples() {
        assert!((thermal_population(1.0_f64, 1e300) - 0.5).abs() < 1e-15);
        assert_eq!(thermal_population(1.0, 1e-300), 0.0);
        assert!((thermal_population(1.0_f64, 2.0) - 1.0 / (1.0 + 0.5_f64.exp())).abs() < 1e-16);
        assert!((thermal_population(1.0_f64, 2.0) - 0.377541).abs() < 1e-6);
    }

    #[test]
    fn feasibility_checks() {
        let p = ModelParams::reference();
        assert!(p.validate().is_ok());
        assert!(matches!(p.with_gamma(0.6).check_feasible(), Err(ModelError::ResonanceInfeasible { .. })));
        assert!(matches!(p.with_t1(3.0).validate(), Err(ModelError::TemperatureOrdering { .. })));
        assert!(p.with_t1(3.0).check_feasible().is_ok());
        assert!(matches!(
            ModelParams { p: 0.0, ..p }.check_feasible(),
            Err(ModelError::NonPositive { name: "p", .. })
        ));
        assert!(matches!(p.with_g(-1.0).check_feasible(), Err(ModelError::Negative { name: "g", .. })));
    }

    #[test]
    fn temperature_pole_is_distinct() {
        assert_eq!(Temperature::from_beta(0.0_f64), Temperature::Infinite);
        assert_eq!(Temperature::from_beta(0.5_f64).finite(), Some(2.0));
        assert_eq!(Temperature::<f64>::Infinite.beta(), 0.0);
    }
}
