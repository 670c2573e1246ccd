//! Lindblad channels of the three baths and assembly of the full generator.
//!
//! Bath 1 acts on the target through a local reset channel. Baths 2 and 3 act on the
//! spiral-engine pair through jump operators that are eigenoperators of the fridge
//! Hamiltonian; on the stationary-state family they are equivalent to two reset
//! channels on the tilde-frame qubits.

use crate::linalg::{embed, hamiltonian_superop, kron, sigma_plus, ComplexMatrix, LinalgError};
use crate::model::{
    build_hamiltonians, thermal_population, Frame, Hamiltonians, ModelError, ModelParams, PopulationConvention,
    ThermalPopulations, TildePaulis, TildePopulations,
};
use crate::scalar::{Real, C};

/// A jump operator together with its nonnegative rate.
#[derive(Clone, Debug)]
pub struct Jump<T> {
    pub op: ComplexMatrix<T>,
    pub rate: T,
}

/// `rho -> sum_k rate_k (L_k rho L_k^dagger - {L_k^dagger L_k, rho}/2)`.
#[derive(Clone, Debug, Default)]
pub struct LindbladChannel<T> {
    pub jumps: Vec<Jump<T>>,
}

impl<T: Real> LindbladChannel<T> {
    pub fn new(jumps: Vec<Jump<T>>) -> Self {
        Self { jumps }
    }

    pub fn apply(&self, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
        for Jump { op, rate } in &self.jumps {
            if *rate == T::zero() {
                continue;
            }
            let ld = op.adjoint();
            let ldl = &ld * op;
            let term = &(&(op * rho) * &ld) - &ldl.anticommutator(rho).scale_real(T::half());
            out = &out + &term.scale_real(*rate);
        }
        out
    }

    /// Matrix of the channel under column-stacking vectorization.
    pub fn superoperator(&self, dim: usize) -> ComplexMatrix<T> {
        let id = ComplexMatrix::identity(dim);
        let mut out = ComplexMatrix::zeros(dim * dim, dim * dim);
        for Jump { op, rate } in &self.jumps {
            if *rate == T::zero() {
                continue;
            }
            let ldl = &op.adjoint() * op;
            let sandwich = kron(&op.conj(), op);
            let anti = &kron(&id, &ldl) + &kron(&ldl.transpose(), &id);
            let term = &sandwich - &anti.scale_real(T::half());
            out = &out + &term.scale_real(*rate);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self { jumps: self.jumps.iter().chain(&other.jumps).cloned().collect() }
    }
}

/// Reset channel built from an arbitrary raising operator: weight `p r` on `raise`,
/// `p (1 - r)` on its adjoint. Fixed point on the qubit: excited population `r`.
pub fn reset_on<T: Real>(raise: &ComplexMatrix<T>, p: T, r: T) -> LindbladChannel<T> {
    LindbladChannel::new(vec![
        Jump { op: raise.clone(), rate: p * r },
        Jump { op: raise.adjoint(), rate: p * (T::one() - r) },
    ])
}

/// Local reset channel on register qubit `qubit` (1-based).
pub fn reset_channel<T: Real>(qubit: usize, p: T, r: T) -> Result<LindbladChannel<T>, LinalgError> {
    Ok(reset_on(&embed(&sigma_plus(), &[qubit])?, p, r))
}

/// One pair `Gamma^{+/-}_{nu mu}`.
#[derive(Clone, Debug)]
pub struct JumpPair<T> {
    /// Tilde qubit whose gap `eps_nu` the pair exchanges.
    pub nu: usize,
    /// Bath index mu.
    pub bath: usize,
    /// Signed prefactor (`cos(theta/2)`, `sin(theta/2)` or `-sin(theta/2)`).
    pub prefactor: T,
    /// Transition frequency `eps_nu` of the raising member.
    pub omega: T,
    pub plus: ComplexMatrix<T>,
    pub minus: ComplexMatrix<T>,
}

#[derive(Clone, Debug)]
pub struct JumpOperatorSet<T> {
    pub pairs: Vec<JumpPair<T>>,
}

impl<T: Real> JumpOperatorSet<T> {
    pub fn get(&self, nu: usize, bath: usize) -> &JumpPair<T> {
        self.pairs
            .iter()
            .find(|j| j.nu == nu && j.bath == bath)
            .expect("nu, bath in {2, 3}")
    }
}

pub fn jump_operator_set<T: Real>(frame: &Frame<T>, paulis: &TildePaulis<T>) -> JumpOperatorSet<T> {
    let (c, s) = (frame.cos_half(), frame.sin_half());
    let raw = [
        (2, 2, c, paulis.sp2.clone()),
        (3, 2, s, &paulis.sz2 * &paulis.sp3),
        (3, 3, c, paulis.sp3.clone()),
        (2, 3, -s, &paulis.sp2 * &paulis.sz3),
    ];
    let pairs = raw
        .into_iter()
        .map(|(nu, bath, prefactor, op)| {
            let plus = op.scale_real(prefactor);
            let minus = plus.adjoint();
            let omega = if nu == 2 { frame.eps2 } else { frame.eps3 };
            JumpPair { nu, bath, prefactor, omega, plus, minus }
        })
        .collect();
    JumpOperatorSet { pairs }
}

/// Component of `op` connecting fridge eigenstates whose energy difference is `omega`:
/// `sum |psi_ij><psi_ij| op |psi_kl><psi_kl|` over `E_ij - E_kl = omega`.
pub fn eigen_transition_component<T: Real>(
    op: &ComplexMatrix<T>,
    frame: &Frame<T>,
    omega: T,
    tol: T,
) -> ComplexMatrix<T> {
    let energies = frame.fridge_energies();
    let states = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let projector = |a: usize| {
        let (i, j) = states[a];
        let v = frame.eigenvector(i, j);
        let p4 = ComplexMatrix::from_fn(4, 4, |r, c| v[r] * v[c].conj());
        embed(&p4, &[2, 3]).expect("valid qubits")
    };
    let mut out = ComplexMatrix::zeros(op.rows(), op.cols());
    for a in 0..4 {
        for b in 0..4 {
            if (energies[a] - energies[b] - omega).abs() <= tol {
                out = &out + &(&(&projector(a) * op) * &projector(b));
            }
        }
    }
    out
}

/// Delocalized dissipator of bath `bath` (2 or 3): `D_{2 mu} + D_{3 mu}`.
pub fn fridge_channel<T: Real>(
    bath: usize,
    jumps: &JumpOperatorSet<T>,
    pops: &TildePopulations<T>,
    p: T,
) -> LindbladChannel<T> {
    let r = |nu: usize| match (nu, bath) {
        (2, 2) => pops.r22,
        (2, 3) => pops.r23,
        (3, 2) => pops.r32,
        (3, 3) => pops.r33,
        _ => unreachable!("nu, bath in {{2, 3}}"),
    };
    let mut channel = LindbladChannel::default();
    for pair in jumps.pairs.iter().filter(|j| j.bath == bath) {
        let rn = r(pair.nu);
        channel.jumps.push(Jump { op: pair.plus.clone(), rate: p * rn });
        channel.jumps.push(Jump { op: pair.minus.clone(), rate: p * (T::one() - rn) });
    }
    channel
}

/// Localized reset channel on tilde qubit `nu` with population `r~_nu` and rate `p`.
pub fn tilde_channel<T: Real>(
    nu: usize,
    paulis: &TildePaulis<T>,
    pops: &TildePopulations<T>,
    p: T,
) -> LindbladChannel<T> {
    let r = if nu == 2 { pops.rtilde2 } else { pops.rtilde3 };
    reset_on(paulis.plus(nu), p, r)
}

/// The three bath channels plus the tilde-frame localized pair.
#[derive(Clone, Debug)]
pub struct DissipatorSet<T> {
    pub target: LindbladChannel<T>,
    pub bath2: LindbladChannel<T>,
    pub bath3: LindbladChannel<T>,
    pub tilde2: LindbladChannel<T>,
    pub tilde3: LindbladChannel<T>,
}

impl<T: Real> DissipatorSet<T> {
    pub fn new(
        params: &ModelParams<T>,
        frame: &Frame<T>,
        paulis: &TildePaulis<T>,
        pops: &ThermalPopulations<T>,
    ) -> Self {
        let jumps = jump_operator_set(frame, paulis);
        Self {
            target: reset_on(&paulis.sp1, params.p, pops.r1),
            bath2: fridge_channel(2, &jumps, &pops.tilde, params.p),
            bath3: fridge_channel(3, &jumps, &pops.tilde, params.p),
            tilde2: tilde_channel(2, paulis, &pops.tilde, params.p),
            tilde3: tilde_channel(3, paulis, &pops.tilde, params.p),
        }
    }

    pub fn by_bath(&self, bath: usize) -> &LindbladChannel<T> {
        match bath {
            1 => &self.target,
            2 => &self.bath2,
            3 => &self.bath3,
            _ => panic!("bath {bath} out of range"),
        }
    }
}

/// Fully assembled refrigerator: every operator needed by the solvers and observables.
#[derive(Clone, Debug)]
pub struct Refrigerator<T> {
    pub params: ModelParams<T>,
    pub frame: Frame<T>,
    pub paulis: TildePaulis<T>,
    pub pops: ThermalPopulations<T>,
    pub hamiltonians: Hamiltonians<T>,
    pub dissipators: DissipatorSet<T>,
}

impl<T: Real> Refrigerator<T> {
    pub fn new(params: ModelParams<T>) -> Result<Self, ModelError> {
        Self::with_convention(params, PopulationConvention::Physical)
    }

    pub fn with_convention(
        params: ModelParams<T>,
        convention: PopulationConvention,
    ) -> Result<Self, ModelError> {
        params.check_feasible()?;
        let frame = Frame::from_params(&params)?;
        let paulis = TildePaulis::new(&frame);
        let pops = ThermalPopulations::with_convention(&params, &frame, convention);
        let hamiltonians = build_hamiltonians(&params, &frame, &paulis);
        let dissipators = DissipatorSet::new(&params, &frame, &paulis, &pops);
        Ok(Self { params, frame, paulis, pops, hamiltonians, dissipators })
    }

    /// `rho -> -i[H_1 + H_fridge + H_g, rho] + D_1 + D_2 + D_3`.
    pub fn apply_generator(&self, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let unitary = self.hamiltonians.h_tot.commutator(rho).scale(C::new(T::zero(), -T::one()));
        let d = &self.dissipators;
        &(&(&unitary + &d.target.apply(rho)) + &d.bath2.apply(rho)) + &d.bath3.apply(rho)
    }

    /// 64 x 64 generator matrix under column stacking.
    pub fn liouvillian(&self) -> ComplexMatrix<T> {
        let dim = self.hamiltonians.h_tot.rows();
        let d = &self.dissipators;
        let dissipative = d.target.plus(&d.bath2).plus(&d.bath3).superoperator(dim);
        &hamiltonian_superop(&self.hamiltonians.h_tot) + &dissipative
    }
}

/// Generator of the full master equation for `params`.
pub fn assemble_liouvillian<T: Real>(params: &ModelParams<T>) -> Result<ComplexMatrix<T>, ModelError> {
    Ok(Refrigerator::new(*params)?.liouvillian())
}

/// Reset channel used to probe the target with a fictitious bath of temperature `t`.
pub fn probe_channel<T: Real>(e1: T, t: T, p: T) -> LindbladChannel<T> {
    let raise = embed(&sigma_plus(), &[1]).expect("qubit 1");
    reset_on(&raise, p, thermal_population(e1, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DensityMatrix;

    fn close(a: &ComplexMatrix<f64>, b: &ComplexMatrix<f64>, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn reset_fixed_point_and_dephasing() {
        let (p, r) = (0.7, 0.25);
        let ch = reset_on(&sigma_plus::<f64>(), p, r);
        let tau = ComplexMatrix::from_real_diag(&[r, 1.0 - r]);
        assert!(ch.apply(&tau).max_abs() < 1e-15);

        // |0><1| decays at half the reset rate.
        let coh = sigma_plus::<f64>();
        assert!(close(&ch.apply(&coh), &coh.scale_real(-p / 2.0), 1e-15));

        // From |1><1| the excited population grows at rate p r.
        let ground = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let out = ch.apply(&ground);
        assert!((out[(0, 0)].re - p * 0.25).abs() < 1e-15);
        assert!((out[(1, 1)].re + p * 0.25).abs() < 1e-15);
    }

    #[test]
    fn superoperator_matches_apply() {
        let ch = reset_on(&embed(&sigma_plus::<f64>(), &[2]).unwrap(), 0.3, 0.2);
        let rho = ComplexMatrix::from_fn(8, 8, |i, j| C::new((i + 2 * j) as f64 * 0.01, (i as f64 - j as f64) * 0.02));
        let via_super = ComplexMatrix::unvec(&ch.superoperator(8).mul_vec(&rho.vec()), 8).unwrap();
        assert!(close(&via_super, &ch.apply(&rho), 1e-14));
    }

    #[test]
    fn tilde_channel_fixed_point_on_reference_frame() {
        let fridge = Refrigerator::new(ModelParams::reference()).unwrap();
        let r2 = fridge.pops.tilde.rtilde2;
        // one-qubit generator of the tilde channel in the tilde frame is a reset on sigma+
        let one_qubit = reset_on(&sigma_plus::<f64>(), 0.01, r2);
        let tau = ComplexMatrix::from_real_diag(&[r2, 1.0 - r2]);
        assert!(one_qubit.apply(&tau).max_abs() < 1e-17);

        let pops = &fridge.pops;
        let u = fridge.frame.u_register();
        let tau1 = ComplexMatrix::from_real_diag(&[pops.r1, 1.0 - pops.r1]);
        let tau2 = ComplexMatrix::from_real_diag(&[pops.rtilde2(), 1.0 - pops.rtilde2()]);
        let tau3 = ComplexMatrix::from_real_diag(&[pops.rtilde3(), 1.0 - pops.rtilde3()]);
        let prod = DensityMatrix::product(&[&tau1, &tau2, &tau3]).unwrap();
        let lab = &(&u.adjoint() * prod.matrix()) * &u;
        let d = &fridge.dissipators;
        assert!(d.tilde2.apply(&lab).max_abs() < 1e-15);
        assert!(d.tilde3.apply(&lab).max_abs() < 1e-15);
        assert!(d.target.apply(&lab).max_abs() < 1e-15);
    }
}
