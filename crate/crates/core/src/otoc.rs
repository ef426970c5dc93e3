//! Out-of-time-order correlators and the averaged OTOC of a Pauli channel.

use faer::c64;

use crate::distill::{OutcomeMode, SweepOptions, branch_averages};
use crate::error::{Error, Result};
use crate::hamlib::SpectralHamiltonian;
use crate::linalg::{CMat, trace};
use crate::noise::PauliChannel;
use crate::qcore::{MeasurementBasis, PauliString, pauli_matrix};
use crate::twirl::TimeMeasure;

/// (1/d) tr(Ṽ† W† Ṽ W) with Ṽ = e^{iHt} V e^{−iHt}.
pub fn otoc(h: &SpectralHamiltonian, t: f64, v: &CMat, w: &CMat) -> Result<c64> {
    let d = h.dim();
    for op in [v, w] {
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::Dimension { expected: d, got: op.nrows() });
        }
    }
    let u = h.evolution(t);
    let vt = u.adjoint() * v * &u;
    let prod = vt.adjoint() * w.adjoint() * &vt * w;
    Ok(trace(prod.as_ref()) / d as f64)
}

/// Probability that branch P is caught by the identical-outcome check at
/// time t: 1 − Σ_x Re OTOC_{P,M_x} for the evolution e^{−iHt}.
pub fn detection_probability(
    h: &SpectralHamiltonian,
    t: f64,
    p: &PauliString,
    m: usize,
    basis: &MeasurementBasis,
) -> Result<f64> {
    let n = h.n();
    if p.n() != n {
        return Err(Error::Dimension { expected: n, got: p.n() });
    }
    let pm = pauli_matrix(p);
    let mut survive = 0.0;
    for mx in basis.outcome_projectors(n, m)? {
        // the branch evolves as U P U†, i.e. the OTOC at −t
        survive += otoc(h, -t, &pm, &mx)?.re;
    }
    Ok(1.0 - survive)
}

#[derive(Clone, Debug)]
pub struct AveragedOtocReport {
    /// Σ_{P≠I} c_P Σ_x time-averaged OTOC_{P,M_x}.
    pub value: f64,
    pub c_i: f64,
    /// c_P times the branch survival, per Pauli (exact mode only).
    pub breakdown: Option<Vec<(PauliString, f64)>>,
    pub mode: OutcomeMode,
    pub std_error: Option<f64>,
}

impl AveragedOtocReport {
    /// Post-selected fidelity credited to the error-free branch.
    pub fn fidelity(&self) -> f64 {
        1.0 / (1.0 + self.value / self.c_i)
    }
}

pub fn averaged_otoc(
    h: &SpectralHamiltonian,
    mu: &TimeMeasure,
    channel: &PauliChannel,
    m: usize,
    basis: &MeasurementBasis,
    opts: &SweepOptions,
) -> Result<AveragedOtocReport> {
    let a = branch_averages(h, channel, &[m], basis, mu, opts, true)?.remove(0);
    Ok(AveragedOtocReport {
        value: a.survival_errors,
        c_i: a.c_i,
        breakdown: a.breakdown,
        mode: a.mode,
        std_error: a.se_survival,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::engine::{BranchKernel, pauli_eigenbasis};
    use crate::distill::{NoiseModel, ProtocolConfig, SimulationPath, run_protocol_on};
    use crate::hamlib::HamiltonianSpec;
    use crate::noise::local_depolarizing;
    use crate::qcore::Pauli;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ion(n: usize) -> SpectralHamiltonian {
        HamiltonianSpec::named("trapped_ion", n, 0).unwrap().build().unwrap()
    }

    #[test]
    fn commuting_and_anticommuting_at_zero() {
        let h = ion(2);
        let x0 = pauli_matrix(&PauliString::single(2, 0, Pauli::X));
        let z1 = pauli_matrix(&PauliString::single(2, 1, Pauli::Z));
        let z0 = pauli_matrix(&PauliString::single(2, 0, Pauli::Z));
        assert!((otoc(&h, 0.0, &x0, &z1).unwrap() - c64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((otoc(&h, 0.0, &x0, &z0).unwrap() + c64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn commutator_identity() {
        let h = ion(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v = pauli_matrix(&PauliString::from_index(3, rng.random_range(0..64)));
            let w = pauli_matrix(&PauliString::from_index(3, rng.random_range(0..64)));
            let t = rng.random::<f64>() * 3.0;
            let u = h.evolution(t);
            let vt = u.adjoint() * &v * &u;
            let c = &vt * &w - &w * &vt;
            let lhs = trace((c.adjoint() * &c).as_ref()).re / 8.0;
            let o = otoc(&h, t, &v, &w).unwrap();
            assert!((lhs - (2.0 - 2.0 * o.re)).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_never_detected() {
        let h = ion(3);
        for t in [0.0, 0.4, 2.0] {
            let d = detection_probability(&h, t, &PauliString::identity(3), 2, &MeasurementBasis::Hadamard).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn matches_branch_kernel_pointwise() {
        let h = ion(3);
        let basis = MeasurementBasis::Hadamard;
        let k = BranchKernel::pointwise(&h, 2, &basis).unwrap();
        for idx in [1usize, 7, 22, 63] {
            let p = PauliString::from_index(3, idx);
            let q = pauli_eigenbasis(&h, &p, None);
            for t in [0.3, 1.7] {
                let via_otoc = detection_probability(&h, t, &p, 2, &basis).unwrap();
                let (s, _) = k.evaluate_at(&q, t);
                assert!((via_otoc - (1.0 - s)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn noiseless_channel_is_zero() {
        let h = ion(3);
        let r = averaged_otoc(
            &h,
            &TimeMeasure::DeltaLimit,
            &local_depolarizing(3, 0.0).unwrap(),
            1,
            &MeasurementBasis::Hadamard,
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn reconstructs_error_free_fidelity() {
        let spec = HamiltonianSpec::named("trapped_ion", 3, 0).unwrap();
        let h = spec.build().unwrap();
        let ch = local_depolarizing(3, 0.2).unwrap();
        let r =
            averaged_otoc(&h, &TimeMeasure::DeltaLimit, &ch, 2, &MeasurementBasis::Hadamard, &SweepOptions::default())
                .unwrap();
        let mut cfg = ProtocolConfig::new(spec, 2, NoiseModel::Pauli(ch));
        cfg.path = SimulationPath::DensityMatrix;
        cfg.basis = MeasurementBasis::Hadamard;
        let o = run_protocol_on(&h, &cfg).unwrap();
        assert!((r.fidelity() - o.error_free_fidelity.unwrap()).abs() < 1e-8);
        let total: f64 = r.breakdown.unwrap().iter().map(|e| e.1).sum();
        assert!((total - r.value).abs() < 1e-12);
    }

    #[test]
    fn exact_and_monte_carlo_agree() {
        let h = ion(5);
        let ch = local_depolarizing(5, 0.2).unwrap();
        let basis = MeasurementBasis::Hadamard;
        let mu = TimeMeasure::DeltaLimit;
        let exact = averaged_otoc(&h, &mu, &ch, 3, &basis, &SweepOptions::default()).unwrap();
        let opts = SweepOptions { samples: Some(3000), seed: 11, ..SweepOptions::default() };
        let mc = averaged_otoc(&h, &mu, &ch, 3, &basis, &opts).unwrap();
        let se = mc.std_error.unwrap();
        assert!((exact.value - mc.value).abs() < 3.0 * se, "{} vs {} ± {se}", exact.value, mc.value);
    }
}
