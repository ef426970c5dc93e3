use faer::{Mat, c64};

use crate::error::{Error, Result};
use crate::linalg::{CMat, ZERO, hadamard_top_rows};
use crate::qcore::state::interleaved_to_block;

/// Basis used for the identical-outcome check on the measured pairs.
#[derive(Clone, Debug)]
pub enum MeasurementBasis {
    Computational,
    Hadamard,
    /// Hadamard-basis projectors conjugated by an n-qubit Clifford C:
    /// M_x = C (H^{⊗m}|x><x|H^{⊗m} ⊗ I) C†.
    CliffordConjugated(CMat),
}

impl MeasurementBasis {
    pub fn name(&self) -> &'static str {
        match self {
            MeasurementBasis::Computational => "computational",
            MeasurementBasis::Hadamard => "hadamard",
            MeasurementBasis::CliffordConjugated(_) => "clifford_conjugated",
        }
    }

    fn check(&self, n: usize, m: usize) -> Result<()> {
        if m > n {
            return Err(Error::Domain(format!("measured pairs m={m} exceeds n={n}")));
        }
        if let MeasurementBasis::CliffordConjugated(c) = self {
            let d = 1usize << n;
            if c.nrows() != d || c.ncols() != d {
                return Err(Error::Dimension { expected: d, got: c.nrows() });
            }
        }
        Ok(())
    }

    /// Unitary W with M_x = W (|x><x| ⊗ I) W†.
    pub fn rotation(&self, n: usize, m: usize) -> Result<CMat> {
        self.check(n, m)?;
        let d = 1usize << n;
        let mut h = Mat::identity(d, d);
        match self {
            MeasurementBasis::Computational => Ok(h),
            MeasurementBasis::Hadamard => {
                hadamard_top_rows(&mut h, m);
                Ok(h)
            }
            MeasurementBasis::CliffordConjugated(c) => {
                hadamard_top_rows(&mut h, m);
                Ok(c * &h)
            }
        }
    }

    /// W† A, using fast transforms where possible.
    pub fn rotate_rows(&self, n: usize, m: usize, a: &CMat) -> Result<CMat> {
        self.check(n, m)?;
        match self {
            MeasurementBasis::Computational => Ok(a.clone()),
            MeasurementBasis::Hadamard => {
                let mut out = a.clone();
                hadamard_top_rows(&mut out, m);
                Ok(out)
            }
            MeasurementBasis::CliffordConjugated(c) => {
                let mut out = c.adjoint() * a;
                hadamard_top_rows(&mut out, m);
                Ok(out)
            }
        }
    }

    /// One-sided POVM elements M_x, x = 0..2^m.
    pub fn outcome_projectors(&self, n: usize, m: usize) -> Result<Vec<CMat>> {
        let w = self.rotation(n, m)?;
        let d = 1usize << n;
        let dk = d >> m;
        Ok((0..1usize << m)
            .map(|x| {
                let wx = w.subcols(x * dk, dk);
                wx * wx.adjoint()
            })
            .collect())
    }
}

/// Π_id = Σ_x M_x ⊗ M_x* on the 2n qubits, interleaved order.
pub fn identical_outcome_projector(n: usize, m: usize, basis: &MeasurementBasis) -> Result<CMat> {
    if n > crate::qcore::state::MAX_DENSITY_PAIRS {
        return Err(Error::Capacity(format!("projector on {n} pairs exceeds the dense limit")));
    }
    let ms = basis.outcome_projectors(n, m)?;
    let d = 1usize << n;
    let dim = d * d;
    let perm = interleaved_to_block(n);
    let mut block = Mat::<c64>::zeros(dim, dim);
    for mx in &ms {
        for a2 in 0..d {
            for b2 in 0..d {
                let col = a2 * d + b2;
                for a in 0..d {
                    let ma = mx[(a, a2)];
                    if ma == ZERO {
                        continue;
                    }
                    for b in 0..d {
                        block[(a * d + b, col)] += ma * mx[(b, b2)].conj();
                    }
                }
            }
        }
    }
    Ok(Mat::from_fn(dim, dim, |i, j| block[(perm[i], perm[j])]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_deviation, max_abs_diff, trace};
    use crate::qcore::{PauliString, epr_state, pauli_matrix};

    fn expect(op: &CMat, v: &[c64]) -> c64 {
        let dim = v.len();
        let mut acc = ZERO;
        for i in 0..dim {
            for j in 0..dim {
                acc += v[i].conj() * op[(i, j)] * v[j];
            }
        }
        acc
    }

    #[test]
    fn m_zero_is_identity() {
        let p = identical_outcome_projector(2, 0, &MeasurementBasis::Hadamard).unwrap();
        assert!(max_abs_diff(p.as_ref(), Mat::identity(16, 16).as_ref()) < 1e-14);
    }

    #[test]
    fn projector_properties_all_bases() {
        let c = crate::hamlib::sample_random_clifford(3, 9, 5).unwrap();
        for basis in
            [MeasurementBasis::Computational, MeasurementBasis::Hadamard, MeasurementBasis::CliffordConjugated(c)]
        {
            for m in 0..=3 {
                let p = identical_outcome_projector(3, m, &basis).unwrap();
                let pp = &p * &p;
                assert!(max_abs_diff(pp.as_ref(), p.as_ref()) < 1e-12, "{} m={m}", basis.name());
                assert!(hermiticity_deviation(p.as_ref()) < 1e-12);
                let d2 = 64.0;
                let tr_complement = d2 - trace(p.as_ref()).re;
                assert!((tr_complement - d2 * (1.0 - 0.5f64.powi(m as i32))).abs() < 1e-9);
                let e = expect(&p, epr_state(3).unwrap().amplitudes());
                assert!((e.re - 1.0).abs() < 1e-12 && e.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn z_error_always_detected_in_hadamard_basis() {
        let p = identical_outcome_projector(1, 1, &MeasurementBasis::Hadamard).unwrap();
        let z = pauli_matrix(&"Z".parse::<PauliString>().unwrap());
        let s = epr_state(1).unwrap();
        let a = &z * s.to_matrix();
        let v = crate::qcore::BranchState::from_matrix(1, &a).unwrap();
        assert!(expect(&p, v.amplitudes()).norm() < 1e-14);
    }
}
