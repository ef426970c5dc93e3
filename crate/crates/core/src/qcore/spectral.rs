use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::linalg::{CMat, cplx, hermiticity_deviation, max_abs};

/// H = U diag(λ) U† with ascending λ.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> CMat {
        let u = &self.eigenvectors;
        let d = self.dim();
        let ud = Mat::from_fn(d, d, |i, j| u[(i, j)] * self.eigenvalues[j]);
        &ud * u.adjoint()
    }

    /// e^{-iHt}
    pub fn evolution(&self, t: f64) -> CMat {
        let u = &self.eigenvectors;
        let d = self.dim();
        let ud = Mat::from_fn(d, d, |i, j| u[(i, j)] * crate::linalg::phase(self.eigenvalues[j] * t));
        &ud * u.adjoint()
    }

    pub fn spectral_diameter(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

pub fn eigendecompose(h: &CMat) -> Result<SpectralDecomposition> {
    let d = h.nrows();
    if d != h.ncols() {
        return Err(Error::Dimension { expected: d, got: h.ncols() });
    }
    let scale = max_abs(h.as_ref()).max(1.0);
    let dev = hermiticity_deviation(h.as_ref());
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian(dev));
    }
    // Diagonal input: skip the solver so eigenvectors are exactly a permutation.
    let is_diag = (0..d).all(|j| (0..d).all(|i| i == j || h[(i, j)] == cplx(0.0, 0.0)));
    if is_diag {
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| h[(a, a)].re.total_cmp(&h[(b, b)].re));
        let eigenvalues = order.iter().map(|&i| h[(i, i)].re).collect();
        let eigenvectors = Mat::from_fn(d, d, |i, j| if i == order[j] { cplx(1.0, 0.0) } else { cplx(0.0, 0.0) });
        return Ok(SpectralDecomposition { eigenvalues, eigenvectors });
    }
    let evd =
        h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let eigenvalues: Vec<f64> = (0..d).map(|i| s[i].re).collect();
    let eigenvectors = evd.U().to_owned();
    let out = SpectralDecomposition { eigenvalues, eigenvectors };
    if out.eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Numerical("eigenvalues not ascending".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_unitary, max_abs_diff};
    use crate::qcore::{PauliString, pauli_matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_input_sorted_without_mixing() {
        let h = crate::linalg::diag_real(&[3.0, -1.0, 2.0]);
        let s = eigendecompose(&h).unwrap();
        assert_eq!(s.eigenvalues, vec![-1.0, 2.0, 3.0]);
        assert_eq!(s.eigenvectors[(1, 0)], cplx(1.0, 0.0));
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = pauli_matrix(&"X".parse::<PauliString>().unwrap());
        let s = eigendecompose(&x).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14 && (s.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = Mat::from_fn(16, 16, |_, _| cplx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let h = &a + a.adjoint();
        let s = eigendecompose(&h).unwrap();
        let r = s.reconstruct();
        assert!(max_abs_diff(r.as_ref(), h.as_ref()) <= 1e-9 * max_abs(h.as_ref()));
        assert!(is_unitary(s.eigenvectors.as_ref(), 1e-10));
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = Mat::from_fn(2, 2, |i, j| cplx((i + 2 * j) as f64, 0.0));
        assert!(matches!(eigendecompose(&a), Err(Error::NotHermitian(_))));
    }
}
