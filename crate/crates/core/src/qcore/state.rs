use faer::{Mat, c64};

use crate::error::{Error, Result};
use crate::linalg::{CMat, ZERO, cplx, hermiticity_deviation, norm_sqr};

/// Largest pair count for which a 2n-qubit vector is allowed.
pub const MAX_BRANCH_PAIRS: usize = 12;
/// Largest pair count for which a 2n-qubit density matrix is allowed.
pub const MAX_DENSITY_PAIRS: usize = 6;

/// Position of (a, b) in the pairwise-interleaved ordering A0 B0 A1 B1 ...
pub fn interleave(a: usize, b: usize, n: usize) -> usize {
    let mut idx = 0;
    for q in 0..n {
        let bit = n - 1 - q;
        idx = (idx << 2) | (((a >> bit) & 1) << 1) | ((b >> bit) & 1);
    }
    idx
}

pub fn deinterleave(idx: usize, n: usize) -> (usize, usize) {
    let (mut a, mut b) = (0, 0);
    for q in 0..n {
        let shift = 2 * (n - 1 - q);
        a = (a << 1) | ((idx >> (shift + 1)) & 1);
        b = (b << 1) | ((idx >> shift) & 1);
    }
    (a, b)
}

/// Permutation taking interleaved indices to block indices a·d + b.
pub fn interleaved_to_block(n: usize) -> Vec<usize> {
    let d = 1usize << n;
    (0..d * d)
        .map(|i| {
            let (a, b) = deinterleave(i, n);
            a * d + b
        })
        .collect()
}

/// One Pauli-error branch of the bipartite state, stored in interleaved order.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchState {
    n: usize,
    amplitudes: Vec<c64>,
}

impl BranchState {
    pub fn from_amplitudes(n: usize, amplitudes: Vec<c64>) -> Result<Self> {
        let dim = 1usize << (2 * n);
        if amplitudes.len() != dim {
            return Err(Error::Dimension { expected: dim, got: amplitudes.len() });
        }
        Ok(BranchState { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| norm_sqr(*z)).sum()
    }

    /// Matrix picture: amplitude of |a>_A |b>_B becomes entry (a, b).
    pub fn to_matrix(&self) -> CMat {
        let d = 1usize << self.n;
        Mat::from_fn(d, d, |a, b| self.amplitudes[interleave(a, b, self.n)])
    }

    pub fn from_matrix(n: usize, m: &CMat) -> Result<Self> {
        let d = 1usize << n;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension { expected: d, got: m.nrows() });
        }
        let mut amps = vec![ZERO; d * d];
        for a in 0..d {
            for b in 0..d {
                amps[interleave(a, b, n)] = m[(a, b)];
            }
        }
        Ok(BranchState { n, amplitudes: amps })
    }

    pub fn inner(&self, other: &BranchState) -> Result<c64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::Dimension { expected: self.amplitudes.len(), got: other.amplitudes.len() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn projector(&self) -> DensityOperator {
        let dim = self.amplitudes.len();
        let m = Mat::from_fn(dim, dim, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityOperator { n: self.n, matrix: m }
    }
}

/// |Φ+>^{⊗n} in the interleaved ordering.
pub fn epr_state(n: usize) -> Result<BranchState> {
    if n == 0 {
        return Err(Error::Domain("epr_state needs n >= 1".into()));
    }
    if n > MAX_BRANCH_PAIRS {
        return Err(Error::Capacity(format!("epr_state: {n} pairs exceeds the {MAX_BRANCH_PAIRS}-pair limit")));
    }
    let d = 1usize << n;
    let amp = cplx(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; d * d];
    for a in 0..d {
        amps[interleave(a, a, n)] = amp;
    }
    Ok(BranchState { n, amplitudes: amps })
}

/// Density operator on n pairs, interleaved order.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    n: usize,
    matrix: CMat,
}

impl DensityOperator {
    pub fn new(n: usize, matrix: CMat) -> Result<Self> {
        let dim = 1usize << (2 * n);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension { expected: dim, got: matrix.nrows() });
        }
        Ok(DensityOperator { n, matrix })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << (2 * n);
        let mut m = Mat::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = cplx(1.0 / dim as f64, 0.0);
        }
        DensityOperator { n, matrix: m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn trace(&self) -> c64 {
        crate::linalg::trace(self.matrix.as_ref())
    }

    /// Checks Hermiticity (1e-12 scaled), unit trace (1e-10) and positivity (-1e-10).
    pub fn validate(&self) -> Result<()> {
        let h = hermiticity_deviation(self.matrix.as_ref());
        if h > 1e-12 * self.matrix.nrows().max(1) as f64 {
            return Err(Error::NotHermitian(h));
        }
        let t = self.trace();
        if (t.re - 1.0).abs() > 1e-10 || t.im.abs() > 1e-10 {
            return Err(Error::Numerical(format!("trace {t} differs from 1")));
        }
        let ev =
            self.matrix.self_adjoint_eigenvalues(faer::Side::Lower).map_err(|e| Error::Numerical(format!("{e:?}")))?;
        let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::Numerical(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Reorders to block order (a·d + b) on both indices.
    pub fn to_block(&self) -> CMat {
        let perm = interleaved_to_block(self.n);
        let dim = perm.len();
        let mut out = Mat::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..dim {
                out[(perm[i], perm[j])] = self.matrix[(i, j)];
            }
        }
        out
    }

    pub fn from_block(n: usize, block: &CMat) -> Result<Self> {
        let perm = interleaved_to_block(n);
        let dim = perm.len();
        if block.nrows() != dim {
            return Err(Error::Dimension { expected: dim, got: block.nrows() });
        }
        let m = Mat::from_fn(dim, dim, |i, j| block[(perm[i], perm[j])]);
        Ok(DensityOperator { n, matrix: m })
    }
}

/// ⟨ψ|ρ|ψ⟩.
pub fn state_fidelity(rho: &DensityOperator, psi: &BranchState) -> Result<f64> {
    let dim = rho.matrix.nrows();
    if psi.amplitudes.len() != dim {
        return Err(Error::Dimension { expected: dim, got: psi.amplitudes.len() });
    }
    let amps = &psi.amplitudes;
    let mut acc = ZERO;
    for j in 0..dim {
        if amps[j] == ZERO {
            continue;
        }
        let mut col = ZERO;
        for i in 0..dim {
            col += amps[i].conj() * rho.matrix[(i, j)];
        }
        acc += col * amps[j];
    }
    if acc.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!("fidelity has imaginary part {:e}", acc.im)));
    }
    Ok(acc.re)
}
