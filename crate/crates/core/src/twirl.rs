//! The Hamiltonian twirling channel ρ ↦ E_t[(U_t ⊗ U_t*) ρ (U_t ⊗ U_t*)†].

use faer::{Mat, c64};

use crate::distill::engine::{BranchKernel, branch_operator_eigenbasis};
use crate::error::{Error, Result};
use crate::hamlib::SpectralHamiltonian;
use crate::linalg::{CMat, ONE, ZERO, cplx, identity, trace};
use crate::qcore::state::{MAX_DENSITY_PAIRS, interleaved_to_block};
use crate::qcore::{BranchState, DensityOperator, MeasurementBasis};

/// Distribution of the evolution time t, in native units.
#[derive(Clone, Debug, PartialEq)]
pub enum TimeMeasure {
    /// T → ∞: keeps only terms whose gaps coincide.
    DeltaLimit,
    /// t uniform on [0, T].
    Uniform(f64),
    /// Equal-weight average over the listed times.
    Samples(Vec<f64>),
}

impl TimeMeasure {
    pub fn validate(&self) -> Result<()> {
        match self {
            TimeMeasure::DeltaLimit => Ok(()),
            TimeMeasure::Uniform(t) if t.is_finite() && *t > 0.0 => Ok(()),
            TimeMeasure::Uniform(t) => Err(Error::Domain(format!("uniform time window must be positive, got {t}"))),
            TimeMeasure::Samples(v) if v.is_empty() => Err(Error::Domain("empty time sample list".into())),
            TimeMeasure::Samples(v) if v.iter().any(|t| !t.is_finite()) => {
                Err(Error::Domain("time samples must be finite".into()))
            }
            TimeMeasure::Samples(_) => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            TimeMeasure::DeltaLimit => "delta_limit".into(),
            TimeMeasure::Uniform(t) => format!("uniform({t})"),
            TimeMeasure::Samples(v) => format!("samples({})", v.len()),
        }
    }

    /// φ(g) = E_t[e^{-igt}] for a finite measure; None for the delta limit.
    pub fn filter(&self, g: f64) -> Option<c64> {
        match self {
            TimeMeasure::DeltaLimit => None,
            TimeMeasure::Uniform(t) => Some(uniform_filter(g, *t)),
            TimeMeasure::Samples(ts) => {
                let s: c64 = ts.iter().map(|t| crate::linalg::phase(g * t)).sum();
                Some(s / ts.len() as f64)
            }
        }
    }
}

/// e^{-igT/2} sinc(gT/2)
pub fn uniform_filter(g: f64, t: f64) -> c64 {
    let x = 0.5 * g * t;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    crate::linalg::phase(x) * sinc
}

/// Clusters of the d² Bohr frequencies ω_ij = λ_i − λ_j, index i·d + j.
/// Sorted frequencies closer than `tol` are chained into one cluster.
#[derive(Clone, Debug)]
pub struct GapClusters {
    pub ids: Vec<usize>,
    pub count: usize,
    pub zero: usize,
}

impl GapClusters {
    pub fn new(eigenvalues: &[f64], tol: f64) -> Self {
        let d = eigenvalues.len();
        let w: Vec<f64> = (0..d * d).map(|r| eigenvalues[r / d] - eigenvalues[r % d]).collect();
        let mut order: Vec<usize> = (0..d * d).collect();
        order.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
        let mut ids = vec![0; d * d];
        let mut cid = 0;
        for k in 1..order.len() {
            if w[order[k]] - w[order[k - 1]] > tol {
                cid += 1;
            }
            ids[order[k]] = cid;
        }
        let zero = ids[0];
        GapClusters { ids, count: cid + 1, zero }
    }

    pub fn for_hamiltonian(h: &SpectralHamiltonian) -> Self {
        Self::new(h.eigenvalues(), h.gap_tol)
    }

    /// Members of every cluster with more than one entry, the zero cluster
    /// listed without its diagonal (i, i) entries.
    pub fn degenerate_groups(&self, d: usize) -> (Vec<(usize, usize)>, Vec<Vec<(usize, usize)>>) {
        let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.count];
        for (r, &c) in self.ids.iter().enumerate() {
            members[c].push((r / d, r % d));
        }
        let mut zero_extra = Vec::new();
        let mut groups = Vec::new();
        for (c, mem) in members.into_iter().enumerate() {
            if c == self.zero {
                zero_extra = mem.into_iter().filter(|(i, j)| i != j).collect();
            } else if mem.len() > 1 {
                groups.push(mem);
            }
        }
        (zero_extra, groups)
    }

    /// Number of index pairs whose gap coincides with another pair's.
    pub fn degenerate_entries(&self, d: usize) -> usize {
        let (z, g) = self.degenerate_groups(d);
        z.len() + g.iter().map(Vec::len).sum::<usize>()
    }
}

/// Applies M ↦ X M Yᵀ to each column of `a`, read as a row-major d×d matrix.
/// This is (X ⊗ Y)·a in the block order a·d + b.
pub(crate) fn kron_columns(a: &CMat, x: &CMat, yt: &CMat) -> CMat {
    let d = x.nrows();
    let dim = a.nrows();
    let mut out = Mat::<c64>::zeros(dim, a.ncols());
    let mut m = Mat::<c64>::zeros(d, d);
    for c in 0..a.ncols() {
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = a[(i * d + j, c)];
            }
        }
        let r = x * &m * yt;
        for i in 0..d {
            for j in 0..d {
                out[(i * d + j, c)] = r[(i, j)];
            }
        }
    }
    out
}

/// (X ⊗ Y) ρ (X ⊗ Y)† in block order, with Yᵀ supplied.
pub(crate) fn kron_conjugate(rho: &CMat, x: &CMat, yt: &CMat) -> CMat {
    let left = kron_columns(rho, x, yt);
    kron_columns(&left.adjoint().to_owned(), x, yt).adjoint().to_owned()
}

fn check_density_budget(n: usize) -> Result<()> {
    if n > MAX_DENSITY_PAIRS {
        return Err(Error::Capacity(format!("density matrix on {n} pairs exceeds the {MAX_DENSITY_PAIRS}-pair limit")));
    }
    Ok(())
}

/// Multiplies the eigenbasis entry ((ij),(kl)) by φ(ω_ij − ω_kl).
pub(crate) fn filter_eigenbasis(m: &mut CMat, h: &SpectralHamiltonian, mu: &TimeMeasure) {
    let lam = h.eigenvalues();
    let d = lam.len();
    let w: Vec<f64> = (0..d * d).map(|r| lam[r / d] - lam[r % d]).collect();
    match mu {
        TimeMeasure::DeltaLimit => {
            let cl = GapClusters::for_hamiltonian(h);
            for c in 0..d * d {
                for r in 0..d * d {
                    if cl.ids[r] != cl.ids[c] {
                        m[(r, c)] = ZERO;
                    }
                }
            }
        }
        _ => {
            for c in 0..d * d {
                for r in 0..d * d {
                    let f = mu.filter(w[r] - w[c]).unwrap_or(ONE);
                    m[(r, c)] *= f;
                }
            }
        }
    }
}

/// 𝒩_H(ρ) for a density operator on n ≤ 6 pairs.
pub fn twirl_density(h: &SpectralHamiltonian, rho: &DensityOperator, mu: &TimeMeasure) -> Result<DensityOperator> {
    mu.validate()?;
    let n = rho.n();
    if h.n() != n {
        return Err(Error::Dimension { expected: h.n(), got: n });
    }
    check_density_budget(n)?;
    let v = h.eigenvectors();
    let vh = v.adjoint().to_owned();
    // forward: M ↦ V† M V; back: M ↦ V M V†
    let mut eig = kron_conjugate(&rho.to_block(), &vh, v);
    filter_eigenbasis(&mut eig, h, mu);
    let back = kron_conjugate(&eig, v, &vh);
    DensityOperator::from_block(n, &back)
}

/// Observable for [`twirl_branch_expectation`].
#[derive(Clone, Debug)]
pub enum Observable {
    /// Dense operator on the 2n qubits, interleaved order.
    Dense(CMat),
    /// Π_id on the first m pairs; never materialized.
    IdenticalOutcomes { m: usize, basis: MeasurementBasis },
}

/// Time-averaged ⟨ψ_t|O|ψ_t⟩ with |ψ_t> = (U_t ⊗ U_t*)|ψ>.
pub fn twirl_branch_expectation(
    h: &SpectralHamiltonian,
    branch: &BranchState,
    obs: &Observable,
    mu: &TimeMeasure,
) -> Result<f64> {
    mu.validate()?;
    let n = branch.n();
    if h.n() != n {
        return Err(Error::Dimension { expected: h.n(), got: n });
    }
    let d = 1usize << n;
    match obs {
        Observable::IdenticalOutcomes { m, basis } => {
            // branch ↔ A with (K ⊗ I)|Φ+> ↔ K/√d, so K = √d A
            let a = crate::linalg::scale(&branch.to_matrix(), cplx((d as f64).sqrt(), 0.0));
            let q = branch_operator_eigenbasis(h, &a);
            let kernel = BranchKernel::new(h, *m, basis, mu)?;
            Ok(kernel.evaluate(&q).0)
        }
        Observable::Dense(o) => {
            let dim = d * d;
            if o.nrows() != dim || o.ncols() != dim {
                return Err(Error::Dimension { expected: dim, got: o.nrows() });
            }
            check_density_budget(n)?;
            let v = h.eigenvectors();
            let vh = v.adjoint().to_owned();
            let psi = Mat::from_fn(dim, 1, |r, _| branch.to_matrix()[(r / d, r % d)]);
            let psi = kron_columns(&psi, &vh, v);
            let perm = interleaved_to_block(n);
            let mut ob = Mat::<c64>::zeros(dim, dim);
            for c in 0..dim {
                for r in 0..dim {
                    ob[(perm[r], perm[c])] = o[(r, c)];
                }
            }
            let oe = kron_conjugate(&ob, &vh, v);
            let mut rho = Mat::from_fn(dim, dim, |r, c| psi[(r, 0)] * psi[(c, 0)].conj());
            filter_eigenbasis(&mut rho, h, mu);
            Ok(trace((&oe * &rho).as_ref()).re)
        }
    }
}

/// Second-moment Haar twirl E_U[(U⊗U) X (U⊗U)†] in closed form.
pub fn haar_second_twirl_oracle(x: &CMat) -> Result<CMat> {
    let dim = x.nrows();
    if x.ncols() != dim {
        return Err(Error::Dimension { expected: dim, got: x.ncols() });
    }
    let d = (dim as f64).sqrt().round() as usize;
    if d * d != dim || d < 2 {
        return Err(Error::Domain(format!("dimension {dim} is not d² with d >= 2")));
    }
    let f = swap_operator(d);
    let id = identity(dim);
    let df = d as f64;
    let tr_x = trace(x.as_ref());
    let tr_xf = trace((x * &f).as_ref());
    let a = (tr_x - tr_xf / df) / (df * df - 1.0);
    let b = (tr_xf - tr_x / df) / (df * df - 1.0);
    Ok(Mat::from_fn(dim, dim, |i, j| a * id[(i, j)] + b * f[(i, j)]))
}

/// First-moment Haar twirl tr(X)·I/d.
pub fn haar_first_twirl_oracle(x: &CMat) -> CMat {
    let d = x.nrows();
    let t = trace(x.as_ref()) / d as f64;
    Mat::from_fn(d, d, |i, j| if i == j { t } else { ZERO })
}

/// F|a, b> = |b, a> on C^d ⊗ C^d.
pub fn swap_operator(d: usize) -> CMat {
    Mat::from_fn(d * d, d * d, |r, c| if r == (c % d) * d + c / d { ONE } else { ZERO })
}
