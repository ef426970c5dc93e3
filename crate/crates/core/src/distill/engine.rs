//! Branch evaluator: survival and kept-pair overlap of one error operator K.
//!
//! For the branch (K ⊗ I)|Φ+> with Q = V†KV in the eigenbasis of H and
//! Vm = W†V (W the measurement rotation), the state after time t and the
//! identical-outcome check is described by the blocks B_xx of
//! B = Vm (Q ∘ e^{-iωt}) Vm†, ω_ij = λ_i − λ_j:
//!   s = (1/d) Σ_x ‖B_xx‖²,   g = (1/(d·d_k)) Σ_x |tr B_xx|²,
//! s being the survival probability and g the weight left on |Φ+> of the
//! unmeasured pairs. Averaging over t is done in closed form.

use faer::{Mat, c64};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamlib::SpectralHamiltonian;
use crate::linalg::{CMat, ZERO, norm_sqr, phase};
use crate::qcore::{MeasurementBasis, PauliString};
use crate::twirl::{GapClusters, TimeMeasure};

/// Largest pair count for the exact finite-window kernel (d⁴ entries).
pub const MAX_KERNEL_PAIRS: usize = 5;
/// Upper bound on stored degenerate-gap table entries.
pub const MAX_CLUSTER_ENTRIES: usize = 20_000_000;
/// Upper bound on Σ_x (table entries) work when building the tables.
pub const MAX_CLUSTER_WORK: f64 = 4e9;

/// Branches per matrix product in [`BranchKernel::evaluate_batch`].
const KERNEL_BLOCK: usize = 256;

/// V† K V.
pub fn branch_operator_eigenbasis(h: &SpectralHamiltonian, k: &CMat) -> CMat {
    let v = h.eigenvectors();
    v.adjoint() * (k * v)
}

/// V† P V, using the permutation structure of V when H is diagonal.
pub fn pauli_eigenbasis(h: &SpectralHamiltonian, p: &PauliString, perm: Option<&[usize]>) -> CMat {
    let v = h.eigenvectors();
    let d = v.nrows();
    match perm {
        Some(inv) => {
            // V[:, j] = e_{π(j)}, so Q[π⁻¹(x ⊕ xm), π⁻¹(x)] = c(x)
            let xm = p.x_mask();
            let mut q = Mat::<c64>::zeros(d, d);
            for x in 0..d {
                q[(inv[x ^ xm], inv[x])] = p.column_coefficient(x);
            }
            q
        }
        None => v.adjoint() * p.apply_left(v),
    }
}

/// e^{-iHt} P e^{iHt} in the computational basis.
pub fn evolved_pauli(h: &SpectralHamiltonian, p: &PauliString, t: f64) -> CMat {
    let v = h.eigenvectors();
    let lam = h.eigenvalues();
    let vp = Mat::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * phase(lam[k] * t));
    let u = &vp * v.adjoint();
    p.apply_right(&u) * u.adjoint()
}

/// (s, g) of the evolved branch A = U P U† for every m in `ms`, rotating
/// one more qubit into the Hadamard basis per step. None for
/// Clifford-conjugated bases.
pub fn pointwise_all_m(a: &CMat, ms: &[usize], basis: &MeasurementBasis) -> Option<Vec<(f64, f64)>> {
    let hadamard = match basis {
        MeasurementBasis::Computational => false,
        MeasurementBasis::Hadamard => true,
        MeasurementBasis::CliffordConjugated(_) => return None,
    };
    let top = ms.iter().copied().max().unwrap_or(0);
    let mut b = a.clone();
    let mut per_m = vec![(0.0, 0.0); top + 1];
    for m in 0..=top {
        if m > 0 && hadamard {
            hadamard_conjugate_qubit(&mut b, m - 1);
        }
        if ms.contains(&m) {
            per_m[m] = diagonal_block_stats(&b, m);
        }
    }
    Some(ms.iter().map(|&m| per_m[m]).collect())
}

/// B ↦ H_q B H_q for qubit q counted from the most significant end.
fn hadamard_conjugate_qubit(b: &mut CMat, q: usize) {
    let d = b.nrows();
    let stride = d >> (q + 1);
    let scale = 0.5f64.sqrt();
    for j in 0..d {
        let mut col = b.col_mut(j);
        for i0 in (0..d).filter(|i| i & stride == 0) {
            let (x, y) = (col[i0], col[i0 + stride]);
            col[i0] = (x + y) * scale;
            col[i0 + stride] = (x - y) * scale;
        }
    }
    for j0 in (0..d).filter(|j| j & stride == 0) {
        for i in 0..d {
            let (x, y) = (b[(i, j0)], b[(i, j0 + stride)]);
            b[(i, j0)] = (x + y) * scale;
            b[(i, j0 + stride)] = (x - y) * scale;
        }
    }
}

/// (1/d) Σ_x ‖B_xx‖², (1/(d·d_k)) Σ_x |tr B_xx|² over the 2^m diagonal blocks.
fn diagonal_block_stats(b: &CMat, m: usize) -> (f64, f64) {
    let d = b.nrows();
    let dk = d >> m;
    let (mut s, mut g) = (0.0, 0.0);
    for x in 0..1usize << m {
        let mut tr = ZERO;
        for j in x * dk..(x + 1) * dk {
            tr += b[(j, j)];
            for i in x * dk..(x + 1) * dk {
                s += norm_sqr(b[(i, j)]);
            }
        }
        g += norm_sqr(tr);
    }
    (s / d as f64, g / (d * dk) as f64)
}

/// π⁻¹ when the eigenvectors form an exact permutation matrix.
pub fn eigenvector_permutation(h: &SpectralHamiltonian) -> Option<Vec<usize>> {
    let v = h.eigenvectors();
    let d = v.nrows();
    let mut inv = vec![usize::MAX; d];
    for j in 0..d {
        let mut hit = None;
        for i in 0..d {
            let z = v[(i, j)];
            if z == ZERO {
                continue;
            }
            if z.re != 1.0 || z.im != 0.0 || hit.is_some() {
                return None;
            }
            hit = Some(i);
        }
        let i = hit?;
        if inv[i] != usize::MAX {
            return None;
        }
        inv[i] = j;
    }
    Some(inv)
}

#[derive(Clone, Debug)]
struct Group {
    entries: Vec<(usize, usize)>,
    a: Vec<c64>,
    b: Vec<c64>,
}

#[derive(Clone, Debug)]
struct DeltaTables {
    g: Vec<f64>,
    k: Vec<f64>,
    zero: Group,
    zero_c: Vec<c64>,
    zero_d: Vec<c64>,
    groups: Vec<Group>,
}

#[derive(Clone, Debug)]
enum Mode {
    Delta(Box<DeltaTables>),
    Kernel { ts: CMat, tg: CMat },
    Times(Vec<f64>),
}

/// Precomputed evaluator for fixed (H, m, basis, time measure).
#[derive(Clone, Debug)]
pub struct BranchKernel {
    n: usize,
    m: usize,
    d: usize,
    dk: usize,
    lam: Vec<f64>,
    vm: CMat,
    mode: Mode,
    degenerate_entries: usize,
}

impl BranchKernel {
    pub fn new(h: &SpectralHamiltonian, m: usize, basis: &MeasurementBasis, mu: &TimeMeasure) -> Result<Self> {
        mu.validate()?;
        let mut k = Self::base(h, m, basis)?;
        k.mode = match mu {
            TimeMeasure::DeltaLimit => {
                let cl = GapClusters::for_hamiltonian(h);
                k.degenerate_entries = cl.degenerate_entries(k.d);
                Mode::Delta(Box::new(k.delta_tables(&cl)?))
            }
            TimeMeasure::Uniform(_) => {
                if k.n > MAX_KERNEL_PAIRS {
                    return Err(Error::Capacity(format!(
                        "exact finite-window kernel limited to {MAX_KERNEL_PAIRS} pairs, got {}",
                        k.n
                    )));
                }
                k.window_kernel(mu)
            }
            TimeMeasure::Samples(ts) => Mode::Times(ts.clone()),
        };
        Ok(k)
    }

    /// Evaluator for explicitly supplied times, see [`Self::evaluate_at`].
    pub fn pointwise(h: &SpectralHamiltonian, m: usize, basis: &MeasurementBasis) -> Result<Self> {
        Self::base(h, m, basis)
    }

    fn base(h: &SpectralHamiltonian, m: usize, basis: &MeasurementBasis) -> Result<Self> {
        let n = h.n();
        if m > n {
            return Err(Error::Domain(format!("measured pairs m={m} exceeds n={n}")));
        }
        let d = 1usize << n;
        let vm = basis.rotate_rows(n, m, h.eigenvectors())?;
        Ok(BranchKernel {
            n,
            m,
            d,
            dk: d >> m,
            lam: h.eigenvalues().to_vec(),
            vm,
            mode: Mode::Times(Vec::new()),
            degenerate_entries: 0,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Index pairs kept together because their gaps coincide (delta limit).
    pub fn degenerate_entries(&self) -> usize {
        self.degenerate_entries
    }

    /// R^x = Vm_x† Vm_x for the row block of outcome x.
    fn overlap(&self, x: usize) -> CMat {
        let vx = self.vm.subrows(x * self.dk, self.dk);
        vx.adjoint() * vx
    }

    fn delta_tables(&self, cl: &GapClusters) -> Result<DeltaTables> {
        let d = self.d;
        let (zero_extra, group_entries) = cl.degenerate_groups(d);
        let ze = zero_extra.len();
        let entries = 2 * ze * ze + 2 * d * ze + group_entries.iter().map(|g| 2 * g.len() * g.len()).sum::<usize>();
        let outcomes = 1usize << self.m;
        if entries > MAX_CLUSTER_ENTRIES || (entries as f64) * outcomes as f64 > MAX_CLUSTER_WORK {
            return Err(Error::Capacity(format!(
                "degenerate-gap tables need {entries} entries over {outcomes} outcomes; spectrum too degenerate for the exact delta limit"
            )));
        }
        let mut g = vec![0.0; d * d];
        let mut kk = vec![0.0; d * d];
        let new_group = |e: Vec<(usize, usize)>| {
            let l = e.len();
            Group { entries: e, a: vec![ZERO; l * l], b: vec![ZERO; l * l] }
        };
        let mut zero = new_group(zero_extra);
        let mut zero_c = vec![ZERO; d * ze];
        let mut zero_d = vec![ZERO; d * ze];
        let mut groups: Vec<Group> = group_entries.into_iter().map(new_group).collect();
        for x in 0..outcomes {
            let r = self.overlap(x);
            let w: Vec<f64> = (0..d).map(|i| r[(i, i)].re).collect();
            for j in 0..d {
                for i in 0..d {
                    g[i * d + j] += w[i] * w[j];
                    kk[i * d + j] += norm_sqr(r[(i, j)]);
                }
            }
            for grp in std::iter::once(&mut zero).chain(groups.iter_mut()) {
                let l = grp.entries.len();
                for (a, &(k2, l2)) in grp.entries.iter().enumerate() {
                    for (b, &(k1, l1)) in grp.entries.iter().enumerate() {
                        grp.a[a * l + b] += r[(k2, k1)] * r[(l1, l2)];
                        grp.b[a * l + b] += r[(l2, k2)].conj() * r[(l1, k1)];
                    }
                }
            }
            for (e, &(k1, l1)) in zero.entries.iter().enumerate() {
                for i in 0..d {
                    zero_c[i * ze + e] += r[(i, k1)] * r[(l1, i)];
                    zero_d[i * ze + e] += r[(l1, k1)] * w[i];
                }
            }
        }
        Ok(DeltaTables { g, k: kk, zero, zero_c, zero_d, groups })
    }

    fn window_kernel(&self, mu: &TimeMeasure) -> Mode {
        let d = self.d;
        let d2 = d * d;
        let omega: Vec<f64> = (0..d2).map(|r| self.lam[r / d] - self.lam[r % d]).collect();
        let mut ts = Mat::<c64>::zeros(d2, d2);
        let mut tg = Mat::<c64>::zeros(d2, d2);
        for x in 0..1usize << self.m {
            let r = self.overlap(x);
            for i in 0..d {
                for j in 0..d {
                    let col = i * d + j;
                    for k in 0..d {
                        let rki = r[(k, i)];
                        for l in 0..d {
                            let row = k * d + l;
                            ts[(row, col)] += rki * r[(j, l)];
                            tg[(row, col)] += r[(l, k)].conj() * r[(j, i)];
                        }
                    }
                }
            }
        }
        for col in 0..d2 {
            for row in 0..d2 {
                let f = mu.filter(omega[col] - omega[row]).unwrap_or(c64::new(1.0, 0.0));
                ts[(row, col)] *= f;
                tg[(row, col)] *= f;
            }
        }
        Mode::Kernel { ts, tg }
    }

    /// (s, g) for Q = V†KV under the kernel's time measure.
    pub fn evaluate(&self, q: &CMat) -> (f64, f64) {
        match &self.mode {
            Mode::Delta(t) => self.eval_delta(t, q),
            Mode::Kernel { ts, tg } => {
                let d2 = self.d * self.d;
                let v = Mat::from_fn(d2, 1, |r, _| q[(r / self.d, r % self.d)]);
                let a = ts * &v;
                let b = tg * &v;
                let (mut s, mut g) = (ZERO, ZERO);
                for r in 0..d2 {
                    s += v[(r, 0)].conj() * a[(r, 0)];
                    g += v[(r, 0)].conj() * b[(r, 0)];
                }
                (s.re / self.d as f64, g.re / (self.d * self.dk) as f64)
            }
            Mode::Times(ts) => {
                let (mut s, mut g) = (0.0, 0.0);
                for &t in ts {
                    let (a, b) = self.evaluate_at(q, t);
                    s += a;
                    g += b;
                }
                let k = ts.len().max(1) as f64;
                (s / k, g / k)
            }
        }
    }

    /// [`Self::evaluate`] over many branches; finite-window kernels are
    /// applied as blocked matrix products.
    pub fn evaluate_batch(&self, qs: &[CMat]) -> Vec<(f64, f64)> {
        let Mode::Kernel { ts, tg } = &self.mode else {
            return qs.par_iter().map(|q| self.evaluate(q)).collect();
        };
        let d = self.d;
        let d2 = d * d;
        let mut out = Vec::with_capacity(qs.len());
        for chunk in qs.chunks(KERNEL_BLOCK) {
            let v = Mat::from_fn(d2, chunk.len(), |r, c| chunk[c][(r / d, r % d)]);
            let a = ts * &v;
            let b = tg * &v;
            for c in 0..chunk.len() {
                let (mut s, mut g) = (ZERO, ZERO);
                for r in 0..d2 {
                    let vc = v[(r, c)].conj();
                    s += vc * a[(r, c)];
                    g += vc * b[(r, c)];
                }
                out.push((s.re / d as f64, g.re / (d * self.dk) as f64));
            }
        }
        out
    }

    /// (s, g) at the single time t.
    pub fn evaluate_at(&self, q: &CMat, t: f64) -> (f64, f64) {
        let d = self.d;
        let dk = self.dk;
        let qe = Mat::from_fn(d, d, |i, j| q[(i, j)] * phase((self.lam[i] - self.lam[j]) * t));
        let y = &qe * self.vm.adjoint();
        let (mut s, mut g) = (0.0, 0.0);
        for x in 0..1usize << self.m {
            let bxx = self.vm.subrows(x * dk, dk) * y.subcols(x * dk, dk);
            let mut tr = ZERO;
            for j in 0..dk {
                tr += bxx[(j, j)];
                for i in 0..dk {
                    s += norm_sqr(bxx[(i, j)]);
                }
            }
            g += norm_sqr(tr);
        }
        (s / d as f64, g / (d * dk) as f64)
    }

    fn eval_delta(&self, t: &DeltaTables, q: &CMat) -> (f64, f64) {
        let d = self.d;
        let diag: Vec<c64> = (0..d).map(|i| q[(i, i)]).collect();
        let (mut s, mut g) = (0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                let idx = i * d + j;
                let qq = (diag[i].conj() * diag[j]).re;
                s += qq * t.k[idx];
                g += qq * t.g[idx];
                if i != j {
                    let o = norm_sqr(q[(i, j)]);
                    s += o * t.g[idx];
                    g += o * t.k[idx];
                }
            }
        }
        for grp in std::iter::once(&t.zero).chain(t.groups.iter()) {
            let l = grp.entries.len();
            let qs: Vec<c64> = grp.entries.iter().map(|&(k, l)| q[(k, l)]).collect();
            for a in 0..l {
                for b in 0..l {
                    if a != b {
                        let w = qs[a].conj() * qs[b];
                        s += (w * grp.a[a * l + b]).re;
                        g += (w * grp.b[a * l + b]).re;
                    }
                }
            }
        }
        let ze = t.zero.entries.len();
        if ze > 0 {
            let qs: Vec<c64> = t.zero.entries.iter().map(|&(k, l)| q[(k, l)]).collect();
            for i in 0..d {
                let (mut cs, mut cg) = (ZERO, ZERO);
                for e in 0..ze {
                    cs += qs[e] * t.zero_c[i * ze + e];
                    cg += qs[e] * t.zero_d[i * ze + e];
                }
                s += 2.0 * (diag[i].conj() * cs).re;
                g += 2.0 * (diag[i].conj() * cg).re;
            }
        }
        (s / d as f64, g / (d * self.dk) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamlib::{HamiltonianSpec, build_diagonal};
    use crate::qcore::pauli_matrix;

    fn brute(h: &SpectralHamiltonian, m: usize, basis: &MeasurementBasis, q: &CMat, ts: &[f64]) -> (f64, f64) {
        let k = BranchKernel::pointwise(h, m, basis).unwrap();
        let mut acc = (0.0, 0.0);
        for &t in ts {
            let (a, b) = k.evaluate_at(q, t);
            acc.0 += a / ts.len() as f64;
            acc.1 += b / ts.len() as f64;
        }
        acc
    }

    #[test]
    fn identity_branch_survives_with_full_overlap() {
        let h = HamiltonianSpec::named("trapped_ion", 3, 0).unwrap().build().unwrap();
        let q = pauli_eigenbasis(&h, &PauliString::identity(3), None);
        for mu in [TimeMeasure::DeltaLimit, TimeMeasure::Uniform(1.0), TimeMeasure::Samples(vec![0.7])] {
            let k = BranchKernel::new(&h, 2, &MeasurementBasis::Hadamard, &mu).unwrap();
            let (s, g) = k.evaluate(&q);
            assert!((s - 1.0).abs() < 1e-12 && (g - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_matches_single_evaluation() {
        let h = HamiltonianSpec::named("rydberg", 3, 0).unwrap().build().unwrap();
        let qs: Vec<CMat> = (0..64).map(|i| pauli_eigenbasis(&h, &PauliString::from_index(3, i), None)).collect();
        for mu in [TimeMeasure::Uniform(1.3), TimeMeasure::DeltaLimit] {
            let k = BranchKernel::new(&h, 1, &MeasurementBasis::Hadamard, &mu).unwrap();
            for (q, (s, g)) in qs.iter().zip(k.evaluate_batch(&qs)) {
                let (s1, g1) = k.evaluate(q);
                assert!((s - s1).abs() < 1e-12 && (g - g1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn all_m_pointwise_matches_kernel() {
        let h = HamiltonianSpec::named("trapped_ion", 4, 0).unwrap().build().unwrap();
        let ms = [0usize, 1, 3, 4];
        for basis in [MeasurementBasis::Computational, MeasurementBasis::Hadamard] {
            for (idx, t) in [(7usize, 0.4), (130, 1.9), (255, 3.3)] {
                let p = PauliString::from_index(4, idx);
                let q = pauli_eigenbasis(&h, &p, None);
                let fast = pointwise_all_m(&evolved_pauli(&h, &p, t), &ms, &basis).unwrap();
                for (&m, (s, g)) in ms.iter().zip(fast) {
                    let (s1, g1) = BranchKernel::pointwise(&h, m, &basis).unwrap().evaluate_at(&q, t);
                    assert!((s - s1).abs() < 1e-12 && (g - g1).abs() < 1e-12, "m={m}");
                }
            }
        }
    }

    #[test]
    fn permutation_fast_path_matches_dense() {
        let h = build_diagonal(3, 9).unwrap();
        let perm = eigenvector_permutation(&h).unwrap();
        for idx in [5usize, 17, 40, 63] {
            let p = PauliString::from_index(3, idx);
            let fast = pauli_eigenbasis(&h, &p, Some(&perm));
            let dense = branch_operator_eigenbasis(&h, &pauli_matrix(&p));
            assert!(crate::linalg::max_abs_diff(fast.as_ref(), dense.as_ref()) < 1e-14);
        }
        let ion = HamiltonianSpec::named("trapped_ion", 3, 0).unwrap().build().unwrap();
        assert!(eigenvector_permutation(&ion).is_none());
    }

    #[test]
    fn window_kernel_matches_quadrature() {
        let h = HamiltonianSpec::named("rydberg", 3, 0).unwrap().build().unwrap();
        let big_t = 0.9;
        // midpoint rule with many nodes on a short window
        let nodes = 4000;
        let ts: Vec<f64> = (0..nodes).map(|i| (i as f64 + 0.5) * big_t / nodes as f64).collect();
        let k = BranchKernel::new(&h, 1, &MeasurementBasis::Hadamard, &TimeMeasure::Uniform(big_t)).unwrap();
        for idx in [3usize, 30, 51] {
            let q = pauli_eigenbasis(&h, &PauliString::from_index(3, idx), None);
            let (s, g) = k.evaluate(&q);
            let (s2, g2) = brute(&h, 1, &MeasurementBasis::Hadamard, &q, &ts);
            assert!((s - s2).abs() < 1e-5 && (g - g2).abs() < 1e-5, "{idx}: {s} {s2} {g} {g2}");
        }
    }

    #[test]
    fn delta_limit_matches_long_window_for_degenerate_tfim() {
        // TFIM has coinciding gaps; the cluster tables must reproduce the
        // long-time average, which a window kernel with huge T approximates.
        let h = HamiltonianSpec::named("tfim_periodic", 3, 0).unwrap().build().unwrap();
        let cl = GapClusters::for_hamiltonian(&h);
        assert!(cl.degenerate_entries(8) > 0);
        let delta = BranchKernel::new(&h, 1, &MeasurementBasis::Hadamard, &TimeMeasure::DeltaLimit).unwrap();
        let window = BranchKernel::new(&h, 1, &MeasurementBasis::Hadamard, &TimeMeasure::Uniform(1e9)).unwrap();
        for idx in 1..64usize {
            let q = pauli_eigenbasis(&h, &PauliString::from_index(3, idx), None);
            let (s, g) = delta.evaluate(&q);
            let (s2, g2) = window.evaluate(&q);
            assert!((s - s2).abs() < 1e-6 && (g - g2).abs() < 1e-6, "{idx}: {s} {s2} {g} {g2}");
        }
    }
}
