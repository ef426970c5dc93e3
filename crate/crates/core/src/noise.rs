//! One-sided noise channels on the EPR ensemble.

use faer::{Mat, c64};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{CMat, ZERO, cplx, max_abs_diff, scale, trace};
use crate::qcore::{BranchState, DensityOperator, Pauli, PauliString};

/// Full 4^n enumeration limit for product channels.
pub const MAX_ENUMERATED_QUBITS: usize = 7;
const SUM_TOL: f64 = 1e-12;

/// Pauli channel Λ(ρ) = Σ c_P P ρ P.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliChannel {
    n: usize,
    repr: Repr,
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    /// Independent per-qubit weights in I, X, Y, Z order.
    Product(Vec<[f64; 4]>),
    Explicit(Vec<(PauliString, f64)>),
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Domain("Pauli weights must be finite and nonnegative".into()));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::Domain(format!("Pauli weights sum to {s}, expected 1")));
    }
    Ok(())
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

impl PauliChannel {
    /// Independent channel with the given weights on each qubit.
    pub fn product(per_qubit: Vec<[f64; 4]>) -> Result<Self> {
        if per_qubit.is_empty() {
            return Err(Error::Domain("channel needs at least one qubit".into()));
        }
        for w in &per_qubit {
            check_weights(w)?;
        }
        Ok(PauliChannel { n: per_qubit.len(), repr: Repr::Product(per_qubit) })
    }

    /// Same single-qubit weights on all `n` qubits.
    pub fn uniform(n: usize, weights: [f64; 4]) -> Result<Self> {
        Self::product(vec![weights; n])
    }

    /// Explicit list of (P, c_P); repeated strings are merged, phases dropped.
    pub fn from_weights(n: usize, weights: Vec<(PauliString, f64)>) -> Result<Self> {
        let mut merged: Vec<(PauliString, f64)> = Vec::new();
        for (p, c) in weights {
            if p.n() != n {
                return Err(Error::Dimension { expected: n, got: p.n() });
            }
            let p = PauliString::new(p.letters().to_vec());
            match merged.iter_mut().find(|(q, _)| *q == p) {
                Some(e) => e.1 += c,
                None => merged.push((p, c)),
            }
        }
        check_weights(&merged.iter().map(|e| e.1).collect::<Vec<_>>())?;
        Ok(PauliChannel { n, repr: Repr::Explicit(merged) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_product(&self) -> bool {
        matches!(self.repr, Repr::Product(_))
    }

    /// Per-qubit weights when the channel is a product.
    pub fn per_qubit(&self) -> Option<&[[f64; 4]]> {
        match &self.repr {
            Repr::Product(v) => Some(v),
            Repr::Explicit(_) => None,
        }
    }

    pub fn weight(&self, p: &PauliString) -> f64 {
        match &self.repr {
            Repr::Product(v) => p.letters().iter().zip(v).map(|(l, w)| w[*l as usize]).product(),
            Repr::Explicit(list) => list.iter().filter(|(q, _)| q.letters() == p.letters()).map(|e| e.1).sum(),
        }
    }

    /// c_I
    pub fn identity_weight(&self) -> f64 {
        match &self.repr {
            Repr::Product(v) => v.iter().map(|w| w[0]).product(),
            Repr::Explicit(_) => self.weight(&PauliString::identity(self.n)),
        }
    }

    /// All (P, c_P) with c_P > 0; product channels only up to 7 qubits.
    pub fn enumerate(&self) -> Result<Vec<(PauliString, f64)>> {
        match &self.repr {
            Repr::Explicit(list) => Ok(list.iter().filter(|e| e.1 > 0.0).cloned().collect()),
            Repr::Product(v) => {
                if self.n > MAX_ENUMERATED_QUBITS {
                    return Err(Error::Capacity(format!(
                        "enumerating 4^{} Paulis exceeds the {MAX_ENUMERATED_QUBITS}-qubit limit",
                        self.n
                    )));
                }
                let mut out = vec![(Vec::with_capacity(self.n), 1.0)];
                for w in v {
                    let mut next = Vec::with_capacity(out.len() * 4);
                    for (letters, c) in &out {
                        for (k, wk) in w.iter().enumerate() {
                            if *wk > 0.0 {
                                let mut l: Vec<Pauli> = letters.clone();
                                l.push(Pauli::from_index(k));
                                next.push((l, c * wk));
                            }
                        }
                    }
                    out = next;
                }
                Ok(out.into_iter().map(|(l, c)| (PauliString::new(l), c)).collect())
            }
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> PauliString {
        match &self.repr {
            Repr::Product(v) => PauliString::new(v.iter().map(|w| draw(w, rng.random())).collect()),
            Repr::Explicit(list) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (p, c) in list {
                    acc += c;
                    if u < acc {
                        return p.clone();
                    }
                }
                list.iter().rev().find(|e| e.1 > 0.0).map(|e| e.0.clone()).unwrap_or(PauliString::identity(self.n))
            }
        }
    }

    /// Draws P ~ c_P conditioned on P ≠ I, or None if c_I = 1.
    pub fn sample_non_identity<R: Rng>(&self, rng: &mut R) -> Option<PauliString> {
        if self.identity_weight() >= 1.0 {
            return None;
        }
        match &self.repr {
            Repr::Product(v) => {
                // first non-identity qubit k has weight Π_{j<k} w_j[I] · (1 − w_k[I])
                let mut prefix = 1.0;
                let probs: Vec<f64> = v
                    .iter()
                    .map(|w| {
                        let p = prefix * (1.0 - w[0]);
                        prefix *= w[0];
                        p
                    })
                    .collect();
                let total: f64 = probs.iter().sum();
                let u = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut k = probs.iter().rposition(|p| *p > 0.0)?;
                for (j, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc && *p > 0.0 {
                        k = j;
                        break;
                    }
                }
                let letters = v
                    .iter()
                    .enumerate()
                    .map(|(j, w)| match j.cmp(&k) {
                        std::cmp::Ordering::Less => Pauli::I,
                        std::cmp::Ordering::Equal => {
                            let nz = 1.0 - w[0];
                            draw(&[0.0, w[1] / nz, w[2] / nz, w[3] / nz], rng.random())
                        }
                        std::cmp::Ordering::Greater => draw(w, rng.random()),
                    })
                    .collect();
                Some(PauliString::new(letters))
            }
            Repr::Explicit(list) => {
                let rest: Vec<_> = list.iter().filter(|(p, c)| !p.is_identity() && *c > 0.0).collect();
                let total: f64 = rest.iter().map(|e| e.1).sum();
                let u = rng.random::<f64>() * total;
                let mut acc = 0.0;
                for (p, c) in &rest {
                    acc += c;
                    if u < acc {
                        return Some(p.clone());
                    }
                }
                rest.last().map(|e| e.0.clone())
            }
        }
    }

    /// Λ ⊗ id applied to a density operator, noise on the A side.
    pub fn apply_to_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.n() != self.n {
            return Err(Error::Dimension { expected: self.n, got: rho.n() });
        }
        match &self.repr {
            Repr::Product(v) => {
                let ops: Vec<Vec<CMat>> = v
                    .iter()
                    .map(|w| {
                        Pauli::ALL
                            .iter()
                            .zip(w)
                            .filter(|(_, c)| **c > 0.0)
                            .map(|(p, c)| scale(&p.matrix(), cplx(c.sqrt(), 0.0)))
                            .collect()
                    })
                    .collect();
                apply_local_kraus_alice(rho, &ops)
            }
            Repr::Explicit(list) => {
                let n = self.n;
                let dim = 1usize << (2 * n);
                let mut acc: CMat = Mat::zeros(dim, dim);
                for (p, c) in list {
                    let mut m = rho.matrix().clone();
                    for (q, l) in p.letters().iter().enumerate() {
                        if *l != Pauli::I {
                            m = conjugate_qubit(&m, alice_bit(n, q), &l.matrix());
                        }
                    }
                    acc += scale(&m, cplx(*c, 0.0));
                }
                DensityOperator::new(n, acc)
            }
        }
    }
}

fn draw(w: &[f64; 4], u: f64) -> Pauli {
    let mut acc = 0.0;
    for (k, wk) in w.iter().enumerate() {
        acc += wk;
        if u < acc {
            return Pauli::from_index(k);
        }
    }
    (0..4).rev().find(|k| w[*k] > 0.0).map(Pauli::from_index).unwrap_or(Pauli::I)
}

pub fn local_depolarizing(n: usize, p: f64) -> Result<PauliChannel> {
    check_prob("depolarizing strength", p)?;
    PauliChannel::uniform(n, [1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0])
}

pub fn local_dephasing(n: usize, p: f64) -> Result<PauliChannel> {
    check_prob("dephasing strength", p)?;
    PauliChannel::uniform(n, [1.0 - p, 0.0, 0.0, p])
}

/// General channel given by Kraus operators on 2^n dimensions.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    n: usize,
    operators: Vec<CMat>,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMat>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| Error::Domain("Kraus channel needs an operator".into()))?;
        let d = first.nrows();
        if !d.is_power_of_two() || d < 2 {
            return Err(Error::Domain(format!("Kraus dimension {d} is not a qubit power")));
        }
        let mut sum: CMat = Mat::zeros(d, d);
        for k in &operators {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::Dimension { expected: d, got: k.nrows() });
            }
            sum += k.adjoint() * k;
        }
        let dev = max_abs_diff(sum.as_ref(), Mat::<c64>::identity(d, d).as_ref());
        if dev > 1e-10 {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(KrausChannel { n: d.trailing_zeros() as usize, operators })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn operators(&self) -> &[CMat] {
        &self.operators
    }

    /// Applies `self` after `first`.
    pub fn compose_after(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if self.n != first.n {
            return Err(Error::Dimension { expected: self.n, got: first.n });
        }
        let ops = self.operators.iter().flat_map(|a| first.operators.iter().map(move |b| a * b)).collect();
        KrausChannel::new(ops)
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let d = rho.nrows();
        let mut out: CMat = Mat::zeros(d, d);
        for k in &self.operators {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Single-qubit Pauli transfer matrix diagonal d_W = tr(W Λ(W))/2.
    pub fn ptm_diagonal(&self) -> Result<[f64; 4]> {
        if self.n != 1 {
            return Err(Error::Domain("PTM diagonal is defined here for one qubit".into()));
        }
        let mut d = [0.0; 4];
        for (k, p) in Pauli::ALL.iter().enumerate() {
            let w = p.matrix();
            d[k] = trace((&w * self.apply(&w)).as_ref()).re / 2.0;
        }
        Ok(d)
    }

    /// Kraus form of a single-qubit Pauli channel.
    pub fn from_pauli_weights(w: [f64; 4]) -> Result<KrausChannel> {
        check_weights(&w)?;
        KrausChannel::new(
            Pauli::ALL
                .iter()
                .zip(w)
                .filter(|(_, c)| *c > 0.0)
                .map(|(p, c)| scale(&p.matrix(), cplx(c.sqrt(), 0.0)))
                .collect(),
        )
    }
}

pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_prob("damping rate", gamma)?;
    let k0 = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => cplx(1.0, 0.0),
        (1, 1) => cplx((1.0 - gamma).sqrt(), 0.0),
        _ => ZERO,
    });
    let k1 = Mat::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { cplx(gamma.sqrt(), 0.0) } else { ZERO });
    KrausChannel::new(vec![k0, k1])
}

/// Weights of the Pauli-twirled single-qubit channel:
/// c_Q = (1 + Σ_{W≠I} s_QW d_W)/4 with s_QW = ±1 for commuting/anticommuting.
pub fn pauli_twirl_channel(ch: &KrausChannel) -> Result<PauliChannel> {
    let d = ch.ptm_diagonal()?;
    let mut w = [0.0; 4];
    for (q, pq) in Pauli::ALL.iter().enumerate() {
        let mut s = d[0];
        for (k, pw) in Pauli::ALL.iter().enumerate().skip(1) {
            let commute = *pq == Pauli::I || pq == pw;
            s += if commute { d[k] } else { -d[k] };
        }
        w[q] = (s / 4.0).max(0.0);
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::NotTracePreserving((total - 1.0).abs()));
    }
    w.iter_mut().for_each(|x| *x /= total);
    PauliChannel::uniform(1, w)
}

/// Weights of Φ+, Ψ+, Φ−, Ψ− for one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellDiagonal {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl BellDiagonal {
    pub fn new(p00: f64, p01: f64, p10: f64, p11: f64) -> Result<Self> {
        let v = [p00, p01, p10, p11];
        if v.iter().any(|x| !x.is_finite() || *x < -SUM_TOL) {
            return Err(Error::Domain("Bell weights must be nonnegative".into()));
        }
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::Domain(format!("Bell weights sum to {s}, expected 1")));
        }
        Ok(BellDiagonal { p00, p01, p10, p11 })
    }

    /// State left by one-sided depolarizing noise of strength p.
    pub fn werner(p: f64) -> Result<Self> {
        check_prob("depolarizing strength", p)?;
        Self::new(1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0)
    }

    pub fn fidelity(&self) -> f64 {
        self.p00
    }

    /// Probability of a bit flip (Ψ±).
    pub fn bit_error(&self) -> f64 {
        self.p01 + self.p11
    }

    /// Probability of a phase flip (Φ−, Ψ−).
    pub fn phase_error(&self) -> f64 {
        self.p10 + self.p11
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p00, self.p01, self.p10, self.p11]
    }
}

/// Bell-diagonal weights under independent bit and phase errors.
pub fn bell_diagonal_from_rates(e_b: f64, e_p: f64) -> Result<BellDiagonal> {
    check_prob("bit error rate", e_b)?;
    check_prob("phase error rate", e_p)?;
    BellDiagonal::new((1.0 - e_b) * (1.0 - e_p), e_b * (1.0 - e_p), (1.0 - e_b) * e_p, e_b * e_p)
}

/// (P ⊗ I)|ψ>, with P on the A qubits.
pub fn apply_pauli_branch(p: &PauliString, state: &BranchState) -> Result<BranchState> {
    if p.n() != state.n() {
        return Err(Error::Dimension { expected: state.n(), got: p.n() });
    }
    let a = p.apply_left(&state.to_matrix());
    BranchState::from_matrix(state.n(), &a)
}

/// Bit position of A-qubit q in the interleaved index.
pub(crate) fn alice_bit(n: usize, q: usize) -> usize {
    1usize << (2 * (n - 1 - q) + 1)
}

/// K ρ K† for a 2×2 operator K acting on the qubit at `bit`.
fn conjugate_qubit(rho: &CMat, bit: usize, k: &CMat) -> CMat {
    let dim = rho.nrows();
    let (k00, k01, k10, k11) = (k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)]);
    let mut left: CMat = Mat::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            if i & bit == 0 {
                let (x, y) = (rho[(i, j)], rho[(i | bit, j)]);
                left[(i, j)] = k00 * x + k01 * y;
                left[(i | bit, j)] = k10 * x + k11 * y;
            }
        }
    }
    let mut out: CMat = Mat::zeros(dim, dim);
    for j in 0..dim {
        if j & bit == 0 {
            for i in 0..dim {
                let (x, y) = (left[(i, j)], left[(i, j | bit)]);
                out[(i, j)] = x * k00.conj() + y * k01.conj();
                out[(i, j | bit)] = x * k10.conj() + y * k11.conj();
            }
        }
    }
    out
}

/// Applies the single-qubit Kraus set `ops[q]` to every A qubit q.
pub fn apply_local_kraus_alice(rho: &DensityOperator, ops: &[Vec<CMat>]) -> Result<DensityOperator> {
    let n = rho.n();
    if ops.len() != n {
        return Err(Error::Dimension { expected: n, got: ops.len() });
    }
    let dim = 1usize << (2 * n);
    let mut m = rho.matrix().clone();
    for (q, set) in ops.iter().enumerate() {
        let mut acc: CMat = Mat::zeros(dim, dim);
        for k in set {
            acc += conjugate_qubit(&m, alice_bit(n, q), k);
        }
        m = acc;
    }
    DensityOperator::new(n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::qcore::{epr_state, state_fidelity};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn depolarizing_weights() {
        let ch = local_depolarizing(1, 0.2).unwrap();
        let w = ch.per_qubit().unwrap()[0];
        for (g, e) in w.iter().zip([0.85, 0.05, 0.05, 0.05]) {
            assert!((g - e).abs() < 1e-15);
        }
        assert_eq!(local_depolarizing(3, 0.0).unwrap().identity_weight(), 1.0);
        assert!(local_depolarizing(1, 1.5).is_err());
    }

    #[test]
    fn depolarizing_two_thirds_is_separable_boundary() {
        let rho =
            local_depolarizing(1, 2.0 / 3.0).unwrap().apply_to_density(&epr_state(1).unwrap().projector()).unwrap();
        let f = state_fidelity(&rho, &epr_state(1).unwrap()).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_fidelity_is_product() {
        for n in 1..=3 {
            let psi = epr_state(n).unwrap();
            let rho = local_depolarizing(n, 0.2).unwrap().apply_to_density(&psi.projector()).unwrap();
            let f = state_fidelity(&rho, &psi).unwrap();
            assert!((f - 0.85f64.powi(n as i32)).abs() < 1e-10);
        }
    }

    #[test]
    fn half_dephasing_is_complete_dephasing() {
        let ch = local_dephasing(2, 0.5).unwrap();
        let list = ch.enumerate().unwrap();
        assert_eq!(list.len(), 4);
        assert!(list.iter().all(|(_, c)| (c - 0.25).abs() < 1e-15));
        let full = local_dephasing(2, 1.0).unwrap().enumerate().unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].0.to_string(), "ZZ");
    }

    #[test]
    fn amplitude_damping_ptm() {
        let g = 0.3;
        let d = amplitude_damping(g).unwrap().ptm_diagonal().unwrap();
        let s = (1.0 - g).sqrt();
        for (x, y) in d.iter().zip([1.0, s, s, 1.0 - g]) {
            assert!((x - y).abs() < 1e-14);
        }
        let full = amplitude_damping(1.0).unwrap();
        let one = crate::linalg::diag_real(&[0.0, 1.0]);
        let out = full.apply(&one);
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-15 && out[(1, 1)].norm() < 1e-15);
    }

    fn averaged_twirl(ch: &KrausChannel, rho: &CMat) -> CMat {
        let mut acc: CMat = Mat::zeros(2, 2);
        for p in Pauli::ALL {
            let pm = p.matrix();
            acc += scale(&(&pm * ch.apply(&(&pm * rho * &pm)) * &pm), cplx(0.25, 0.0));
        }
        acc
    }

    #[test]
    fn twirled_damping_matches_closed_form_and_explicit_average() {
        for g in [0.1, 0.3, 0.7] {
            let ch = amplitude_damping(g).unwrap();
            let w = pauli_twirl_channel(&ch).unwrap().per_qubit().unwrap()[0];
            let s = (1.0 - g).sqrt();
            let want = [(2.0 - g + 2.0 * s) / 4.0, g / 4.0, g / 4.0, (2.0 - g - 2.0 * s) / 4.0];
            for (a, b) in w.iter().zip(want) {
                assert!((a - b).abs() < 1e-12);
            }
            let pc = KrausChannel::from_pauli_weights(w).unwrap();
            for rho in [Pauli::X.matrix(), Pauli::Z.matrix(), Pauli::Y.matrix(), crate::linalg::identity(2)] {
                let a = averaged_twirl(&ch, &rho);
                let b = pc.apply(&rho);
                assert!(max_abs_diff(a.as_ref(), b.as_ref()) < 1e-12);
            }
        }
    }

    #[test]
    fn twirl_fixed_points() {
        let dep = KrausChannel::from_pauli_weights([0.85, 0.05, 0.05, 0.05]).unwrap();
        let w = pauli_twirl_channel(&dep).unwrap().per_qubit().unwrap()[0];
        assert!((w[0] - 0.85).abs() < 1e-12 && (w[3] - 0.05).abs() < 1e-12);
        let z = KrausChannel::new(vec![Pauli::Z.matrix()]).unwrap();
        let w = pauli_twirl_channel(&z).unwrap().per_qubit().unwrap()[0];
        assert!((w[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let k = crate::linalg::diag_real(&[1.0, 0.5]);
        assert!(matches!(KrausChannel::new(vec![k]), Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn bell_from_rates() {
        let b = bell_diagonal_from_rates(0.1, 0.2).unwrap();
        for (x, y) in b.as_array().iter().zip([0.72, 0.08, 0.18, 0.02]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(bell_diagonal_from_rates(0.0, 0.0).unwrap().as_array(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn x_branch_gives_psi_plus() {
        let s = apply_pauli_branch(&"X".parse().unwrap(), &epr_state(1).unwrap()).unwrap();
        let h = (0.5f64).sqrt();
        let want = [0.0, h, h, 0.0];
        for (a, b) in s.amplitudes().iter().zip(want) {
            assert!((a.re - b).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn conditional_sampler_matches_weights() {
        let ch = PauliChannel::product(vec![[0.9, 0.05, 0.0, 0.05], [0.7, 0.1, 0.1, 0.1]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 200_000;
        let mut count_xi = 0;
        for _ in 0..trials {
            let p = ch.sample_non_identity(&mut rng).unwrap();
            assert!(!p.is_identity());
            if p.to_string() == "XI" {
                count_xi += 1;
            }
        }
        let want = ch.weight(&"XI".parse().unwrap()) / (1.0 - ch.identity_weight());
        let got = count_xi as f64 / trials as f64;
        assert!((got - want).abs() < 4.0 * (want * (1.0 - want) / trials as f64).sqrt());
    }

    fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(0usize..4, n)
            .prop_map(|v| PauliString::new(v.into_iter().map(Pauli::from_index).collect()))
    }

    proptest! {
        #[test]
        fn product_weights_sum_to_one(p in 0.0f64..=1.0, n in 1usize..5) {
            let ch = local_depolarizing(n, p).unwrap();
            let s: f64 = ch.enumerate().unwrap().iter().map(|e| e.1).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn two_sided_pauli_reduces_to_one_side(p in pauli_string(2), q in pauli_string(2)) {
            // (P ⊗ Q)|Φ+> = (P Qᵀ ⊗ I)|Φ+>
            let epr = epr_state(2).unwrap();
            let a = epr.to_matrix();
            let pm = crate::qcore::pauli_matrix(&p);
            let qm = crate::qcore::pauli_matrix(&q);
            let lhs = &pm * &a * qm.transpose();
            let rhs = &pm * qm.transpose() * &a;
            prop_assert!(max_abs_diff(lhs.as_ref(), rhs.as_ref()) < 1e-14);
        }
    }
}
