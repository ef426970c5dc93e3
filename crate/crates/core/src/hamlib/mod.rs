//! Device and random Hamiltonian families with cached spectra.
//!
//! Builders take physical angular frequencies and store the matrix in native
//! units: H_native = H_phys · τ, where τ = 1/(2π) of the family's time unit
//! (μs for Rydberg arrays, ms for ions). One native time unit is τ.

mod gaps;
mod random;

use std::f64::consts::PI;
use std::fmt;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{CMat, cplx, diag_real};
use crate::qcore::{PauliString, SpectralDecomposition, eigendecompose};

pub use gaps::{GapReport, check_gap_nondegeneracy};
pub use random::{
    CliffordGate, clifford_from_gates, haar_unitary_with, pauli_coefficients, random_clifford_gates,
    sample_haar_unitary, sample_random_clifford,
};

/// Largest qubit count any builder accepts.
pub const MAX_QUBITS: usize = 12;

const DIAGONAL_RETRIES: u64 = 32;
const TWO_PI: f64 = 2.0 * PI;

/// Physical unit of one native time unit (before the 1/(2π) factor).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeUnit {
    Microsecond,
    Millisecond,
    /// Dimensionless families (random spectra).
    Arbitrary,
}

impl TimeUnit {
    pub fn label(self) -> &'static str {
        match self {
            TimeUnit::Microsecond => "us",
            TimeUnit::Millisecond => "ms",
            TimeUnit::Arbitrary => "arb",
        }
    }

    /// Length of one native time unit in this unit.
    pub fn native_unit(self) -> f64 {
        match self {
            TimeUnit::Arbitrary => 1.0,
            _ => 1.0 / TWO_PI,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianFamily {
    Diagonal,
    /// j0, b in rad/ms.
    TfimPeriodic {
        j0: f64,
        b: f64,
    },
    /// j0, b in rad/ms.
    TrappedIon {
        j0: f64,
        b: f64,
        alpha: f64,
    },
    /// omega, detuning in rad/μs; c6 in rad·μm⁶/μs; spacing in μm.
    Rydberg {
        omega: f64,
        detuning: f64,
        c6: f64,
        spacing: f64,
        phi: f64,
    },
    /// U D U† with Haar U and a random gap-nondegenerate D.
    HaarRandom,
    /// C D C† with C a random Clifford circuit of depth·n gates.
    CliffordDiagonal {
        depth: usize,
    },
}

impl HamiltonianFamily {
    pub const NAMES: [&'static str; 6] =
        ["diagonal", "tfim_periodic", "trapped_ion", "rydberg", "haar_random", "clifford_diagonal"];

    pub fn name(&self) -> &'static str {
        match self {
            HamiltonianFamily::Diagonal => "diagonal",
            HamiltonianFamily::TfimPeriodic { .. } => "tfim_periodic",
            HamiltonianFamily::TrappedIon { .. } => "trapped_ion",
            HamiltonianFamily::Rydberg { .. } => "rydberg",
            HamiltonianFamily::HaarRandom => "haar_random",
            HamiltonianFamily::CliffordDiagonal { .. } => "clifford_diagonal",
        }
    }

    /// Family with its default device parameters; `n` sets the Clifford depth.
    pub fn default_named(name: &str, n: usize) -> Result<Self> {
        Ok(match name {
            "diagonal" => HamiltonianFamily::Diagonal,
            "tfim_periodic" | "tfim" => HamiltonianFamily::TfimPeriodic { j0: TWO_PI, b: 2.0 * TWO_PI },
            "trapped_ion" | "ion" => HamiltonianFamily::TrappedIon { j0: TWO_PI, b: 2.0 * TWO_PI, alpha: 1.0 },
            "rydberg" => HamiltonianFamily::Rydberg {
                omega: TWO_PI,
                detuning: 2.5 * TWO_PI,
                c6: 862_890.0 * TWO_PI,
                spacing: 6.0,
                phi: 0.0,
            },
            "haar_random" | "haar" => HamiltonianFamily::HaarRandom,
            "clifford_diagonal" | "clifford" => HamiltonianFamily::CliffordDiagonal { depth: 3 * n.max(1) },
            other => {
                return Err(Error::Config(format!(
                    "unknown Hamiltonian family '{other}' (expected one of {})",
                    Self::NAMES.join(", ")
                )));
            }
        })
    }

    pub fn time_unit(&self) -> TimeUnit {
        match self {
            HamiltonianFamily::Rydberg { .. } => TimeUnit::Microsecond,
            HamiltonianFamily::TfimPeriodic { .. } | HamiltonianFamily::TrappedIon { .. } => TimeUnit::Millisecond,
            _ => TimeUnit::Arbitrary,
        }
    }

    /// Real parameters as (name, value) pairs, for manifests.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            HamiltonianFamily::TfimPeriodic { j0, b } => vec![("j0", j0), ("b", b)],
            HamiltonianFamily::TrappedIon { j0, b, alpha } => vec![("j0", j0), ("b", b), ("alpha", alpha)],
            HamiltonianFamily::Rydberg { omega, detuning, c6, spacing, phi } => {
                vec![("omega", omega), ("detuning", detuning), ("c6", c6), ("spacing", spacing), ("phi", phi)]
            }
            HamiltonianFamily::CliffordDiagonal { depth } => vec![("depth", depth as f64)],
            _ => vec![],
        }
    }

    /// Hadamard for device families, computational for the Haar family.
    pub fn default_basis_is_hadamard(&self) -> bool {
        !matches!(self, HamiltonianFamily::HaarRandom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub family: HamiltonianFamily,
    pub n: usize,
    pub seed: u64,
}

impl HamiltonianSpec {
    pub fn new(family: HamiltonianFamily, n: usize, seed: u64) -> Self {
        HamiltonianSpec { family, n, seed }
    }

    pub fn named(name: &str, n: usize, seed: u64) -> Result<Self> {
        Ok(HamiltonianSpec { family: HamiltonianFamily::default_named(name, n)?, n, seed })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("Hamiltonian needs n >= 1".into()));
        }
        if self.n > MAX_QUBITS {
            return Err(Error::Capacity(format!("{} qubits exceeds the {MAX_QUBITS}-qubit limit", self.n)));
        }
        for (k, v) in self.family.params() {
            // alpha = inf is the nearest-neighbour limit
            if v.is_nan() || (v.is_infinite() && k != "alpha") {
                return Err(Error::Domain(format!("parameter {k} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<SpectralHamiltonian> {
        self.validate()?;
        let n = self.n;
        match self.family {
            HamiltonianFamily::Diagonal => build_diagonal(n, self.seed),
            HamiltonianFamily::TfimPeriodic { j0, b } => build_tfim_periodic(n, j0, b),
            HamiltonianFamily::TrappedIon { j0, b, alpha } => build_trapped_ion(n, j0, b, alpha),
            HamiltonianFamily::Rydberg { omega, detuning, c6, spacing, phi } => {
                build_rydberg(n, omega, detuning, c6, spacing, phi)
            }
            HamiltonianFamily::HaarRandom => build_haar_random(n, self.seed),
            HamiltonianFamily::CliffordDiagonal { depth } => build_clifford_diagonal(n, depth, self.seed),
        }
    }
}

impl fmt::Display for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={}, seed={}", self.family.name(), self.n, self.seed)?;
        for (k, v) in self.family.params() {
            write!(f, ", {k}={v}")?;
        }
        write!(f, ")")
    }
}

/// Hermitian matrix in native units with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct SpectralHamiltonian {
    pub matrix: CMat,
    pub spectrum: SpectralDecomposition,
    pub spec: HamiltonianSpec,
    pub time_unit: TimeUnit,
    /// Two gaps closer than this are treated as equal by the delta-limit twirl.
    pub gap_tol: f64,
}

impl SpectralHamiltonian {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.spectrum.eigenvectors
    }

    /// e^{-iHt}, t in native units.
    pub fn evolution(&self, t: f64) -> CMat {
        self.spectrum.evolution(t)
    }

    /// Physical duration of `t` native units, in `time_unit`.
    pub fn physical_time(&self, t: f64) -> f64 {
        t * self.time_unit.native_unit()
    }

    pub fn gap_report(&self) -> GapReport {
        check_gap_nondegeneracy(self.eigenvalues(), self.gap_tol)
    }

    fn from_matrix(matrix: CMat, spec: HamiltonianSpec) -> Result<Self> {
        let spectrum = eigendecompose(&matrix)?;
        Self::from_parts(matrix, spectrum, spec)
    }

    fn from_parts(matrix: CMat, spectrum: SpectralDecomposition, spec: HamiltonianSpec) -> Result<Self> {
        if spectrum.eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        let gap_tol = 1e-9 * spectrum.spectral_diameter().max(f64::MIN_POSITIVE);
        let time_unit = spec.family.time_unit();
        Ok(SpectralHamiltonian { matrix, spectrum, spec, time_unit, gap_tol })
    }
}

/// Σ_k w_k P_k as a dense matrix.
pub fn pauli_sum(n: usize, terms: &[(f64, PauliString)]) -> Result<CMat> {
    let d = 1usize << n;
    let mut h = Mat::zeros(d, d);
    for (w, p) in terms {
        if p.n() != n {
            return Err(Error::Dimension { expected: n, got: p.n() });
        }
        let xm = p.x_mask();
        for x in 0..d {
            h[(x ^ xm, x)] += p.column_coefficient(x) * *w;
        }
    }
    Ok(h)
}

fn check_n(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::Domain(format!("{what} needs n >= {min}, got {n}")));
    }
    if n > MAX_QUBITS {
        return Err(Error::Capacity(format!("{n} qubits exceeds the {MAX_QUBITS}-qubit limit")));
    }
    Ok(())
}

fn two_site(n: usize, i: usize, j: usize, a: crate::qcore::Pauli, b: crate::qcore::Pauli) -> PauliString {
    let mut letters = vec![crate::qcore::Pauli::I; n];
    letters[i] = a;
    letters[j] = b;
    PauliString::new(letters)
}

/// Linear Rydberg chain; ground |g> = |0>, Rydberg |r> = |1>.
pub fn build_rydberg(
    n: usize,
    omega: f64,
    detuning: f64,
    c6: f64,
    spacing: f64,
    phi: f64,
) -> Result<SpectralHamiltonian> {
    check_n(n, 1, "rydberg")?;
    if spacing.is_nan() || spacing <= 0.0 {
        return Err(Error::Domain(format!("spacing must be positive, got {spacing}")));
    }
    let tau = TimeUnit::Microsecond.native_unit();
    let d = 1usize << n;
    let bit = |j: usize| 1usize << (n - 1 - j);
    let mut h: CMat = Mat::zeros(d, d);
    for x in 0..d {
        let mut diag = 0.0;
        for j in 0..n {
            if x & bit(j) != 0 {
                diag -= detuning;
                for k in j + 1..n {
                    if x & bit(k) != 0 {
                        diag += c6 / (spacing * (k - j) as f64).powi(6);
                    }
                }
            }
        }
        h[(x, x)] = cplx(diag * tau, 0.0);
        for j in 0..n {
            // <x⊕b|(e^{iφ}|g><r| + h.c.)|x>: r→g picks e^{iφ}, g→r picks e^{-iφ}
            let s = if x & bit(j) != 0 { phi } else { -phi };
            h[(x ^ bit(j), x)] += cplx(s.cos(), s.sin()) * (0.5 * omega * tau);
        }
    }
    let spec = HamiltonianSpec::new(HamiltonianFamily::Rydberg { omega, detuning, c6, spacing, phi }, n, 0);
    SpectralHamiltonian::from_matrix(h, spec)
}

/// Power-law XX couplings plus a transverse Z field.
pub fn build_trapped_ion(n: usize, j0: f64, b: f64, alpha: f64) -> Result<SpectralHamiltonian> {
    use crate::qcore::Pauli::{X, Z};
    check_n(n, 2, "trapped_ion")?;
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
    }
    let tau = TimeUnit::Millisecond.native_unit();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = j0 / ((j - i) as f64).powf(alpha);
            if w != 0.0 {
                terms.push((w * tau, two_site(n, i, j, X, X)));
            }
        }
        terms.push((b * tau, PauliString::single(n, i, Z)));
    }
    let spec = HamiltonianSpec::new(HamiltonianFamily::TrappedIon { j0, b, alpha }, n, 0);
    SpectralHamiltonian::from_matrix(pauli_sum(n, &terms)?, spec)
}

/// Nearest-neighbour XX ring plus a transverse Z field.
pub fn build_tfim_periodic(n: usize, j0: f64, b: f64) -> Result<SpectralHamiltonian> {
    use crate::qcore::Pauli::{X, Z};
    check_n(n, 3, "tfim_periodic")?;
    let tau = TimeUnit::Millisecond.native_unit();
    let mut terms = Vec::new();
    for i in 0..n {
        terms.push((j0 * tau, two_site(n, i, (i + 1) % n, X, X)));
        terms.push((b * tau, PauliString::single(n, i, Z)));
    }
    let spec = HamiltonianSpec::new(HamiltonianFamily::TfimPeriodic { j0, b }, n, 0);
    SpectralHamiltonian::from_matrix(pauli_sum(n, &terms)?, spec)
}

/// Tolerance used to accept a random spectrum. Beyond 7 qubits the d²/2 gaps
/// are so dense that 1e-9 collisions are expected, so the threshold follows
/// the typical nearest-gap distance 2π/N² instead.
fn random_spectrum_tol(n: usize) -> f64 {
    if n <= 7 {
        1e-9
    } else {
        let d = (1usize << n) as f64;
        let gaps = d * (d - 1.0) / 2.0;
        1e-3 * TWO_PI / (gaps * gaps)
    }
}

/// Uniform spectrum spread over [0, 2π], resampled until gap-nondegenerate.
fn random_spectrum(n: usize, seed: u64) -> Result<(Vec<f64>, f64)> {
    let d = 1usize << n;
    let tol = random_spectrum_tol(n);
    for attempt in 0..DIAGONAL_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            continue;
        }
        let lam: Vec<f64> = raw.iter().map(|r| (r - lo) / (hi - lo) * TWO_PI).collect();
        if d < 2 || check_gap_nondegeneracy(&lam, tol).pass {
            return Ok((lam, tol));
        }
    }
    Err(Error::Numerical(format!("no gap-nondegenerate spectrum after {DIAGONAL_RETRIES} draws (seed {seed})")))
}

pub fn build_diagonal(n: usize, seed: u64) -> Result<SpectralHamiltonian> {
    check_n(n, 1, "diagonal")?;
    let (lam, tol) = random_spectrum(n, seed)?;
    let spec = HamiltonianSpec::new(HamiltonianFamily::Diagonal, n, seed);
    let mut h = SpectralHamiltonian::from_matrix(diag_real(&lam), spec)?;
    h.gap_tol = h.gap_tol.min(tol);
    Ok(h)
}

/// Conjugates a random diagonal spectrum by `u`; the eigenbasis is u's columns.
fn rotated_spectrum(n: usize, u: CMat, seed: u64, spec: HamiltonianSpec) -> Result<SpectralHamiltonian> {
    let (lam, tol) = random_spectrum(n, seed)?;
    let d = lam.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| lam[a].total_cmp(&lam[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| lam[i]).collect();
    let eigenvectors = Mat::from_fn(d, d, |i, j| u[(i, order[j])]);
    let ud = Mat::from_fn(d, d, |i, j| eigenvectors[(i, j)] * eigenvalues[j]);
    let mut matrix: CMat = &ud * eigenvectors.adjoint();
    // exact Hermitian symmetrization
    for j in 0..d {
        matrix[(j, j)].im = 0.0;
        for i in j + 1..d {
            let avg = (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5;
            matrix[(i, j)] = avg;
            matrix[(j, i)] = avg.conj();
        }
    }
    let spectrum = SpectralDecomposition { eigenvalues, eigenvectors };
    let mut h = SpectralHamiltonian::from_parts(matrix, spectrum, spec)?;
    h.gap_tol = h.gap_tol.min(tol);
    Ok(h)
}

pub fn build_haar_random(n: usize, seed: u64) -> Result<SpectralHamiltonian> {
    check_n(n, 1, "haar_random")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4841_4152);
    let u = haar_unitary_with(1 << n, &mut rng)?;
    rotated_spectrum(n, u, seed, HamiltonianSpec::new(HamiltonianFamily::HaarRandom, n, seed))
}

pub fn build_clifford_diagonal(n: usize, depth: usize, seed: u64) -> Result<SpectralHamiltonian> {
    check_n(n, 1, "clifford_diagonal")?;
    let c = sample_random_clifford(n, depth, seed ^ 0x434c_4946)?;
    rotated_spectrum(n, c, seed, HamiltonianSpec::new(HamiltonianFamily::CliffordDiagonal { depth }, n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ZERO, hermiticity_deviation, identity, kron_all, max_abs, max_abs_diff, scale};
    use crate::qcore::Pauli;

    fn zeros(d: usize) -> CMat {
        Mat::zeros(d, d)
    }

    fn op_on(n: usize, i: usize, o: &CMat) -> CMat {
        let f: Vec<CMat> = (0..n).map(|k| if k == i { o.clone() } else { identity(2) }).collect();
        kron_all(&f)
    }

    fn naive_ion(n: usize, j0: f64, b: f64, alpha: f64) -> CMat {
        let (x, z) = (Pauli::X.matrix(), Pauli::Z.matrix());
        let d = 1 << n;
        let mut h = zeros(d);
        for i in 0..n {
            for j in i + 1..n {
                let w = j0 / ((j - i) as f64).powf(alpha);
                h += scale(&(op_on(n, i, &x) * op_on(n, j, &x)), cplx(w, 0.0));
            }
            h += scale(&op_on(n, i, &z), cplx(b, 0.0));
        }
        h
    }

    fn naive_rydberg(n: usize, om: f64, de: f64, c: f64, a: f64, phi: f64) -> CMat {
        let d = 1 << n;
        let drive = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => cplx(phi.cos(), phi.sin()),
            (1, 0) => cplx(phi.cos(), -phi.sin()),
            _ => ZERO,
        });
        let nn = diag_real(&[0.0, 1.0]);
        let mut h = zeros(d);
        for j in 0..n {
            h += scale(&op_on(n, j, &drive), cplx(om / 2.0, 0.0));
            h -= scale(&op_on(n, j, &nn), cplx(de, 0.0));
            for k in j + 1..n {
                let v = c / (a * (k - j) as f64).powi(6);
                h += scale(&(op_on(n, j, &nn) * op_on(n, k, &nn)), cplx(v, 0.0));
            }
        }
        h
    }

    fn assert_reconstructs(h: &SpectralHamiltonian) {
        assert!(hermiticity_deviation(h.matrix.as_ref()) < 1e-10);
        let r = h.spectrum.reconstruct();
        assert!(max_abs_diff(r.as_ref(), h.matrix.as_ref()) <= 1e-9 * max_abs(h.matrix.as_ref()).max(1.0));
    }

    #[test]
    fn trapped_ion_matches_naive_builder() {
        let h = HamiltonianSpec::named("trapped_ion", 5, 0).unwrap().build().unwrap();
        let tau = 1.0 / TWO_PI;
        let naive = naive_ion(5, TWO_PI * tau, 2.0 * TWO_PI * tau, 1.0);
        assert!(max_abs_diff(h.matrix.as_ref(), naive.as_ref()) < 1e-12);
        assert_reconstructs(&h);
    }

    #[test]
    fn trapped_ion_xx_limit() {
        let h = build_trapped_ion(2, TWO_PI, 0.0, 1.0).unwrap();
        let e = h.eigenvalues();
        for (got, want) in e.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let h3 = build_trapped_ion(3, TWO_PI, 0.0, f64::INFINITY).unwrap();
        // only X0X1 and X1X2 survive: |0 0 0> couples to |1 1 0> and |0 1 1>
        assert!(h3.matrix[(0b110, 0)].norm() > 0.5);
        assert!(h3.matrix[(0b101, 0)].norm() < 1e-12);
    }

    #[test]
    fn rydberg_matches_naive_builder() {
        let (om, de, c, a, phi) = (TWO_PI, 2.5 * TWO_PI, 862_890.0 * TWO_PI, 6.0, 0.3);
        let h = build_rydberg(4, om, de, c, a, phi).unwrap();
        let tau = 1.0 / TWO_PI;
        let naive = naive_rydberg(4, om * tau, de * tau, c * tau, a, phi);
        assert!(max_abs_diff(h.matrix.as_ref(), naive.as_ref()) < 1e-9);
        assert_reconstructs(&h);
    }

    #[test]
    fn rydberg_interaction_only_limit() {
        let c = 862_890.0 * TWO_PI;
        let h = build_rydberg(2, 0.0, 0.0, c, 6.0, 0.0).unwrap();
        let v12 = 862_890.0 / 6f64.powi(6);
        assert!((h.matrix[(3, 3)].re - v12).abs() < 1e-9);
        for i in 0..3 {
            assert!(h.matrix[(i, i)].norm() < 1e-12);
        }
        assert!(h.matrix.as_ref().col(1).iter().enumerate().all(|(i, z)| i == 1 || z.norm() == 0.0));
        assert!(build_rydberg(2, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tfim_three_site_ring_spectrum() {
        let h = build_tfim_periodic(3, TWO_PI, 0.0).unwrap();
        // independent route: X0X1 + X1X2 + X2X0 is diagonal in the X basis
        let mut want: Vec<f64> = (0..8usize)
            .map(|s| {
                let sg = |q: usize| if s >> q & 1 == 1 { -1.0 } else { 1.0 };
                sg(0) * sg(1) + sg(1) * sg(2) + sg(2) * sg(0)
            })
            .collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in h.eigenvalues().iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
        assert!(build_tfim_periodic(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn tfim_translation_invariant() {
        let n = 4;
        let h = build_tfim_periodic(n, TWO_PI, 2.0 * TWO_PI).unwrap();
        let d = 1 << n;
        let shift = |x: usize| ((x >> 1) | ((x & 1) << (n - 1))) & (d - 1);
        let moved = Mat::from_fn(d, d, |i, j| h.matrix[(shift(i), shift(j))]);
        assert!(max_abs_diff(moved.as_ref(), h.matrix.as_ref()) < 1e-12);
    }

    #[test]
    fn tfim_free_spins() {
        let h = build_tfim_periodic(3, 0.0, TWO_PI).unwrap();
        let want = [-3.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 3.0];
        for (g, w) in h.eigenvalues().iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn tfim_four_sites_is_gap_degenerate() {
        let h = HamiltonianSpec::named("tfim_periodic", 4, 0).unwrap().build().unwrap();
        assert!(!h.gap_report().pass);
    }

    #[test]
    fn diagonal_is_gap_nondegenerate_and_reproducible() {
        for seed in 0..5 {
            let h = build_diagonal(4, seed).unwrap();
            assert!(check_gap_nondegeneracy(h.eigenvalues(), 1e-9).pass);
            assert!((h.spectrum.spectral_diameter() - TWO_PI).abs() < 1e-12);
            let again = build_diagonal(4, seed).unwrap();
            assert_eq!(h.matrix, again.matrix);
        }
    }

    #[test]
    fn random_families_reconstruct() {
        for name in ["haar_random", "clifford_diagonal"] {
            let h = HamiltonianSpec::named(name, 3, 11).unwrap().build().unwrap();
            assert_reconstructs(&h);
            assert!(h.gap_report().pass);
        }
    }

    #[test]
    fn unknown_family_rejected() {
        assert!(matches!(HamiltonianSpec::named("ising", 3, 0), Err(Error::Config(_))));
    }

    #[test]
    fn native_time_units() {
        let h = HamiltonianSpec::named("trapped_ion", 3, 0).unwrap().build().unwrap();
        assert_eq!(h.time_unit.label(), "ms");
        assert!((h.physical_time(2.0) - 1.0 / PI).abs() < 1e-15);
    }
}
