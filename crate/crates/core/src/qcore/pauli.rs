use std::fmt;
use std::str::FromStr;

use faer::{Mat, c64};

use crate::error::{Error, Result};
use crate::linalg::{CMat, ONE, ZERO, cplx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn matrix(self) -> CMat {
        let i = cplx(0.0, 1.0);
        let m = [[ONE, ZERO], [ZERO, ONE]];
        let entries = match self {
            Pauli::I => m,
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -i], [i, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        };
        Mat::from_fn(2, 2, |r, c| entries[r][c])
    }

    /// Single-qubit product a·b = i^k c, returned as (c, k).
    fn mul(self, other: Pauli) -> (Pauli, u8) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (p, 0),
            (X, X) | (Y, Y) | (Z, Z) => (I, 0),
            (X, Y) => (Z, 1),
            (Y, X) => (Z, 3),
            (Y, Z) => (X, 1),
            (Z, Y) => (X, 3),
            (Z, X) => (Y, 1),
            (X, Z) => (Y, 3),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator with a phase i^k. Qubit 0 is the most significant
/// tensor factor, so "ZI" is Z⊗I.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: u8,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        PauliString { letters, phase: 0 }
    }

    pub fn with_phase(letters: Vec<Pauli>, phase: u8) -> Self {
        PauliString { letters, phase: phase & 3 }
    }

    pub fn identity(n: usize) -> Self {
        PauliString::new(vec![Pauli::I; n])
    }

    /// Builds a string from base-4 digits, most significant qubit first.
    pub fn from_index(n: usize, mut idx: usize) -> Self {
        let mut letters = vec![Pauli::I; n];
        for q in (0..n).rev() {
            letters[q] = Pauli::from_index(idx & 3);
            idx >>= 2;
        }
        PauliString::new(letters)
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = p;
        PauliString::new(letters)
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Exponent k of the phase i^k.
    pub fn phase_power(&self) -> u8 {
        self.phase
    }

    pub fn phase(&self) -> c64 {
        match self.phase {
            0 => cplx(1.0, 0.0),
            1 => cplx(0.0, 1.0),
            2 => cplx(-1.0, 0.0),
            _ => cplx(0.0, -1.0),
        }
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn has_x_component(&self) -> bool {
        self.letters.iter().any(|p| p.has_x())
    }

    /// Bit masks over the 2^n computational index (qubit 0 = most significant bit).
    pub fn x_mask(&self) -> usize {
        self.mask(Pauli::has_x)
    }

    pub fn z_mask(&self) -> usize {
        self.mask(Pauli::has_z)
    }

    fn mask(&self, f: fn(Pauli) -> bool) -> usize {
        let n = self.n();
        self.letters.iter().enumerate().filter(|(_, p)| f(**p)).fold(0, |acc, (q, _)| acc | (1 << (n - 1 - q)))
    }

    pub fn num_y(&self) -> usize {
        self.letters.iter().filter(|&&p| p == Pauli::Y).count()
    }

    /// Coefficient c(x) with P|x> = c(x)|x ⊕ x_mask>.
    pub fn column_coefficient(&self, x: usize) -> c64 {
        let k = (self.phase as usize + self.num_y()) & 3;
        let sign = if (x & self.z_mask()).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        let base = match k {
            0 => cplx(1.0, 0.0),
            1 => cplx(0.0, 1.0),
            2 => cplx(-1.0, 0.0),
            _ => cplx(0.0, -1.0),
        };
        base * sign
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n() != other.n() {
            return Err(Error::Dimension { expected: self.n(), got: other.n() });
        }
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                let (c, k) = a.mul(*b);
                phase += k;
                c
            })
            .collect();
        Ok(PauliString::with_phase(letters, phase))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Restriction to a contiguous range of qubits, phase dropped.
    pub fn restrict(&self, range: std::ops::Range<usize>) -> PauliString {
        PauliString::new(self.letters[range].to_vec())
    }

    /// Computes P·A for a matrix A with 2^n rows without forming P.
    pub fn apply_left(&self, a: &CMat) -> CMat {
        let d = a.nrows();
        assert_eq!(d, 1 << self.n());
        let xm = self.x_mask();
        let coef: Vec<c64> = (0..d).map(|x| self.column_coefficient(x)).collect();
        Mat::from_fn(d, a.ncols(), |r, c| {
            let x = r ^ xm;
            coef[x] * a[(x, c)]
        })
    }

    /// Computes A·P for a matrix A with 2^n columns.
    pub fn apply_right(&self, a: &CMat) -> CMat {
        let d = a.ncols();
        assert_eq!(d, 1 << self.n());
        let xm = self.x_mask();
        // (A P)[r, x] = A[r, x ⊕ xm] · c(x)
        Mat::from_fn(a.nrows(), d, |r, x| a[(r, x ^ xm)] * self.column_coefficient(x))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for p in &self.letters {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else {
            (0, s)
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Domain(format!("invalid Pauli letter '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Domain("empty Pauli string".into()));
        }
        Ok(PauliString::with_phase(letters, phase))
    }
}

/// Dense matrix of a Pauli string including its phase.
pub fn pauli_matrix(p: &PauliString) -> CMat {
    let d = 1usize << p.n();
    let xm = p.x_mask();
    let mut m = Mat::zeros(d, d);
    for x in 0..d {
        m[(x ^ xm, x)] = p.column_coefficient(x);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_all, max_abs_diff, trace};
    use proptest::prelude::*;

    fn naive(p: &PauliString) -> CMat {
        let factors: Vec<CMat> = p.letters().iter().map(|l| l.matrix()).collect();
        let mut m = kron_all(&factors);
        let ph = p.phase();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                m[(i, j)] *= ph;
            }
        }
        m
    }

    #[test]
    fn zi_is_diag_1_1_m1_m1() {
        let p: PauliString = "ZI".parse().unwrap();
        let m = pauli_matrix(&p);
        let expect = [1.0, 1.0, -1.0, -1.0];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { expect[i] } else { 0.0 };
                assert_eq!(m[(i, j)], cplx(want, 0.0));
            }
        }
    }

    #[test]
    fn nonidentity_paulis_are_traceless() {
        for idx in 1..16 {
            let p = PauliString::from_index(2, idx);
            assert!(trace(pauli_matrix(&p).as_ref()).norm() < 1e-15);
        }
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let xz = x.mul(&z).unwrap();
        assert_eq!(xz.to_string(), "-iY");
        let zx = z.mul(&x).unwrap();
        assert_eq!(zx.to_string(), "iY");
        assert!(!x.commutes_with(&z));
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["XYZI", "-ZZ", "iX", "-iYI"] {
            let p: PauliString = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("XQ".parse::<PauliString>().is_err());
    }

    proptest! {
        #[test]
        fn matrix_matches_tensor_product(idx in 0usize..256, ph in 0u8..4) {
            let p = PauliString::with_phase(PauliString::from_index(4, idx).letters().to_vec(), ph);
            prop_assert!(max_abs_diff(pauli_matrix(&p).as_ref(), naive(&p).as_ref()) < 1e-15);
        }

        #[test]
        fn matrix_is_a_group_homomorphism(a in 0usize..64, b in 0usize..64) {
            let p = PauliString::from_index(3, a);
            let q = PauliString::from_index(3, b);
            let pq = p.mul(&q).unwrap();
            let lhs = pauli_matrix(&pq);
            let rhs = pauli_matrix(&p) * pauli_matrix(&q);
            prop_assert!(max_abs_diff(lhs.as_ref(), rhs.as_ref()) < 1e-14);
        }

        #[test]
        fn apply_left_and_right_match_dense(idx in 0usize..64) {
            let p = PauliString::from_index(3, idx);
            let a = Mat::from_fn(8, 8, |i, j| cplx((i * 3 + j) as f64, (i as f64) - (j as f64)));
            let pm = pauli_matrix(&p);
            prop_assert!(max_abs_diff(p.apply_left(&a).as_ref(), (&pm * &a).as_ref()) < 1e-12);
            prop_assert!(max_abs_diff(p.apply_right(&a).as_ref(), (&a * &pm).as_ref()) < 1e-12);
        }

        #[test]
        fn commutation_matches_matrices(a in 0usize..64, b in 0usize..64) {
            let p = PauliString::from_index(3, a);
            let q = PauliString::from_index(3, b);
            let pm = pauli_matrix(&p);
            let qm = pauli_matrix(&q);
            let comm = &pm * &qm - &qm * &pm;
            let commute = crate::linalg::max_abs(comm.as_ref()) < 1e-12;
            prop_assert_eq!(commute, p.commutes_with(&q));
        }
    }
}
