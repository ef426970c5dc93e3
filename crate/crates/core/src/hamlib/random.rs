use faer::{Mat, c64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{CMat, cplx};

/// Haar-distributed unitary from a Ginibre matrix and a phase-fixed QR.
pub fn sample_haar_unitary(dim: usize, seed: u64) -> Result<CMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(dim, &mut rng)
}

pub fn haar_unitary_with<R: Rng>(dim: usize, rng: &mut R) -> Result<CMat> {
    if dim < 2 {
        return Err(Error::Domain("Haar unitary needs dim >= 2".into()));
    }
    let s = (0.5f64).sqrt();
    let g = Mat::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        cplx(re * s, im * s)
    });
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let mut u = q;
    for j in 0..dim {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { cplx(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] *= ph;
        }
    }
    Ok(u)
}

/// Elementary Clifford gates; qubit 0 is the most significant bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Cnot { control: usize, target: usize },
}

/// Dense unitary of the circuit, gates applied in list order.
pub fn clifford_from_gates(n: usize, gates: &[CliffordGate]) -> Result<CMat> {
    let d = 1usize << n;
    let mut u: CMat = Mat::identity(d, d);
    for g in gates {
        apply_gate(&mut u, n, *g)?;
    }
    Ok(u)
}

fn apply_gate(u: &mut CMat, n: usize, g: CliffordGate) -> Result<()> {
    let d = 1usize << n;
    let bit = |q: usize| -> Result<usize> {
        if q >= n { Err(Error::Domain(format!("qubit {q} out of range for n={n}"))) } else { Ok(1usize << (n - 1 - q)) }
    };
    let cols = u.ncols();
    match g {
        CliffordGate::H(q) => {
            let b = bit(q)?;
            let s = (0.5f64).sqrt();
            for j in 0..cols {
                for i in 0..d {
                    if i & b == 0 {
                        let (x, y) = (u[(i, j)], u[(i | b, j)]);
                        u[(i, j)] = (x + y) * s;
                        u[(i | b, j)] = (x - y) * s;
                    }
                }
            }
        }
        CliffordGate::S(q) => {
            let b = bit(q)?;
            let ii = cplx(0.0, 1.0);
            for j in 0..cols {
                for i in 0..d {
                    if i & b != 0 {
                        u[(i, j)] *= ii;
                    }
                }
            }
        }
        CliffordGate::Cnot { control, target } => {
            if control == target {
                return Err(Error::Domain("CNOT control equals target".into()));
            }
            let (cb, tb) = (bit(control)?, bit(target)?);
            for j in 0..cols {
                for i in 0..d {
                    if i & cb != 0 && i & tb == 0 {
                        let x = u[(i, j)];
                        u[(i, j)] = u[(i | tb, j)];
                        u[(i | tb, j)] = x;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Random circuit of depth·n gates drawn uniformly from {H, S, CNOT}.
pub fn random_clifford_gates(n: usize, depth: usize, seed: u64) -> Result<Vec<CliffordGate>> {
    if n == 0 || depth == 0 {
        return Err(Error::Domain("random Clifford needs n >= 1 and depth >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = if n >= 2 { 3 } else { 2 };
    Ok((0..depth * n)
        .map(|_| match rng.random_range(0..kinds) {
            0 => CliffordGate::H(rng.random_range(0..n)),
            1 => CliffordGate::S(rng.random_range(0..n)),
            _ => {
                let control = rng.random_range(0..n);
                let mut target = rng.random_range(0..n - 1);
                if target >= control {
                    target += 1;
                }
                CliffordGate::Cnot { control, target }
            }
        })
        .collect())
}

pub fn sample_random_clifford(n: usize, depth: usize, seed: u64) -> Result<CMat> {
    clifford_from_gates(n, &random_clifford_gates(n, depth, seed)?)
}

/// Pauli-expansion coefficients tr(P A)/d for every n-qubit Pauli P.
pub fn pauli_coefficients(a: &CMat, n: usize) -> Vec<c64> {
    let d = 1usize << n;
    (0..1usize << (2 * n))
        .map(|idx| {
            let p = crate::qcore::PauliString::from_index(n, idx);
            let xm = p.x_mask();
            let mut acc = cplx(0.0, 0.0);
            // P[y ⊕ xm, y] = c(y), so tr(P A) = Σ_y c(y) A[y, y ⊕ xm]
            for x in 0..d {
                acc += p.column_coefficient(x ^ xm) * a[(x ^ xm, x)];
            }
            acc / d as f64
        })
        .collect()
}
