//! Small dense helpers on top of faer.

use faer::{Mat, MatRef, c64};

pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };

#[inline]
pub fn cplx(re: f64, im: f64) -> c64 {
    c64 { re, im }
}

#[inline]
pub fn norm_sqr(z: c64) -> f64 {
    z.re * z.re + z.im * z.im
}

/// e^{-i x}
#[inline]
pub fn phase(x: f64) -> c64 {
    let (s, c) = x.sin_cos();
    c64 { re: c, im: -s }
}

pub fn identity(d: usize) -> CMat {
    Mat::identity(d, d)
}

pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn kron_all(factors: &[CMat]) -> CMat {
    let mut out = identity(1);
    for f in factors {
        out = kron(out.as_ref(), f.as_ref());
    }
    out
}

pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let d = a[(i, j)] - b[(i, j)];
            m = m.max(d.norm());
        }
    }
    m
}

pub fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn hermiticity_deviation(a: MatRef<'_, c64>) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..=j {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn trace(a: MatRef<'_, c64>) -> c64 {
    let mut t = ZERO;
    for i in 0..a.nrows().min(a.ncols()) {
        t += a[(i, i)];
    }
    t
}

pub fn frobenius_sqr(a: MatRef<'_, c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += norm_sqr(a[(i, j)]);
        }
    }
    s
}

/// Applies H^{⊗m} to the `m` most significant qubits of the row index, in place.
/// The row dimension must be a power of two with at least `m` qubits.
pub fn hadamard_top_rows(a: &mut CMat, m: usize) {
    let d = a.nrows();
    assert!(d.is_power_of_two() && (1usize << m) <= d);
    if m == 0 {
        return;
    }
    let dk = d >> m;
    let ncols = a.ncols();
    let scale = (0.5f64).sqrt();
    for q in 0..m {
        // qubit q counted from the most significant end
        let stride = dk << (m - 1 - q);
        for j in 0..ncols {
            let mut col = a.col_mut(j);
            let mut base = 0;
            while base < d {
                for off in 0..stride {
                    let i0 = base + off;
                    let i1 = i0 + stride;
                    let x = col[i0];
                    let y = col[i1];
                    col[i0] = (x + y) * scale;
                    col[i1] = (x - y) * scale;
                }
                base += 2 * stride;
            }
        }
    }
}

/// Single-qubit Hadamard matrix.
pub fn hadamard() -> CMat {
    let s = (0.5f64).sqrt();
    Mat::from_fn(2, 2, |i, j| if i == 1 && j == 1 { cplx(-s, 0.0) } else { cplx(s, 0.0) })
}

/// s·A
pub fn scale(a: &CMat, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

/// Copy of a real slice into a complex diagonal matrix.
pub fn diag_real(v: &[f64]) -> CMat {
    let d = v.len();
    Mat::from_fn(d, d, |i, j| if i == j { cplx(v[i], 0.0) } else { ZERO })
}

pub fn is_unitary(u: MatRef<'_, c64>, tol: f64) -> bool {
    if u.nrows() != u.ncols() {
        return false;
    }
    let p = u.adjoint() * u;
    max_abs_diff(p.as_ref(), identity(u.nrows()).as_ref()) <= tol
}

/// Sums in a fixed pairwise order so reductions do not depend on how work was split.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(identity(2).as_ref(), identity(4).as_ref());
        assert_eq!(max_abs_diff(k.as_ref(), identity(8).as_ref()), 0.0);
    }

    #[test]
    fn hadamard_top_rows_matches_dense_product() {
        let a = Mat::from_fn(8, 3, |i, j| cplx(i as f64 + 0.5 * j as f64, (i * j) as f64));
        let h = hadamard();
        let w = kron_all(&[h.clone(), h, identity(2)]);
        let expect = &w * &a;
        let mut got = a.clone();
        hadamard_top_rows(&mut got, 2);
        assert!(max_abs_diff(got.as_ref(), expect.as_ref()) < 1e-12);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let v: Vec<f64> = (0..1000).map(|x| x as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }
}
