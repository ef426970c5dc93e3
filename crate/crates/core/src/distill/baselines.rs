//! Recurrence and one-way hashing baselines.

use crate::analytics::binary_entropy;
use crate::error::{Error, Result};
use crate::noise::BellDiagonal;

/// One recurrence round on two copies: returns the surviving state and the
/// probability that the parity check passes.
pub fn recurrence_round(s: &BellDiagonal) -> Result<(BellDiagonal, f64)> {
    let BellDiagonal { p00, p01, p10, p11 } = *s;
    let pass = (p00 + p10).powi(2) + (p01 + p11).powi(2);
    if pass <= 0.0 {
        return Err(Error::Numerical("recurrence check never passes".into()));
    }
    let out = BellDiagonal::new(
        (p00 * p00 + p10 * p10) / pass,
        (p01 * p01 + p11 * p11) / pass,
        2.0 * p00 * p10 / pass,
        2.0 * p01 * p11 / pass,
    )?;
    Ok((out, pass))
}

/// `rounds` recurrence rounds; the yield gains a factor p_pass/2 per round.
pub fn iterate_recurrence(s: &BellDiagonal, rounds: usize) -> Result<(BellDiagonal, f64)> {
    let mut state = *s;
    let mut y = 1.0;
    for _ in 0..rounds {
        let (next, pass) = recurrence_round(&state)?;
        state = next;
        y *= pass / 2.0;
    }
    Ok((state, y))
}

/// Asymptotic one-way hashing yield max(0, 1 − H(e_b) − H(e_p)).
pub fn hashing_yield(e_b: f64, e_p: f64) -> Result<f64> {
    for (name, e) in [("e_b", e_b), ("e_p", e_p)] {
        if !(0.0..=0.5).contains(&e) {
            return Err(Error::Domain(format!("{name} must lie in [0, 1/2], got {e}")));
        }
    }
    Ok((1.0 - binary_entropy(e_b)? - binary_entropy(e_p)?).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_pairs_are_fixed() {
        let s = BellDiagonal::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let (o, pass) = recurrence_round(&s).unwrap();
        assert_eq!(o, s);
        assert_eq!(pass, 1.0);
        let (o0, y0) = iterate_recurrence(&s, 0).unwrap();
        assert_eq!((o0, y0), (s, 1.0));
    }

    #[test]
    fn werner_round_arithmetic() {
        let (o, pass) = recurrence_round(&BellDiagonal::werner(0.2).unwrap()).unwrap();
        assert!((pass - 0.82).abs() < 1e-15);
        assert!((o.p00 - (0.85f64 * 0.85 + 0.05 * 0.05) / 0.82).abs() < 1e-15);
        // two rounds compose the single-round arithmetic
        let (o2, y2) = iterate_recurrence(&BellDiagonal::werner(0.2).unwrap(), 2).unwrap();
        let (again, pass2) = recurrence_round(&o).unwrap();
        assert!((o2.p00 - again.p00).abs() < 1e-15);
        assert!((y2 - pass * pass2 / 4.0).abs() < 1e-15);
        assert!(y2 <= 0.25);
    }

    #[test]
    fn fidelity_increases_below_two_thirds() {
        for k in 1..67 {
            let p = k as f64 * 0.01;
            if p >= 2.0 / 3.0 {
                break;
            }
            let w = BellDiagonal::werner(p).unwrap();
            let (o, _) = recurrence_round(&w).unwrap();
            assert!(o.p00 > w.p00, "p={p}");
        }
    }

    #[test]
    fn hashing_threshold() {
        assert_eq!(hashing_yield(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(hashing_yield(0.5, 0.0).unwrap(), 0.0);
        assert!(hashing_yield(0.105, 0.105).unwrap() > 0.0);
        assert_eq!(hashing_yield(0.115, 0.115).unwrap(), 0.0);
    }
}
