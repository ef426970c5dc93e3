/// Result of the non-degenerate gap check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapReport {
    /// Smallest distance between two eigenvalues.
    pub min_spacing: f64,
    /// Smallest distance between two distinct positive gaps λ_i − λ_j.
    pub min_gap_collision: f64,
    pub pass: bool,
}

/// Checks that eigenvalues and all pairwise gaps are distinct within `tol`.
/// Sorting the d(d−1)/2 positive differences makes the collision scan linear.
pub fn check_gap_nondegeneracy(eigenvalues: &[f64], tol: f64) -> GapReport {
    let mut lam = eigenvalues.to_vec();
    lam.sort_by(f64::total_cmp);
    let min_spacing = lam.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let d = lam.len();
    let mut gaps = Vec::with_capacity(d * d.saturating_sub(1) / 2);
    for j in 0..d {
        for i in 0..j {
            gaps.push(lam[j] - lam[i]);
        }
    }
    gaps.sort_by(f64::total_cmp);
    let min_gap_collision = gaps.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    GapReport { min_spacing, min_gap_collision, pass: min_spacing > tol && min_gap_collision > tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(l: &[f64], tol: f64) -> bool {
        let d = l.len();
        for i in 0..d {
            for j in 0..d {
                if i != j && (l[i] - l[j]).abs() <= tol {
                    return false;
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        if i != j && k != m && (i, j) != (k, m) && (l[i] - l[j] - l[k] + l[m]).abs() <= tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    #[test]
    fn arithmetic_progression_fails() {
        assert!(!check_gap_nondegeneracy(&[0.0, 1.0, 2.0], 1e-9).pass);
    }

    #[test]
    fn generic_values_pass_and_match_brute_force() {
        let l = [0.0, 1.0, 2.7, 3.15];
        let r = check_gap_nondegeneracy(&l, 1e-6);
        assert!(r.pass);
        assert_eq!(r.pass, brute(&l, 1e-6));
        assert!((r.min_spacing - 0.45).abs() < 1e-12);
    }
}
