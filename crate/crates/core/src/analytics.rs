//! Closed-form evaluators: Haar limit, Clifford bound, diagonal key rate,
//! noise tolerance, and the fiber link / repeater models.

use crate::distill::baselines::iterate_recurrence;
use crate::error::{Error, Result};
use crate::noise::bell_diagonal_from_rates;

/// −x log₂x − (1−x) log₂(1−x), with 0·log 0 = 0.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy needs x in [0, 1], got {x}")));
    }
    Ok(h2(x))
}

fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 { 0.0 } else { -x * x.log2() - (1.0 - x) * (1.0 - x).log2() }
}

fn check_pairs(m: usize, n: usize) -> Result<()> {
    if n == 0 || m > n {
        return Err(Error::Domain(format!("need 0 <= m <= n and n >= 1, got m={m}, n={n}")));
    }
    Ok(())
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

/// Large-n Haar values (fidelity, yield) for identity weight c_I.
pub fn haar_limit_fidelity_yield(c_i: f64, m: usize, n: usize) -> Result<(f64, f64)> {
    check_unit("c_I", c_i)?;
    check_pairs(m, n)?;
    let q = 0.5f64.powi(m as i32);
    let surv = c_i + q * (1.0 - c_i);
    let f = if surv > 0.0 { c_i / surv } else { 0.0 };
    Ok((f, (c_i * (1.0 - q) + q) * (1.0 - m as f64 / n as f64)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CliffordBound {
    pub bound: f64,
    pub delta: f64,
    /// Per-n growth exponents of the two terms of Δ/(1−3p/4)^n; negative means decay.
    pub exponent1: f64,
    pub exponent2: f64,
}

/// Fidelity lower bound for H = C D C† with Clifford-rotated measurements.
pub fn clifford_fidelity_bound(p: f64, n: usize, m: usize, d_param: usize, delta: f64) -> Result<CliffordBound> {
    check_unit("p", p)?;
    if d_param == 0 || d_param > n {
        return Err(Error::Domain(format!("d must satisfy 1 <= d <= n, got d={d_param}, n={n}")));
    }
    if delta <= 0.0 {
        return Err(Error::Domain("delta must be positive".into()));
    }
    let nf = n as f64;
    let r = d_param as f64 / nf;
    let a = 1.0 - 0.75 * p;
    let e1 = 1.0 - h2(r) - r * 3f64.log2() - delta;
    let term1 = (-nf * e1).exp2();
    let (term2, exponent2) = if p == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        let e2 = (2.0 / (4.0 - 3.0 * p)).log2() + r * ((4.0 - 3.0 * p) / p).log2();
        ((-nf * e2).exp2(), 1.0 - r * ((4.0 - 3.0 * p) / p).log2())
    };
    let big_delta = term1 + term2;
    let an = a.powi(n as i32);
    let q = 0.5f64.powi(m as i32);
    let bound = 1.0 / (1.0 + (big_delta + q * (1.0 - big_delta - an)) / an);
    Ok(CliffordBound {
        bound,
        delta: big_delta,
        exponent1: (4.0 / (4.0 - 3.0 * p)).log2() - 1.0 + h2(r) + r * 3f64.log2() + delta,
        exponent2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QkdRate {
    pub rate: f64,
    pub e_b: f64,
    pub e_p: f64,
    /// Survival probability of the identical-outcome check.
    pub survival: f64,
}

/// Error rates and key rate of the diagonal-Hamiltonian protocol under
/// local depolarizing noise p.
pub fn diagonal_qkd_rate(p: f64, n: usize, m: usize) -> Result<QkdRate> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1), got {p}")));
    }
    if m >= n {
        return Err(Error::Domain(format!("need m < n, got m={m}, n={n}")));
    }
    let q = 0.5f64.powi(m as i32);
    // survival with an X component anywhere, and with none
    let sx = q * (1.0 - (1.0 - p / 2.0).powi(n as i32));
    let sc = (1.0 - 0.75 * p).powi(m as i32) * (1.0 - p / 2.0).powi((n - m) as i32);
    let surv = sx + sc;
    let e_b = q * (p / 2.0) / surv;
    let e_p = ((p / 4.0) / (1.0 - p / 2.0) * sc + 0.5 * sx) / surv;
    Ok(QkdRate { rate: surv * (1.0 - h2(e_p)) * (1.0 - m as f64 / n as f64), e_b, e_p, survival: surv })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceReport {
    pub p_tol: f64,
    pub error_rate_tol: f64,
    pub m_over_n: f64,
    /// False when the bracket held no sign change and p_tol was set to 0.
    pub bracketed: bool,
}

/// Bisection for the last point where `f` is positive, given f(lo) > 0 ≥ f(hi).
fn bisect_last_positive(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Asymptotic depolarizing tolerance for measured fraction m/n.
pub fn noise_tolerance(m_over_n: f64) -> Result<ToleranceReport> {
    if !(m_over_n > 0.0 && m_over_n <= 1.0) {
        return Err(Error::Domain(format!("m/n must lie in (0, 1], got {m_over_n}")));
    }
    let r = m_over_n;
    let hi = 2.0 / 3.0;
    // log of (1−p/2)^(1−r) (2−3p/2)^r
    let f = |p: f64| (1.0 - r) * (1.0 - p / 2.0).ln() + r * (2.0 - 1.5 * p).ln();
    let report = |p: f64, bracketed| ToleranceReport { p_tol: p, error_rate_tol: p / 2.0, m_over_n: r, bracketed };
    if r == 1.0 {
        return Ok(report(hi, true));
    }
    if !(f(0.0) > 0.0 && f(hi) <= 0.0) {
        return Ok(report(0.0, false));
    }
    let mut lo = 0.0;
    let mut up = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        let v = f(mid);
        if v.abs() < 1e-15 {
            return Ok(report(mid, true));
        }
        if v > 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
        if up - lo < 1e-15 {
            break;
        }
    }
    Ok(report(0.5 * (lo + up), true))
}

const TOLERANCE_GRID: usize = 4000;

/// Largest error rate p/2 at which 1 − f_ec·H(e_b) − H(e_p) stays positive
/// for the diagonal protocol at finite (n, m). Use f_ec = 1 for the plain balance.
pub fn finite_tolerance_with(n: usize, m: usize, f_ec: f64) -> Result<f64> {
    if m == 0 || m >= n {
        return Err(Error::Domain(format!("need 1 <= m < n, got m={m}, n={n}")));
    }
    let g = |p: f64| match diagonal_qkd_rate(p, n, m) {
        Ok(r) => 1.0 - f_ec * h2(r.e_b) - h2(r.e_p),
        Err(_) => -1.0,
    };
    let p_max = 2.0 / 3.0;
    let p0 = 1e-9;
    if g(p0) <= 0.0 {
        return Ok(0.0);
    }
    let step = (p_max - p0) / TOLERANCE_GRID as f64;
    let mut prev = p0;
    for k in 1..=TOLERANCE_GRID {
        let p = p0 + k as f64 * step;
        if g(p) <= 0.0 {
            return Ok(bisect_last_positive(g, prev, p, 1e-9) / 2.0);
        }
        prev = p;
    }
    Ok(p_max / 2.0)
}

pub fn finite_tolerance(n: usize, m: usize) -> Result<f64> {
    finite_tolerance_with(n, m, 1.0)
}

/// Best finite tolerance over m ∈ [1, n), returned with the maximizing m.
pub fn best_finite_tolerance(n: usize) -> Result<(f64, usize)> {
    if n < 2 {
        return Err(Error::Domain("need n >= 2".into()));
    }
    let mut best = (f64::NEG_INFINITY, 1);
    for m in 1..n {
        let v = finite_tolerance(n, m)?;
        if v > best.0 {
            best = (v, m);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    pub e_d: f64,
    /// Phase-noise accumulation rate per km.
    pub beta: f64,
    /// Dark count rate.
    pub y0: f64,
    /// Fiber loss in dB per km.
    pub alpha_db: f64,
    pub f_ec: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget { e_d: 0.015, beta: 2.82e-4, y0: 3e-8, alpha_db: 0.21, f_ec: 1.06 }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let all = [self.e_d, self.beta, self.y0, self.alpha_db, self.f_ec];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Domain("link budget parameters must be nonnegative".into()));
        }
        if self.e_d > 0.5 {
            return Err(Error::Domain(format!("e_d must be at most 1/2, got {}", self.e_d)));
        }
        Ok(())
    }
}

/// (e_b, e_p, η) for a fiber of length l km.
pub fn link_error_rates(l: f64, lb: &LinkBudget) -> Result<(f64, f64, f64)> {
    if !(l >= 0.0) {
        return Err(Error::Domain(format!("length must be nonnegative, got {l}")));
    }
    lb.validate()?;
    let eta = 10f64.powf(-lb.alpha_db * l / 10.0);
    let dark = 0.5 * (1.0 - eta) * lb.y0;
    let den = eta + (1.0 - eta) * lb.y0;
    if den <= 0.0 {
        // no signal and no dark counts: nothing is learned about the key
        return Ok((0.5, 0.5, eta));
    }
    let e_b = (eta * lb.e_d + dark) / den;
    let e_p = (eta * (1.0 - (-lb.beta * l / 2.0).exp()) / 2.0 + dark) / den;
    Ok((e_b, e_p, eta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QkdProtocol {
    OneWay,
    Recurrence(usize),
    Hamiltonian { n: usize, m: usize },
}

/// Rate expression whose sign decides whether a key is distillable at l.
pub fn protocol_rate(protocol: QkdProtocol, l: f64, lb: &LinkBudget) -> Result<f64> {
    let (e_b, e_p, _) = link_error_rates(l, lb)?;
    let f = lb.f_ec;
    match protocol {
        QkdProtocol::OneWay => Ok(1.0 - f * h2(e_b) - h2(e_p)),
        QkdProtocol::Recurrence(rounds) => {
            let (s, _) = iterate_recurrence(&bell_diagonal_from_rates(e_b, e_p)?, rounds)?;
            Ok(1.0 - f * h2(s.bit_error()) - h2(s.phase_error()))
        }
        QkdProtocol::Hamiltonian { n, m } => {
            let (eb_h, ep_h) = hamiltonian_error_rates(e_b, e_p, n, m)?;
            Ok(1.0 - f * h2(eb_h) - h2(ep_h))
        }
    }
}

/// Output (e_b, e_p) of the diagonal protocol for independent bit and phase
/// errors; reduces to [`diagonal_qkd_rate`] for depolarizing input.
pub fn hamiltonian_error_rates(e_b: f64, e_p: f64, n: usize, m: usize) -> Result<(f64, f64)> {
    check_unit("e_b", e_b)?;
    check_unit("e_p", e_p)?;
    if m >= n {
        return Err(Error::Domain(format!("need m < n, got m={m}, n={n}")));
    }
    let q = 0.5f64.powi(m as i32);
    let sx = q * (1.0 - (1.0 - e_b).powi(n as i32));
    let sc = ((1.0 - e_b) * (1.0 - e_p)).powi(m as i32) * (1.0 - e_b).powi((n - m) as i32);
    let surv = sx + sc;
    Ok((q * e_b / surv, (e_p * sc + 0.5 * sx) / surv))
}

const DISTANCE_LIMIT_KM: f64 = 2000.0;
const DISTANCE_STEP_KM: f64 = 0.5;

/// Largest fiber length with a positive rate, to 0.01 km; 0 if none.
pub fn max_distance(protocol: QkdProtocol, lb: &LinkBudget) -> Result<f64> {
    last_true(|l| Ok(protocol_rate(protocol, l, lb)? > 0.0))
}

/// Scans for the first failure, then bisects; the smaller root wins.
fn last_true(ok: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    if !ok(0.0)? {
        return Ok(0.0);
    }
    let mut prev = 0.0;
    let mut l = DISTANCE_STEP_KM;
    while l <= DISTANCE_LIMIT_KM {
        if !ok(l)? {
            let (mut lo, mut hi) = (prev, l);
            while hi - lo > 0.01 {
                let mid = 0.5 * (lo + hi);
                if ok(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(lo);
        }
        prev = l;
        l += DISTANCE_STEP_KM;
    }
    Ok(DISTANCE_LIMIT_KM)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepeaterProtocol {
    None,
    Recurrence(usize),
    HaarHamiltonian { n: usize, m: usize },
}

/// Φ+ weight of a distilled link of length l.
pub fn repeater_fidelity(l: f64, lb: &LinkBudget, protocol: RepeaterProtocol) -> Result<f64> {
    let (e_b, e_p, _) = link_error_rates(l, lb)?;
    let s = bell_diagonal_from_rates(e_b, e_p)?;
    match protocol {
        RepeaterProtocol::None => Ok(s.fidelity()),
        RepeaterProtocol::Recurrence(rounds) => Ok(iterate_recurrence(&s, rounds)?.0.fidelity()),
        RepeaterProtocol::HaarHamiltonian { n, m } => {
            let c_i = s.fidelity().powi(n as i32);
            Ok(haar_limit_fidelity_yield(c_i, m, n)?.0)
        }
    }
}

/// First length where the fidelity drops below `threshold`, to 0.01 km.
pub fn repeater_crossing(threshold: f64, lb: &LinkBudget, protocol: RepeaterProtocol) -> Result<f64> {
    last_true(|l| Ok(repeater_fidelity(l, lb, protocol)? >= threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((1.0 - 2.0 * binary_entropy(0.11).unwrap()).abs() < 0.005);
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn haar_limits() {
        assert_eq!(haar_limit_fidelity_yield(1.0, 3, 5).unwrap(), (1.0, 0.4));
        let (f, y) = haar_limit_fidelity_yield(0.4, 0, 5).unwrap();
        assert!((f - 0.4).abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clifford_bound_formula() {
        // direct arithmetic, evaluated independently
        let (p, n, m, d, dl) = (0.05f64, 40usize, 12usize, 6usize, 0.01f64);
        let r = d as f64 / n as f64;
        let h = -r * r.log2() - (1.0 - r) * (1.0 - r).log2();
        let t1 = 2f64.powf(-(n as f64) * (1.0 - h - r * 3f64.log2() - dl));
        let t2 = 2f64.powf(-(n as f64) * ((2.0 / (4.0 - 3.0 * p)).log2() + r * ((4.0 - 3.0 * p) / p).log2()));
        let a = (1.0 - 0.75 * p).powi(40);
        let expect = 1.0 / (1.0 + (t1 + t2 + 2f64.powi(-12) * (1.0 - t1 - t2 - a)) / a);
        let b = clifford_fidelity_bound(p, n, m, d, dl).unwrap();
        assert!((b.bound - expect).abs() < 1e-14);
        assert!(clifford_fidelity_bound(0.0, 10, 3, 2, 0.01).unwrap().exponent2.is_infinite());
    }

    #[test]
    fn qkd_noiseless_limit() {
        let r = diagonal_qkd_rate(1e-12, 15, 12).unwrap();
        assert!((r.rate - 0.2).abs() < 1e-9 && r.e_b < 1e-12 && r.e_p < 1e-9);
    }

    #[test]
    fn qkd_matches_generalized_form_for_depolarizing() {
        let p = 0.2;
        let r = diagonal_qkd_rate(p, 6, 3).unwrap();
        // per-pair bit error p/2; phase error given no bit error (p/4)/(1−p/2)
        let (eb, ep) = hamiltonian_error_rates(p / 2.0, (p / 4.0) / (1.0 - p / 2.0), 6, 3).unwrap();
        assert!((r.e_b - eb).abs() < 1e-14 && (r.e_p - ep).abs() < 1e-14);
    }

    #[test]
    fn tolerance_anchors() {
        let t = noise_tolerance(1.0).unwrap();
        assert!((t.error_rate_tol - 1.0 / 3.0).abs() < 1e-12);
        let half = noise_tolerance(0.5).unwrap();
        assert!((half.error_rate_tol - (5.0 - 13f64.sqrt()) / 6.0).abs() < 1e-9);
        assert!(noise_tolerance(0.0).is_err());
    }

    #[test]
    fn small_m_is_below_hashing() {
        assert!(finite_tolerance(20, 1).unwrap() < 0.11);
    }

    #[test]
    fn link_endpoints() {
        let lb = LinkBudget::default();
        let (eb, ep, eta) = link_error_rates(0.0, &lb).unwrap();
        assert_eq!((eb, ep, eta), (0.015, 0.0, 1.0));
        let (eb, ep, _) = link_error_rates(1e5, &lb).unwrap();
        assert!((eb - 0.5).abs() < 1e-9 && (ep - 0.5).abs() < 1e-9);
    }

    #[test]
    fn link_at_100_km() {
        let lb = LinkBudget::default();
        let eta = 10f64.powf(-2.1);
        let den = eta + (1.0 - eta) * 3e-8;
        let eb = (eta * 0.015 + 0.5 * (1.0 - eta) * 3e-8) / den;
        let ep = (eta * (1.0 - (-2.82e-4 * 50.0f64).exp()) / 2.0 + 0.5 * (1.0 - eta) * 3e-8) / den;
        let (a, b, _) = link_error_rates(100.0, &lb).unwrap();
        assert!((a - eb).abs() < 1e-15 && (b - ep).abs() < 1e-15);
    }

    #[test]
    fn one_way_distance_matches_scan() {
        let lb = LinkBudget::default();
        let d = max_distance(QkdProtocol::OneWay, &lb).unwrap();
        let mut last = 0.0;
        let mut l = 0.0;
        while l < 1000.0 {
            if protocol_rate(QkdProtocol::OneWay, l, &lb).unwrap() > 0.0 {
                last = l;
            }
            l += 0.01;
        }
        assert!((d - last).abs() < 0.02, "{d} vs {last}");
        let bad = LinkBudget { e_d: 0.45, ..lb };
        assert_eq!(max_distance(QkdProtocol::OneWay, &bad).unwrap(), 0.0);
    }

    #[test]
    fn perfect_links() {
        let lb = LinkBudget { e_d: 0.0, ..LinkBudget::default() };
        for p in
            [RepeaterProtocol::None, RepeaterProtocol::Recurrence(2), RepeaterProtocol::HaarHamiltonian { n: 5, m: 3 }]
        {
            assert!((repeater_fidelity(0.0, &lb, p).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn tolerance_monotone(k in 1usize..20) {
            let a = noise_tolerance(k as f64 * 0.05).unwrap().p_tol;
            let b = noise_tolerance((k + 1) as f64 * 0.05).unwrap().p_tol;
            prop_assert!(b >= a - 1e-12);
        }

        #[test]
        fn link_rates_bounded_and_monotone(l in 0.0f64..800.0, dl in 0.0f64..50.0) {
            let lb = LinkBudget::default();
            let (eb, ep, _) = link_error_rates(l, &lb).unwrap();
            let (eb2, ep2, _) = link_error_rates(l + dl, &lb).unwrap();
            prop_assert!((0.0..=0.5).contains(&eb) && (0.0..=0.5).contains(&ep));
            prop_assert!(eb2 >= eb - 1e-15 && ep2 >= ep - 1e-15);
        }

        #[test]
        fn qkd_rate_nonincreasing(k in 0usize..300) {
            let p_tol = noise_tolerance(0.8).unwrap().p_tol;
            let p = (k as f64 * 1e-3).min(p_tol);
            let q = ((k + 1) as f64 * 1e-3).min(p_tol);
            let a = diagonal_qkd_rate(p, 15, 12).unwrap().rate;
            let b = diagonal_qkd_rate(q, 15, 12).unwrap().rate;
            prop_assert!(b <= a + 1e-12);
        }
    }

    #[test]
    fn recurrence_distance_monotone() {
        let lb = LinkBudget::default();
        let d: Vec<f64> = (0..3).map(|r| max_distance(QkdProtocol::Recurrence(r), &lb).unwrap()).collect();
        assert!(d[1] >= d[0] && d[2] >= d[1], "{d:?}");
    }
}
