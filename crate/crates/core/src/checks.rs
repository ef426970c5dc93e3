//! Acceptance checks shared by the `acceptance` test target, `hamdistill check`
//! and the theorem_check experiment. Tolerances are fixed here.

use faer::{Mat, c64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analytics::{
    LinkBudget, QkdProtocol, RepeaterProtocol, best_finite_tolerance, clifford_fidelity_bound,
    haar_limit_fidelity_yield, max_distance, noise_tolerance, repeater_crossing,
};
use crate::distill::{
    NoiseModel, ProtocolConfig, ProtocolOutcome, SimulationPath, SweepOptions, hashing_yield, recurrence_round,
    run_protocol_on, sweep_measured_pairs,
};
use crate::error::Result;
use crate::hamlib::{HamiltonianSpec, SpectralHamiltonian, haar_unitary_with};
use crate::linalg::{CMat, ONE, ZERO, cplx, frobenius_sqr, kron, max_abs_diff};
use crate::noise::{BellDiagonal, KrausChannel, amplitude_damping, apply_pauli_branch, local_depolarizing};
use crate::otoc::detection_probability;
use crate::qcore::state::interleave;
use crate::qcore::{MeasurementBasis, PauliString, epr_state, identical_outcome_projector};
use crate::twirl::{
    Observable, TimeMeasure, haar_first_twirl_oracle, haar_second_twirl_oracle, twirl_branch_expectation, twirl_density,
};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub id: &'static str,
    pub pass: bool,
    /// Worst deviation from the criterion, in the criterion's own units.
    pub residual: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(id: &'static str, pass: bool, residual: f64, detail: String) -> Self {
        CheckResult { id, pass, residual, detail }
    }

    fn from_error(id: &'static str, e: crate::Error) -> Self {
        CheckResult { id, pass: false, residual: f64::NAN, detail: format!("error: {e}") }
    }
}

pub const CHECK_IDS: [&str; 13] = [
    "theorem1_exactness",
    "otoc_identity",
    "path_equivalence",
    "theorem3_convergence",
    "tolerance_anchors",
    "diagonal_closed_form",
    "ordering",
    "nonpauli_robustness",
    "qkd_distances",
    "repeater_thresholds",
    "twirl_oracles",
    "recurrence_arithmetic",
    "clifford_bound",
];

/// Runs one check by id; None for an unknown id.
pub fn run_check(id: &str) -> Option<CheckResult> {
    let (id, r): (&'static str, Result<CheckResult>) = match id {
        "theorem1_exactness" => ("theorem1_exactness", theorem1_exactness()),
        "otoc_identity" => ("otoc_identity", otoc_identity()),
        "path_equivalence" => ("path_equivalence", path_equivalence()),
        "theorem3_convergence" => ("theorem3_convergence", theorem3_convergence()),
        "tolerance_anchors" => ("tolerance_anchors", tolerance_anchors()),
        "diagonal_closed_form" => ("diagonal_closed_form", diagonal_closed_form()),
        "ordering" => ("ordering", ordering()),
        "nonpauli_robustness" => ("nonpauli_robustness", nonpauli_robustness()),
        "qkd_distances" => ("qkd_distances", qkd_distances()),
        "repeater_thresholds" => ("repeater_thresholds", repeater_thresholds()),
        "twirl_oracles" => ("twirl_oracles", twirl_oracles()),
        "recurrence_arithmetic" => ("recurrence_arithmetic", recurrence_arithmetic()),
        "clifford_bound" => ("clifford_bound", clifford_bound()),
        _ => return None,
    };
    Some(r.unwrap_or_else(|e| CheckResult::from_error(id, e)))
}

pub fn run_all(skip_slow: bool) -> Vec<CheckResult> {
    CHECK_IDS
        .iter()
        .filter(|id| !(skip_slow && **id == "theorem3_convergence"))
        .map(|id| run_check(id).expect("known id"))
        .collect()
}

fn build(family: &str, n: usize) -> Result<SpectralHamiltonian> {
    HamiltonianSpec::named(family, n, 0)?.build()
}

fn depolarizing_kraus(p: f64) -> Result<KrausChannel> {
    KrausChannel::from_pauli_weights([1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0])
}

/// Diagonal H in the delta limit: branches with an X part are dephased and
/// shifted, pure-Z branches are untouched.
fn theorem1_exactness() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        let h = build("diagonal", n)?;
        let d = 1usize << n;
        let epr = epr_state(n)?;
        for idx in 0..(1usize << (2 * n)) {
            let p = PauliString::from_index(n, idx);
            let branch = apply_pauli_branch(&p, &epr)?;
            let rho = branch.projector();
            let out = twirl_density(&h, &rho, &TimeMeasure::DeltaLimit)?;
            let x = p.x_mask();
            let expect = if x == 0 {
                rho.matrix().clone()
            } else {
                let mut m = Mat::<c64>::zeros(d * d, d * d);
                for j in 0..d {
                    let k = interleave(j ^ x, j, n);
                    m[(k, k)] = cplx(1.0 / d as f64, 0.0);
                }
                m
            };
            worst = worst.max(max_abs_diff(out.matrix().as_ref(), expect.as_ref()));
        }
    }
    Ok(CheckResult::new(
        "theorem1_exactness",
        worst <= 1e-10,
        worst,
        format!("max-norm deviation {worst:.3e} (tol 1e-10)"),
    ))
}

fn otoc_identity() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for family in ["trapped_ion", "rydberg", "haar_random"] {
        for n in 2..=4usize {
            let h = build(family, n)?;
            let epr = epr_state(n)?;
            let paulis: Vec<PauliString> =
                (0..2).map(|_| PauliString::from_index(n, rng.random_range(1..(1usize << (2 * n))))).collect();
            let times: Vec<f64> = (0..10).map(|_| rng.random::<f64>() * 5.0).collect();
            for basis in [MeasurementBasis::Computational, MeasurementBasis::Hadamard] {
                for m in 0..=n {
                    let obs = Observable::Dense(identical_outcome_projector(n, m, &basis)?);
                    for p in &paulis {
                        let branch = apply_pauli_branch(p, &epr)?;
                        for &t in &times {
                            let via_otoc = detection_probability(&h, t, p, m, &basis)?;
                            let survive = twirl_branch_expectation(&h, &branch, &obs, &TimeMeasure::Samples(vec![t]))?;
                            worst = worst.max((via_otoc - (1.0 - survive)).abs());
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(CheckResult::new(
        "otoc_identity",
        worst <= 1e-10,
        worst,
        format!("{count} (H, P, t, m, basis) points, max deviation {worst:.3e} (tol 1e-10)"),
    ))
}

fn run_path(
    h: &SpectralHamiltonian,
    spec: &HamiltonianSpec,
    m: usize,
    noise: NoiseModel,
    mu: &TimeMeasure,
    path: SimulationPath,
    basis: &MeasurementBasis,
) -> Result<ProtocolOutcome> {
    let mut cfg = ProtocolConfig::new(spec.clone(), m, noise);
    cfg.mu = mu.clone();
    cfg.path = path;
    cfg.basis = basis.clone();
    run_protocol_on(h, &cfg)
}

fn path_equivalence() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for family in ["trapped_ion", "rydberg"] {
        let spec = HamiltonianSpec::named(family, 3, 0)?;
        let h = spec.build()?;
        for p in [0.1, 0.2] {
            for m in [1, 2] {
                for mu in [TimeMeasure::DeltaLimit, TimeMeasure::Uniform(2.0)] {
                    let basis = MeasurementBasis::Hadamard;
                    let noise = NoiseModel::Pauli(local_depolarizing(3, p)?);
                    let a = run_path(&h, &spec, m, noise.clone(), &mu, SimulationPath::PauliBranch, &basis)?;
                    let b = run_path(&h, &spec, m, noise, &mu, SimulationPath::DensityMatrix, &basis)?;
                    worst = worst
                        .max((a.fidelity - b.fidelity).abs())
                        .max((a.survival_probability - b.survival_probability).abs())
                        .max((a.yield_value - b.yield_value).abs());
                }
            }
        }
    }
    Ok(CheckResult::new(
        "path_equivalence",
        worst <= 1e-8,
        worst,
        format!("max |Δ| over fidelity, survival, yield {worst:.3e} (tol 1e-8)"),
    ))
}

/// Monte-Carlo budget for the n = 7 Haar check.
pub const THEOREM3_SAMPLES: usize = 20_000;

fn theorem3_convergence() -> Result<CheckResult> {
    let n = 7;
    let p = 0.2;
    let h = build("haar_random", n)?;
    let ch = local_depolarizing(n, p)?;
    let opts = SweepOptions { samples: Some(THEOREM3_SAMPLES), seed: 7, ..SweepOptions::default() };
    let outs =
        sweep_measured_pairs(&h, &ch, &[1, 2, 3], &MeasurementBasis::Computational, &TimeMeasure::DeltaLimit, &opts)?;
    let c_i = ch.identity_weight();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for o in &outs {
        let (limit, _) = haar_limit_fidelity_yield(c_i, o.m, n)?;
        let f = o.error_free_fidelity.unwrap_or(f64::NAN);
        let rel = (f - limit).abs() / limit;
        worst = worst.max(rel);
        parts.push(format!("m={}: {f:.5} vs {limit:.5}", o.m));
    }
    Ok(CheckResult::new(
        "theorem3_convergence",
        worst <= 0.05,
        worst,
        format!("{} (max rel {worst:.4}, tol 0.05, {THEOREM3_SAMPLES} samples)", parts.join("; ")),
    ))
}

fn tolerance_anchors() -> Result<CheckResult> {
    let full = noise_tolerance(1.0)?.error_rate_tol;
    let half = noise_tolerance(0.5)?.error_rate_tol;
    let (t20, m20) = best_finite_tolerance(20)?;
    let (t50, m50) = best_finite_tolerance(50)?;
    let r1 = (full - 1.0 / 3.0).abs();
    let r2 = (half - (5.0 - 13f64.sqrt()) / 6.0).abs();
    let in20 = (0.25..=0.27).contains(&t20);
    let pass = r1 <= 1e-6 && r2 <= 1e-9 && in20 && t50 > 0.30;
    let residual = r1.max(r2).max(if in20 { 0.0 } else { (t20 - 0.26).abs() - 0.01 }).max((0.30 - t50).max(0.0));
    Ok(CheckResult::new(
        "tolerance_anchors",
        pass,
        residual,
        format!(
            "m/n=1: {full:.9}; m/n=1/2: {half:.12}; n=20 best {t20:.4} at m={m20} (want [0.25, 0.27]); n=50 best {t50:.4} at m={m50} (want > 0.30)"
        ),
    ))
}

fn diagonal_closed_form() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let ps: Vec<f64> = (1..=8).map(|k| 0.05 * k as f64).collect();
    for n in 2..=6usize {
        let h = build("diagonal", n)?;
        let ms: Vec<usize> = (1..=n).collect();
        for &p in &ps {
            let ch = local_depolarizing(n, p)?;
            let outs = sweep_measured_pairs(
                &h,
                &ch,
                &ms,
                &MeasurementBasis::Hadamard,
                &TimeMeasure::DeltaLimit,
                &SweepOptions::default(),
            )?;
            for o in outs {
                let m = o.m as i32;
                let p1 = (1.0 - 0.75 * p).powi(n as i32);
                let p2 = (1.0 - 0.75 * p).powi(m)
                    * ((1.0 - p / 2.0).powi(n as i32 - m) - (1.0 - 0.75 * p).powi(n as i32 - m));
                let p3 = 0.5f64.powi(m) * (1.0 - (1.0 - p / 2.0).powi(n as i32));
                let f = p1 / (p1 + p2 + p3);
                worst = worst
                    .max((o.error_free_fidelity.unwrap_or(f64::NAN) - f).abs())
                    .max((o.survival_probability - (p1 + p2 + p3)).abs());
            }
        }
    }
    Ok(CheckResult::new(
        "diagonal_closed_form",
        worst <= 1e-10,
        worst,
        format!("max deviation {worst:.3e} (tol 1e-10)"),
    ))
}

fn ordering() -> Result<CheckResult> {
    let (n, m, p) = (5, 3, 0.2);
    let mut per_pair = Vec::new();
    for family in ["diagonal", "rydberg", "trapped_ion"] {
        let spec = HamiltonianSpec::named(family, n, 0)?;
        let h = spec.build()?;
        let mut cfg = ProtocolConfig::new(spec, m, NoiseModel::Pauli(local_depolarizing(n, p)?));
        cfg.path = SimulationPath::PauliBranch;
        let o = run_protocol_on(&h, &cfg)?;
        per_pair.push((family, o.per_pair_fidelity, o.std_error.unwrap_or(0.0)));
    }
    let margin = |a: (&str, f64, f64), b: (&str, f64, f64)| b.1 - a.1 - (a.2 + b.2);
    let m1 = margin(per_pair[0], per_pair[1]);
    let m2 = margin(per_pair[1], per_pair[2]);

    let spec = HamiltonianSpec::named("trapped_ion", n, 0)?;
    let h = spec.build()?;
    let noise = NoiseModel::Pauli(local_depolarizing(n, p)?);
    let delta = per_pair[2].1;
    let basis = MeasurementBasis::Hadamard;
    let fixed = run_path(&h, &spec, m, noise, &TimeMeasure::Samples(vec![2.0]), SimulationPath::PauliBranch, &basis)?;
    let finite_ok = fixed.per_pair_fidelity >= delta - 0.02 && (0.90..=0.95).contains(&delta);
    let pass = m1 > 0.0 && m2 > 0.0 && finite_ok;
    Ok(CheckResult::new(
        "ordering",
        pass,
        m1.min(m2),
        format!(
            "per-pair fidelity diagonal {:.5}, rydberg {:.5}, trapped_ion {:.5} (margins {m1:.2e}, {m2:.2e}); trapped_ion at t=2: {:.5} vs delta {delta:.5}",
            per_pair[0].1, per_pair[1].1, per_pair[2].1, fixed.per_pair_fidelity
        ),
    ))
}

fn nonpauli_robustness() -> Result<CheckResult> {
    let (n, m, p) = (5, 3, 0.2);
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for family in ["trapped_ion", "rydberg"] {
        let spec = HamiltonianSpec::named(family, n, 0)?;
        let h = spec.build()?;
        for gamma in [0.1, 0.2, 0.3] {
            let single = amplitude_damping(gamma)?.compose_after(&depolarizing_kraus(p)?)?;
            let mut cfg = ProtocolConfig::new(spec.clone(), m, NoiseModel::LocalKraus { n, single });
            cfg.basis = MeasurementBasis::Hadamard;
            let plain = run_protocol_on(&h, &cfg)?;
            cfg.pauli_twirl_enabled = true;
            let twirled = run_protocol_on(&h, &cfg)?;
            let err = plain.std_error.unwrap_or(0.0) + twirled.std_error.unwrap_or(0.0);
            let margin = plain.fidelity - (twirled.fidelity - err);
            worst = worst.min(margin);
            parts.push(format!("{family} γ={gamma}: {:.5} vs {:.5}", plain.fidelity, twirled.fidelity));
        }
    }
    Ok(CheckResult::new(
        "nonpauli_robustness",
        worst >= 0.0,
        worst,
        format!("no-twirl vs twirl fidelity: {}", parts.join("; ")),
    ))
}

fn qkd_distances() -> Result<CheckResult> {
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for k in 1..=6 {
        let lb = LinkBudget { e_d: 0.005 * k as f64, ..LinkBudget::default() };
        let ham = max_distance(QkdProtocol::Hamiltonian { n: 15, m: 12 }, &lb)?;
        let rec = max_distance(QkdProtocol::Recurrence(2), &lb)?;
        let one = max_distance(QkdProtocol::OneWay, &lb)?;
        worst = worst.min(ham - rec).min(rec - one);
        parts.push(format!("e_d={:.3}: {ham:.2}/{rec:.2}/{one:.2}", lb.e_d));
    }
    Ok(CheckResult::new(
        "qkd_distances",
        worst > 1.0,
        worst,
        format!("km, hamiltonian(15,12)/recurrence(2)/one_way: {} (min gap {worst:.2} km)", parts.join("; ")),
    ))
}

fn repeater_thresholds() -> Result<CheckResult> {
    let lb = LinkBudget::default();
    let none = repeater_crossing(0.9, &lb, RepeaterProtocol::None)?;
    let rec1 = repeater_crossing(0.9, &lb, RepeaterProtocol::Recurrence(1))?;
    let rec2 = repeater_crossing(0.9, &lb, RepeaterProtocol::Recurrence(2))?;
    let haar = repeater_crossing(0.9, &lb, RepeaterProtocol::HaarHamiltonian { n: 5, m: 3 })?;
    let none_ok = (105.0..=135.0).contains(&none);
    let pass = none_ok && rec1 > 250.0 && haar > 250.0 && haar > rec1 && haar > rec2;
    let residual = if none_ok { 0.0 } else { (none - 120.0).abs() - 15.0 };
    Ok(CheckResult::new(
        "repeater_thresholds",
        pass,
        residual,
        format!(
            "0.9 crossings: none {none:.2} km (want [105, 135]); recurrence(1) {rec1:.2}; recurrence(2) {rec2:.2}; haar(5,3) {haar:.2}"
        ),
    ))
}

fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = Mat::from_fn(dim, dim, |_, _| cplx(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let w = &g * g.adjoint();
    let t = crate::linalg::trace(w.as_ref());
    crate::linalg::scale(&w, ONE / t)
}

pub const TWIRL_SAMPLES: usize = 10_000;

fn twirl_oracles() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    // second moment on C²⊗C²
    let x2 = random_density(4, &mut rng);
    let oracle2 = haar_second_twirl_oracle(&x2)?;
    let mut acc2 = Mat::<c64>::zeros(4, 4);
    for _ in 0..TWIRL_SAMPLES {
        let u = haar_unitary_with(2, &mut rng)?;
        let uu = kron(u.as_ref(), u.as_ref());
        acc2 += &uu * &x2 * uu.adjoint();
    }
    let mean2 = crate::linalg::scale(&acc2, cplx(1.0 / TWIRL_SAMPLES as f64, 0.0));
    let rel2 = frobenius_sqr((&mean2 - &oracle2).as_ref()).sqrt() / frobenius_sqr(oracle2.as_ref()).sqrt();

    // first moment on C⁴, error compared with its own standard error
    let x1 = Mat::from_fn(4, 4, |_, _| cplx(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let oracle1 = haar_first_twirl_oracle(&x1);
    let mut sum = Mat::<c64>::zeros(4, 4);
    let mut sum_sq = Mat::<f64>::zeros(4, 4);
    for _ in 0..TWIRL_SAMPLES {
        let u = haar_unitary_with(4, &mut rng)?;
        let y = &u * &x1 * u.adjoint();
        sum += &y;
        for j in 0..4 {
            for i in 0..4 {
                sum_sq[(i, j)] += y[(i, j)].norm_sqr();
            }
        }
    }
    let nf = TWIRL_SAMPLES as f64;
    let mut err_sq = 0.0;
    let mut var_sum = 0.0;
    for j in 0..4 {
        for i in 0..4 {
            let mean = sum[(i, j)] / nf;
            var_sum += (sum_sq[(i, j)] / nf - mean.norm_sqr()) / (nf - 1.0);
            err_sq += (mean - oracle1[(i, j)]).norm_sqr();
        }
    }
    let z1 = err_sq.sqrt() / var_sum.sqrt();
    let pass = rel2 <= 0.02 && z1 <= 3.0;
    Ok(CheckResult::new(
        "twirl_oracles",
        pass,
        rel2,
        format!(
            "second moment rel. Frobenius {rel2:.4} (tol 0.02); first moment error {z1:.2} standard errors (tol 3)"
        ),
    ))
}

/// Bilateral CNOT on two copies, target pair measured in Z, kept when equal.
fn recurrence_by_density(s: &BellDiagonal) -> (BellDiagonal, f64) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // |ab> index 2a + b: Φ+, Ψ+, Φ−, Ψ−
    let bell: [[f64; 4]; 4] = [[r, 0.0, 0.0, r], [0.0, r, r, 0.0], [r, 0.0, 0.0, -r], [0.0, r, -r, 0.0]];
    let w = s.as_array();
    let pair = Mat::from_fn(4, 4, |i, j| cplx((0..4).map(|k| w[k] * bell[k][i] * bell[k][j]).sum(), 0.0));
    // qubits (A1, B1, A2, B2), A1 most significant
    let rho = kron(pair.as_ref(), pair.as_ref());
    let cnot = |i: usize, ctrl: usize, tgt: usize| if i & (1 << ctrl) != 0 { i ^ (1 << tgt) } else { i };
    let perm: Vec<usize> = (0..16).map(|i| cnot(cnot(i, 3, 1), 2, 0)).collect();
    let mut out = Mat::<c64>::zeros(4, 4);
    for i in 0..16 {
        for j in 0..16 {
            let (pi, pj) = (perm[i], perm[j]);
            // both target bits equal, and the same outcome on both sides
            if (pi >> 1) & 1 == pi & 1 && (pi & 3) == (pj & 3) {
                out[(pi >> 2, pj >> 2)] += rho[(i, j)];
            }
        }
    }
    let pass: f64 = (0..4).map(|i| out[(i, i)].re).sum();
    let weights: Vec<f64> = (0..4)
        .map(|k| {
            let mut v = ZERO;
            for i in 0..4 {
                for j in 0..4 {
                    v += out[(i, j)] * bell[k][i] * bell[k][j];
                }
            }
            v.re / pass
        })
        .collect();
    (BellDiagonal { p00: weights[0], p01: weights[1], p10: weights[2], p11: weights[3] }, pass)
}

fn recurrence_arithmetic() -> Result<CheckResult> {
    let w = BellDiagonal::werner(0.2)?;
    let (formula, pass_f) = recurrence_round(&w)?;
    let (sim, pass_s) = recurrence_by_density(&w);
    let dev = formula
        .as_array()
        .iter()
        .zip(sim.as_array())
        .map(|(a, b)| (a - b).abs())
        .fold((pass_f - pass_s).abs(), f64::max);
    let (mut lo, mut hi) = (0.05, 0.2);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if hashing_yield(mid, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = 0.5 * (lo + hi);
    let pass = dev <= 1e-10 && (zero - 0.11).abs() <= 0.001;
    Ok(CheckResult::new(
        "recurrence_arithmetic",
        pass,
        dev,
        format!("round vs density simulation {dev:.3e} (tol 1e-10); hashing zero at e = {zero:.6} (want 0.11 ± 0.001)"),
    ))
}

fn clifford_bound() -> Result<CheckResult> {
    let (n, d) = (100usize, 16usize);
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0.0;
    for k in 1..=65 {
        let p = k as f64 * 1e-3;
        let b = clifford_fidelity_bound(p, n, 1, d, 0.01)?;
        let e = b.exponent1.max(b.exponent2);
        if e > worst {
            worst = e;
            at = p;
        }
    }
    let at_max = clifford_fidelity_bound(0.065, n, 1, d, 0.01)?;
    let mut monotone = true;
    let mut prev = 0.0;
    for m in 1..=n {
        let b = clifford_fidelity_bound(0.05, n, m, d, 0.01)?.bound;
        monotone &= b >= prev;
        prev = b;
    }
    let pass = worst < 0.0 && monotone;
    Ok(CheckResult::new(
        "clifford_bound",
        pass,
        worst,
        format!(
            "d/n=0.16: largest exponent {worst:.4} at p={at:.3}; at p=0.065 exponents ({:.4}, {:.4}); bound monotone in m: {monotone}",
            at_max.exponent1, at_max.exponent2
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_recurrence_matches_formula() {
        let skewed = BellDiagonal::new(0.7, 0.1, 0.15, 0.05).unwrap();
        for w in [BellDiagonal::werner(0.1).unwrap(), BellDiagonal::werner(0.4).unwrap(), skewed] {
            let (a, pa) = recurrence_round(&w).unwrap();
            let (b, pb) = recurrence_by_density(&w);
            assert!((pa - pb).abs() < 1e-12);
            for (x, y) in a.as_array().iter().zip(b.as_array()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unknown_check() {
        assert!(run_check("nope").is_none());
    }
}
