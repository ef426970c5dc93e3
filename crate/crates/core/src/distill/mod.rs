//! Protocol engine: noisy EPR pairs, Hamiltonian twirl, identical-outcome
//! post-selection on m pairs, fidelity and yield of the rest.

pub mod baselines;
pub mod density;
pub mod engine;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamlib::{HamiltonianSpec, SpectralHamiltonian};
use crate::linalg::{CMat, pairwise_sum};
use crate::noise::{KrausChannel, PauliChannel, pauli_twirl_channel};
use crate::qcore::state::MAX_DENSITY_PAIRS;
use crate::qcore::{MeasurementBasis, PauliString};
use crate::twirl::TimeMeasure;

pub use baselines::{hashing_yield, iterate_recurrence, recurrence_round};
use engine::{
    BranchKernel, MAX_KERNEL_PAIRS, eigenvector_permutation, evolved_pauli, pauli_eigenbasis, pointwise_all_m,
};

/// Monte-Carlo branch samples used when n ≥ 7 and no budget is given.
pub const DEFAULT_SAMPLES: usize = 100_000;
/// Largest n whose Pauli branches are enumerated exactly.
pub const MAX_EXACT_PAIRS: usize = 6;
/// Uniform time draws per branch when the exact window kernel does not fit.
pub const DEFAULT_TIME_SAMPLES: usize = 200;

// Bytes of V†PV matrices held at once during branch evaluation.
const EVAL_BUDGET_BYTES: usize = 128 << 20;

#[derive(Clone, Debug)]
pub enum NoiseModel {
    Pauli(PauliChannel),
    /// The same single-qubit Kraus channel on each of the n A-side qubits.
    LocalKraus {
        n: usize,
        single: KrausChannel,
    },
}

impl NoiseModel {
    pub fn n(&self) -> usize {
        match self {
            NoiseModel::Pauli(c) => c.n(),
            NoiseModel::LocalKraus { n, .. } => *n,
        }
    }

    pub fn is_pauli(&self) -> bool {
        matches!(self, NoiseModel::Pauli(_))
    }

    /// Pauli channel after the optional Pauli twirl, if the model is one.
    pub fn as_pauli(&self, twirl: bool) -> Result<Option<PauliChannel>> {
        match self {
            NoiseModel::Pauli(c) => Ok(Some(c.clone())),
            NoiseModel::LocalKraus { n, single } if twirl => {
                let w = pauli_twirl_channel(single)?.per_qubit().expect("single-qubit product")[0];
                Ok(Some(PauliChannel::uniform(*n, w)?))
            }
            NoiseModel::LocalKraus { .. } => Ok(None),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimulationPath {
    PauliBranch,
    DensityMatrix,
    Auto,
}

impl SimulationPath {
    pub fn name(self) -> &'static str {
        match self {
            SimulationPath::PauliBranch => "pauli_branch",
            SimulationPath::DensityMatrix => "density_matrix",
            SimulationPath::Auto => "auto",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub n: usize,
    pub m: usize,
    pub hamiltonian: HamiltonianSpec,
    pub noise: NoiseModel,
    pub mu: TimeMeasure,
    pub basis: MeasurementBasis,
    pub pauli_twirl_enabled: bool,
    pub path: SimulationPath,
    /// Monte-Carlo budget; None picks exact enumeration up to 6 pairs.
    pub samples: Option<usize>,
    pub time_samples: usize,
    pub seed: u64,
}

impl ProtocolConfig {
    /// Delta limit, automatic path, family-default basis.
    pub fn new(hamiltonian: HamiltonianSpec, m: usize, noise: NoiseModel) -> Self {
        let basis = if hamiltonian.family.default_basis_is_hadamard() {
            MeasurementBasis::Hadamard
        } else {
            MeasurementBasis::Computational
        };
        ProtocolConfig {
            n: hamiltonian.n,
            m,
            hamiltonian,
            noise,
            mu: TimeMeasure::DeltaLimit,
            basis,
            pauli_twirl_enabled: false,
            path: SimulationPath::Auto,
            samples: None,
            time_samples: DEFAULT_TIME_SAMPLES,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > self.n {
            return Err(Error::Domain(format!("measured pairs m={} exceeds n={}", self.m, self.n)));
        }
        if self.hamiltonian.n != self.n {
            return Err(Error::Dimension { expected: self.n, got: self.hamiltonian.n });
        }
        if self.noise.n() != self.n {
            return Err(Error::Dimension { expected: self.n, got: self.noise.n() });
        }
        if self.samples == Some(0) || self.time_samples == 0 {
            return Err(Error::Domain("sample budgets must be positive".into()));
        }
        self.mu.validate()
    }

    /// Path actually taken by [`run_protocol_on`].
    pub fn resolved_path(&self) -> Result<SimulationPath> {
        let kraus_only = !self.noise.is_pauli() && !self.pauli_twirl_enabled;
        let path = match self.path {
            SimulationPath::PauliBranch if kraus_only => {
                return Err(Error::Inconsistent(
                    "non-Pauli noise needs the density-matrix path unless Pauli twirling is enabled".into(),
                ));
            }
            SimulationPath::Auto => {
                let uniform_exact = matches!(self.mu, TimeMeasure::Uniform(_)) && self.n == MAX_DENSITY_PAIRS;
                if kraus_only || self.n <= 4 || uniform_exact {
                    SimulationPath::DensityMatrix
                } else {
                    SimulationPath::PauliBranch
                }
            }
            p => p,
        };
        if path == SimulationPath::DensityMatrix && self.n > MAX_DENSITY_PAIRS {
            return Err(Error::Capacity(format!(
                "density-matrix path limited to {MAX_DENSITY_PAIRS} pairs, got {}",
                self.n
            )));
        }
        Ok(path)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutcomeMode {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub n: usize,
    pub m: usize,
    /// Overlap of the kept pairs with |Φ+>^{⊗(n−m)} after post-selection.
    pub fidelity: f64,
    pub yield_value: f64,
    pub per_pair_fidelity: f64,
    pub survival_probability: f64,
    /// c_I / survival: credits only the error-free branch (Pauli noise only).
    pub error_free_fidelity: Option<f64>,
    pub std_error: Option<f64>,
    pub mode: OutcomeMode,
    pub path: SimulationPath,
    pub notes: Vec<String>,
}

impl ProtocolOutcome {
    fn from_totals(n: usize, m: usize, survival: f64, overlap: f64, c_i: Option<f64>) -> Self {
        let fidelity = if survival > 0.0 { overlap / survival } else { 0.0 };
        let kept = n - m;
        ProtocolOutcome {
            n,
            m,
            fidelity,
            yield_value: survival * kept as f64 / n as f64,
            per_pair_fidelity: if kept == 0 { 1.0 } else { fidelity.max(0.0).powf(1.0 / kept as f64) },
            survival_probability: survival,
            error_free_fidelity: c_i.map(|c| if survival > 0.0 { c / survival } else { 0.0 }),
            std_error: None,
            mode: OutcomeMode::Exact,
            path: SimulationPath::PauliBranch,
            notes: Vec::new(),
        }
    }

    /// Per-pair value of the error-free fidelity.
    pub fn per_pair_error_free(&self) -> Option<f64> {
        let kept = self.n - self.m;
        self.error_free_fidelity.map(|f| if kept == 0 { 1.0 } else { f.powf(1.0 / kept as f64) })
    }
}

pub fn run_protocol(cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    cfg.validate()?;
    let h = cfg.hamiltonian.build()?;
    run_protocol_on(&h, cfg)
}

/// As [`run_protocol`] with a prebuilt Hamiltonian.
pub fn run_protocol_on(h: &SpectralHamiltonian, cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    cfg.validate()?;
    if h.n() != cfg.n {
        return Err(Error::Dimension { expected: cfg.n, got: h.n() });
    }
    let path = cfg.resolved_path()?;
    let pauli = cfg.noise.as_pauli(cfg.pauli_twirl_enabled)?;
    let mut out = match (path, &pauli) {
        (SimulationPath::PauliBranch, Some(ch)) => {
            let opts = SweepOptions { samples: cfg.samples, seed: cfg.seed, time_samples: cfg.time_samples };
            sweep_measured_pairs(h, ch, &[cfg.m], &cfg.basis, &cfg.mu, &opts)?.remove(0)
        }
        _ => {
            let (s, g) = density::density_totals(h, &cfg.noise, pauli.as_ref(), cfg.m, &cfg.basis, &cfg.mu)?;
            ProtocolOutcome::from_totals(cfg.n, cfg.m, s, g, pauli.as_ref().map(|c| c.identity_weight()))
        }
    };
    out.path = path;
    if cfg.pauli_twirl_enabled && !cfg.noise.is_pauli() {
        out.notes.push("Kraus noise replaced by its Pauli twirl".into());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub samples: Option<usize>,
    pub seed: u64,
    pub time_samples: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { samples: None, seed: 0, time_samples: DEFAULT_TIME_SAMPLES }
    }
}

/// Branch sums over P ≠ I for one m.
#[derive(Clone, Debug)]
pub struct BranchAverages {
    pub m: usize,
    pub c_i: f64,
    /// Σ_{P≠I} c_P s(P)
    pub survival_errors: f64,
    /// Σ_{P≠I} c_P g(P)
    pub overlap_errors: f64,
    /// Standard errors of the two sums and of the fidelity ratio (Monte Carlo).
    pub se_survival: Option<f64>,
    pub se_fidelity: Option<f64>,
    pub mode: OutcomeMode,
    /// c_P s(P) per enumerated branch, when requested.
    pub breakdown: Option<Vec<(PauliString, f64)>>,
    pub notes: Vec<String>,
}

/// Pauli-branch averages for every m in `ms`, sharing V†PV across m.
pub fn branch_averages(
    h: &SpectralHamiltonian,
    channel: &PauliChannel,
    ms: &[usize],
    basis: &MeasurementBasis,
    mu: &TimeMeasure,
    opts: &SweepOptions,
    breakdown: bool,
) -> Result<Vec<BranchAverages>> {
    mu.validate()?;
    let n = h.n();
    if channel.n() != n {
        return Err(Error::Dimension { expected: n, got: channel.n() });
    }
    if opts.time_samples == 0 || opts.samples == Some(0) {
        return Err(Error::Domain("sample budgets must be positive".into()));
    }
    let c_i = channel.identity_weight();
    let monte_carlo = opts.samples.is_some() || n > MAX_EXACT_PAIRS;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut notes = Vec::new();

    // Finite windows beyond the kernel limit fall back to drawn times.
    let mut joint_window = None;
    let mu_eff = match mu {
        TimeMeasure::Uniform(t) if n > MAX_KERNEL_PAIRS => {
            if monte_carlo {
                joint_window = Some(*t);
                notes.push(format!("t drawn uniformly on [0, {t}] jointly with each branch"));
                TimeMeasure::Samples(vec![0.0])
            } else {
                let ts: Vec<f64> = (0..opts.time_samples).map(|_| rng.random::<f64>() * t).collect();
                notes.push(format!("window [0, {t}] averaged over {} uniform time draws", opts.time_samples));
                TimeMeasure::Samples(ts)
            }
        }
        other => other.clone(),
    };
    let kernels: Vec<BranchKernel> = ms
        .iter()
        .map(|&m| match joint_window {
            Some(_) => BranchKernel::pointwise(h, m, basis),
            None => BranchKernel::new(h, m, basis, &mu_eff),
        })
        .collect::<Result<_>>()?;
    if let Some(k) = kernels.first()
        && k.degenerate_entries() > 0
    {
        notes.push(format!("delta limit keeps {} index pairs with coinciding gaps", k.degenerate_entries()));
    }
    let perm = eigenvector_permutation(h);
    // values[i][k]: (s, g) of item i under kernel k
    let eval_all = |items: &[(&PauliString, Option<f64>)]| -> Vec<Vec<(f64, f64)>> {
        let per_q = 16usize << (2 * n);
        let chunk_len = (EVAL_BUDGET_BYTES / per_q).clamp(rayon::current_num_threads(), 4096);
        let mut values = Vec::with_capacity(items.len());
        for chunk in items.chunks(chunk_len) {
            if joint_window.is_some() && !matches!(basis, MeasurementBasis::CliffordConjugated(_)) {
                // one U P U† per draw serves every m
                values.par_extend(chunk.par_iter().map(|(p, t)| {
                    let a = evolved_pauli(h, p, t.expect("joint draws carry a time"));
                    pointwise_all_m(&a, ms, basis).expect("fast basis")
                }));
                continue;
            }
            let qs: Vec<CMat> = chunk.par_iter().map(|(p, _)| pauli_eigenbasis(h, p, perm.as_deref())).collect();
            let per_kernel: Vec<Vec<(f64, f64)>> = kernels
                .iter()
                .map(|k| {
                    if chunk.iter().all(|(_, t)| t.is_none()) {
                        k.evaluate_batch(&qs)
                    } else {
                        qs.par_iter()
                            .zip(chunk.par_iter())
                            .map(|(q, (_, t))| t.map_or_else(|| k.evaluate(q), |t| k.evaluate_at(q, t)))
                            .collect()
                    }
                })
                .collect();
            values.extend((0..chunk.len()).map(|i| per_kernel.iter().map(|v| v[i]).collect::<Vec<_>>()));
        }
        values
    };

    if c_i >= 1.0 {
        return Ok(ms
            .iter()
            .map(|&m| BranchAverages {
                m,
                c_i,
                survival_errors: 0.0,
                overlap_errors: 0.0,
                se_survival: None,
                se_fidelity: None,
                mode: OutcomeMode::Exact,
                breakdown: breakdown.then(Vec::new),
                notes: notes.clone(),
            })
            .collect());
    }

    if !monte_carlo {
        let branches: Vec<(PauliString, f64)> =
            channel.enumerate()?.into_iter().filter(|(p, _)| !p.is_identity()).collect();
        let items: Vec<_> = branches.iter().map(|(p, _)| (p, None)).collect();
        let values = eval_all(&items);
        return Ok(ms
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let s: Vec<f64> = branches.iter().zip(&values).map(|((_, c), v)| c * v[k].0).collect();
                let g: Vec<f64> = branches.iter().zip(&values).map(|((_, c), v)| c * v[k].1).collect();
                BranchAverages {
                    m,
                    c_i,
                    survival_errors: pairwise_sum(&s),
                    overlap_errors: pairwise_sum(&g),
                    se_survival: None,
                    se_fidelity: None,
                    mode: OutcomeMode::Exact,
                    breakdown: breakdown.then(|| branches.iter().map(|e| e.0.clone()).zip(s.iter().copied()).collect()),
                    notes: notes.clone(),
                }
            })
            .collect());
    }

    let count = opts.samples.unwrap_or(DEFAULT_SAMPLES);
    // Draws are generated sequentially so results do not depend on threads.
    let draws: Vec<(PauliString, Option<f64>)> = (0..count)
        .map(|_| {
            let p = channel.sample_non_identity(&mut rng).expect("c_I < 1");
            let t = joint_window.map(|w| rng.random::<f64>() * w);
            (p, t)
        })
        .collect();
    let items: Vec<_> = draws.iter().map(|(p, t)| (p, *t)).collect();
    let values = eval_all(&items);
    let w = 1.0 - c_i;
    let nf = count as f64;
    Ok(ms
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let s: Vec<f64> = values.iter().map(|v| v[k].0).collect();
            let g: Vec<f64> = values.iter().map(|v| v[k].1).collect();
            let s_mean = pairwise_sum(&s) / nf;
            let g_mean = pairwise_sum(&g) / nf;
            let surv = c_i + w * s_mean;
            let fid = (c_i + w * g_mean) / surv;
            // delta method for the ratio (c_I + w ḡ)/(c_I + w s̄)
            let z: Vec<f64> = s.iter().zip(&g).map(|(a, b)| w * (b - fid * a) / surv).collect();
            let z_mean = pairwise_sum(&z) / nf;
            let var_z = pairwise_sum(&z.iter().map(|x| (x - z_mean).powi(2)).collect::<Vec<_>>()) / (nf - 1.0).max(1.0);
            let var_s = pairwise_sum(&s.iter().map(|x| (x - s_mean).powi(2)).collect::<Vec<_>>()) / (nf - 1.0).max(1.0);
            BranchAverages {
                m,
                c_i,
                survival_errors: w * s_mean,
                overlap_errors: w * g_mean,
                se_survival: Some(w * (var_s / nf).sqrt()),
                se_fidelity: Some((var_z / nf).sqrt()),
                mode: OutcomeMode::MonteCarlo { samples: count },
                breakdown: None,
                notes: notes.clone(),
            }
        })
        .collect())
}

/// Protocol outcomes on the Pauli-branch path for every m in `ms`.
pub fn sweep_measured_pairs(
    h: &SpectralHamiltonian,
    channel: &PauliChannel,
    ms: &[usize],
    basis: &MeasurementBasis,
    mu: &TimeMeasure,
    opts: &SweepOptions,
) -> Result<Vec<ProtocolOutcome>> {
    let n = h.n();
    Ok(branch_averages(h, channel, ms, basis, mu, opts, false)?
        .into_iter()
        .map(|a| {
            let s = a.c_i + a.survival_errors;
            let g = a.c_i + a.overlap_errors;
            let mut o = ProtocolOutcome::from_totals(n, a.m, s, g, Some(a.c_i));
            o.std_error = a.se_fidelity;
            o.mode = a.mode;
            o.notes = a.notes;
            o
        })
        .collect())
}

/// Fidelity and yield from the identity weight and the detection rate R.
pub fn fidelity_yield_from_detection(c_i: f64, detection_rate: f64, m: usize, n: usize) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&c_i) || !(0.0..=1.0).contains(&detection_rate) {
        return Err(Error::Domain("c_I and R must lie in [0, 1]".into()));
    }
    if n == 0 || m > n {
        return Err(Error::Domain(format!("need 0 <= m <= n and n >= 1, got m={m}, n={n}")));
    }
    let surv = c_i + (1.0 - c_i) * (1.0 - detection_rate);
    let f = if surv > 0.0 { c_i / surv } else { 0.0 };
    Ok((f, surv * (1.0 - m as f64 / n as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{amplitude_damping, local_depolarizing};

    fn closed_form(p: f64, n: usize, m: usize) -> f64 {
        let a = (1.0 - 0.75 * p).powi(n as i32);
        let s = (1.0 - 0.75 * p).powi(m as i32) * (1.0 - p / 2.0).powi((n - m) as i32)
            + 0.5f64.powi(m as i32) * (1.0 - (1.0 - p / 2.0).powi(n as i32));
        a / s
    }

    #[test]
    fn noiseless_run() {
        let spec = HamiltonianSpec::named("trapped_ion", 3, 0).unwrap();
        let cfg = ProtocolConfig::new(spec, 1, NoiseModel::Pauli(local_depolarizing(3, 0.0).unwrap()));
        let o = run_protocol(&cfg).unwrap();
        assert!((o.fidelity - 1.0).abs() < 1e-12);
        assert!((o.survival_probability - 1.0).abs() < 1e-12);
        assert!((o.yield_value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_matches_closed_form() {
        let spec = HamiltonianSpec::named("diagonal", 4, 3).unwrap();
        let h = spec.build().unwrap();
        for m in 1..4 {
            let mut cfg = ProtocolConfig::new(spec.clone(), m, NoiseModel::Pauli(local_depolarizing(4, 0.2).unwrap()));
            cfg.path = SimulationPath::PauliBranch;
            let o = run_protocol_on(&h, &cfg).unwrap();
            assert!((o.error_free_fidelity.unwrap() - closed_form(0.2, 4, m)).abs() < 1e-10);
        }
    }

    #[test]
    fn paths_agree() {
        let spec = HamiltonianSpec::named("trapped_ion", 3, 0).unwrap();
        let h = spec.build().unwrap();
        for mu in [TimeMeasure::DeltaLimit, TimeMeasure::Uniform(1.5)] {
            let mut cfg = ProtocolConfig::new(spec.clone(), 2, NoiseModel::Pauli(local_depolarizing(3, 0.2).unwrap()));
            cfg.mu = mu;
            cfg.path = SimulationPath::PauliBranch;
            let a = run_protocol_on(&h, &cfg).unwrap();
            cfg.path = SimulationPath::DensityMatrix;
            let b = run_protocol_on(&h, &cfg).unwrap();
            assert!((a.fidelity - b.fidelity).abs() < 1e-8);
            assert!((a.survival_probability - b.survival_probability).abs() < 1e-8);
        }
    }

    #[test]
    fn kraus_on_branch_path_is_inconsistent() {
        let spec = HamiltonianSpec::named("trapped_ion", 3, 0).unwrap();
        let mut cfg =
            ProtocolConfig::new(spec, 1, NoiseModel::LocalKraus { n: 3, single: amplitude_damping(0.2).unwrap() });
        cfg.path = SimulationPath::PauliBranch;
        assert!(matches!(run_protocol(&cfg), Err(Error::Inconsistent(_))));
        cfg.pauli_twirl_enabled = true;
        assert!(run_protocol(&cfg).is_ok());
    }

    #[test]
    fn detection_formula_limits() {
        let (f, y) = fidelity_yield_from_detection(0.6, 1.0, 2, 5).unwrap();
        assert!((f - 1.0).abs() < 1e-15 && (y - 0.6 * 0.6).abs() < 1e-15);
        let (f, y) = fidelity_yield_from_detection(0.6, 0.0, 2, 5).unwrap();
        assert!((f - 0.6).abs() < 1e-15 && (y - 0.6).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        let h = HamiltonianSpec::named("rydberg", 4, 0).unwrap().build().unwrap();
        let ch = local_depolarizing(4, 0.2).unwrap();
        let basis = MeasurementBasis::Hadamard;
        let exact =
            sweep_measured_pairs(&h, &ch, &[2], &basis, &TimeMeasure::DeltaLimit, &SweepOptions::default()).unwrap();
        let opts = SweepOptions { samples: Some(4000), seed: 7, time_samples: 10 };
        let mc = sweep_measured_pairs(&h, &ch, &[2], &basis, &TimeMeasure::DeltaLimit, &opts).unwrap();
        let se = mc[0].std_error.unwrap();
        assert!(se > 0.0);
        assert!((mc[0].fidelity - exact[0].fidelity).abs() < 4.0 * se);
    }
}
