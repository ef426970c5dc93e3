//! Experiment runners: one CSV table per figure or application, plus a
//! manifest echoing the resolved config.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::analytics::{
    LinkBudget, QkdProtocol, RepeaterProtocol, finite_tolerance_with, max_distance, noise_tolerance, repeater_crossing,
    repeater_fidelity,
};
use crate::checks;
use crate::config::{Experiment, ExperimentConfig};
use crate::distill::{
    NoiseModel, ProtocolConfig, ProtocolOutcome, SimulationPath, SweepOptions, iterate_recurrence, run_protocol_on,
    sweep_measured_pairs,
};
use crate::error::{Error, Result};
use crate::hamlib::{HamiltonianFamily, HamiltonianSpec, MAX_QUBITS, SpectralHamiltonian};
use crate::noise::{BellDiagonal, KrausChannel, PauliChannel, amplitude_damping, local_depolarizing};
use crate::qcore::MeasurementBasis;
use crate::qcore::state::MAX_DENSITY_PAIRS;
use crate::twirl::TimeMeasure;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    /// Numbers carry 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Clone, Debug)]
pub struct ResultTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Free-text remarks for the manifest (reductions, fallbacks, crossings).
    pub notes: Vec<String>,
}

impl ResultTable {
    fn new(columns: &[&'static str]) -> Self {
        ResultTable { columns: columns.to_vec(), rows: Vec::new(), notes: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn check_family(name: &str) -> Result<()> {
    HamiltonianFamily::default_named(name, 1).map(|_| ())
}

fn basis_for(cfg: &ExperimentConfig, family: &HamiltonianFamily) -> Result<MeasurementBasis> {
    match cfg.string("basis") {
        "auto" if family.default_basis_is_hadamard() => Ok(MeasurementBasis::Hadamard),
        "auto" | "computational" => Ok(MeasurementBasis::Computational),
        "hadamard" => Ok(MeasurementBasis::Hadamard),
        other => Err(config_err(format!("basis must be auto, computational or hadamard, got `{other}`"))),
    }
}

fn time_measure(cfg: &ExperimentConfig) -> Result<TimeMeasure> {
    match cfg.string("time_measure") {
        "delta" => Ok(TimeMeasure::DeltaLimit),
        "uniform" => Ok(TimeMeasure::Uniform(cfg.float("window"))),
        other => Err(config_err(format!("time_measure must be delta or uniform, got `{other}`"))),
    }
}

fn unit_interval(cfg: &ExperimentConfig, key: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(config_err(format!("key `{key}` must lie in [0, 1], got {x} ({})", cfg.experiment)));
    }
    Ok(())
}

fn pairs(cfg: &ExperimentConfig, key: &str, lo: usize, hi: usize) -> Result<usize> {
    let v = cfg.count(key)?;
    if v < lo || v > hi {
        return Err(config_err(format!("key `{key}` must lie in [{lo}, {hi}], got {v}")));
    }
    Ok(v)
}

fn positive(cfg: &ExperimentConfig, key: &str) -> Result<f64> {
    let v = cfg.float(key);
    if !(v > 0.0) {
        return Err(config_err(format!("key `{key}` must be positive, got {v}")));
    }
    Ok(v)
}

fn link_budget(cfg: &ExperimentConfig, e_d: f64, f_ec: f64) -> Result<LinkBudget> {
    let lb = LinkBudget { e_d, beta: cfg.float("beta"), y0: cfg.float("y0"), alpha_db: cfg.float("alpha_db"), f_ec };
    lb.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(lb)
}

/// Range and name checks that do not need any simulation.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let has = |k: &str| cfg.experiment.schema().iter().any(|s| s.key == k);
    if has("families") {
        if cfg.strings("families").is_empty() {
            return Err(config_err("key `families` must name at least one family"));
        }
        for f in cfg.strings("families") {
            check_family(f)?;
        }
    }
    if has("basis") {
        basis_for(cfg, &HamiltonianFamily::Diagonal)?;
    }
    if has("time_measure") {
        time_measure(cfg)?.validate().map_err(|e| config_err(e.to_string()))?;
    }
    match cfg.experiment {
        Experiment::FigMSweep => {
            let n = pairs(cfg, "n", 2, MAX_QUBITS)?;
            unit_interval(cfg, "p", cfg.float("p"))?;
            for &m in cfg.ints("m_values") {
                if m < 1 || m as usize >= n {
                    return Err(config_err(format!("m_values entry {m} must lie in [1, n-1]")));
                }
            }
            cfg.count("samples")?;
            cfg.count("rounds")?;
            positive(cfg, "fallback_window")?;
        }
        Experiment::FigNoiseSweep => {
            let n = pairs(cfg, "n", 2, MAX_QUBITS)?;
            pairs(cfg, "m", 1, n - 1)?;
            for &p in cfg.floats("p_values") {
                unit_interval(cfg, "p_values", p)?;
            }
            cfg.count("samples")?;
        }
        Experiment::FigFiniteTime => {
            let n = pairs(cfg, "n", 2, MAX_QUBITS)?;
            pairs(cfg, "m", 1, n - 1)?;
            unit_interval(cfg, "p", cfg.float("p"))?;
            positive(cfg, "t_max")?;
            pairs(cfg, "t_points", 2, 100_000)?;
            cfg.count("samples")?;
        }
        Experiment::FigNonpauli => {
            let n = pairs(cfg, "n", 2, MAX_DENSITY_PAIRS)?;
            pairs(cfg, "m", 1, n - 1)?;
            unit_interval(cfg, "p", cfg.float("p"))?;
            for &g in cfg.floats("gammas") {
                unit_interval(cfg, "gammas", g)?;
            }
        }
        Experiment::FigToleranceAsymptotic => {
            pairs(cfg, "points", 1, 1_000_000)?;
        }
        Experiment::FigToleranceFinite => {
            for &n in cfg.ints("n_values") {
                if !(2..=10_000).contains(&n) {
                    return Err(config_err(format!("n_values entry {n} must lie in [2, 10000]")));
                }
            }
            if cfg.float("f_ec") < 0.0 {
                return Err(config_err("key `f_ec` must be nonnegative"));
            }
        }
        Experiment::AppQkd => {
            let n = pairs(cfg, "n", 2, 10_000)?;
            pairs(cfg, "m", 1, n - 1)?;
            for &e in cfg.floats("e_d_values") {
                link_budget(cfg, e, cfg.float("f_ec"))?;
            }
            for &r in cfg.ints("rounds") {
                if r < 0 {
                    return Err(config_err("recurrence rounds must be nonnegative"));
                }
            }
        }
        Experiment::AppRepeater => {
            positive(cfg, "l_max")?;
            positive(cfg, "l_step")?;
            let n = pairs(cfg, "haar_n", 1, 10_000)?;
            pairs(cfg, "haar_m", 0, n)?;
            unit_interval(cfg, "threshold", cfg.float("threshold"))?;
            link_budget(cfg, cfg.float("e_d"), 1.0)?;
            for &r in cfg.ints("rounds") {
                if r < 0 {
                    return Err(config_err("recurrence rounds must be nonnegative"));
                }
            }
        }
        Experiment::TheoremCheck => {}
    }
    Ok(())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    validate(cfg)?;
    match cfg.experiment {
        Experiment::FigMSweep => fig_m_sweep(cfg),
        Experiment::FigNoiseSweep => fig_noise_sweep(cfg),
        Experiment::FigFiniteTime => fig_finite_time(cfg),
        Experiment::FigNonpauli => fig_nonpauli(cfg),
        Experiment::FigToleranceAsymptotic => fig_tolerance_asymptotic(cfg),
        Experiment::FigToleranceFinite => fig_tolerance_finite(cfg),
        Experiment::AppQkd => app_qkd(cfg),
        Experiment::AppRepeater => app_repeater(cfg),
        Experiment::TheoremCheck => theorem_check(cfg),
    }
}

fn family_setup(
    cfg: &ExperimentConfig,
    name: &str,
    n: usize,
    k: usize,
) -> Result<(SpectralHamiltonian, MeasurementBasis)> {
    let spec = HamiltonianSpec::named(name, n, cfg.seed.wrapping_add(k as u64))?;
    let basis = basis_for(cfg, &spec.family)?;
    Ok((spec.build()?, basis))
}

fn sweep_options(cfg: &ExperimentConfig, k: usize) -> Result<SweepOptions> {
    let s = cfg.count("samples")?;
    Ok(SweepOptions { samples: (s > 0).then_some(s), seed: cfg.seed.wrapping_add(k as u64), ..SweepOptions::default() })
}

/// Branch sweep; if the delta-limit tables do not fit, t is sampled on a
/// long window instead and the substitution is noted.
fn sweep_with_fallback(
    h: &SpectralHamiltonian,
    ch: &PauliChannel,
    ms: &[usize],
    basis: &MeasurementBasis,
    mu: &TimeMeasure,
    opts: &SweepOptions,
    fallback: f64,
    notes: &mut Vec<String>,
) -> Result<Vec<ProtocolOutcome>> {
    match sweep_measured_pairs(h, ch, ms, basis, mu, opts) {
        Err(Error::Capacity(msg)) if *mu == TimeMeasure::DeltaLimit => {
            notes.push(format!(
                "{}: delta-limit tables too large ({msg}); used uniform window T = {fallback} instead",
                h.spec.family.name()
            ));
            sweep_measured_pairs(h, ch, ms, basis, &TimeMeasure::Uniform(fallback), opts)
        }
        other => other,
    }
}

fn outcome_notes(family: &str, outs: &[ProtocolOutcome], notes: &mut Vec<String>) {
    if let Some(o) = outs.first() {
        for note in &o.notes {
            let line = format!("{family}: {note}");
            if !notes.contains(&line) {
                notes.push(line);
            }
        }
    }
}

fn fig_m_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let n = cfg.count("n")?;
    let p = cfg.float("p");
    let ms: Vec<usize> = if cfg.ints("m_values").is_empty() {
        (1..n).collect()
    } else {
        cfg.ints("m_values").iter().map(|&m| m as usize).collect()
    };
    let mu = time_measure(cfg)?;
    let mut t = ResultTable::new(&[
        "family",
        "m",
        "fidelity",
        "yield",
        "std_error",
        "per_pair_fidelity",
        "error_free_fidelity",
        "survival_probability",
    ]);
    let ch = local_depolarizing(n, p)?;
    for (k, family) in cfg.strings("families").iter().enumerate() {
        let (h, basis) = family_setup(cfg, family, n, k)?;
        let opts = sweep_options(cfg, k)?;
        let mut notes = Vec::new();
        let outs = sweep_with_fallback(&h, &ch, &ms, &basis, &mu, &opts, cfg.float("fallback_window"), &mut notes)?;
        t.notes.append(&mut notes);
        outcome_notes(family, &outs, &mut t.notes);
        for o in outs {
            t.push(vec![
                family.as_str().into(),
                o.m.into(),
                o.fidelity.into(),
                o.yield_value.into(),
                o.std_error.into(),
                o.per_pair_fidelity.into(),
                o.error_free_fidelity.into(),
                o.survival_probability.into(),
            ]);
        }
    }
    let rounds = cfg.count("rounds")?;
    let (state, y) = iterate_recurrence(&BellDiagonal::werner(p)?, rounds)?;
    t.push(vec![
        format!("recurrence_{rounds}").into(),
        Cell::Empty,
        state.fidelity().into(),
        y.into(),
        Cell::Empty,
        state.fidelity().into(),
        Cell::Empty,
        Cell::Empty,
    ]);
    t.notes.push(format!("recurrence_{rounds} row: {rounds} round(s) on single-pair Werner states; m does not apply"));
    if n > 6 && cfg.count("samples")? > 0 {
        t.notes.push(format!("Monte-Carlo over Pauli branches, {} samples per family", cfg.count("samples")?));
    }
    Ok(t)
}

fn fig_noise_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let n = cfg.count("n")?;
    let m = cfg.count("m")?;
    let mu = time_measure(cfg)?;
    let mut t = ResultTable::new(&[
        "family",
        "p",
        "fidelity",
        "yield",
        "std_error",
        "per_pair_fidelity",
        "error_free_fidelity",
    ]);
    for (k, family) in cfg.strings("families").iter().enumerate() {
        let (h, basis) = family_setup(cfg, family, n, k)?;
        let opts = sweep_options(cfg, k)?;
        for &p in cfg.floats("p_values") {
            let ch = local_depolarizing(n, p)?;
            let outs = sweep_measured_pairs(&h, &ch, &[m], &basis, &mu, &opts)?;
            outcome_notes(family, &outs, &mut t.notes);
            let o = &outs[0];
            t.push(vec![
                family.as_str().into(),
                p.into(),
                o.fidelity.into(),
                o.yield_value.into(),
                o.std_error.into(),
                o.per_pair_fidelity.into(),
                o.error_free_fidelity.into(),
            ]);
        }
    }
    Ok(t)
}

fn fig_finite_time(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let n = cfg.count("n")?;
    let m = cfg.count("m")?;
    let points = cfg.count("t_points")?;
    let t_max = cfg.float("t_max");
    let ch = local_depolarizing(n, cfg.float("p"))?;
    let mut t = ResultTable::new(&[
        "family",
        "time_units",
        "physical_time",
        "unit",
        "fidelity_fixed_t",
        "per_pair_fixed_t",
        "yield_fixed_t",
        "fidelity_window",
        "per_pair_window",
        "yield_window",
        "per_pair_delta",
    ]);
    for (k, family) in cfg.strings("families").iter().enumerate() {
        let (h, basis) = family_setup(cfg, family, n, k)?;
        let opts = sweep_options(cfg, k)?;
        let delta = sweep_measured_pairs(&h, &ch, &[m], &basis, &TimeMeasure::DeltaLimit, &opts)?.remove(0);
        for i in 0..points {
            let time = t_max * i as f64 / (points - 1) as f64;
            let fixed =
                sweep_measured_pairs(&h, &ch, &[m], &basis, &TimeMeasure::Samples(vec![time]), &opts)?.remove(0);
            let window = if time > 0.0 {
                let w = sweep_measured_pairs(&h, &ch, &[m], &basis, &TimeMeasure::Uniform(time), &opts)?;
                outcome_notes(family, &w, &mut t.notes);
                w.into_iter().next().expect("one m")
            } else {
                fixed.clone()
            };
            t.push(vec![
                family.as_str().into(),
                time.into(),
                h.physical_time(time).into(),
                h.time_unit.label().into(),
                fixed.fidelity.into(),
                fixed.per_pair_fidelity.into(),
                fixed.yield_value.into(),
                window.fidelity.into(),
                window.per_pair_fidelity.into(),
                window.yield_value.into(),
                delta.per_pair_fidelity.into(),
            ]);
        }
    }
    t.notes.push("fixed_t columns evolve for exactly t; window columns average t uniformly over [0, t]".into());
    Ok(t)
}

fn fig_nonpauli(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let n = cfg.count("n")?;
    let m = cfg.count("m")?;
    let p = cfg.float("p");
    let mu = time_measure(cfg)?;
    let dep = KrausChannel::from_pauli_weights([1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0])?;
    let mut t = ResultTable::new(&[
        "family",
        "gamma",
        "twirl",
        "fidelity",
        "yield",
        "per_pair_fidelity",
        "survival_probability",
    ]);
    for (k, family) in cfg.strings("families").iter().enumerate() {
        let spec = HamiltonianSpec::named(family, n, cfg.seed.wrapping_add(k as u64))?;
        let basis = basis_for(cfg, &spec.family)?;
        let h = spec.build()?;
        for &gamma in cfg.floats("gammas") {
            let single = amplitude_damping(gamma)?.compose_after(&dep)?;
            for twirl in [false, true] {
                let mut pc = ProtocolConfig::new(spec.clone(), m, NoiseModel::LocalKraus { n, single: single.clone() });
                pc.mu = mu.clone();
                pc.basis = basis.clone();
                pc.pauli_twirl_enabled = twirl;
                pc.path = SimulationPath::DensityMatrix;
                let o = run_protocol_on(&h, &pc)?;
                t.push(vec![
                    family.as_str().into(),
                    gamma.into(),
                    usize::from(twirl).into(),
                    o.fidelity.into(),
                    o.yield_value.into(),
                    o.per_pair_fidelity.into(),
                    o.survival_probability.into(),
                ]);
            }
        }
    }
    t.notes.push("noise per qubit: depolarizing p followed by amplitude damping gamma".into());
    Ok(t)
}

fn fig_tolerance_asymptotic(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let points = cfg.count("points")?;
    let mut t = ResultTable::new(&["m_over_n", "p_tol", "error_rate_tol"]);
    for k in 1..=points {
        let r = noise_tolerance(k as f64 / points as f64)?;
        t.push(vec![r.m_over_n.into(), r.p_tol.into(), r.error_rate_tol.into()]);
    }
    Ok(t)
}

fn fig_tolerance_finite(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let f_ec = cfg.float("f_ec");
    let mut t = ResultTable::new(&["n", "m", "m_over_n", "error_rate_tol", "is_best"]);
    for &n in cfg.ints("n_values") {
        let n = n as usize;
        let vals: Vec<f64> = (1..n).map(|m| finite_tolerance_with(n, m, f_ec)).collect::<Result<_>>()?;
        let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let best_m = vals.iter().position(|&v| v == best).map_or(0, |i| i + 1);
        for (i, v) in vals.iter().enumerate() {
            let m = i + 1;
            t.push(vec![
                n.into(),
                m.into(),
                (m as f64 / n as f64).into(),
                (*v).into(),
                usize::from(m == best_m).into(),
            ]);
        }
        t.notes.push(format!("n={n}: best error rate {best:.6} at m={best_m}"));
    }
    Ok(t)
}

fn qkd_protocols(cfg: &ExperimentConfig) -> Result<Vec<(String, QkdProtocol)>> {
    let mut v = vec![("one_way".to_string(), QkdProtocol::OneWay)];
    for &r in cfg.ints("rounds") {
        v.push((format!("recurrence_{r}"), QkdProtocol::Recurrence(r as usize)));
    }
    let (n, m) = (cfg.count("n")?, cfg.count("m")?);
    v.push((format!("hamiltonian_{n}_{m}"), QkdProtocol::Hamiltonian { n, m }));
    Ok(v)
}

fn app_qkd(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut t = ResultTable::new(&["e_d", "protocol", "max_distance_km"]);
    let protocols = qkd_protocols(cfg)?;
    for &e_d in cfg.floats("e_d_values") {
        let lb = link_budget(cfg, e_d, cfg.float("f_ec"))?;
        for (label, proto) in &protocols {
            t.push(vec![e_d.into(), label.as_str().into(), max_distance(*proto, &lb)?.into()]);
        }
    }
    Ok(t)
}

fn app_repeater(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let lb = link_budget(cfg, cfg.float("e_d"), 1.0)?;
    let mut protocols = vec![("none".to_string(), RepeaterProtocol::None)];
    for &r in cfg.ints("rounds") {
        protocols.push((format!("recurrence_{r}"), RepeaterProtocol::Recurrence(r as usize)));
    }
    let (n, m) = (cfg.count("haar_n")?, cfg.count("haar_m")?);
    protocols.push((format!("haar_hamiltonian_{n}_{m}"), RepeaterProtocol::HaarHamiltonian { n, m }));
    let (l_max, step) = (cfg.float("l_max"), cfg.float("l_step"));
    let mut t = ResultTable::new(&["length_km", "protocol", "fidelity"]);
    let steps = (l_max / step).floor() as usize;
    for i in 0..=steps {
        let l = i as f64 * step;
        for (label, proto) in &protocols {
            t.push(vec![l.into(), label.as_str().into(), repeater_fidelity(l, &lb, *proto)?.into()]);
        }
    }
    let threshold = cfg.float("threshold");
    for (label, proto) in &protocols {
        let c = repeater_crossing(threshold, &lb, *proto)?;
        t.notes.push(format!("{label}: fidelity drops below {threshold} at {c:.2} km"));
    }
    Ok(t)
}

fn theorem_check(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut t = ResultTable::new(&["criterion", "pass", "residual", "detail"]);
    for r in checks::run_all(cfg.flag("skip_slow")) {
        t.push(vec![r.id.into(), usize::from(r.pass).into(), r.residual.into(), r.detail.into()]);
    }
    Ok(t)
}

/// Default CSV path for an experiment.
pub fn default_output(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_path.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.experiment)))
}

/// Manifest path beside a CSV: `name.csv` → `name.manifest`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest")
}

/// Writes the CSV and its manifest; returns the manifest path.
pub fn write_outputs(cfg: &ExperimentConfig, table: &ResultTable, csv_path: &Path, wall: Duration) -> Result<PathBuf> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    table.write_csv(csv_path)?;
    let mut text = cfg.to_manifest();
    text.push_str(&format!("# version = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# rows = {}\n", table.rows.len()));
    text.push_str(&format!("# wall_time_s = {:.3}\n", wall.as_secs_f64()));
    for note in &table.notes {
        text.push_str(&format!("# note: {note}\n"));
    }
    let mpath = manifest_path(csv_path);
    fs::write(&mpath, text)?;
    Ok(mpath)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn tolerance_table_shape() {
        let t = run_experiment(&parse("experiment = fig_tolerance_asymptotic\npoints = 4\n")).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[3][2], Cell::Num(1.0 / 3.0));
    }

    #[test]
    fn small_m_sweep_is_deterministic() {
        let text = "experiment = fig_m_sweep\nn = 3\nsamples = 0\nfamilies = diagonal,trapped_ion\n";
        let a = run_experiment(&parse(text)).unwrap();
        let b = run_experiment(&parse(text)).unwrap();
        assert_eq!(a.rows, b.rows);
        // two families x two m values plus the recurrence row
        assert_eq!(a.rows.len(), 5);
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let bad = [
            "experiment = fig_noise_sweep\nm = 6\n",
            "experiment = fig_m_sweep\nfamilies = ising\n",
            "experiment = app_qkd\ne_d_values = 0.7\n",
        ];
        for text in bad {
            assert!(matches!(validate(&parse(text)), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn csv_and_manifest_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse("experiment = app_repeater\nl_max = 10\nl_step = 5\n");
        let t = run_experiment(&cfg).unwrap();
        let path = dir.path().join("rep.csv");
        let m = write_outputs(&cfg, &t, &path, Duration::from_millis(5)).unwrap();
        let body = fs::read_to_string(&path).unwrap();
        assert!(body.starts_with("length_km,protocol,fidelity\n"));
        assert_eq!(body.lines().count(), 1 + 3 * 4);
        let back = ExperimentConfig::parse(&fs::read_to_string(m).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn numbers_keep_full_precision() {
        let x = 0.1 + 0.2;
        assert_eq!(Cell::Num(x).render().parse::<f64>().unwrap(), x);
    }
}
