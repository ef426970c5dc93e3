//! Plain-text experiment configs: `key = value` lines, `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    FigMSweep,
    FigNoiseSweep,
    FigFiniteTime,
    FigNonpauli,
    FigToleranceAsymptotic,
    FigToleranceFinite,
    AppQkd,
    AppRepeater,
    TheoremCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::FigMSweep,
        Experiment::FigNoiseSweep,
        Experiment::FigFiniteTime,
        Experiment::FigNonpauli,
        Experiment::FigToleranceAsymptotic,
        Experiment::FigToleranceFinite,
        Experiment::AppQkd,
        Experiment::AppRepeater,
        Experiment::TheoremCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FigMSweep => "fig_m_sweep",
            Experiment::FigNoiseSweep => "fig_noise_sweep",
            Experiment::FigFiniteTime => "fig_finite_time",
            Experiment::FigNonpauli => "fig_nonpauli",
            Experiment::FigToleranceAsymptotic => "fig_tolerance_asymptotic",
            Experiment::FigToleranceFinite => "fig_tolerance_finite",
            Experiment::AppQkd => "app_qkd",
            Experiment::AppRepeater => "app_repeater",
            Experiment::TheoremCheck => "theorem_check",
        }
    }

    pub fn parse(s: &str) -> Option<Experiment> {
        Experiment::ALL.into_iter().find(|e| e.name() == s)
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::FigMSweep => "fidelity and yield vs measured pairs m, four families plus recurrence",
            Experiment::FigNoiseSweep => "fidelity and yield vs depolarizing strength p at fixed (n, m)",
            Experiment::FigFiniteTime => "fidelity vs evolution time for trapped-ion and Rydberg Hamiltonians",
            Experiment::FigNonpauli => "depolarizing plus amplitude damping, with and without Pauli twirling",
            Experiment::FigToleranceAsymptotic => "asymptotic noise tolerance vs m/n",
            Experiment::FigToleranceFinite => "finite-(n, m) noise tolerance of the diagonal protocol",
            Experiment::AppQkd => "maximal QKD distance vs detector error e_d",
            Experiment::AppRepeater => "repeater link fidelity vs fiber length",
            Experiment::TheoremCheck => "acceptance checks, one row per criterion",
        }
    }

    pub fn schema(self) -> &'static [KeySpec] {
        use Kind::*;
        const FAMILIES: &str = "diagonal,tfim_periodic,trapped_ion,rydberg";
        macro_rules! k {
            ($key:expr, $kind:expr, $default:expr, $doc:expr) => {
                KeySpec { key: $key, kind: $kind, default: $default, doc: $doc }
            };
        }
        match self {
            Experiment::FigMSweep => &[
                k!("n", Int, "10", "number of EPR pairs"),
                k!("p", Float, "0.2", "local depolarizing strength"),
                k!("families", StrList, FAMILIES, "Hamiltonian families"),
                k!("m_values", IntList, "", "measured pairs to sweep; empty means 1..n-1"),
                k!("samples", Int, "1000", "Monte-Carlo branches; 0 enumerates exactly (n <= 6)"),
                k!("basis", Str, "auto", "auto, computational or hadamard"),
                k!("time_measure", Str, "delta", "delta or uniform"),
                k!("window", Float, "2", "window length T for time_measure = uniform"),
                k!("fallback_window", Float, "10000", "window sampled jointly when the delta tables exceed capacity"),
                k!("rounds", Int, "1", "recurrence rounds for the baseline row"),
            ],
            Experiment::FigNoiseSweep => &[
                k!("n", Int, "6", "number of EPR pairs"),
                k!("m", Int, "3", "measured pairs"),
                k!("p_values", FloatList, "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4", "depolarizing strengths"),
                k!("families", StrList, FAMILIES, "Hamiltonian families"),
                k!("samples", Int, "0", "Monte-Carlo branches; 0 enumerates exactly (n <= 6)"),
                k!("basis", Str, "auto", "auto, computational or hadamard"),
                k!("time_measure", Str, "delta", "delta or uniform"),
                k!("window", Float, "2", "window length T for time_measure = uniform"),
            ],
            Experiment::FigFiniteTime => &[
                k!("n", Int, "5", "number of EPR pairs"),
                k!("m", Int, "3", "measured pairs"),
                k!("p", Float, "0.2", "local depolarizing strength"),
                k!("families", StrList, "trapped_ion,rydberg", "Hamiltonian families"),
                k!("t_max", Float, "20", "largest evolution time in native units"),
                k!("t_points", Int, "81", "evenly spaced times in [0, t_max]"),
                k!("basis", Str, "auto", "auto, computational or hadamard"),
                k!("samples", Int, "0", "Monte-Carlo branches; 0 enumerates exactly (n <= 6)"),
            ],
            Experiment::FigNonpauli => &[
                k!("n", Int, "5", "number of EPR pairs"),
                k!("m", Int, "3", "measured pairs"),
                k!("p", Float, "0.2", "depolarizing strength applied first"),
                k!("gammas", FloatList, "0,0.05,0.1,0.15,0.2,0.25,0.3", "amplitude damping strengths"),
                k!("families", StrList, "trapped_ion,rydberg", "Hamiltonian families"),
                k!("basis", Str, "hadamard", "auto, computational or hadamard"),
                k!("time_measure", Str, "delta", "delta or uniform"),
                k!("window", Float, "2", "window length T for time_measure = uniform"),
            ],
            Experiment::FigToleranceAsymptotic => &[k!("points", Int, "100", "m/n grid points in (0, 1]")],
            Experiment::FigToleranceFinite => &[
                k!("n_values", IntList, "20,50", "pair counts"),
                k!("f_ec", Float, "1", "weight of H(e_b) in the rate balance"),
            ],
            Experiment::AppQkd => &[
                k!("e_d_values", FloatList, "0.005,0.01,0.015,0.02,0.025,0.03", "detector error rates"),
                k!("n", Int, "15", "pairs per Hamiltonian block"),
                k!("m", Int, "12", "measured pairs per block"),
                k!("rounds", IntList, "1,2", "recurrence rounds to compare"),
                k!("beta", Float, "0.000282", "phase-noise rate per km"),
                k!("y0", Float, "3e-8", "dark count rate"),
                k!("alpha_db", Float, "0.21", "fiber loss in dB/km"),
                k!("f_ec", Float, "1.06", "error-correction efficiency"),
            ],
            Experiment::AppRepeater => &[
                k!("l_max", Float, "400", "largest fiber length in km"),
                k!("l_step", Float, "2", "length step in km"),
                k!("haar_n", Int, "5", "pairs per Haar block"),
                k!("haar_m", Int, "3", "measured pairs per Haar block"),
                k!("rounds", IntList, "1,2", "recurrence rounds to compare"),
                k!("threshold", Float, "0.9", "fidelity threshold for the reported crossings"),
                k!("e_d", Float, "0.015", "detector error rate"),
                k!("beta", Float, "0.000282", "phase-noise rate per km"),
                k!("y0", Float, "3e-8", "dark count rate"),
                k!("alpha_db", Float, "0.21", "fiber loss in dB/km"),
            ],
            Experiment::TheoremCheck => &[k!("skip_slow", Bool, "false", "skip the Monte-Carlo convergence criterion")],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Str,
    Bool,
    IntList,
    FloatList,
    StrList,
}

impl Kind {
    fn label(self) -> &'static str {
        match self {
            Kind::Int => "an integer",
            Kind::Float => "a number",
            Kind::Str => "a string",
            Kind::Bool => "true or false",
            Kind::IntList => "a comma-separated list of integers",
            Kind::FloatList => "a comma-separated list of numbers",
            Kind::StrList => "a comma-separated list of names",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub doc: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    IntList(Vec<i64>),
    FloatList(Vec<f64>),
    StrList(Vec<String>),
}

fn list<T>(raw: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    if raw.trim().is_empty() {
        return Some(Vec::new());
    }
    raw.split(',').map(|s| f(s.trim())).collect()
}

impl Value {
    pub fn parse(kind: Kind, raw: &str) -> Option<Value> {
        let int = |s: &str| s.parse::<i64>().ok();
        let float = |s: &str| s.parse::<f64>().ok().filter(|x| x.is_finite());
        match kind {
            Kind::Int => int(raw).map(Value::Int),
            Kind::Float => float(raw).map(Value::Float),
            Kind::Str => Some(Value::Str(raw.to_string())),
            Kind::Bool => raw.parse::<bool>().ok().map(Value::Bool),
            Kind::IntList => list(raw, int).map(Value::IntList),
            Kind::FloatList => list(raw, float).map(Value::FloatList),
            Kind::StrList => list(raw, |s| (!s.is_empty()).then(|| s.to_string())).map(Value::StrList),
        }
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Value {
    // f64 Display is the shortest string that parses back to the same value
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(x) => write!(f, "{x}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Str(s) => f.write_str(s),
            Value::Bool(b) => write!(f, "{b}"),
            Value::IntList(v) => f.write_str(&join(v)),
            Value::FloatList(v) => f.write_str(&join(v)),
            Value::StrList(v) => f.write_str(&join(v)),
        }
    }
}

const RESERVED: [&str; 3] = ["experiment", "seed", "output"];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Every schema key, with defaults filled in.
    pub params: BTreeMap<String, Value>,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Config with all defaults for `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        let params = experiment
            .schema()
            .iter()
            .map(|s| (s.key.to_string(), Value::parse(s.kind, s.default).expect("schema default parses")))
            .collect();
        ExperimentConfig { experiment, params, output_path: None, seed: 0 }
    }

    /// Parses a config, collecting every problem with its line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut errors = Vec::new();
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                errors.push(format!("line {lineno}: expected `key = value`, got `{content}`"));
                continue;
            };
            let key = k.trim().to_string();
            let mut value = v.trim();
            if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
                value = &value[1..value.len() - 1];
            }
            if key.is_empty() {
                errors.push(format!("line {lineno}: empty key"));
                continue;
            }
            if let Some((first, _, _)) = entries.iter().find(|e| e.1 == key) {
                errors.push(format!("line {lineno}: duplicate key `{key}` (first set on line {first})"));
                continue;
            }
            entries.push((lineno, key, value.to_string()));
        }

        let experiment = match entries.iter().find(|e| e.1 == "experiment") {
            None => {
                errors.push("missing required key `experiment`".into());
                None
            }
            Some((lineno, _, v)) => {
                let e = Experiment::parse(v);
                if e.is_none() {
                    let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                    errors.push(format!("line {lineno}: unknown experiment `{v}` (valid: {})", names.join(", ")));
                }
                e
            }
        };
        let Some(experiment) = experiment else {
            return Err(Error::Config(errors.join("\n")));
        };

        let mut cfg = ExperimentConfig::defaults(experiment);
        let schema = experiment.schema();
        for (lineno, key, raw) in &entries {
            match key.as_str() {
                "experiment" => {}
                "seed" => match raw.parse::<u64>() {
                    Ok(s) => cfg.seed = s,
                    Err(_) => {
                        errors.push(format!("line {lineno}: key `seed` expects a nonnegative integer, got `{raw}`"))
                    }
                },
                "output" => cfg.output_path = Some(PathBuf::from(raw)),
                _ => match schema.iter().find(|s| s.key == key) {
                    None => {
                        let near = nearest_key(key, schema);
                        errors.push(format!(
                            "line {lineno}: unknown key `{key}` for {experiment} (did you mean `{near}`?)"
                        ));
                    }
                    Some(spec) => match Value::parse(spec.kind, raw) {
                        Some(v) => {
                            cfg.params.insert(key.clone(), v);
                        }
                        None => errors
                            .push(format!("line {lineno}: key `{key}` expects {}, got `{raw}`", spec.kind.label())),
                    },
                },
            }
        }
        if errors.is_empty() { Ok(cfg) } else { Err(Error::Config(errors.join("\n"))) }
    }

    /// Text that [`ExperimentConfig::parse`] maps back to this config.
    pub fn to_manifest(&self) -> String {
        let mut out = format!("experiment = {}\nseed = {}\n", self.experiment, self.seed);
        if let Some(p) = &self.output_path {
            out.push_str(&format!("output = {}\n", p.display()));
        }
        for spec in self.experiment.schema() {
            out.push_str(&format!("{} = {}\n", spec.key, self.params[spec.key]));
        }
        out
    }

    fn get(&self, key: &str) -> &Value {
        self.params.get(key).unwrap_or_else(|| panic!("`{key}` is not in the {} schema", self.experiment))
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.get(key) {
            Value::Int(x) => *x,
            v => panic!("`{key}` is not an integer: {v:?}"),
        }
    }

    /// Integer key that must be nonnegative.
    pub fn count(&self, key: &str) -> Result<usize> {
        usize::try_from(self.int(key)).map_err(|_| Error::Config(format!("key `{key}` must be nonnegative")))
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            v => panic!("`{key}` is not a number: {v:?}"),
        }
    }

    pub fn string(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Str(s) => s,
            v => panic!("`{key}` is not a string: {v:?}"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Bool(b) => *b,
            v => panic!("`{key}` is not a boolean: {v:?}"),
        }
    }

    pub fn ints(&self, key: &str) -> &[i64] {
        match self.get(key) {
            Value::IntList(v) => v,
            v => panic!("`{key}` is not an integer list: {v:?}"),
        }
    }

    pub fn floats(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::FloatList(v) => v,
            v => panic!("`{key}` is not a number list: {v:?}"),
        }
    }

    pub fn strings(&self, key: &str) -> &[String] {
        match self.get(key) {
            Value::StrList(v) => v,
            v => panic!("`{key}` is not a name list: {v:?}"),
        }
    }
}

fn nearest_key(key: &str, schema: &[KeySpec]) -> &'static str {
    schema.iter().map(|s| s.key).chain(RESERVED).min_by_key(|k| strsim::levenshtein(key, k)).unwrap_or("experiment")
}

/// Help text listing every experiment key with its default.
pub fn schema_help() -> String {
    let mut out = String::from("Config keys (all experiments also accept experiment, seed, output):\n");
    for e in Experiment::ALL {
        out.push_str(&format!("\n{e}: {}\n", e.description()));
        for s in e.schema() {
            out.push_str(&format!("  {} = {:<12} {}\n", s.key, s.default, s.doc));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_for_theorem_check() {
        let cfg = ExperimentConfig::parse("experiment = theorem_check\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::defaults(Experiment::TheoremCheck));
        assert!(!cfg.flag("skip_slow"));
    }

    #[test]
    fn misspelled_key_names_nearest() {
        let err = ExperimentConfig::parse("experiment = fig_finite_time\nt_mx = 3\n").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("`t_mx`") && err.contains("`t_max`"), "{err}");
    }

    #[test]
    fn duplicates_and_types_are_reported() {
        let text = "experiment = fig_noise_sweep\nn = 6\nn = 7\nm = three\n";
        let err = ExperimentConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("line 3: duplicate key `n`"), "{err}");
        assert!(err.contains("line 4: key `m` expects an integer"), "{err}");
    }

    #[test]
    fn unknown_experiment() {
        let err = ExperimentConfig::parse("experiment = fig9").unwrap_err().to_string();
        assert!(err.contains("unknown experiment `fig9`"));
        assert!(ExperimentConfig::parse("# nothing\n").is_err());
    }

    #[test]
    fn finite_time_manifest_round_trip() {
        let text = "# finite-time sweep\nexperiment = fig_finite_time\nseed = 9\noutput = out/ft.csv\nt_max = 13.25\nfamilies = rydberg\np = 0.1 # comment\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.float("t_max"), 13.25);
        assert_eq!(cfg.strings("families"), ["rydberg"]);
        let again = ExperimentConfig::parse(&cfg.to_manifest()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_manifest(), cfg.to_manifest());
    }

    #[test]
    fn empty_list_is_allowed() {
        let cfg = ExperimentConfig::parse("experiment = fig_m_sweep\nm_values =\n").unwrap();
        assert!(cfg.ints("m_values").is_empty());
    }
}
