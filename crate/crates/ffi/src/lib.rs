//! C ABI over `hamdistill`.
//!
//! Every fallible function returns an [`HdStatus`]; on failure the message
//! is kept per thread and read back with [`hd_last_error`]. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::path::Path;
use std::time::Instant;

use hamdistill::Error;
use hamdistill::analytics::{LinkBudget, QkdProtocol, finite_tolerance_with, max_distance, noise_tolerance};
use hamdistill::config::ExperimentConfig;
use hamdistill::distill::{NoiseModel, ProtocolConfig, ProtocolOutcome, SimulationPath, run_protocol_on};
use hamdistill::experiment::{run_experiment, write_outputs};
use hamdistill::hamlib::{HamiltonianSpec, SpectralHamiltonian};
use hamdistill::noise::local_depolarizing;
use hamdistill::otoc::detection_probability;
use hamdistill::qcore::{MeasurementBasis, PauliString};
use hamdistill::twirl::TimeMeasure;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Domain = 4,
    Dimension = 5,
    Capacity = 6,
    NotHermitian = 7,
    NotTracePreserving = 8,
    Numerical = 9,
    Config = 10,
    Inconsistent = 11,
    Io = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdBasis {
    Computational = 0,
    Hadamard = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdPath {
    Auto = 0,
    PauliBranch = 1,
    DensityMatrix = 2,
}

/// Protocol outcome. Fields that do not apply are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdOutcome {
    pub fidelity: f64,
    pub yield_value: f64,
    pub per_pair_fidelity: f64,
    pub survival_probability: f64,
    pub error_free_fidelity: f64,
    pub std_error: f64,
}

impl From<&ProtocolOutcome> for HdOutcome {
    fn from(o: &ProtocolOutcome) -> Self {
        HdOutcome {
            fidelity: o.fidelity,
            yield_value: o.yield_value,
            per_pair_fidelity: o.per_pair_fidelity,
            survival_probability: o.survival_probability,
            error_free_fidelity: o.error_free_fidelity.unwrap_or(f64::NAN),
            std_error: o.std_error.unwrap_or(f64::NAN),
        }
    }
}

/// Opaque Hamiltonian with its cached spectral decomposition.
pub struct HdHamiltonian {
    inner: SpectralHamiltonian,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> HdStatus {
    match e {
        Error::Domain(_) => HdStatus::Domain,
        Error::Dimension { .. } => HdStatus::Dimension,
        Error::Capacity(_) => HdStatus::Capacity,
        Error::NotHermitian(_) => HdStatus::NotHermitian,
        Error::NotTracePreserving(_) => HdStatus::NotTracePreserving,
        Error::Numerical(_) => HdStatus::Numerical,
        Error::Config(_) => HdStatus::Config,
        Error::Inconsistent(_) => HdStatus::Inconsistent,
        Error::Io(_) => HdStatus::Io,
    }
}

struct Failure(HdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(HdStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            HdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HdStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|e| Failure(HdStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

fn basis(b: HdBasis) -> MeasurementBasis {
    match b {
        HdBasis::Computational => MeasurementBasis::Computational,
        HdBasis::Hadamard => MeasurementBasis::Hadamard,
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Builds a named family (`diagonal`, `tfim_periodic`, `trapped_ion`,
/// `rydberg`, `haar_random`, `clifford_diagonal`) with default parameters.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_hamiltonian_new(
    family: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut HdHamiltonian,
) -> HdStatus {
    guard(|| {
        let name = unsafe { read_str(family, "family") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = HamiltonianSpec::named(name, n, seed)?.build()?;
        unsafe { write_out(out, Box::into_raw(Box::new(HdHamiltonian { inner })), "out") }
    })
}

/// # Safety
/// `h` must be null or a handle from [`hd_hamiltonian_new`] not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_hamiltonian_free(h: *mut HdHamiltonian) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Number of qubits per party, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_hamiltonian_qubits(h: *const HdHamiltonian) -> usize {
    unsafe { h.as_ref() }.map_or(0, |h| h.inner.n())
}

/// Protocol with local depolarizing noise of strength `p` on each qubit
/// and the delta-limit time average. `samples` = 0 selects exact
/// enumeration.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_run_protocol(
    h: *const HdHamiltonian,
    m: usize,
    p: f64,
    basis_kind: HdBasis,
    path: HdPath,
    samples: usize,
    seed: u64,
    out: *mut HdOutcome,
) -> HdStatus {
    guard(|| {
        let h = unsafe { h.as_ref() }.ok_or_else(|| null("h"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = h.inner.n();
        let mut cfg = ProtocolConfig::new(h.inner.spec.clone(), m, NoiseModel::Pauli(local_depolarizing(n, p)?));
        cfg.basis = basis(basis_kind);
        cfg.mu = TimeMeasure::DeltaLimit;
        cfg.path = match path {
            HdPath::Auto => SimulationPath::Auto,
            HdPath::PauliBranch => SimulationPath::PauliBranch,
            HdPath::DensityMatrix => SimulationPath::DensityMatrix,
        };
        cfg.samples = (samples > 0).then_some(samples);
        cfg.seed = seed;
        let o = run_protocol_on(&h.inner, &cfg)?;
        unsafe { write_out(out, HdOutcome::from(&o), "out") }
    })
}

/// Probability that Pauli branch `pauli_index` (two bits per qubit, qubit 0
/// most significant; 0=I 1=X 2=Y 3=Z) is detected after evolving for `t`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_detection_probability(
    h: *const HdHamiltonian,
    t: f64,
    pauli_index: u64,
    m: usize,
    basis_kind: HdBasis,
    out: *mut f64,
) -> HdStatus {
    guard(|| {
        let h = unsafe { h.as_ref() }.ok_or_else(|| null("h"))?;
        let n = h.inner.n();
        if n < 32 && pauli_index >= 1u64 << (2 * n) {
            return Err(Failure(
                HdStatus::InvalidArgument,
                format!("pauli_index {pauli_index} out of range for n = {n}"),
            ));
        }
        let ps = PauliString::from_index(n, pauli_index as usize);
        let d = detection_probability(&h.inner, t, &ps, m, &basis(basis_kind))?;
        unsafe { write_out(out, d, "out") }
    })
}

/// Asymptotic error-rate tolerance at measured fraction `m_over_n`.
///
/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_noise_tolerance(m_over_n: f64, out: *mut f64) -> HdStatus {
    guard(|| unsafe { write_out(out, noise_tolerance(m_over_n)?.error_rate_tol, "out") })
}

/// Finite-size error-rate tolerance for n pairs with m measured.
///
/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_finite_tolerance(n: usize, m: usize, f_ec: f64, out: *mut f64) -> HdStatus {
    guard(|| unsafe { write_out(out, finite_tolerance_with(n, m, f_ec)?, "out") })
}

/// Default fiber link budget.
#[unsafe(no_mangle)]
pub extern "C" fn hd_link_budget_default() -> HdLinkBudget {
    LinkBudget::default().into()
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdLinkBudget {
    pub e_d: f64,
    pub beta: f64,
    pub y0: f64,
    pub alpha_db: f64,
    pub f_ec: f64,
}

impl From<LinkBudget> for HdLinkBudget {
    fn from(l: LinkBudget) -> Self {
        HdLinkBudget { e_d: l.e_d, beta: l.beta, y0: l.y0, alpha_db: l.alpha_db, f_ec: l.f_ec }
    }
}

impl From<HdLinkBudget> for LinkBudget {
    fn from(l: HdLinkBudget) -> Self {
        LinkBudget { e_d: l.e_d, beta: l.beta, y0: l.y0, alpha_db: l.alpha_db, f_ec: l.f_ec }
    }
}

/// Maximum QKD distance in km. `rounds` < 0 selects one-way
/// post-processing, `n` > 0 selects the diagonal-Hamiltonian protocol with
/// `m` measured pairs, otherwise `rounds` recurrence rounds.
///
/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_qkd_max_distance(
    budget: HdLinkBudget,
    rounds: i32,
    n: usize,
    m: usize,
    out: *mut f64,
) -> HdStatus {
    guard(|| {
        let proto = if n > 0 {
            QkdProtocol::Hamiltonian { n, m }
        } else if rounds < 0 {
            QkdProtocol::OneWay
        } else {
            QkdProtocol::Recurrence(rounds as usize)
        };
        let d = max_distance(proto, &budget.into())?;
        unsafe { write_out(out, d, "out") }
    })
}

/// Runs an experiment from config text and writes the CSV (and manifest)
/// to `csv_path`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn hd_run_config(config_text: *const c_char, csv_path: *const c_char) -> HdStatus {
    guard(|| {
        let text = unsafe { read_str(config_text, "config_text") }?;
        let path = unsafe { read_str(csv_path, "csv_path") }?;
        let cfg = ExperimentConfig::parse(text)?;
        let start = Instant::now();
        let table = run_experiment(&cfg)?;
        write_outputs(&cfg, &table, Path::new(path), start.elapsed())?;
        Ok(())
    })
}
