//! C interface to the iqcc solver.
//!
//! Objects cross the boundary as opaque pointers that the caller releases
//! with the matching `*_free` function. Every fallible call returns an
//! `IqccStatus`; on failure `iqcc_last_error` describes the problem until
//! the next failing call on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use iqcc::fermion::{
    choose_sector, find_stationary_qubits, map_hamiltonian, reduce_qubits, Mapping,
};
use iqcc::oracle::{ground_energy, SolverMode};
use iqcc::{compress, dress, DressingStep, IntegralData, IqccConfig, IqccError, PoolKind};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqccStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    DimensionMismatch = 5,
    BudgetExceeded = 6,
    FitRejected = 7,
    Io = 8,
    ContractViolation = 9,
    OutOfRange = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqccPool {
    Dis = 0,
    FermionicSd = 1,
    TwoQubitPauli = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqccMapping {
    JordanWigner = 0,
    Parity = 1,
}

/// Loop settings. Fill with `iqcc_run_options_default` and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IqccRunOptions {
    pub n_g: usize,
    pub n_steps: usize,
    pub pool: IqccPool,
    pub grad_threshold: f64,
    pub energy_threshold: f64,
    /// Compression threshold in hartree; zero or negative disables it.
    pub epsilon: f64,
    pub n_random_guesses: usize,
    pub rng_seed: u64,
}

/// A qubit Hamiltonian.
pub struct IqccOperator(iqcc::Operator);

/// The energies and final Hamiltonian of a finished run.
pub struct IqccRun(iqcc::RunOutcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &IqccError) -> IqccStatus {
    match e {
        IqccError::DimensionMismatch { .. } => IqccStatus::DimensionMismatch,
        IqccError::Parse { .. } => IqccStatus::Parse,
        IqccError::InvalidArgument(_) => IqccStatus::InvalidArgument,
        IqccError::BudgetExceeded { .. } => IqccStatus::BudgetExceeded,
        IqccError::ContractViolation(_) => IqccStatus::ContractViolation,
        IqccError::FitRejected(_) => IqccStatus::FitRejected,
        IqccError::Io(_) => IqccStatus::Io,
    }
}

struct Failure(IqccStatus, String);

impl From<IqccError> for Failure {
    fn from(e: IqccError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> IqccStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IqccStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            IqccStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(IqccStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(IqccStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn operator<'a>(p: *const IqccOperator) -> Result<&'a iqcc::Operator, Failure> {
    p.as_ref().map(|o| &o.0).ok_or_else(|| null("operator"))
}

unsafe fn run_ref<'a>(p: *const IqccRun) -> Result<&'a iqcc::RunOutcome, Failure> {
    p.as_ref().map(|r| &r.0).ok_or_else(|| null("run"))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn boxed_operator(h: iqcc::Operator) -> *mut IqccOperator {
    Box::into_raw(Box::new(IqccOperator(h)))
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iqcc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn iqcc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse the line format `<coefficient> <letters>`.
#[no_mangle]
pub unsafe extern "C" fn iqcc_operator_parse(
    text_in: *const c_char,
    out: *mut *mut IqccOperator,
) -> IqccStatus {
    guard(|| {
        let h = iqcc::Operator::parse_text(text(text_in, "text")?)?;
        put(out, boxed_operator(h))
    })
}

/// Map FCIDUMP text to qubits. With `reduce` set, stationary qubits are
/// removed in the sector of lowest energy.
#[no_mangle]
pub unsafe extern "C" fn iqcc_operator_from_fcidump(
    text_in: *const c_char,
    mapping: IqccMapping,
    reduce: bool,
    out: *mut *mut IqccOperator,
) -> IqccStatus {
    guard(|| {
        let data = IntegralData::parse(text(text_in, "text")?)?;
        let mapping = match mapping {
            IqccMapping::JordanWigner => Mapping::JordanWigner,
            IqccMapping::Parity => Mapping::Parity,
        };
        let mut h = map_hamiltonian(&data, mapping)?;
        if reduce && !find_stationary_qubits(&h).is_empty() {
            let choice = choose_sector(&h, h.n_qubits())?;
            h = reduce_qubits(&h, &choice.assignment)?;
        }
        put(out, boxed_operator(h))
    })
}

#[no_mangle]
pub unsafe extern "C" fn iqcc_operator_free(op: *mut IqccOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Qubit count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn iqcc_operator_n_qubits(op: *const IqccOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.n_qubits())
}

/// Term count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn iqcc_operator_len(op: *const IqccOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.len())
}

/// Text form of the operator; release with `iqcc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn iqcc_operator_to_text(
    op: *const IqccOperator,
    out: *mut *mut c_char,
) -> IqccStatus {
    guard(|| {
        let s = CString::new(operator(op)?.to_text())
            .map_err(|e| Failure(IqccStatus::Panic, e.to_string()))?;
        put(out, s.into_raw())
    })
}

/// Lowest eigenvalue by exact diagonalization.
#[no_mangle]
pub unsafe extern "C" fn iqcc_ground_energy(op: *const IqccOperator, out: *mut f64) -> IqccStatus {
    guard(|| {
        let h = operator(op)?;
        put(out, ground_energy(h, SolverMode::auto(h.n_qubits()))?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn iqcc_compress(
    op: *const IqccOperator,
    epsilon: f64,
    out: *mut *mut IqccOperator,
) -> IqccStatus {
    guard(|| {
        let (c, _) = compress(operator(op)?, epsilon)?;
        put(out, boxed_operator(c))
    })
}

/// Conjugate by `exp(-i tau P / 2)` for the Pauli word `P`, e.g. "XYZI".
#[no_mangle]
pub unsafe extern "C" fn iqcc_dress(
    op: *const IqccOperator,
    generator: *const c_char,
    tau: f64,
    out: *mut *mut IqccOperator,
) -> IqccStatus {
    guard(|| {
        let p = text(generator, "generator")?.parse()?;
        let d = dress(operator(op)?, &DressingStep::new(p, tau))?;
        put(out, boxed_operator(d))
    })
}

#[no_mangle]
pub extern "C" fn iqcc_run_options_default() -> IqccRunOptions {
    let c = IqccConfig::default();
    IqccRunOptions {
        n_g: c.n_g,
        n_steps: c.n_steps,
        pool: IqccPool::Dis,
        grad_threshold: c.grad_threshold,
        energy_threshold: c.energy_threshold,
        epsilon: c.epsilon.unwrap_or(0.0),
        n_random_guesses: c.n_random_guesses,
        rng_seed: c.rng_seed,
    }
}

#[no_mangle]
pub unsafe extern "C" fn iqcc_run(
    op: *const IqccOperator,
    options: *const IqccRunOptions,
    out: *mut *mut IqccRun,
) -> IqccStatus {
    guard(|| {
        let h = operator(op)?;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        let config = IqccConfig {
            n_g: o.n_g,
            n_steps: o.n_steps,
            pool: match o.pool {
                IqccPool::Dis => PoolKind::Dis,
                IqccPool::FermionicSd => PoolKind::FermionicSd,
                IqccPool::TwoQubitPauli => PoolKind::TwoQubitPauli,
            },
            grad_threshold: o.grad_threshold,
            energy_threshold: o.energy_threshold,
            epsilon: (o.epsilon > 0.0).then_some(o.epsilon),
            n_random_guesses: o.n_random_guesses,
            rng_seed: o.rng_seed,
            ..IqccConfig::default()
        };
        let outcome = iqcc::iqcc_run(h, &config)?;
        put(out, Box::into_raw(Box::new(IqccRun(outcome))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn iqcc_run_free(run: *mut IqccRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of recorded energies, including the mean-field start.
#[no_mangle]
pub unsafe extern "C" fn iqcc_run_len(run: *const IqccRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.records.len())
}

#[no_mangle]
pub unsafe extern "C" fn iqcc_run_energy(
    run: *const IqccRun,
    k: usize,
    out: *mut f64,
) -> IqccStatus {
    guard(|| {
        let r = run_ref(run)?;
        let rec = r.records.get(k).ok_or_else(|| {
            Failure(
                IqccStatus::OutOfRange,
                format!("iteration {k} of {}", r.records.len()),
            )
        })?;
        put(out, rec.energy)
    })
}

/// Extrapolated energy; fails with `FitRejected` when no fit was possible.
#[no_mangle]
pub unsafe extern "C" fn iqcc_run_extrapolated_energy(
    run: *const IqccRun,
    out: *mut f64,
) -> IqccStatus {
    guard(|| {
        let r = run_ref(run)?;
        match &r.extrapolation {
            Some(fit) => put(out, fit.estimate),
            None => Err(Failure(
                IqccStatus::FitRejected,
                r.extrapolation_note
                    .clone()
                    .unwrap_or_else(|| "no fit".into()),
            )),
        }
    })
}

/// Copy of the final dressed Hamiltonian.
#[no_mangle]
pub unsafe extern "C" fn iqcc_run_hamiltonian(
    run: *const IqccRun,
    out: *mut *mut IqccOperator,
) -> IqccStatus {
    guard(|| {
        let r = run_ref(run)?;
        put(out, boxed_operator(r.final_hamiltonian.clone()))
    })
}
