//! Iterative qubit coupled cluster (iQCC) ground-state solver.
//!
//! The crate works on qubit Hamiltonians stored as real combinations of Pauli
//! words in bitmask form. The pipeline is: map integrals to qubits
//! ([`fermion`]), find the mean-field minimum ([`product_state`]), screen
//! entanglers ([`screening`]), dress the Hamiltonian with the optimized
//! generators ([`dressing`]), optionally truncate it ([`compression`]) and
//! repeat ([`driver`]). [`oracle`] supplies exact energies for checks.

extern crate self as iqcc;

pub mod compression;
pub mod dressing;
pub mod driver;
pub mod error;
pub mod fcidump;
pub mod fermion;
pub mod operator;
pub mod optimize;
pub mod oracle;
pub mod pauli;
pub mod product_state;
pub mod screening;

pub use compression::{compress, CompressionReport};
pub use dressing::{dress, dress_sequence, DressingStep};
pub use driver::{
    extrapolate, iqcc_run, ExtrapolationFit, IqccConfig, IterationRecord, RunOutcome,
};
pub use error::{IqccError, Result};
pub use fcidump::IntegralData;
pub use operator::Operator;
pub use oracle::{ground_state, SolverMode, StateVector};
pub use pauli::{PauliLetter, PauliWord, Phase, YParity};
pub use product_state::{BlochState, PurifiedReference};
pub use screening::{GradientGroup, OperatorPool, PoolKind};

#[cfg(test)]
#[path = "../tests/common/dense.rs"]
pub(crate) mod dense;
