//! Dense statevector simulation.

mod maxcut;
mod statevector;

use thiserror::Error;

pub use maxcut::{MaxCutQaoa, MAX_QAOA_VERTICES};
pub use statevector::{
    expectation_pauli, full_payload_len, gate_matrix, maxcut_energy, one_qubit_matrix, simulate,
    Matrix2, Pauli, Statevector, MAX_QUBITS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{n_qubits} qubits exceed the simulator limit of {max}")]
    TooManyQubits { n_qubits: usize, max: usize },
    #[error("qubit {0} out of range or repeated")]
    QubitOutOfRange(usize),
    #[error("state has {state} qubits but the graph has {graph} vertices")]
    Dimension { state: usize, graph: usize },
    #[error("bad payload: {0}")]
    Payload(String),
}
