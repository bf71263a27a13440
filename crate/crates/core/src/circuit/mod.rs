//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered gate list over `n_qubits` wires whose rotation
//! angles are quantized [`Phase`]s. Quantizing at construction time means the
//! hashing pipeline and the simulator consume exactly the same numbers, so two
//! circuits with equal keys were simulated from equal parameters.

mod builders;
mod gate;
mod phase;
mod text;

use std::fmt;

use thiserror::Error;

pub use builders::{build_hea, build_qaoa_maxcut, build_random, MaxCutGraph};
pub use gate::{Gate, GateKind};
pub use phase::{quantize_phase, Phase, QUANTUM_BITS};
pub use text::parse_qasm;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("invalid phase {0}")]
    InvalidPhase(String),
    #[error("angle {0} is not finite")]
    NonFiniteAngle(f64),
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
    #[error("{kind} acts on {} qubit(s), got {got}", kind.arity())]
    Arity { kind: GateKind, got: usize },
    #[error("qubit {0} repeated in a two-qubit gate")]
    RepeatedQubit(usize),
    #[error("{0} parameter presence does not match the gate kind")]
    Parameter(GateKind),
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("a circuit needs at least one qubit")]
    NoQubits,
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    label: Option<String>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Circuit, CircuitError> {
        if n_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        Ok(Circuit {
            n_qubits,
            gates: Vec::new(),
            label: None,
        })
    }

    pub fn from_gates(
        n_qubits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Circuit, CircuitError> {
        let mut c = Circuit::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Circuit {
        self.label = Some(label.into());
        self
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        if let Some(&q) = gate.qubits().iter().find(|&&q| q >= self.n_qubits) {
            return Err(CircuitError::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Serializes to the line-oriented text format (see [`Circuit::parse`]).
    pub fn to_text(&self) -> String {
        text::to_text(self)
    }

    /// Parses the text format:
    ///
    /// ```text
    /// qubits 2
    /// label bell        # optional
    /// H 0
    /// RZ 1 1/4          # phases are fractions of π
    /// CX 0,1
    /// ```
    ///
    /// Blank lines and `#` comments are ignored. Errors carry 1-based line numbers.
    pub fn parse(src: &str) -> Result<Circuit, CircuitError> {
        text::parse_text(src)
    }
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Circuit({} qubits, {:?})", self.n_qubits, self.gates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_validates_qubits() {
        let mut c = Circuit::new(2).unwrap();
        assert!(c.push(Gate::cx(0, 1)).is_ok());
        assert_eq!(
            c.push(Gate::h(2)),
            Err(CircuitError::QubitOutOfRange {
                qubit: 2,
                n_qubits: 2
            })
        );
        assert_eq!(Circuit::new(0), Err(CircuitError::NoQubits));
    }

    #[test]
    fn gate_constructor_checks() {
        assert!(Gate::new(GateKind::CX, &[1, 1], None).is_err());
        assert!(Gate::new(GateKind::CX, &[1], None).is_err());
        assert!(Gate::new(GateKind::RZ, &[0], None).is_err());
        assert!(Gate::new(GateKind::H, &[0], Some(Phase::PI)).is_err());
        let g = Gate::new(GateKind::RZZ, &[2, 0], Some(Phase::HALF_PI)).unwrap();
        assert_eq!(g.qubits(), &[2, 0]);
        assert_eq!(g.to_string(), "RZZ 2,0 1/2");
    }
}
