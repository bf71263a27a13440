use std::fmt;
use std::str::FromStr;

use super::{CircuitError, Phase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    RX,
    RY,
    RZ,
    CX,
    CZ,
    RZZ,
    SWAP,
}

impl GateKind {
    pub const ALL: [GateKind; 15] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::CX,
        GateKind::CZ,
        GateKind::RZZ,
        GateKind::SWAP,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ | GateKind::RZZ | GateKind::SWAP => 2,
            _ => 1,
        }
    }

    pub fn is_parametric(self) -> bool {
        matches!(
            self,
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::RZZ
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::CX => "CX",
            GateKind::CZ => "CZ",
            GateKind::RZZ => "RZZ",
            GateKind::SWAP => "SWAP",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<GateKind, CircuitError> {
        let upper = s.to_ascii_uppercase();
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == upper)
            .or(match upper.as_str() {
                "CNOT" => Some(GateKind::CX),
                _ => None,
            })
            .ok_or_else(|| CircuitError::UnknownGate(s.to_string()))
    }
}

/// One gate application. `qubits` holds `kind.arity()` distinct indices;
/// for `CX` the first is the control.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gate {
    kind: GateKind,
    qubits: [usize; 2],
    param: Option<Phase>,
}

impl Gate {
    pub fn new(
        kind: GateKind,
        qubits: &[usize],
        param: Option<Phase>,
    ) -> Result<Gate, CircuitError> {
        if qubits.len() != kind.arity() {
            return Err(CircuitError::Arity {
                kind,
                got: qubits.len(),
            });
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(CircuitError::RepeatedQubit(qubits[0]));
        }
        if kind.is_parametric() != param.is_some() {
            return Err(CircuitError::Parameter(kind));
        }
        let mut q = [0; 2];
        q[..qubits.len()].copy_from_slice(qubits);
        Ok(Gate {
            kind,
            qubits: q,
            param,
        })
    }

    fn one(kind: GateKind, q: usize) -> Gate {
        Gate {
            kind,
            qubits: [q, 0],
            param: None,
        }
    }

    fn rot(kind: GateKind, q: usize, theta: Phase) -> Gate {
        Gate {
            kind,
            qubits: [q, 0],
            param: Some(theta),
        }
    }

    fn two(kind: GateKind, a: usize, b: usize, param: Option<Phase>) -> Gate {
        assert_ne!(a, b, "two-qubit gate on a single qubit");
        Gate {
            kind,
            qubits: [a, b],
            param,
        }
    }

    pub fn h(q: usize) -> Gate {
        Gate::one(GateKind::H, q)
    }
    pub fn x(q: usize) -> Gate {
        Gate::one(GateKind::X, q)
    }
    pub fn y(q: usize) -> Gate {
        Gate::one(GateKind::Y, q)
    }
    pub fn z(q: usize) -> Gate {
        Gate::one(GateKind::Z, q)
    }
    pub fn s(q: usize) -> Gate {
        Gate::one(GateKind::S, q)
    }
    pub fn sdg(q: usize) -> Gate {
        Gate::one(GateKind::Sdg, q)
    }
    pub fn t(q: usize) -> Gate {
        Gate::one(GateKind::T, q)
    }
    pub fn tdg(q: usize) -> Gate {
        Gate::one(GateKind::Tdg, q)
    }
    pub fn rx(q: usize, theta: Phase) -> Gate {
        Gate::rot(GateKind::RX, q, theta)
    }
    pub fn ry(q: usize, theta: Phase) -> Gate {
        Gate::rot(GateKind::RY, q, theta)
    }
    pub fn rz(q: usize, theta: Phase) -> Gate {
        Gate::rot(GateKind::RZ, q, theta)
    }
    pub fn cx(control: usize, target: usize) -> Gate {
        Gate::two(GateKind::CX, control, target, None)
    }
    pub fn cz(a: usize, b: usize) -> Gate {
        Gate::two(GateKind::CZ, a, b, None)
    }
    pub fn rzz(a: usize, b: usize, theta: Phase) -> Gate {
        Gate::two(GateKind::RZZ, a, b, Some(theta))
    }
    pub fn swap(a: usize, b: usize) -> Gate {
        Gate::two(GateKind::SWAP, a, b, None)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn param(&self) -> Option<Phase> {
        self.param
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.qubits().contains(&q)
    }

    /// Same gate with its qubits renamed through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        let mut g = *self;
        for q in g.qubits[..self.kind.arity()].iter_mut() {
            *q = map(*q);
        }
        g
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.kind)?;
        let qs = self.qubits();
        write!(f, "{}", qs[0])?;
        if qs.len() == 2 {
            write!(f, ",{}", qs[1])?;
        }
        if let Some(p) = self.param {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gate({self})")
    }
}
