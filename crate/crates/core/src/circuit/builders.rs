use std::collections::BTreeSet;
use std::f64::consts::PI;

use super::{quantize_phase, Circuit, CircuitError, Gate, GateKind, Phase};
use crate::rng::PortableRng;

/// Undirected simple graph for Max-Cut. Edges are stored as `(low, high)`
/// pairs in ascending order, which is also the order QAOA circuits emit them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MaxCutGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl MaxCutGraph {
    pub fn new(
        n_vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<MaxCutGraph, CircuitError> {
        if n_vertices == 0 {
            return Err(CircuitError::Graph("no vertices".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(CircuitError::Graph(format!("self-loop on {a}")));
            }
            if a >= n_vertices || b >= n_vertices {
                return Err(CircuitError::Graph(format!(
                    "edge ({a},{b}) out of range for {n_vertices} vertices"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(MaxCutGraph {
            n_vertices,
            edges: set.into_iter().collect(),
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of edges cut by the bit assignment `z` (bit `v` = side of vertex `v`).
    pub fn cut_value(&self, z: u64) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| ((z >> a) ^ (z >> b)) & 1 == 1)
            .count()
    }
}

/// Hardware-efficient ansatz: per layer, `RY(params[l·n + q])` on every qubit
/// in ascending order, then a linear `CX(q, q+1)` ladder.
pub fn build_hea(
    n_qubits: usize,
    layers: usize,
    params: &[Phase],
) -> Result<Circuit, CircuitError> {
    let expected = layers * n_qubits;
    if params.len() != expected {
        return Err(CircuitError::ParameterCount {
            expected,
            got: params.len(),
        });
    }
    let mut c = Circuit::new(n_qubits)?.with_label(format!("hea-{n_qubits}x{layers}"));
    for layer in 0..layers {
        for q in 0..n_qubits {
            c.push(Gate::ry(q, params[layer * n_qubits + q]))?;
        }
        for q in 0..n_qubits.saturating_sub(1) {
            c.push(Gate::cx(q, q + 1))?;
        }
    }
    Ok(c)
}

const ONE_QUBIT_KINDS: [GateKind; 11] = [
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
];

const TWO_QUBIT_KINDS: [GateKind; 4] = [GateKind::CX, GateKind::CZ, GateKind::RZZ, GateKind::SWAP];

/// Seeded random circuit with at most two operands per gate.
///
/// Each of the `depth` layers shuffles the qubits and walks the shuffled
/// order, drawing an operand count in `{1, 2}` (1 when a single qubit
/// remains), then a gate kind uniformly from the matching kind list, then for
/// rotations an angle uniform on `[0, 2π)` that is quantized immediately.
pub fn build_random(n_qubits: usize, depth: usize, seed: u64) -> Result<Circuit, CircuitError> {
    if depth == 0 {
        return Err(CircuitError::Graph("depth must be at least 1".into()));
    }
    let mut c = Circuit::new(n_qubits)?.with_label(format!("random-{n_qubits}x{depth}-s{seed}"));
    let mut rng = PortableRng::new(seed);
    let mut order: Vec<usize> = (0..n_qubits).collect();
    for _ in 0..depth {
        rng.shuffle(&mut order);
        let mut i = 0;
        while i < n_qubits {
            let arity = if n_qubits - i >= 2 {
                1 + rng.index(2)
            } else {
                1
            };
            let kind = if arity == 1 {
                ONE_QUBIT_KINDS[rng.index(ONE_QUBIT_KINDS.len())]
            } else {
                TWO_QUBIT_KINDS[rng.index(TWO_QUBIT_KINDS.len())]
            };
            let param = if kind.is_parametric() {
                Some(quantize_phase(rng.next_f64() * 2.0 * PI)?)
            } else {
                None
            };
            c.push(Gate::new(kind, &order[i..i + arity], param)?)?;
            i += arity;
        }
    }
    Ok(c)
}

/// Max-Cut QAOA circuit: `H` on every qubit, then per layer `RZZ(2γ)` on each
/// edge in sorted order followed by `RX(2β)` on each qubit.
pub fn build_qaoa_maxcut(
    graph: &MaxCutGraph,
    betas: &[Phase],
    gammas: &[Phase],
) -> Result<Circuit, CircuitError> {
    if betas.len() != gammas.len() || betas.is_empty() {
        return Err(CircuitError::ParameterCount {
            expected: betas.len().max(1),
            got: gammas.len(),
        });
    }
    let n = graph.n_vertices();
    let mut c = Circuit::new(n)?.with_label(format!("qaoa-p{}", betas.len()));
    for q in 0..n {
        c.push(Gate::h(q))?;
    }
    for (beta, gamma) in betas.iter().zip(gammas) {
        let zz = gamma.scaled(2);
        for &(a, b) in graph.edges() {
            c.push(Gate::rzz(a, b, zz))?;
        }
        let x = beta.scaled(2);
        for q in 0..n {
            c.push(Gate::rx(q, x))?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hea_unrolled() {
        let c = build_hea(2, 1, &[Phase::QUARTER_PI, Phase::HALF_PI]).unwrap();
        assert_eq!(
            c.gates(),
            &[
                Gate::ry(0, Phase::QUARTER_PI),
                Gate::ry(1, Phase::HALF_PI),
                Gate::cx(0, 1)
            ]
        );
        let c = build_hea(3, 2, &[Phase::ZERO; 6]).unwrap();
        assert_eq!(c.len(), 10);
        assert!(matches!(
            build_hea(3, 2, &[Phase::ZERO; 5]),
            Err(CircuitError::ParameterCount {
                expected: 6,
                got: 5
            })
        ));
    }

    #[test]
    fn hea_is_deterministic() {
        let p: Vec<Phase> = (0..8).map(|i| Phase::from_quanta(i * 12345)).collect();
        assert_eq!(
            build_hea(4, 2, &p).unwrap().to_text(),
            build_hea(4, 2, &p).unwrap().to_text()
        );
    }

    #[test]
    fn random_is_seeded() {
        let a = build_random(4, 4, 1000).unwrap();
        let b = build_random(4, 4, 1000).unwrap();
        let c = build_random(4, 4, 1001).unwrap();
        assert_eq!(a.gates(), b.gates());
        assert_ne!(a.gates(), c.gates());
        assert!(a.gates().iter().all(|g| g.qubits().len() <= 2));
    }

    #[test]
    fn random_layers_cover_every_qubit() {
        let c = build_random(7, 3, 11).unwrap();
        let slots: usize = c.gates().iter().map(|g| g.qubits().len()).sum();
        assert_eq!(slots, 7 * 3);
    }

    #[test]
    fn qaoa_template() {
        let g = MaxCutGraph::new(2, [(0, 1)]).unwrap();
        let c = build_qaoa_maxcut(&g, &[Phase::ZERO], &[Phase::ZERO]).unwrap();
        assert_eq!(c.len(), 2 + 1 + 2);
        assert_eq!(c.gates()[2], Gate::rzz(0, 1, Phase::ZERO));
        let c = build_qaoa_maxcut(&g, &[Phase::QUARTER_PI], &[Phase::HALF_PI]).unwrap();
        assert_eq!(c.gates()[2], Gate::rzz(0, 1, Phase::PI));
        assert_eq!(c.gates()[3], Gate::rx(0, Phase::HALF_PI));
        assert!(build_qaoa_maxcut(&g, &[Phase::ZERO], &[]).is_err());
    }

    #[test]
    fn qaoa_gate_count_for_24_vertices() {
        let edges: Vec<(usize, usize)> = (0..24)
            .flat_map(|a| (a + 1..24).map(move |b| (a, b)))
            .take(60)
            .collect();
        let g = MaxCutGraph::new(24, edges).unwrap();
        let c = build_qaoa_maxcut(&g, &[Phase::ZERO; 2], &[Phase::ZERO; 2]).unwrap();
        assert_eq!(c.len(), 192);
    }

    #[test]
    fn graph_validation() {
        assert!(MaxCutGraph::new(3, [(1, 1)]).is_err());
        assert!(MaxCutGraph::new(3, [(1, 3)]).is_err());
        let g = MaxCutGraph::new(3, [(2, 0), (0, 2), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(g.cut_value(0b001), 2);
        assert_eq!(g.cut_value(0b000), 0);
    }
}
