use crate::circuit::{Circuit, GateKind, Phase};

use super::graph::{EdgeType, VertexKind, ZxGraph};

struct Builder {
    g: ZxGraph,
    last: Vec<usize>,
    pending: Vec<EdgeType>,
}

impl Builder {
    fn spider(&mut self, q: usize, kind: VertexKind, phase: Phase) -> usize {
        let v = self.g.add_vertex(kind, phase);
        self.g.add_edge(self.last[q], v, self.pending[q]);
        self.last[q] = v;
        self.pending[q] = EdgeType::Simple;
        v
    }

    fn z(&mut self, q: usize, phase: Phase) -> usize {
        self.spider(q, VertexKind::Z, phase)
    }

    fn x(&mut self, q: usize, phase: Phase) -> usize {
        self.spider(q, VertexKind::X, phase)
    }

    fn cx(&mut self, c: usize, t: usize) {
        let zc = self.z(c, Phase::ZERO);
        let xt = self.x(t, Phase::ZERO);
        self.g.add_edge(zc, xt, EdgeType::Simple);
    }
}

/// Translates a circuit into a ZX diagram, wire by wire in gate order.
///
/// Input boundaries take ids `0..n`, spiders follow in gate order and the
/// output boundaries come last, so equal circuits give identical graphs.
pub fn circuit_to_zx(c: &Circuit) -> ZxGraph {
    let n = c.n_qubits();
    let mut g = ZxGraph::new();
    let last: Vec<usize> = (0..n).map(|_| g.add_input()).collect();
    let mut b = Builder {
        g,
        last,
        pending: vec![EdgeType::Simple; n],
    };

    for gate in c.gates() {
        let qs = gate.qubits();
        let q = qs[0];
        let theta = gate.param().unwrap_or(Phase::ZERO);
        match gate.kind() {
            GateKind::H => b.pending[q] = b.pending[q].toggled(),
            GateKind::X => {
                b.x(q, Phase::PI);
            }
            GateKind::Y => {
                b.z(q, Phase::PI);
                b.x(q, Phase::PI);
            }
            GateKind::Z => {
                b.z(q, Phase::PI);
            }
            GateKind::S => {
                b.z(q, Phase::HALF_PI);
            }
            GateKind::Sdg => {
                b.z(q, Phase::MINUS_HALF_PI);
            }
            GateKind::T => {
                b.z(q, Phase::QUARTER_PI);
            }
            GateKind::Tdg => {
                b.z(q, Phase::MINUS_QUARTER_PI);
            }
            GateKind::RZ => {
                b.z(q, theta);
            }
            GateKind::RX => {
                b.x(q, theta);
            }
            GateKind::RY => {
                b.z(q, Phase::MINUS_HALF_PI);
                b.x(q, theta);
                b.z(q, Phase::HALF_PI);
            }
            GateKind::CX => b.cx(qs[0], qs[1]),
            GateKind::CZ => {
                let a = b.z(qs[0], Phase::ZERO);
                let c = b.z(qs[1], Phase::ZERO);
                b.g.add_edge(a, c, EdgeType::Hadamard);
            }
            GateKind::RZZ => {
                b.cx(qs[0], qs[1]);
                b.z(qs[1], theta);
                b.cx(qs[0], qs[1]);
            }
            GateKind::SWAP => {
                b.cx(qs[0], qs[1]);
                b.cx(qs[1], qs[0]);
                b.cx(qs[0], qs[1]);
            }
        }
    }

    for q in 0..n {
        let o = b.g.add_output();
        b.g.add_edge(b.last[q], o, b.pending[q]);
    }
    b.g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn identity_wire() {
        let g = circuit_to_zx(&Circuit::new(1).unwrap());
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            vec![(0, 1, EdgeType::Simple)]
        );
        g.validate().unwrap();
    }

    #[test]
    fn t_gate_is_a_quarter_spider() {
        let g = circuit_to_zx(&Circuit::from_gates(1, [Gate::t(0)]).unwrap());
        assert_eq!(
            g.dump(),
            "inputs 0\noutputs 2\n0 B : 1S\n1 Z 1/4 : 0S 2S\n2 B : 1S\n"
        );
    }

    #[test]
    fn hadamards_toggle_the_wire() {
        let g = circuit_to_zx(&Circuit::from_gates(1, [Gate::h(0)]).unwrap());
        assert_eq!(g.edge_type(0, 1), Some(EdgeType::Hadamard));
        let g = circuit_to_zx(&Circuit::from_gates(1, [Gate::h(0), Gate::h(0)]).unwrap());
        assert_eq!(g.edge_type(0, 1), Some(EdgeType::Simple));
    }

    #[test]
    fn ids_follow_gate_order() {
        let c = Circuit::from_gates(2, [Gate::cx(0, 1), Gate::rz(1, Phase::QUARTER_PI)]).unwrap();
        let g = circuit_to_zx(&c);
        assert_eq!(g.kind(2), VertexKind::Z);
        assert_eq!(g.kind(3), VertexKind::X);
        assert_eq!(g.phase(4), Phase::QUARTER_PI);
        assert_eq!(g.outputs(), &[5, 6]);
        g.validate().unwrap();
    }

    #[test]
    fn swap_is_three_cnots() {
        let g = circuit_to_zx(&Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap());
        assert_eq!(g.spider_count(), 6);
    }
}
