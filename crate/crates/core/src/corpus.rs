//! Deterministic circuit corpora for the verification suites: small random
//! circuits with rewritten (equal) and mutated (usually unequal) variants,
//! and cuttable workloads of mixed families.

use crate::circuit::{build_random, Circuit, Gate, GateKind, Phase};
use crate::cutting::{parse_observable, CutError, CutSpec, Family, Manifest};
use crate::rng::PortableRng;
use crate::sim::Pauli;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Base,
    /// Same unitary as its base up to global phase, different gates.
    Equivalent,
    /// One gate changed; almost always a different unitary.
    Mutant,
}

#[derive(Clone, Debug)]
pub struct CorpusCircuit {
    pub circuit: Circuit,
    pub base: usize,
    pub relation: Relation,
}

/// `n_bases` random circuits on 1 to 4 qubits, each followed by two
/// rewritten equivalents and one mutant.
pub fn small_circuits(n_bases: usize, seed: u64) -> Vec<CorpusCircuit> {
    let mut rng = PortableRng::new(seed);
    let mut out = Vec::with_capacity(4 * n_bases);
    for i in 0..n_bases {
        let n = 1 + i % 4;
        let depth = 2 + (i / 4) % 5;
        let base =
            build_random(n, depth, seed.wrapping_add(i as u64)).expect("valid random circuit");
        let item = |circuit, relation| CorpusCircuit {
            circuit,
            base: i,
            relation,
        };
        let variants = [rewrite(&base, &mut rng, 3), rewrite(&base, &mut rng, 6)];
        let mutant = mutate(&base, &mut rng);
        out.push(item(base, Relation::Base));
        for v in variants {
            out.push(item(v, Relation::Equivalent));
        }
        out.push(item(mutant, Relation::Mutant));
    }
    out
}

/// Applies `steps` random unitary-preserving rewrites: gate expansions
/// (Z → S·S, CZ → H·CX·H, SWAP → 3 CX, …) and inserted cancelling pairs.
pub fn rewrite(c: &Circuit, rng: &mut PortableRng, steps: usize) -> Circuit {
    let mut gates = c.gates().to_vec();
    let n = c.n_qubits();
    for _ in 0..steps {
        let at = rng.index(gates.len() + 1);
        if at < gates.len() && rng.index(3) > 0 {
            if let Some(expanded) = expand(&gates[at]) {
                gates.splice(at..=at, expanded);
                continue;
            }
        }
        let q = rng.index(n);
        let pair = if n > 1 && rng.index(2) == 0 {
            let mut t = rng.index(n - 1);
            if t >= q {
                t += 1;
            }
            [Gate::cx(q, t), Gate::cx(q, t)]
        } else {
            match rng.index(3) {
                0 => [Gate::h(q), Gate::h(q)],
                1 => [Gate::s(q), Gate::sdg(q)],
                _ => [Gate::x(q), Gate::x(q)],
            }
        };
        gates.splice(at..at, pair);
    }
    Circuit::from_gates(n, gates).expect("rewrites keep qubit indices")
}

fn expand(g: &Gate) -> Option<Vec<Gate>> {
    let q = g.qubits();
    Some(match g.kind() {
        GateKind::Z => vec![Gate::s(q[0]), Gate::s(q[0])],
        GateKind::S => vec![Gate::t(q[0]), Gate::t(q[0])],
        GateKind::Sdg => vec![Gate::tdg(q[0]), Gate::tdg(q[0])],
        GateKind::X => vec![Gate::h(q[0]), Gate::z(q[0]), Gate::h(q[0])],
        GateKind::RZ => vec![Gate::rz(q[0], g.param()? + Phase::PI), Gate::z(q[0])],
        GateKind::CZ => vec![Gate::h(q[1]), Gate::cx(q[0], q[1]), Gate::h(q[1])],
        GateKind::CX => vec![
            Gate::h(q[0]),
            Gate::h(q[1]),
            Gate::cx(q[1], q[0]),
            Gate::h(q[0]),
            Gate::h(q[1]),
        ],
        GateKind::SWAP => vec![
            Gate::cx(q[0], q[1]),
            Gate::cx(q[1], q[0]),
            Gate::cx(q[0], q[1]),
        ],
        _ => return None,
    })
}

/// Replaces one gate with a different one on the same qubits.
pub fn mutate(c: &Circuit, rng: &mut PortableRng) -> Circuit {
    let mut gates = c.gates().to_vec();
    let i = rng.index(gates.len());
    let g = &gates[i];
    let q = g.qubits().to_vec();
    gates[i] = match g.kind() {
        GateKind::T => Gate::tdg(q[0]),
        GateKind::RX | GateKind::RY | GateKind::RZ => Gate::new(
            g.kind(),
            &q,
            Some(g.param().expect("rotation angle") + Phase::QUARTER_PI),
        )
        .expect("same shape"),
        _ if q.len() == 1 => Gate::t(q[0]),
        _ => Gate::rzz(q[0], q[1], Phase::QUARTER_PI),
    };
    Circuit::from_gates(c.n_qubits(), gates).expect("same qubits")
}

#[derive(Clone, Debug)]
pub struct CutCase {
    pub circuit: Circuit,
    pub cuts: Vec<CutSpec>,
    pub observable: Vec<(usize, Pauli)>,
}

/// `count` cut workloads of at most 8 qubits with 1 or 2 cuts, alternating
/// HEA staircases and two-block random circuits, observed with all-Z,
/// single-qubit and two-qubit Pauli strings.
pub fn cut_cases(count: usize, seed: u64) -> Result<Vec<CutCase>, CutError> {
    let mut rng = PortableRng::new(seed);
    (0..count)
        .map(|i| {
            let cuts = 1 + i % 2;
            let m = if i % 2 == 0 || (i / 2) % 3 == 0 {
                let qubits = [4, 6, 8][(i / 2) % 3];
                Manifest {
                    family: Family::Hea,
                    qubits,
                    layers: cuts,
                    depth: 0,
                    split: None,
                    shared: 0,
                    seed: seed ^ i as u64,
                    cuts: None,
                    observable: None,
                }
            } else {
                let qubits = 4 + rng.index(5);
                let split = cuts + 1 + rng.index(qubits - cuts - 1);
                Manifest {
                    family: Family::Blocks,
                    qubits,
                    layers: 0,
                    depth: 2 + rng.index(3),
                    split: Some(split),
                    shared: cuts,
                    seed: seed ^ i as u64,
                    cuts: None,
                    observable: None,
                }
            };
            let (circuit, cuts, _) = m.build()?;
            let n = circuit.n_qubits();
            let letters = ['X', 'Y', 'Z'];
            let mut s: Vec<char> = vec!['I'; n];
            match i % 3 {
                0 => s.fill('Z'),
                1 => s[rng.index(n)] = letters[rng.index(3)],
                _ => {
                    let a = rng.index(n);
                    let b = (a + 1 + rng.index(n - 1)) % n;
                    s[a] = letters[rng.index(3)];
                    s[b] = letters[rng.index(3)];
                }
            }
            let observable = parse_observable(&s.into_iter().collect::<String>(), n)?;
            Ok(CutCase {
                circuit,
                cuts,
                observable,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::simulate;

    fn same_up_to_phase(a: &Circuit, b: &Circuit) -> bool {
        // Compare the action on a fixed non-trivial input.
        let prep: Vec<Gate> = (0..a.n_qubits())
            .flat_map(|q| {
                [
                    Gate::h(q),
                    Gate::t(q),
                    Gate::ry(q, Phase::new(2 * q as i64 + 1, 8).unwrap()),
                ]
            })
            .collect();
        let run = |c: &Circuit| {
            let mut g = prep.clone();
            g.extend_from_slice(c.gates());
            simulate(&Circuit::from_gates(c.n_qubits(), g).unwrap()).unwrap()
        };
        let (sa, sb) = (run(a), run(b));
        let overlap: num_complex::Complex64 = sa
            .amplitudes()
            .iter()
            .zip(sb.amplitudes())
            .map(|(x, y)| x.conj() * y)
            .sum();
        (overlap.norm() - 1.0).abs() < 1e-9
    }

    #[test]
    fn rewrites_keep_the_state() {
        for item in small_circuits(40, 3) {
            if item.relation == Relation::Equivalent {
                let base = build_random(
                    1 + item.base % 4,
                    2 + (item.base / 4) % 5,
                    3 + item.base as u64,
                )
                .unwrap();
                assert!(
                    same_up_to_phase(&base, &item.circuit),
                    "{}",
                    item.circuit.to_text()
                );
            }
        }
    }

    #[test]
    fn cut_cases_are_small_and_varied() {
        let cases = cut_cases(12, 5).unwrap();
        assert!(cases
            .iter()
            .all(|c| c.circuit.n_qubits() <= 8 && (1..=2).contains(&c.cuts.len())));
        assert!(cases
            .iter()
            .any(|c| c.circuit.label().unwrap().starts_with("hea")));
        assert!(cases
            .iter()
            .any(|c| c.circuit.label().unwrap().starts_with("blocks")));
    }
}
