//! Wire cutting into an upstream and a downstream fragment.
//!
//! Each cut replaces the wire by the identity channel written over the
//! Pauli basis, `ρ = ½ Σ_O Tr(Oρ) O`, with every `O` expanded into its two
//! eigenprojectors. That gives eight (measured observable, prepared state,
//! `±½`) selections per cut. The observable is measured at the end of the
//! upstream fragment's cut wire; the eigenstate is prepared at the start of
//! the downstream one.
//!
//! Selections with the same measurement setting share one upstream circuit
//! (I and Z are both read from the computational basis) and selections with
//! the same eigenstate share one downstream circuit. With `k` cuts the `8^k`
//! terms touch `2·8^k` subcircuit instances but only `3^k + 6^k` distinct
//! circuits.

use std::collections::HashMap;
use std::fmt;

use crate::circuit::{build_random, Circuit, CircuitError, Gate};
use crate::sim::{expectation_pauli, Pauli, SimError, Statevector};

mod workload;

pub use workload::{hea_staircase_cuts, run_wirecut, Family, Manifest, WirecutReport, CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum CutError {
    #[error("cut on qubit {qubit} at gate {position}: {reason}")]
    InvalidCut {
        qubit: usize,
        position: usize,
        reason: String,
    },
    #[error("no two-fragment split: {0}")]
    NoSplit(String),
    #[error("missing result for {0}")]
    MissingResult(String),
    #[error("observable: {0}")]
    Observable(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A cut on `qubit`'s wire directly after gate `position`, which must act on
/// that qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutSpec {
    pub qubit: usize,
    pub position: usize,
}

impl fmt::Display for CutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.qubit, self.position)
    }
}

/// Observable measured on the upstream side of a cut. `I` and `Z` share the
/// same circuit and differ only in post-processing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutBasis {
    I,
    Z,
    X,
    Y,
}

impl CutBasis {
    /// Index of the upstream circuit variant: 0 for I and Z, 1 for X, 2 for Y.
    pub fn setting(self) -> u8 {
        match self {
            CutBasis::I | CutBasis::Z => 0,
            CutBasis::X => 1,
            CutBasis::Y => 2,
        }
    }

    fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrepState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl PrepState {
    /// Gates taking `|0>` to this state.
    pub fn gates(self, q: usize) -> Vec<Gate> {
        match self {
            PrepState::Zero => vec![],
            PrepState::One => vec![Gate::x(q)],
            PrepState::Plus => vec![Gate::h(q)],
            PrepState::Minus => vec![Gate::x(q), Gate::h(q)],
            PrepState::PlusI => vec![Gate::h(q), Gate::s(q)],
            PrepState::MinusI => vec![Gate::h(q), Gate::sdg(q)],
        }
    }
}

/// One of the eight measure/prepare choices for a cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Selection {
    pub basis: CutBasis,
    /// Eigenvalue of the prepared state under `basis` (for `I`, under `Z`).
    pub eigenvalue: i8,
}

impl Selection {
    pub const ALL: [Selection; 8] = [
        Selection::new(CutBasis::I, 1),
        Selection::new(CutBasis::I, -1),
        Selection::new(CutBasis::Z, 1),
        Selection::new(CutBasis::Z, -1),
        Selection::new(CutBasis::X, 1),
        Selection::new(CutBasis::X, -1),
        Selection::new(CutBasis::Y, 1),
        Selection::new(CutBasis::Y, -1),
    ];

    pub const fn new(basis: CutBasis, eigenvalue: i8) -> Selection {
        Selection { basis, eigenvalue }
    }

    pub fn coefficient(self) -> f64 {
        match self.basis {
            CutBasis::I => 0.5,
            _ => 0.5 * self.eigenvalue as f64,
        }
    }

    pub fn prep(self) -> PrepState {
        match (self.basis, self.eigenvalue > 0) {
            (CutBasis::I | CutBasis::Z, true) => PrepState::Zero,
            (CutBasis::I | CutBasis::Z, false) => PrepState::One,
            (CutBasis::X, true) => PrepState::Plus,
            (CutBasis::X, false) => PrepState::Minus,
            (CutBasis::Y, true) => PrepState::PlusI,
            (CutBasis::Y, false) => PrepState::MinusI,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionTerm {
    pub coefficient: f64,
    pub selections: Vec<Selection>,
}

/// All `8^k` terms, first cut varying slowest.
pub fn reconstruction_terms(k: usize) -> Vec<ReconstructionTerm> {
    let mut terms = vec![ReconstructionTerm {
        coefficient: 1.0,
        selections: Vec::new(),
    }];
    for _ in 0..k {
        terms = terms
            .into_iter()
            .flat_map(|t| {
                Selection::ALL.into_iter().map(move |s| {
                    let mut selections = t.selections.clone();
                    selections.push(s);
                    ReconstructionTerm {
                        coefficient: t.coefficient * s.coefficient(),
                        selections,
                    }
                })
            })
            .collect();
    }
    terms
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Upstream,
    Downstream,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Upstream => "upstream",
            Role::Downstream => "downstream",
        })
    }
}

/// One side of a cut circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Fragment {
    /// Gates of this side on local qubits, without cut gates.
    pub circuit: Circuit,
    /// Local qubit carrying each cut, in cut order.
    pub cut_qubits: Vec<usize>,
    /// `(original qubit, local qubit)` for every original qubit whose final
    /// wire segment lies in this fragment.
    pub outputs: Vec<(usize, usize)>,
    /// For each gate of `circuit`, its index in the original circuit.
    pub gate_origin: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FragmentPair {
    pub n_qubits: usize,
    pub cuts: Vec<CutSpec>,
    pub upstream: Fragment,
    pub downstream: Fragment,
}

impl FragmentPair {
    pub fn cut_count(&self) -> usize {
        self.cuts.len()
    }

    pub fn fragment(&self, role: Role) -> &Fragment {
        match role {
            Role::Upstream => &self.upstream,
            Role::Downstream => &self.downstream,
        }
    }

    /// Upstream circuit for the per-cut measurement settings (see
    /// [`CutBasis::setting`]).
    pub fn upstream_variant(&self, settings: &[u8]) -> Circuit {
        let mut c = self.upstream.circuit.clone();
        for (&s, &q) in settings.iter().zip(&self.upstream.cut_qubits) {
            let gates = match s {
                0 => vec![],
                1 => vec![Gate::h(q)],
                _ => vec![Gate::sdg(q), Gate::h(q)],
            };
            for g in gates {
                c.push(g).expect("local qubit in range");
            }
        }
        let code: String = settings
            .iter()
            .map(|s| ['z', 'x', 'y'][*s as usize])
            .collect();
        c.with_label(format!("up-{code}"))
    }

    /// Downstream circuit with the given states prepared on the cut wires.
    pub fn downstream_variant(&self, preps: &[PrepState]) -> Circuit {
        let n = self.downstream.circuit.n_qubits();
        let mut gates = Vec::new();
        for (&p, &q) in preps.iter().zip(&self.downstream.cut_qubits) {
            gates.extend(p.gates(q));
        }
        gates.extend(self.downstream.circuit.gates().iter().cloned());
        let code: String = preps
            .iter()
            .map(|p| ['0', '1', '+', '-', 'r', 'l'][*p as usize])
            .collect();
        Circuit::from_gates(n, gates)
            .expect("local qubits in range")
            .with_label(format!("down-{code}"))
    }
}

/// Splits `c` at `cuts` and returns the fragments with all `8^k` terms.
///
/// Wire segments (a qubit's stretch between cuts) are joined whenever a gate
/// acts on both. The downstream fragment is every segment joined to some
/// cut's downstream segment; everything else is upstream. The split fails if
/// a cut's upstream segment ends up downstream.
pub fn cut_wires(
    c: &Circuit,
    cuts: &[CutSpec],
) -> Result<(FragmentPair, Vec<ReconstructionTerm>), CutError> {
    let n = c.n_qubits();
    let gates = c.gates();
    let bad = |cut: &CutSpec, reason: &str| CutError::InvalidCut {
        qubit: cut.qubit,
        position: cut.position,
        reason: reason.into(),
    };
    let mut cuts_by_qubit: Vec<Vec<usize>> = vec![Vec::new(); n];
    for cut in cuts {
        if cut.qubit >= n {
            return Err(bad(cut, "qubit out of range"));
        }
        if cut.position >= gates.len() {
            return Err(bad(cut, "position past the end of the circuit"));
        }
        if !gates[cut.position].acts_on(cut.qubit) {
            return Err(bad(cut, "gate does not act on the qubit"));
        }
        if cuts_by_qubit[cut.qubit].contains(&cut.position) {
            return Err(bad(cut, "duplicate cut"));
        }
        cuts_by_qubit[cut.qubit].push(cut.position);
    }
    for v in &mut cuts_by_qubit {
        v.sort_unstable();
    }

    // Segment ids: qubit q owns ids first[q] .. first[q] + cuts on q.
    let mut first = vec![0usize; n + 1];
    for q in 0..n {
        first[q + 1] = first[q] + cuts_by_qubit[q].len() + 1;
    }
    let segment_at =
        |q: usize, gate: usize| first[q] + cuts_by_qubit[q].iter().filter(|&&p| p < gate).count();
    let mut uf = UnionFind::new(first[n]);
    let mut gate_segments = Vec::with_capacity(gates.len());
    for (i, g) in gates.iter().enumerate() {
        let segs: Vec<usize> = g.qubits().iter().map(|&q| segment_at(q, i)).collect();
        for w in segs.windows(2) {
            uf.union(w[0], w[1]);
        }
        gate_segments.push(segs);
    }
    // Upstream and downstream segment of every cut.
    let ends: Vec<(usize, usize)> = cuts
        .iter()
        .map(|cut| {
            let s = segment_at(cut.qubit, cut.position + 1);
            (s - 1, s)
        })
        .collect();
    let down_roots: Vec<usize> = ends.iter().map(|&(_, d)| uf.find(d)).collect();
    let is_down = |uf: &mut UnionFind, s: usize| down_roots.contains(&uf.find(s));
    for (cut, &(u, _)) in cuts.iter().zip(&ends) {
        if is_down(&mut uf, u) {
            return Err(CutError::NoSplit(format!(
                "the wire before cut {cut} is connected to the downstream side"
            )));
        }
    }

    let mut side = vec![Role::Upstream; first[n]];
    for (s, r) in side.iter_mut().enumerate() {
        if is_down(&mut uf, s) {
            *r = Role::Downstream;
        }
    }
    let mut local = vec![usize::MAX; first[n]];
    let mut counts = [0usize; 2];
    for s in 0..first[n] {
        let k = side[s] as usize;
        local[s] = counts[k];
        counts[k] += 1;
    }
    let mut frag_gates: [Vec<Gate>; 2] = [Vec::new(), Vec::new()];
    let mut origin: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, g) in gates.iter().enumerate() {
        let k = side[gate_segments[i][0]] as usize;
        frag_gates[k].push(g.remapped(|q| local[segment_at(q, i)]));
        origin[k].push(i);
    }
    let mut outputs: [Vec<(usize, usize)>; 2] = [Vec::new(), Vec::new()];
    for q in 0..n {
        let last = first[q + 1] - 1;
        outputs[side[last] as usize].push((q, local[last]));
    }
    let build = |k: usize, cut_qubits: Vec<usize>| -> Result<Fragment, CutError> {
        let circuit = Circuit::from_gates(counts[k].max(1), frag_gates[k].iter().cloned())?;
        Ok(Fragment {
            circuit,
            cut_qubits,
            outputs: outputs[k].clone(),
            gate_origin: origin[k].clone(),
        })
    };
    let upstream = build(0, ends.iter().map(|&(u, _)| local[u]).collect())?;
    let downstream = build(1, ends.iter().map(|&(_, d)| local[d]).collect())?;
    let pair = FragmentPair {
        n_qubits: n,
        cuts: cuts.to_vec(),
        upstream,
        downstream,
    };
    Ok((pair, reconstruction_terms(cuts.len())))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A distinct subcircuit and the terms that use it.
#[derive(Clone, Debug)]
pub struct Subcircuit {
    pub circuit: Circuit,
    pub role: Role,
    /// Per-cut measurement settings (upstream) or [`PrepState`] indices
    /// (downstream).
    pub variant: Vec<u8>,
    pub terms: Vec<usize>,
}

/// Upstream variant code of a term.
pub fn upstream_code(t: &ReconstructionTerm) -> Vec<u8> {
    t.selections.iter().map(|s| s.basis.setting()).collect()
}

/// Downstream variant code of a term.
pub fn downstream_code(t: &ReconstructionTerm) -> Vec<u8> {
    t.selections.iter().map(|s| s.prep() as u8).collect()
}

const PREPS: [PrepState; 6] = [
    PrepState::Zero,
    PrepState::One,
    PrepState::Plus,
    PrepState::Minus,
    PrepState::PlusI,
    PrepState::MinusI,
];

/// Variant circuit of `role` with the given code.
pub fn variant_circuit(fp: &FragmentPair, role: Role, code: &[u8]) -> Circuit {
    match role {
        Role::Upstream => fp.upstream_variant(code),
        Role::Downstream => {
            fp.downstream_variant(&code.iter().map(|&c| PREPS[c as usize]).collect::<Vec<_>>())
        }
    }
}

/// Distinct subcircuits in order of first use, upstream then downstream.
pub fn enumerate_subcircuits(fp: &FragmentPair, terms: &[ReconstructionTerm]) -> Vec<Subcircuit> {
    let mut out: Vec<Subcircuit> = Vec::new();
    for role in [Role::Upstream, Role::Downstream] {
        let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
        for (t, term) in terms.iter().enumerate() {
            let code = match role {
                Role::Upstream => upstream_code(term),
                Role::Downstream => downstream_code(term),
            };
            let at = *index.entry(code.clone()).or_insert_with(|| {
                out.push(Subcircuit {
                    circuit: variant_circuit(fp, role, &code),
                    role,
                    variant: code,
                    terms: Vec::new(),
                });
                out.len() - 1
            });
            out[at].terms.push(t);
        }
    }
    out
}

/// Every subcircuit execution the terms call for, in term order: the
/// upstream then the downstream instance of each term.
pub fn instances(terms: &[ReconstructionTerm]) -> Vec<(usize, Role)> {
    terms
        .iter()
        .enumerate()
        .flat_map(|(t, _)| [(t, Role::Upstream), (t, Role::Downstream)])
        .collect()
}

/// Key of a fragment expectation value: role plus, upstream, the measured
/// basis per cut ([`CutBasis`] codes, so I and Z differ) or, downstream, the
/// prepared state per cut.
pub type ResultKey = (Role, Vec<u8>);

pub fn result_key(term: &ReconstructionTerm, role: Role) -> ResultKey {
    let code = match role {
        Role::Upstream => term.selections.iter().map(|s| s.basis.code()).collect(),
        Role::Downstream => downstream_code(term),
    };
    (role, code)
}

/// Pauli string over the original qubits, one letter per qubit, qubit 0
/// first (e.g. `"ZZIX"`).
pub fn parse_observable(s: &str, n_qubits: usize) -> Result<Vec<(usize, Pauli)>, CutError> {
    let s = s.trim();
    if s.chars().count() != n_qubits {
        return Err(CutError::Observable(format!(
            "{s:?} has {} letters for {n_qubits} qubits",
            s.chars().count()
        )));
    }
    s.chars()
        .enumerate()
        .map(|(q, ch)| {
            Pauli::from_char(ch)
                .map(|p| (q, p))
                .ok_or_else(|| CutError::Observable(format!("{ch:?} is not a Pauli letter")))
        })
        .filter(|r| !matches!(r, Ok((_, Pauli::I))))
        .collect()
}

/// Expectation a fragment contributes to `term` given its final state:
/// the observable's letters on this fragment's outputs, times (upstream)
/// `Z` on each cut wire whose basis is not `I`.
pub fn fragment_value(
    fp: &FragmentPair,
    role: Role,
    term: &ReconstructionTerm,
    observable: &[(usize, Pauli)],
    sv: &Statevector,
) -> Result<f64, CutError> {
    let frag = fp.fragment(role);
    let mut paulis = Vec::new();
    for &(q, p) in observable {
        if q >= fp.n_qubits {
            return Err(CutError::Observable(format!("qubit {q} out of range")));
        }
        if let Some(&(_, l)) = frag.outputs.iter().find(|&&(o, _)| o == q) {
            paulis.push((l, p));
        }
    }
    if role == Role::Upstream {
        for (s, &l) in term.selections.iter().zip(&frag.cut_qubits) {
            if s.basis != CutBasis::I {
                paulis.push((l, Pauli::Z));
            }
        }
    }
    Ok(expectation_pauli(sv, &paulis)?)
}

/// `Σ_terms coefficient · upstream value · downstream value`. Every needed
/// value must be present in `values`.
pub fn reconstruct_expectation(
    terms: &[ReconstructionTerm],
    values: &HashMap<ResultKey, f64>,
) -> Result<f64, CutError> {
    let mut total = 0.0;
    for t in terms {
        let mut prod = t.coefficient;
        for role in [Role::Upstream, Role::Downstream] {
            let key = result_key(t, role);
            let v = values
                .get(&key)
                .ok_or_else(|| CutError::MissingResult(format!("{role} {:?}", key.1)))?;
            prod *= v;
        }
        total += prod;
    }
    Ok(total)
}

/// Random circuit made of two random blocks that share `n_shared` qubits,
/// with cuts on each shared qubit after its last gate in the first block.
/// The first block covers qubits `0..split`, the second `split − n_shared..n`.
pub fn random_two_block(
    n_qubits: usize,
    split: usize,
    n_shared: usize,
    depth: usize,
    seed: u64,
) -> Result<(Circuit, Vec<CutSpec>), CircuitError> {
    if n_shared == 0 || n_shared > split || split >= n_qubits + n_shared || split > n_qubits {
        return Err(CircuitError::Graph(format!(
            "cannot share {n_shared} qubits at split {split} of {n_qubits}"
        )));
    }
    let a = build_random(split, depth, seed)?;
    let offset = split - n_shared;
    let b = build_random(n_qubits - offset, depth, seed ^ 0x5eed_0000_0000_0001)?;
    let mut gates: Vec<Gate> = a.gates().to_vec();
    let cuts = (offset..split)
        .map(|q| CutSpec {
            qubit: q,
            position: gates
                .iter()
                .rposition(|g| g.acts_on(q))
                .expect("every qubit is touched"),
        })
        .collect();
    gates.extend(b.gates().iter().map(|g| g.remapped(|q| q + offset)));
    let c = Circuit::from_gates(n_qubits, gates)?.with_label(format!(
        "blocks-{n_qubits}-{split}-{n_shared}x{depth}-s{seed}"
    ));
    Ok((c, cuts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_hea, Phase};
    use crate::sim::simulate;

    fn direct_and_cut(c: &Circuit, cuts: &[CutSpec], obs: &[(usize, Pauli)]) -> (f64, f64) {
        let direct = expectation_pauli(&simulate(c).unwrap(), obs).unwrap();
        let (fp, terms) = cut_wires(c, cuts).unwrap();
        let mut values = HashMap::new();
        for sub in enumerate_subcircuits(&fp, &terms) {
            let sv = simulate(&sub.circuit).unwrap();
            for &t in &sub.terms {
                let v = fragment_value(&fp, sub.role, &terms[t], obs, &sv).unwrap();
                values.insert(result_key(&terms[t], sub.role), v);
            }
        }
        (direct, reconstruct_expectation(&terms, &values).unwrap())
    }

    #[test]
    fn eight_terms_per_cut() {
        for k in 0..=4 {
            let terms = reconstruction_terms(k);
            assert_eq!(terms.len(), 8usize.pow(k as u32));
            assert_eq!(instances(&terms).len(), 2 * 8usize.pow(k as u32));
            for t in &terms {
                assert!((t.coefficient.abs() - 0.5f64.powi(k as i32)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bell_pair_zz() {
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::cx(0, 1)]).unwrap();
        let obs = [(0, Pauli::Z), (1, Pauli::Z)];
        let (direct, cut) = direct_and_cut(
            &c,
            &[CutSpec {
                qubit: 0,
                position: 0,
            }],
            &obs,
        );
        assert!((direct - 1.0).abs() < 1e-12);
        assert!((cut - 1.0).abs() < 1e-12, "{cut}");
    }

    #[test]
    fn distinct_variants() {
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::cx(0, 1)]).unwrap();
        let (fp, terms) = cut_wires(
            &c,
            &[CutSpec {
                qubit: 0,
                position: 0,
            }],
        )
        .unwrap();
        let subs = enumerate_subcircuits(&fp, &terms);
        let up = subs.iter().filter(|s| s.role == Role::Upstream).count();
        assert_eq!((up, subs.len() - up), (3, 6));
        assert_eq!(subs.iter().map(|s| s.terms.len()).sum::<usize>(), 16);
    }

    #[test]
    fn hea_staircase_reconstructs() {
        let params: Vec<Phase> = (0..16)
            .map(|i| Phase::from_quanta(37_001 * (i + 1)))
            .collect();
        let c = build_hea(8, 2, &params).unwrap();
        let cuts = hea_staircase_cuts(8, 2).unwrap();
        let (fp, _) = cut_wires(&c, &cuts).unwrap();
        assert_eq!(
            (
                fp.upstream.circuit.n_qubits(),
                fp.downstream.circuit.n_qubits()
            ),
            (4, 6)
        );
        let obs = parse_observable("ZIZIXIYZ", 8).unwrap();
        let (direct, cut) = direct_and_cut(&c, &cuts, &obs);
        assert!((direct - cut).abs() < 1e-9, "{direct} vs {cut}");
    }

    #[test]
    fn gates_are_partitioned() {
        let (c, cuts) = random_two_block(6, 4, 2, 3, 11).unwrap();
        let (fp, _) = cut_wires(&c, &cuts).unwrap();
        let mut seen: Vec<usize> = fp
            .upstream
            .gate_origin
            .iter()
            .chain(&fp.downstream.gate_origin)
            .copied()
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..c.len()).collect::<Vec<_>>());
        for frag in [&fp.upstream, &fp.downstream] {
            for (g, &o) in frag.circuit.gates().iter().zip(&frag.gate_origin) {
                assert_eq!(
                    (g.kind(), g.param()),
                    (c.gates()[o].kind(), c.gates()[o].param())
                );
            }
        }
    }

    #[test]
    fn rejects_bad_cuts() {
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::cx(0, 1), Gate::h(1)]).unwrap();
        assert!(matches!(
            cut_wires(
                &c,
                &[CutSpec {
                    qubit: 1,
                    position: 0
                }]
            ),
            Err(CutError::InvalidCut { .. })
        ));
        assert!(cut_wires(
            &c,
            &[CutSpec {
                qubit: 1,
                position: 1
            }]
        )
        .is_ok());
        // The second CX reconnects both sides of the cut through qubit 1.
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::cx(0, 1), Gate::cx(1, 0)]).unwrap();
        assert!(matches!(
            cut_wires(
                &c,
                &[CutSpec {
                    qubit: 0,
                    position: 1
                }]
            ),
            Err(CutError::NoSplit(_))
        ));
    }
}
