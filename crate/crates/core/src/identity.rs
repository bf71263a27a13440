//! Canonical labelling of reduced diagrams and Weisfeiler-Leman hashing.
//!
//! The key of a circuit is the first 16 hex digits of a SHA-256 WL digest of
//! its fully reduced ZX diagram. Node labels carry the spider phase or the
//! boundary role and ordinal, never the vertex id, so the digest only
//! depends on the labelled graph up to isomorphism.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::circuit::Circuit;
use crate::zx::{circuit_to_zx, full_reduce, VertexKind, ZxGraph};

/// Default number of WL refinement rounds. Part of the on-disk format: keys
/// computed with a different count do not match stored ones.
pub const DEFAULT_WL_ITERATIONS: u32 = 3;

/// Length of the hex fingerprint in a [`CacheKey`].
pub const HASH_LEN: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LabeledGraph {
    pub nodes: BTreeMap<usize, String>,
    /// `(u, v, label)` with `u < v`.
    pub edges: Vec<(usize, usize, String)>,
}

impl LabeledGraph {
    /// Neighbor lists `(edge label, node)` per node.
    fn adjacency(&self) -> BTreeMap<usize, Vec<(&str, usize)>> {
        let mut adj: BTreeMap<usize, Vec<(&str, usize)>> =
            self.nodes.keys().map(|&v| (v, Vec::new())).collect();
        for (u, v, e) in &self.edges {
            adj.entry(*u).or_default().push((e, *v));
            adj.entry(*v).or_default().push((e, *u));
        }
        adj
    }

    /// Sorted multiset of `(label, sorted "edge:neighbor-label" list)`; equal
    /// for isomorphic labelled graphs.
    pub fn signature(&self) -> Vec<(String, Vec<String>)> {
        let adj = self.adjacency();
        let mut sig: Vec<(String, Vec<String>)> = adj
            .iter()
            .map(|(v, nbrs)| {
                let mut n: Vec<String> = nbrs
                    .iter()
                    .map(|(e, u)| format!("{e}:{}", self.nodes[u]))
                    .collect();
                n.sort();
                (self.nodes[v].clone(), n)
            })
            .collect();
        sig.sort();
        sig
    }

    /// Same graph with node `v` renamed to `perm(v)`.
    pub fn relabeled(&self, perm: impl Fn(usize) -> usize) -> LabeledGraph {
        let nodes = self
            .nodes
            .iter()
            .map(|(&v, l)| (perm(v), l.clone()))
            .collect();
        let mut edges: Vec<(usize, usize, String)> = self
            .edges
            .iter()
            .map(|(u, v, e)| {
                let (a, b) = (perm(*u), perm(*v));
                (a.min(b), a.max(b), e.clone())
            })
            .collect();
        edges.sort();
        LabeledGraph { nodes, edges }
    }

    /// Human-readable listing used by `hash --explain`.
    pub fn to_text(&self) -> String {
        let adj = self.adjacency();
        let mut out = String::new();
        for (v, label) in &self.nodes {
            let _ = write!(out, "{v} {label} :");
            for (e, u) in &adj[v] {
                let _ = write!(out, " {e}{u}");
            }
            out.push('\n');
        }
        out
    }
}

/// Labels a (reduced) diagram: spiders `Z:<num>/<den>` (or `X:` for any
/// X spider left in an unreduced graph), boundaries `IN:<k>` / `OUT:<k>`,
/// edges `S` / `H`.
pub fn canonical_graph(g: &ZxGraph) -> LabeledGraph {
    let mut nodes = BTreeMap::new();
    for (k, &b) in g.inputs().iter().enumerate() {
        nodes.insert(b, format!("IN:{k}"));
    }
    for (k, &b) in g.outputs().iter().enumerate() {
        nodes.insert(b, format!("OUT:{k}"));
    }
    for v in g.vertices() {
        match g.kind(v) {
            VertexKind::Z => {
                nodes.insert(v, format!("Z:{}", g.phase(v)));
            }
            VertexKind::X => {
                nodes.insert(v, format!("X:{}", g.phase(v)));
            }
            VertexKind::Boundary => {}
        }
    }
    let edges = g
        .edges()
        .map(|(u, v, et)| (u, v, et.code().to_string()))
        .collect();
    LabeledGraph { nodes, edges }
}

/// WL fingerprint: `iterations` rounds of
/// `label'(v) = SHA256(label(v) ‖ ";e:label(u)" for each neighbor, sorted)`,
/// then `SHA256(sorted final labels joined by ",")`, truncated to 16 hex
/// digits. Intermediate labels are lowercase hex digests.
pub fn wl_hash(lg: &LabeledGraph, iterations: u32) -> String {
    assert!(iterations >= 1, "at least one WL round is required");
    let index: BTreeMap<usize, usize> = lg.nodes.keys().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj: Vec<Vec<(&[u8], usize)>> = vec![Vec::new(); lg.nodes.len()];
    for (u, v, e) in &lg.edges {
        let (a, b) = (index[u], index[v]);
        adj[a].push((e.as_bytes(), b));
        adj[b].push((e.as_bytes(), a));
    }
    let mut labels: Vec<Vec<u8>> = lg.nodes.values().map(|l| l.as_bytes().to_vec()).collect();
    let mut next: Vec<Vec<u8>> = vec![vec![0u8; 64]; labels.len()];
    for _ in 0..iterations {
        for (v, nbrs) in adj.iter_mut().enumerate() {
            // Sorting (edge, label) pairs orders the ";e:label" strings the
            // same way: edge codes share one length and ':' follows them.
            nbrs.sort_unstable_by(|(e1, u1), (e2, u2)| {
                e1.cmp(e2).then_with(|| labels[*u1].cmp(&labels[*u2]))
            });
            let mut h = Sha256::new();
            h.update(&labels[v]);
            for (e, u) in nbrs.iter() {
                h.update(b";");
                h.update(e);
                h.update(b":");
                h.update(&labels[*u]);
            }
            next[v].resize(64, 0);
            hex::encode_to_slice(h.finalize(), &mut next[v]).expect("64 hex digits");
        }
        std::mem::swap(&mut labels, &mut next);
    }
    labels.sort_unstable();
    let mut h = Sha256::new();
    for (i, l) in labels.iter().enumerate() {
        if i > 0 {
            h.update(b",");
        }
        h.update(l);
    }
    let mut digest = hex::encode(h.finalize());
    digest.truncate(HASH_LEN);
    digest
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PayloadKind {
    /// Full statevector.
    Full,
    /// A single expectation value.
    Compact,
}

impl PayloadKind {
    pub fn code(self) -> u8 {
        match self {
            PayloadKind::Full => 0,
            PayloadKind::Compact => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<PayloadKind> {
        match code {
            0 => Some(PayloadKind::Full),
            1 => Some(PayloadKind::Compact),
            _ => None,
        }
    }
}

impl fmt::Display for PayloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayloadKind::Full => "full",
            PayloadKind::Compact => "compact",
        })
    }
}

/// Content address of a circuit plus the metadata used to reject hash
/// collisions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey {
    pub hash: String,
    pub n_qubits: u32,
    pub interior_spiders: u32,
    pub payload_kind: PayloadKind,
}

impl CacheKey {
    pub fn with_payload_kind(mut self, kind: PayloadKind) -> CacheKey {
        self.payload_kind = kind;
        self
    }

    /// True when the collision-validation metadata agrees.
    pub fn metadata_matches(&self, other: &CacheKey) -> bool {
        self.n_qubits == other.n_qubits && self.interior_spiders == other.interior_spiders
    }

    pub fn is_well_formed(&self) -> bool {
        self.hash.len() == HASH_LEN
            && self
                .hash
                .bytes()
                .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
    }
}

impl fmt::Display for CacheKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} qubits={} interior_spiders={} payload={}",
            self.hash, self.n_qubits, self.interior_spiders, self.payload_kind
        )
    }
}

/// Wall time spent in each stage of [`circuit_key_timed`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KeyTimings {
    pub translate: Duration,
    pub reduce: Duration,
    pub serialize: Duration,
    pub hash: Duration,
}

impl KeyTimings {
    pub fn total(&self) -> Duration {
        self.translate + self.reduce + self.serialize + self.hash
    }
}

/// Key of `c` with a `Full` payload kind and the default WL depth.
pub fn circuit_key(c: &Circuit) -> CacheKey {
    circuit_key_timed(c, DEFAULT_WL_ITERATIONS).0
}

/// The complete pipeline with per-stage timings.
pub fn circuit_key_timed(c: &Circuit, wl_iterations: u32) -> (CacheKey, KeyTimings) {
    let t0 = Instant::now();
    let mut g = circuit_to_zx(c);
    let t1 = Instant::now();
    full_reduce(&mut g);
    let t2 = Instant::now();
    let lg = canonical_graph(&g);
    let t3 = Instant::now();
    let hash = wl_hash(&lg, wl_iterations);
    let t4 = Instant::now();
    let key = CacheKey {
        hash,
        n_qubits: c.n_qubits() as u32,
        interior_spiders: g.spider_count() as u32,
        payload_kind: PayloadKind::Full,
    };
    let timings = KeyTimings {
        translate: t1 - t0,
        reduce: t2 - t1,
        serialize: t3 - t2,
        hash: t4 - t3,
    };
    (key, timings)
}

/// Reduced diagram and its labelling, for diagnostics.
pub fn explain(c: &Circuit) -> (ZxGraph, LabeledGraph) {
    let mut g = circuit_to_zx(c);
    full_reduce(&mut g);
    let lg = canonical_graph(&g);
    (g, lg)
}

/// True iff the key's metadata matches what `c` recomputes to.
pub fn verify_key_match(key: &CacheKey, c: &Circuit) -> bool {
    key.metadata_matches(&circuit_key(c))
}
