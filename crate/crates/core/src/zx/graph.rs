use std::fmt::Write as _;

use crate::circuit::Phase;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    Z,
    X,
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeType {
    Simple,
    Hadamard,
}

impl EdgeType {
    pub fn toggled(self) -> EdgeType {
        match self {
            EdgeType::Simple => EdgeType::Hadamard,
            EdgeType::Hadamard => EdgeType::Simple,
        }
    }

    /// Type of the single edge equivalent to two edges joined through an
    /// identity spider.
    pub fn compose(self, other: EdgeType) -> EdgeType {
        if self == other {
            EdgeType::Simple
        } else {
            EdgeType::Hadamard
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            EdgeType::Simple => "S",
            EdgeType::Hadamard => "H",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct VertexData {
    kind: VertexKind,
    phase: Phase,
    // Sorted by neighbor id; at most one entry per neighbor.
    nbrs: Vec<(usize, EdgeType)>,
}

/// Open ZX diagram with stable, never-reused vertex ids.
///
/// Parallel edges and self-loops are never stored: [`ZxGraph::add_edge_smart`]
/// resolves them with the usual ZX identities as they arise, dropping scalars.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ZxGraph {
    vertices: Vec<Option<VertexData>>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    n_live: usize,
    n_edges: usize,
}

impl ZxGraph {
    pub fn new() -> ZxGraph {
        ZxGraph::default()
    }

    pub fn add_vertex(&mut self, kind: VertexKind, phase: Phase) -> usize {
        let id = self.vertices.len();
        self.vertices.push(Some(VertexData {
            kind,
            phase: if kind == VertexKind::Boundary {
                Phase::ZERO
            } else {
                phase
            },
            nbrs: Vec::new(),
        }));
        self.n_live += 1;
        id
    }

    pub fn add_input(&mut self) -> usize {
        let v = self.add_vertex(VertexKind::Boundary, Phase::ZERO);
        self.inputs.push(v);
        v
    }

    pub fn add_output(&mut self) -> usize {
        let v = self.add_vertex(VertexKind::Boundary, Phase::ZERO);
        self.outputs.push(v);
        v
    }

    pub fn set_inputs(&mut self, inputs: Vec<usize>) {
        self.inputs = inputs;
    }

    pub fn set_outputs(&mut self, outputs: Vec<usize>) {
        self.outputs = outputs;
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// One past the largest id ever allocated.
    pub fn next_id(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        matches!(self.vertices.get(v), Some(Some(_)))
    }

    fn data(&self, v: usize) -> &VertexData {
        self.vertices[v]
            .as_ref()
            .unwrap_or_else(|| panic!("vertex {v} does not exist"))
    }

    fn data_mut(&mut self, v: usize) -> &mut VertexData {
        self.vertices[v]
            .as_mut()
            .unwrap_or_else(|| panic!("vertex {v} does not exist"))
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        self.data(v).kind
    }

    pub fn set_kind(&mut self, v: usize, kind: VertexKind) {
        self.data_mut(v).kind = kind;
    }

    pub fn phase(&self, v: usize) -> Phase {
        self.data(v).phase
    }

    pub fn set_phase(&mut self, v: usize, phase: Phase) {
        self.data_mut(v).phase = phase;
    }

    pub fn add_to_phase(&mut self, v: usize, phase: Phase) {
        self.data_mut(v).phase += phase;
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.kind(v) == VertexKind::Boundary
    }

    /// Live vertex ids in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|_| i))
    }

    /// Edges `(u, v, type)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeType)> + '_ {
        self.vertices().flat_map(move |u| {
            self.data(u)
                .nbrs
                .iter()
                .filter(move |&&(v, _)| v > u)
                .map(move |&(v, et)| (u, v, et))
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.n_live
    }

    pub fn num_edges(&self) -> usize {
        self.n_edges
    }

    /// Neighbors with edge types, ascending by id.
    pub fn neighbors(&self, v: usize) -> &[(usize, EdgeType)] {
        &self.data(v).nbrs
    }

    pub fn neighbor_ids(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.data(v).nbrs.iter().map(|&(u, _)| u)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.data(v).nbrs.len()
    }

    pub fn edge_type(&self, u: usize, v: usize) -> Option<EdgeType> {
        let nbrs = &self.data(u).nbrs;
        nbrs.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| nbrs[i].1)
    }

    pub fn connected(&self, u: usize, v: usize) -> bool {
        self.edge_type(u, v).is_some()
    }

    fn insert_half(&mut self, u: usize, v: usize, et: EdgeType) {
        let nbrs = &mut self.data_mut(u).nbrs;
        match nbrs.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(i) => nbrs[i].1 = et,
            Err(i) => nbrs.insert(i, (v, et)),
        }
    }

    fn remove_half(&mut self, u: usize, v: usize) -> Option<EdgeType> {
        let nbrs = &mut self.data_mut(u).nbrs;
        nbrs.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| nbrs.remove(i).1)
    }

    /// Adds an edge that must not already exist. Panics on self-loops and
    /// duplicates; use [`ZxGraph::add_edge_smart`] when either can occur.
    pub fn add_edge(&mut self, u: usize, v: usize, et: EdgeType) {
        assert_ne!(u, v, "self-loop on {u}");
        assert!(!self.connected(u, v), "duplicate edge {u}-{v}");
        self.insert_half(u, v, et);
        self.insert_half(v, u, et);
        self.n_edges += 1;
    }

    pub fn set_edge_type(&mut self, u: usize, v: usize, et: EdgeType) {
        assert!(self.connected(u, v), "no edge {u}-{v}");
        self.insert_half(u, v, et);
        self.insert_half(v, u, et);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Option<EdgeType> {
        let et = self.remove_half(u, v);
        if et.is_some() {
            self.remove_half(v, u);
            self.n_edges -= 1;
        }
        et
    }

    /// Adds an edge between spiders, resolving self-loops and parallel edges:
    ///
    /// * self-loop: a simple loop vanishes, a Hadamard loop adds `π`;
    /// * same colour: S+S → S, H+H → nothing, S+H → S with `π` on `u`;
    /// * different colour: S+S → nothing, H+H → H, S+H → H with `π` on `u`.
    pub fn add_edge_smart(&mut self, u: usize, v: usize, et: EdgeType) {
        if u == v {
            if et == EdgeType::Hadamard {
                self.add_to_phase(u, Phase::PI);
            }
            return;
        }
        let Some(existing) = self.edge_type(u, v) else {
            self.add_edge(u, v, et);
            return;
        };
        let (ku, kv) = (self.kind(u), self.kind(v));
        assert!(
            ku != VertexKind::Boundary && kv != VertexKind::Boundary,
            "parallel edge on boundary {u}-{v}"
        );
        let same_colour = ku == kv;
        // The edge type that survives a pair of parallel edges when both
        // are of the "fusing" kind for this colour pair.
        let fusing = if same_colour {
            EdgeType::Simple
        } else {
            EdgeType::Hadamard
        };
        match (existing == fusing, et == fusing) {
            (true, true) => {}
            (false, false) => {
                self.remove_edge(u, v);
            }
            _ => {
                self.set_edge_type(u, v, fusing);
                self.add_to_phase(u, Phase::PI);
            }
        }
    }

    /// Removes `v` and its incident edges. Boundary bookkeeping is the
    /// caller's responsibility.
    pub fn remove_vertex(&mut self, v: usize) {
        let data = self.vertices[v].take().expect("vertex exists");
        for (u, _) in data.nbrs {
            self.remove_half(u, v);
            self.n_edges -= 1;
        }
        self.n_live -= 1;
    }

    /// Non-boundary vertex count.
    pub fn spider_count(&self) -> usize {
        self.vertices
            .iter()
            .flatten()
            .filter(|d| d.kind != VertexKind::Boundary)
            .count()
    }

    /// True when `v` is a spider none of whose neighbors is a boundary.
    pub fn is_interior(&self, v: usize) -> bool {
        !self.is_boundary(v) && self.neighbor_ids(v).all(|u| !self.is_boundary(u))
    }

    /// Checks the structural invariants and returns a description of the
    /// first violation.
    pub fn validate(&self) -> Result<(), String> {
        let mut half_edges = 0;
        for v in self.vertices() {
            let d = self.data(v);
            if d.nbrs.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(format!("neighbor list of {v} unsorted or duplicated"));
            }
            for &(u, et) in &d.nbrs {
                if u == v {
                    return Err(format!("self-loop on {v}"));
                }
                if !self.contains(u) {
                    return Err(format!("{v} adjacent to removed vertex {u}"));
                }
                if self.edge_type(u, v) != Some(et) {
                    return Err(format!("asymmetric edge {v}-{u}"));
                }
            }
            half_edges += d.nbrs.len();
            if d.kind == VertexKind::Boundary {
                if !d.phase.is_zero() {
                    return Err(format!("boundary {v} has a phase"));
                }
                if d.nbrs.len() != 1 {
                    return Err(format!("boundary {v} has degree {}", d.nbrs.len()));
                }
                if !self.inputs.contains(&v) && !self.outputs.contains(&v) {
                    return Err(format!("boundary {v} is neither input nor output"));
                }
            }
        }
        if half_edges != 2 * self.n_edges {
            return Err("edge count out of sync".into());
        }
        for &b in self.inputs.iter().chain(&self.outputs) {
            if !self.contains(b) || !self.is_boundary(b) {
                return Err(format!("listed boundary {b} is not a boundary vertex"));
            }
        }
        if self.inputs.iter().any(|b| self.outputs.contains(b)) {
            return Err("inputs and outputs overlap".into());
        }
        Ok(())
    }

    /// Deterministic adjacency listing, one vertex per line:
    ///
    /// ```text
    /// inputs 0
    /// outputs 2
    /// 0 B : 1S
    /// 1 Z 1/4 : 0S 2S
    /// 2 B : 1S
    /// ```
    pub fn dump(&self) -> String {
        let join = |ids: &[usize]| {
            ids.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = format!(
            "inputs {}\noutputs {}\n",
            join(&self.inputs),
            join(&self.outputs)
        );
        for v in self.vertices() {
            let d = self.data(v);
            let _ = match d.kind {
                VertexKind::Boundary => write!(out, "{v} B :"),
                VertexKind::Z => write!(out, "{v} Z {} :", d.phase),
                VertexKind::X => write!(out, "{v} X {} :", d.phase),
            };
            for &(u, et) in &d.nbrs {
                let _ = write!(out, " {u}{}", et.code());
            }
            out.push('\n');
        }
        out
    }
}
