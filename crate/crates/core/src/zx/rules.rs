//! Individual rewrite rules.
//!
//! Each rule comes as `check_*` (is it applicable here?) and an applying
//! function that returns `false` without touching the graph when the check
//! fails. All rules preserve the diagram's linear map up to a nonzero scalar;
//! scalars are not tracked.

use crate::circuit::Phase;

use super::graph::{EdgeType, VertexKind, ZxGraph};

fn is_spider(g: &ZxGraph, v: usize) -> bool {
    g.contains(v) && !g.is_boundary(v)
}

fn is_z(g: &ZxGraph, v: usize) -> bool {
    g.contains(v) && g.kind(v) == VertexKind::Z
}

/// Z spider, no boundary neighbors, every incident edge Hadamard and every
/// neighbor a Z spider.
fn is_graph_like_interior(g: &ZxGraph, v: usize) -> bool {
    is_z(g, v)
        && g.neighbors(v)
            .iter()
            .all(|&(u, et)| et == EdgeType::Hadamard && g.kind(u) == VertexKind::Z)
}

fn has_leaf_neighbor(g: &ZxGraph, v: usize) -> bool {
    g.neighbor_ids(v).any(|u| g.degree(u) == 1)
}

pub fn check_color_change(g: &ZxGraph, v: usize) -> bool {
    g.contains(v) && g.kind(v) == VertexKind::X
}

/// Turns an X spider into a Z spider by toggling every incident edge.
pub fn color_change(g: &mut ZxGraph, v: usize) -> bool {
    if !check_color_change(g, v) {
        return false;
    }
    let nbrs = g.neighbors(v).to_vec();
    for (u, et) in nbrs {
        g.set_edge_type(v, u, et.toggled());
    }
    g.set_kind(v, VertexKind::Z);
    true
}

pub fn check_fuse(g: &ZxGraph, u: usize, v: usize) -> bool {
    u != v
        && is_spider(g, u)
        && is_spider(g, v)
        && g.kind(u) == g.kind(v)
        && g.edge_type(u, v) == Some(EdgeType::Simple)
}

/// Fuses two same-coloured spiders joined by a simple edge into the one with
/// the lower id; phases add.
pub fn fuse(g: &mut ZxGraph, u: usize, v: usize) -> bool {
    if !check_fuse(g, u, v) {
        return false;
    }
    let (keep, gone) = (u.min(v), u.max(v));
    g.add_to_phase(keep, g.phase(gone));
    let nbrs = g.neighbors(gone).to_vec();
    g.remove_vertex(gone);
    for (w, et) in nbrs {
        if w != keep {
            g.add_edge_smart(keep, w, et);
        }
    }
    true
}

pub fn check_remove_id(g: &ZxGraph, v: usize) -> bool {
    is_spider(g, v) && g.phase(v).is_zero() && g.degree(v) == 2
}

/// Removes a phase-free degree-2 spider, joining its neighbors by the
/// composed edge.
pub fn remove_id(g: &mut ZxGraph, v: usize) -> bool {
    if !check_remove_id(g, v) {
        return false;
    }
    let [(a, ea), (b, eb)] = g.neighbors(v)[..] else {
        unreachable!()
    };
    g.remove_vertex(v);
    g.add_edge_smart(a, b, ea.compose(eb));
    true
}

pub fn check_lcomp(g: &ZxGraph, v: usize) -> bool {
    is_graph_like_interior(g, v) && g.phase(v).is_proper_clifford()
}

/// Local complementation about a `±π/2` interior spider: the spider is
/// removed, its neighborhood complemented and `∓π/2` added to each neighbor.
pub fn lcomp(g: &mut ZxGraph, v: usize) -> bool {
    if !check_lcomp(g, v) {
        return false;
    }
    let alpha = g.phase(v);
    let nbrs: Vec<usize> = g.neighbor_ids(v).collect();
    g.remove_vertex(v);
    for (i, &a) in nbrs.iter().enumerate() {
        g.add_to_phase(a, -alpha);
        for &b in &nbrs[i + 1..] {
            g.add_edge_smart(a, b, EdgeType::Hadamard);
        }
    }
    true
}

pub fn check_pivot(g: &ZxGraph, u: usize, v: usize) -> bool {
    if u == v
        || !is_graph_like_interior(g, u)
        || !is_graph_like_interior(g, v)
        || !g.phase(u).is_pauli()
        || !g.phase(v).is_pauli()
        || !g.connected(u, v)
    {
        return false;
    }
    // Leave phase gadgets intact, except that a Pauli leaf may be pivoted
    // away together with its hub.
    let leaf_pair = g.degree(u) == 1 || g.degree(v) == 1;
    leaf_pair || (!has_leaf_neighbor(g, u) && !has_leaf_neighbor(g, v))
}

fn pivot_unchecked(g: &mut ZxGraph, u: usize, v: usize) {
    let (pu, pv) = (g.phase(u), g.phase(v));
    let nu: Vec<usize> = g.neighbor_ids(u).filter(|&w| w != v).collect();
    let nv: Vec<usize> = g.neighbor_ids(v).filter(|&w| w != u).collect();
    g.remove_vertex(u);
    g.remove_vertex(v);
    // Complete bipartite toggle between the two neighborhoods. Common
    // neighbors meet themselves once (a Hadamard self-loop, i.e. `+π`) and
    // every other common pair twice, which cancels.
    for &a in &nu {
        g.add_to_phase(a, pv);
        for &b in &nv {
            g.add_edge_smart(a, b, EdgeType::Hadamard);
        }
    }
    for &b in &nv {
        g.add_to_phase(b, pu);
    }
}

/// Pivots along the Hadamard edge between two interior Pauli spiders,
/// removing both.
pub fn pivot(g: &mut ZxGraph, u: usize, v: usize) -> bool {
    if !check_pivot(g, u, v) {
        return false;
    }
    pivot_unchecked(g, u, v);
    true
}

/// `u` interior Pauli, `v` interior non-Pauli, Hadamard-connected, neither a
/// gadget hub nor a leaf.
pub fn check_pivot_gadget(g: &ZxGraph, u: usize, v: usize) -> bool {
    u != v
        && is_graph_like_interior(g, u)
        && is_graph_like_interior(g, v)
        && g.phase(u).is_pauli()
        && !g.phase(v).is_pauli()
        && g.connected(u, v)
        && g.degree(u) >= 2
        && g.degree(v) >= 2
        && !has_leaf_neighbor(g, u)
        && !has_leaf_neighbor(g, v)
}

/// Moves the phase of `v` onto a fresh gadget (hub of phase 0, leaf carrying
/// the phase) and pivots `u` with the now phase-free `v`. Returns the leaf.
pub fn pivot_gadget(g: &mut ZxGraph, u: usize, v: usize) -> Option<usize> {
    if !check_pivot_gadget(g, u, v) {
        return None;
    }
    let alpha = g.phase(v);
    let hub = g.add_vertex(VertexKind::Z, Phase::ZERO);
    let leaf = g.add_vertex(VertexKind::Z, alpha);
    g.set_phase(v, Phase::ZERO);
    g.add_edge(v, hub, EdgeType::Hadamard);
    g.add_edge(hub, leaf, EdgeType::Hadamard);
    pivot_unchecked(g, u, v);
    normalize_hub(g, leaf);
    Some(leaf)
}

pub fn check_normalize_hub(g: &ZxGraph, leaf: usize) -> bool {
    if !is_z(g, leaf) || g.degree(leaf) != 1 {
        return false;
    }
    let (hub, et) = g.neighbors(leaf)[0];
    et == EdgeType::Hadamard && is_z(g, hub) && g.phase(hub) == Phase::PI
}

/// A `π` on a gadget hub is pushed through to its leaf: hub `π → 0`,
/// leaf `α → −α`.
pub fn normalize_hub(g: &mut ZxGraph, leaf: usize) -> bool {
    if !check_normalize_hub(g, leaf) {
        return false;
    }
    let hub = g.neighbors(leaf)[0].0;
    g.set_phase(hub, Phase::ZERO);
    g.set_phase(leaf, -g.phase(leaf));
    true
}

/// If `hub` heads a phase gadget (phase 0, exactly one leaf, all other
/// neighbors Z spiders over Hadamard edges), returns its leaf.
pub fn gadget_leaf(g: &ZxGraph, hub: usize) -> Option<usize> {
    if !is_graph_like_interior(g, hub) || !g.phase(hub).is_zero() || g.degree(hub) < 2 {
        return None;
    }
    let mut leaves = g.neighbor_ids(hub).filter(|&w| g.degree(w) == 1);
    let leaf = leaves.next()?;
    if leaves.next().is_some() {
        return None;
    }
    Some(leaf)
}

/// Neighbors of a gadget hub other than its leaf.
pub fn gadget_targets(g: &ZxGraph, hub: usize, leaf: usize) -> Vec<usize> {
    g.neighbor_ids(hub).filter(|&w| w != leaf).collect()
}

pub fn check_gadget_fuse(g: &ZxGraph, h1: usize, h2: usize) -> bool {
    if h1 == h2 {
        return false;
    }
    match (gadget_leaf(g, h1), gadget_leaf(g, h2)) {
        (Some(l1), Some(l2)) => gadget_targets(g, h1, l1) == gadget_targets(g, h2, l2),
        _ => false,
    }
}

/// Merges two gadgets acting on the same targets into the one with the lower
/// hub id; leaf phases add.
pub fn gadget_fuse(g: &mut ZxGraph, h1: usize, h2: usize) -> bool {
    if !check_gadget_fuse(g, h1, h2) {
        return false;
    }
    let (keep, gone) = (h1.min(h2), h1.max(h2));
    let keep_leaf = gadget_leaf(g, keep).expect("checked");
    let gone_leaf = gadget_leaf(g, gone).expect("checked");
    g.add_to_phase(keep_leaf, g.phase(gone_leaf));
    g.remove_vertex(gone_leaf);
    g.remove_vertex(gone);
    true
}

/// A spider with no edges, or a pair of spiders connected only to each
/// other: a scalar factor.
pub fn check_remove_scalar(g: &ZxGraph, v: usize) -> bool {
    if !is_spider(g, v) {
        return false;
    }
    match g.degree(v) {
        0 => true,
        1 => {
            let u = g.neighbors(v)[0].0;
            is_spider(g, u) && g.degree(u) == 1
        }
        _ => false,
    }
}

pub fn remove_scalar(g: &mut ZxGraph, v: usize) -> bool {
    if !check_remove_scalar(g, v) {
        return false;
    }
    if g.degree(v) == 1 {
        let u = g.neighbors(v)[0].0;
        g.remove_vertex(u);
    }
    g.remove_vertex(v);
    true
}
