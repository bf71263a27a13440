use std::collections::BTreeMap;
use std::fmt;

use super::graph::{VertexKind, ZxGraph};
use super::rules;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    ColorChange,
    Fusion,
    IdentityRemoval,
    LocalComplementation,
    Pivot,
    GadgetPivot,
    HubNormalization,
    GadgetFusion,
    ScalarRemoval,
}

impl Rule {
    /// Priority order used by [`full_reduce`].
    pub const ORDER: [Rule; 9] = [
        Rule::ColorChange,
        Rule::Fusion,
        Rule::IdentityRemoval,
        Rule::LocalComplementation,
        Rule::Pivot,
        Rule::GadgetPivot,
        Rule::HubNormalization,
        Rule::GadgetFusion,
        Rule::ScalarRemoval,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Termination measure for [`full_reduce`], compared lexicographically.
///
/// * `spiders`: non-boundary vertices. Fusion, identity removal, local
///   complementation, pivots, gadget fusion and scalar removal lower it.
/// * `loose_phases`: spiders with a non-Pauli phase that are not degree-1
///   leaves. A gadget pivot keeps the spider count but parks one such phase
///   on a fresh leaf.
/// * `x_spiders`: lowered by colour changes.
/// * `pi_hubs`: degree-1 leaves hanging off a `π` spider by a Hadamard edge,
///   lowered by hub normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Measure {
    pub spiders: usize,
    pub loose_phases: usize,
    pub x_spiders: usize,
    pub pi_hubs: usize,
}

pub fn measure(g: &ZxGraph) -> Measure {
    let mut m = Measure {
        spiders: 0,
        loose_phases: 0,
        x_spiders: 0,
        pi_hubs: 0,
    };
    for v in g.vertices() {
        if g.is_boundary(v) {
            continue;
        }
        m.spiders += 1;
        if g.kind(v) == VertexKind::X {
            m.x_spiders += 1;
        }
        if !g.phase(v).is_pauli() && g.degree(v) != 1 {
            m.loose_phases += 1;
        }
        if rules::check_normalize_hub(g, v) {
            m.pi_hubs += 1;
        }
    }
    m
}

/// Converts every X spider to Z and fuses all simple-edge Z pairs.
pub fn to_graph_like(g: &mut ZxGraph) {
    sweep(g, Rule::ColorChange, &mut |_, _| {});
    while sweep(g, Rule::Fusion, &mut |_, _| {}) {}
}

/// Runs the full simplification in place. See [`full_reduce_observed`].
pub fn full_reduce(g: &mut ZxGraph) {
    full_reduce_observed(g, |_, _| {});
}

/// Reduced copy of `g`.
pub fn full_reduced(g: &ZxGraph) -> ZxGraph {
    let mut out = g.clone();
    full_reduce(&mut out);
    out
}

/// Full simplification to a fixpoint, calling `observe` after every single
/// rule application.
///
/// Strategy: find the first rule in [`Rule::ORDER`] with any match, apply it
/// exhaustively in one ascending-id sweep (candidates are re-checked when
/// visited, lowest id or lexicographically lowest pair first), then start
/// over from the first rule. Stops when no rule matches anywhere. Every
/// application strictly lowers [`Measure`].
pub fn full_reduce_observed(g: &mut ZxGraph, mut observe: impl FnMut(Rule, &ZxGraph)) {
    'outer: loop {
        for rule in Rule::ORDER {
            if sweep(g, rule, &mut observe) {
                continue 'outer;
            }
        }
        break;
    }
}

/// One ascending sweep of `rule`; true if anything fired.
pub fn sweep(g: &mut ZxGraph, rule: Rule, observe: &mut impl FnMut(Rule, &ZxGraph)) -> bool {
    let mut fired = false;
    if rule == Rule::GadgetFusion {
        while let Some((h1, h2)) = first_gadget_pair(g) {
            rules::gadget_fuse(g, h1, h2);
            observe(rule, g);
            fired = true;
        }
        return fired;
    }
    let mut v = 0;
    while v < g.next_id() {
        if !g.contains(v) {
            v += 1;
            continue;
        }
        let applied = match rule {
            Rule::ColorChange => rules::color_change(g, v),
            Rule::IdentityRemoval => rules::remove_id(g, v),
            Rule::LocalComplementation => rules::lcomp(g, v),
            Rule::HubNormalization => rules::normalize_hub(g, v),
            Rule::ScalarRemoval => rules::remove_scalar(g, v),
            Rule::Fusion => match partner(g, v, rules::check_fuse) {
                // `v` survives a fusion, so stay on it for further partners.
                Some(u) => {
                    rules::fuse(g, v, u);
                    observe(rule, g);
                    fired = true;
                    continue;
                }
                None => false,
            },
            Rule::Pivot => partner(g, v, rules::check_pivot).is_some_and(|u| rules::pivot(g, v, u)),
            Rule::GadgetPivot => partner(g, v, rules::check_pivot_gadget)
                .is_some_and(|u| rules::pivot_gadget(g, v, u).is_some()),
            Rule::GadgetFusion => unreachable!(),
        };
        if applied {
            observe(rule, g);
            fired = true;
        }
        v += 1;
    }
    fired
}

fn partner(g: &ZxGraph, v: usize, check: fn(&ZxGraph, usize, usize) -> bool) -> Option<usize> {
    g.neighbor_ids(v).find(|&u| check(g, v, u))
}

/// Lexicographically lowest pair of hubs heading gadgets with equal targets.
fn first_gadget_pair(g: &ZxGraph) -> Option<(usize, usize)> {
    let mut first_by_targets: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut best: Option<(usize, usize)> = None;
    for h in g.vertices() {
        let Some(leaf) = rules::gadget_leaf(g, h) else {
            continue;
        };
        let targets = rules::gadget_targets(g, h, leaf);
        if targets.is_empty() {
            continue;
        }
        match first_by_targets.get(&targets) {
            Some(&h1) => {
                if best.is_none_or(|b| (h1, h) < b) {
                    best = Some((h1, h));
                }
            }
            None => {
                first_by_targets.insert(targets, h);
            }
        }
    }
    best
}
