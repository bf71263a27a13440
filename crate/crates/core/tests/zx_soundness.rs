use std::collections::BTreeMap;

use qcache::circuit::{build_random, Circuit, Gate, Phase};
use qcache::zx::{
    circuit_to_zx, full_reduce, full_reduce_observed, measure, to_graph_like, zx_to_tensor, Rule,
    ZxGraph,
};

const TOL: f64 = 1e-9;

fn corpus(n: usize) -> Vec<Circuit> {
    (0..n as u64)
        .map(|seed| build_random(2 + (seed % 3) as usize, 3 + (seed % 5) as usize, seed))
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn every_rule_application_preserves_the_map() {
    let mut fired: BTreeMap<Rule, usize> = BTreeMap::new();
    for c in corpus(200) {
        let mut g = circuit_to_zx(&c);
        let reference = zx_to_tensor(&g).unwrap();
        let mut last = measure(&g);
        full_reduce_observed(&mut g, |rule, g: &ZxGraph| {
            g.validate().unwrap();
            let m = zx_to_tensor(g).unwrap();
            let d = reference.distance_up_to_scalar(&m).unwrap();
            assert!(d <= TOL, "{rule} broke the map ({d:e}) on\n{}", c.to_text());
            let next = measure(g);
            assert!(next < last, "{rule} did not lower the measure");
            last = next;
            *fired.entry(rule).or_default() += 1;
        });
    }
    for rule in [
        Rule::ColorChange,
        Rule::Fusion,
        Rule::IdentityRemoval,
        Rule::LocalComplementation,
        Rule::Pivot,
        Rule::GadgetPivot,
    ] {
        assert!(
            fired.get(&rule).copied().unwrap_or(0) > 0,
            "{rule} never fired: {fired:?}"
        );
    }
}

#[test]
fn graph_like_form_preserves_the_map() {
    for c in corpus(100) {
        let mut g = circuit_to_zx(&c);
        let before = zx_to_tensor(&g).unwrap();
        to_graph_like(&mut g);
        assert!(before.approx_eq_up_to_scalar(&zx_to_tensor(&g).unwrap(), TOL));
    }
}

#[test]
fn syntactic_variants_reduce_identically() {
    let pairs = [
        (vec![Gate::s(0), Gate::s(0)], vec![Gate::z(0)]),
        (vec![Gate::t(0), Gate::t(0)], vec![Gate::s(0)]),
        (vec![Gate::h(0), Gate::h(0)], vec![]),
        (vec![Gate::rz(0, Phase::QUARTER_PI)], vec![Gate::t(0)]),
    ];
    for (a, b) in pairs {
        let mut ga = circuit_to_zx(&Circuit::from_gates(1, a).unwrap());
        let mut gb = circuit_to_zx(&Circuit::from_gates(1, b).unwrap());
        full_reduce(&mut ga);
        full_reduce(&mut gb);
        assert_eq!(ga.spider_count(), gb.spider_count());
        let pa: Vec<_> = ga
            .vertices()
            .filter(|&v| !ga.is_boundary(v))
            .map(|v| ga.phase(v))
            .collect();
        let pb: Vec<_> = gb
            .vertices()
            .filter(|&v| !gb.is_boundary(v))
            .map(|v| gb.phase(v))
            .collect();
        assert_eq!(pa, pb);
    }
}
