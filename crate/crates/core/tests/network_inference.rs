mod common;

use bnlf::inference::{joint_posterior, posterior, predict_label, InferenceError};
use bnlf::network::{Assignment, Edge, Network, NetworkError, Skeleton, StateSpace};
use common::{all_states, random_network};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full(states: &[usize]) -> Assignment {
    states.iter().copied().enumerate().collect()
}

fn brute_force(net: &Network, query: usize, evidence: &Assignment) -> Option<Vec<f64>> {
    let mut out = vec![0.0; net.node(query).len()];
    for s in all_states(net) {
        if evidence.iter().all(|(n, v)| s[n] == v) {
            out[s[query]] += net.joint_probability(&full(&s)).unwrap();
        }
    }
    let z: f64 = out.iter().sum();
    (z > 0.0).then(|| out.iter().map(|x| x / z).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_sums_to_one(seed in any::<u64>()) {
        let net = random_network(seed, 6, 4);
        let total: f64 = all_states(&net).iter().map(|s| net.joint_probability(&full(s)).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9, "total {total}");
    }

    #[test]
    fn cpt_row_ignores_binding_order_and_extras(seed in any::<u64>()) {
        let net = random_network(seed, 6, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for child in 0..net.node_count() {
            let states: Vec<usize> = net.nodes().iter().map(|n| rng.random_range(0..n.len())).collect();
            let mut parents = net.parents(child).to_vec();
            let exact: Assignment = parents.iter().map(|&p| (p, states[p])).collect();
            parents.shuffle(&mut rng);
            let mut shuffled = Assignment::new();
            for &p in &parents {
                shuffled.bind(p, states[p]);
            }
            let everything = full(&states);
            let a = net.cpt_row(child, &exact).unwrap();
            prop_assert_eq!(a, net.cpt_row(child, &shuffled).unwrap());
            prop_assert_eq!(a, net.cpt_row(child, &everything).unwrap());
        }
    }

    #[test]
    fn json_round_trip_is_lossless(seed in any::<u64>()) {
        let net = random_network(seed, 5, 3);
        let text = net.to_json();
        let back = Network::from_json(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn topological_order_respects_every_edge(seed in any::<u64>()) {
        let net = random_network(seed, 6, 2);
        let pos: Vec<usize> = {
            let mut p = vec![0; net.node_count()];
            for (i, &n) in net.topo_order().iter().enumerate() { p[n] = i; }
            p
        };
        for e in net.edges() {
            let (a, b) = (net.node_index(&e.from).unwrap(), net.node_index(&e.to).unwrap());
            prop_assert!(pos[a] < pos[b]);
        }
    }

    #[test]
    fn posterior_matches_enumeration_and_is_normalized(seed in any::<u64>()) {
        let net = random_network(seed, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let n = net.node_count();
        let query = rng.random_range(0..n);
        let mut evidence = Assignment::new();
        for node in (0..n).filter(|&i| i != query) {
            if rng.random::<bool>() {
                evidence.bind(node, rng.random_range(0..net.node(node).len()));
            }
        }
        match (posterior(&net, query, &evidence), brute_force(&net, query, &evidence)) {
            (Ok(p), Some(want)) => {
                prop_assert!(p.distribution.iter().all(|&x| (0.0..=1.0).contains(&x)));
                prop_assert!((p.distribution.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                for (g, w) in p.distribution.iter().zip(&want) {
                    prop_assert!((g - w).abs() <= 1e-12);
                }
                // repeated queries are bit-identical
                prop_assert_eq!(p.distribution, posterior(&net, query, &evidence).unwrap().distribution);
            }
            (Err(InferenceError::InconsistentEvidence), None) => {}
            (got, want) => prop_assert!(false, "library {got:?}, oracle {want:?}"),
        }
    }

    #[test]
    fn sink_with_bound_parents_returns_row_bitwise(seed in any::<u64>()) {
        let net = random_network(seed, 6, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let sinks: Vec<usize> = (0..net.node_count()).filter(|&i| net.children(i).is_empty()).collect();
        let sink = sinks[rng.random_range(0..sinks.len())];
        let evidence: Assignment = net
            .parents(sink)
            .iter()
            .map(|&p| (p, rng.random_range(0..net.node(p).len())))
            .collect();
        if let Ok(p) = posterior(&net, sink, &evidence) {
            prop_assert_eq!(p.distribution.as_slice(), net.cpt_row(sink, &evidence).unwrap());
        }
    }

    #[test]
    fn joint_posterior_marginalizes_to_posterior(seed in any::<u64>()) {
        let net = random_network(seed, 5, 3);
        if net.node_count() < 3 { return Ok(()); }
        let evidence = Assignment::new().with(0, 0);
        let joint = match joint_posterior(&net, &[1, 2], &evidence) {
            Ok(j) => j,
            Err(_) => return Ok(()),
        };
        let k2 = net.node(2).len();
        let single = posterior(&net, 1, &evidence).unwrap();
        for (s1, want) in single.distribution.iter().enumerate() {
            let got: f64 = (0..k2).map(|s2| joint[s1 * k2 + s2]).sum();
            prop_assert!((got - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn cycles_are_rejected_and_only_cycles() {
    let node = |n: &str| StateSpace::new(n, ["0", "1"]).unwrap();
    let nodes = || vec![node("A"), node("B"), node("C")];
    let chain = Skeleton::new(nodes(), vec![Edge::new("A", "B"), Edge::new("B", "C")]);
    assert!(chain.is_ok());
    let cyc = Skeleton::new(
        nodes(),
        vec![Edge::new("A", "B"), Edge::new("B", "C"), Edge::new("C", "A")],
    );
    assert!(matches!(cyc, Err(NetworkError::CycleDetected(_))));
    let self_loop = Skeleton::new(nodes(), vec![Edge::new("A", "A")]);
    assert!(matches!(self_loop, Err(NetworkError::CycleDetected(_))));
}

#[test]
fn predict_label_breaks_ties_in_state_order() {
    use bnlf::network::{build_network, Cpt};
    let net = build_network(
        vec![StateSpace::new("S", ["negative", "neutral", "positive"]).unwrap()],
        vec![],
        vec![Cpt::prior("S", vec![1.0 / 3.0; 3])],
    )
    .unwrap();
    assert_eq!(predict_label(&net, 0, &Assignment::new()).unwrap(), 0);
}
