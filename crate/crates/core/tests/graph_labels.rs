mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use mvf2vec::cmf::{build_cmf, Cmf};
use mvf2vec::graph::{build_graph, CmfGraph, Direction};
use mvf2vec::grid::triangulate;
use mvf2vec::labels::{Label64, Labeling};
use mvf2vec::rng::SplitMix64;

fn fuzzed(count: u64, seed: u64) -> Vec<Cmf> {
    (0..count)
        .map(|i| {
            let mut rng = SplitMix64::new(seed + i);
            let (cloud, alpha) = common::random_cloud(&mut rng, 12);
            build_cmf(Arc::new(triangulate(&cloud.grid).unwrap()), &cloud, alpha).unwrap()
        })
        .collect()
}

#[test]
fn transpose_is_an_involution() {
    for cmf in fuzzed(100, 5) {
        let g = build_graph(&cmf);
        let t = g.transpose();
        assert_eq!(t.transpose(), g);
        assert_eq!(t.edge_count(), g.edge_count());
        assert!(g.edges().iter().all(|&(a, b)| a != b));
    }
}

#[test]
fn neighborhoods_grow_with_radius() {
    for cmf in fuzzed(60, 9) {
        let g = build_graph(&cmf);
        for v in 0..g.len() {
            for dir in [Direction::Forward, Direction::Backward] {
                let mut prev = g.neighborhood(v, 0, dir);
                assert!(prev.is_empty());
                for r in 1..4 {
                    let next = g.neighborhood(v, r, dir);
                    assert!(prev.is_subset(&next));
                    assert!(!next.contains(&v));
                    prev = next;
                }
            }
        }
    }
}

/// Rebuilds `cmf` with multivector ids shuffled and the graph's adjacency
/// lists reversed; returns the new field and, per old id, the new id.
fn shuffled(cmf: &Cmf, rng: &mut SplitMix64) -> (Cmf, CmfGraph, Vec<usize>) {
    let mut sets: Vec<Vec<usize>> = cmf.multivectors().iter().map(|m| m.simplices.clone()).collect();
    for i in (1..sets.len()).rev() {
        sets.swap(i, rng.below(i + 1));
    }
    let other = Cmf::from_multivectors(cmf.complex_arc().clone(), &sets).unwrap();
    let map: Vec<usize> = cmf.multivectors().iter().map(|m| other.owner(m.simplices[0])).collect();
    let g = build_graph(&other);
    let reversed: Vec<Vec<usize>> = (0..g.len()).map(|v| g.out_neighbors(v).iter().rev().copied().collect()).collect();
    (other, CmfGraph::from_out_adjacency(reversed), map)
}

#[test]
fn labels_ignore_multivector_numbering() {
    let mut rng = SplitMix64::new(3);
    for cmf in fuzzed(40, 21) {
        let g = build_graph(&cmf);
        let (other, g2, map) = shuffled(&cmf, &mut rng);
        for (b, f) in [(0, 0), (1, 1), (2, 1), (3, 3)] {
            let a = Labeling::compute(&cmf, &g, b, f);
            let c = Labeling::compute(&other, &g2, b, f);
            for v in 0..cmf.len() {
                assert_eq!(a.words[v], c.words[map[v]]);
            }
        }
    }
}

#[test]
fn higher_levels_refine_lower_ones() {
    let (mut pairs, mut refined) = (0u64, 0u64);
    for cmf in fuzzed(60, 77) {
        let g = build_graph(&cmf);
        for level in 0..3 {
            let lo = Labeling::compute(&cmf, &g, level, level).words;
            let hi = Labeling::compute(&cmf, &g, level + 1, level + 1).words;
            // Count pairs equal at the higher level; they must be equal below.
            let mut classes: BTreeMap<Label64, Vec<usize>> = BTreeMap::new();
            for (v, w) in hi.iter().enumerate() {
                classes.entry(*w).or_default().push(v);
            }
            for members in classes.values() {
                for (i, &u) in members.iter().enumerate() {
                    for &v in &members[i + 1..] {
                        pairs += 1;
                        refined += u64::from(lo[u] == lo[v]);
                    }
                }
            }
        }
    }
    assert!(pairs > 0);
    assert!(refined as f64 >= 0.999 * pairs as f64, "{refined}/{pairs}");
}

#[test]
fn labels_are_a_pure_function_of_the_field() {
    let cmf = &fuzzed(1, 400)[0];
    let again = Cmf::from_json(&cmf.to_json().unwrap()).unwrap();
    let a = Labeling::compute(cmf, &build_graph(cmf), 2, 2);
    let b = Labeling::compute(&again, &build_graph(&again), 2, 2);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    a.write_csv(&mut x).unwrap();
    b.write_csv(&mut y).unwrap();
    assert_eq!(x, y);
}
