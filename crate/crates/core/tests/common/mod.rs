#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use sheaf_sampling::{SimplicialComplex, Vertex};

/// Random spanning tree on `n` vertices plus each remaining pair with
/// probability `extra`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: f64) -> SimplicialComplex {
    if n == 1 {
        return SimplicialComplex::from_maximal_faces(vec![vec![0]]).unwrap();
    }
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.insert((u, v));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(extra) {
                edges.insert((u, v));
            }
        }
    }
    SimplicialComplex::from_maximal_faces(edges.into_iter().map(|(u, v)| vec![u, v])).unwrap()
}

pub fn random_subset<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<Vertex> {
    (0..n).filter(|_| rng.random_bool(p)).collect()
}

/// Grows a random subset until every vertex is in it or adjacent to it.
pub fn random_dominating_subset<R: Rng>(rng: &mut R, g: &SimplicialComplex, p: f64) -> Vec<Vertex> {
    let mut y: BTreeSet<Vertex> = g.vertices().filter(|_| rng.random_bool(p)).collect();
    for v in g.vertices() {
        if !y.contains(&v) && !g.neighbors(v).iter().any(|w| y.contains(w)) {
            let mut options = g.neighbors(v);
            options.push(v);
            y.insert(options[rng.random_range(0..options.len())]);
        }
    }
    y.into_iter().collect()
}
