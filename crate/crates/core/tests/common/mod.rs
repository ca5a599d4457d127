#![allow(dead_code)]

use matchstick::figures::figure;
use matchstick::ingest::{ingest_tikz, Ingested};
use matchstick::refiner::{refine, RefineOptions};
use matchstick::{Embedding, Graph, Point2, ToleranceProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ingested(id: &str) -> Ingested {
    let fig = figure(id).unwrap_or_else(|| panic!("unknown figure {id}"));
    ingest_tikz(fig.tikz, &ToleranceProfile::default()).unwrap()
}

/// Ingest and refine with default options.
pub fn refined(id: &str) -> (Graph, Embedding) {
    let ing = ingested(id);
    let (emb, rep) = refine(&ing.graph, &ing.embedding, &RefineOptions::default()).unwrap();
    assert!(rep.converged, "{id} did not converge");
    (ing.graph, emb)
}

pub fn square() -> (Graph, Embedding) {
    let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
    let emb = Embedding::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ])
    .unwrap();
    (g, emb)
}

/// Sorted pairwise distances: a fingerprint of shape up to isometry.
pub fn distance_profile(emb: &Embedding) -> Vec<f64> {
    let p = emb.positions();
    let mut d = Vec::with_capacity(p.len() * p.len() / 2);
    for i in 0..p.len() {
        for j in 0..i {
            d.push(matchstick::distance(p[i], p[j]));
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random geometric graph with 2..=30 vertices: a path plus ~20% of the
/// remaining pairs, at arbitrary (non-unit) positions.
pub fn random_graph(seed: u64) -> (Graph, Embedding) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=30);
    let pts: Vec<Point2> = (0..n)
        .map(|_| Point2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || rng.gen_bool(0.2) {
                edges.push((i, j));
            }
        }
    }
    (Graph::new(n, edges).unwrap(), Embedding::new(pts).unwrap())
}
