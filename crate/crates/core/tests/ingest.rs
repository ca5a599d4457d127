mod common;

use common::ingested;
use matchstick::figures::FIGURES;
use matchstick::flexer::{monitor_value, Monitor};
use matchstick::ingest::{build_graph, ingest_tikz, normalize_scale, parse_tikz, read_msg, write_msg};
use matchstick::verifier::{check_noncrossing, degree_profile, verify_matchstick, verify_patch};
use matchstick::{apply_isometry, Embedding, Graph, Isometry, Point2, ToleranceProfile};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn expected_counts_for_every_figure() {
    let tol = ToleranceProfile::default();
    for fig in FIGURES {
        let ing = ingest_tikz(fig.tikz, &tol).unwrap_or_else(|e| panic!("{}: {e}", fig.id));
        let (g, emb) = (&ing.graph, &ing.embedding);
        assert_eq!((g.n_vertices(), g.n_edges()), (fig.vertices, fig.edges), "{}", fig.id);
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.n_edges(), "{}", fig.id);
        let (m, n) = fig.profile();
        if fig.patch {
            let rep = verify_patch(g, emb, m, n, &tol, tol.eps_raw).unwrap();
            assert!(rep.overall, "{}: {rep:?}", fig.id);
            continue;
        }
        let cert = verify_matchstick(g, emb, m, n, &tol, tol.eps_raw).unwrap();
        assert!(cert.unit_ok && cert.crossing_ok && cert.connected && cert.separation_ok, "{}", fig.id);
        assert!(cert.degree_profile.counts.keys().all(|d| fig.degrees.contains(d)), "{}", fig.id);
        if let Some(k) = fig.high_degree_count {
            assert_eq!(cert.degree_profile.count(n), k, "{}", fig.id);
        }
    }
}

#[test]
fn msg_round_trip_is_bit_exact() {
    for fig in FIGURES {
        let ing = ingested(fig.id);
        let text = ing.to_msg();
        let doc = read_msg(&text).unwrap();
        assert_eq!(doc.graph, ing.graph, "{}", fig.id);
        assert_eq!(doc.embedding, ing.embedding, "{}", fig.id);
        assert_eq!(write_msg(&doc.graph, &doc.embedding, &doc.names), text);
    }
}

#[test]
fn degree_profiles() {
    let g7 = ingested("fig07").graph;
    let (ok, p) = degree_profile(&g7, 4, 5);
    assert!(ok);
    assert_eq!((p.count(4), p.count(5)), (55, 2));
    let g8 = ingested("fig08").graph;
    assert!(!degree_profile(&g8, 4, 5).0);
    let g9 = ingested("fig09_v1").graph;
    let sevens: Vec<usize> = (0..g9.n_vertices()).filter(|&v| g9.degree(v) == 7).collect();
    assert_eq!(sevens.len(), 2);
    assert!(g9.has_edge(sevens[0], sevens[1]));
}

#[test]
fn perturbed_vertex_fails_unit_check() {
    let tol = ToleranceProfile::default();
    let ing = ingested("fig04");
    let mut pts = ing.embedding.positions().to_vec();
    pts[10].x += 0.1;
    let cert = verify_matchstick(&ing.graph, &Embedding::new(pts).unwrap(), 4, 4, &tol, tol.eps_raw).unwrap();
    assert!(!cert.unit_ok);
    assert!(!cert.overall);
}

#[test]
fn patch_mode() {
    let tol = ToleranceProfile::default();
    let p = ingested("fig22a");
    let rep = verify_patch(&p.graph, &p.embedding, 4, 12, &tol, tol.eps_raw).unwrap();
    assert!(rep.interior_ok);
    assert_eq!(rep.interior_degrees.get(&12), Some(&1));
    assert_eq!(rep.interior_degrees.keys().copied().collect::<Vec<_>>(), vec![4, 12]);
    let h = ingested("fig02_harborth");
    let rep = verify_patch(&h.graph, &h.embedding, 4, 4, &tol, tol.eps_raw).unwrap();
    assert!(rep.boundary.is_empty());
}

#[test]
fn marked_pair_of_the_symmetric_60_vertex_graph() {
    let ing = ingested("fig05_v2");
    let (a, b) = (ing.names["a"], ing.names["b"]);
    let d = monitor_value(&ing.embedding, &Monitor { a, b, target: 2.0 });
    assert!((d - 2.0).abs() < 2e-3, "{d}");
    assert!(ing.marker_vertices.contains(&a) && ing.marker_vertices.contains(&b));
}

#[test]
fn scale_and_split_report() {
    let ing = ingested("fig04");
    assert!((ing.report.scale - 43.770).abs() < 0.01, "{}", ing.report.scale);
    assert!(ing.report.segments_split > 0);
    assert!(ing.report.max_snap_displacement < ToleranceProfile::default().snap_tol);
}

#[test]
fn crossing_drawing_is_rejected() {
    let tol = ToleranceProfile::default();
    let text = r"\draw (0,0) -- (10,10); \draw (0,10) -- (10,0);";
    let ing = ingest_tikz(text, &tol).unwrap();
    assert!(!check_noncrossing(&ing.graph, &ing.embedding, tol.delta_cross).ok);
}

/// Largest distance from a point of `a` to its nearest point of `b`.
fn nearest_match_error(a: &Embedding, b: &Embedding) -> f64 {
    a.positions()
        .iter()
        .map(|&p| {
            b.positions()
                .iter()
                .map(|&q| matchstick::distance(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Edge set expressed through coordinates, for comparing graphs whose
/// vertex ids differ.
fn coordinate_edges(g: &Graph, emb: &Embedding) -> Vec<[(i64, i64); 2]> {
    let key = |p: Point2| ((p.x * 1e6).round() as i64, (p.y * 1e6).round() as i64);
    let mut out: Vec<_> = g
        .edges()
        .iter()
        .map(|&(a, b)| {
            let mut e = [key(emb.get(a)), key(emb.get(b))];
            e.sort();
            e
        })
        .collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn snapping_ignores_segment_order(seed in any::<u64>()) {
        let tol = ToleranceProfile::default();
        let fig = matchstick::figures::figure("fig02_harborth").unwrap();
        let segs = parse_tikz(fig.tikz).unwrap();
        let base = build_graph(&segs, &tol).unwrap();
        let (base_emb, _) = normalize_scale(&base.graph, &base.embedding).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = segs.clone();
        shuffled.segments.shuffle(&mut rng);
        for s in shuffled.segments.iter_mut().step_by(2) {
            std::mem::swap(&mut s.start, &mut s.end);
        }
        let other = build_graph(&shuffled, &tol).unwrap();
        let (other_emb, _) = normalize_scale(&other.graph, &other.embedding).unwrap();

        prop_assert_eq!(other.graph.n_vertices(), base.graph.n_vertices());
        prop_assert_eq!(other.graph.n_edges(), base.graph.n_edges());
        prop_assert!(nearest_match_error(&base_emb, &other_emb) < 1e-12);
        prop_assert_eq!(coordinate_edges(&base.graph, &base_emb), coordinate_edges(&other.graph, &other_emb));
    }

    #[test]
    fn noncrossing_is_isometry_invariant(angle in -3.2f64..3.2, dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let tol = ToleranceProfile::default();
        let ing = ingested("fig10");
        let iso = Isometry::rotation(Point2::new(1.0, 2.0), angle).then_translate(Point2::new(dx, dy));
        let moved = apply_isometry(&iso, &ing.embedding);
        prop_assert!(check_noncrossing(&ing.graph, &moved, tol.delta_cross).ok);
    }

    #[test]
    fn verification_is_relabeling_invariant(seed in any::<u64>()) {
        let tol = ToleranceProfile::default();
        let ing = ingested("fig07");
        let mut perm: Vec<usize> = (0..ing.graph.n_vertices()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let g = ing.graph.relabeled(&perm).unwrap();
        let emb = ing.embedding.relabeled(&perm);
        let a = verify_matchstick(&ing.graph, &ing.embedding, 4, 5, &tol, tol.eps_raw).unwrap();
        let b = verify_matchstick(&g, &emb, 4, 5, &tol, tol.eps_raw).unwrap();
        prop_assert!(a.overall && b.overall);
        prop_assert_eq!(a.degree_profile, b.degree_profile);
    }

    #[test]
    fn crossing_check_ignores_edge_order(seed in any::<u64>()) {
        let tol = ToleranceProfile::default();
        let text = r"\draw (0,0) -- (10,10); \draw (0,10) -- (10,0); \draw (20,0) -- (30,0) -- (25,8) -- (20,0);";
        let ing = ingest_tikz(text, &tol).unwrap();
        let mut edges = ing.graph.edges().to_vec();
        edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let g = Graph::new(ing.graph.n_vertices(), edges).unwrap();
        let a = check_noncrossing(&ing.graph, &ing.embedding, tol.delta_cross);
        let b = check_noncrossing(&g, &ing.embedding, tol.delta_cross);
        prop_assert_eq!(a.violations.len(), b.violations.len());
        prop_assert!(!a.ok && !b.ok);
    }
}
