mod common;

use std::f64::consts::PI;

use common::refined;
use matchstick::symmetry::{detect_symmetries, is_automorphism, symmetrize};
use matchstick::{apply_isometry, Isometry, Point2};
use proptest::prelude::*;

const TOL: f64 = 1e-6;

#[test]
fn group_table() {
    let expect = [
        ("fig01a_kite", "D_1"),
        ("fig01b_double_kite", "D_1"),
        ("fig01c_reverse_double_kite", "C_2"),
        ("fig01d_triplet_kite", "D_1"),
        ("fig02_harborth", "D_2"),
        ("fig03", "D_2"),
        ("fig04", "D_3"),
        ("fig05_v1", "D_12"),
        ("fig05_v2", "D_6"),
        ("fig06_triplet_kite_geometry", "D_1"),
        ("fig07", "D_1"),
        ("fig08", "D_3"),
        ("fig09_v1", "C_2"),
        ("fig09_v2", "C_2"),
        ("fig09_v3", "D_1"),
        ("fig09_v4", "C_1"),
        ("fig10", "D_1"),
        ("fig16_v1", "C_2"),
        ("fig16_v2", "C_2"),
        ("fig16_v3", "C_2"),
        ("fig16_v4", "C_1"),
        ("fig17_v5", "C_1"),
        ("fig17_v6", "C_1"),
        ("fig17_v7", "D_1"),
        ("fig18_v1", "C_1"),
        ("fig18_v2", "C_1"),
        ("fig18_v3", "D_1"),
        ("fig18_v4", "D_1"),
        ("fig19", "C_2"),
        ("fig20", "D_2"),
        ("fig21", "C_2"),
    ];
    for (id, class) in expect {
        let (g, emb) = refined(id);
        let grp = detect_symmetries(&g, &emb, TOL);
        assert_eq!(grp.classification, class, "{id}");
    }
}

#[test]
fn fig20_mirrors_are_perpendicular() {
    let (g, emb) = refined("fig20");
    let grp = detect_symmetries(&g, &emb, TOL);
    assert_eq!(grp.mirror_axes.len(), 2);
    assert!(((grp.mirror_axes[1] - grp.mirror_axes[0]).abs() - PI / 2.0).abs() < 1e-9);
}

#[test]
fn fig5_v1_rotations() {
    let (g, emb) = refined("fig05_v1");
    let c = emb.centroid();
    assert!(is_automorphism(&g, &emb, &Isometry::rotation(c, 2.0 * PI / 12.0), TOL));
    assert!(!is_automorphism(&g, &emb, &Isometry::rotation(c, 2.0 * PI / 5.0), TOL));
}

#[test]
fn generators_have_the_right_order() {
    for id in ["fig04", "fig05_v1", "fig05_v2", "fig08"] {
        let (g, emb) = refined(id);
        let grp = detect_symmetries(&g, &emb, TOL);
        let rot = grp.generators[0];
        let mut cur = emb.clone();
        for _ in 0..grp.rotation_order {
            cur = apply_isometry(&rot, &cur);
        }
        assert!(cur.max_displacement(&emb) <= 1e-9, "{id}");
        for iso in grp.elements() {
            assert!(is_automorphism(&g, &emb, &iso, TOL), "{id}");
        }
    }
}

#[test]
fn patch_symmetrizes_to_twelve_fold() {
    let (g, emb) = refined("fig22a");
    assert_eq!(detect_symmetries(&g, &emb, TOL).rotation_order, 1);
    let (out, rep) = symmetrize(&g, &emb, 1e-3).unwrap();
    assert_eq!(rep.group.classification, "D_12");
    assert!(rep.max_abs_length_deviation <= 1e-12);
    assert!(rep.displacement_max < 2e-3);
    assert_eq!(detect_symmetries(&g, &out, TOL).classification, "D_12");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn group_is_isometry_invariant(
        angle in -PI..PI,
        dx in -10.0f64..10.0,
        dy in -10.0f64..10.0,
        mirror in any::<bool>(),
        pick in 0usize..4,
    ) {
        let id = ["fig04", "fig07", "fig19", "fig05_v2"][pick];
        let (g, emb) = refined(id);
        let base = detect_symmetries(&g, &emb, TOL);
        let mut iso = Isometry::rotation(Point2::new(1.0, 2.0), angle).then_translate(Point2::new(dx, dy));
        if mirror {
            iso = Isometry::reflection(Point2::ORIGIN, angle).compose(&iso);
        }
        let moved = detect_symmetries(&g, &apply_isometry(&iso, &emb), TOL);
        prop_assert_eq!(base.classification, moved.classification);
    }
}
