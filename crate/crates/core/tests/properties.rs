mod common;

use proptest::prelude::*;
use subtrack_core::dataset::{self, BrushAction, PointTags};
use subtrack_core::labels::{self, LabelPlacement};
use subtrack_core::navigation::{self, DragEvent, MouseButton};
use subtrack_core::projection::{self, ProjectionBasis};
use subtrack_core::quality::{self, QualityMetric};
use subtrack_core::trail::{self, SavedView, Thumbnail};
use subtrack_core::{aco, linalg, subspace, Rotation3};

fn saved(id: u64, state: &subtrack_core::TrackballState) -> SavedView {
    SavedView {
        view_id: id,
        basis: state.basis.clone(),
        rotation: state.rotation,
        zoom: state.zoom,
        name: String::new(),
        thumbnail: Thumbnail::default(),
        created_at: 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn navigation_keeps_frame_orthonormal(seed in any::<u64>(), n in 3usize..14, steps in 1usize..60) {
        let mut rng = common::rng(seed);
        let mut s = common::random_state(&mut rng, n);
        for _ in 0..steps {
            s = common::random_op(&s, &mut rng);
            prop_assert!(s.rotation.orthogonality_error() < 1e-9);
        }
        prop_assert!(common::frame_error(&s) <= 1e-6);
    }

    #[test]
    fn rotation_is_isometric_in_3d(seed in any::<u64>(), n in 3usize..10) {
        let mut rng = common::rng(seed);
        let pts = common::gaussian_points(&mut rng, 40, n);
        let s = common::random_state(&mut rng, n);
        let r = projection::rotate(&s, &common::random_rotation(&mut rng));
        let (a, b) = (projection::project(&s, &pts), projection::project(&r, &pts));
        let d3 = |c: &subtrack_core::ProjectedCloud, i: usize, j: usize| {
            ((c.xy[i][0] - c.xy[j][0]).powi(2) + (c.xy[i][1] - c.xy[j][1]).powi(2) + (c.z[i] - c.z[j]).powi(2)).sqrt()
        };
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                prop_assert!((d3(&a, i, j) - d3(&b, i, j)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn drag_rotation_is_proper(fx in -1.5f64..1.5, fy in -1.5f64..1.5, tx in -1.5f64..1.5, ty in -1.5f64..1.5) {
        let r = navigation::drag_to_rotation(&DragEvent::new([fx, fy], [tx, ty], MouseButton::Left));
        prop_assert!(r.orthogonality_error() < 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_removal_keeps_spacing(
        raw in prop::collection::vec((0.0f64..360.0, 0.01f64..1.0), 1..60),
        max in 1usize..40,
    ) {
        let ps: Vec<LabelPlacement> = raw
            .iter()
            .enumerate()
            .map(|(dim, &(angle, strength))| LabelPlacement {
                dim, angle, strength, display_angle: angle, visible: true, font_size: 10.0, opacity: 1.0,
            })
            .collect();
        let out = labels::resolve_overlaps(&ps, max, &[]);
        for (a, b) in ps.iter().zip(&out) {
            prop_assert_eq!(a.angle, b.angle);
        }
        let mut vis: Vec<f64> = out.iter().filter(|p| p.visible).map(|p| p.display_angle).collect();
        prop_assert!(!vis.is_empty() && vis.len() <= max);
        vis.sort_by(f64::total_cmp);
        if vis.len() > 1 {
            for i in 0..vis.len() {
                let (a, b) = if i + 1 < vis.len() { (vis[i], vis[i + 1]) } else { (vis[i], vis[0] + 360.0) };
                let need = labels::required_spacing(labels::gamma_of(b));
                prop_assert!(b - a >= need - 1e-9, "gap {} -> {} needs {}", a, b, need);
            }
        }
    }

    #[test]
    fn brush_deactivate_reactivate_restores(n in 1usize..50, picks in prop::collection::vec(any::<prop::sample::Index>(), 0..20), color in 1u8..8) {
        let tags = PointTags::new(n);
        let ids: Vec<usize> = picks.iter().map(|i| i.index(n)).collect();
        let off = dataset::brush(&tags, &(0..n).collect::<Vec<_>>(), BrushAction::Deactivate).unwrap();
        let on = dataset::brush(&off, &(0..n).collect::<Vec<_>>(), BrushAction::Reactivate).unwrap();
        prop_assert_eq!(&on, &tags);
        let painted = dataset::brush(&tags, &ids, BrushAction::Color { color }).unwrap();
        for i in 0..n {
            prop_assert_eq!(painted.color[i] == color, ids.contains(&i));
        }
    }

    #[test]
    fn interpolation_frames_orthonormal(seed in any::<u64>(), n in 3usize..12, t in 0.0f64..=1.0) {
        let mut rng = common::rng(seed);
        let a = saved(0, &common::random_state(&mut rng, n));
        let b = saved(1, &projection::rotate(&common::random_state(&mut rng, n), &common::random_rotation(&mut rng)));
        let f = trail::interpolate(&a, &b, t).unwrap();
        prop_assert!(f.basis.orthonormality_error() <= 1e-8);
        let g = trail::interpolate(&b, &a, 1.0 - t).unwrap();
        let ang = linalg::principal_angles(&[f.basis.ppa_x.clone(), f.basis.ppa_y.clone()], &[g.basis.ppa_x.clone(), g.basis.ppa_y.clone()]);
        prop_assert!(ang.iter().all(|&x| x < 1e-7), "{:?}", ang);
    }

    #[test]
    fn weight_vector_ignores_in_subspace_rotation(seed in any::<u64>(), n in 3usize..12) {
        let mut rng = common::rng(seed);
        let s = common::random_state(&mut rng, n);
        let r = projection::rotate(&s, &common::random_rotation(&mut rng));
        let (w0, w1) = (trail::view_weight_vector(&saved(0, &s)), trail::view_weight_vector(&saved(1, &r)));
        for (a, b) in w0.iter().zip(&w1) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn aco_levels_symmetric(l in 2usize..40) {
        let v = aco::level_values(l);
        prop_assert_eq!(v.len(), l);
        prop_assert_eq!(v[0], -1.0);
        prop_assert_eq!(v[l - 1], 1.0);
        for i in 0..l {
            prop_assert_eq!(v[i], -v[l - 1 - i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inactive_points_do_not_influence_statistics(seed in any::<u64>(), keep_frac in 0.3f64..0.9) {
        let mut rng = common::rng(seed);
        let n = 6;
        let pts = common::gaussian_points(&mut rng, 60, n);
        let labels: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let cut = (60.0 * keep_frac) as usize;
        let ids: Vec<usize> = (0..cut).collect();
        let subset: Vec<Vec<f64>> = pts[..cut].to_vec();
        // PCA through the subspace module sees only the active rows
        let via_ids = subspace::kmeans_subspaces(&pts, &ids, 1, 0).unwrap();
        let direct = linalg::pca(&subset, 3).unwrap();
        let a = &via_ids[0].basis;
        for (u, v) in [(&a.ppa_x, &direct.components[0]), (&a.ppa_y, &direct.components[1])] {
            prop_assert!((linalg::dot(u, v).abs() - 1.0).abs() < 1e-9);
        }
        // scores of the id subset equal scores of the cut-down data
        let s = common::random_state(&mut rng, n);
        for m in [QualityMetric::DistanceConsistency, QualityMetric::Holes, QualityMetric::ClassSeparation] {
            let with_ids = quality::score(&m, &projection::project_ids(&s, &pts, &ids), &pts, Some(&labels)).unwrap();
            let alone = quality::score(&m, &projection::project(&s, &subset), &subset, Some(&labels[..cut])).unwrap();
            prop_assert!((with_ids - alone).abs() < 1e-12, "{}: {} vs {}", m.name(), with_ids, alone);
        }
    }

    #[test]
    fn equal_express_gives_equal_maximal_columns(seed in any::<u64>(), n in 3usize..10, m in 2usize..5) {
        let mut rng = common::rng(seed);
        let s = common::random_state(&mut rng, n);
        let dims: Vec<usize> = (0..m.min(n)).collect();
        if let Ok(out) = projection::equal_express(&s, &dims) {
            let b = out.baked_basis();
            let len = |k: usize| { let (x, y) = b.column(k); x.hypot(y) };
            let l0 = len(dims[0]);
            for &d in &dims {
                prop_assert!((len(d) - l0).abs() <= 1e-6);
            }
            for k in 0..n {
                prop_assert!(len(k) <= l0 + 1e-6);
            }
            prop_assert!(b.orthonormality_error() < 1e-9);
        }
    }
}

#[test]
fn identity_rotation_bake_is_noop() {
    let b = ProjectionBasis::axis_aligned(5);
    let s = subtrack_core::TrackballState::new(b.clone());
    assert_eq!(projection::bake_rotation(&s).basis, b);
    assert!(Rotation3::identity().is_identity());
}
