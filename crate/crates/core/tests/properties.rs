use std::f64::consts::TAU;
use std::sync::OnceLock;

use proptest::prelude::*;

use antoine::dynamics::{
    chaos_game_sample, coding_point, dilatation_estimate, escape_depth, escape_itinerary,
    inner_step, involution, winding_map, DilatationMap, EscapeOutcome, StepResult,
};
use antoine::geom3::{Rotation3, Similarity3, BOUNDARY_TOL};
use antoine::report_io::TriMesh;
use antoine::{Address, Necklace, Vec3};

fn necklace() -> &'static Necklace {
    static N: OnceLock<Necklace> = OnceLock::new();
    N.get_or_init(|| Necklace::build(38).unwrap())
}

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn digit() -> impl Strategy<Value = usize> {
    1..=38usize
}

fn address(max_len: usize) -> impl Strategy<Value = Address> {
    prop::collection::vec(digit(), 0..=max_len).prop_map(|d| Address::new(d, 38).unwrap())
}

fn word(min: usize, max: usize) -> impl Strategy<Value = Address> {
    prop::collection::vec(digit(), min..=max).prop_map(|d| Address::new(d, 38).unwrap())
}

fn similarity() -> impl Strategy<Value = Similarity3> {
    (0.05..4.0f64, vec3(1.0), -3.0..3.0f64, vec3(2.0)).prop_filter_map(
        "zero axis",
        |(s, axis, angle, shift)| {
            axis.normalized()
                .map(|a| Similarity3::new(s, Rotation3::from_axis_angle(a, angle), shift).unwrap())
        },
    )
}

/// A point of `T0` at fraction `f` of the tube radius.
fn point_in_t0(u: f64, v: f64, f: f64) -> Vec3 {
    let t = necklace().t0();
    let s = t.surface_point(u, v);
    let c = t.core.point_at(u);
    c + (s - c) * f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn similarity_inverse_round_trip(s in similarity(), p in vec3(3.0)) {
        let q = s.inverse().apply(s.apply(p));
        prop_assert!(q.distance(p) <= 1e-12 * (1.0 + p.norm()) * s.scale().max(1.0 / s.scale()));
        prop_assert!(s.apply_inverse(s.apply(p)).distance(p) <= 1e-12 * (1.0 + p.norm()) * s.scale().max(1.0 / s.scale()));
    }

    #[test]
    fn similarity_scales_distances(s in similarity(), p in vec3(3.0), q in vec3(3.0)) {
        let lhs = s.apply(p).distance(s.apply(q));
        let rhs = s.scale() * p.distance(q);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn composition_is_associative(a in similarity(), b in similarity(), c in similarity(), p in vec3(1.0)) {
        let l = a.compose(&b).compose(&c).apply(p);
        let r = a.compose(&b.compose(&c)).apply(p);
        prop_assert!(l.distance(r) <= 1e-11 * (1.0 + l.norm()));
    }

    #[test]
    fn inner_step_conjugates_child_maps(j in digit(), u in 0.0..TAU, v in 0.0..TAU, f in 0.0..0.99f64) {
        let n = necklace();
        let p = n.sim(j).apply(point_in_t0(u, v, f));
        match inner_step(n, p).unwrap() {
            StepResult::MappedTo { point, digit } => {
                prop_assert_eq!(digit, j);
                prop_assert!(n.sim(j).apply(point).distance(p) <= 1e-12 * (1.0 + p.norm()));
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn depth_matches_exhaustive_containment(u in 0.0..TAU, v in 0.0..TAU, f in 0.0..1.2f64) {
        let n = necklace();
        let p = point_in_t0(u, v, f);
        let d = escape_depth(n, p, 3).unwrap().depth().unwrap_or(0);
        let inside_t0 = n.t0().contains(p, BOUNDARY_TOL).is_in();
        let stage1 = (1..=38).any(|j| n.child(j).contains(p, BOUNDARY_TOL).is_in());
        let stage2 = (1..=38).flat_map(|i| (1..=38).map(move |j| (i, j))).any(|(i, j)| {
            n.torus_at(&Address::new(vec![i, j], 38).unwrap()).contains(p, BOUNDARY_TOL).is_in()
        });
        prop_assert_eq!(escape_depth(n, p, 3).unwrap() != EscapeOutcome::Exterior, inside_t0);
        prop_assert_eq!(inside_t0 && d >= 1, stage1);
        prop_assert_eq!(inside_t0 && d >= 2, stage2);
    }

    #[test]
    fn itinerary_prefixes_contain_the_point(a in word(1, 12), u in 0.0..TAU, v in 0.0..TAU, f in 0.0..0.9f64) {
        let n = necklace();
        let p = n.similarity_of(&a).apply(point_in_t0(u, v, f));
        let (o, it) = escape_itinerary(n, p, 12).unwrap();
        prop_assert!(o.depth().unwrap() >= a.len());
        for k in 0..=it.len() {
            prop_assert!(n.torus_at(&it.prefix(k)).contains(p, BOUNDARY_TOL).is_in());
        }
    }

    #[test]
    fn return_map_expands_uniformly(w in word(1, 2), u1 in 0.0..TAU, u2 in 0.0..TAU) {
        let n = necklace();
        prop_assume!((u1 - u2).abs() > 0.2);
        let ww = w.concat(&w);
        let s = n.similarity_of(&ww);
        let (x, y) = (s.apply(point_in_t0(u1, 0.3, 0.5)), s.apply(point_in_t0(u2, 1.1, 0.2)));
        let step = |mut q: Vec3| {
            for _ in 0..w.len() {
                match inner_step(n, q).unwrap() {
                    StepResult::MappedTo { point, .. } => q = point,
                    other => panic!("{other:?}"),
                }
            }
            q
        };
        let ratio = step(x).distance(step(y)) / x.distance(y);
        let expected = (38.0f64 / 4.0).powi(w.len() as i32);
        prop_assert!((ratio / expected - 1.0).abs() <= 1e-10, "{} vs {}", ratio, expected);
    }

    #[test]
    fn coding_points_border_the_escaping_set(
        a in address(4),
        tail in word(1, 3),
        dirs in prop::collection::vec((0.0..TAU, -1.0..1.0f64), 64),
    ) {
        let n = necklace();
        let x = coding_point(n, &a, &tail).unwrap();
        prop_assert!(escape_depth(n, x, 60).unwrap().survived());
        for eps in [1e-2, 1e-3, 1e-4] {
            let found = dirs.iter().any(|&(phi, z)| {
                let d = Vec3::from_cylindrical((1.0 - z * z).sqrt(), phi, z);
                !escape_depth(n, x + d * eps, 40).unwrap().survived()
            });
            prop_assert!(found, "no escaping point within {}", eps);
        }
    }

    #[test]
    fn composed_inner_steps_are_conformal(a in word(1, 4), tail in word(1, 2)) {
        let n = necklace();
        let x = coding_point(n, &a, &tail).unwrap();
        let d = dilatation_estimate(&DilatationMap::InnerSteps(n.similarity_of(&a)), x, None).unwrap();
        prop_assert!((d.k_outer - 1.0).abs() <= 1e-6 && (d.k_inner - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn winding_is_rho_invariant(r in 0.05..2.0f64, theta in 0.0..TAU, z in -1.0..1.0f64) {
        let n = necklace();
        let p = Vec3::from_cylindrical(r, theta, z);
        let a = winding_map(n.rho().apply(p), 38);
        let b = winding_map(p, 38);
        prop_assert!(a.distance(b) <= 1e-12 * (1.0 + r));
    }

    #[test]
    fn winding_commutes_with_involution(p in vec3(2.0), m in (5..60usize).prop_map(|k| 2 * k)) {
        let a = winding_map(involution(p), m);
        let b = involution(winding_map(p, m));
        prop_assert!(a.distance(b) <= 1e-12 * (1.0 + p.norm()));
    }

    #[test]
    fn torus_meshes_are_closed(nu in 8..40usize, nv in 8..40usize, a in address(2)) {
        let t = TriMesh::torus(&necklace().torus_at(&a), nu, nv);
        prop_assert!(t.is_watertight());
        prop_assert_eq!(t.euler_characteristic(), 0);
        prop_assert!(t.signed_volume() > 0.0);
    }
}

#[test]
fn chaos_samples_do_not_depend_on_count() {
    let n = necklace();
    let short = chaos_game_sample(n, 50, 10, 3).unwrap();
    let long = chaos_game_sample(n, 500, 10, 3).unwrap();
    assert_eq!(short[..], long[..50]);
}

#[test]
fn periodic_itinerary_matches_containment_at_depth_twelve() {
    let n = necklace();
    let w = Address::new(vec![5, 9, 33], 38).unwrap();
    let x = coding_point(n, &Address::root(), &w).unwrap();
    let (_, it) = escape_itinerary(n, x, 12).unwrap();
    let expected: Vec<usize> = w.digits().iter().cycle().take(12).copied().collect();
    assert_eq!(it.digits(), &expected[..]);
}
