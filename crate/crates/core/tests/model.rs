use proptest::prelude::*;
use trikernel::model::{
    direction, group_order, phi_inverse_point, phi_point, phi_transform, preset, validate, GroupOrder, StepSet,
    SYMMETRIC_MODELS,
};
use trikernel::Error;

fn set(names: &[&str]) -> StepSet {
    StepSet::from_names(names).unwrap()
}

#[test]
fn hypothesis_h() {
    assert!(validate(&set(&["N", "S", "E", "W"])).satisfies_h);
    let diag = validate(&set(&["NE", "NW", "SE", "SW"]));
    assert!(diag.has_antidiagonal && !diag.satisfies_h);
    assert!(!validate(&set(&["NE", "W", "E", "SW"])).symmetric);
    for m in SYMMETRIC_MODELS {
        assert!(validate(&preset(m).unwrap()).satisfies_h, "{}", m);
    }
}

#[test]
fn phi_images_match_the_table() {
    let rows: [(&str, &[&str]); 8] = [
        ("simple", &["E", "W", "NE", "SW"]),
        ("kreweras", &["E", "N", "SW"]),
        ("reverse-kreweras", &["S", "W", "NE"]),
        ("double-kreweras", &["E", "NE", "N", "W", "SW", "S"]),
        ("e-ne-n-sw", &["NE", "N", "W", "S"]),
        ("ne-w-sw-s", &["E", "N", "SW", "S"]),
        ("e-n-w-sw-s", &["E", "NE", "W", "SW", "S"]),
        ("e-ne-n-w-s", &["E", "NE", "N", "W", "SW"]),
    ];
    for (m, image) in rows {
        let got = phi_transform(&preset(m).unwrap());
        assert!(got.steps().eq(set(image).steps()), "{}: {}", m, got);
    }
}

#[test]
fn phi_of_diagonal_walk_has_big_steps() {
    let got: Vec<_> = phi_transform(&set(&["NE", "NW", "SE", "SW"])).steps().collect();
    let mut want = vec![(0, 1), (0, -1), (-2, -1), (2, 1)];
    want.sort();
    assert_eq!(got, want);
}

#[test]
fn group_orders() {
    assert_eq!(group_order(&set(&["S", "W", "NE"]), 400).unwrap(), GroupOrder::Finite(6));
    assert_eq!(group_order(&preset("simple").unwrap(), 400).unwrap(), GroupOrder::Finite(4));
    assert_eq!(group_order(&set(&["E", "NE", "N", "SW"]), 400).unwrap(), GroupOrder::Infinite(400));
    assert_eq!(group_order(&preset("union-kreweras").unwrap(), 400).unwrap(), GroupOrder::Finite(6));
}

#[test]
fn degenerate_group() {
    let r = group_order(&set(&["E", "S", "SE"]), 400);
    assert!(matches!(r, Err(Error::DegenerateModel(_))), "{:?}", r);
}

#[test]
fn group_order_is_mirror_invariant() {
    for m in SYMMETRIC_MODELS {
        let s = preset(m).unwrap();
        assert_eq!(group_order(&s, 400).unwrap(), group_order(&s.mirror(), 400).unwrap(), "{}", m);
    }
}

#[test]
fn json_round_trip() {
    let s = preset("e-n-w-sw-s").unwrap();
    let back = StepSet::from_json(&s.to_json()).unwrap();
    assert!(back.steps().eq(s.steps()));
}

#[test]
fn rejects_bad_steps() {
    assert!(StepSet::new([(0, 0)]).is_err());
    assert!(StepSet::new(Vec::<(i32, i32)>::new()).is_err());
    assert!(preset("nope").is_err());
    assert!(direction("XX").is_none());
}

fn step_set() -> impl Strategy<Value = StepSet> {
    let all: Vec<(i32, i32)> =
        (-1..=1).flat_map(|i| (-1..=1).map(move |j| (i, j))).filter(|&s| s != (0, 0)).collect();
    prop::sample::subsequence(all, 1..=8).prop_map(|v| StepSet::new(v).unwrap())
}

proptest! {
    #[test]
    fn validation_is_mirror_invariant(s in step_set()) {
        prop_assert_eq!(validate(&s).satisfies_h, validate(&s.mirror()).satisfies_h);
        let v = validate(&s);
        prop_assert_eq!(v.satisfies_h, v.symmetric && !v.has_antidiagonal);
    }

    #[test]
    fn phi_preserves_size(s in step_set()) {
        prop_assert_eq!(phi_transform(&s).len(), s.len());
    }

    #[test]
    fn phi_points_invert(xr in 0.1f64..3.0, xi in -1.0f64..1.0, yr in 0.1f64..3.0, yi in -1.0f64..1.0) {
        let (x, y) = (num_complex::Complex64::new(xr, xi), num_complex::Complex64::new(yr, yi));
        let (a, b) = phi_inverse_point(x, y);
        let (u, v) = phi_point(a, b);
        prop_assert!((u - x).norm() < 1e-12 && (v - y).norm() < 1e-12);
    }
}
