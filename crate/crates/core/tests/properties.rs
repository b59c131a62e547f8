use std::collections::BTreeSet;

use proptest::prelude::*;

use dirgeom::checks::{check_sum_criterion, Outcome};
use dirgeom::geometry::{direction_set, direction_set_by_projection, is_line};
use dirgeom::{AffineTransform, Direction, PointSet, Polynomial, PrimeModulus, ValueTable};

const PRIMES: [u64; 6] = [3, 5, 7, 11, 13, 101];

fn m(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).unwrap()
}

fn value_table() -> impl Strategy<Value = (u64, Vec<u64>)> {
    prop::sample::select(&PRIMES[..])
        .prop_flat_map(|p| (Just(p), prop::collection::vec(0..p, p as usize)))
}

fn polynomial() -> impl Strategy<Value = (u64, Vec<u64>)> {
    prop::sample::select(&PRIMES[..]).prop_flat_map(|p| {
        (1..=p as usize).prop_flat_map(move |len| (Just(p), prop::collection::vec(0..p, len)))
    })
}

fn point_set() -> impl Strategy<Value = (u64, Vec<usize>)> {
    prop::sample::select(&[3u64, 5, 7, 11, 13][..]).prop_flat_map(|p| {
        let n = (p * p) as usize;
        (Just(p), prop::collection::btree_set(0..n, 2..=n.min(20)))
            .prop_map(|(p, s)| (p, s.into_iter().collect()))
    })
}

fn transform(p: u64) -> impl Strategy<Value = AffineTransform> {
    (prop::array::uniform4(0..p), prop::array::uniform2(0..p))
        .prop_filter_map("singular", move |(lin, tr)| {
            AffineTransform::new(m(p), lin, tr).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn interpolate_then_evaluate((p, vals) in value_table()) {
        let pm = m(p);
        let g = Polynomial::interpolate(&ValueTable::new(pm, &vals).unwrap());
        let back: Vec<u64> = g.values().raw().iter().map(|&v| v as u64).collect();
        prop_assert_eq!(back, vals);
        prop_assert!(g.degree().is_none_or(|d| d < p as usize));
    }

    #[test]
    fn evaluate_then_interpolate((p, coeffs) in polynomial()) {
        let g = Polynomial::from_coeffs(m(p), &coeffs);
        prop_assert_eq!(Polynomial::interpolate(&g.values()), g);
    }

    #[test]
    fn substitution_is_a_group_action(
        (p, coeffs) in polynomial(),
        a1 in 1u64..1000, b1 in 0u64..1000, a2 in 1u64..1000, b2 in 0u64..1000,
    ) {
        let pm = m(p);
        let (a1, a2) = (1 + a1 % (p - 1), 1 + a2 % (p - 1));
        let (b1, b2) = (b1 % p, b2 % p);
        let g = Polynomial::from_coeffs(pm, &coeffs);
        let e = |v| pm.element(v);
        let two = g.substitute_affine(e(a1), e(b1)).unwrap().substitute_affine(e(a2), e(b2)).unwrap();
        let one = g.substitute_affine(e(a1 * a2 % p), e((a1 * b2 + b1) % p)).unwrap();
        prop_assert_eq!(&two, &one);

        // x -> a^-1 (x - b) undoes x -> a x + b
        let ai = pm.element(a1).inverse().unwrap();
        let back = g
            .substitute_affine(e(a1), e(b1))
            .unwrap()
            .substitute_affine(ai, -(ai * e(b1)))
            .unwrap();
        prop_assert_eq!(back, g.clone());
        prop_assert_eq!(g.substitute_affine(e(a1), e(b1)).unwrap().degree(), g.degree());
    }

    #[test]
    fn direction_algorithms_agree((p, cells) in point_set()) {
        let h = PointSet::from_cells(m(p), &cells);
        let by_pairs = direction_set(&h).unwrap();
        prop_assert_eq!(&by_pairs, &direction_set_by_projection(&h).unwrap());
        prop_assert_eq!(by_pairs.len() == 1, is_line(&h));
    }

    #[test]
    fn direction_set_is_affine_invariant(
        (p, cells, t) in point_set().prop_flat_map(|(p, c)| (Just(p), Just(c), transform(p)))
    ) {
        let h = PointSet::from_cells(m(p), &cells);
        let image = t.apply(&h).unwrap();
        prop_assert_eq!(image.len(), h.len());
        let mapped: BTreeSet<Direction> =
            direction_set(&h).unwrap().into_iter().map(|c| t.map_direction(c)).collect();
        prop_assert_eq!(mapped, direction_set(&image).unwrap());
        prop_assert_eq!(t.inverse().apply(&image).unwrap(), h);
    }

    #[test]
    fn multiplicity_at_most_degree((p, coeffs) in polynomial(), c in 0u64..1000) {
        let pm = m(p);
        let g = Polynomial::from_coeffs(pm, &coeffs);
        let mult = g.value_multiplicity(pm.element(c % p));
        match g.degree() {
            Some(d) if d > 0 => prop_assert!(mult <= d),
            _ => {}
        }
    }

    #[test]
    fn sum_criterion_holds((p, coeffs) in polynomial()) {
        let g = Polynomial::from_coeffs(m(p), &coeffs);
        prop_assert_eq!(check_sum_criterion(&g).outcome(), Outcome::Pass);
    }
}

#[test]
fn round_trip_exhaustive_p3() {
    let p = m(3);
    for i in 0..27u64 {
        let vals = [i / 9, i / 3 % 3, i % 3];
        let g = Polynomial::interpolate(&ValueTable::new(p, &vals).unwrap());
        let back: Vec<u64> = g.values().raw().iter().map(|&v| v as u64).collect();
        assert_eq!(back, vals);
    }
}

#[test]
fn sum_criterion_exhaustive_p5() {
    let p = m(5);
    let mut zero_sum = 0;
    for i in 0..3125u64 {
        let vals: Vec<u64> = (0..5).map(|k| i / 5u64.pow(k) % 5).collect();
        let g = Polynomial::interpolate(&ValueTable::new(p, &vals).unwrap());
        let sum_zero = vals.iter().sum::<u64>() % 5 == 0;
        assert_eq!(sum_zero, g.degree().is_none_or(|d| d < 4), "{vals:?}");
        zero_sum += u32::from(sum_zero);
    }
    // the sums are equidistributed mod 5
    assert_eq!(zero_sum, 625);
}
