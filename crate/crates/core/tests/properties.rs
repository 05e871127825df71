mod common;

use std::sync::OnceLock;

use common::{load, random_solved_system};
use num_bigint::BigUint;
use prolong::algebra::{Field, Poly, Scalar};
use prolong::bounds::{chain_bound, max_antichain_size, thm_s_bound, ChainSpec, HeightRule};
use prolong::deriv_index::{enumerate_upto, is_antichain, DerivIndex, MultiIndex};
use prolong::dsl::{parse_system, serialize_system};
use prolong::forms::ExteriorElement;
use prolong::prolongation::{saturate, DerivationTable, SaturateOptions};
use prolong::tower::Tower;
use prolong::verdict::SystemSpec;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

type Terms = Vec<(i8, [u8; 3])>;

fn small_poly(field: Field, vars: &[DerivIndex], terms: &Terms) -> Poly {
    let mut p = Poly::zero(field);
    for (c, exps) in terms {
        let mut t = Poly::from_i64(field, *c as i64);
        for (v, e) in vars.iter().zip(exps) {
            t = t.mul(&Poly::var(field, v.clone()).pow(*e as u32 % 3));
        }
        p = p.add(&t);
    }
    p
}

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((-4i8..=4, any::<[u8; 3]>()), 0..4)
}

fn base_vars() -> Vec<DerivIndex> {
    vec![
        DerivIndex::from_entries(&[0, 0], 0),
        DerivIndex::from_entries(&[1, 0], 0),
        DerivIndex::from_entries(&[0, 1], 0),
    ]
}

/// `my_ex_n2` saturated to height 4 with its derivation table.
fn saturated() -> &'static (Tower, DerivationTable) {
    static CELL: OnceLock<(Tower, DerivationTable)> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = load("my_ex_n2");
        let sat = saturate(&spec.pres, 4, &SaturateOptions::default()).expect("saturates");
        let table = sat.table().expect("table");
        (sat.tower, table)
    })
}

/// Slots of height at most 2 of the saturated tower.
fn low_vars() -> Vec<DerivIndex> {
    vec![
        DerivIndex::from_entries(&[0, 0], 0),
        DerivIndex::from_entries(&[0, 1], 0),
        DerivIndex::from_entries(&[1, 1], 0),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_identities(a in terms(), b in terms(), c in terms(), p in prop::sample::select(vec![0u64, 2, 3, 7])) {
        let field = Field::with_characteristic(p).unwrap();
        let vars = base_vars();
        let (a, b, c) = (small_poly(field, &vars, &a), small_poly(field, &vars, &b), small_poly(field, &vars, &c));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert!(a.sub(&a).is_zero());
        for v in &vars {
            let lhs = a.mul(&b).partial_derivative(v);
            let rhs = a.partial_derivative(v).mul(&b).add(&a.mul(&b.partial_derivative(v)));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn leibniz_on_the_table(a in terms(), b in terms(), i in 0usize..2) {
        let (tower, table) = saturated();
        let f = tower.field();
        let (a, b) = (small_poly(f, &low_vars(), &a), small_poly(f, &low_vars(), &b));
        let da = table.derive_poly(tower, &a, i).unwrap();
        let db = table.derive_poly(tower, &b, i).unwrap();
        let dab = table.derive_poly(tower, &a.mul(&b), i).unwrap();
        let na = tower.nf_poly(&a).unwrap();
        let nb = tower.nf_poly(&b).unwrap();
        let rhs = tower.try_add(&tower.try_mul(&da, &nb).unwrap(), &tower.try_mul(&na, &db).unwrap()).unwrap();
        prop_assert_eq!(dab, rhs);
    }

    #[test]
    fn normalized_elements_are_canonical(a in terms(), b in terms(), c in terms()) {
        let tower = Tower::new(Field::Rational, 2, 1, 1);
        let vars = base_vars();
        let (a, b, c) = (small_poly(Field::Rational, &vars, &a), small_poly(Field::Rational, &vars, &b), small_poly(Field::Rational, &vars, &c));
        prop_assume!(!b.is_zero() && !c.is_zero());
        let plain = tower.elem(a.clone(), b.clone()).unwrap();
        let padded = tower.elem(a.mul(&c), b.mul(&c)).unwrap();
        prop_assert_eq!(&plain, &padded);
        prop_assert!(plain.den().leading_scalar().is_one());
    }

    #[test]
    fn nf_is_a_ring_map(a in terms(), b in terms()) {
        let (tower, _) = saturated();
        let f = tower.field();
        let vars = [
            DerivIndex::from_entries(&[0, 3], 0),
            DerivIndex::from_entries(&[2, 1], 0),
            DerivIndex::from_entries(&[1, 1], 0),
        ];
        let (a, b) = (small_poly(f, &vars, &a), small_poly(f, &vars, &b));
        let (na, nb) = (tower.nf_poly(&a).unwrap(), tower.nf_poly(&b).unwrap());
        prop_assert_eq!(tower.nf_poly(&a.add(&b)).unwrap(), tower.try_add(&na, &nb).unwrap());
        prop_assert_eq!(tower.nf_poly(&a.mul(&b)).unwrap(), tower.try_mul(&na, &nb).unwrap());
    }

    #[test]
    fn ranking_is_translation_invariant(
        s in prop::collection::vec(0u32..5, 3),
        t in prop::collection::vec(0u32..5, 3),
        r in prop::collection::vec(0u32..5, 3),
        k in 0usize..2,
        l in 0usize..2,
    ) {
        let a = DerivIndex::from_entries(&s, k);
        let b = DerivIndex::from_entries(&t, l);
        let shift = MultiIndex::new(r);
        prop_assert_eq!(a.cmp(&b), a.shift(&shift).unwrap().cmp(&b.shift(&shift).unwrap()));
        if a.below(&b).unwrap() {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn join_height_is_subadditive(s in prop::collection::vec(0u32..6, 3), t in prop::collection::vec(0u32..6, 3)) {
        let (p, q) = (MultiIndex::new(s), MultiIndex::new(t));
        let j = p.join(&q).unwrap();
        prop_assert!(j.height() <= p.height() + q.height());
        prop_assert!(p.below(&j).unwrap() && q.below(&j).unwrap());
    }

    #[test]
    fn wedge_is_alternating_and_bilinear(x in terms(), y in terms(), z in terms()) {
        let (tower, _) = saturated();
        let f = tower.field();
        let one_form = |t: &Terms, shift: usize| {
            let c0 = tower.nf_poly(&small_poly(f, &low_vars(), t)).unwrap();
            let c1 = tower.nf_poly(&small_poly(f, &low_vars()[shift..], t)).unwrap();
            ExteriorElement::dt(tower, 0).scale(tower, &c0).unwrap()
                .add(tower, &ExteriorElement::dt(tower, 1).scale(tower, &c1).unwrap()).unwrap()
        };
        let (a, b, c) = (one_form(&x, 1), one_form(&y, 2), one_form(&z, 0));
        let ab = a.wedge(tower, &b).unwrap();
        let ba = b.wedge(tower, &a).unwrap();
        prop_assert!(ab.add(tower, &ba).unwrap().is_zero());
        prop_assert!(a.wedge(tower, &a).unwrap().is_zero());
        let lhs = a.add(tower, &b).unwrap().wedge(tower, &c).unwrap();
        let rhs = a.wedge(tower, &c).unwrap().add(tower, &b.wedge(tower, &c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>(), m in 1usize..=3, n in 1usize..=2) {
        let mut rng = StdRng::seed_from_u64(seed);
        let pres = random_solved_system(&mut rng, m, n, 3);
        let names = (0..n).map(|k| format!("u{k}")).collect();
        let spec = SystemSpec { pres, names };
        let text = serialize_system(&spec);
        let back = parse_system(&text).unwrap();
        prop_assert_eq!(&back.pres, &spec.pres);
        prop_assert_eq!(serialize_system(&back), text);
    }

    #[test]
    fn antichains_fit_the_bound(m in 1usize..=3, n in 1usize..=2, cap in 0u32..=3, picks in prop::collection::vec(any::<prop::sample::Index>(), 0..12)) {
        let grid = enumerate_upto(m, n, cap).unwrap();
        let mut chosen: Vec<DerivIndex> = Vec::new();
        for p in picks {
            let c = p.get(&grid).clone();
            if chosen.iter().all(|x| !x.below(&c).unwrap() && !c.below(x).unwrap()) {
                chosen.push(c);
            }
        }
        prop_assert!(is_antichain(chosen.iter()));
        prop_assert!(chosen.len() <= max_antichain_size(m, n, cap).unwrap());
        for k in 0..n {
            prop_assert!(chosen.iter().filter(|v| v.unknown == k).count() <= max_antichain_size(m, 1, cap).unwrap());
        }
    }

    #[test]
    fn bounds_grow_with_the_rule(m in 1usize..=2, n in 1usize..=2, a in 1u64..=3) {
        let low = chain_bound(&ChainSpec::new(m, n, HeightRule::Constant(a)).unwrap());
        let high = chain_bound(&ChainSpec::new(m, n, HeightRule::Constant(a + 1)).unwrap());
        if let (Ok(low), Ok(high)) = (low, high) {
            prop_assert!(low <= high);
        }
    }

    #[test]
    fn s_dominates_r(m in 1usize..=2, r in 1u64..=3) {
        if let Ok(b) = thm_s_bound(m, 1, r) {
            prop_assert!(b.s >= BigUint::from(r));
            prop_assert!(b.t >= BigUint::from(1u32));
        }
    }
}

#[test]
fn antichain_bound_splits_by_unknown() {
    for m in 1..=3 {
        for cap in 0..=3 {
            let one = max_antichain_size(m, 1, cap).unwrap();
            assert_eq!(max_antichain_size(m, 2, cap).unwrap(), 2 * one);
        }
    }
}

#[test]
fn scalars_respect_the_characteristic() {
    let f = Field::with_characteristic(5).unwrap();
    assert!(Scalar::from_i64(f, 10).is_zero());
    assert!(Scalar::from_i64(f, 3).mul(&Scalar::from_i64(f, 2)).is_one());
}
