use proptest::prelude::*;

use smallqg::cyclo::{make_context, root_power, CycloNum};
use smallqg::greenring::{default_etas, GreenElem, GreenRing, Monomial};
use smallqg::hmodel::{Algebra, AlgebraElem, AssociatorTable};
use smallqg::homalg::{hom_space, is_intertwiner, Engine};
use smallqg::repcore::{tensor, validate, IndecompLabel, Sign};

fn green_elem(ring: &GreenRing, basis: &[Monomial], terms: &[(usize, i64)]) -> GreenElem {
    let mut e = GreenElem::zero();
    for &(i, c) in terms {
        e.add_term(basis[i % basis.len()].clone(), c.into());
    }
    let _ = ring;
    e
}

fn terms() -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0usize..1000, -4i64..=4), 1..4)
}

fn pbw(alg: &Algebra, terms: &[(u32, u32, i64, i64)]) -> AlgebraElem {
    let ctx = alg.context();
    let n = alg.n();
    let mut x = alg.zero();
    for &(a, b, c, k) in terms {
        x = alg.add(&x, &alg.monomial(a % n, b % n, c, CycloNum::from_int(ctx, k)));
    }
    x
}

fn pbw_terms() -> impl Strategy<Value = Vec<(u32, u32, i64, i64)>> {
    prop::collection::vec((0u32..5, 0u32..5, -20i64..20, -3i64..=3), 1..3)
}

fn label(n: u32) -> impl Strategy<Value = IndecompLabel> {
    prop_oneof![
        (1..=n).prop_map(IndecompLabel::Simple),
        (1..n, 0..n).prop_map(|(t, r)| IndecompLabel::BlockSimple(t, r)),
        (1..n).prop_map(IndecompLabel::Proj),
        (1..n, any::<bool>()).prop_map(|(l, p)| IndecompLabel::Syzygy(if p { Sign::Plus } else { Sign::Minus }, 1, l)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn green_ring_is_a_commutative_ring(n in prop::sample::select(vec![3u32, 5]), a in terms(), b in terms(), c in terms()) {
        let ring = GreenRing::new(n).unwrap();
        let basis = ring.basis_full(2, &default_etas()[..2]);
        let (a, b, c) = (green_elem(&ring, &basis, &a), green_elem(&ring, &basis, &b), green_elem(&ring, &basis, &c));
        let ab = ring.mul(&a, &b).unwrap();
        prop_assert_eq!(&ab, &ring.mul(&b, &a).unwrap());
        prop_assert_eq!(ring.mul(&ab, &c).unwrap(), ring.mul(&a, &ring.mul(&b, &c).unwrap()).unwrap());
        prop_assert_eq!(ring.mul(&a, &b.add(&c)).unwrap(), ab.add(&ring.mul(&a, &c).unwrap()));
    }

    #[test]
    fn green_normal_forms_are_fixed_and_print_parseably(a in terms()) {
        let ring = GreenRing::new(3).unwrap();
        let basis = ring.basis_full(3, &default_etas()[..3]);
        let a = green_elem(&ring, &basis, &a);
        prop_assert_eq!(&ring.reduce(&a).unwrap(), &a);
        prop_assert_eq!(&ring.parse(&a.to_string()).unwrap(), &a);
        prop_assert_eq!(&GreenElem::from_json(&ring, &a.to_json()).unwrap(), &a);
    }

    #[test]
    fn stable_reduction_is_a_ring_map(a in terms(), b in terms()) {
        let ring = GreenRing::new(3).unwrap();
        let basis = ring.basis_full(2, &default_etas()[..2]);
        let (a, b) = (green_elem(&ring, &basis, &a), green_elem(&ring, &basis, &b));
        let lhs = ring.to_stable(&ring.mul(&a, &b).unwrap()).unwrap();
        let rhs = ring.mul_stable(&ring.to_stable(&a).unwrap(), &ring.to_stable(&b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn algebra_is_associative_with_central_block_idempotents(x in pbw_terms(), y in pbw_terms(), z in pbw_terms(), i in 0u32..3) {
        let ctx = make_context(3).unwrap();
        let alg = Algebra::new(&ctx);
        let (x, y, z) = (pbw(&alg, &x), pbw(&alg, &y), pbw(&alg, &z));
        prop_assert_eq!(alg.mul(&alg.mul(&x, &y), &z), alg.mul(&x, &alg.mul(&y, &z)));
        let e = alg.block_idempotent(i);
        prop_assert_eq!(alg.mul(&e, &x), alg.mul(&x, &e));
    }

    #[test]
    fn cocycle_identity_holds(n in prop::sample::select(vec![5u32, 7]), q in prop::array::uniform4(0u32..49)) {
        let ctx = make_context(n).unwrap();
        let table = AssociatorTable::new(&ctx);
        let m = n * n;
        prop_assert!(table.cocycle_holds(q[0] % m, q[1] % m, q[2] % m, q[3] % m));
    }

    #[test]
    fn zeta_powers_multiply(a in -60i64..60, b in -60i64..60) {
        let ctx = make_context(5).unwrap();
        let prod = root_power(&ctx, a) * root_power(&ctx, b);
        prop_assert_eq!(&prod, &root_power(&ctx, a + b));
        prop_assert!((prod * root_power(&ctx, -a - b)).is_one());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tensor_products_are_modules(a in label(3), b in label(3)) {
        let ctx = make_context(3).unwrap();
        let engine = Engine::new(&ctx, 7);
        let (ma, mb) = (engine.build(&a).unwrap(), engine.build(&b).unwrap());
        let t = tensor(&ma, &mb).unwrap();
        prop_assert_eq!(t.dim(), a.dim(3) * b.dim(3));
        prop_assert!(validate(&t).is_empty());
    }

    #[test]
    fn hom_combinations_intertwine(a in label(3), b in label(3), coeffs in prop::collection::vec(-3i64..=3, 8)) {
        let ctx = make_context(3).unwrap();
        let engine = Engine::new(&ctx, 7);
        let (ma, mb) = (engine.build(&a).unwrap(), engine.build(&b).unwrap());
        let h = hom_space(&ma, &mb).unwrap();
        for t in &h.basis {
            prop_assert!(is_intertwiner(t, &ma, &mb));
        }
        let c: Vec<i64> = coeffs.iter().cycle().take(h.dim()).copied().collect();
        prop_assert!(is_intertwiner(&h.combination(&ctx, &c), &ma, &mb));
    }
}
