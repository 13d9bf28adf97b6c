use smallqg::cyclo::{make_context, CycloNum};
use smallqg::hmodel::Algebra;
use smallqg::linalg::Mat;
use smallqg::repcore::*;

#[test]
fn projectives_have_dimension_2n() {
    for n in [3u32, 5] {
        let ctx = make_context(n).unwrap();
        let alg = Algebra::new(&ctx);
        for l in 1..n {
            let p = projective(&alg, l).unwrap();
            assert_eq!(p.dim(), 2 * n as usize);
            assert!(validate(&p).is_empty(), "P_{} at n = {}", l, n);
            assert_eq!(block_index(&p).unwrap(), BlockIndex::Block(0));
        }
    }
}

#[test]
fn regular_submodules_are_modules() {
    let ctx = make_context(3).unwrap();
    let alg = Algebra::new(&ctx);
    for i in 1..3 {
        for j in 1..=3 {
            let m = regular_submodule(&alg, i, j).unwrap();
            assert_eq!(m.dim(), 9);
            assert!(validate(&m).is_empty());
            assert_eq!(block_index(&m).unwrap(), BlockIndex::Block(i));
        }
    }
}

#[test]
fn tensor_products_are_modules() {
    let ctx = make_context(3).unwrap();
    let alg = Algebra::new(&ctx);
    let mods = vec![
        simple_v(&ctx, 2).unwrap(),
        simple_v(&ctx, 3).unwrap(),
        block_simple_v(&ctx, 1, 0).unwrap(),
        block_simple_v(&ctx, 2, 1).unwrap(),
        projective(&alg, 1).unwrap(),
    ];
    for a in &mods {
        for b in &mods {
            let t = tensor(a, b).unwrap();
            assert!(validate(&t).is_empty(), "{:?} x {:?}: {:?}", a.label(), b.label(), validate(&t));
        }
    }
}

#[test]
fn action_is_multiplicative() {
    let ctx = make_context(3).unwrap();
    let alg = Algebra::new(&ctx);
    let m = regular_submodule(&alg, 1, 2).unwrap();
    let x = alg.add(&alg.monomial(1, 2, 3, CycloNum::from_int(&ctx, 2)), &alg.k(1));
    let y = alg.add(&alg.monomial(2, 1, 5, CycloNum::one(&ctx)), &alg.f());
    let lhs = m.act(&alg.mul(&x, &y));
    let rhs = m.act(&x).mul(&m.act(&y));
    assert_eq!(lhs, rhs);
    assert_eq!(m.act(&alg.one()), Mat::identity(&ctx, 9));
}
