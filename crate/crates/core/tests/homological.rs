use smallqg::cyclo::make_context;
use smallqg::homalg::*;
use smallqg::repcore::*;

fn claim(items: &[&str]) -> Claim {
    let labels: Vec<IndecompLabel> = items.iter().map(|s| s.parse().unwrap()).collect();
    claim_from_list(&labels)
}

#[test]
fn syzygy_dimensions_at_n3() {
    let ctx = make_context(3).unwrap();
    let eng = Engine::new(&ctx, 11);
    for l in 1..3u32 {
        for s in 1..=4u32 {
            for sign in [Sign::Plus, Sign::Minus] {
                let lab = IndecompLabel::Syzygy(sign, s, l);
                let m = eng.build(&lab).unwrap();
                let expect = if s % 2 == 1 { 3 * s + 3 - l } else { 3 * s + l } as usize;
                assert_eq!(m.dim(), expect, "{}", lab);
                assert!(validate(&m).is_empty());
            }
        }
    }
}

#[test]
fn syzygy_inverse_round_trip() {
    let ctx = make_context(3).unwrap();
    let eng = Engine::new(&ctx, 5);
    for l in 1..3u32 {
        let om = eng.build(&IndecompLabel::Syzygy(Sign::Plus, 1, l)).unwrap();
        let back = syzygy(&eng, &om, Sign::Minus, 1, "t").unwrap();
        let c = claim_from_list(&[IndecompLabel::Simple(l)]);
        assert!(matches!(verify_claim(&eng, &back, &c, "rt").unwrap(), ClaimOutcome::Verified(_)));
    }
}

#[test]
fn socle_and_top_of_projectives() {
    let ctx = make_context(3).unwrap();
    let eng = Engine::new(&ctx, 5);
    for l in 1..3u32 {
        let p = eng.build(&IndecompLabel::Proj(l)).unwrap();
        let soc = socle(&eng, &p).unwrap();
        assert_eq!(soc.module.dim(), l as usize);
        let (t, c) = top(&eng, &p).unwrap();
        assert_eq!(t.dim(), l as usize);
        assert_eq!(c, claim_from_list(&[IndecompLabel::Simple(l)]));
        let v = eng.build(&IndecompLabel::Simple(l)).unwrap();
        assert_eq!(radical(&eng, &v).unwrap().module.dim(), 0);
    }
}

#[test]
fn peeling() {
    let ctx = make_context(3).unwrap();
    let eng = Engine::new(&ctx, 9);
    let v2 = eng.build(&IndecompLabel::Simple(2)).unwrap();
    let v3 = eng.build(&IndecompLabel::Simple(3)).unwrap();
    let t = tensor(&v2, &v3).unwrap();
    let p = peel_projectives(&eng, &t).unwrap();
    assert_eq!(p.projective, claim(&["Proj(2)"]));
    assert_eq!(p.stable.dim(), 0);

    let a = eng.build(&IndecompLabel::Syzygy(Sign::Plus, 1, 1)).unwrap();
    let b = eng.build(&IndecompLabel::Syzygy(Sign::Minus, 1, 1)).unwrap();
    let t = tensor(&a, &b).unwrap();
    let p = peel_projectives(&eng, &t).unwrap();
    assert_eq!(p.stable.dim(), 1);
    let d = decompose(&eng, &t).unwrap();
    assert!(d.unidentified.is_none());
    assert_eq!(d.summands.get(&IndecompLabel::Simple(1)), Some(&1));
}

#[test]
fn tensor_claims_at_n3() {
    let ctx = make_context(3).unwrap();
    let eng = Engine::new(&ctx, 3);
    let v2 = eng.build(&IndecompLabel::Simple(2)).unwrap();
    let v10 = eng.build(&IndecompLabel::BlockSimple(1, 0)).unwrap();
    let v20 = eng.build(&IndecompLabel::BlockSimple(2, 0)).unwrap();
    let cases = vec![
        (tensor(&v2, &v10).unwrap(), claim(&["BlockSimple(1,1)", "BlockSimple(1,2)"])),
        (tensor(&v10, &v10).unwrap(), claim(&["BlockSimple(2,0)", "BlockSimple(2,1)", "BlockSimple(2,2)"])),
        (tensor(&v10, &v20).unwrap(), claim(&["Proj(2)", "Simple(3)"])),
    ];
    for (i, (m, c)) in cases.iter().enumerate() {
        let out = verify_claim(&eng, m, c, &format!("case{}", i)).unwrap();
        assert!(matches!(out, ClaimOutcome::Verified(_)), "case {}", i);
    }
    let wrong = claim(&["BlockSimple(1,0)", "BlockSimple(1,2)"]);
    assert!(matches!(verify_claim(&eng, &cases[0].0, &wrong, "w").unwrap(), ClaimOutcome::Refuted(_)));
}
