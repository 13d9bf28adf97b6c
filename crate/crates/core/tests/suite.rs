use smallqg::cyclo::make_context;
use smallqg::homalg::Engine;
use smallqg::linalg::Mat;
use smallqg::repcore::{tensor, IndecompLabel, Representation, Sign};
use smallqg::verify::{associator_matrix, intertwines, run_suite, Fault, Status, Suite, SuiteConfig};

fn config(suites: &[Suite]) -> SuiteConfig {
    let mut cfg = SuiteConfig::new(3).unwrap();
    cfg.suites = suites.to_vec();
    cfg
}

#[test]
fn even_or_tiny_n_is_rejected() {
    assert!(SuiteConfig::new(4).is_err());
    assert!(SuiteConfig::new(1).is_err());
    let mut cfg = SuiteConfig::new(3).unwrap();
    cfg.s_max = 0;
    assert!(run_suite(&cfg).is_err());
}

#[test]
fn corrupted_constructor_is_caught() {
    let mut cfg = config(&[Suite::Modules]);
    cfg.fault = Some(Fault::CorruptSimple);
    let rep = run_suite(&cfg).unwrap();
    let failed: Vec<_> = rep.records.iter().filter(|r| r.status == Status::Fail).collect();
    assert!(!failed.is_empty());
    let ctor = failed.iter().find(|r| r.id == "modules.constructors").expect("constructor check fails");
    assert_eq!(ctor.params["label"], "Simple(2)");
    assert!(ctor.counterexample.is_some());
    assert!(failed.iter().all(|r| r.counterexample.is_some()));
    assert_eq!(rep.exit_code(), 1);
}

#[test]
fn algebra_suite_passes_and_is_reproducible() {
    let cfg = config(&[Suite::Algebra]);
    let a = run_suite(&cfg).unwrap();
    assert_eq!(a.exit_code(), 0, "{}", a.to_jsonl());
    assert!(a.records.iter().all(|r| !r.anchor.is_empty()));
    let b = run_suite(&cfg).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    let summary = a.to_jsonl().lines().last().unwrap().to_string();
    assert!(summary.starts_with("{\"summary\""));
}

fn weighted(engine: &Engine, l: IndecompLabel) -> Representation {
    engine.build(&l).unwrap().weight_form().unwrap().0
}

#[test]
fn associator_is_needed_and_not_its_inverse() {
    // Φ must do real work: for some triple the identity map is not a module map,
    // and Φ⁻¹ in place of Φ fails somewhere as well.
    let ctx = make_context(3).unwrap();
    let engine = Engine::new(&ctx, 1);
    let pool = [
        IndecompLabel::Simple(2),
        IndecompLabel::BlockSimple(1, 0),
        IndecompLabel::BlockSimple(2, 1),
        IndecompLabel::Syzygy(Sign::Plus, 1, 1),
    ];
    let (mut identity_fails, mut inverse_fails) = (false, false);
    for a in &pool {
        for b in &pool {
            for c in &pool {
                let (ma, mb, mc) = (weighted(&engine, a.clone()), weighted(&engine, b.clone()), weighted(&engine, c.clone()));
                let left = tensor(&tensor(&ma, &mb).unwrap(), &mc).unwrap();
                let right = tensor(&ma, &tensor(&mb, &mc).unwrap()).unwrap();
                let phi = associator_matrix(&ma, &mb, &mc).unwrap();
                assert!(intertwines(&phi, &left, &right), "{} {} {}", a, b, c);
                identity_fails |= !intertwines(&Mat::identity(&ctx, left.dim()), &left, &right);
                inverse_fails |= !intertwines(&phi.inverse().unwrap(), &left, &right);
            }
        }
    }
    assert!(identity_fails);
    assert!(inverse_fails);
}
