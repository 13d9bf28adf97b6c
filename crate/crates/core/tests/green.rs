use smallqg::greenring::{default_etas, GreenRing};

fn failures(lines: &[smallqg::greenring::CheckLine]) -> Vec<String> {
    lines
        .iter()
        .filter(|l| !l.passed)
        .map(|l| format!("{} {} {}", l.id, l.params, l.detail))
        .collect()
}

#[test]
fn presentations_hold() {
    for n in [3, 5, 7] {
        let ring = GreenRing::new(n).unwrap();
        let lines = ring.check_presentations(3, &default_etas()[..3], 7);
        let bad = failures(&lines);
        assert!(bad.is_empty(), "n = {}: {:#?}", n, bad);
    }
}

#[test]
fn lemma_identities_hold() {
    for n in [3, 5, 7, 9] {
        let ring = GreenRing::new(n).unwrap();
        let lines = ring.check_lemmas(3, &default_etas()[..2]);
        let bad = failures(&lines);
        assert!(bad.is_empty(), "n = {}: {:#?}", n, bad);
    }
}


#[test]
fn ring_products_match_decompositions() {
    use smallqg::cyclo::make_context;
    use smallqg::homalg::Engine;
    for (n, samples) in [(3u32, 24usize), (5, 8)] {
        let ring = GreenRing::new(n).unwrap();
        let engine = Engine::new(&make_context(n).unwrap(), 11);
        let entries = ring.crosscheck_with_engine(&engine, samples, 11).unwrap();
        let bad: Vec<_> = entries.iter().filter(|e| !e.agrees()).map(|e| e.to_json()).collect();
        assert!(bad.is_empty(), "n = {}: {:#?}", n, bad);
        assert!(entries.len() >= 30 || n > 3);
    }
}
