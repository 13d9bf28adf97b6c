use std::process::ExitCode;
use std::time::Instant;

use smallqg::repcore::{IndecompLabel, Sign};
use smallqg::verify::{run_suite, Record, Status, Suite, SuiteConfig, SuiteReport};

fn run(n: u32, suites: &[Suite]) -> SuiteReport {
    let mut cfg = SuiteConfig::new(n).expect("config");
    cfg.suites = suites.to_vec();
    run_suite(&cfg).expect("suite")
}

fn select<'a>(r: &'a SuiteReport, prefix: &str) -> Vec<&'a Record> {
    r.records.iter().filter(|x| x.id.starts_with(prefix)).collect()
}

/// Every selected record passes; returns (count, first non-pass id).
fn all_pass(recs: &[&Record]) -> (usize, Option<String>) {
    let bad = recs.iter().find(|r| r.status != Status::Pass).map(|r| format!("{} {}", r.id, r.params));
    (recs.len(), bad)
}

struct Line {
    ok: bool,
    detail: String,
}

fn verdict(groups: &[(&str, &[&Record], usize)]) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, recs, min) in groups {
        let (count, bad) = all_pass(recs);
        if count < *min || bad.is_some() {
            ok = false;
        }
        match bad {
            Some(b) => parts.push(format!("{}: {} checks, first failure {}", name, count, b)),
            None if count < *min => parts.push(format!("{}: only {} checks (need {})", name, count, min)),
            None => parts.push(format!("{}: {} pass", name, count)),
        }
    }
    Line { ok, detail: parts.join("; ") }
}

fn tensor(r: &SuiteReport) -> Vec<&Record> {
    r.records.iter().filter(|x| x.id.starts_with("tensor.")).collect()
}

fn green(r: &SuiteReport) -> Vec<&Record> {
    r.records
        .iter()
        .filter(|x| ["green.relation", "green.basis", "green.rank", "green.lemma"].iter().any(|p| x.id.starts_with(p)))
        .collect()
}

fn factors(r: &Record) -> Vec<IndecompLabel> {
    r.params["factors"]
        .as_array()
        .map(|a| a.iter().filter_map(|x| x.as_str()?.parse().ok()).collect())
        .unwrap_or_default()
}

fn crosscheck_kinds(n: u32, recs: &[&Record]) -> Vec<(&'static str, bool)> {
    use IndecompLabel::*;
    let passed: Vec<Vec<IndecompLabel>> = recs.iter().filter(|r| r.status == Status::Pass).map(|r| factors(r)).collect();
    let has = |p: &dyn Fn(&[IndecompLabel]) -> bool| passed.iter().any(|f| p(f));
    let bs_pair = |f: &[IndecompLabel], cmp: fn(u32, u32) -> bool| match f {
        [BlockSimple(t, _), BlockSimple(t2, _)] => cmp(t + t2, n),
        _ => false,
    };
    vec![
        ("y*x_t", has(&|f| matches!(f, [Simple(2), BlockSimple(..)] | [BlockSimple(..), Simple(2)]))),
        ("x_t*x_t' (t+t'<n)", has(&|f| bs_pair(f, |a, b| a < b))),
        ("x_t*x_t' (t+t'=n)", has(&|f| bs_pair(f, |a, b| a == b))),
        ("x_t*x_t' (t+t'>n)", has(&|f| bs_pair(f, |a, b| a > b))),
        ("z+*x_t", has(&|f| matches!(f, [Syzygy(Sign::Plus, 1, 1), BlockSimple(..)]))),
        ("y^k*[V_n]", has(&|f| f.len() >= 2 && f.last() == Some(&Simple(n)) && f[..f.len() - 1].iter().all(|l| *l == Simple(2)))),
    ]
}

fn main() -> ExitCode {
    let start = Instant::now();
    let all = Suite::ALL;
    let r3 = run(3, &all);
    let r5 = run(5, &all);
    let mut lines: Vec<(u32, &str, Line)> = Vec::new();

    let (a3, a5) = (select(&r3, "algebra."), select(&r5, "algebra."));
    lines.push((1, "algebra suite at n = 3, 5", verdict(&[("n=3", &a3, 100), ("n=5", &a5, 100)])));

    let m3: Vec<&Record> = r3.records.iter().filter(|r| r.id.starts_with("modules.") && !r.id.starts_with("modules.associator")).collect();
    let m5: Vec<&Record> = r5.records.iter().filter(|r| r.id.starts_with("modules.") && !r.id.starts_with("modules.associator")).collect();
    let reg5 = select(&r5, "modules.regular.witness");
    lines.push((2, "classification and regular modules at n = 3, 5", verdict(&[("n=3", &m3, 50), ("n=5", &m5, 50), ("n=5 regular witnesses", &reg5, 20)])));

    let (t3, t5) = (tensor(&r3), tensor(&r5));
    let families: Vec<&str> = ["tensor.v2", "tensor.simple_odd", "tensor.simple_even", "tensor.projective", "tensor.syzygy", "tensor.block_pair", "tensor.block_pair_dual"].to_vec();
    let mut tline = verdict(&[("n=3", &t3, 300), ("n=5 sampled", &t5, 50)]);
    for f in &families {
        if !t3.iter().any(|r| r.id == *f) {
            tline.ok = false;
            tline.detail.push_str(&format!("; family {} missing", f));
        }
    }
    lines.push((3, "tensor corpus at n = 3 (exhaustive), n = 5 (sampled)", tline));

    let assoc = select(&r3, "modules.associator");
    let cocycle = select(&r3, "algebra.cocycle");
    lines.push((4, "associator intertwines, cocycle identity at n = 3", verdict(&[("triples", &assoc, 20), ("cocycle", &cocycle, 2)])));

    let (g3, g5) = (green(&r3), green(&r5));
    let (ax3, ax5) = (select(&r3, "green.axioms"), select(&r5, "green.axioms"));
    let (st3, st5) = (select(&r3, "stable.relation"), select(&r5, "stable.relation"));
    let ranks = select(&r3, "green.rank");
    lines.push((
        5,
        "Green ring presentations, ranks, axioms, identities at n = 3, 5",
        verdict(&[("n=3", &g3, 100), ("n=5", &g5, 100), ("axioms n=3", &ax3, 100), ("axioms n=5", &ax5, 100), ("stable n=3", &st3, 1), ("stable n=5", &st5, 1), ("ranks", &ranks, 2)]),
    ));

    let cross = select(&r3, "green.crosscheck");
    let mut cline = verdict(&[("n=3 products", &cross, 30)]);
    for (kind, seen) in crosscheck_kinds(3, &cross) {
        if !seen {
            cline.ok = false;
            cline.detail.push_str(&format!("; no {} instance", kind));
        }
    }
    lines.push((6, "symbolic and constructive products agree", cline));

    let syz = select(&r3, "stable.syzygy");
    let zz = select(&r3, "stable.zz");
    lines.push((7, "syzygy laws at n = 3, s <= 4", verdict(&[("syzygies", &syz, 4 * 2 * 2 + 4), ("peeled product", &zz, 2)])));

    let again = run(3, &all);
    let same = again.to_jsonl() == r3.to_jsonl();
    lines.push((
        8,
        "identical seeds give byte-identical reports",
        Line {
            ok: same,
            detail: format!("{} bytes, {}", r3.to_jsonl().len(), if same { "identical" } else { "different" }),
        },
    ));

    let mut failed = 0;
    for (k, name, l) in &lines {
        println!("criterion {}: {} - {} ({})", k, if l.ok { "PASS" } else { "FAIL" }, name, l.detail);
        failed += !l.ok as usize;
    }
    println!("acceptance: {} of {} criteria pass in {:.1}s", lines.len() - failed, lines.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
