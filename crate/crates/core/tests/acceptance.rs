//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every search runs under a pinned budget; a criterion fails if its wall-clock
//! limit is exceeded even when the answer is right.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zerosum::certify::{Certifier, ResultCache, Status, Theorem};
use zerosum::constructions::{eta_witness, s_witness};
use zerosum::invariants::{is_free, FreenessKind, InvariantKind, SearchBudget};
use zerosum::lemma_lab::{falsify, FalsifyStatus, LemmaCertificate, LemmaId, Mode};
use zerosum::{GroupSpec, ReachTable, Sequence};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Box<dyn FnOnce(&mut Certifier) -> Outcome>);
type LemmaRun = (LemmaId, Vec<(&'static str, u64)>, Mode);

const MINUTE: u64 = 60;

fn budget_secs(secs: u64) -> SearchBudget {
    SearchBudget { max_seconds: Some(secs), ..SearchBudget::default() }
}

fn g(f: &[u64]) -> GroupSpec {
    GroupSpec::new(f).expect("valid group")
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(started: Instant, limit_secs: u64, what: &str) -> Result<(), String> {
    let t = started.elapsed();
    if t > Duration::from_secs(limit_secs) {
        return Err(format!("{what} took {:.1}s, limit {limit_secs}s", t.as_secs_f64()));
    }
    Ok(())
}

/// Certifies one value and requires one of the accepted statuses.
fn value(
    cf: &mut Certifier,
    f: &[u64],
    kind: InvariantKind,
    expected: u64,
    accept: &[Status],
    limit_secs: u64,
) -> Result<Status, String> {
    let started = Instant::now();
    let c = cf.certify_value(&g(f), kind, expected).map_err(err)?;
    within(started, limit_secs, &format!("{}({f:?})", kind.name()))?;
    c.validate().map_err(err)?;
    if !accept.contains(&c.status) {
        return Err(format!("{}({f:?}) = {expected}: status {} ({:?})", kind.name(), c.status.name(), c.notes));
    }
    if c.status == Status::VerifiedWitnessOnly {
        let ev = &c.evidence.values[kind.name()];
        if ev.witness.is_none() || ev.value != expected {
            return Err(format!("{}({f:?}): witness-only without a matching witness", kind.name()));
        }
    }
    Ok(c.status)
}

fn lemma_clean(c: &LemmaCertificate, label: &str) -> Result<(), String> {
    if c.status != FalsifyStatus::NoCounterexample || c.counterexamples != 0 {
        return Err(format!("{label}: {:?}, {} counterexamples, first {:?}", c.status, c.counterexamples, c.counterexample));
    }
    Ok(())
}

fn params(p: &[(&str, u64)]) -> BTreeMap<String, u64> {
    p.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

const EXH: &[Status] = &[Status::VerifiedExhaustive];

fn c1(cf: &mut Certifier) -> Outcome {
    cf.budget = budget_secs(MINUTE);
    for n in 1..=8u64 {
        let f: Vec<u64> = if n == 1 { vec![] } else { vec![n] };
        value(cf, &f, InvariantKind::Davenport, n, EXH, MINUTE)?;
        value(cf, &f, InvariantKind::Eta, n, EXH, MINUTE)?;
        value(cf, &f, InvariantKind::Egz, 2 * n - 1, EXH, MINUTE)?;
    }
    Ok("D = eta = n, s = 2n-1 for n in 1..=8".into())
}

fn c2(cf: &mut Certifier) -> Outcome {
    cf.budget = budget_secs(10 * MINUTE);
    let mut shown = Vec::new();
    for (n1, n2) in [(2u64, 2u64), (2, 4), (3, 3), (2, 6)] {
        let started = Instant::now();
        let c = cf.theorem(Theorem::A { n1, n2 }).map_err(err)?;
        within(started, 10 * MINUTE, &format!("Theorem A ({n1},{n2})"))?;
        c.validate().map_err(err)?;
        if c.status != Status::VerifiedExhaustive {
            return Err(format!("({n1},{n2}): {} {:?}", c.status.name(), c.notes));
        }
        let v = |k: &str| c.evidence.values[k].value;
        if (v("D"), v("eta"), v("s")) != (n1 + n2 - 1, 2 * n1 + n2 - 2, 2 * n1 + 2 * n2 - 3) {
            return Err(format!("({n1},{n2}): values {} {} {}", v("D"), v("eta"), v("s")));
        }
        shown.push(format!("({n1},{n2}): D={} eta={} s={}", v("D"), v("eta"), v("s")));
    }
    Ok(shown.join("; "))
}

fn c3(cf: &mut Certifier) -> Outcome {
    cf.budget = budget_secs(10 * MINUTE);
    for r in 1..=3usize {
        let f = vec![2u64; r];
        let order = 1u64 << r;
        value(cf, &f, InvariantKind::Eta, order, EXH, 10 * MINUTE)?;
        value(cf, &f, InvariantKind::Egz, order + 1, EXH, 10 * MINUTE)?;
    }
    cf.budget = SearchBudget { max_nodes: Some(1_000_000_000), ..SearchBudget::default() };
    let accept = [Status::VerifiedExhaustive, Status::VerifiedWitnessOnly];
    let f = [2u64; 4];
    let a = value(cf, &f, InvariantKind::Eta, 16, &accept, u64::MAX)?;
    let b = value(cf, &f, InvariantKind::Egz, 17, &accept, u64::MAX)?;
    Ok(format!("r <= 3 exhaustive; r = 4 under 1e9 nodes: eta=16 {}, s=17 {}", a.name(), b.name()))
}

fn c4(cf: &mut Certifier) -> Outcome {
    cf.budget = budget_secs(30 * MINUTE);
    value(cf, &[2, 2, 4], InvariantKind::Eta, 8, EXH, 30 * MINUTE)?;
    value(cf, &[2, 2, 4], InvariantKind::Egz, 11, EXH, 30 * MINUTE)?;
    Ok("eta(C2^2+C4)=8, s(C2^2+C4)=11".into())
}

fn c5(cf: &mut Certifier) -> Outcome {
    cf.budget = budget_secs(120 * MINUTE);
    value(cf, &[2, 2, 6], InvariantKind::Eta, 10, EXH, 120 * MINUTE)?;
    cf.budget = budget_secs(60 * MINUTE);
    let w = s_witness(3, 3).map_err(err)?;
    if w.len() != 14 || !is_free(&w, FreenessKind::ExpLengthZeroSum) {
        return Err("s lower witness for C2^2+C6 rejected".into());
    }
    let st = value(
        cf,
        &[2, 2, 6],
        InvariantKind::Egz,
        15,
        &[Status::VerifiedExhaustive, Status::VerifiedWitnessOnly],
        60 * MINUTE,
    )?;
    Ok(format!("eta(C2^2+C6)=10 exhaustive; s(C2^2+C6)=15 {}", st.name()))
}

fn c6(cf: &mut Certifier) -> Outcome {
    cf.budget = budget_secs(240 * MINUTE);
    let w = eta_witness(4, 2).map_err(err)?;
    if w.len() != 9 || !is_free(&w, FreenessKind::ShortZeroSum) {
        return Err("eta lower witness for C2^3+C4 rejected".into());
    }
    let st = value(
        cf,
        &[2, 2, 2, 4],
        InvariantKind::Eta,
        10,
        &[Status::VerifiedExhaustive, Status::VerifiedWitnessOnly],
        240 * MINUTE,
    )?;
    Ok(format!("eta(C2^3+C4)=10 {}", st.name()))
}

fn c7(cf: &mut Certifier) -> Outcome {
    let started = Instant::now();
    let mut checked = 0;
    for r in 1..=5usize {
        for n in 1..=50u64 {
            let e = eta_witness(r, n).map_err(err)?;
            let s = s_witness(r, n).map_err(err)?;
            if e.len() as u64 != 2 * n + 2 * r as u64 - 3 || s.len() as u64 != 4 * n + 2 * r as u64 - 4 {
                return Err(format!("r={r}, n={n}: lengths {} {}", e.len(), s.len()));
            }
            if !is_free(&e, FreenessKind::ShortZeroSum) || !is_free(&s, FreenessKind::ExpLengthZeroSum) {
                return Err(format!("r={r}, n={n}: oracle rejects a witness"));
            }
            checked += 2;
        }
    }
    cf.budget = budget_secs(MINUTE);
    let c = cf.theorem(Theorem::Th1_2 { n: 36 }).map_err(err)?;
    c.validate().map_err(err)?;
    if c.evidence.values["s"].value != 149 || c.status != Status::VerifiedWitnessOnly {
        return Err(format!("Th1.2 n=36: {} s={}", c.status.name(), c.evidence.values["s"].value));
    }
    if !c.notes.iter().any(|n| n.contains("not desk-reproducible")) {
        return Err("Th1.2 certificate does not state the upper-bound limitation".into());
    }
    within(started, 5 * MINUTE, "witness sweep")?;
    Ok(format!("{checked} witnesses pass the oracle; s(C2^3+C72) >= 149, upper bound noted as not desk-reproducible"))
}

fn c8(cf: &mut Certifier) -> Outcome {
    cf.budget = budget_secs(120 * MINUTE);
    let c = cf.theorem(Theorem::Th2 { r: 3, n: 3 }).map_err(err)?;
    c.validate().map_err(err)?;
    let bound = c.evidence.facts["upper_bound"].as_u64();
    match c.status {
        Status::VerifiedExhaustive if c.evidence.values["s"].value == 15 && bound == Some(15) => {
            Ok("s(C2^2+C6) = 15 = 4n+2^3-5, bound tight".into())
        }
        Status::VerifiedWitnessOnly => Ok(format!("witness s >= {} and bound {bound:?} recorded", c.evidence.facts["lower_bound"])),
        s => Err(format!("{} {:?}", s.name(), c.evidence.facts)),
    }
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn c9() -> Outcome {
    let started = Instant::now();
    let c = falsify(LemmaId::Sum, &BTreeMap::new(), Mode::Exhaustive, 0, &budget_secs(MINUTE)).map_err(err)?;
    within(started, MINUTE, "SUM")?;
    lemma_clean(&c, "SUM")?;
    let expected: u64 = (9..=15).map(|k| binom(15, k) * k).sum();
    if c.instances != expected {
        return Err(format!("SUM examined {} (W, w) pairs, expected {expected}", c.instances));
    }
    Ok(format!("{} (W, w) pairs, 0 failures", c.instances))
}

fn c10() -> Outcome {
    let started = Instant::now();
    let c = falsify(LemmaId::StarXx1, &params(&[("n", 3), ("samples", 100_000)]), Mode::Random, 2024, &budget_secs(30 * MINUTE))
        .map_err(err)?;
    within(started, 30 * MINUTE, "STAR_XX1")?;
    lemma_clean(&c, "STAR_XX1")?;
    let seqs = c.counters.get("sequences").copied().unwrap_or(0);
    if seqs < 100_000 || c.instances != 2 * seqs {
        return Err(format!("only {seqs} sequences / {} instances examined", c.instances));
    }
    Ok(format!("{seqs} sequences x 2 choices of e, (*) violated on every one"))
}

fn c11() -> Outcome {
    let runs: Vec<LemmaRun> = vec![
        (LemmaId::Cyclic1, vec![("n", 12)], Mode::Exhaustive),
        (LemmaId::Cyclic3, vec![("n", 8)], Mode::Exhaustive),
        (LemmaId::Sho, vec![("samples", 10_000)], Mode::Random),
        (LemmaId::Eimp1, vec![("n", 2), ("samples", 10_000)], Mode::Random),
        (LemmaId::Eimp1, vec![("n", 4), ("samples", 10_000)], Mode::Random),
        (LemmaId::SuppP1, vec![("r", 3), ("n", 3)], Mode::Exhaustive),
        (LemmaId::SuppP1, vec![("r", 3), ("n", 5)], Mode::Exhaustive),
        (LemmaId::SuppP1, vec![("r", 4), ("n", 3), ("samples", 10_000)], Mode::Random),
        (LemmaId::SuppP1, vec![("r", 5), ("n", 3), ("samples", 10_000)], Mode::Random),
    ];
    let mut shown = Vec::new();
    for (id, p, mode) in runs {
        let label = format!("{} {:?} {p:?}", id.name(), mode);
        let c = falsify(id, &params(&p), mode, 7, &budget_secs(30 * MINUTE)).map_err(err)?;
        lemma_clean(&c, &label)?;
        if mode == Mode::Random && c.instances < 10_000 {
            return Err(format!("{label}: only {} instances", c.instances));
        }
        shown.push(format!("{}={}", id.name(), c.instances));
    }
    Ok(format!("0 counterexamples; instances {}", shown.join(" ")))
}

fn brute_reach(s: &[usize], group: &GroupSpec) -> Vec<Vec<bool>> {
    let mut t = vec![vec![false; group.order()]; s.len() + 1];
    for mask in 0u32..(1 << s.len()) {
        let mut sum = 0;
        for (i, &x) in s.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sum = group.add_idx(sum, x);
            }
        }
        t[mask.count_ones() as usize][sum] = true;
    }
    t
}

fn c12(cf: &mut Certifier) -> Outcome {
    // (a) chain and Gao on every group whose invariants are all exact
    cf.budget = budget_secs(10 * MINUTE);
    let groups: Vec<Vec<u64>> = vec![
        vec![], vec![2], vec![3], vec![4], vec![5], vec![6], vec![7], vec![8], vec![2, 2], vec![2, 4],
        vec![3, 3], vec![2, 6], vec![2, 2, 2], vec![2, 2, 4], vec![4, 4], vec![2, 8], vec![3, 6],
        vec![2, 2, 2, 2], vec![2, 2, 6],
    ];
    let mut exact = 0;
    for f in &groups {
        let chain = cf.check_chain(&g(f)).map_err(err)?;
        let gao = cf.check_gao(&g(f)).map_err(err)?;
        if (chain.status, gao.status) != (Status::VerifiedExhaustive, Status::VerifiedExhaustive) {
            return Err(format!("{f:?}: chain {} gao {} {:?}", chain.status.name(), gao.status.name(), chain.evidence.facts));
        }
        exact += 1;
    }

    // (b) reach table against subset enumeration
    let pool: Vec<GroupSpec> = [&[6u64][..], &[2, 4], &[3, 3], &[2, 2, 2], &[2, 2, 4], &[5, 5], &[2, 2, 2, 2, 2], &[7]]
        .iter()
        .map(|f| g(f))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..10_000 {
        let group = &pool[rng.gen_range(0..pool.len())];
        let len = rng.gen_range(0..=12);
        let s: Vec<usize> = (0..len).map(|_| rng.gen_range(0..group.order())).collect();
        let table = ReachTable::build(&Sequence::from_indices(group, &s), None);
        let brute = brute_reach(&s, group);
        for (l, row) in brute.iter().enumerate() {
            for (x, &b) in row.iter().enumerate() {
                if table.get(l, x).map_err(err)? != b {
                    return Err(format!("trial {trial}: reach table differs at length {l}, element {x} for {s:?}"));
                }
            }
        }
    }

    // (c) deterministic reruns
    let det = SearchBudget { deterministic: true, ..SearchBudget::default() };
    let once = || -> Result<(String, String), String> {
        let mut fresh = Certifier::new(det.clone(), 5, None);
        let chain = fresh.check_chain(&g(&[2, 2, 4])).map_err(err)?.without_timing().to_canonical_json();
        let mut lem = falsify(LemmaId::Sho, &params(&[("samples", 2_000)]), Mode::Random, 5, &det).map_err(err)?;
        lem.elapsed_ms = 0;
        Ok((chain, serde_json::to_string(&lem).map_err(err)?))
    };
    if once()? != once()? {
        return Err("deterministic reruns differ".into());
    }
    Ok(format!("chain and Gao hold on {exact} exact groups; 10^4 reach-table checks; reruns byte-identical"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cache = ResultCache::open(dir.path().join("acceptance-cache.json")).expect("cache");
    let mut cf = Certifier::new(SearchBudget::default(), 0, Some(cache));

    let criteria: Vec<Criterion> = vec![
        (1, "cyclic exactness", Box::new(c1)),
        (2, "rank two at desk scale", Box::new(c2)),
        (3, "elementary 2-groups", Box::new(c3)),
        (4, "C2^2+C4 (n=2)", Box::new(c4)),
        (5, "C2^2+C6 (n=3)", Box::new(c5)),
        (6, "C2^3+C4 eta", Box::new(c6)),
        (7, "witness constructions", Box::new(c7)),
        (8, "upper bound consistency at r=3, n=3", Box::new(c8)),
        (9, "SUM exhaustive", Box::new(|_| c9())),
        (10, "(*) falsification for length 9", Box::new(|_| c10())),
        (11, "lemma registry", Box::new(|_| c11())),
        (12, "global properties", Box::new(c12)),
    ];
    let mut failed = 0;
    for (id, title, f) in criteria {
        let started = Instant::now();
        let out = f(&mut cf);
        let secs = started.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS  criterion {id:>2}  {title}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  criterion {id:>2}  {title}: {msg} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
