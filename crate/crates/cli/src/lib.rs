//! Command-line front end for the `zerosum` toolkit.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use zerosum::certify::{etaf_gate, THREADS_ENV};
use zerosum::constructions::{construction_tag, cyclic_extremal, eta_witness, pair_decomposition, s_witness};
use zerosum::invariants::{is_free, FreenessKind};
use zerosum::lemma_lab::{falsify, Mode};
use zerosum::seq::{has_nonempty_zero_sum, parse_list, witness_extract};
use zerosum::{
    doubling_hom, Certificate, Certifier, Error, GroupSpec, Homomorphism, InvariantKind, LemmaId, ResultCache,
    RunConfig, SearchBudget, Sequence, Theorem,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSIFIED: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "zerosum", version, about = "Zero-sum invariants of finite abelian groups")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Worker threads (default: $ZEROSUM_THREADS, else one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Stop each search after this many nodes
    #[arg(long, global = true)]
    budget_nodes: Option<u64>,
    /// Stop each search after this many seconds
    #[arg(long, global = true)]
    budget_secs: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Single worker, reproducible witnesses and counters
    #[arg(long, global = true)]
    deterministic: bool,
    /// Write machine-readable JSON here (`-` for stdout)
    #[arg(long, global = true, value_name = "PATH")]
    json_out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH", default_value = zerosum::certify::DEFAULT_CACHE_PATH)]
    cache: PathBuf,
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute D, eta, s or D* of a group
    Invariant {
        #[arg(long)]
        group: String,
        #[arg(long)]
        kind: String,
    },
    /// Emit an extremal construction
    Witness {
        /// eta, s or cyclic
        #[arg(long)]
        construction: String,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long)]
        n: u64,
    },
    /// Query a sequence file for zero-sum subsequences
    Check {
        #[arg(long, value_name = "FILE")]
        sequence: PathBuf,
        /// Group for flat-text files without a `# group:` line
        #[arg(long)]
        group: Option<String>,
        /// short, nonempty or len=L
        #[arg(long)]
        query: String,
    },
    /// Split a sequence into pairs with zero-sum image
    Decompose {
        #[arg(long, value_name = "FILE")]
        sequence: PathBuf,
        #[arg(long)]
        group: Option<String>,
        /// theta (doubling map) or proj (drop the last factor)
        #[arg(long)]
        hom: String,
    },
    /// Run a falsification campaign against a registered lemma
    Lemma {
        #[arg(long)]
        id: String,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Certify a theorem instance, a single value, or the ETAF gate
    Certify {
        /// thA, th1.1, th1.2, th2 or etaf
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        n1: Option<u64>,
        #[arg(long)]
        n2: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        /// Factors of H for the ETAF gate
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        expected: Option<u64>,
    },
    /// Check D <= eta <= s - exp + 1 <= |G|
    Chain {
        #[arg(long)]
        group: String,
    },
    /// Check eta = s - exp + 1
    Gao {
        #[arg(long)]
        group: String,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(Error::Falsified(_) | Error::Internal(_)) => EXIT_FALSIFIED,
            CliError::Core(_) => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Ctx<'a> {
    config: RunConfig,
    budget: SearchBudget,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn certifier(&self) -> CliResult<Certifier> {
        let cache = match &self.config.cache_path {
            Some(p) => Some(ResultCache::open(p)?),
            None => None,
        };
        Ok(Certifier::new(self.budget.clone(), self.config.seed, cache))
    }

    fn emit_json(&mut self, v: &Value) -> CliResult<()> {
        let Some(path) = &self.config.json_out else {
            return Ok(());
        };
        let mut text = serde_json::to_string_pretty(v).map_err(Error::from)?;
        text.push('\n');
        if path.as_os_str() == "-" {
            self.out.write_all(text.as_bytes())?;
        } else {
            std::fs::write(path, text)?;
        }
        Ok(())
    }

    fn human(&self) -> bool {
        self.config.json_out.as_ref().is_none_or(|p| p.as_os_str() != "-")
    }

    fn certificate(&mut self, c: &Certificate) -> CliResult<i32> {
        if self.human() {
            writeln!(self.out, "{}: {}", c.claim, c.status.name())?;
            for (k, v) in &c.evidence.values {
                let tag = if v.exhaustive { "exact" } else { "lower bound" };
                writeln!(self.out, "  {k}({}) = {} ({tag}, witness: {})", fmt_group(&v.group), v.value, v.witness_source)?;
            }
            for (k, v) in &c.evidence.facts {
                writeln!(self.out, "  {k} = {v}")?;
            }
            for n in &c.notes {
                writeln!(self.out, "  note: {n}")?;
            }
        }
        let v = serde_json::to_value(c).map_err(Error::from)?;
        self.emit_json(&v)?;
        Ok(c.exit_code())
    }
}

fn fmt_group(f: &[u64]) -> String {
    if f.is_empty() {
        return "C_1".into();
    }
    f.iter().map(|x| format!("C_{x}")).collect::<Vec<_>>().join("+")
}

fn group_arg(s: &str) -> CliResult<GroupSpec> {
    let f = parse_list(s).map_err(|e| CliError::Usage(format!("--group: {e}")))?;
    let f: Vec<u64> = f.into_iter().filter(|&x| x != 1).collect();
    GroupSpec::new(&f).map_err(|e| CliError::Usage(format!("--group: {e}")))
}

fn read_sequence(path: &PathBuf, group: Option<&str>) -> CliResult<Sequence> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let g = group.map(group_arg).transpose()?;
    Ok(Sequence::parse(&text, g.as_ref())?)
}

fn need<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

fn timing(started: Instant) -> Value {
    json!({ "elapsed_ms": started.elapsed().as_millis() as u64 })
}

fn cmd_invariant(ctx: &mut Ctx, group: &str, kind: &str) -> CliResult<i32> {
    let started = Instant::now();
    let g = group_arg(group)?;
    let kind = InvariantKind::parse(kind).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut cf = ctx.certifier()?;
    let r = match cf.invariant(&g, kind) {
        Err(Error::SearchLimit(order)) => {
            return Err(CliError::Usage(format!("|G| = {order} is beyond the exhaustive search limit")));
        }
        other => other?,
    };
    if ctx.human() {
        writeln!(ctx.out, "{}", r.value)?;
        let status = if r.exhaustive { "exact" } else { "lower bound (budget exhausted)" };
        writeln!(ctx.out, "{}({}) {status}, nodes {}", kind.name(), fmt_group(g.factors()), r.stats.nodes)?;
        if let Some(w) = &r.witness {
            writeln!(ctx.out, "witness: {w:?}")?;
        }
    }
    let v = json!({
        "group": g.factors(),
        "kind": kind,
        "value": r.value,
        "exhaustive": r.exhaustive,
        "witness": r.witness.as_ref().map(Sequence::to_json),
        "stats": { "nodes": r.stats.nodes, "pruned_free": r.stats.pruned_free, "pruned_canon": r.stats.pruned_canon },
        "tool_version": zerosum::certify::TOOL_VERSION,
        "timing": timing(started),
    });
    ctx.emit_json(&v)?;
    Ok(if r.exhaustive { EXIT_OK } else { EXIT_BUDGET })
}

fn cmd_witness(ctx: &mut Ctx, construction: &str, r: usize, n: u64) -> CliResult<i32> {
    let (s, kind, tag) = match construction {
        "eta" => (eta_witness(r, n)?, FreenessKind::ShortZeroSum, construction_tag("eta_witness", &[("r", r as u64), ("n", n)])),
        "s" => (s_witness(r, n)?, FreenessKind::ExpLengthZeroSum, construction_tag("s_witness", &[("r", r as u64), ("n", n)])),
        "cyclic" => {
            let g = GroupSpec::cyclic(n)?;
            if n < 2 {
                return Err(CliError::Usage("cyclic construction needs --n >= 2".into()));
            }
            let s = cyclic_extremal(n, &g.basis(0), &g.zero())?;
            (s, FreenessKind::ExpLengthZeroSum, construction_tag("cyclic_extremal", &[("n", n)]))
        }
        other => return Err(CliError::Usage(format!("unknown construction {other}; expected eta, s or cyclic"))),
    };
    let ok = is_free(&s, kind);
    let mut j = s.to_json();
    j.construction = Some(tag);
    let v = serde_json::to_value(&j).map_err(Error::from)?;
    if ctx.human() {
        writeln!(ctx.out, "{}", serde_json::to_string(&v).map_err(Error::from)?)?;
        writeln!(ctx.out, "length {}, self-check {}", s.len(), if ok { "passed" } else { "FAILED" })?;
    }
    ctx.emit_json(&v)?;
    Ok(if ok { EXIT_OK } else { EXIT_FALSIFIED })
}

fn cmd_check(ctx: &mut Ctx, path: &PathBuf, group: Option<&str>, query: &str) -> CliResult<i32> {
    let s = read_sequence(path, group)?;
    let g = s.group().clone();
    let lens: Vec<usize> = match query {
        "short" => (1..=(g.exponent() as usize).min(s.len())).collect(),
        "nonempty" => (1..=s.len()).collect(),
        q => match q.strip_prefix("len=").map(str::parse::<usize>) {
            Some(Ok(l)) => vec![l],
            _ => return Err(CliError::Usage(format!("unknown query {q}; expected short, nonempty or len=L"))),
        },
    };
    let mut found = None;
    for l in lens {
        if l > s.len() {
            continue;
        }
        if let Some(w) = witness_extract(&s, &g.zero(), l)? {
            found = Some(w.subsequence);
            break;
        }
    }
    if query == "nonempty" {
        debug_assert_eq!(found.is_some(), has_nonempty_zero_sum(&s));
    }
    if ctx.human() {
        match &found {
            Some(t) => writeln!(ctx.out, "zero-sum subsequence of length {}: {t:?}", t.len())?,
            None => writeln!(ctx.out, "no zero-sum subsequence for query {query}")?,
        }
    }
    let v = json!({
        "query": query,
        "length": s.len(),
        "found": found.is_some(),
        "witness": found.as_ref().map(Sequence::to_json),
    });
    ctx.emit_json(&v)?;
    Ok(EXIT_OK)
}

fn cmd_decompose(ctx: &mut Ctx, path: &PathBuf, group: Option<&str>, hom: &str) -> CliResult<i32> {
    let s = read_sequence(path, group)?;
    let g = s.group().clone();
    let h = match hom {
        "theta" => doubling_hom(&g)?,
        "proj" => {
            let keep: Vec<usize> = (0..g.rank().saturating_sub(1)).collect();
            Homomorphism::projection(&g, &keep)?
        }
        other => return Err(CliError::Usage(format!("unknown hom {other}; expected theta or proj"))),
    };
    let d = pair_decomposition(&s, &h)?;
    if ctx.human() {
        writeln!(ctx.out, "{} pairs, remainder of length {}", d.pairs.len(), d.rest.len())?;
        for p in &d.pairs {
            writeln!(ctx.out, "  {p:?}")?;
        }
        writeln!(ctx.out, "  rest: {:?}", d.rest)?;
    }
    let v = json!({
        "hom": hom,
        "pairs": d.pairs.iter().map(Sequence::to_json).collect::<Vec<_>>(),
        "rest": d.rest.to_json(),
    });
    ctx.emit_json(&v)?;
    Ok(EXIT_OK)
}

fn cmd_lemma(ctx: &mut Ctx, id: &str, mode: &str, params: BTreeMap<String, u64>) -> CliResult<i32> {
    let lemma = LemmaId::parse(id).map_err(|e| CliError::Usage(e.to_string()))?;
    let mode = Mode::parse(mode).map_err(|e| CliError::Usage(e.to_string()))?;
    let cert = falsify(lemma, &params, mode, ctx.config.seed, &ctx.budget).map_err(|e| match e {
        Error::Precondition(m) | Error::Parse(m) => CliError::Usage(m),
        other => CliError::Core(other),
    })?;
    if ctx.human() {
        let v = serde_json::to_value(cert.status).map_err(Error::from)?;
        writeln!(
            ctx.out,
            "{}: {} ({} instances, {} counterexamples)",
            lemma.name(),
            v.as_str().unwrap_or_default(),
            cert.instances,
            cert.counterexamples
        )?;
        for (k, c) in &cert.counters {
            writeln!(ctx.out, "  {k} = {c}")?;
        }
        if let Some(c) = &cert.counterexample {
            writeln!(ctx.out, "  counterexample: {c}")?;
        }
    }
    let v = serde_json::to_value(&cert).map_err(Error::from)?;
    ctx.emit_json(&v)?;
    Ok(cert.status.exit_code())
}

#[allow(clippy::too_many_arguments)]
fn cmd_certify(
    ctx: &mut Ctx,
    theorem: Option<String>,
    n: Option<u64>,
    n1: Option<u64>,
    n2: Option<u64>,
    r: Option<u64>,
    h: Option<String>,
    m: Option<u64>,
    group: Option<String>,
    kind: Option<String>,
    expected: Option<u64>,
) -> CliResult<i32> {
    let cert = match theorem.as_deref() {
        Some(t) if t.eq_ignore_ascii_case("etaf") => {
            let h = parse_list(&need(h, "h")?).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut c = etaf_gate(&h, need(m, "m")?, need(n, "n")?).map_err(|e| CliError::Usage(e.to_string()))?;
            c.seed = ctx.config.seed;
            c
        }
        Some(t) => {
            let mut params = BTreeMap::new();
            for (k, v) in [("n", n), ("n1", n1), ("n2", n2), ("r", r)] {
                if let Some(v) = v {
                    params.insert(k.to_string(), v);
                }
            }
            let thm = Theorem::from_parts(t, &params).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut cf = ctx.certifier()?;
            cf.theorem(thm).map_err(|e| match e {
                Error::Precondition(m) => CliError::Usage(m),
                other => CliError::Core(other),
            })?
        }
        None => {
            let g = group_arg(&need(group, "group (or --theorem)")?)?;
            let kind = InvariantKind::parse(&need(kind, "kind")?).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut cf = ctx.certifier()?;
            cf.certify_value(&g, kind, need(expected, "expected")?)?
        }
    };
    ctx.certificate(&cert)
}

fn parse_cli<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match parse_cli(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let env_threads = std::env::var(THREADS_ENV).ok();
    match execute(cli, env_threads.as_deref(), out) {
        Ok(code) => code,
        Err(e) => {
            let (code, msg) = match &e {
                CliError::Usage(m) => (e.exit_code(), format!("usage error: {m}")),
                CliError::Core(c) => (e.exit_code(), format!("error: {c}")),
            };
            let _ = writeln!(err, "{msg}");
            code
        }
    }
}

fn execute(cli: Cli, env_threads: Option<&str>, out: &mut dyn Write) -> CliResult<i32> {
    let g = cli.global;
    let config = RunConfig {
        threads: g.threads,
        max_nodes: g.budget_nodes,
        max_seconds: g.budget_secs,
        seed: g.seed,
        cache_path: (!g.no_cache).then_some(g.cache),
        json_out: g.json_out,
        deterministic: g.deterministic,
    };
    let budget = config.budget(env_threads).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut ctx = Ctx { config, budget, out };
    match cli.command {
        Command::Invariant { group, kind } => cmd_invariant(&mut ctx, &group, &kind),
        Command::Witness { construction, r, n } => cmd_witness(&mut ctx, &construction, r, n),
        Command::Check { sequence, group, query } => cmd_check(&mut ctx, &sequence, group.as_deref(), &query),
        Command::Decompose { sequence, group, hom } => cmd_decompose(&mut ctx, &sequence, group.as_deref(), &hom),
        Command::Lemma { id, mode, n, r, samples } => {
            let mut params = BTreeMap::new();
            for (k, v) in [("n", n), ("r", r), ("samples", samples)] {
                if let Some(v) = v {
                    params.insert(k.to_string(), v);
                }
            }
            cmd_lemma(&mut ctx, &id, &mode, params)
        }
        Command::Certify { theorem, n, n1, n2, r, h, m, group, kind, expected } => {
            cmd_certify(&mut ctx, theorem, n, n1, n2, r, h, m, group, kind, expected)
        }
        Command::Chain { group } => {
            let g = group_arg(&group)?;
            let c = ctx.certifier()?.check_chain(&g)?;
            ctx.certificate(&c)
        }
        Command::Gao { group } => {
            let g = group_arg(&group)?;
            let c = ctx.certifier()?.check_gao(&g)?;
            ctx.certificate(&c)
        }
    }
}
