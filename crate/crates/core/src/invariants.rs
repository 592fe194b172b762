//! Exact `D(G)`, `eta(G)` and `s(G)` by exhaustive search for maximal free sequences.
//!
//! The search walks multisets in non-decreasing element-index order, so each
//! multiset is met once. Every step updates a per-depth reach table of
//! subsequence sums (one 64-bit word per length, hence the 64-element limit)
//! and prunes as soon as the prefix stops being free; freeness is inherited
//! by subsequences, so nothing longer can hide below a pruned node.
//!
//! Isomorph rejection compares the sorted prefix against its images under the
//! symmetry group (automorphisms, plus translations for the EGZ kind, which
//! is translation invariant because `exp(G) * t = 0`). Prefixes with a
//! strictly smaller image are dropped. Up to `canon_depth` the test uses the
//! whole group; deeper nodes only consult the stabilizer of the prefix.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abelian::{automorphisms, AutomorphismSet, GroupSpec, DEFAULT_AUTOMORPHISM_BOUND};
use crate::error::{Error, Result};
use crate::seq::{has_nonempty_zero_sum, has_short_zero_sum, has_zero_sum_of_length, Sequence};

/// Largest group the search engine accepts.
pub const SEARCH_ORDER_LIMIT: usize = 64;

const CHECK_INTERVAL: u64 = 1 << 12;

/// Which zero-sum subsequences a "free" sequence must avoid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FreenessKind {
    /// Any nonempty zero-sum subsequence (Davenport constant).
    NonemptyZeroSum,
    /// Zero-sum subsequences of length in `[1, exp(G)]` (eta).
    ShortZeroSum,
    /// Zero-sum subsequences of length exactly `exp(G)` (EGZ constant).
    ExpLengthZeroSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InvariantKind {
    #[serde(rename = "D")]
    Davenport,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "s")]
    Egz,
    #[serde(rename = "Dstar")]
    DStar,
}

impl InvariantKind {
    pub fn freeness(self) -> Option<FreenessKind> {
        match self {
            InvariantKind::Davenport => Some(FreenessKind::NonemptyZeroSum),
            InvariantKind::Eta => Some(FreenessKind::ShortZeroSum),
            InvariantKind::Egz => Some(FreenessKind::ExpLengthZeroSum),
            InvariantKind::DStar => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InvariantKind::Davenport => "D",
            InvariantKind::Eta => "eta",
            InvariantKind::Egz => "s",
            InvariantKind::DStar => "Dstar",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "D" | "d" | "davenport" => Ok(InvariantKind::Davenport),
            "eta" => Ok(InvariantKind::Eta),
            "s" | "egz" => Ok(InvariantKind::Egz),
            "Dstar" | "dstar" => Ok(InvariantKind::DStar),
            other => Err(Error::Parse(format!("unknown invariant kind {other:?}"))),
        }
    }
}

impl FreenessKind {
    pub fn invariant(self) -> InvariantKind {
        match self {
            FreenessKind::NonemptyZeroSum => InvariantKind::Davenport,
            FreenessKind::ShortZeroSum => InvariantKind::Eta,
            FreenessKind::ExpLengthZeroSum => InvariantKind::Egz,
        }
    }
}

/// Freeness of `s` decided by the sequence oracle (independent of the search engine).
pub fn is_free(s: &Sequence, kind: FreenessKind) -> bool {
    match kind {
        FreenessKind::NonemptyZeroSum => !has_nonempty_zero_sum(s),
        FreenessKind::ShortZeroSum => !has_short_zero_sum(s),
        FreenessKind::ExpLengthZeroSum => {
            let exp = s.group().exponent() as usize;
            s.len() < exp || !has_zero_sum_of_length(s, exp).expect("length checked")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub max_seconds: Option<u64>,
    pub workers: usize,
    pub deterministic: bool,
    pub canonicalize: bool,
    /// Depth up to which the full symmetry group is consulted.
    pub canon_depth: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: None,
            max_seconds: None,
            workers: 0,
            deterministic: false,
            canonicalize: true,
            canon_depth: 4,
        }
    }
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn nodes(max_nodes: u64) -> Self {
        SearchBudget { max_nodes: Some(max_nodes), ..Self::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub pruned_free: u64,
    pub pruned_canon: u64,
    pub symmetries: u64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantResult {
    pub group: GroupSpec,
    pub kind: InvariantKind,
    /// Exact value when `exhaustive`, otherwise a proven lower bound.
    pub value: u64,
    pub witness: Option<Sequence>,
    pub exhaustive: bool,
    pub stats: SearchStats,
}

/// `D*(G) = 1 + sum (n_i - 1)` over the invariant factors.
pub fn d_star(group: &GroupSpec) -> u64 {
    1 + group.invariant_factors().iter().map(|n| n - 1).sum::<u64>()
}

/// Element permutations used for isomorph rejection.
pub struct Symmetries {
    order: usize,
    perms: Vec<u8>,
}

impl Symmetries {
    pub fn from_automorphisms(auts: &AutomorphismSet, with_translations: bool) -> Self {
        let group = auts.group();
        let order = group.order();
        let mut perms = Vec::new();
        let shifts: Vec<usize> = if with_translations { (0..order).collect() } else { vec![0] };
        for t in shifts {
            for table in auts.tables() {
                perms.extend(table.iter().map(|&x| group.add_idx(x as usize, t) as u8));
            }
        }
        Symmetries { order, perms }
    }

    pub fn len(&self) -> usize {
        self.perms.len().checked_div(self.order).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn perm(&self, i: usize) -> &[u8] {
        &self.perms[i * self.order..(i + 1) * self.order]
    }
}

/// Orders two sorted multisets given as nested "count > j" masks.
fn cmp_layered(img: &[u64], base: &[u64]) -> Ordering {
    let mut low = u32::MAX;
    for (a, b) in img.iter().zip(base) {
        let d = a ^ b;
        if d != 0 {
            low = low.min(d.trailing_zeros());
        }
    }
    if low == u32::MAX {
        return Ordering::Equal;
    }
    let bit = 1u64 << low;
    let ci = img.iter().filter(|&&m| m & bit != 0).count();
    let cb = base.iter().filter(|&&m| m & bit != 0).count();
    if ci > cb {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

struct Shared {
    nodes: AtomicU64,
    stop: AtomicBool,
    max_nodes: u64,
    deadline: Option<Instant>,
}

impl Shared {
    fn charge(&self, n: u64) -> bool {
        let total = self.nodes.fetch_add(n, AtomicOrdering::Relaxed) + n;
        if total >= self.max_nodes || self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.stop.store(true, AtomicOrdering::Relaxed);
        }
        self.stop.load(AtomicOrdering::Relaxed)
    }
}

#[derive(Clone)]
struct Outcome {
    best: Vec<u8>,
    stats: SearchStats,
    stopped: bool,
}

struct Worker<'a> {
    order: usize,
    lut: &'a [u64],
    kind: FreenessKind,
    nl: usize,
    syms: Option<&'a Symmetries>,
    canon_depth: usize,
    shared: &'a Shared,
    frames: Vec<u64>,
    prefix: Vec<u8>,
    stabs: Vec<Vec<u32>>,
    best: Vec<u8>,
    stats: SearchStats,
    pending: u64,
    stopped: bool,
    img: Vec<u64>,
    base: Vec<u64>,
}

impl<'a> Worker<'a> {
    fn new(
        group: &'a GroupSpec,
        kind: FreenessKind,
        syms: Option<&'a Symmetries>,
        canon_depth: usize,
        shared: &'a Shared,
    ) -> Self {
        let order = group.order();
        let exp = group.exponent() as usize;
        let nl = match kind {
            FreenessKind::NonemptyZeroSum => 1,
            _ => exp,
        };
        let max_depth = order + exp + 1;
        Worker {
            order,
            lut: group.small_lut().expect("order <= 64"),
            kind,
            nl,
            syms,
            canon_depth,
            shared,
            frames: vec![0; (max_depth + 1) * nl],
            prefix: Vec::with_capacity(max_depth),
            stabs: vec![Vec::new(); max_depth + 1],
            best: Vec::new(),
            stats: SearchStats::default(),
            pending: 0,
            stopped: false,
            img: Vec::with_capacity(max_depth),
            base: Vec::with_capacity(max_depth),
        }
    }

    /// Writes frame `depth + 1` from frame `depth` extended by `g`; returns freeness.
    #[inline]
    fn extend(&mut self, depth: usize, g: usize) -> bool {
        let nl = self.nl;
        let lut = self.lut;
        let (lo, hi) = self.frames.split_at_mut((depth + 1) * nl);
        let src = &lo[depth * nl..];
        let dst = &mut hi[..nl];
        match self.kind {
            FreenessKind::NonemptyZeroSum => {
                let r = src[0] | (1 << g) | translate_with(lut, src[0], g);
                dst[0] = r;
                r & 1 == 0
            }
            FreenessKind::ShortZeroSum | FreenessKind::ExpLengthZeroSum => {
                dst[0] = src[0] | (1 << g);
                let mut any = dst[0];
                for l in 1..nl {
                    let t = translate_with(lut, src[l - 1], g);
                    dst[l] = src[l] | t;
                    any |= dst[l];
                }
                if self.kind == FreenessKind::ShortZeroSum {
                    any & 1 == 0
                } else {
                    dst[nl - 1] & 1 == 0
                }
            }
        }
    }

    fn layered(prefix: &[u8], map: impl Fn(u8) -> u8, out: &mut Vec<u64>) {
        out.clear();
        let mut i = 0;
        while i < prefix.len() {
            let v = prefix[i];
            let mut j = i;
            while j < prefix.len() && prefix[j] == v {
                j += 1;
            }
            let bit = 1u64 << map(v);
            for layer in 0..(j - i) {
                if out.len() <= layer {
                    out.push(0);
                }
                out[layer] |= bit;
            }
            i = j;
        }
    }

    /// Isomorph rejection for the current prefix (already including its last element).
    fn canonical(&mut self) -> bool {
        let Some(syms) = self.syms else { return true };
        let depth = self.prefix.len();
        if depth <= self.canon_depth {
            let mut base = std::mem::take(&mut self.base);
            let mut img = std::mem::take(&mut self.img);
            Self::layered(&self.prefix, |v| v, &mut base);
            let mut ok = true;
            let need_stab = depth == self.canon_depth;
            let mut stab = Vec::new();
            for s in 0..syms.len() {
                let perm = syms.perm(s);
                Self::layered(&self.prefix, |v| perm[v as usize], &mut img);
                img.resize(base.len(), 0);
                match cmp_layered(&img, &base) {
                    Ordering::Less => {
                        ok = false;
                        break;
                    }
                    Ordering::Equal if need_stab => stab.push(s as u32),
                    _ => {}
                }
            }
            self.base = base;
            self.img = img;
            if ok && need_stab {
                self.stabs[depth] = stab;
            }
            ok
        } else {
            let x = *self.prefix.last().expect("nonempty");
            let mut next = Vec::new();
            let parent = std::mem::take(&mut self.stabs[depth - 1]);
            let mut ok = true;
            for &s in &parent {
                let y = syms.perm(s as usize)[x as usize];
                match y.cmp(&x) {
                    Ordering::Less => {
                        ok = false;
                        break;
                    }
                    Ordering::Equal => next.push(s),
                    Ordering::Greater => {}
                }
            }
            self.stabs[depth - 1] = parent;
            if ok {
                self.stabs[depth] = next;
            }
            ok
        }
    }

    fn visit(&mut self) {
        self.stats.nodes += 1;
        self.pending += 1;
        if self.prefix.len() > self.best.len() {
            self.best = self.prefix.clone();
        }
        if self.pending >= CHECK_INTERVAL {
            let p = std::mem::take(&mut self.pending);
            if self.shared.charge(p) {
                self.stopped = true;
            }
        }
    }

    /// Tries to append `g`; on success the prefix is extended and the node visited.
    fn try_push(&mut self, g: usize) -> bool {
        let depth = self.prefix.len();
        if !self.extend(depth, g) {
            self.stats.pruned_free += 1;
            return false;
        }
        self.prefix.push(g as u8);
        if !self.canonical() {
            self.prefix.pop();
            self.stats.pruned_canon += 1;
            return false;
        }
        self.visit();
        true
    }

    fn dfs(&mut self) {
        let start = self.prefix.last().map_or(0, |&x| x as usize);
        for g in start..self.order {
            if self.stopped || self.shared.stop.load(AtomicOrdering::Relaxed) {
                self.stopped = true;
                return;
            }
            if self.try_push(g) {
                self.dfs();
                self.prefix.pop();
            }
        }
    }

    fn finish(mut self) -> Outcome {
        let p = std::mem::take(&mut self.pending);
        if p > 0 && self.shared.charge(p) && !self.stopped {
            // budget hit exactly at the end of a finished subtree; the subtree itself is complete
        }
        Outcome { best: self.best, stats: self.stats, stopped: self.stopped }
    }
}

#[inline]
fn translate_with(lut: &[u64], set: u64, g: usize) -> u64 {
    let mut out = 0;
    let mut w = set;
    let mut byte = 0;
    while w != 0 {
        let v = (w & 0xff) as usize;
        if v != 0 {
            out |= lut[(g * 8 + byte) * 256 + v];
        }
        w >>= 8;
        byte += 1;
    }
    out
}

/// Longest free sequence for `kind`; `value` is that length plus one.
pub fn max_free_length(group: &GroupSpec, kind: FreenessKind, budget: &SearchBudget) -> Result<InvariantResult> {
    let order = group.order();
    if order > SEARCH_ORDER_LIMIT {
        return Err(Error::SearchLimit(order));
    }
    let started = Instant::now();
    let syms = if budget.canonicalize {
        let auts = automorphisms(group, DEFAULT_AUTOMORPHISM_BOUND)?;
        Some(Symmetries::from_automorphisms(&auts, kind == FreenessKind::ExpLengthZeroSum))
    } else {
        None
    };
    let shared = Shared {
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        max_nodes: budget.max_nodes.unwrap_or(u64::MAX),
        deadline: budget.max_seconds.map(|s| started + Duration::from_secs(s)),
    };

    // Expand the first two levels serially; the subtrees below are independent tasks.
    let mut top = Worker::new(group, kind, syms.as_ref(), budget.canon_depth, &shared);
    let mut tasks: Vec<Vec<u8>> = Vec::new();
    for a in 0..order {
        if top.try_push(a) {
            for b in a..order {
                if top.try_push(b) {
                    tasks.push(top.prefix.clone());
                    top.prefix.pop();
                }
            }
            top.prefix.pop();
        }
    }
    let top_out = top.finish();

    let run = |task: &Vec<u8>| -> Outcome {
        let mut w = Worker::new(group, kind, syms.as_ref(), budget.canon_depth, &shared);
        for (d, &x) in task.iter().enumerate() {
            let free = w.extend(d, x as usize);
            debug_assert!(free);
            w.prefix.push(x);
            // recomputes stabilizers along the replayed prefix
            let ok = w.canonical();
            debug_assert!(ok);
        }
        w.best = task.clone();
        w.dfs();
        w.finish()
    };

    let workers = if budget.deterministic { 1 } else { budget.workers };
    let outcomes: Vec<Outcome> = if workers == 1 {
        tasks.iter().map(run).collect()
    } else if workers == 0 {
        tasks.par_iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?;
        pool.install(|| tasks.par_iter().map(run).collect())
    };

    let mut best = top_out.best;
    let mut stats = top_out.stats;
    let mut stopped = top_out.stopped;
    for o in outcomes {
        stats.nodes += o.stats.nodes;
        stats.pruned_free += o.stats.pruned_free;
        stats.pruned_canon += o.stats.pruned_canon;
        stopped |= o.stopped;
        if o.best.len() > best.len() || (o.best.len() == best.len() && o.best < best) {
            best = o.best;
        }
    }
    stats.symmetries = syms.as_ref().map_or(1, |s| s.len() as u64);
    stats.elapsed_ms = started.elapsed().as_millis() as u64;

    let witness = Sequence::from_indices(group, &best.iter().map(|&x| x as usize).collect::<Vec<_>>());
    if !is_free(&witness, kind) {
        return Err(Error::Internal(format!("search witness {witness:?} is not free")));
    }
    Ok(InvariantResult {
        group: group.clone(),
        kind: kind.invariant(),
        value: best.len() as u64 + 1,
        witness: Some(witness),
        exhaustive: !stopped,
        stats,
    })
}

pub fn davenport(group: &GroupSpec, budget: &SearchBudget) -> Result<InvariantResult> {
    max_free_length(group, FreenessKind::NonemptyZeroSum, budget)
}

pub fn eta(group: &GroupSpec, budget: &SearchBudget) -> Result<InvariantResult> {
    max_free_length(group, FreenessKind::ShortZeroSum, budget)
}

pub fn egz(group: &GroupSpec, budget: &SearchBudget) -> Result<InvariantResult> {
    max_free_length(group, FreenessKind::ExpLengthZeroSum, budget)
}

pub fn compute(group: &GroupSpec, kind: InvariantKind, budget: &SearchBudget) -> Result<InvariantResult> {
    match kind.freeness() {
        Some(f) => max_free_length(group, f, budget),
        None => Ok(InvariantResult {
            group: group.clone(),
            kind,
            value: d_star(group),
            witness: None,
            exhaustive: true,
            stats: SearchStats::default(),
        }),
    }
}

/// Lexicographically smallest `sort(alpha(S))` over the automorphisms.
pub fn canonicalize(s: &Sequence, auts: &AutomorphismSet) -> Result<Sequence> {
    if s.group() != auts.group() {
        return Err(Error::GroupMismatch { left: s.group().to_string(), right: auts.group().to_string() });
    }
    let terms = s.indices();
    let mut best: Option<Vec<usize>> = None;
    for table in auts.tables() {
        let mut img: Vec<usize> = terms.iter().map(|&x| table[x] as usize).collect();
        img.sort_unstable();
        if best.as_ref().is_none_or(|b| img < *b) {
            best = Some(img);
        }
    }
    Ok(Sequence::from_indices(s.group(), &best.unwrap_or_default()))
}

/// Samples `samples` uniform sequences of length `len` and returns the first free one.
pub fn random_free_probe(
    group: &GroupSpec,
    kind: FreenessKind,
    len: usize,
    samples: usize,
    seed: u64,
) -> Option<Sequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = group.order();
    (0..samples).find_map(|_| {
        let idx: Vec<usize> = (0..len).map(|_| rng.gen_range(0..order)).collect();
        let s = Sequence::from_indices(group, &idx);
        is_free(&s, kind).then_some(s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(f: &[u64]) -> GroupSpec {
        GroupSpec::new(f).unwrap()
    }

    fn det() -> SearchBudget {
        SearchBudget { deterministic: true, ..SearchBudget::default() }
    }

    #[test]
    fn d_star_examples() {
        assert_eq!(d_star(&g(&[2, 4])), 5);
        assert_eq!(d_star(&g(&[])), 1);
        assert_eq!(d_star(&g(&[2, 2, 2, 6])), 9);
        assert_eq!(d_star(&g(&[2, 2, 2, 3])), 1 + 1 + 1 + 5);
    }

    #[test]
    fn cyclic_davenport_witness_is_generator_power() {
        for n in 2..=8u64 {
            let r = davenport(&g(&[n]), &det()).unwrap();
            assert!(r.exhaustive);
            assert_eq!(r.value, n);
            let w = r.witness.unwrap();
            assert_eq!(w.support_idx().len(), 1);
            assert_eq!(g(&[n]).ord_idx(w.support_idx()[0]), n);
        }
    }

    #[test]
    fn small_values() {
        assert_eq!(davenport(&g(&[2, 2, 2, 2]), &det()).unwrap().value, 5);
        assert_eq!(eta(&g(&[2, 2, 4]), &det()).unwrap().value, 8);
        assert_eq!(egz(&g(&[3, 3]), &det()).unwrap().value, 9);
        assert_eq!(egz(&g(&[5]), &det()).unwrap().value, 9);
        assert_eq!(egz(&g(&[]), &det()).unwrap().value, 1);
    }

    #[test]
    fn canonicalization_does_not_change_values() {
        let groups: Vec<Vec<u64>> = vec![
            vec![2], vec![3], vec![4], vec![5], vec![6], vec![7], vec![8], vec![2, 2], vec![2, 4],
            vec![3, 3], vec![2, 2, 2], vec![2, 6], vec![9], vec![10], vec![4, 4], vec![2, 8],
            vec![2, 2, 4], vec![2, 2, 2, 2],
        ];
        for f in groups {
            let gr = g(&f);
            for kind in [FreenessKind::NonemptyZeroSum, FreenessKind::ShortZeroSum, FreenessKind::ExpLengthZeroSum] {
                let with = max_free_length(&gr, kind, &det()).unwrap();
                let without =
                    max_free_length(&gr, kind, &SearchBudget { canonicalize: false, ..det() }).unwrap();
                assert_eq!(with.value, without.value, "{f:?} {kind:?}");
                assert!(with.stats.nodes <= without.stats.nodes);
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let r = eta(&g(&[2, 2, 4]), &SearchBudget { max_nodes: Some(10), ..det() }).unwrap();
        assert!(!r.exhaustive);
        assert!(r.value <= 8);
        assert!(is_free(r.witness.as_ref().unwrap(), FreenessKind::ShortZeroSum));
    }

    #[test]
    fn deterministic_reruns_identical() {
        let a = egz(&g(&[2, 4]), &det()).unwrap();
        let b = egz(&g(&[2, 4]), &det()).unwrap();
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.stats.nodes, b.stats.nodes);
        let par = egz(&g(&[2, 4]), &SearchBudget::default()).unwrap();
        assert_eq!(par.value, a.value);
        assert_eq!(par.witness, a.witness);
    }

    #[test]
    fn search_limit() {
        assert!(matches!(eta(&g(&[5, 13]), &det()), Err(Error::SearchLimit(65))));
    }

    #[test]
    fn canonical_forms_of_pairs_over_klein() {
        let gr = g(&[2, 2]);
        let auts = automorphisms(&gr, 64).unwrap();
        let e1 = Sequence::from_indices(&gr, &[2]);
        let e2 = Sequence::from_indices(&gr, &[1]);
        assert_eq!(canonicalize(&e1, &auts).unwrap(), canonicalize(&e2, &auts).unwrap());
        let mut forms = std::collections::BTreeSet::new();
        for a in 0..4 {
            for b in a..4 {
                let s = Sequence::from_indices(&gr, &[a, b]);
                let c = canonicalize(&s, &auts).unwrap();
                assert_eq!(canonicalize(&c, &auts).unwrap(), c);
                forms.insert(c.indices());
            }
        }
        assert_eq!(forms.len(), 4);
    }

    #[test]
    fn layered_comparison_matches_sorted_comparison() {
        let seqs: Vec<Vec<u8>> = vec![
            vec![0, 0, 1], vec![0, 1, 1], vec![0, 0, 0], vec![1, 2, 3], vec![0, 2, 2], vec![0, 1, 5],
            vec![0, 0, 5], vec![3, 3, 3], vec![2, 3, 3],
        ];
        for a in &seqs {
            for b in &seqs {
                let (mut la, mut lb) = (Vec::new(), Vec::new());
                Worker::layered(a, |v| v, &mut la);
                Worker::layered(b, |v| v, &mut lb);
                let n = la.len().max(lb.len());
                la.resize(n, 0);
                lb.resize(n, 0);
                assert_eq!(cmp_layered(&la, &lb), a.cmp(b), "{a:?} {b:?}");
            }
        }
    }
}
