//! Instance-level checkers for the structural lemmas over `C_2^r + C_n`
//! (odd `n`) and `C_2^3 + C_2n`, plus a seeded falsification harness.
//!
//! Sequences are handled through their term lists (`Sequence::indices`), so
//! subsequences are position subsets encoded as `u32` masks. Every piece of
//! evidence is rechecked from scratch before a report leaves this module.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::sync::OnceLock;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::abelian::{automorphisms, doubling_hom, gcd, Element, GroupSpec, Homomorphism};
use crate::constructions::sum_pairs;
use crate::error::{Error, Result};
use crate::invariants::SearchBudget;
use crate::seq::{has_nonempty_zero_sum, has_zero_sum_of_length, short_zero_sum, Sequence};

/// `G = H + K` with `H = C_2^r` and `K = C_n`, presented as `[2; r] + [n]`.
#[derive(Clone, Debug)]
pub struct SplitContext {
    group: GroupSpec,
    phi: Homomorphism,
    psi: Homomorphism,
    e: Element,
    r: usize,
    n: u64,
}

impl SplitContext {
    pub fn new(r: usize, n: u64, e: u64) -> Result<Self> {
        if r == 0 || n < 2 {
            return Err(Error::Precondition(format!("need r >= 1 and n >= 2, got r={r}, n={n}")));
        }
        let mut f = vec![2u64; r];
        f.push(n);
        let group = GroupSpec::new(&f)?;
        let phi = Homomorphism::projection(&group, &(0..r).collect::<Vec<_>>())?;
        let psi = Homomorphism::projection(&group, &[r])?;
        let e = psi.codomain().elem(&[e % n])?;
        Self::from_parts(phi, psi, e)
    }

    /// Validates a user-supplied split: `phi` onto an elementary 2-group, `psi` onto a cyclic group,
    /// `phi + psi` injective (checked for `|G| <= 64`) and `e` in the image of `psi`.
    pub fn from_parts(phi: Homomorphism, psi: Homomorphism, e: Element) -> Result<Self> {
        let group = phi.domain().clone();
        if psi.domain() != &group {
            return Err(Error::GroupMismatch { left: group.to_string(), right: psi.domain().to_string() });
        }
        let h = phi.codomain();
        if h.factors().iter().any(|&f| f != 2) {
            return Err(Error::Presentation(format!("{h} is not elementary abelian of exponent 2")));
        }
        let k = psi.codomain();
        if k.factors().len() != 1 {
            return Err(Error::Presentation(format!("{k} is not presented as one cyclic factor")));
        }
        if e.group() != k {
            return Err(Error::GroupMismatch { left: e.group().to_string(), right: k.to_string() });
        }
        let (pt, qt) = (phi.table(), psi.table());
        if !qt.contains(&e.index()) {
            return Err(Error::Precondition("e is not in psi(G)".into()));
        }
        if group.order() <= 64 {
            let mut seen = vec![false; h.order() * k.order()];
            for x in 0..group.order() {
                let key = pt[x] * k.order() + qt[x];
                if std::mem::replace(&mut seen[key], true) {
                    return Err(Error::Precondition("phi + psi is not injective".into()));
                }
            }
        }
        let r = h.factors().len();
        let n = k.factors()[0];
        Ok(SplitContext { group, phi, psi, e, r, n })
    }

    pub fn with_e(&self, e: u64) -> Result<Self> {
        let e = self.psi.codomain().elem(&[e % self.n])?;
        Ok(SplitContext { e, ..self.clone() })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }
    pub fn phi(&self) -> &Homomorphism {
        &self.phi
    }
    pub fn psi(&self) -> &Homomorphism {
        &self.psi
    }
    pub fn e(&self) -> &Element {
        &self.e
    }
    pub fn rank(&self) -> usize {
        self.r
    }
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Element with `phi`-part `h` (index in `H`) and `psi`-part `k` (residue mod `n`).
    pub fn lift(&self, h: usize, k: u64) -> usize {
        let mut res = self.phi.codomain().residues_of(h);
        res.push(k % self.n);
        self.group.index_of_residues(&res)
    }

    fn terms(&self, s: &Sequence) -> Result<Terms> {
        if s.group() != &self.group {
            return Err(Error::GroupMismatch { left: s.group().to_string(), right: self.group.to_string() });
        }
        let g = s.indices();
        let phi = g.iter().map(|&x| self.phi.apply_idx(x)).collect();
        let psi = g.iter().map(|&x| self.psi.apply_idx(x) as u64).collect();
        Ok(Terms { g, phi, psi })
    }

    fn e_val(&self) -> u64 {
        self.e.residues()[0]
    }
}

struct Terms {
    g: Vec<usize>,
    phi: Vec<usize>,
    psi: Vec<u64>,
}

impl Terms {
    fn len(&self) -> usize {
        self.g.len()
    }

    fn psi_sum(&self, mask: u32, n: u64) -> u64 {
        ones(mask).map(|i| self.psi[i]).sum::<u64>() % n
    }

    fn phi_squarefree(&self) -> bool {
        let mut v = self.phi.clone();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    }

    fn sub(&self, group: &GroupSpec, mask: u32) -> Sequence {
        Sequence::from_indices(group, &ones(mask).map(|i| self.g[i]).collect::<Vec<_>>())
    }
}

fn ones(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

/// Position masks with `phi`-sum zero and size in `[lo, hi]`, by meet in the middle.
///
/// `H` indices of `C_2^r` are bit vectors, so the group law is XOR.
fn phi_zero_masks(phi: &[usize], lo: usize, hi: usize) -> Vec<u32> {
    fn half(phi: &[usize], offset: usize, hi: usize) -> Vec<(u32, usize, usize)> {
        let mut out = vec![(0u32, 0usize, 0usize)];
        for (i, &p) in phi.iter().enumerate() {
            let cur = out.len();
            for j in 0..cur {
                let (m, s, h) = out[j];
                if s < hi {
                    out.push((m | 1 << (offset + i), s + 1, h ^ p));
                }
            }
        }
        out
    }
    let mid = phi.len() / 2;
    let a = half(&phi[..mid], 0, hi);
    let b = half(&phi[mid..], mid, hi);
    let width = phi.iter().fold(1usize, |acc, &p| acc.max((p + 1).next_power_of_two()));
    let mut buckets: Vec<Vec<(u32, usize)>> = vec![Vec::new(); width];
    for &(m, s, h) in &b {
        buckets[h].push((m, s));
    }
    let mut out = Vec::new();
    for &(ma, sa, ha) in &a {
        if ha >= width {
            continue;
        }
        for &(mb, sb) in &buckets[ha] {
            let s = sa + sb;
            if s >= lo && s <= hi {
                out.push(ma | mb);
            }
        }
    }
    out.sort_unstable_by_key(|&m| (m.count_ones(), m));
    out
}

fn star_allows(len: u32, sum: u64, e: u64, n: u64) -> bool {
    if len <= 4 {
        sum == e % n
    } else {
        sum == e % n || sum == 2 * e % n
    }
}

/// First mask violating `(*)`, or `Ok(())` when all candidate masks satisfy it.
fn star_eval(masks: &[u32], psi: &[u64], e: u64, n: u64) -> std::result::Result<(), u32> {
    for &m in masks {
        let s = ones(m).map(|i| psi[i]).sum::<u64>() % n;
        if !star_allows(m.count_ones(), s, e, n) {
            return Err(m);
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LemmaId {
    #[serde(rename = "STAR")]
    Star,
    #[serde(rename = "CYCLIC_1")]
    Cyclic1,
    #[serde(rename = "CYCLIC_3")]
    Cyclic3,
    #[serde(rename = "SUM")]
    Sum,
    #[serde(rename = "SUPP_P1")]
    SuppP1,
    #[serde(rename = "IMP")]
    Imp,
    #[serde(rename = "SHO")]
    Sho,
    #[serde(rename = "STAR_XX1")]
    StarXx1,
    #[serde(rename = "LL1")]
    Ll1,
    #[serde(rename = "EIMP1")]
    Eimp1,
}

impl LemmaId {
    pub const REGISTRY: [LemmaId; 9] = [
        LemmaId::Cyclic1,
        LemmaId::Cyclic3,
        LemmaId::Sum,
        LemmaId::SuppP1,
        LemmaId::Imp,
        LemmaId::Sho,
        LemmaId::StarXx1,
        LemmaId::Ll1,
        LemmaId::Eimp1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Star => "STAR",
            LemmaId::Cyclic1 => "CYCLIC_1",
            LemmaId::Cyclic3 => "CYCLIC_3",
            LemmaId::Sum => "SUM",
            LemmaId::SuppP1 => "SUPP_P1",
            LemmaId::Imp => "IMP",
            LemmaId::Sho => "SHO",
            LemmaId::StarXx1 => "STAR_XX1",
            LemmaId::Ll1 => "LL1",
            LemmaId::Eimp1 => "EIMP1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        LemmaId::REGISTRY
            .into_iter()
            .chain([LemmaId::Star])
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown lemma id {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "holds-on-instance")]
    Holds,
    #[serde(rename = "violated")]
    Violated,
    #[serde(rename = "vacuous")]
    Vacuous,
    #[serde(rename = "witness-found")]
    WitnessFound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    /// Name of the subsequence in the lemma (`V`, `T`, `T1`, `T2`).
    pub role: String,
    pub terms: Sequence,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub params: BTreeMap<String, u64>,
    pub outcome: Outcome,
    pub evidence: Vec<Evidence>,
    /// Candidate subsequences examined.
    pub examined: u64,
}

impl LemmaReport {
    fn new(lemma: LemmaId, params: &[(&str, u64)], outcome: Outcome, examined: u64) -> Self {
        LemmaReport {
            lemma,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            outcome,
            evidence: Vec::new(),
            examined,
        }
    }

    fn with(mut self, role: &str, terms: Sequence) -> Self {
        self.evidence.push(Evidence { role: role.to_string(), terms });
        self
    }

    pub fn evidence_for(&self, role: &str) -> Option<&Sequence> {
        self.evidence.iter().find(|e| e.role == role).map(|e| &e.terms)
    }

    pub fn to_json(&self) -> Value {
        let ev: BTreeMap<String, Value> = self
            .evidence
            .iter()
            .map(|e| (e.role.clone(), serde_json::to_value(e.terms.to_json()).expect("serializable")))
            .collect();
        json!({
            "lemma": self.lemma,
            "params": self.params,
            "outcome": self.outcome,
            "evidence": ev,
            "examined": self.examined,
        })
    }
}

fn recheck(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Internal(format!("evidence failed its recheck: {what}")))
    }
}

fn phi_sum_seq(ctx: &SplitContext, t: &Sequence) -> usize {
    t.indices().iter().fold(0, |acc, &x| ctx.phi.codomain().add_idx(acc, ctx.phi.apply_idx(x)))
}

fn psi_sum_seq(ctx: &SplitContext, t: &Sequence) -> u64 {
    t.indices().iter().map(|&x| ctx.psi.apply_idx(x) as u64).sum::<u64>() % ctx.n
}

/// Property `(*)` for `e = ctx.e`: every `V` with `phi`-sum zero and `|V|` in `[3, 5]` has
/// `psi`-sum `e` (lengths 3 and 4) or `e`/`2e` (length 5).
pub fn star_check(s: &Sequence, ctx: &SplitContext) -> Result<LemmaReport> {
    let t = ctx.terms(s)?;
    if t.len() > 32 {
        return Err(Error::Precondition("sequence longer than 32 terms".into()));
    }
    let masks = phi_zero_masks(&t.phi, 3, 5);
    let e = ctx.e_val();
    let params = [("n", ctx.n), ("e", e)];
    if masks.is_empty() {
        return Ok(LemmaReport::new(LemmaId::Star, &params, Outcome::Vacuous, 0));
    }
    match star_eval(&masks, &t.psi, e, ctx.n) {
        Ok(()) => Ok(LemmaReport::new(LemmaId::Star, &params, Outcome::Holds, masks.len() as u64)),
        Err(m) => {
            let v = t.sub(&ctx.group, m);
            recheck(s.contains(&v), "V divides S")?;
            recheck(phi_sum_seq(ctx, &v) == 0, "phi(V) sums to zero")?;
            recheck(!star_allows(v.len() as u32, psi_sum_seq(ctx, &v), e, ctx.n), "psi(V) breaks (*)")?;
            let pos = masks.iter().position(|&x| x == m).unwrap_or(0) as u64 + 1;
            Ok(LemmaReport::new(LemmaId::Star, &params, Outcome::Violated, pos).with("V", v))
        }
    }
}

/// Property P1 and, when it holds, the conclusion `|supp(psi(S))| = 1`.
///
/// A failing P1 is reported as `Vacuous` with the two 4-subsequences that break it.
pub fn p1_check(s: &Sequence, ctx: &SplitContext) -> Result<LemmaReport> {
    let t = ctx.terms(s)?;
    let h_nonzero = (1usize << ctx.r) - 1;
    if t.len() != h_nonzero || !t.phi_squarefree() || t.phi.contains(&0) {
        return Err(Error::Precondition("phi(S) must be squarefree with support H minus 0".into()));
    }
    if t.len() > 32 {
        return Err(Error::Precondition("rank too large".into()));
    }
    let masks = phi_zero_masks(&t.phi, 4, 4);
    let params = [("r", ctx.r as u64), ("n", ctx.n)];
    let Some(&first) = masks.first() else {
        return Err(Error::Internal("no phi-zero-sum 4-subsequence".into()));
    };
    let s0 = t.psi_sum(first, ctx.n);
    for (i, &m) in masks.iter().enumerate() {
        if t.psi_sum(m, ctx.n) != s0 {
            let (t1, t2) = (t.sub(&ctx.group, first), t.sub(&ctx.group, m));
            recheck(t1.len() == 4 && t2.len() == 4 && first != m, "two distinct 4-subsequences")?;
            recheck(phi_sum_seq(ctx, &t1) == 0 && phi_sum_seq(ctx, &t2) == 0, "phi-sums vanish")?;
            recheck(t1.sum() != t2.sum(), "sums differ")?;
            return Ok(LemmaReport::new(LemmaId::SuppP1, &params, Outcome::Vacuous, i as u64 + 1)
                .with("T1", t1)
                .with("T2", t2));
        }
    }
    let mut support = t.psi.clone();
    support.sort_unstable();
    support.dedup();
    let outcome = if support.len() == 1 { Outcome::Holds } else { Outcome::Violated };
    Ok(LemmaReport::new(LemmaId::SuppP1, &params, outcome, masks.len() as u64))
}

/// Lemma IMP two-outcome finder: `T1`, `T2` with equal (zero) `phi`-sums and different
/// `psi`-sums, or a genuine zero-sum `V` of length 3 or 4.
pub fn imp_find(s: &Sequence, ctx: &SplitContext) -> Result<LemmaReport> {
    let t = ctx.terms(s)?;
    if t.len() != 10 || !t.phi_squarefree() || t.phi.contains(&0) {
        return Err(Error::Precondition("need |S| = 10 with phi(S) squarefree over H minus 0".into()));
    }
    let masks = phi_zero_masks(&t.phi, 3, 4);
    imp_eval(&t, &masks, ctx)
}

fn imp_eval(t: &Terms, masks: &[u32], ctx: &SplitContext) -> Result<LemmaReport> {
    let params = [("n", ctx.n)];
    let Some(&first) = masks.first() else {
        return Ok(LemmaReport::new(LemmaId::Imp, &params, Outcome::Violated, 0));
    };
    let s0 = t.psi_sum(first, ctx.n);
    for (i, &m) in masks.iter().enumerate() {
        if t.psi_sum(m, ctx.n) != s0 {
            let (t1, t2) = (t.sub(&ctx.group, first), t.sub(&ctx.group, m));
            recheck((3..=4).contains(&t1.len()) && (3..=4).contains(&t2.len()), "lengths in [3,4]")?;
            recheck(phi_sum_seq(ctx, &t1) == 0 && phi_sum_seq(ctx, &t2) == 0, "phi-sums vanish")?;
            recheck(psi_sum_seq(ctx, &t1) != psi_sum_seq(ctx, &t2), "psi-sums differ")?;
            return Ok(LemmaReport::new(LemmaId::Imp, &params, Outcome::WitnessFound, i as u64 + 1)
                .with("T1", t1)
                .with("T2", t2));
        }
    }
    if s0 == 0 {
        let v = t.sub(&ctx.group, first);
        recheck(v.sum_idx() == 0, "V is zero-sum")?;
        return Ok(LemmaReport::new(LemmaId::Imp, &params, Outcome::WitnessFound, masks.len() as u64).with("V", v));
    }
    Ok(LemmaReport::new(LemmaId::Imp, &params, Outcome::Violated, masks.len() as u64))
}

/// Lemma SHO over `C_2^4 + C_3`: a zero-sum subsequence of length at most 6.
pub fn sho_check(s: &Sequence, ctx: &SplitContext) -> Result<LemmaReport> {
    let t = ctx.terms(s)?;
    if ctx.r != 4 || ctx.n != 3 {
        return Err(Error::Precondition("SHO is stated over C_2^4 + C_3".into()));
    }
    if t.len() != 12 || !t.phi_squarefree() {
        return Err(Error::Precondition("need |S| = 12 with phi(S) squarefree".into()));
    }
    let params = [("n", 3)];
    match short_zero_sum(s) {
        Some(v) => {
            recheck(s.contains(&v) && v.sum_idx() == 0 && (1..=6).contains(&v.len()), "short zero-sum")?;
            Ok(LemmaReport::new(LemmaId::Sho, &params, Outcome::WitnessFound, 1).with("T", v))
        }
        None => Ok(LemmaReport::new(LemmaId::Sho, &params, Outcome::Violated, 1)),
    }
}

/// Lemma EIMP1: `T | S` with `|T|` in `[3, 4]`, `sigma(T)` in `ker(theta)` and `sigma(T) != 2ke`.
pub fn eimp1_find(s: &Sequence, theta: &Homomorphism, e: &Element, k: u64) -> Result<LemmaReport> {
    let group = s.group();
    let f = group.factors();
    if f.len() != 4 || f[..3] != [2, 2, 2] || !f[3].is_multiple_of(4) {
        return Err(Error::Precondition(format!("{group} is not C_2^3 + C_2n with n even")));
    }
    let n = f[3] / 2;
    if theta.domain() != group || theta.images() != doubling_hom(group)?.images() {
        return Err(Error::Precondition("theta must fix e_1, e_2, e_3 and send e to ne".into()));
    }
    if e.group() != group || e.ord() != 2 * n {
        return Err(Error::Precondition("e must have order 2n".into()));
    }
    if k == 0 || k >= n || gcd(k, n) != 1 {
        return Err(Error::Precondition(format!("k = {k} is not a unit in [1, n-1]")));
    }
    let g = s.indices();
    let img: Vec<usize> = g.iter().map(|&x| theta.apply_idx(x)).collect();
    let mut sorted = img.clone();
    sorted.sort_unstable();
    if g.len() != 8 || sorted.windows(2).any(|w| w[0] == w[1]) || sorted.contains(&0) {
        return Err(Error::Precondition("need |S| = 8 with theta(S) squarefree and 0 not in it".into()));
    }
    let forbidden = e.mul(2 * k).index();
    let params = [("n", n), ("k", k)];
    let mut examined = 0;
    for size in 3..=4u32 {
        for m in 0u32..1 << 8 {
            if m.count_ones() != size {
                continue;
            }
            examined += 1;
            let sum = ones(m).fold(0, |acc, i| group.add_idx(acc, g[i]));
            if theta.apply_idx(sum) == 0 && sum != forbidden {
                let t = Sequence::from_indices(group, &ones(m).map(|i| g[i]).collect::<Vec<_>>());
                recheck(s.contains(&t) && theta.apply_idx(t.sum_idx()) == 0 && t.sum_idx() != forbidden, "T")?;
                return Ok(LemmaReport::new(LemmaId::Eimp1, &params, Outcome::WitnessFound, examined).with("T", t));
            }
        }
    }
    Ok(LemmaReport::new(LemmaId::Eimp1, &params, Outcome::Violated, examined))
}

/// Which of the configurations from the lemmas feeding into LL1 a `(*)`-instance exhibits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Configurations {
    /// Four disjoint pairs with one common `phi`-sum.
    pub four_pairs: bool,
    /// One term whose `phi`-image is the sum of three disjoint pairs.
    pub three_pairs_to_term: bool,
    /// `h_1 = h_2 + h_3 = h_4 + h_5` with `psi(h_3) = psi(h_5) = (n+1)/2 e`.
    pub two_pairs_half_inside: bool,
    /// `h_1 = h_2 + h_3 = h_4 + h_5` with two further terms carrying `(n+1)/2 e`.
    pub two_pairs_half_outside: bool,
}

fn configurations(t: &Terms, ctx: &SplitContext) -> Configurations {
    let m = t.len();
    let half = ctx.n.div_ceil(2) * ctx.e_val() % ctx.n;
    let mut out = Configurations::default();
    // pairs grouped by phi-sum
    let mut by_sum: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..m {
        for j in i + 1..m {
            by_sum.entry(t.phi[i] ^ t.phi[j]).or_default().push((i, j));
        }
    }
    let disjoint = |a: (usize, usize), b: (usize, usize)| a.0 != b.0 && a.0 != b.1 && a.1 != b.0 && a.1 != b.1;
    for (&v, pairs) in &by_sum {
        // pairs with a common sum are automatically disjoint (phi is injective on S)
        if pairs.len() >= 4 {
            out.four_pairs = true;
        }
        for h1 in (0..m).filter(|&i| t.phi[i] == v) {
            let avail: Vec<(usize, usize)> =
                pairs.iter().copied().filter(|&(a, b)| a != h1 && b != h1).collect();
            if avail.len() >= 3 {
                out.three_pairs_to_term = true;
            }
            for (x, &p) in avail.iter().enumerate() {
                for &q in &avail[x + 1..] {
                    debug_assert!(disjoint(p, q));
                    let used = [h1, p.0, p.1, q.0, q.1];
                    // h_3 and h_5 are one member from each pair
                    let inside = [p.0, p.1].iter().any(|&a| t.psi[a] == half)
                        && [q.0, q.1].iter().any(|&b| t.psi[b] == half);
                    if inside {
                        out.two_pairs_half_inside = true;
                    }
                    let outside = (0..m).filter(|i| !used.contains(i) && t.psi[*i] == half).count();
                    if outside >= 2 {
                        out.two_pairs_half_outside = true;
                    }
                }
            }
        }
    }
    out
}

/// Conclusions forced on a length-8 `(*)`-instance; `None` when the instance is consistent.
fn ll1_violation(t: &Terms, ctx: &SplitContext) -> Option<&'static str> {
    let n = ctx.n;
    let e = ctx.e_val();
    let half = n.div_ceil(2) * e % n;
    if t.psi.contains(&half) {
        return Some("(n+1)/2 e lies in supp(psi(S))");
    }
    let c = configurations(t, ctx);
    if c.three_pairs_to_term {
        return Some("(*) holds on a three-pairs-to-one-term configuration");
    }
    if c.two_pairs_half_inside || c.two_pairs_half_outside {
        return Some("(*) holds on a two-pairs configuration carrying (n+1)/2 e");
    }
    if c.four_pairs {
        let want = if n % 4 == 3 { (n + 1) / 4 * e % n } else { (3 * n + 1) / 4 * e % n };
        if t.psi.iter().any(|&p| p != want) {
            return Some("four-pairs configuration without the forced constant psi-support");
        }
    }
    None
}

/// Prop LL1 on one instance: when the hypotheses hold, `(n+1)/2 e` is not in `supp(psi(S))`.
pub fn ll1_check(s: &Sequence, ctx: &SplitContext) -> Result<LemmaReport> {
    let t = ctx.terms(s)?;
    if t.len() != 8 || !t.phi_squarefree() || t.phi.contains(&0) {
        return Err(Error::Precondition("need |S| = 8 with phi(S) squarefree and 0 not in it".into()));
    }
    let masks = phi_zero_masks(&t.phi, 3, 5);
    let params = [("n", ctx.n), ("e", ctx.e_val())];
    if let Err(m) = star_eval(&masks, &t.psi, ctx.e_val(), ctx.n) {
        return Ok(LemmaReport::new(LemmaId::Ll1, &params, Outcome::Vacuous, masks.len() as u64)
            .with("V", t.sub(&ctx.group, m)));
    }
    let half = ctx.n.div_ceil(2) * ctx.e_val() % ctx.n;
    let outcome = if t.psi.contains(&half) { Outcome::Violated } else { Outcome::Holds };
    Ok(LemmaReport::new(LemmaId::Ll1, &params, outcome, masks.len() as u64))
}

// ---------------------------------------------------------------------------
// falsification harness

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Random,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "random" => Ok(Mode::Random),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FalsifyStatus {
    #[serde(rename = "no-counterexample")]
    NoCounterexample,
    #[serde(rename = "counterexample-found")]
    CounterexampleFound,
    #[serde(rename = "budget-exhausted")]
    BudgetExhausted,
}

impl FalsifyStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            FalsifyStatus::NoCounterexample => 0,
            FalsifyStatus::CounterexampleFound => 1,
            FalsifyStatus::BudgetExhausted => 2,
        }
    }
}

/// Outcome of a falsification run; `elapsed_ms` is the only timing field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCertificate {
    pub lemma: LemmaId,
    pub mode: Mode,
    pub params: BTreeMap<String, u64>,
    pub status: FalsifyStatus,
    pub instances: u64,
    pub counterexamples: u64,
    /// Auxiliary counters (instances meeting a rare hypothesis, rejected samples, ...).
    pub counters: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    pub seed: u64,
    pub tool_version: String,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    instances: u64,
    counterexamples: u64,
    first: Option<Value>,
    counters: BTreeMap<String, u64>,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.instances += other.instances;
        self.counterexamples += other.counterexamples;
        if self.first.is_none() {
            self.first = other.first;
        }
        for (k, v) in other.counters {
            *self.counters.entry(k).or_default() += v;
        }
    }

    fn record(&mut self, cex: Option<Value>) {
        self.instances += 1;
        if let Some(c) = cex {
            self.counterexamples += 1;
            if self.first.is_none() {
                self.first = Some(c);
            }
        }
    }

    fn bump(&mut self, key: &str) {
        *self.counters.entry(key.to_string()).or_default() += 1;
    }
}

struct Runner<'a> {
    budget: &'a SearchBudget,
    started: Instant,
    stop: AtomicBool,
    done: AtomicU64,
}

impl<'a> Runner<'a> {
    fn new(budget: &'a SearchBudget) -> Self {
        Runner { budget, started: Instant::now(), stop: AtomicBool::new(false), done: AtomicU64::new(0) }
    }

    fn over_budget(&self) -> bool {
        if self.stop.load(AtomicOrdering::Relaxed) {
            return true;
        }
        let over = self.budget.max_nodes.is_some_and(|m| self.done.load(AtomicOrdering::Relaxed) >= m)
            || self.budget.max_seconds.is_some_and(|s| self.started.elapsed().as_secs() >= s);
        if over {
            self.stop.store(true, AtomicOrdering::Relaxed);
        }
        over
    }

    /// Runs `f` on items `0..count` and merges tallies in item order.
    fn run<F>(&self, count: usize, f: F) -> Result<(Tally, bool)>
    where
        F: Fn(usize) -> Result<Tally> + Sync,
    {
        let one = |i: usize| -> Result<Option<Tally>> {
            if self.over_budget() {
                return Ok(None);
            }
            let t = f(i)?;
            self.done.fetch_add(t.instances, AtomicOrdering::Relaxed);
            Ok(Some(t))
        };
        let parts: Vec<Result<Option<Tally>>> = if self.budget.deterministic || self.budget.workers == 1 {
            (0..count).map(one).collect()
        } else {
            (0..count).into_par_iter().map(one).collect()
        };
        let mut total = Tally::default();
        let mut skipped = false;
        for p in parts {
            match p? {
                Some(t) => total.merge(t),
                None => skipped = true,
            }
        }
        Ok((total, skipped))
    }
}

const CHUNK: u64 = 512;

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn random_chunks<F>(runner: &Runner, samples: u64, seed: u64, f: F) -> Result<(Tally, bool)>
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) -> Result<()> + Sync,
{
    let chunks = samples.div_ceil(CHUNK) as usize;
    runner.run(chunks, |c| {
        let mut rng = chunk_rng(seed, c);
        let mut tally = Tally::default();
        let todo = CHUNK.min(samples - c as u64 * CHUNK);
        for _ in 0..todo {
            f(&mut rng, &mut tally)?;
        }
        Ok(tally)
    })
}

fn c24() -> &'static GroupSpec {
    static G: OnceLock<GroupSpec> = OnceLock::new();
    G.get_or_init(|| GroupSpec::new(&[2, 2, 2, 2]).expect("valid"))
}

/// Orbit representatives of `k`-subsets of `C_2^4` (bit masks over element indices) under
/// its automorphism group; `with_zero` allows 0 in the subsets.
pub fn subset_orbit_reps(k: usize, with_zero: bool) -> Result<Vec<u16>> {
    let auts = automorphisms(c24(), 64)?;
    let mut seen = vec![false; 1 << 16];
    let mut reps = Vec::new();
    for m in 0u32..1 << 16 {
        if m.count_ones() as usize != k || (!with_zero && m & 1 == 1) || seen[m as usize] {
            continue;
        }
        reps.push(m as u16);
        for t in auts.tables() {
            let img = ones(m).fold(0u32, |acc, i| acc | 1 << t[i]);
            seen[img as usize] = true;
        }
    }
    Ok(reps)
}

fn digits(mut x: u64, base: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0; len];
    for d in out.iter_mut().rev() {
        *d = x % base;
        x /= base;
    }
    out
}

fn generators(n: u64) -> Vec<u64> {
    (1..n).filter(|&u| gcd(u, n) == 1).collect()
}

fn sample_distinct(rng: &mut ChaCha8Rng, pool: &[usize], k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = sample(rng, pool.len(), k).into_iter().map(|i| pool[i]).collect();
    v.sort_unstable();
    v
}

fn seq_json(s: &Sequence) -> Value {
    serde_json::to_value(s.to_json()).expect("serializable")
}

fn get_param(params: &BTreeMap<String, u64>, key: &str, default: u64) -> u64 {
    params.get(key).copied().unwrap_or(default)
}

fn check_keys(params: &BTreeMap<String, u64>, allowed: &[&str]) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Precondition(format!("unsupported parameter {k:?}")));
        }
    }
    Ok(())
}

fn unsupported(msg: &str) -> Error {
    Error::Precondition(msg.to_string())
}

fn multisets(alphabet: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut cur = vec![0usize; len];
    if len == 0 {
        f(&cur);
        return;
    }
    loop {
        f(&cur);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cur[i] + 1 < alphabet {
                let v = cur[i] + 1;
                for c in cur[i..].iter_mut() {
                    *c = v;
                }
                break;
            }
        }
    }
}

/// Searches the hypothesis space of `lemma` for counterexamples.
///
/// `params` keys: `n` (and `r` for SUPP_P1), `samples` in random mode. In random mode the
/// sample stream is split into fixed chunks seeded from `seed`, so results do not depend on
/// the worker count. `budget.max_nodes` caps the number of instances.
pub fn falsify(
    lemma: LemmaId,
    params: &BTreeMap<String, u64>,
    mode: Mode,
    seed: u64,
    budget: &SearchBudget,
) -> Result<LemmaCertificate> {
    let runner = Runner::new(budget);
    let samples = get_param(params, "samples", 10_000);
    let mut used: BTreeMap<String, u64> = BTreeMap::new();
    let (tally, skipped) = match lemma {
        LemmaId::Star => return Err(unsupported("STAR is a checker, not a registered lemma")),
        LemmaId::Cyclic1 => {
            check_keys(params, &["n", "samples"])?;
            let n_max = get_param(params, "n", 12);
            if !(2..=14).contains(&n_max) {
                return Err(unsupported("CYCLIC_1 needs 2 <= n <= 14"));
            }
            used.insert("n".into(), n_max);
            let check = |cn: &GroupSpec, idx: &[usize]| -> Option<Value> {
                let s = Sequence::from_indices(cn, idx);
                let free = !has_nonempty_zero_sum(&s);
                let sup = s.support_idx();
                let form = sup.len() == 1 && cn.ord_idx(sup[0]) == cn.order() as u64;
                (free != form).then(|| json!({"sequence": seq_json(&s), "free": free}))
            };
            match mode {
                Mode::Exhaustive => runner.run((n_max - 1) as usize, |i| {
                    let n = i as u64 + 2;
                    let cn = GroupSpec::cyclic(n)?;
                    let mut t = Tally::default();
                    multisets(n as usize, (n - 1) as usize, |idx| t.record(check(&cn, idx)));
                    Ok(t)
                })?,
                Mode::Random => {
                    used.insert("samples".into(), samples);
                    random_chunks(&runner, samples, seed, |rng, t| {
                        let n = rng.gen_range(2..=n_max);
                        let cn = GroupSpec::cyclic(n)?;
                        // bias towards single-element supports so both sides get exercised
                        let idx: Vec<usize> = if rng.gen_bool(0.5) {
                            vec![rng.gen_range(0..n as usize); (n - 1) as usize]
                        } else {
                            (0..n - 1).map(|_| rng.gen_range(0..n as usize)).collect()
                        };
                        t.record(check(&cn, &idx));
                        Ok(())
                    })?
                }
            }
        }
        LemmaId::Cyclic3 => {
            check_keys(params, &["n", "samples"])?;
            let n_max = get_param(params, "n", 8);
            if !(2..=9).contains(&n_max) {
                return Err(unsupported("CYCLIC_3 needs 2 <= n <= 9"));
            }
            used.insert("n".into(), n_max);
            let check = |cn: &GroupSpec, idx: &[usize]| -> Result<Option<Value>> {
                let s = Sequence::from_indices(cn, idx);
                let n = cn.order();
                let avoids = !has_zero_sum_of_length(&s, n)?;
                let sup = s.support_idx();
                let form = sup.len() == 2
                    && sup.iter().all(|&g| s.multiplicity_idx(g) as usize == n - 1)
                    && cn.ord_idx(cn.sub_idx(sup[0], sup[1])) == n as u64;
                Ok((avoids != form).then(|| json!({"sequence": seq_json(&s), "avoids": avoids})))
            };
            match mode {
                Mode::Exhaustive => runner.run((n_max - 1) as usize, |i| {
                    let n = i + 2;
                    let cn = GroupSpec::cyclic(n as u64)?;
                    let mut t = Tally::default();
                    let mut err = None;
                    multisets(n, 2 * n - 2, |idx| match check(&cn, idx) {
                        Ok(c) => t.record(c),
                        Err(e) => err = Some(e),
                    });
                    err.map_or(Ok(t), Err)
                })?,
                Mode::Random => {
                    used.insert("samples".into(), samples);
                    random_chunks(&runner, samples, seed, |rng, t| {
                        let n = rng.gen_range(2..=n_max) as usize;
                        let cn = GroupSpec::cyclic(n as u64)?;
                        let idx: Vec<usize> = if rng.gen_bool(0.5) {
                            let g = rng.gen_range(0..n);
                            let h = rng.gen_range(0..n);
                            [vec![g; n - 1], vec![h; n - 1]].concat()
                        } else {
                            (0..2 * n - 2).map(|_| rng.gen_range(0..n)).collect()
                        };
                        t.record(check(&cn, &idx)?);
                        Ok(())
                    })?
                }
            }
        }
        LemmaId::Sum => {
            check_keys(params, &["samples"])?;
            let g = c24();
            let check = |mask: u32, w: usize| -> Option<Value> {
                let wset = Sequence::from_indices(g, &ones(mask).collect::<Vec<_>>());
                let we = g.element_at(w);
                let fail = |why: &str| Some(json!({"W": seq_json(&wset), "w": we.residues(), "reason": why}));
                match sum_pairs(&wset, &we) {
                    Err(e) => fail(&e.to_string()),
                    Ok(pairs) => {
                        let mut used_terms = 0u32;
                        for p in &pairs {
                            let ix = p.indices();
                            if ix.len() != 2 || p.sum_idx() != w || ix.iter().any(|&x| mask >> x & 1 == 0 || x == w) {
                                return fail("pair not inside W w^-1 or wrong sum");
                            }
                            for x in ix {
                                if used_terms >> x & 1 == 1 {
                                    return fail("pairs overlap");
                                }
                                used_terms |= 1 << x;
                            }
                        }
                        (pairs.len() + 8 < wset.len()).then(|| json!({"W": seq_json(&wset), "w": we.residues(), "reason": "too few pairs"}))
                    }
                }
            };
            match mode {
                Mode::Exhaustive => {
                    let masks: Vec<u32> = (0u32..1 << 16)
                        .filter(|m| m & 1 == 0 && m.count_ones() >= 9)
                        .collect();
                    runner.run(masks.len(), |i| {
                        let mut t = Tally::default();
                        for w in ones(masks[i]) {
                            t.record(check(masks[i], w));
                        }
                        Ok(t)
                    })?
                }
                Mode::Random => {
                    used.insert("samples".into(), samples);
                    let pool: Vec<usize> = (1..16).collect();
                    random_chunks(&runner, samples, seed, |rng, t| {
                        let k = rng.gen_range(9..=15);
                        let chosen = sample_distinct(rng, &pool, k);
                        let mask = chosen.iter().fold(0u32, |m, &x| m | 1 << x);
                        let w = chosen[rng.gen_range(0..k)];
                        t.record(check(mask, w));
                        Ok(())
                    })?
                }
            }
        }
        LemmaId::SuppP1 => {
            check_keys(params, &["r", "n", "samples"])?;
            let r = get_param(params, "r", 3) as usize;
            let n = get_param(params, "n", 3);
            if !(3..=5).contains(&r) || n < 3 || n.is_multiple_of(2) {
                return Err(unsupported("SUPP_P1 needs 3 <= r <= 5 and odd n >= 3"));
            }
            used.insert("r".into(), r as u64);
            used.insert("n".into(), n);
            let ctx = SplitContext::new(r, n, 1)?;
            let m = (1usize << r) - 1;
            let check = |psi: &[u64], t: &mut Tally| -> Result<()> {
                let idx: Vec<usize> = (1..=m).map(|h| ctx.lift(h, psi[h - 1])).collect();
                let s = Sequence::from_indices(&ctx.group, &idx);
                let rep = p1_check(&s, &ctx)?;
                if rep.outcome == Outcome::Holds {
                    t.bump("p1_holds");
                }
                t.record((rep.outcome == Outcome::Violated).then(|| rep.to_json()));
                Ok(())
            };
            match mode {
                Mode::Exhaustive => {
                    let space = (n as u128).pow(m as u32);
                    if space > 20_000_000 {
                        return Err(unsupported("SUPP_P1 exhaustive space too large; use random mode"));
                    }
                    let per = (space / n as u128) as u64;
                    runner.run(n as usize, |first| {
                        let mut t = Tally::default();
                        for x in 0..per {
                            let mut psi = digits(x, n, m);
                            psi[0] = first as u64;
                            check(&psi, &mut t)?;
                        }
                        Ok(t)
                    })?
                }
                Mode::Random => {
                    used.insert("samples".into(), samples);
                    random_chunks(&runner, samples, seed, |rng, t| {
                        // constant assignment with up to three perturbed positions
                        let c = rng.gen_range(0..n);
                        let mut psi = vec![c; m];
                        for _ in 0..rng.gen_range(0..=3) {
                            let i = rng.gen_range(0..m);
                            psi[i] = rng.gen_range(0..n);
                        }
                        check(&psi, t)
                    })?
                }
            }
        }
        LemmaId::Imp => {
            check_keys(params, &["n", "samples"])?;
            let n = get_param(params, "n", 3);
            if n < 3 || n.is_multiple_of(2) {
                return Err(unsupported("IMP needs odd n >= 3"));
            }
            used.insert("n".into(), n);
            let ctx = SplitContext::new(4, n, 1)?;
            let check = |phis: &[usize], psi: &[u64], t: &mut Tally| -> Result<()> {
                let idx: Vec<usize> = phis.iter().zip(psi).map(|(&h, &k)| ctx.lift(h, k)).collect();
                let s = Sequence::from_indices(&ctx.group, &idx);
                let rep = imp_find(&s, &ctx)?;
                if rep.evidence_for("V").is_some() {
                    t.bump("zero_sum_outcome");
                }
                t.record((rep.outcome == Outcome::Violated).then(|| json!({"sequence": seq_json(&s)})));
                Ok(())
            };
            match mode {
                Mode::Exhaustive => {
                    if n != 3 {
                        return Err(unsupported("IMP exhaustive mode is limited to n = 3"));
                    }
                    let reps = subset_orbit_reps(10, false)?;
                    let prefixes = 9usize;
                    runner.run(reps.len() * prefixes, |item| {
                        let phis: Vec<usize> = ones(reps[item / prefixes] as u32).collect();
                        let p = digits((item % prefixes) as u64, 3, 2);
                        let mut t = Tally::default();
                        for x in 0..3u64.pow(8) {
                            let psi = [p.clone(), digits(x, 3, 8)].concat();
                            check(&phis, &psi, &mut t)?;
                        }
                        Ok(t)
                    })?
                }
                Mode::Random => {
                    used.insert("samples".into(), samples);
                    let pool: Vec<usize> = (1..16).collect();
                    random_chunks(&runner, samples, seed, |rng, t| {
                        let phis = sample_distinct(rng, &pool, 10);
                        let psi: Vec<u64> = (0..10).map(|_| rng.gen_range(0..n)).collect();
                        check(&phis, &psi, t)?;
                        Ok(())
                    })?
                }
            }
        }
        LemmaId::Sho => {
            check_keys(params, &["samples"])?;
            used.insert("n".into(), 3);
            let ctx = SplitContext::new(4, 3, 1)?;
            match mode {
                Mode::Exhaustive => {
                    let reps = subset_orbit_reps(12, true)?;
                    let prefixes = 27usize;
                    runner.run(reps.len() * prefixes, |item| {
                        let phis: Vec<usize> = ones(reps[item / prefixes] as u32).collect();
                        let masks = phi_zero_masks(&phis, 1, 6);
                        let p = digits((item % prefixes) as u64, 3, 3);
                        let mut t = Tally::default();
                        for x in 0..3u64.pow(9) {
                            let psi = [p.clone(), digits(x, 3, 9)].concat();
                            let found = masks.iter().any(|&m| ones(m).map(|i| psi[i]).sum::<u64>() % 3 == 0);
                            t.record((!found).then(|| {
                                let idx: Vec<usize> = phis.iter().zip(&psi).map(|(&h, &k)| ctx.lift(h, k)).collect();
                                json!({"sequence": seq_json(&Sequence::from_indices(&ctx.group, &idx))})
                            }));
                        }
                        Ok(t)
                    })?
                }
                Mode::Random => {
                    used.insert("samples".into(), samples);
                    let pool: Vec<usize> = (0..16).collect();
                    random_chunks(&runner, samples, seed, |rng, t| {
                        let phis = sample_distinct(rng, &pool, 12);
                        let psi: Vec<u64> = (0..12).map(|_| rng.gen_range(0..3)).collect();
                        let idx: Vec<usize> = phis.iter().zip(&psi).map(|(&h, &k)| ctx.lift(h, k)).collect();
                        let s = Sequence::from_indices(&ctx.group, &idx);
                        let rep = sho_check(&s, &ctx)?;
                        // second opinion from the phi-zero-sum masks
                        let masks = phi_zero_masks(&phis, 1, 6);
                        let by_masks = masks.iter().any(|&m| ones(m).map(|i| psi[i]).sum::<u64>() % 3 == 0);
                        let agree = by_masks == (rep.outcome == Outcome::WitnessFound);
                        if !agree {
                            return Err(Error::Internal(format!("SHO oracles disagree on {s:?}")));
                        }
                        t.record((rep.outcome == Outcome::Violated).then(|| json!({"sequence": seq_json(&s)})));
                        Ok(())
                    })?
                }
            }
        }
        LemmaId::StarXx1 | LemmaId::Ll1 => {
            check_keys(params, &["n", "samples"])?;
            let n = get_param(params, "n", 3);
            if n < 3 || n.is_multiple_of(2) {
                return Err(unsupported("the (*) family needs odd n >= 3"));
            }
            used.insert("n".into(), n);
            let len = if lemma == LemmaId::StarXx1 { 9 } else { 8 };
            let ctx = SplitContext::new(4, n, 1)?;
            let gens = generators(n);
            // one instance per (S, e); counterexample when the lemma's conclusion fails
            let judge = |phis: &[usize], psi: &[u64], masks: &[u32], public: bool, t: &mut Tally| -> Result<()> {
                t.bump("sequences");
                for &e in &gens {
                    let holds = star_eval(masks, psi, e, n).is_ok();
                    if public {
                        let idx: Vec<usize> = phis.iter().zip(psi).map(|(&h, &k)| ctx.lift(h, k)).collect();
                        let s = Sequence::from_indices(&ctx.group, &idx);
                        let rep = star_check(&s, &ctx.with_e(e)?)?;
                        if holds != (rep.outcome != Outcome::Violated) {
                            return Err(Error::Internal(format!("(*) evaluations disagree on {s:?}")));
                        }
                    }
                    let cex = if lemma == LemmaId::StarXx1 {
                        holds
                    } else if holds {
                        t.bump("star_instances");
                        let terms = Terms { g: Vec::new(), phi: phis.to_vec(), psi: psi.to_vec() };
                        ll1_violation(&terms, &ctx.with_e(e).expect("valid e")).is_some()
                    } else {
                        false
                    };
                    t.record(cex.then(|| {
                        let idx: Vec<usize> = phis.iter().zip(psi).map(|(&h, &k)| ctx.lift(h, k)).collect();
                        json!({"sequence": seq_json(&Sequence::from_indices(&ctx.group, &idx)), "e": e})
                    }));
                }
                Ok(())
            };
            match mode {
                Mode::Exhaustive => {
                    let space = (n as u128).pow(len as u32);
                    if space > 2_000_000 {
                        return Err(unsupported("exhaustive (*) search is limited to n^|S| <= 2e6"));
                    }
                    let reps = subset_orbit_reps(len, false)?;
                    let prefixes = (n * n) as usize;
                    let per = (space / prefixes as u128) as u64;
                    runner.run(reps.len() * prefixes, |item| {
                        let phis: Vec<usize> = ones(reps[item / prefixes] as u32).collect();
                        let masks = phi_zero_masks(&phis, 3, 5);
                        let p = digits((item % prefixes) as u64, n, 2);
                        let mut t = Tally::default();
                        for x in 0..per {
                            let psi = [p.clone(), digits(x, n, len - 2)].concat();
                            judge(&phis, &psi, &masks, false, &mut t)?;
                        }
                        Ok(t)
                    })?
                }
                Mode::Random => {
                    used.insert("samples".into(), samples);
                    let pool: Vec<usize> = (1..16).collect();
                    random_chunks(&runner, samples, seed, |rng, t| {
                        let phis = sample_distinct(rng, &pool, len);
                        let psi: Vec<u64> = (0..len).map(|_| rng.gen_range(0..n)).collect();
                        let masks = phi_zero_masks(&phis, 3, 5);
                        judge(&phis, &psi, &masks, true, t)
                    })?
                }
            }
        }
        LemmaId::Eimp1 => {
            check_keys(params, &["n", "samples"])?;
            let n = get_param(params, "n", 2);
            if n < 2 || n % 2 == 1 || 2 * n > 64 {
                return Err(unsupported("EIMP1 needs even n with 2 <= n <= 32"));
            }
            used.insert("n".into(), n);
            let g = GroupSpec::new(&[2, 2, 2, 2 * n])?;
            let theta = doubling_hom(&g)?;
            let e = g.basis(3);
            let units = generators(n);
            // theta-class (a, b, c, p) lifts to (a, b, c, p + 2j)
            let lift = |class: usize, j: u64| -> usize {
                let (a, b, c, p) = ((class >> 3) & 1, (class >> 2) & 1, (class >> 1) & 1, class & 1);
                g.index_of_residues(&[a as u64, b as u64, c as u64, p as u64 + 2 * j])
            };
            let check = |idx: &[usize], t: &mut Tally| -> Result<()> {
                let s = Sequence::from_indices(&g, idx);
                for &k in &units {
                    let rep = eimp1_find(&s, &theta, &e, k)?;
                    t.record((rep.outcome == Outcome::Violated).then(|| json!({"sequence": seq_json(&s), "k": k})));
                }
                Ok(())
            };
            match mode {
                Mode::Exhaustive => {
                    let lifts = n.pow(8);
                    if lifts > 1 << 16 {
                        return Err(unsupported("EIMP1 exhaustive mode is limited to n = 2"));
                    }
                    let classes: Vec<u32> =
                        (0u32..1 << 16).filter(|m| m & 1 == 0 && m.count_ones() == 8).collect();
                    runner.run(classes.len(), |i| {
                        let cls: Vec<usize> = ones(classes[i]).collect();
                        let mut t = Tally::default();
                        for x in 0..lifts {
                            let js = digits(x, n, 8);
                            let idx: Vec<usize> = cls.iter().zip(&js).map(|(&c, &j)| lift(c, j)).collect();
                            check(&idx, &mut t)?;
                        }
                        Ok(t)
                    })?
                }
                Mode::Random => {
                    used.insert("samples".into(), samples);
                    let pool: Vec<usize> = (1..16).collect();
                    random_chunks(&runner, samples, seed, |rng, t| {
                        let cls = sample_distinct(rng, &pool, 8);
                        let idx: Vec<usize> = cls.iter().map(|&c| lift(c, rng.gen_range(0..n))).collect();
                        check(&idx, t)
                    })?
                }
            }
        }
    };
    let status = if tally.counterexamples > 0 {
        FalsifyStatus::CounterexampleFound
    } else if skipped {
        FalsifyStatus::BudgetExhausted
    } else {
        FalsifyStatus::NoCounterexample
    };
    Ok(LemmaCertificate {
        lemma,
        mode,
        params: used,
        status,
        instances: tally.instances,
        counterexamples: tally.counterexamples,
        counters: tally.counters,
        counterexample: tally.first,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        elapsed_ms: runner.started.elapsed().as_millis() as u64,
    })
}
