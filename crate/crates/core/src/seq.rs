//! Sequences (finite multisets) over a group and the subsequence-sum oracle.
//!
//! [`ReachTable`] answers every zero-sum question in the crate: cell
//! `(len, g)` is set iff some subsequence of exactly `len` terms sums to `g`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abelian::{Element, GroupSpec, Homomorphism};
use crate::error::{Error, Result};

/// A finite multiset over a group, keyed by element index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    group: GroupSpec,
    counts: BTreeMap<usize, u32>,
    len: usize,
    sum: usize,
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seq[{}](", self.group)?;
        let mut first = true;
        for (&g, &c) in &self.counts {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{:?}", self.group.residues_of(g))?;
            if c > 1 {
                write!(f, "^{c}")?;
            }
        }
        write!(f, ")")
    }
}

impl Sequence {
    pub fn empty(group: &GroupSpec) -> Self {
        Sequence { group: group.clone(), counts: BTreeMap::new(), len: 0, sum: 0 }
    }

    pub fn from_elements(group: &GroupSpec, elements: &[Element]) -> Result<Self> {
        let mut s = Self::empty(group);
        for e in elements {
            if e.group() != group {
                return Err(Error::GroupMismatch { left: e.group().to_string(), right: group.to_string() });
            }
            s.push_idx(e.index(), 1);
        }
        Ok(s)
    }

    /// Indices must be valid for `group`.
    pub fn from_indices(group: &GroupSpec, indices: &[usize]) -> Self {
        let mut s = Self::empty(group);
        for &i in indices {
            s.push_idx(i, 1);
        }
        s
    }

    pub fn from_counts(group: &GroupSpec, counts: &[(usize, u32)]) -> Self {
        let mut s = Self::empty(group);
        for &(i, c) in counts {
            s.push_idx(i, c);
        }
        s
    }

    pub(crate) fn push_idx(&mut self, idx: usize, mult: u32) {
        assert!(idx < self.group.order(), "element index out of range");
        if mult == 0 {
            return;
        }
        *self.counts.entry(idx).or_insert(0) += mult;
        self.len += mult as usize;
        self.sum = self.group.add_idx(self.sum, self.group.mul_idx(mult as u64, idx));
    }

    pub fn push(&mut self, e: &Element, mult: u32) -> Result<()> {
        if e.group() != &self.group {
            return Err(Error::GroupMismatch { left: e.group().to_string(), right: self.group.to_string() });
        }
        self.push_idx(e.index(), mult);
        Ok(())
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sum(&self) -> Element {
        self.group.element_at(self.sum)
    }

    pub fn sum_idx(&self) -> usize {
        self.sum
    }

    /// `(index, multiplicity)` pairs in ascending index order.
    pub fn counts(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts.iter().map(|(&g, &c)| (g, c))
    }

    pub fn multiplicity_idx(&self, idx: usize) -> u32 {
        self.counts.get(&idx).copied().unwrap_or(0)
    }

    pub fn multiplicity(&self, e: &Element) -> u32 {
        self.multiplicity_idx(e.index())
    }

    pub fn support(&self) -> Vec<Element> {
        self.counts.keys().map(|&g| self.group.element_at(g)).collect()
    }

    pub fn support_idx(&self) -> Vec<usize> {
        self.counts.keys().copied().collect()
    }

    /// Terms with repetition, ascending by index.
    pub fn indices(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.len);
        for (&g, &c) in &self.counts {
            v.extend(std::iter::repeat_n(g, c as usize));
        }
        v
    }

    pub fn elements(&self) -> Vec<Element> {
        self.indices().into_iter().map(|g| self.group.element_at(g)).collect()
    }

    pub fn is_squarefree(&self) -> bool {
        self.counts.values().all(|&c| c == 1)
    }

    /// `other | self`.
    pub fn contains(&self, other: &Sequence) -> bool {
        other.group == self.group
            && other.counts.iter().all(|(g, &c)| self.multiplicity_idx(*g) >= c)
    }

    fn check_group(&self, other: &GroupSpec) -> Result<()> {
        if &self.group != other {
            return Err(Error::GroupMismatch { left: self.group.to_string(), right: other.to_string() });
        }
        Ok(())
    }

    pub fn concat(&self, other: &Sequence) -> Result<Sequence> {
        self.check_group(&other.group)?;
        let mut s = self.clone();
        for (g, c) in other.counts() {
            s.push_idx(g, c);
        }
        Ok(s)
    }

    /// `self * other^{-1}`; requires `other | self`.
    pub fn minus(&self, other: &Sequence) -> Result<Sequence> {
        self.check_group(&other.group)?;
        if !self.contains(other) {
            return Err(Error::NotSubsequence);
        }
        let mut s = Sequence::empty(&self.group);
        for (g, c) in self.counts() {
            s.push_idx(g, c - other.multiplicity_idx(g));
        }
        Ok(s)
    }

    /// `g0 + S`, translating every term.
    pub fn translate(&self, g0: &Element) -> Result<Sequence> {
        self.check_group(g0.group())?;
        let t = g0.index();
        let mut s = Sequence::empty(&self.group);
        for (g, c) in self.counts() {
            s.push_idx(self.group.add_idx(g, t), c);
        }
        Ok(s)
    }

    /// Termwise image under a homomorphism.
    pub fn map(&self, h: &Homomorphism) -> Result<Sequence> {
        self.check_group(h.domain())?;
        let mut s = Sequence::empty(h.codomain());
        for (g, c) in self.counts() {
            s.push_idx(h.apply_idx(g), c);
        }
        Ok(s)
    }

    /// Recomputes the sum from the multiplicities.
    pub fn recomputed_sum(&self) -> usize {
        self.counts()
            .fold(0, |acc, (g, c)| self.group.add_idx(acc, self.group.mul_idx(c as u64, g)))
    }
}

/// Set of all nonempty subsums `Sigma(S)`.
pub fn subsums(s: &Sequence) -> Vec<Element> {
    let set = subsum_bits(s);
    set.iter_ones().map(|g| s.group.element_at(g)).collect()
}

/// Nonempty subsums as a bitset, computed with a single-layer DP.
pub(crate) fn subsum_bits(s: &Sequence) -> BitSet {
    let group = &s.group;
    let mut reach = BitSet::new(group.order());
    let mut tr = Translator::new(group);
    for g in s.indices() {
        let mut next = reach.clone();
        tr.or_translate(&reach.words, g, &mut next.words);
        next.set(g);
        reach = next;
    }
    reach
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub(crate) fn new(bits: usize) -> Self {
        BitSet { words: vec![0; bits.div_ceil(64).max(1)] }
    }

    pub(crate) fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub(crate) fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Translates element sets; word-level lookup for groups of order <= 64.
struct Translator<'a> {
    group: &'a GroupSpec,
    lut: Option<&'a [u64]>,
    perms: HashMap<usize, Vec<u32>>,
}

impl<'a> Translator<'a> {
    fn new(group: &'a GroupSpec) -> Self {
        Translator { group, lut: group.small_lut(), perms: HashMap::new() }
    }

    /// `dst |= src + g`.
    fn or_translate(&mut self, src: &[u64], g: usize, dst: &mut [u64]) {
        if let Some(lut) = self.lut {
            let w = src[0];
            let mut out = 0;
            for byte in 0..8 {
                let v = (w >> (8 * byte)) & 0xff;
                if v != 0 {
                    out |= lut[(g * 8 + byte) * 256 + v as usize];
                }
            }
            dst[0] |= out;
            return;
        }
        let group = self.group;
        let perm = self.perms.entry(g).or_insert_with(|| group.translation(g));
        for (wi, &w) in src.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                let y = perm[wi * 64 + b] as usize;
                dst[y / 64] |= 1 << (y % 64);
            }
        }
    }
}

/// Boolean table `bits[len][g]` of subsequence sums by exact length.
///
/// Lengths above `cap` are not tracked. Every `push` snapshots the previous
/// layers, which gives both `pop` and witness backtracking.
pub struct ReachTable {
    group: GroupSpec,
    cap: usize,
    words: usize,
    layers: Vec<u64>,
    pushed: Vec<usize>,
    history: Vec<Vec<u64>>,
    perms: HashMap<usize, Vec<u32>>,
}

impl fmt::Debug for ReachTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReachTable")
            .field("group", &self.group)
            .field("len", &self.pushed.len())
            .field("cap", &self.cap)
            .finish()
    }
}

impl ReachTable {
    /// Empty table; `cap = None` tracks every length.
    pub fn new(group: &GroupSpec, cap: Option<usize>) -> Self {
        let words = group.order().div_ceil(64).max(1);
        let mut layers = vec![0u64; words];
        layers[0] = 1;
        ReachTable {
            group: group.clone(),
            cap: cap.unwrap_or(usize::MAX),
            words,
            layers,
            pushed: Vec::new(),
            history: Vec::new(),
            perms: HashMap::new(),
        }
    }

    pub fn build(s: &Sequence, cap: Option<usize>) -> Self {
        let mut t = Self::new(&s.group, cap);
        for g in s.indices() {
            t.push(g);
        }
        t
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// Number of terms pushed.
    pub fn len(&self) -> usize {
        self.pushed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pushed.is_empty()
    }

    pub fn cap(&self) -> Option<usize> {
        (self.cap != usize::MAX).then_some(self.cap)
    }

    fn tracked(&self) -> usize {
        self.layers.len() / self.words - 1
    }

    pub fn push(&mut self, g: usize) {
        assert!(g < self.group.order(), "element index out of range");
        self.history.push(self.layers.clone());
        let w = self.words;
        if self.tracked() < self.cap && self.tracked() < self.pushed.len() + 1 {
            self.layers.extend(std::iter::repeat_n(0, w));
        }
        let top = self.tracked();
        let lut = self.group.small_lut();
        for len in (1..=top).rev() {
            let (lo, hi) = self.layers.split_at_mut(len * w);
            let src = &lo[(len - 1) * w..];
            let dst = &mut hi[..w];
            if let Some(lut) = lut {
                let x = src[0];
                let mut out = 0;
                for byte in 0..8 {
                    let v = (x >> (8 * byte)) & 0xff;
                    if v != 0 {
                        out |= lut[(g * 8 + byte) * 256 + v as usize];
                    }
                }
                dst[0] |= out;
            } else {
                let group = &self.group;
                let perm = self.perms.entry(g).or_insert_with(|| group.translation(g));
                for (wi, &x) in src.iter().enumerate() {
                    let mut x = x;
                    while x != 0 {
                        let b = x.trailing_zeros() as usize;
                        x &= x - 1;
                        let y = perm[wi * 64 + b] as usize;
                        dst[y / 64] |= 1 << (y % 64);
                    }
                }
            }
        }
        self.pushed.push(g);
    }

    pub fn pop(&mut self) -> Option<usize> {
        let g = self.pushed.pop()?;
        self.layers = self.history.pop().expect("history tracks pushes");
        Some(g)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len > self.cap {
            return Err(Error::LengthOutOfRange { len, max: self.cap });
        }
        Ok(())
    }

    /// Whether some subsequence of exactly `len` terms sums to element index `g`.
    pub fn get(&self, len: usize, g: usize) -> Result<bool> {
        self.check_len(len)?;
        if len > self.tracked() {
            return Ok(false);
        }
        let w = self.words;
        Ok(self.layers[len * w + g / 64] >> (g % 64) & 1 == 1)
    }

    /// Elements reachable with exactly `len` terms.
    pub fn layer(&self, len: usize) -> Result<Vec<usize>> {
        self.check_len(len)?;
        if len > self.tracked() {
            return Ok(Vec::new());
        }
        let w = self.words;
        let bs = BitSet { words: self.layers[len * w..(len + 1) * w].to_vec() };
        Ok(bs.iter_ones().collect())
    }

    /// Union of all tracked layers of length >= 1.
    pub fn nonempty_sums(&self) -> Vec<usize> {
        let w = self.words;
        let mut acc = vec![0u64; w];
        for len in 1..=self.tracked() {
            for (a, &x) in acc.iter_mut().zip(&self.layers[len * w..(len + 1) * w]) {
                *a |= x;
            }
        }
        BitSet { words: acc }.iter_ones().collect()
    }

    /// Extracts a subsequence of exactly `len` terms summing to `target`, re-verified by summation.
    pub fn witness(&self, target: usize, len: usize) -> Result<Option<Sequence>> {
        if !self.get(len, target)? {
            return Ok(None);
        }
        let w = self.words;
        let (mut l, mut t) = (len, target);
        let mut picked = Vec::with_capacity(len);
        for i in (0..self.pushed.len()).rev() {
            if l == 0 {
                break;
            }
            let before = &self.history[i];
            let before_tracked = before.len() / w - 1;
            let in_before = l <= before_tracked && before[l * w + t / 64] >> (t % 64) & 1 == 1;
            if !in_before {
                let p = self.pushed[i];
                picked.push(p);
                t = self.group.sub_idx(t, p);
                l -= 1;
            }
        }
        let found = Sequence::from_indices(&self.group, &picked);
        let source = Sequence::from_indices(&self.group, &self.pushed);
        if l != 0 || t != 0 || found.len() != len || found.recomputed_sum() != target || !source.contains(&found) {
            return Err(Error::Internal(format!(
                "witness backtracking produced an invalid subsequence for target {target}, length {len}"
            )));
        }
        Ok(Some(found))
    }
}

pub fn reach_table(s: &Sequence) -> ReachTable {
    ReachTable::build(s, None)
}

pub fn has_zero_sum_of_length(s: &Sequence, len: usize) -> Result<bool> {
    if len > s.len() {
        return Err(Error::LengthOutOfRange { len, max: s.len() });
    }
    ReachTable::build(s, Some(len)).get(len, 0)
}

/// Zero-sum subsequence of length in `[1, exp(G)]`.
pub fn has_short_zero_sum(s: &Sequence) -> bool {
    short_zero_sum(s).is_some()
}

pub fn short_zero_sum(s: &Sequence) -> Option<Sequence> {
    let exp = s.group.exponent() as usize;
    let t = ReachTable::build(s, Some(exp));
    (1..=exp.min(s.len())).find_map(|l| t.witness(0, l).expect("length within cap"))
}

pub fn has_nonempty_zero_sum(s: &Sequence) -> bool {
    subsum_bits(s).get(0)
}

/// A zero-sum (or target-sum) subsequence found by the oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroSumWitness {
    pub subsequence: Sequence,
    pub length: usize,
    pub sum: Element,
}

/// Subsequence of `s` with exactly `len` terms summing to `target`, if any.
pub fn witness_extract(s: &Sequence, target: &Element, len: usize) -> Result<Option<ZeroSumWitness>> {
    if target.group() != s.group() {
        return Err(Error::GroupMismatch { left: target.group().to_string(), right: s.group.to_string() });
    }
    if len > s.len() {
        return Ok(None);
    }
    let t = ReachTable::build(s, Some(len));
    Ok(t.witness(target.index(), len)?.map(|sub| ZeroSumWitness {
        length: sub.len(),
        sum: sub.sum(),
        subsequence: sub,
    }))
}

// ---------------------------------------------------------------------------
// JSON and text formats

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ElementCount {
    pub elem: Vec<u64>,
    pub mult: u32,
}

/// Metadata attached to emitted constructions.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConstructionTag {
    pub name: String,
    pub params: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SequenceJson {
    pub group: GroupSpec,
    pub elements: Vec<ElementCount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionTag>,
}

impl Sequence {
    pub fn to_json(&self) -> SequenceJson {
        SequenceJson {
            group: self.group.clone(),
            elements: self
                .counts()
                .map(|(g, c)| ElementCount { elem: self.group.residues_of(g), mult: c })
                .collect(),
            construction: None,
        }
    }

    pub fn from_json(j: &SequenceJson) -> Result<Sequence> {
        let mut s = Sequence::empty(&j.group);
        for ec in &j.elements {
            let e = j.group.elem(&ec.elem)?;
            s.push_idx(e.index(), ec.mult);
        }
        Ok(s)
    }

    /// Parses either the JSON format or flat text (one comma-separated element per line).
    ///
    /// Flat text needs the group either from `group` or from a `# group: 2,2,4` line.
    pub fn parse(text: &str, group: Option<&GroupSpec>) -> Result<Sequence> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let j: SequenceJson = serde_json::from_str(trimmed)?;
            if let Some(g) = group {
                if g != &j.group {
                    return Err(Error::GroupMismatch { left: g.to_string(), right: j.group.to_string() });
                }
            }
            return Sequence::from_json(&j);
        }
        let mut group = group.cloned();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if let Some(f) = c.trim().strip_prefix("group:") {
                    if group.is_none() {
                        group = Some(GroupSpec::new(&parse_list(f)?)?);
                    }
                }
                continue;
            }
            rows.push(parse_list(line)?);
        }
        let group = group.ok_or_else(|| Error::Parse("flat sequence needs a group".into()))?;
        let mut s = Sequence::empty(&group);
        for r in rows {
            let e = group.elem(&r)?;
            s.push_idx(e.index(), 1);
        }
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# group: {}\n",
            self.group.factors().iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",")
        );
        for g in self.indices() {
            let r: Vec<String> = self.group.residues_of(g).iter().map(|x| x.to_string()).collect();
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parses `"2,2,4"` (whitespace tolerant).
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<u64>().map_err(|e| Error::Parse(format!("{x:?}: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(f: &[u64]) -> GroupSpec {
        GroupSpec::new(f).unwrap()
    }

    /// Exhaustive subset enumeration over the term list.
    fn brute_table(s: &Sequence) -> Vec<Vec<bool>> {
        let terms = s.indices();
        let n = terms.len();
        let mut t = vec![vec![false; s.group().order()]; n + 1];
        for mask in 0u32..(1 << n) {
            let mut sum = 0;
            for (i, &x) in terms.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sum = s.group().add_idx(sum, x);
                }
            }
            t[mask.count_ones() as usize][sum] = true;
        }
        t
    }

    #[test]
    fn translate_map_minus() {
        let c3 = g(&[3]);
        let s = Sequence::from_indices(&c3, &[0, 0, 1]);
        let t = s.translate(&c3.elem(&[1]).unwrap()).unwrap();
        assert_eq!(t.indices(), vec![1, 1, 2]);
        assert_eq!(t.sum_idx(), 1);
        let c4 = g(&[4]);
        let th = Homomorphism::new(&c4, &c4, vec![c4.elem(&[2]).unwrap()]).unwrap();
        let m = Sequence::from_indices(&c4, &[1, 1]).map(&th).unwrap();
        assert_eq!(m.indices(), vec![2, 2]);
        assert_eq!(m.sum_idx(), 0);
        let a = Sequence::from_indices(&c4, &[1, 1, 3]);
        let b = Sequence::from_indices(&c4, &[1, 3]);
        assert_eq!(a.minus(&b).unwrap().indices(), vec![1]);
        assert_eq!(b.minus(&a).unwrap_err(), Error::NotSubsequence);
    }

    #[test]
    fn subsums_examples() {
        for n in 2..=9u64 {
            let cn = g(&[n]);
            let s = Sequence::from_indices(&cn, &vec![1; n as usize - 1]);
            let sums: Vec<usize> = subsums(&s).iter().map(|e| e.index()).collect();
            assert_eq!(sums, (1..n as usize).collect::<Vec<_>>());
        }
        assert!(subsums(&Sequence::empty(&g(&[5]))).is_empty());
        let s = Sequence::from_indices(&g(&[5]), &[1, 1, 2]);
        let sums: Vec<usize> = subsums(&s).iter().map(|e| e.index()).collect();
        assert_eq!(sums, vec![1, 2, 3, 4]);
    }

    #[test]
    fn reach_table_examples() {
        let c3 = g(&[3]);
        let t = reach_table(&Sequence::from_indices(&c3, &[1, 1, 1]));
        assert_eq!(t.layer(0).unwrap(), vec![0]);
        assert_eq!(t.layer(1).unwrap(), vec![1]);
        assert_eq!(t.layer(2).unwrap(), vec![2]);
        assert_eq!(t.layer(3).unwrap(), vec![0]);
        let c2 = g(&[2]);
        let t = reach_table(&Sequence::from_indices(&c2, &[0, 0]));
        assert_eq!(t.layer(1).unwrap(), vec![0]);
        assert_eq!(t.layer(2).unwrap(), vec![0]);
    }

    #[test]
    fn eta_witness_table_matches_subsets() {
        // e^3 e1 (e1+e) e2 (e2+e) over C2+C2+C4
        let gr = g(&[2, 2, 4]);
        let e = gr.elem(&[0, 0, 1]).unwrap();
        let e1 = gr.elem(&[1, 0, 0]).unwrap();
        let e2 = gr.elem(&[0, 1, 0]).unwrap();
        let mut terms = vec![e.clone(); 3];
        terms.extend([e1.clone(), e1.add(&e).unwrap(), e2.clone(), e2.add(&e).unwrap()]);
        let s = Sequence::from_elements(&gr, &terms).unwrap();
        let t = reach_table(&s);
        let brute = brute_table(&s);
        for l in 0..=7 {
            for x in 0..16 {
                assert_eq!(t.get(l, x).unwrap(), brute[l][x]);
            }
        }
        assert!((1..=4).all(|l| !t.get(l, 0).unwrap()));
        assert!(!has_short_zero_sum(&s));
    }

    #[test]
    fn zero_sum_queries() {
        for n in 2..=8u64 {
            let cn = g(&[n]);
            let mut idx = Vec::new();
            for _ in 0..n - 1 {
                idx.extend([0, 1]);
            }
            let s = Sequence::from_indices(&cn, &idx);
            assert!(!has_zero_sum_of_length(&s, n as usize).unwrap());
            let free = Sequence::from_indices(&cn, &vec![1; n as usize - 1]);
            assert!(!has_nonempty_zero_sum(&free));
        }
        let c5 = g(&[5]);
        assert!(has_short_zero_sum(&Sequence::from_indices(&c5, &[0])));
        let s = Sequence::from_indices(&c5, &[1, 2]);
        assert!(matches!(has_zero_sum_of_length(&s, 3), Err(Error::LengthOutOfRange { .. })));
    }

    #[test]
    fn witness_examples() {
        let c6 = g(&[6]);
        let s = Sequence::from_indices(&c6, &[1, 2, 3]);
        let w = witness_extract(&s, &c6.zero(), 3).unwrap().unwrap();
        assert_eq!(w.subsequence.indices(), vec![1, 2, 3]);
        let c3 = g(&[3]);
        let s = Sequence::from_indices(&c3, &[1, 1]);
        assert!(witness_extract(&s, &c3.zero(), 2).unwrap().is_none());
        let h = g(&[2, 2, 2, 2]);
        let s = Sequence::from_indices(&h, &(1..16).collect::<Vec<_>>());
        let w = witness_extract(&s, &h.zero(), 3).unwrap().unwrap();
        assert_eq!(w.length, 3);
        assert!(w.sum.is_zero());
        assert!(w.subsequence.is_squarefree());
        assert!(s.contains(&w.subsequence));
    }

    #[test]
    fn push_pop_restores() {
        let gr = g(&[2, 6]);
        let mut t = ReachTable::new(&gr, None);
        t.push(3);
        let snap: Vec<Vec<usize>> = (0..=1).map(|l| t.layer(l).unwrap()).collect();
        t.push(5);
        t.push(7);
        t.pop();
        t.pop();
        let again: Vec<Vec<usize>> = (0..=1).map(|l| t.layer(l).unwrap()).collect();
        assert_eq!(snap, again);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn large_group_table_matches_brute_force() {
        let gr = g(&[2, 2, 50]);
        let s = Sequence::from_indices(&gr, &[1, 1, 7, 53, 99, 120, 150, 151, 199]);
        let t = reach_table(&s);
        let brute = brute_table(&s);
        for l in 0..=s.len() {
            for x in 0..gr.order() {
                assert_eq!(t.get(l, x).unwrap(), brute[l][x], "len {l} elem {x}");
            }
        }
        for l in 1..=s.len() {
            for x in [0usize, 3, 50, 101] {
                let w = t.witness(x, l).unwrap();
                assert_eq!(w.is_some(), brute[l][x]);
            }
        }
    }

    #[test]
    fn text_and_json_formats() {
        let gr = g(&[2, 4]);
        let s = Sequence::from_indices(&gr, &[1, 1, 6]);
        let back = Sequence::parse(&s.to_text(), None).unwrap();
        assert_eq!(back, s);
        let j = serde_json::to_string(&s.to_json()).unwrap();
        assert_eq!(j, r#"{"group":{"factors":[2,4]},"elements":[{"elem":[0,1],"mult":2},{"elem":[1,2],"mult":1}]}"#);
        assert_eq!(Sequence::parse(&j, None).unwrap(), s);
        assert!(Sequence::parse("1,0\n", None).is_err());
        assert_eq!(Sequence::parse("1,0\n0,3\n", Some(&gr)).unwrap().len(), 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_seq(max_len: usize) -> impl Strategy<Value = Sequence> {
            prop::sample::select(vec![vec![5u64], vec![2, 4], vec![3, 3], vec![2, 2, 2], vec![2, 6], vec![2, 2, 4]])
                .prop_flat_map(move |f| {
                    let gr = GroupSpec::new(&f).unwrap();
                    let order = gr.order();
                    prop::collection::vec(0..order, 0..=max_len)
                        .prop_map(move |idx| Sequence::from_indices(&gr, &idx))
                })
        }

        proptest! {
            #[test]
            fn table_matches_subset_enumeration(s in arb_seq(10)) {
                let t = reach_table(&s);
                let brute = brute_table(&s);
                for (l, row) in brute.iter().enumerate() {
                    for (x, &b) in row.iter().enumerate() {
                        prop_assert_eq!(t.get(l, x).unwrap(), b);
                    }
                }
            }

            #[test]
            fn queries_are_monotone_under_extension(s in arb_seq(9), extra in 0usize..16) {
                let gr = s.group().clone();
                let mut longer = s.clone();
                longer.push(&gr.element_at(extra % gr.order()), 1).unwrap();
                prop_assert!(!has_nonempty_zero_sum(&s) || has_nonempty_zero_sum(&longer));
                prop_assert!(!has_short_zero_sum(&s) || has_short_zero_sum(&longer));
                for l in 0..=s.len() {
                    prop_assert!(!has_zero_sum_of_length(&s, l).unwrap() || has_zero_sum_of_length(&longer, l).unwrap());
                }
            }

            #[test]
            fn translation_shifts_each_layer(s in arb_seq(9), shift in 0usize..16) {
                let gr = s.group().clone();
                let g0 = gr.element_at(shift % gr.order());
                let t = reach_table(&s);
                let tt = reach_table(&s.translate(&g0).unwrap());
                for l in 0..=s.len() {
                    let moved = gr.mul_idx(l as u64, g0.index());
                    for x in 0..gr.order() {
                        prop_assert_eq!(t.get(l, x).unwrap(), tt.get(l, gr.add_idx(x, moved)).unwrap());
                    }
                }
            }

            #[test]
            fn subsums_are_union_of_layers(s in arb_seq(10)) {
                let t = reach_table(&s);
                let mut union: Vec<usize> = (1..=s.len()).flat_map(|l| t.layer(l).unwrap()).collect();
                union.sort_unstable();
                union.dedup();
                let mut sub: Vec<usize> = subsums(&s).iter().map(Element::index).collect();
                sub.sort_unstable();
                prop_assert_eq!(sub, union.clone());
                prop_assert_eq!(t.nonempty_sums(), union);
            }
        }
    }
}
