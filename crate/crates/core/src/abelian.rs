//! Finite abelian groups presented as direct sums of cyclic factors.
//!
//! A [`GroupSpec`] keeps the presentation it was built from (`[2, 2, 2, 6]`
//! stays `C2 + C2 + C2 + C6`) and computes the invariant-factor form on
//! demand. Elements are dense residue vectors; every group also carries a
//! mixed-radix bijection between elements and `0..order` (last factor varies
//! fastest) so tables and bitsets can be indexed by element.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default size bound for brute-force automorphism enumeration.
pub const DEFAULT_AUTOMORPHISM_BOUND: usize = 64;

/// Hard cap on the number of automorphisms materialized.
pub const MAX_AUTOMORPHISMS: usize = 250_000;

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

fn prime_powers(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

struct GroupData {
    factors: Vec<u64>,
    strides: Vec<usize>,
    order: usize,
    exponent: u64,
    invariant: OnceLock<Vec<u64>>,
    lut: OnceLock<Box<[u64]>>,
}

/// A finite abelian group `C_{f_1} + ... + C_{f_k}` in the given presentation.
#[derive(Clone)]
pub struct GroupSpec {
    data: Arc<GroupData>,
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data) || self.data.factors == other.data.factors
    }
}

impl Eq for GroupSpec {}

impl std::hash::Hash for GroupSpec {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.data.factors.hash(state);
    }
}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupSpec({:?})", self.data.factors)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.data.factors.is_empty() {
            return write!(f, "C1");
        }
        let parts: Vec<String> = self.data.factors.iter().map(|n| format!("C{n}")).collect();
        write!(f, "{}", parts.join("+"))
    }
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    factors: Vec<u64>,
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupJson { factors: self.data.factors.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let g = GroupJson::deserialize(d)?;
        GroupSpec::new(&g.factors).map_err(serde::de::Error::custom)
    }
}

impl GroupSpec {
    /// Builds a group from its cyclic factor orders. The empty list is the trivial group.
    pub fn new(factors: &[u64]) -> Result<Self> {
        if let Some(&bad) = factors.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidFactor(bad));
        }
        let mut order: usize = 1;
        for &n in factors {
            let n = usize::try_from(n).map_err(|_| Error::OrderOverflow)?;
            order = order.checked_mul(n).ok_or(Error::OrderOverflow)?;
        }
        let mut strides = vec![1usize; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1] as usize;
        }
        let exponent = factors.iter().fold(1, |acc, &n| lcm(acc, n));
        Ok(GroupSpec {
            data: Arc::new(GroupData {
                factors: factors.to_vec(),
                strides,
                order,
                exponent,
                invariant: OnceLock::new(),
                lut: OnceLock::new(),
            }),
        })
    }

    /// `C_n`.
    pub fn cyclic(n: u64) -> Result<Self> {
        if n == 1 {
            return Self::new(&[]);
        }
        Self::new(&[n])
    }

    /// `C_2^{r-1} + C_{2n}` in that presentation (`r >= 1`, `n >= 1`).
    pub fn two_torsion_family(r: usize, n: u64) -> Result<Self> {
        if r == 0 || n == 0 {
            return Err(Error::Precondition("need r >= 1 and n >= 1".into()));
        }
        let mut f = vec![2u64; r - 1];
        f.push(2 * n);
        Self::new(&f)
    }

    pub fn factors(&self) -> &[u64] {
        &self.data.factors
    }

    pub fn order(&self) -> usize {
        self.data.order
    }

    pub fn exponent(&self) -> u64 {
        self.data.exponent
    }

    /// Rank of the invariant-factor form (0 for the trivial group).
    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }

    /// Invariant factors `n_1 | n_2 | ... | n_r`, ascending.
    pub fn invariant_factors(&self) -> &[u64] {
        self.data.invariant.get_or_init(|| {
            let mut by_prime: Vec<(u64, Vec<u32>)> = Vec::new();
            for &n in &self.data.factors {
                for (p, e) in prime_powers(n) {
                    match by_prime.iter_mut().find(|(q, _)| *q == p) {
                        Some((_, es)) => es.push(e),
                        None => by_prime.push((p, vec![e])),
                    }
                }
            }
            let len = by_prime.iter().map(|(_, es)| es.len()).max().unwrap_or(0);
            for (_, es) in by_prime.iter_mut() {
                es.sort_unstable_by(|a, b| b.cmp(a));
            }
            // i-th largest invariant factor collects the i-th largest power of each prime
            let mut out: Vec<u64> = (0..len)
                .map(|i| {
                    by_prime
                        .iter()
                        .map(|(p, es)| es.get(i).map_or(1, |&e| p.pow(e)))
                        .product()
                })
                .collect();
            out.reverse();
            out
        })
    }

    /// The same group re-presented by its invariant factors.
    pub fn normalized(&self) -> GroupSpec {
        GroupSpec::new(self.invariant_factors()).expect("invariant factors are valid")
    }

    pub fn is_trivial(&self) -> bool {
        self.data.order == 1
    }

    pub fn zero(&self) -> Element {
        Element { group: self.clone(), residues: vec![0; self.data.factors.len()] }
    }

    /// Generator of the `i`-th cyclic factor.
    pub fn basis(&self, i: usize) -> Element {
        let mut r = vec![0; self.data.factors.len()];
        r[i] = 1;
        Element { group: self.clone(), residues: r }
    }

    pub fn elem(&self, residues: &[u64]) -> Result<Element> {
        self.check_residues(residues)?;
        Ok(Element { group: self.clone(), residues: residues.to_vec() })
    }

    /// Like [`GroupSpec::elem`] but reduces residues instead of rejecting them.
    pub fn elem_reduced(&self, residues: &[i64]) -> Result<Element> {
        if residues.len() != self.data.factors.len() {
            return Err(Error::ElementArity { expected: self.data.factors.len(), got: residues.len() });
        }
        let r = residues
            .iter()
            .zip(&self.data.factors)
            .map(|(&x, &n)| x.rem_euclid(n as i64) as u64)
            .collect();
        Ok(Element { group: self.clone(), residues: r })
    }

    fn check_residues(&self, residues: &[u64]) -> Result<()> {
        if residues.len() != self.data.factors.len() {
            return Err(Error::ElementArity { expected: self.data.factors.len(), got: residues.len() });
        }
        for (index, (&value, &factor)) in residues.iter().zip(&self.data.factors).enumerate() {
            if value >= factor {
                return Err(Error::ResidueRange { index, value, factor });
            }
        }
        Ok(())
    }

    pub fn index_of_residues(&self, residues: &[u64]) -> usize {
        residues.iter().zip(&self.data.strides).map(|(&r, &s)| r as usize * s).sum()
    }

    pub fn residues_of(&self, mut idx: usize) -> Vec<u64> {
        let mut out = vec![0; self.data.factors.len()];
        for (i, &s) in self.data.strides.iter().enumerate() {
            out[i] = (idx / s) as u64;
            idx %= s;
        }
        out
    }

    pub fn element_at(&self, idx: usize) -> Element {
        Element { group: self.clone(), residues: self.residues_of(idx) }
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.data.order).map(move |i| self.element_at(i))
    }

    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        let (mut a, mut b) = (a, b);
        for (&s, &n) in self.data.strides.iter().zip(&self.data.factors) {
            let (ra, rb) = (a / s, b / s);
            a %= s;
            b %= s;
            out += ((ra + rb) % n as usize) * s;
        }
        out
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        let mut out = 0;
        let mut a = a;
        for (&s, &n) in self.data.strides.iter().zip(&self.data.factors) {
            let ra = a / s;
            a %= s;
            out += ((n as usize - ra) % n as usize) * s;
        }
        out
    }

    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.add_idx(a, self.neg_idx(b))
    }

    pub fn mul_idx(&self, k: u64, a: usize) -> usize {
        let mut out = 0;
        let mut a = a;
        for (&s, &n) in self.data.strides.iter().zip(&self.data.factors) {
            let ra = (a / s) as u64;
            a %= s;
            out += (((ra as u128 * k as u128) % n as u128) as usize) * s;
        }
        out
    }

    pub fn ord_idx(&self, a: usize) -> u64 {
        self.residues_of(a)
            .iter()
            .zip(&self.data.factors)
            .fold(1, |acc, (&r, &n)| lcm(acc, n / gcd(r, n)))
    }

    /// `perm[x] = x + g` for every element index `x`.
    pub fn translation(&self, g: usize) -> Vec<u32> {
        (0..self.data.order).map(|x| self.add_idx(x, g) as u32).collect()
    }

    /// Byte-wise lookup table for translating 64-bit element sets, only for `order <= 64`.
    ///
    /// Entry `[(g * 8 + byte) * 256 + value]` is the translate by `g` of the
    /// bits `value << (8 * byte)`.
    pub(crate) fn small_lut(&self) -> Option<&[u64]> {
        if self.data.order > 64 {
            return None;
        }
        Some(self.data.lut.get_or_init(|| {
            let n = self.data.order;
            let mut lut = vec![0u64; n * 8 * 256].into_boxed_slice();
            for g in 0..n {
                let perm = self.translation(g);
                for byte in 0..8 {
                    for bit in 0..8 {
                        let x = byte * 8 + bit;
                        if x >= n {
                            continue;
                        }
                        let img = 1u64 << perm[x];
                        let base = (g * 8 + byte) * 256;
                        for v in 0..256usize {
                            if v >> bit & 1 == 1 {
                                lut[base + v] |= img;
                            }
                        }
                    }
                }
            }
            lut
        }))
    }

    /// Elements of order dividing `m`, by index.
    pub fn torsion_idx(&self, m: u64) -> Vec<usize> {
        (0..self.data.order).filter(|&x| m.is_multiple_of(self.ord_idx(x))).collect()
    }
}

/// An element of a [`GroupSpec`], stored as a reduced residue vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Element {
    group: GroupSpec,
    residues: Vec<u64>,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.residues)
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.residues.cmp(&other.residues)
    }
}

impl Element {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn index(&self) -> usize {
        self.group.index_of_residues(&self.residues)
    }

    pub fn is_zero(&self) -> bool {
        self.residues.iter().all(|&r| r == 0)
    }

    fn same_group(&self, other: &Element) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                left: self.group.to_string(),
                right: other.group.to_string(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.same_group(other)?;
        let residues = self
            .residues
            .iter()
            .zip(&other.residues)
            .zip(self.group.factors())
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect();
        Ok(Element { group: self.group.clone(), residues })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Element {
        let residues = self
            .residues
            .iter()
            .zip(self.group.factors())
            .map(|(&a, &n)| (n - a) % n)
            .collect();
        Element { group: self.group.clone(), residues }
    }

    pub fn mul(&self, k: u64) -> Element {
        let residues = self
            .residues
            .iter()
            .zip(self.group.factors())
            .map(|(&a, &n)| ((a as u128 * k as u128) % n as u128) as u64)
            .collect();
        Element { group: self.group.clone(), residues }
    }

    /// Least `k >= 1` with `k * self = 0`.
    pub fn ord(&self) -> u64 {
        self.residues
            .iter()
            .zip(self.group.factors())
            .fold(1, |acc, (&r, &n)| lcm(acc, n / gcd(r, n)))
    }
}

/// A homomorphism given by the images of the factor generators.
#[derive(Clone, PartialEq, Eq)]
pub struct Homomorphism {
    domain: GroupSpec,
    codomain: GroupSpec,
    images: Vec<Element>,
}

impl fmt::Debug for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hom({} -> {}, {:?})", self.domain, self.codomain, self.images)
    }
}

impl Homomorphism {
    /// Validates that `factor_i * image_i = 0` for every generator.
    pub fn new(domain: &GroupSpec, codomain: &GroupSpec, images: Vec<Element>) -> Result<Self> {
        if images.len() != domain.factors().len() {
            return Err(Error::ImageCount { expected: domain.factors().len(), got: images.len() });
        }
        for (index, (img, &order)) in images.iter().zip(domain.factors()).enumerate() {
            if img.group() != codomain {
                return Err(Error::GroupMismatch {
                    left: img.group().to_string(),
                    right: codomain.to_string(),
                });
            }
            if !img.mul(order).is_zero() {
                return Err(Error::IllDefinedHom { index, order });
            }
        }
        Ok(Homomorphism { domain: domain.clone(), codomain: codomain.clone(), images })
    }

    pub fn identity(group: &GroupSpec) -> Self {
        let images = (0..group.factors().len()).map(|i| group.basis(i)).collect();
        Homomorphism { domain: group.clone(), codomain: group.clone(), images }
    }

    /// Projection onto the factors listed in `keep` (in that order).
    pub fn projection(domain: &GroupSpec, keep: &[usize]) -> Result<Self> {
        let f: Vec<u64> = keep.iter().map(|&i| domain.factors()[i]).collect();
        let codomain = GroupSpec::new(&f)?;
        let images = (0..domain.factors().len())
            .map(|i| match keep.iter().position(|&k| k == i) {
                Some(j) => codomain.basis(j),
                None => codomain.zero(),
            })
            .collect();
        Homomorphism::new(domain, &codomain, images)
    }

    pub fn domain(&self) -> &GroupSpec {
        &self.domain
    }

    pub fn codomain(&self) -> &GroupSpec {
        &self.codomain
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        if x.group() != &self.domain {
            return Err(Error::GroupMismatch {
                left: x.group().to_string(),
                right: self.domain.to_string(),
            });
        }
        Ok(self.codomain.element_at(self.apply_idx(x.index())))
    }

    pub fn apply_idx(&self, x: usize) -> usize {
        let cod = &self.codomain;
        let mut acc = 0;
        for (r, img) in self.domain.residues_of(x).into_iter().zip(&self.images) {
            if r != 0 {
                acc = cod.add_idx(acc, cod.mul_idx(r, img.index()));
            }
        }
        acc
    }

    /// Image of every domain element, by index.
    pub fn table(&self) -> Vec<usize> {
        (0..self.domain.order()).map(|x| self.apply_idx(x)).collect()
    }

    pub fn kernel(&self) -> Vec<Element> {
        (0..self.domain.order())
            .filter(|&x| self.apply_idx(x) == 0)
            .map(|x| self.domain.element_at(x))
            .collect()
    }

    pub fn image(&self) -> Vec<Element> {
        let mut seen = vec![false; self.codomain.order()];
        for x in 0..self.domain.order() {
            seen[self.apply_idx(x)] = true;
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| self.codomain.element_at(i))
            .collect()
    }

    /// `self` after `inner`.
    pub fn compose(&self, inner: &Homomorphism) -> Result<Homomorphism> {
        if inner.codomain != self.domain {
            return Err(Error::GroupMismatch {
                left: inner.codomain.to_string(),
                right: self.domain.to_string(),
            });
        }
        let images = inner.images.iter().map(|g| self.apply(g)).collect::<Result<Vec<_>>>()?;
        Homomorphism::new(&inner.domain, &self.codomain, images)
    }

    /// Largest order of an image element; the image has exponent dividing 2 iff this is <= 2.
    pub fn image_exponent(&self) -> u64 {
        self.images.iter().fold(1, |acc, g| lcm(acc, g.ord()))
    }
}

/// `theta` on `C_2^{r-1} + C_{2n}`: fixes the order-2 generators and sends `e` to `n e`.
pub fn doubling_hom(group: &GroupSpec) -> Result<Homomorphism> {
    let f = group.factors();
    let Some((&last, rest)) = f.split_last() else {
        return Err(Error::Presentation("trivial group has no C_2n factor".into()));
    };
    if rest.iter().any(|&x| x != 2) || last % 2 != 0 {
        return Err(Error::Presentation(format!(
            "{group} is not presented as C_2^(r-1) + C_2n"
        )));
    }
    let n = last / 2;
    let k = f.len();
    let images = (0..k)
        .map(|i| if i + 1 == k { group.basis(i).mul(n) } else { group.basis(i) })
        .collect();
    Homomorphism::new(group, group, images)
}

/// All automorphisms of a small group, by brute force over generator images.
#[derive(Clone, Debug)]
pub struct AutomorphismSet {
    group: GroupSpec,
    maps: Vec<Homomorphism>,
    tables: Vec<Vec<u32>>,
}

impl AutomorphismSet {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn maps(&self) -> &[Homomorphism] {
        &self.maps
    }

    /// Permutation tables `perm[x] = alpha(x)`, parallel to [`AutomorphismSet::maps`].
    pub fn tables(&self) -> &[Vec<u32>] {
        &self.tables
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

pub fn automorphisms(group: &GroupSpec, bound: usize) -> Result<AutomorphismSet> {
    let order = group.order();
    if order > bound {
        return Err(Error::AutomorphismBound { order, bound });
    }
    let factors = group.factors().to_vec();
    let candidates: Vec<Vec<usize>> =
        factors.iter().map(|&n| (0..order).filter(|&x| group.ord_idx(x) == n).collect()).collect();

    struct Walk<'a> {
        group: &'a GroupSpec,
        factors: &'a [u64],
        candidates: &'a [Vec<usize>],
        chosen: Vec<usize>,
        found: Vec<Vec<usize>>,
        overflow: bool,
    }

    impl Walk<'_> {
        // `span` is the image of the subgroup generated by the first `chosen.len()` generators.
        fn go(&mut self, span: &[usize]) {
            if self.overflow {
                return;
            }
            let i = self.chosen.len();
            if i == self.factors.len() {
                if self.found.len() >= MAX_AUTOMORPHISMS {
                    self.overflow = true;
                    return;
                }
                self.found.push(self.chosen.clone());
                return;
            }
            let n = self.factors[i];
            let mut in_span = vec![false; self.group.order()];
            for &s in span {
                in_span[s] = true;
            }
            for &x in &self.candidates[i] {
                let mut ok = true;
                let mut m = x;
                for _ in 1..n {
                    if in_span[m] {
                        ok = false;
                        break;
                    }
                    m = self.group.add_idx(m, x);
                }
                if !ok {
                    continue;
                }
                let mut next = Vec::with_capacity(span.len() * n as usize);
                let mut m = 0;
                for _ in 0..n {
                    next.extend(span.iter().map(|&s| self.group.add_idx(s, m)));
                    m = self.group.add_idx(m, x);
                }
                self.chosen.push(x);
                self.go(&next);
                self.chosen.pop();
            }
        }
    }

    let mut walk = Walk {
        group,
        factors: &factors,
        candidates: &candidates,
        chosen: Vec::new(),
        found: Vec::new(),
        overflow: false,
    };
    walk.go(&[0]);
    if walk.overflow {
        return Err(Error::AutomorphismCount(MAX_AUTOMORPHISMS));
    }
    let mut maps = Vec::with_capacity(walk.found.len());
    let mut tables = Vec::with_capacity(walk.found.len());
    for imgs in walk.found {
        let images = imgs.iter().map(|&x| group.element_at(x)).collect();
        let h = Homomorphism::new(group, group, images)?;
        tables.push(h.table().into_iter().map(|x| x as u32).collect());
        maps.push(h);
    }
    Ok(AutomorphismSet { group: group.clone(), maps, tables })
}
