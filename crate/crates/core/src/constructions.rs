//! Explicit extremal sequences and the structural helpers used by the proofs:
//! the cyclic structure of long zero-sum free sequences, pairing by image
//! class, and the `C_2^4` pairing toward a fixed element.

use std::collections::BTreeMap;

use crate::abelian::{gcd, Element, GroupSpec, Homomorphism};
use crate::error::{Error, Result};
use crate::seq::{
    has_nonempty_zero_sum, has_short_zero_sum, has_zero_sum_of_length, subsums, ConstructionTag, Sequence,
};

pub fn construction_tag(name: &str, params: &[(&str, u64)]) -> ConstructionTag {
    ConstructionTag {
        name: name.to_string(),
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

fn cyclic_order(group: &GroupSpec) -> Result<u64> {
    match group.invariant_factors() {
        [] => Ok(1),
        [n] => Ok(*n),
        _ => Err(Error::Precondition(format!("{group} is not cyclic"))),
    }
}

/// `(g h)^{n-1}` over a cyclic group of order `n`; has no zero-sum of length `n`.
pub fn cyclic_extremal(n: u64, g: &Element, h: &Element) -> Result<Sequence> {
    let group = g.group();
    if n < 2 || cyclic_order(group)? != n || group.order() as u64 != n {
        return Err(Error::Precondition(format!("expected a cyclic group of order {n}, got {group}")));
    }
    let diff = g.sub(h)?;
    if diff.ord() != n {
        return Err(Error::Precondition(format!("ord(g - h) = {} but n = {n}", diff.ord())));
    }
    let mut s = Sequence::empty(group);
    s.push(g, (n - 1) as u32)?;
    s.push(h, (n - 1) as u32)?;
    if has_zero_sum_of_length(&s, n as usize)? {
        return Err(Error::Falsified(format!("(gh)^(n-1) has a zero-sum of length {n}: {s:?}")));
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicStructure {
    pub generator: Element,
    /// Ascending multipliers with `S = (k_1 g) ... (k_l g)`.
    pub coefficients: Vec<u64>,
    pub total: u64,
}

/// Writes a long zero-sum free sequence over `C_n` as multiples of one generator.
///
/// Generators are tried in index order; the first with `sum k_i < n` wins and
/// the subsum set is then checked to be `{g, 2g, ..., kg}`.
pub fn cyclic_structure(s: &Sequence) -> Result<CyclicStructure> {
    let group = s.group();
    let n = group.order() as u64;
    if group.rank() > 1 {
        return Err(Error::Precondition(format!("{group} is not cyclic")));
    }
    if 2 * s.len() as u64 <= n {
        return Err(Error::Precondition(format!("need |S| > n/2, got |S| = {} and n = {n}", s.len())));
    }
    if has_nonempty_zero_sum(s) {
        return Err(Error::Precondition("sequence is not zero-sum free".into()));
    }
    for u in 1..n {
        if gcd(u, n) != 1 {
            continue;
        }
        let inv = (1..n).find(|v| u * v % n == 1).expect("unit");
        let mut coefficients: Vec<u64> = s.indices().iter().map(|&x| x as u64 * inv % n).collect();
        coefficients.sort_unstable();
        let total: u64 = coefficients.iter().sum();
        if coefficients.iter().all(|&k| k >= 1) && total < n {
            let generator = group.element_at(u as usize);
            let expected: Vec<Element> = (1..=total).map(|k| generator.mul(k)).collect::<Vec<_>>();
            let mut expected = expected;
            expected.sort();
            if subsums(s) != expected {
                return Err(Error::Falsified(format!(
                    "subsums of {s:?} are not the first {total} multiples of {generator:?}"
                )));
            }
            return Ok(CyclicStructure { generator, coefficients, total });
        }
    }
    Err(Error::Falsified(format!("no generator expresses {s:?} with coefficient sum below {n}")))
}

fn family_terms(group: &GroupSpec, r: usize, n: u64) -> Result<Sequence> {
    let e = group.basis(r - 1);
    let mut s = Sequence::empty(group);
    s.push(&e, (2 * n - 1) as u32)?;
    for i in 0..r - 1 {
        let ei = group.basis(i);
        s.push(&ei, 1)?;
        s.push(&ei.add(&e)?, 1)?;
    }
    Ok(s)
}

/// `e^{2n-1} prod e_i (e_i + e)` over `C_2^{r-1} + C_{2n}`: no short zero-sum.
pub fn eta_witness(r: usize, n: u64) -> Result<Sequence> {
    let group = GroupSpec::two_torsion_family(r, n)?;
    let s = family_terms(&group, r, n)?;
    if has_short_zero_sum(&s) {
        return Err(Error::Internal(format!("eta witness for r={r}, n={n} has a short zero-sum")));
    }
    Ok(s)
}

/// `0^{2n-1} e^{2n-1} prod e_i (e_i + e)`: no zero-sum of length `2n`.
pub fn s_witness(r: usize, n: u64) -> Result<Sequence> {
    let group = GroupSpec::two_torsion_family(r, n)?;
    let mut s = family_terms(&group, r, n)?;
    s.push(&group.zero(), (2 * n - 1) as u32)?;
    if has_zero_sum_of_length(&s, 2 * n as usize)? {
        return Err(Error::Internal(format!("s witness for r={r}, n={n} has a zero-sum of length {}", 2 * n)));
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairDecomposition {
    pub pairs: Vec<Sequence>,
    pub rest: Sequence,
}

/// Splits `S` into as many equal-image pairs as possible plus a remainder with squarefree image.
pub fn pair_decomposition(s: &Sequence, h: &Homomorphism) -> Result<PairDecomposition> {
    if h.domain() != s.group() {
        return Err(Error::GroupMismatch { left: h.domain().to_string(), right: s.group().to_string() });
    }
    if 2 % h.image_exponent() != 0 {
        return Err(Error::Precondition(format!("image exponent {} does not divide 2", h.image_exponent())));
    }
    let group = s.group();
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for x in s.indices() {
        classes.entry(h.apply_idx(x)).or_default().push(x);
    }
    let mut pairs = Vec::new();
    let mut rest = Vec::new();
    for terms in classes.values() {
        let mut chunks = terms.chunks_exact(2);
        for pair in chunks.by_ref() {
            pairs.push(Sequence::from_indices(group, pair));
        }
        rest.extend_from_slice(chunks.remainder());
    }
    let rest = Sequence::from_indices(group, &rest);
    debug_assert!(rest.map(h).map(|r| r.is_squarefree()).unwrap_or(false));
    Ok(PairDecomposition { pairs, rest })
}

/// Disjoint pairs `a (w + a)` inside `W w^{-1}`, at least `|W| - 8` of them.
pub fn sum_pairs(w_set: &Sequence, w: &Element) -> Result<Vec<Sequence>> {
    let group = w_set.group();
    if group.invariant_factors() != [2, 2, 2, 2] {
        return Err(Error::Precondition(format!("{group} is not C_2^4")));
    }
    if w.group() != group {
        return Err(Error::GroupMismatch { left: w.group().to_string(), right: group.to_string() });
    }
    if !w_set.is_squarefree() || w_set.multiplicity_idx(0) > 0 {
        return Err(Error::Precondition("W must be a subset of the nonzero elements".into()));
    }
    if w_set.len() < 9 {
        return Err(Error::Precondition(format!("|W| = {} < 9", w_set.len())));
    }
    let wi = w.index();
    if w_set.multiplicity_idx(wi) == 0 {
        return Err(Error::Precondition("w is not in W".into()));
    }
    let mut used = vec![false; group.order()];
    used[0] = true;
    used[wi] = true;
    let mut pairs = Vec::new();
    for a in 1..group.order() {
        if used[a] {
            continue;
        }
        let b = group.add_idx(a, wi);
        used[a] = true;
        used[b] = true;
        if w_set.multiplicity_idx(a) > 0 && w_set.multiplicity_idx(b) > 0 {
            pairs.push(Sequence::from_indices(group, &[a, b]));
        }
    }
    if pairs.len() + 8 < w_set.len() {
        return Err(Error::Falsified(format!("only {} pairs for |W| = {}", pairs.len(), w_set.len())));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::doubling_hom;
    use proptest::prelude::*;

    fn g(f: &[u64]) -> GroupSpec {
        GroupSpec::new(f).unwrap()
    }

    fn brute_has_len_zero_sum(s: &Sequence, len: usize) -> bool {
        let t = s.indices();
        (0u32..1 << t.len()).any(|m| {
            m.count_ones() as usize == len
                && t.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).fold(0, |acc, (_, &x)| s.group().add_idx(acc, x)) == 0
        })
    }

    #[test]
    fn cyclic_extremal_examples() {
        let c2 = g(&[2]);
        let s = cyclic_extremal(2, &c2.element_at(0), &c2.element_at(1)).unwrap();
        assert_eq!(s.indices(), vec![0, 1]);
        let c3 = g(&[3]);
        let s = cyclic_extremal(3, &c3.element_at(0), &c3.element_at(1)).unwrap();
        assert_eq!(s.indices(), vec![0, 0, 1, 1]);
        assert!(!brute_has_len_zero_sum(&s, 3));
        let c5 = g(&[5]);
        let s = cyclic_extremal(5, &c5.element_at(1), &c5.element_at(2)).unwrap();
        assert_eq!(s.len(), 8);
        assert!(!brute_has_len_zero_sum(&s, 5));
        let c4 = g(&[4]);
        assert!(matches!(
            cyclic_extremal(4, &c4.element_at(0), &c4.element_at(2)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn cyclic_structure_examples() {
        let c5 = g(&[5]);
        let r = cyclic_structure(&Sequence::from_indices(&c5, &[1, 1, 2])).unwrap();
        assert_eq!(r.generator.index(), 1);
        assert_eq!(r.coefficients, vec![1, 1, 2]);
        assert_eq!(r.total, 4);
        let c9 = g(&[9]);
        assert!(matches!(
            cyclic_structure(&Sequence::from_indices(&c9, &[2; 4])),
            Err(Error::Precondition(_))
        ));
        for n in 3..=12u64 {
            let cn = g(&[n]);
            for u in (1..n).filter(|&u| gcd(u, n) == 1) {
                let s = Sequence::from_indices(&cn, &vec![u as usize; (n - 1) as usize]);
                let r = cyclic_structure(&s).unwrap();
                assert_eq!(r.total, n - 1);
                assert!(r.coefficients.iter().all(|&k| k == 1));
                assert_eq!(r.generator.mul(r.coefficients[0]).index(), u as usize);
            }
        }
    }

    #[test]
    fn cyclic_structure_on_every_long_free_sequence() {
        for n in 2..=9u64 {
            let cn = g(&[n]);
            let min_len = (n / 2 + 1) as usize;
            let mut stack: Vec<Vec<usize>> = vec![vec![]];
            while let Some(p) = stack.pop() {
                let s = Sequence::from_indices(&cn, &p);
                if has_nonempty_zero_sum(&s) {
                    continue;
                }
                if p.len() >= min_len {
                    cyclic_structure(&s).unwrap();
                }
                let start = p.last().copied().unwrap_or(1);
                for x in start..n as usize {
                    let mut q = p.clone();
                    q.push(x);
                    stack.push(q);
                }
            }
        }
    }

    #[test]
    fn eta_witness_examples() {
        let s = eta_witness(3, 2).unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s.group().factors(), &[2, 2, 4]);
        for l in 1..=4 {
            assert!(!brute_has_len_zero_sum(&s, l));
        }
        let s = eta_witness(1, 3).unwrap();
        assert_eq!(s.indices(), vec![1; 5]);
        let s = eta_witness(4, 3).unwrap();
        assert_eq!(s.len(), 11);
    }

    #[test]
    fn s_witness_examples() {
        let s = s_witness(3, 2).unwrap();
        assert_eq!(s.len(), 10);
        assert!(!brute_has_len_zero_sum(&s, 4));
        let s = s_witness(1, 2).unwrap();
        assert_eq!(s.indices(), vec![0, 0, 0, 1, 1, 1]);
        let s = s_witness(4, 36).unwrap();
        assert_eq!(s.len(), 148);
        assert_eq!(s.group().factors(), &[2, 2, 2, 72]);
    }

    #[test]
    fn pair_decomposition_examples() {
        let gr = g(&[2, 2, 4]);
        let theta = doubling_hom(&gr).unwrap();
        let a = gr.elem(&[1, 0, 0]).unwrap();
        let b = gr.elem(&[0, 1, 0]).unwrap();
        let s = Sequence::from_elements(&gr, &[a.clone(), a.clone(), b.clone()]).unwrap();
        let d = pair_decomposition(&s, &theta).unwrap();
        assert_eq!(d.pairs, vec![Sequence::from_elements(&gr, &[a.clone(), a]).unwrap()]);
        assert_eq!(d.rest, Sequence::from_elements(&gr, &[b]).unwrap());

        let c24 = g(&[2, 2, 2, 2]);
        let id = Homomorphism::identity(&c24);
        let s = Sequence::from_indices(&c24, &(1..16).collect::<Vec<_>>());
        let d = pair_decomposition(&s, &id).unwrap();
        assert!(d.pairs.is_empty());
        assert_eq!(d.rest, s);

        let c8 = g(&[8]);
        assert!(matches!(
            pair_decomposition(&Sequence::from_indices(&c8, &[1]), &Homomorphism::identity(&c8)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sum_pairs_examples() {
        let c24 = g(&[2, 2, 2, 2]);
        let all = Sequence::from_indices(&c24, &(1..16).collect::<Vec<_>>());
        for w in 1..16 {
            let we = c24.element_at(w);
            let pairs = sum_pairs(&all, &we).unwrap();
            assert_eq!(pairs.len(), 7);
            let mut seen = std::collections::BTreeSet::new();
            for p in &pairs {
                assert_eq!(p.sum_idx(), w);
                for x in p.indices() {
                    assert!(x != w && seen.insert(x));
                }
            }
            assert_eq!(seen.len(), 14);
        }
        let nine = Sequence::from_indices(&c24, &(1..10).collect::<Vec<_>>());
        assert!(!sum_pairs(&nine, &c24.element_at(1)).unwrap().is_empty());
        let eight = Sequence::from_indices(&c24, &(1..9).collect::<Vec<_>>());
        assert!(matches!(sum_pairs(&eight, &c24.element_at(1)), Err(Error::Precondition(_))));
    }

    proptest! {
        #[test]
        fn witnesses_hold(r in 1usize..=5, n in 1u64..=12) {
            let e = eta_witness(r, n).unwrap();
            prop_assert_eq!(e.len() as u64, 2 * n + 2 * r as u64 - 3);
            let s = s_witness(r, n).unwrap();
            prop_assert_eq!(s.len() as u64, 4 * n + 2 * r as u64 - 4);
        }

        #[test]
        fn pair_decomposition_postconditions(idx in proptest::collection::vec(0usize..16, 0..20)) {
            let gr = g(&[2, 2, 4]);
            let theta = doubling_hom(&gr).unwrap();
            let s = Sequence::from_indices(&gr, &idx);
            let d = pair_decomposition(&s, &theta).unwrap();
            let mut back = d.rest.clone();
            for p in &d.pairs {
                prop_assert_eq!(p.len(), 2);
                prop_assert_eq!(theta.apply_idx(p.sum_idx()), 0);
                back = back.concat(p).unwrap();
            }
            prop_assert_eq!(back, s.clone());
            prop_assert!(d.rest.map(&theta).unwrap().is_squarefree());
            prop_assert!(d.rest.len() <= 8);
            prop_assert_eq!(2 * d.pairs.len() + d.rest.len(), s.len());
        }
    }
}
