//! Method of types: empirical distributions, exact type-class enumeration and
//! counting.

use crate::error::{CqError, Result};
use crate::prob::ProbabilityVector;
use serde::Serialize;

/// Empirical distribution of a word, with exact counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TypeClass {
    pub alphabet: Vec<String>,
    pub length: usize,
    pub counts: Vec<usize>,
}

impl TypeClass {
    pub fn distribution(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.length as f64)
            .collect()
    }

    pub fn to_probability_vector(&self) -> Result<ProbabilityVector> {
        ProbabilityVector::new(self.alphabet.clone(), self.distribution())
    }
}

/// Occurrence counts of `word` over an alphabet of the given size.
pub fn type_counts(word: &[usize], alphabet_size: usize) -> Result<Vec<usize>> {
    if word.is_empty() {
        return Err(CqError::InvalidParameter("empty word".into()));
    }
    let mut counts = vec![0usize; alphabet_size];
    for &x in word {
        if x >= alphabet_size {
            return Err(CqError::UnknownSymbol(format!("index {x}")));
        }
        counts[x] += 1;
    }
    Ok(counts)
}

pub fn type_of(word: &[usize], alphabet: &[String]) -> Result<TypeClass> {
    Ok(TypeClass {
        alphabet: alphabet.to_vec(),
        length: word.len(),
        counts: type_counts(word, alphabet.len())?,
    })
}

/// All count vectors of total `k` over `alphabet_size` symbols, in
/// lexicographic order.
pub fn enumerate_type_counts(alphabet_size: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=remaining {
            prefix.push(c);
            rec(remaining - c, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if alphabet_size == 0 {
        return out;
    }
    rec(k, alphabet_size, &mut Vec::new(), &mut out);
    out
}

/// Number of distinct types = C(k + |X| − 1, |X| − 1).
pub fn type_count(alphabet_size: usize, k: usize) -> u128 {
    binomial(k as u128 + alphabet_size as u128 - 1, alphabet_size as u128 - 1)
}

fn binomial(n: u128, mut k: u128) -> u128 {
    if k > n {
        return 0;
    }
    if k > n - k {
        k = n - k;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Size of the type class (multinomial coefficient), exact in u128 for the
/// desk-scale lengths this crate supports (k ≤ 30).
pub fn type_class_size(counts: &[usize]) -> u128 {
    let k: usize = counts.iter().sum();
    let mut acc: u128 = 1;
    let mut rem = k;
    for &c in counts {
        acc *= binomial(rem as u128, c as u128);
        rem -= c;
    }
    acc
}

/// q^{⊗k} mass of one type class.
pub fn type_class_mass(counts: &[usize], q: &[f64]) -> f64 {
    debug_assert_eq!(counts.len(), q.len());
    let size = type_class_size(counts) as f64;
    // Log-domain product guards against underflow for skewed q.
    let mut log_mass = size.log2();
    for (&c, &qi) in counts.iter().zip(q) {
        if c == 0 {
            continue;
        }
        if qi <= 0.0 {
            return 0.0;
        }
        log_mass += c as f64 * qi.log2();
    }
    log_mass.exp2()
}

/// ℓ1 distance between a type (counts/k) and a distribution.
pub fn l1_to_distribution(counts: &[usize], k: usize, q: &[f64]) -> f64 {
    counts
        .iter()
        .zip(q)
        .map(|(&c, &qi)| (c as f64 / k as f64 - qi).abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn type_of_examples() {
        let t = type_of(&[0, 0], &labels(2)).unwrap();
        assert_eq!(t.counts, vec![2, 0]);
        assert_eq!(t.distribution(), vec![1.0, 0.0]);
        let t = type_of(&[0, 1], &labels(2)).unwrap();
        assert_eq!(t.distribution(), vec![0.5, 0.5]);
        assert!(type_of(&[0, 3], &labels(2)).is_err());
    }

    #[test]
    fn binary_words_of_length_three_have_four_types() {
        let mut seen = std::collections::BTreeSet::new();
        for w in 0..8u32 {
            let word: Vec<usize> = (0..3).map(|b| ((w >> b) & 1) as usize).collect();
            seen.insert(type_counts(&word, 2).unwrap());
        }
        assert_eq!(seen.len(), 4);
        assert!(seen.len() as u128 <= (3 + 1u128).pow(2));
        assert_eq!(type_count(2, 3), 4);
    }

    #[test]
    fn enumeration_matches_counting_formula() {
        for alphabet in 1..=4usize {
            for k in 1..=12usize {
                let types = enumerate_type_counts(alphabet, k);
                assert_eq!(types.len() as u128, type_count(alphabet, k));
                assert!(types.len() as u128 <= ((k + 1) as u128).pow(alphabet as u32));
                assert!(types.iter().all(|t| t.iter().sum::<usize>() == k));
            }
        }
    }

    #[test]
    fn type_class_masses_sum_to_one() {
        let q = [0.2, 0.5, 0.3];
        let total: f64 = enumerate_type_counts(3, 9)
            .iter()
            .map(|t| type_class_mass(t, &q))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn type_class_size_matches_direct_count() {
        // Exhaustive oracle at |X| = 3, k = 5: count words per type.
        let k = 5;
        let mut by_type = std::collections::BTreeMap::new();
        for w in 0..3usize.pow(5) {
            let mut word = Vec::new();
            let mut v = w;
            for _ in 0..k {
                word.push(v % 3);
                v /= 3;
            }
            *by_type
                .entry(type_counts(&word, 3).unwrap())
                .or_insert(0u128) += 1;
        }
        for (counts, size) in by_type {
            assert_eq!(type_class_size(&counts), size);
        }
    }
}
