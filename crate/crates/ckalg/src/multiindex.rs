//! Multi-indices for commuting partial derivatives and monomial exponents.
//!
//! The ordering used everywhere is graded lexicographic: indices are first
//! compared by total degree, ties broken lexicographically entry by entry.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// Exponent vector in Z^m_{>=0}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    /// Zero index of length m.
    pub fn zero(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    /// Unit index e_i (0-based) of length m.
    pub fn unit(m: usize, i: usize) -> Self {
        assert!(i < m, "unit index {i} out of range for length {m}");
        let mut v = vec![0; m];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Total degree |alpha|.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum; lengths must agree.
    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        self.check_len(other)?;
        Ok(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Componentwise difference, None when not componentwise >=.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if self.0.len() != other.0.len() {
            return None;
        }
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    /// True when self >= other componentwise.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Index with entry i incremented.
    pub fn bump(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    /// First position with a nonzero entry.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|&e| e > 0)
    }

    /// alpha! = prod(alpha_i!).
    pub fn factorial(&self) -> BigUint {
        let mut acc = BigUint::one();
        for &e in &self.0 {
            for k in 2..=e {
                acc *= BigUint::from(k);
            }
        }
        acc
    }

    /// Drop the first entry (restriction to a hyperplane).
    pub fn tail(&self) -> MultiIndex {
        MultiIndex(self.0[1..].to_vec())
    }

    /// Prepend an entry as the new first component.
    pub fn prepend(&self, first: u32) -> MultiIndex {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(first);
        v.extend_from_slice(&self.0);
        MultiIndex(v)
    }

    fn check_len(&self, other: &MultiIndex) -> Result<()> {
        if self.0.len() != other.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                found: other.0.len(),
            });
        }
        Ok(())
    }
}

/// Graded lexicographic comparison; errors when lengths differ.
pub fn grlex_compare(a: &MultiIndex, b: &MultiIndex) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(grlex_same_len(a, b))
}

fn grlex_same_len(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    match a.degree().cmp(&b.degree()) {
        Ordering::Equal => a.0.cmp(&b.0),
        ord => ord,
    }
}

// Total order so multi-indices can key BTreeMaps. Indices of equal length
// compare by grlex; shorter indices sort first so the order stays total.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| grlex_same_len(self, other))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All indices of length m with total degree <= n, grlex ascending.
pub fn indices_up_to(m: usize, n: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in 0..=n {
        push_degree(m, d, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

// Indices of exact degree d in lex-ascending order (which is grlex order
// within a fixed degree).
fn push_degree(m: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if m == 0 {
        if d == 0 {
            out.push(MultiIndex::new(prefix.clone()));
        }
        return;
    }
    if prefix.len() == m - 1 {
        prefix.push(d);
        out.push(MultiIndex::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for e in 0..=d {
        prefix.push(e);
        push_degree(m, d - e, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn grlex_examples() {
        assert_eq!(
            grlex_compare(&mi(&[0, 1]), &mi(&[1, 0])).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            grlex_compare(&mi(&[2, 0]), &mi(&[0, 1])).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            grlex_compare(&mi(&[1, 1]), &mi(&[1, 1])).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn grlex_length_mismatch_is_an_error() {
        let err = grlex_compare(&mi(&[1]), &mi(&[1, 0])).unwrap_err();
        assert_eq!(err.kind(), "dimension-mismatch");
    }

    #[test]
    fn factorial_and_degree() {
        assert_eq!(mi(&[3, 2]).factorial(), BigUint::from(12u32));
        assert_eq!(mi(&[3, 2]).degree(), 5);
        assert_eq!(MultiIndex::zero(0).factorial(), BigUint::one());
    }

    #[test]
    fn enumeration_is_grlex_sorted_and_complete() {
        let all = indices_up_to(2, 3);
        assert_eq!(all.len(), 10);
        for w in all.windows(2) {
            assert_eq!(grlex_compare(&w[0], &w[1]).unwrap(), Ordering::Less);
        }
        assert_eq!(all[0], mi(&[0, 0]));
        assert_eq!(all[1], mi(&[0, 1]));
        assert_eq!(all[2], mi(&[1, 0]));
    }

    #[test]
    fn zero_length_indices() {
        let all = indices_up_to(0, 4);
        assert_eq!(all, vec![MultiIndex::zero(0)]);
    }
}
