//! Strictly increasing multi-indices labelling the basis of Λᵏ(ℝⁿ)*.
//!
//! Indices are 1-based to match the classical shorthand e¹³⁵ = e¹∧e³∧e⁵.

use std::fmt;

/// A strictly increasing tuple of 1-based indices.
///
/// The empty tuple labels the basis of Λ⁰ (constants). Ordering is
/// lexicographic, which fixes the canonical basis order of each Λᵏ.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    /// The empty multi-index (degree 0).
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    /// Build from a strictly increasing slice of 1-based indices.
    ///
    /// Panics if the slice is not strictly increasing or contains 0; use
    /// [`MultiIndex::from_unsorted`] for raw input.
    pub fn new(indices: &[u8]) -> Self {
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]) && indices.iter().all(|&i| i >= 1),
            "multi-index must be strictly increasing and 1-based: {indices:?}"
        );
        MultiIndex(indices.to_vec())
    }

    /// Sort raw indices, returning the permutation sign, or `None` when an
    /// index repeats (the corresponding wedge monomial vanishes).
    pub fn from_unsorted(indices: &[u8]) -> Option<(i32, Self)> {
        let mut v = indices.to_vec();
        let mut sign = 1;
        // Insertion sort counting inversions; degree ≤ 8 in practice.
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        assert!(v.iter().all(|&i| i >= 1), "indices are 1-based");
        Some((sign, MultiIndex(v)))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    pub fn contains(&self, i: u8) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Position of `i` within the tuple, if present.
    pub fn position(&self, i: u8) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    /// Remove the entry at `pos`.
    pub fn remove_at(&self, pos: usize) -> Self {
        let mut v = self.0.clone();
        v.remove(pos);
        MultiIndex(v)
    }

    /// Concatenation as a wedge: `None` if the tuples intersect, otherwise
    /// the merge sign and the sorted union.
    pub fn wedge(&self, other: &Self) -> Option<(i32, Self)> {
        if self.0.iter().any(|i| other.contains(*i)) {
            return None;
        }
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Self::from_unsorted(&v)
    }

    /// The complementary tuple inside {1,…,n}.
    pub fn complement(&self, n: usize) -> Self {
        let v = (1..=n as u8).filter(|i| !self.contains(*i)).collect();
        MultiIndex(v)
    }

    /// All degree-`k` multi-indices on {1,…,n} in lexicographic order.
    pub fn all(n: usize, k: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: Vec<u8> = (1..=k as u8).collect();
        if k > n {
            return out;
        }
        loop {
            out.push(MultiIndex(cur.clone()));
            // Advance the combination.
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < (n - (k - 1 - i)) as u8 {
                    cur[i] += 1;
                    for j in i + 1..k {
                        cur[j] = cur[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Rank of this tuple within [`MultiIndex::all`]`(n, k)`.
    pub fn rank(&self, n: usize) -> usize {
        let k = self.degree();
        let mut rank = 0usize;
        let mut prev = 0u8;
        for (pos, &idx) in self.0.iter().enumerate() {
            for skipped in prev + 1..idx {
                rank += binomial(n - skipped as usize, k - pos - 1);
            }
            prev = idx;
        }
        rank
    }

    /// Render with explicit dimension: compact digits for n ≤ 9
    /// (`e135`), braces with commas for larger n (`e{1,12}`).
    pub fn format(&self, n: usize) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        if n <= 9 {
            let digits: String = self.0.iter().map(|i| i.to_string()).collect();
            format!("e{digits}")
        } else {
            let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
            format!("e{{{}}}", parts.join(","))
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.last().copied().unwrap_or(0) as usize;
        write!(f, "{}", self.format(n))
    }
}

/// Binomial coefficient with the usual out-of-range conventions.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
