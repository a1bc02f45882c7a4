use serde::{Deserialize, Serialize};

/// An `n`-tuple of derivative orders; `D^α` differentiates `α_i` times in `x_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total order `|α|`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of length at most `m` in `n` variables, graded
/// lexicographically: by total order, then descending in the first entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexSet {
    n: usize,
    m: usize,
    indices: Vec<MultiIndex>,
}

impl MultiIndexSet {
    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `M(k)`: number of indices with `|α| ≤ k`. `M(-1)` is represented by `count_up_to(None)`.
    pub fn count_up_to(&self, k: Option<usize>) -> usize {
        match k {
            None => 0,
            Some(k) => self.indices.iter().filter(|a| a.order() <= k).count(),
        }
    }

    /// `M₀(k) = M(k) − M(k−1)`.
    pub fn count_exact(&self, k: usize) -> usize {
        self.count_up_to(Some(k)) - self.count_up_to(k.checked_sub(1))
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.indices.iter().position(|a| a == alpha)
    }

    /// Position of the index with a single derivative of order `d` in direction `axis`.
    pub fn axis_position(&self, axis: usize, d: usize) -> Option<usize> {
        let mut e = vec![0; self.n];
        e[axis] = d;
        self.position(&MultiIndex::new(e))
    }
}

fn compositions(n: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == n {
        prefix.push(total);
        out.push(MultiIndex::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(n, total - first, prefix, out);
        prefix.pop();
    }
}

/// Enumerates every multi-index with `|α| ≤ m` in `n` variables.
///
/// Panics if `n == 0`.
pub fn enumerate_multi_indices(n: usize, m: usize) -> MultiIndexSet {
    assert!(n >= 1, "spatial dimension must be positive");
    let mut indices = Vec::new();
    for k in 0..=m {
        compositions(n, k, &mut Vec::with_capacity(n), &mut indices);
    }
    MultiIndexSet { n, m, indices }
}
