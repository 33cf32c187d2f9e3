use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multi-index `α ∈ ℕ^d`, `d ∈ {1, 2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    alpha: Vec<usize>,
}

impl MultiIndex {
    pub fn new(alpha: Vec<usize>) -> Result<Self> {
        match alpha.len() {
            1 | 2 => Ok(Self { alpha }),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn components(&self) -> &[usize] {
        &self.alpha
    }

    /// Total degree `|α|₁`.
    pub fn degree(&self) -> usize {
        self.alpha.iter().sum()
    }

    /// Position of this index in the total-degree enumeration.
    ///
    /// Level `k` occupies a contiguous block starting at [`level_offset`];
    /// inside a 2-D block the indices run `(k,0), (k−1,1), …, (0,k)`.
    pub fn position(&self) -> usize {
        let k = self.degree();
        match self.alpha.as_slice() {
            [_] => k,
            [_, b] => level_offset(k, 2) + b,
            _ => unreachable!("dimension validated on construction"),
        }
    }

    /// Inverse of [`MultiIndex::position`].
    pub fn from_position(pos: usize, dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self { alpha: vec![pos] }),
            2 => {
                let mut k = 0;
                while level_offset(k + 1, 2) <= pos {
                    k += 1;
                }
                let b = pos - level_offset(k, 2);
                Ok(Self { alpha: vec![k - b, b] })
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    /// All indices with `|α|₁ ≤ max_degree`, in enumeration order.
    pub fn enumerate(dim: usize, max_degree: usize) -> Result<Vec<Self>> {
        let n = basis_size(dim, max_degree)?;
        (0..n).map(|p| Self::from_position(p, dim)).collect()
    }
}

/// First position of level `k` in the enumeration.
pub fn level_offset(k: usize, dim: usize) -> usize {
    match dim {
        1 => k,
        _ => k * (k + 1) / 2,
    }
}

/// Number of indices with `|α|₁ ≤ n`.
pub fn basis_size(dim: usize, n: usize) -> Result<usize> {
    match dim {
        1 => Ok(n + 1),
        2 => Ok((n + 1) * (n + 2) / 2),
        d => Err(Error::UnsupportedDimension(d)),
    }
}
