//! Binomials, lexicographic subset ranking and subset enumeration.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubsetError {
    #[error("subset {subset:?} is not strictly increasing")]
    NotIncreasing { subset: Vec<usize> },
    #[error("element {element} outside [1, {n}]")]
    OutOfRange { element: usize, n: usize },
    #[error("rank {rank} outside [1, {count}]")]
    RankOutOfRange { rank: usize, count: usize },
}

/// `C(n, r)` exactly.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, r)` with `C(n, r) = 0` whenever `n < r`, `n < 0` or `r < 0`.
pub fn binomial_signed(n: i64, r: i64) -> BigInt {
    if n < 0 || r < 0 || r > n {
        BigInt::zero()
    } else {
        BigInt::from(binomial(n as u64, r as u64))
    }
}

/// `C(n, r)` as a machine integer; `None` on overflow.
pub fn binomial_usize(n: usize, r: usize) -> Option<usize> {
    binomial(n as u64, r as u64).to_usize()
}

/// All `r`-subsets of `[1, n]` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Subsets {
    Subsets {
        n,
        current: if r <= n {
            Some((1..=r).collect())
        } else {
            None
        },
    }
}

pub struct Subsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let r = out.len();
        let mut next = out.clone();
        // rightmost position that can still be incremented
        let mut i = r;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - (r - 1 - i) {
                next[i] += 1;
                for j in i + 1..r {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

fn check_subset(subset: &[usize], n: usize) -> Result<(), SubsetError> {
    if subset.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SubsetError::NotIncreasing {
            subset: subset.to_vec(),
        });
    }
    if let Some(&element) = subset.iter().find(|&&e| e == 0 || e > n) {
        return Err(SubsetError::OutOfRange { element, n });
    }
    Ok(())
}

/// 1-based position of `subset` among all `|subset|`-subsets of `[1, n]` in
/// lexicographic order.
pub fn lex_rank(subset: &[usize], n: usize) -> Result<usize, SubsetError> {
    check_subset(subset, n)?;
    let r = subset.len();
    let mut rank = 0usize;
    let mut prev = 0usize;
    for (i, &e) in subset.iter().enumerate() {
        for skipped in prev + 1..e {
            // subsets that take `skipped` at position i and anything larger after
            rank += binomial_usize(n - skipped, r - i - 1).expect("rank overflow");
        }
        prev = e;
    }
    Ok(rank + 1)
}

/// Inverse of [`lex_rank`].
pub fn lex_unrank(rank: usize, r: usize, n: usize) -> Result<Vec<usize>, SubsetError> {
    let count = binomial_usize(n, r).expect("count overflow");
    if rank == 0 || rank > count {
        return Err(SubsetError::RankOutOfRange { rank, count });
    }
    let mut remaining = rank - 1;
    let mut out = Vec::with_capacity(r);
    let mut candidate = 1usize;
    for i in 0..r {
        loop {
            let block = binomial_usize(n - candidate, r - i - 1).expect("count overflow");
            if remaining < block {
                out.push(candidate);
                candidate += 1;
                break;
            }
            remaining -= block;
            candidate += 1;
        }
    }
    Ok(out)
}
