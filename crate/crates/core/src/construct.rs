//! Concrete PDA families: the MN array and the partition array.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{binomial_usize, lex_rank, subsets};
use crate::grid::wrap;
use crate::pda::{Pda, PdaEntry};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("MN parameters need 1 <= t < K', got K'={k_prime}, t={t}")]
    MnParams { k_prime: usize, t: usize },
    #[error("partition parameters need m >= 2 and q >= 2, got m={m}, q={q}")]
    PartitionParams { m: usize, q: usize },
    #[error("uncoded array needs K' >= 1")]
    NoUsers,
    #[error("array dimensions overflow")]
    TooLarge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MnParams {
    k_prime: usize,
    t: usize,
}

impl MnParams {
    pub fn new(k_prime: usize, t: usize) -> Result<Self, ConstructionError> {
        if t == 0 || t >= k_prime {
            return Err(ConstructionError::MnParams { k_prime, t });
        }
        Ok(MnParams { k_prime, t })
    }

    pub fn k_prime(&self) -> usize {
        self.k_prime
    }

    pub fn t(&self) -> usize {
        self.t
    }
}

/// MN array: rows are the `t`-subsets `T` of `[K']` in lexicographic order;
/// entry `(T, k)` is a star when `k ∈ T`, otherwise the lexicographic rank of
/// `T ∪ {k}` among the `(t+1)`-subsets.
pub fn mn_pda(params: MnParams) -> Result<Pda, ConstructionError> {
    let (k, t) = (params.k_prime, params.t);
    let z = binomial_usize(k - 1, t - 1).ok_or(ConstructionError::TooLarge)?;
    let s = binomial_usize(k, t + 1)
        .and_then(|s| u32::try_from(s).ok())
        .ok_or(ConstructionError::TooLarge)?;
    binomial_usize(k, t).ok_or(ConstructionError::TooLarge)?;

    let rows = subsets(k, t)
        .map(|row| {
            (1..=k)
                .map(|col| {
                    if row.contains(&col) {
                        PdaEntry::Star
                    } else {
                        let mut union = row.clone();
                        union.push(col);
                        union.sort_unstable();
                        let rank = lex_rank(&union, k).expect("valid subset");
                        PdaEntry::Int(rank as u32)
                    }
                })
                .collect()
        })
        .collect();
    Ok(Pda::with_signature(rows, z, s).expect("MN rows are well-formed"))
}

/// Single-row array `[1 2 ... K']`: no caching, every user served by its own
/// message. Serves as the `t = 0` member of the MN family.
pub fn uncoded_pda(k_prime: usize) -> Result<Pda, ConstructionError> {
    if k_prime == 0 {
        return Err(ConstructionError::NoUsers);
    }
    let row = (1..=k_prime as u32).map(PdaEntry::Int).collect();
    Ok(Pda::with_signature(vec![row], 0, k_prime as u32).expect("well-formed"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionParams {
    m: usize,
    q: usize,
}

impl PartitionParams {
    pub fn new(m: usize, q: usize) -> Result<Self, ConstructionError> {
        if m < 2 || q < 2 {
            return Err(ConstructionError::PartitionParams { m, q });
        }
        Ok(PartitionParams { m, q })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Flat column index of `(delta, b)`.
    pub fn column(&self, delta: usize, b: usize) -> usize {
        (delta - 1) * self.q + b
    }
}

/// One integer label of a partition array before renumbering.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartitionLabel {
    /// The vector `e` obtained by overwriting one coordinate of a row label.
    pub vector: Vec<usize>,
    /// Occurrence order of `e` within its column.
    pub occurrence: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPda {
    pub pda: Pda,
    /// Row labels `f` in row order.
    pub row_labels: Vec<Vec<usize>>,
    /// `labels[s-1]` is the `(e, n_e)` pair that integer `s` stands for.
    pub labels: Vec<PartitionLabel>,
}

/// Partition array with `q^(m-1)` rows and `mq` columns.
///
/// Rows are the vectors `f ∈ [q]^m` whose last coordinate is
/// `wrap(f_1 + ... + f_{m-1}, q)`, listed with `(f_1, ..., f_{m-1})` in
/// lexicographic order. Column `(δ, b)` sits at flat index `(δ-1)q + b`. The
/// entry is a star when `f_δ = b`, otherwise the pair `(e, n_e)` where `e` is
/// `f` with coordinate `δ` replaced by `b`. Pairs are renumbered to `1..=S`
/// in row-major order of first appearance.
pub fn partition_pda(params: PartitionParams) -> Result<PartitionPda, ConstructionError> {
    let (m, q) = (params.m, params.q);
    let n_rows = q
        .checked_pow((m - 1) as u32)
        .ok_or(ConstructionError::TooLarge)?;

    let row_labels: Vec<Vec<usize>> = (0..n_rows)
        .map(|idx| {
            let mut f = vec![0; m];
            let mut rest = idx;
            for slot in (0..m - 1).rev() {
                f[slot] = rest % q + 1;
                rest /= q;
            }
            f[m - 1] = wrap(f[..m - 1].iter().sum::<usize>() as i64, q);
            f
        })
        .collect();

    let mut label_ids: HashMap<PartitionLabel, u32> = HashMap::new();
    let mut labels = Vec::new();
    let mut seen_in_column: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    let mut rows = Vec::with_capacity(n_rows);
    for f in &row_labels {
        let mut row = Vec::with_capacity(m * q);
        for delta in 1..=m {
            for b in 1..=q {
                if f[delta - 1] == b {
                    row.push(PdaEntry::Star);
                    continue;
                }
                let mut e = f.clone();
                e[delta - 1] = b;
                let counter = seen_in_column
                    .entry((params.column(delta, b), e.clone()))
                    .or_insert(0);
                *counter += 1;
                let label = PartitionLabel {
                    vector: e,
                    occurrence: *counter,
                };
                let id = *label_ids.entry(label.clone()).or_insert_with(|| {
                    labels.push(label);
                    labels.len() as u32
                });
                row.push(PdaEntry::Int(id));
            }
        }
        rows.push(row);
    }

    let z = if m >= 2 { q.pow((m - 2) as u32) } else { 0 };
    let s = labels.len() as u32;
    Ok(PartitionPda {
        pda: Pda::with_signature(rows, z, s).expect("well-formed"),
        row_labels,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pda::{check_c4, parse_pda, validate_pda};
    use PdaEntry::{Int, Star};

    #[test]
    fn mn_4_2_matches_hand_written_array() {
        let p = mn_pda(MnParams::new(4, 2).unwrap()).unwrap();
        let expected =
            parse_pda("4 6 3 4\n* * 1 2\n* 1 * 3\n* 2 3 *\n1 * * 4\n2 * 4 *\n3 4 * *\n").unwrap();
        assert_eq!(p, expected.pda);
    }

    #[test]
    fn small_mn_arrays() {
        let p = mn_pda(MnParams::new(2, 1).unwrap()).unwrap();
        assert_eq!(p.row(1), &[Star, Int(1)]);
        assert_eq!(p.row(2), &[Int(1), Star]);

        let p = mn_pda(MnParams::new(3, 2).unwrap()).unwrap();
        assert_eq!(p.signature(), (3, 3, 2, 1));
        assert_eq!(p.row(1), &[Star, Star, Int(1)]);
        assert_eq!(p.row(2), &[Star, Int(1), Star]);
        assert_eq!(p.row(3), &[Int(1), Star, Star]);
    }

    #[test]
    fn mn_params_validated() {
        assert!(MnParams::new(4, 0).is_err());
        assert!(MnParams::new(4, 4).is_err());
        assert!(MnParams::new(1, 1).is_err());
    }

    #[test]
    fn partition_2_2() {
        let pp = partition_pda(PartitionParams::new(2, 2).unwrap()).unwrap();
        assert_eq!(pp.row_labels, vec![vec![1, 1], vec![2, 2]]);
        assert_eq!(pp.pda.row(1), &[Star, Int(1), Star, Int(2)]);
        assert_eq!(pp.pda.row(2), &[Int(2), Star, Int(1), Star]);
        assert_eq!(pp.pda.signature(), (4, 2, 1, 2));
        assert_eq!(pp.labels[0].vector, vec![2, 1]);
        assert_eq!(pp.labels[1].vector, vec![1, 2]);
    }

    #[test]
    fn partition_3_2_signature() {
        let pp = partition_pda(PartitionParams::new(3, 2).unwrap()).unwrap();
        assert_eq!(pp.pda.signature(), (6, 4, 2, 4));
        assert!(validate_pda(&pp.pda).is_pda());
        assert!(check_c4(&pp.pda));
        for j in 1..=4 {
            assert_eq!(pp.pda.row_star_count(j), 3);
        }
    }

    #[test]
    fn partition_params_validated() {
        assert!(PartitionParams::new(1, 2).is_err());
        assert!(PartitionParams::new(2, 1).is_err());
    }

    #[test]
    fn uncoded_array() {
        let p = uncoded_pda(3).unwrap();
        assert_eq!(p.signature(), (3, 1, 0, 3));
        assert!(validate_pda(&p).is_pda());
        assert!(uncoded_pda(0).is_err());
    }
}
