//! PDA to multiaccess scheme: node placement, user retrieval and user delivery
//! arrays for round 1, and cyclic shifts for the remaining rounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{wrap, Grid};
use crate::pda::{check_c4, check_c5, first_c3_violation, star_profile, Pda, PdaEntry};
use crate::ratio::{ratio, Ratio};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("PDA has {found} columns but K - t(L-1) = {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("PDA rows carry {found} stars, parameters say t = {expected}")]
    StarCountMismatch { expected: usize, found: usize },
    #[error("PDA violates C4 (rows must share the same star count)")]
    C4Violation,
    #[error("PDA violates {0}")]
    ConditionViolation(&'static str),
    #[error("row {row}: {nulls} nulls in the retrieve array but {integers} integers in the PDA")]
    RowCountMismatch {
        row: usize,
        nulls: usize,
        integers: usize,
    },
    #[error("user-delivery array breaks C3 at {positions:?}: {reason}")]
    C3ViolationInQ {
        positions: Vec<(usize, usize)>,
        reason: String,
    },
    #[error("round {round} outside [1, {k}]")]
    RoundOutOfRange { round: usize, k: usize },
    #[error("shift needs a round-1 array, got round {0}")]
    NotBaseRound(usize),
    #[error("round-1 placement wraps around in row {0}")]
    Wraparound(usize),
}

/// `K` nodes/users, access degree `L`, replication `t`, `N` files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiaccessParams {
    k: usize,
    l: usize,
    t: usize,
    n: usize,
}

impl MultiaccessParams {
    pub fn new(k: usize, l: usize, t: usize, n: usize) -> Result<Self, TransformError> {
        let bad = |m: String| Err(TransformError::InvalidParams(m));
        if k == 0 || l == 0 {
            return bad(format!("K and L must be positive, got K={k}, L={l}"));
        }
        if l > k {
            return bad(format!("L={l} exceeds K={k}"));
        }
        if t * l > k {
            return bad(format!("t={t} exceeds floor(K/L)={}", k / l));
        }
        if n < k {
            return bad(format!("N={n} must be at least K={k}"));
        }
        Ok(MultiaccessParams { k, l, t, n })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `K' = K - t(L-1)`.
    pub fn k_prime(&self) -> usize {
        self.k - self.t * (self.l - 1)
    }

    /// `K > tL + 1`; below this the earlier schemes are at least as good.
    pub fn is_nontrivial(&self) -> bool {
        self.k > self.t * self.l + 1
    }

    /// Cache-node memory `M = N t / K`.
    pub fn memory(&self) -> Ratio {
        ratio(self.n * self.t, self.k)
    }
}

fn star_sets(grid: &Grid<bool>) -> Vec<Vec<usize>> {
    grid.row_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &s)| s)
                .map(|(c, _)| c + 1)
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePlacementArray {
    pub round: usize,
    /// `true` marks a star: node `k` stores packet `j` of this round.
    pub grid: Grid<bool>,
    pub cache_sets: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRetrieveArray {
    pub round: usize,
    /// `true` marks a star: user `k` can read packet `j` from its nodes.
    pub grid: Grid<bool>,
    pub retrieve_sets: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserDeliveryArray {
    pub round: usize,
    pub grid: Grid<PdaEntry>,
}

/// Arrays that can be rotated from round 1 into round `g`.
pub trait RoundArray: Sized {
    fn round(&self) -> usize;
    fn cols(&self) -> usize;
    #[doc(hidden)]
    fn shifted(&self, by: usize, round: usize) -> Self;

    /// Round `g` copy: column `k` takes column `wrap(k - (g-1), K)` of round 1.
    fn shift_round(&self, g: usize) -> Result<Self, TransformError> {
        if self.round() != 1 {
            return Err(TransformError::NotBaseRound(self.round()));
        }
        if g == 0 || g > self.cols() {
            return Err(TransformError::RoundOutOfRange {
                round: g,
                k: self.cols(),
            });
        }
        Ok(self.shifted(g - 1, g))
    }
}

impl RoundArray for NodePlacementArray {
    fn round(&self) -> usize {
        self.round
    }

    fn cols(&self) -> usize {
        self.grid.cols()
    }

    fn shifted(&self, by: usize, round: usize) -> Self {
        let grid = self.grid.shift_right(by);
        NodePlacementArray {
            round,
            cache_sets: star_sets(&grid),
            grid,
        }
    }
}

impl RoundArray for UserRetrieveArray {
    fn round(&self) -> usize {
        self.round
    }

    fn cols(&self) -> usize {
        self.grid.cols()
    }

    fn shifted(&self, by: usize, round: usize) -> Self {
        let grid = self.grid.shift_right(by);
        UserRetrieveArray {
            round,
            retrieve_sets: star_sets(&grid),
            grid,
        }
    }
}

impl RoundArray for UserDeliveryArray {
    fn round(&self) -> usize {
        self.round
    }

    fn cols(&self) -> usize {
        self.grid.cols()
    }

    fn shifted(&self, by: usize, round: usize) -> Self {
        UserDeliveryArray {
            round,
            grid: self.grid.shift_right(by),
        }
    }
}

fn check_dimensions(p: &Pda, params: &MultiaccessParams) -> Result<(), TransformError> {
    if !check_c4(p) {
        return Err(TransformError::C4Violation);
    }
    if p.cols() != params.k_prime() {
        return Err(TransformError::DimensionMismatch {
            expected: params.k_prime(),
            found: p.cols(),
        });
    }
    let t = p.row_star_count(1);
    if t != params.t() {
        return Err(TransformError::StarCountMismatch {
            expected: params.t(),
            found: t,
        });
    }
    Ok(())
}

/// Round-1 placement: row `j` stores at nodes `A_j[h] + h(L-1)`.
pub fn node_placement(
    p: &Pda,
    params: &MultiaccessParams,
) -> Result<NodePlacementArray, TransformError> {
    check_dimensions(p, params)?;
    let profile = star_profile(p).map_err(|_| TransformError::C4Violation)?;
    let (k, l) = (params.k(), params.l());
    let mut grid = Grid::filled(p.rows(), k, false);
    let mut cache_sets = Vec::with_capacity(p.rows());
    for (j0, set) in profile.star_sets.iter().enumerate() {
        let nodes: Vec<usize> = set
            .iter()
            .enumerate()
            .map(|(h0, &a)| a + (h0 + 1) * (l - 1))
            .collect();
        if nodes.iter().any(|&c| c > k) {
            return Err(TransformError::Wraparound(j0 + 1));
        }
        for &c in &nodes {
            grid.set(j0 + 1, c, true);
        }
        cache_sets.push(nodes);
    }
    Ok(NodePlacementArray {
        round: 1,
        grid,
        cache_sets,
    })
}

/// User `k` reads nodes `k, ..., k+L-1`, so packet `j` is retrievable by the
/// users `c-(L-1), ..., c` for each node `c` that stores it.
pub fn user_retrieve(c: &NodePlacementArray, params: &MultiaccessParams) -> UserRetrieveArray {
    let (k, l) = (params.k(), params.l());
    let mut grid = Grid::filled(c.grid.rows(), k, false);
    for (j0, nodes) in c.cache_sets.iter().enumerate() {
        for &node in nodes {
            for back in 0..l {
                grid.set(j0 + 1, wrap(node as i64 - back as i64, k), true);
            }
        }
    }
    UserRetrieveArray {
        round: c.round,
        retrieve_sets: star_sets(&grid),
        grid,
    }
}

/// Filling map of one row: `(k, k')` pairs sending the `h`-th null column of
/// the retrieve array to the `h`-th integer column of the PDA.
pub type Psi = Vec<(usize, usize)>;

/// Round-1 delivery array plus the per-row filling maps. Fails when the
/// result breaks C3, which means the PDA does not satisfy C5.
pub fn user_delivery(
    p: &Pda,
    u: &UserRetrieveArray,
) -> Result<(UserDeliveryArray, Vec<Psi>), TransformError> {
    if u.grid.rows() != p.rows() {
        return Err(TransformError::DimensionMismatch {
            expected: p.rows(),
            found: u.grid.rows(),
        });
    }
    let k = u.grid.cols();
    let mut grid = Grid::filled(p.rows(), k, PdaEntry::Star);
    let mut psi = Vec::with_capacity(p.rows());
    for j in 1..=p.rows() {
        let nulls: Vec<usize> = (1..=k).filter(|&c| !*u.grid.get(j, c)).collect();
        let ints = p.integer_columns(j);
        if nulls.len() != ints.len() {
            return Err(TransformError::RowCountMismatch {
                row: j,
                nulls: nulls.len(),
                integers: ints.len(),
            });
        }
        for (&col, &src) in nulls.iter().zip(&ints) {
            grid.set(j, col, p.get(j, src));
        }
        psi.push(nulls.into_iter().zip(ints).collect());
    }
    if let Some(ce) = first_c3_violation(&grid) {
        return Err(TransformError::C3ViolationInQ {
            positions: ce.positions,
            reason: ce.reason,
        });
    }
    Ok((
        UserDeliveryArray {
            round: u.round,
            grid,
        },
        psi,
    ))
}

/// All `K` rounds of placement, retrieval and delivery arrays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeArrays {
    pub params: MultiaccessParams,
    /// `(K', F', Z, S)` of the source PDA.
    pub pda_signature: (usize, usize, usize, u32),
    pub c: Vec<NodePlacementArray>,
    pub u: Vec<UserRetrieveArray>,
    pub q: Vec<UserDeliveryArray>,
    /// Round-1 filling maps, one per row.
    pub psi: Vec<Psi>,
}

impl SchemeArrays {
    pub fn k(&self) -> usize {
        self.params.k()
    }

    /// Packets per part `F'`.
    pub fn rows(&self) -> usize {
        self.pda_signature.1
    }

    pub fn s(&self) -> u32 {
        self.pda_signature.3
    }

    /// `M/N = K'Z / (K F')`.
    pub fn memory_ratio(&self) -> Ratio {
        let (kp, f, z, _) = self.pda_signature;
        ratio(kp * z, self.k() * f)
    }

    /// `F = K F'`.
    pub fn subpacketization(&self) -> usize {
        self.k() * self.rows()
    }

    /// `S / F'`.
    pub fn load(&self) -> Ratio {
        ratio(self.s(), self.rows())
    }

    pub fn round_c(&self, g: usize) -> &NodePlacementArray {
        &self.c[g - 1]
    }

    pub fn round_u(&self, g: usize) -> &UserRetrieveArray {
        &self.u[g - 1]
    }

    pub fn round_q(&self, g: usize) -> &UserDeliveryArray {
        &self.q[g - 1]
    }
}

/// Builds every round after checking C4 and C5 on the source PDA.
pub fn build_scheme(p: &Pda, params: &MultiaccessParams) -> Result<SchemeArrays, TransformError> {
    if !check_c4(p) {
        return Err(TransformError::ConditionViolation("C4"));
    }
    if !check_c5(p, params.l()) {
        return Err(TransformError::ConditionViolation("C5"));
    }
    let c1 = node_placement(p, params)?;
    let u1 = user_retrieve(&c1, params);
    let (q1, psi) = user_delivery(p, &u1)?;
    let k = params.k();

    let c = (1..=k)
        .into_par_iter()
        .map(|g| c1.shifted(g - 1, g))
        .collect();
    let u = (1..=k)
        .into_par_iter()
        .map(|g| u1.shifted(g - 1, g))
        .collect();
    let q = (1..=k)
        .into_par_iter()
        .map(|g| q1.shifted(g - 1, g))
        .collect();
    Ok(SchemeArrays {
        params: *params,
        pda_signature: p.signature(),
        c,
        u,
        q,
        psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{mn_pda, uncoded_pda, MnParams};

    fn mn(k: usize, t: usize) -> Pda {
        mn_pda(MnParams::new(k, t).unwrap()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(MultiaccessParams::new(8, 3, 2, 8).is_ok());
        assert!(MultiaccessParams::new(8, 3, 3, 8).is_err());
        assert!(MultiaccessParams::new(8, 0, 1, 8).is_err());
        assert!(MultiaccessParams::new(8, 3, 2, 7).is_err());
        let p = MultiaccessParams::new(8, 3, 2, 8).unwrap();
        assert_eq!(p.k_prime(), 4);
        assert!(p.is_nontrivial());
        assert!(!MultiaccessParams::new(7, 3, 2, 8).unwrap().is_nontrivial());
    }

    #[test]
    fn unit_access_degree_leaves_stars_in_place() {
        let p = mn(5, 2);
        let params = MultiaccessParams::new(5, 1, 2, 5).unwrap();
        let c = node_placement(&p, &params).unwrap();
        for j in 1..=p.rows() {
            assert_eq!(c.cache_sets[j - 1], p.star_columns(j));
        }
        let u = user_retrieve(&c, &params);
        assert_eq!(u.grid, c.grid);
    }

    #[test]
    fn single_replication_small_ring() {
        let p = mn(3, 1);
        let params = MultiaccessParams::new(5, 3, 1, 5).unwrap();
        let c = node_placement(&p, &params).unwrap();
        assert_eq!(c.cache_sets, vec![vec![3], vec![4], vec![5]]);
        let u = user_retrieve(&c, &params);
        let (q, _) = user_delivery(&p, &u).unwrap();
        for j in 1..=3 {
            let ints: Vec<usize> = (1..=5).filter(|&k| !q.grid.get(j, k).is_star()).collect();
            assert_eq!(ints.len(), 2);
            assert!(ints.iter().all(|k| !u.retrieve_sets[j - 1].contains(k)));
        }
    }

    #[test]
    fn zero_replication_has_no_stars() {
        let p = uncoded_pda(4).unwrap();
        let params = MultiaccessParams::new(4, 2, 0, 4).unwrap();
        let s = build_scheme(&p, &params).unwrap();
        assert!(s.u[0].grid.positions().all(|(_, _, &x)| !x));
        assert_eq!(s.load(), ratio(4, 1));
        assert_eq!(s.memory_ratio(), ratio(0, 1));
    }

    #[test]
    fn all_star_pda_gives_all_star_delivery() {
        let p = Pda::with_signature(vec![vec![PdaEntry::Star; 2]], 1, 0).unwrap();
        let params = MultiaccessParams::new(2, 1, 2, 2).unwrap();
        let c = node_placement(&p, &params).unwrap();
        let u = user_retrieve(&c, &params);
        let (q, _) = user_delivery(&p, &u).unwrap();
        assert!(q.grid.positions().all(|(_, _, e)| e.is_star()));
    }

    #[test]
    fn shift_preconditions() {
        let p = mn(4, 2);
        let params = MultiaccessParams::new(8, 3, 2, 8).unwrap();
        let c = node_placement(&p, &params).unwrap();
        assert_eq!(c.shift_round(1).unwrap(), c);
        let c2 = c.shift_round(2).unwrap();
        assert_eq!(c2.shift_round(3), Err(TransformError::NotBaseRound(2)));
        assert!(c.shift_round(9).is_err());
        assert!(c.shift_round(0).is_err());
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let p = mn(4, 2);
        let wrong_k = MultiaccessParams::new(9, 3, 2, 9).unwrap();
        assert!(matches!(
            node_placement(&p, &wrong_k),
            Err(TransformError::DimensionMismatch { .. })
        ));
        let wrong_t = MultiaccessParams::new(4, 1, 1, 4).unwrap();
        assert!(matches!(
            node_placement(&p, &wrong_t),
            Err(TransformError::StarCountMismatch { .. })
        ));
    }
}
