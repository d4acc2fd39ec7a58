use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Pda, PdaEntry};
use crate::grid::Grid;

/// Outcome of one condition: whether it holds plus witnesses when it does not.
///
/// Witness positions are 1-based `(row, col)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub holds: bool,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub positions: Vec<(usize, usize)>,
    pub reason: String,
}

impl Condition {
    fn from(counterexamples: Vec<Counterexample>) -> Self {
        Condition {
            holds: counterexamples.is_empty(),
            counterexamples,
        }
    }

    pub fn first(&self) -> Option<&Counterexample> {
        self.counterexamples.first()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `(K', F', Z, S)` as declared by the array.
    pub signature: (usize, usize, usize, u32),
    pub c1: Condition,
    pub c2: Condition,
    pub c3: Condition,
}

impl ValidationReport {
    pub fn is_pda(&self) -> bool {
        self.c1.holds && self.c2.holds && self.c3.holds
    }
}

/// Checks C1-C3, keeping the first counterexample of each.
pub fn validate_pda(p: &Pda) -> ValidationReport {
    validate(p, false)
}

/// Like [`validate_pda`] but lists every counterexample.
pub fn validate_pda_verbose(p: &Pda) -> ValidationReport {
    validate(p, true)
}

fn validate(p: &Pda, exhaustive: bool) -> ValidationReport {
    let limit = if exhaustive { usize::MAX } else { 1 };

    let mut c1 = Vec::new();
    for col in 1..=p.cols() {
        let stars: Vec<(usize, usize)> = (1..=p.rows())
            .filter(|&r| p.get(r, col).is_star())
            .map(|r| (r, col))
            .collect();
        if stars.len() != p.z() {
            c1.push(Counterexample {
                reason: format!("column {col} has {} stars, expected {}", stars.len(), p.z()),
                positions: stars,
            });
            if c1.len() >= limit {
                break;
            }
        }
    }

    let mut seen = vec![false; p.s() as usize + 1];
    for e in p.grid().positions().filter_map(|(_, _, e)| e.int()) {
        seen[e as usize] = true;
    }
    let c2 = (1..=p.s())
        .filter(|&s| !seen[s as usize])
        .take(limit)
        .map(|s| Counterexample {
            positions: vec![],
            reason: format!("integer {s} never occurs"),
        })
        .collect();

    let c3 = c3_violations(p.grid(), limit);

    ValidationReport {
        signature: p.signature(),
        c1: Condition::from(c1),
        c2: Condition::from(c2),
        c3: Condition::from(c3),
    }
}

/// First pair of equal integers (in row-major order of the first, then the
/// second entry) that breaks C3, if any.
pub fn first_c3_violation(grid: &Grid<PdaEntry>) -> Option<Counterexample> {
    c3_violations(grid, 1).into_iter().next()
}

fn c3_violations(grid: &Grid<PdaEntry>, limit: usize) -> Vec<Counterexample> {
    let occurrences = occurrences(grid);
    // visit pairs ordered by (first position, second position) in row-major order
    let mut pairs: Vec<((usize, usize), (usize, usize))> = Vec::new();
    for positions in occurrences.values() {
        for (i, &a) in positions.iter().enumerate() {
            for &b in &positions[i + 1..] {
                pairs.push((a, b));
            }
        }
    }
    pairs.sort_unstable();

    let mut out = Vec::new();
    for ((r1, c1), (r2, c2)) in pairs {
        let s = grid.get(r1, c1);
        let reason = if r1 == r2 {
            format!("integer {s} repeats in row {r1}")
        } else if c1 == c2 {
            format!("integer {s} repeats in column {c1}")
        } else if !grid.get(r1, c2).is_star() || !grid.get(r2, c1).is_star() {
            format!("integer {s} at ({r1},{c1}) and ({r2},{c2}) without stars at the crossing")
        } else {
            continue;
        };
        out.push(Counterexample {
            positions: vec![(r1, c1), (r2, c2)],
            reason,
        });
        if out.len() >= limit {
            break;
        }
    }
    out
}

/// Positions of each integer, row-major.
fn occurrences(grid: &Grid<PdaEntry>) -> BTreeMap<u32, Vec<(usize, usize)>> {
    let mut map: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for (r, c, e) in grid.positions() {
        if let Some(s) = e.int() {
            map.entry(s).or_default().push((r, c));
        }
    }
    map
}

/// C4: every row carries exactly `K'Z/F'` stars, which must be an integer.
pub fn check_c4(p: &Pda) -> bool {
    let total = p.cols() * p.z();
    if total % p.rows() != 0 {
        return false;
    }
    let t = total / p.rows();
    (1..=p.rows()).all(|j| p.row_star_count(j) == t)
}

/// C5 for access degree `l`, evaluated straight from its definition.
///
/// For equal integers at `(j1,k1)` and `(j2,k2)`, let `i` be the rank of `k`
/// inside `A_j ∪ {k}` (star columns of row `j` plus `k`). The shifted column
/// `k1 + (i1-1)(l-1)` must be retrievable for packet `j2` and vice versa, where
/// the retrievable set of row `j` is `∪_h [A_j[h] + (h-1)(l-1), A_j[h] + h(l-1)]`.
pub fn check_c5(p: &Pda, l: usize) -> bool {
    assert!(l >= 1, "access degree must be at least 1");
    if !check_c4(p) {
        return false;
    }
    let star_sets: Vec<Vec<usize>> = (1..=p.rows()).map(|j| p.star_columns(j)).collect();
    let t = star_sets[0].len();
    let width = p.cols() + t * (l - 1);
    let retrievable: Vec<Vec<bool>> = star_sets
        .iter()
        .map(|set| {
            let mut mask = vec![false; width + 1];
            for (h0, &a) in set.iter().enumerate() {
                let h = h0 + 1;
                mask[a + (h - 1) * (l - 1)..=a + h * (l - 1)].fill(true);
            }
            mask
        })
        .collect();
    let shifted = |j: usize, k: usize| {
        let i = 1 + star_sets[j - 1].iter().filter(|&&a| a < k).count();
        k + (i - 1) * (l - 1)
    };

    for positions in occurrences(p.grid()).values() {
        for (i, &(j1, k1)) in positions.iter().enumerate() {
            for &(j2, k2) in &positions[i + 1..] {
                if !retrievable[j2 - 1][shifted(j1, k1)] || !retrievable[j1 - 1][shifted(j2, k2)] {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::mn_4_2;
    use super::super::parse_pda;
    use super::*;
    use PdaEntry::{Int, Star};

    #[test]
    fn mn_4_2_is_a_pda() {
        let r = validate_pda(&mn_4_2());
        assert!(r.is_pda());
        assert_eq!(r.signature, (4, 6, 3, 4));
    }

    #[test]
    fn single_star_is_vacuously_valid() {
        let p = Pda::with_signature(vec![vec![Star]], 1, 0).unwrap();
        let r = validate_pda(&p);
        assert!(r.c1.holds && r.c2.holds && r.c3.holds);
    }

    #[test]
    fn broken_c3_reports_first_pair() {
        let p = parse_pda("4 6 3 4\n* * 2 2\n* 1 * 3\n* 2 3 *\n1 * * 4\n2 * 4 *\n3 4 * *\n")
            .unwrap()
            .pda;
        let r = validate_pda(&p);
        assert!(r.c1.holds);
        assert!(!r.c3.holds);
        assert_eq!(r.c3.first().unwrap().positions, vec![(1, 3), (1, 4)]);
        assert_eq!(r.c3.counterexamples.len(), 1);
        assert!(validate_pda_verbose(&p).c3.counterexamples.len() > 1);
    }

    #[test]
    fn c1_and_c2_failures() {
        let p = Pda::with_signature(vec![vec![Star, Int(1)], vec![Int(3), Star]], 1, 3).unwrap();
        let r = validate_pda(&p);
        assert!(r.c1.holds);
        assert!(!r.c2.holds);
        assert_eq!(r.c2.first().unwrap().reason, "integer 2 never occurs");
        let q = Pda::with_signature(vec![vec![Star, Star], vec![Star, Int(1)]], 2, 1).unwrap();
        let r = validate_pda(&q);
        assert!(!r.c1.holds);
        assert_eq!(r.c1.first().unwrap().positions, vec![(1, 2)]);
    }

    #[test]
    fn crossing_without_stars_breaks_c3() {
        let p =
            Pda::with_signature(vec![vec![Int(1), Int(2)], vec![Int(2), Int(1)]], 0, 2).unwrap();
        let r = validate_pda(&p);
        assert_eq!(r.c3.first().unwrap().positions, vec![(1, 1), (2, 2)]);
    }

    #[test]
    fn c4_examples() {
        assert!(check_c4(&mn_4_2()));
        let uneven =
            Pda::with_signature(vec![vec![Star, Star], vec![Int(1), Int(2)]], 1, 2).unwrap();
        assert!(!check_c4(&uneven));
    }

    #[test]
    fn c5_examples() {
        let p = mn_4_2();
        assert!(check_c5(&p, 1));
        assert!(check_c5(&p, 3));
        let uneven =
            Pda::with_signature(vec![vec![Star, Star], vec![Int(1), Int(2)]], 1, 2).unwrap();
        assert!(!check_c5(&uneven, 1));
    }

    #[test]
    fn c5_at_unit_access_degree_is_c3() {
        // with l = 1 the shifts vanish, so C5 collapses to C3 for any C4 array
        let bad = Pda::with_signature(vec![vec![Star, Int(1)], vec![Star, Int(1)]], 1, 1).unwrap();
        assert!(check_c4(&bad));
        assert!(!validate_pda(&bad).c3.holds);
        assert!(!check_c5(&bad, 1));
    }
}
