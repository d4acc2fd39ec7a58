//! Closed-form rate expressions, the converse bound and the counting identity
//! behind it. Everything is exact; `curve` builds envelopes and comparison
//! tables on top.

mod curve;

pub use curve::{
    comparison_csv, comparison_table, corners, default_grid, envelope, envelope_eval, gap_checks,
    interpolate, ComparisonRow, GapReport, GapRow, HkdGap, HkdPoint, LoadCurve, Scheme,
};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::combinatorics::{binomial_signed, subsets};
use crate::grid::cyclic_distance;
use crate::ratio::{int, ratio, Ratio};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("parameters out of range: {0}")]
    OutOfRange(String),
    #[error("no points to build an envelope from")]
    EmptyInput,
    #[error("memory ratio {0} appears twice")]
    DuplicateRatio(String),
    #[error("memory ratio {0} lies below the first point of the curve")]
    BelowDomain(String),
}

fn out_of_range(msg: String) -> AnalysisError {
    AnalysisError::OutOfRange(msg)
}

/// One point of a memory/load tradeoff, both normalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadPoint {
    pub memory_ratio: Ratio,
    pub load: Ratio,
}

impl LoadPoint {
    pub fn new(memory_ratio: Ratio, load: Ratio) -> Self {
        LoadPoint { memory_ratio, load }
    }
}

fn check_ring(k: usize, l: usize, t: usize) -> Result<(), AnalysisError> {
    if k == 0 || l == 0 || l > k {
        return Err(out_of_range(format!("need 1 <= L <= K, got K={k} L={l}")));
    }
    if t * l > k {
        return Err(out_of_range(format!("need tL <= K, got K={k} L={l} t={t}")));
    }
    Ok(())
}

/// Shared-link MN load `(K - t) / (t + 1)`.
pub fn r_mn(k: usize, t: usize) -> Result<Ratio, AnalysisError> {
    if k == 0 || t > k {
        return Err(out_of_range(format!("need 0 <= t <= K, got K={k} t={t}")));
    }
    Ok(ratio(k as i64 - t as i64, t as i64 + 1))
}

/// Load of the cyclic-wrap scheme: `(K - tL)/(t + 1)` when `L | K`, else
/// `(K - t)/(t + 1)` for `t <= floor(K / 2L)`. `divides` must agree with
/// `L | K`.
pub fn r_hkd(k: usize, l: usize, t: usize, divides: bool) -> Result<Ratio, AnalysisError> {
    check_ring(k, l, 0)?;
    if divides != (k % l == 0) {
        return Err(out_of_range(format!("divides={divides} but K={k} L={l}")));
    }
    if divides {
        check_ring(k, l, t)?;
        Ok(ratio((k - t * l) as i64, t as i64 + 1))
    } else {
        if t > k / (2 * l) {
            return Err(out_of_range(format!(
                "need t <= K/(2L), got K={k} L={l} t={t}"
            )));
        }
        Ok(ratio((k - t) as i64, t as i64 + 1))
    }
}

/// `(K - tL)^2 / K`.
pub fn r_rk(k: usize, l: usize, t: usize) -> Result<Ratio, AnalysisError> {
    check_ring(k, l, t)?;
    let d = (k - t * l) as i64;
    Ok(ratio(d * d, k as i64))
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Load of the structured-rank scheme.
pub fn r_sr(k: usize, l: usize, t: usize) -> Result<Ratio, AnalysisError> {
    check_ring(k, l, t)?;
    let tl = t * l;
    let rest = k - tl;
    if k - 1 == tl {
        return Ok(ratio(1, k as i64));
    }
    let tail = |from: usize| -> Ratio {
        (from..=rest).fold(Ratio::zero(), |acc, h| {
            acc + ratio(2, 1 + ceil_div(tl, h) as i64)
        })
    };
    if rest % 2 == 0 {
        Ok(tail((rest + 2) / 2))
    } else {
        let head = ratio(1, ceil_div(2 * tl, rest + 1) as i64 + 1);
        Ok(head + tail((rest + 3) / 2))
    }
}

/// Load of the PDA-transform scheme built on MN arrays, `(K - tL)/(t + 1)`.
pub fn r_t1(k: usize, l: usize, t: usize) -> Result<Ratio, AnalysisError> {
    check_ring(k, l, t)?;
    Ok(ratio((k - t * l) as i64, t as i64 + 1))
}

/// Load of the partition-array scheme, `q - 1`.
pub fn r_t3(q: usize) -> Result<Ratio, AnalysisError> {
    if q < 2 {
        return Err(out_of_range(format!("need q >= 2, got {q}")));
    }
    Ok(int(q as i64 - 1))
}

/// Compressed load `(K - tL)^2 / K`, valid for `tL + 1 < K < tL + L`.
pub fn r_cor1(k: usize, l: usize, t: usize) -> Result<Ratio, AnalysisError> {
    check_ring(k, l, t)?;
    if !(t * l + 1 < k && k < t * l + l) {
        return Err(out_of_range(format!(
            "need tL + 1 < K < tL + L, got K={k} L={l} t={t}"
        )));
    }
    r_rk(k, l, t)
}

/// Compressed partition load `2(q - 1)^2 / (q + L - 1)`, valid for `L >= q`.
pub fn r_cor2(q: usize, l: usize) -> Result<Ratio, AnalysisError> {
    if q < 2 || l < q {
        return Err(out_of_range(format!("need 2 <= q <= L, got q={q} L={l}")));
    }
    let d = q as i64 - 1;
    Ok(ratio(2 * d * d, (q + l - 1) as i64))
}

/// Converse bound at an integer point `t` together with `X = tL - t + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConverseInstance {
    pub k: usize,
    pub l: usize,
    pub t: usize,
    pub x: i64,
    pub bound: Ratio,
}

/// Lower bound on the load of any scheme using MN-style placement, for
/// `1 <= t <= floor(K / L)`.
pub fn converse_bound(k: usize, l: usize, t: usize) -> Result<ConverseInstance, AnalysisError> {
    check_ring(k, l, t)?;
    if t == 0 {
        return Err(out_of_range("converse needs t >= 1".into()));
    }
    let (ki, li, ti) = (k as i64, l as i64, t as i64);
    let x = ti * li - ti + 1;
    let num: BigInt = binomial_signed(ki - li - x, ti - 1)
        + BigInt::from(ki - li - 1) * binomial_signed(ki - li - x + 1, ti)
        - binomial_signed(ki - li - x, ti + 1);
    let den = BigInt::from(ki) * binomial_signed(ki - x, ti - 1);
    if den.is_zero() {
        return Err(out_of_range(format!(
            "degenerate bound at K={k} L={l} t={t}"
        )));
    }
    Ok(ConverseInstance {
        k,
        l,
        t,
        x,
        bound: Ratio::new(num, den),
    })
}

/// Closed form for the number of `t`-subsets of the last `q` users whose
/// members pairwise sit at least `L` apart: `C(q - X, t - 1) q / t`. The
/// division is exact since the expression counts `t`-subsets of a `q`-cycle.
pub fn count_sq(k: usize, l: usize, t: usize, q: usize) -> Result<BigInt, AnalysisError> {
    check_ring(k, l, t)?;
    if t == 0 || q < t * l || q > k {
        return Err(out_of_range(format!(
            "need t >= 1 and tL <= q <= K, got K={k} L={l} t={t} q={q}"
        )));
    }
    let x = (t * l - t + 1) as i64;
    let c = binomial_signed(q as i64 - x, t as i64 - 1);
    Ok(c * BigInt::from(q) / BigInt::from(t))
}

/// How "at least `L` apart" is read when counting subsets by brute force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistanceReading {
    /// Cyclic distance on the full ring of `K` nodes.
    CyclicRing,
    /// Plain difference of user indices, no wraparound.
    Linear,
    /// The `q` users treated as their own ring of length `q`.
    CyclicInterval,
}

impl DistanceReading {
    pub const ALL: [DistanceReading; 3] = [
        DistanceReading::CyclicRing,
        DistanceReading::Linear,
        DistanceReading::CyclicInterval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceReading::CyclicRing => "cyclic-ring",
            DistanceReading::Linear => "linear",
            DistanceReading::CyclicInterval => "cyclic-interval",
        }
    }
}

/// Brute-force count of `t`-subsets of `[K - q + 1, K]` with every pair at
/// least `L` apart under `reading`.
pub fn count_sq_oracle(
    k: usize,
    l: usize,
    t: usize,
    q: usize,
    reading: DistanceReading,
) -> Result<u64, AnalysisError> {
    if q > k || t > q {
        return Err(out_of_range(format!(
            "need t <= q <= K, got K={k} t={t} q={q}"
        )));
    }
    let offset = k - q;
    let far = |a: usize, b: usize| -> bool {
        let d = match reading {
            DistanceReading::CyclicRing => cyclic_distance(a + offset, b + offset, k),
            DistanceReading::Linear => a.abs_diff(b),
            DistanceReading::CyclicInterval => cyclic_distance(a, b, q),
        };
        d >= l
    };
    let count = subsets(q, t)
        .filter(|s| {
            s.iter()
                .enumerate()
                .all(|(i, &a)| s[i + 1..].iter().all(|&b| far(a, b)))
        })
        .count();
    Ok(count as u64)
}

/// Sorted corner points with an optional tail point appended. Repeated ratios
/// keep the smaller load.
pub(crate) fn corner_set(
    points: impl IntoIterator<Item = LoadPoint>,
    tail: Option<LoadPoint>,
) -> Vec<LoadPoint> {
    let mut out: Vec<LoadPoint> = Vec::new();
    for p in points.into_iter().chain(tail) {
        match out.iter_mut().find(|q| q.memory_ratio == p.memory_ratio) {
            Some(q) if p.load < q.load => q.load = p.load,
            Some(_) => {}
            None => out.push(p),
        }
    }
    out.sort_by(|a, b| a.memory_ratio.cmp(&b.memory_ratio));
    out
}
