use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use super::{converse_bound, corner_set, r_hkd, r_rk, r_sr, r_t1, AnalysisError, LoadPoint};
use crate::ratio::{decimal_string, fraction_string, int, ratio, Ratio};

/// Curves that can be tabulated against each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Hkd,
    Rk,
    Sr,
    T1,
    Conv,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Hkd,
        Scheme::Rk,
        Scheme::Sr,
        Scheme::T1,
        Scheme::Conv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Hkd => "hkd",
            Scheme::Rk => "rk",
            Scheme::Sr => "sr",
            Scheme::T1 => "t1",
            Scheme::Conv => "conv",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| AnalysisError::OutOfRange(format!("unknown scheme {s:?}")))
    }
}

fn tail(l: usize) -> Option<LoadPoint> {
    Some(LoadPoint::new(ratio(1, l as i64), Ratio::zero()))
}

fn sweep(
    k: usize,
    ts: impl Iterator<Item = usize>,
    f: impl Fn(usize) -> Result<Ratio, AnalysisError>,
) -> Result<Vec<LoadPoint>, AnalysisError> {
    ts.map(|t| Ok(LoadPoint::new(ratio(t as i64, k as i64), f(t)?)))
        .collect()
}

/// Achievable corner points of a scheme, sorted by memory ratio. For `Conv`
/// these are the bound values at integer `t` together with `(0, K)` and
/// `(1/L, 0)`.
pub fn corners(scheme: Scheme, k: usize, l: usize) -> Result<Vec<LoadPoint>, AnalysisError> {
    r_t1(k, l, 0)?;
    let top = k / l;
    let pts = match scheme {
        Scheme::Hkd => {
            let divides = k % l == 0;
            let last = if divides { top } else { k / (2 * l) };
            corner_set(sweep(k, 0..=last, |t| r_hkd(k, l, t, divides))?, tail(l))
        }
        Scheme::Rk => corner_set(sweep(k, 0..=top, |t| r_rk(k, l, t))?, None),
        Scheme::Sr => corner_set(sweep(k, 0..=top, |t| r_sr(k, l, t))?, tail(l)),
        Scheme::T1 => corner_set(sweep(k, 0..=top, |t| r_t1(k, l, t))?, tail(l)),
        Scheme::Conv => {
            let mut pts = vec![LoadPoint::new(Ratio::zero(), int(k as i64))];
            pts.extend(sweep(k, 1..=top, |t| Ok(converse_bound(k, l, t)?.bound))?);
            corner_set(pts, tail(l))
        }
    };
    Ok(pts)
}

fn cross(o: &LoadPoint, a: &LoadPoint, b: &LoadPoint) -> Ratio {
    (&a.memory_ratio - &o.memory_ratio) * (&b.load - &o.load)
        - (&a.load - &o.load) * (&b.memory_ratio - &o.memory_ratio)
}

/// Corner points of a tradeoff and the vertices of their lower convex hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadCurve {
    pub corner_points: Vec<LoadPoint>,
    pub envelope: Vec<LoadPoint>,
}

impl LoadCurve {
    pub fn eval(&self, m: &Ratio) -> Result<Ratio, AnalysisError> {
        interpolate(&self.envelope, m)
    }
}

/// Lower convex hull of the points. Ratios must be distinct.
pub fn envelope(points: &[LoadPoint]) -> Result<LoadCurve, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.memory_ratio.cmp(&b.memory_ratio));
    if let Some(w) = sorted
        .windows(2)
        .find(|w| w[0].memory_ratio == w[1].memory_ratio)
    {
        return Err(AnalysisError::DuplicateRatio(fraction_string(
            &w[0].memory_ratio,
        )));
    }
    let mut hull: Vec<LoadPoint> = Vec::with_capacity(sorted.len());
    for p in &sorted {
        while hull.len() >= 2
            && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= Ratio::zero()
        {
            hull.pop();
        }
        hull.push(p.clone());
    }
    Ok(LoadCurve {
        corner_points: sorted,
        envelope: hull,
    })
}

/// Piecewise-linear interpolation through sorted points. Beyond the last
/// point the curve stays flat.
pub fn interpolate(points: &[LoadPoint], m: &Ratio) -> Result<Ratio, AnalysisError> {
    let first = points.first().ok_or(AnalysisError::EmptyInput)?;
    if m < &first.memory_ratio {
        return Err(AnalysisError::BelowDomain(fraction_string(m)));
    }
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if m <= &b.memory_ratio {
            let s = (m - &a.memory_ratio) / (&b.memory_ratio - &a.memory_ratio);
            return Ok(&a.load + s * (&b.load - &a.load));
        }
    }
    Ok(points[points.len() - 1].load.clone())
}

/// Memory-sharing load at `m`: linear between hull vertices, flat past the
/// last one.
pub fn envelope_eval(curve: &LoadCurve, m: &Ratio) -> Result<Ratio, AnalysisError> {
    curve.eval(m)
}

/// Curve of a scheme ready for evaluation: the hull for achievable schemes,
/// the plain polyline for the converse.
fn curve(scheme: Scheme, k: usize, l: usize) -> Result<Vec<LoadPoint>, AnalysisError> {
    let pts = corners(scheme, k, l)?;
    match scheme {
        Scheme::Conv => Ok(pts),
        _ => Ok(envelope(&pts)?.envelope),
    }
}

/// `i / (20 L)` for `i = 0..=20`.
pub fn default_grid(l: usize) -> Vec<Ratio> {
    (0..=20).map(|i| ratio(i, 20 * l as i64)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonRow {
    pub m_over_n: Ratio,
    pub hkd: Ratio,
    pub rk: Ratio,
    pub sr: Ratio,
    pub t1: Ratio,
    pub conv: Ratio,
}

impl ComparisonRow {
    pub fn get(&self, scheme: Scheme) -> &Ratio {
        match scheme {
            Scheme::Hkd => &self.hkd,
            Scheme::Rk => &self.rk,
            Scheme::Sr => &self.sr,
            Scheme::T1 => &self.t1,
            Scheme::Conv => &self.conv,
        }
    }

    /// Smallest load among the competing schemes.
    pub fn best_other(&self) -> &Ratio {
        [&self.hkd, &self.rk, &self.sr]
            .into_iter()
            .min()
            .expect("three entries")
    }
}

pub fn comparison_table(
    k: usize,
    l: usize,
    grid: &[Ratio],
) -> Result<Vec<ComparisonRow>, AnalysisError> {
    let curves: Vec<Vec<LoadPoint>> = Scheme::ALL
        .iter()
        .map(|&s| curve(s, k, l))
        .collect::<Result<_, _>>()?;
    let top = ratio(1, l as i64);
    grid.iter()
        .map(|m| {
            if m < &Ratio::zero() || m > &top {
                return Err(AnalysisError::OutOfRange(format!(
                    "memory ratio {} outside [0, 1/{l}]",
                    fraction_string(m)
                )));
            }
            let v = |i: usize| interpolate(&curves[i], m);
            Ok(ComparisonRow {
                m_over_n: m.clone(),
                hkd: v(0)?,
                rk: v(1)?,
                sr: v(2)?,
                t1: v(3)?,
                conv: v(4)?,
            })
        })
        .collect()
}

/// CSV with header `m_over_n,<scheme>...` and 12 significant digits.
pub fn comparison_csv(rows: &[ComparisonRow], schemes: &[Scheme]) -> String {
    let mut out = String::from("m_over_n");
    for &s in schemes {
        out.push(',');
        out.push_str(s.name());
    }
    out.push('\n');
    for r in rows {
        out.push_str(&decimal_string(&r.m_over_n, 12));
        for &s in schemes {
            out.push(',');
            out.push_str(&decimal_string(r.get(s), 12));
        }
        out.push('\n');
    }
    out
}

/// Comparison at one corner `t`: `lhs` is the transform load, `rhs` the
/// competitor. `holds` means `lhs < rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapRow {
    pub t: usize,
    pub lhs: Ratio,
    pub rhs: Ratio,
    pub hypothesis: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HkdPoint {
    pub m_over_n: Ratio,
    pub ratio: Ratio,
    pub at_m1: bool,
    pub strict: bool,
}

/// Ratio of the cyclic-wrap envelope to the transform envelope on
/// `[M1, 1/L)` with `M1 = floor(K/2L)/K`, against
/// `(K - floor(K/2L)) / (K - L floor(K/2L))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HkdGap {
    pub m1: Ratio,
    pub threshold: Ratio,
    pub points: Vec<HkdPoint>,
}

impl HkdGap {
    /// Sample points inside the open interval where the ratio fails to
    /// exceed the threshold.
    pub fn strict_violations(&self) -> Vec<&HkdPoint> {
        self.points
            .iter()
            .filter(|p| !p.at_m1 && !p.strict)
            .collect()
    }

    pub fn equality_at_m1(&self) -> bool {
        self.points
            .iter()
            .any(|p| p.at_m1 && p.ratio == self.threshold)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapReport {
    pub k: usize,
    pub l: usize,
    /// Present only when `L` does not divide `K`.
    pub hkd: Option<HkdGap>,
    /// Against `(K - tL)^2 / K`; hypothesis `K > (t + 1) L`.
    pub rk: Vec<GapRow>,
    /// Against the structured-rank load; hypothesis `t(K - tL) >= 2K`.
    pub sr: Vec<GapRow>,
}

impl GapReport {
    /// Rows whose hypothesis holds but whose inequality does not.
    pub fn violations(&self) -> Vec<(Scheme, &GapRow)> {
        self.rk
            .iter()
            .map(|r| (Scheme::Rk, r))
            .chain(self.sr.iter().map(|r| (Scheme::Sr, r)))
            .filter(|(_, r)| r.hypothesis && !r.holds)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
            && self
                .hkd
                .as_ref()
                .map_or(true, |h| h.strict_violations().is_empty())
    }
}

fn hkd_gap(k: usize, l: usize) -> Result<HkdGap, AnalysisError> {
    let t0 = k / (2 * l);
    let m1 = ratio(t0 as i64, k as i64);
    let top = ratio(1, l as i64);
    let threshold = ratio((k - t0) as i64, (k - l * t0) as i64);
    let mut samples: Vec<Ratio> = (0..8).map(|i| &m1 + (&top - &m1) * ratio(i, 8)).collect();
    samples.extend(
        (t0 + 1..=k / l)
            .map(|t| ratio(t as i64, k as i64))
            .filter(|m| m < &top),
    );
    samples.sort();
    samples.dedup();
    let hkd = curve(Scheme::Hkd, k, l)?;
    let t1 = curve(Scheme::T1, k, l)?;
    let points = samples
        .into_iter()
        .map(|m| {
            let r = interpolate(&hkd, &m)? / interpolate(&t1, &m)?;
            Ok(HkdPoint {
                at_m1: m == m1,
                strict: r > threshold,
                m_over_n: m,
                ratio: r,
            })
        })
        .collect::<Result<_, AnalysisError>>()?;
    Ok(HkdGap {
        m1,
        threshold,
        points,
    })
}

/// Evaluates the gap inequalities between the transform scheme and the
/// other schemes at one `(K, L)`.
pub fn gap_checks(k: usize, l: usize) -> Result<GapReport, AnalysisError> {
    r_t1(k, l, 0)?;
    let hkd = if k % l != 0 {
        Some(hkd_gap(k, l)?)
    } else {
        None
    };
    let mut rk = Vec::new();
    let mut sr = Vec::new();
    for t in 1..=k / l {
        let lhs = r_t1(k, l, t)?;
        let other = r_rk(k, l, t)?;
        rk.push(GapRow {
            t,
            holds: lhs < other,
            hypothesis: k > (t + 1) * l,
            lhs: lhs.clone(),
            rhs: other,
        });
        let other = r_sr(k, l, t)?;
        sr.push(GapRow {
            t,
            holds: lhs < other,
            hypothesis: t * (k - t * l) >= 2 * k,
            lhs,
            rhs: other,
        });
    }
    Ok(GapReport { k, l, hkd, rk, sr })
}
