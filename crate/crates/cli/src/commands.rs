use std::collections::BTreeMap;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use macc_core::analysis::{
    comparison_csv, comparison_table, converse_bound, gap_checks, r_t1, GapRow, Scheme,
};
use macc_core::coding::{
    compressed_decode_all, compressed_deliver, lambda_profile, user_decoders, CodingError,
};
use macc_core::construct::{mn_pda, partition_pda, uncoded_pda, MnParams, PartitionParams};
use macc_core::field::FieldSpec;
use macc_core::grid::Grid;
use macc_core::pda::{
    check_c4, check_c5, parse_pda, serialize_pda, validate_pda, Condition, Pda, PdaEntry,
};
use macc_core::ratio::{fraction_string, ratio, Ratio};
use macc_core::sim::{
    decode_all, deliver, demand_sample, populate_caches, DemandVector, PacketLibrary,
};
use macc_core::transform::{build_scheme, MultiaccessParams, SchemeArrays};

use crate::report::{
    read_input, usage, write_output, Check, CliError, RoundOne, RunReport, SchemeDescriptor,
};

fn frac(r: &Ratio) -> String {
    fraction_string(r)
}

fn load_pda(path: &str, report: &mut RunReport) -> Result<Pda, CliError> {
    let text = read_input(path, &mut report.inputs)?;
    let parsed = parse_pda(&text).with_context(|| format!("parsing {path}"))?;
    Ok(parsed.pda)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    Mn,
    Partition,
    Uncoded,
}

#[derive(Args, Debug)]
pub struct BuildPdaArgs {
    #[arg(long, value_enum)]
    pub construction: Construction,
    /// Number of PDA columns K' (mn, uncoded).
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Stars per row (mn).
    #[arg(long)]
    pub t: Option<usize>,
    /// Vector length (partition).
    #[arg(long)]
    pub m: Option<usize>,
    /// Alphabet size (partition).
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(short = 'o', long, default_value = "-")]
    pub output: String,
}

fn need(v: Option<usize>, flag: &str, what: &str) -> Result<usize, CliError> {
    v.ok_or_else(|| usage(format!("{what} needs {flag}")))
}

pub fn build_pda(args: &BuildPdaArgs) -> Result<(), CliError> {
    let p = match args.construction {
        Construction::Mn => mn_pda(MnParams::new(
            need(args.k, "--K", "mn")?,
            need(args.t, "--t", "mn")?,
        )?)?,
        Construction::Partition => {
            partition_pda(PartitionParams::new(
                need(args.m, "--m", "partition")?,
                need(args.q, "--q", "partition")?,
            )?)?
            .pda
        }
        Construction::Uncoded => uncoded_pda(need(args.k, "--K", "uncoded")?)?,
    };
    write_output(&args.output, &serialize_pda(&p))
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub pda: String,
    /// Access degree; enables the C5 check.
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(short = 'o', long, default_value = "-")]
    pub output: String,
}

fn condition_check(name: &str, c: &Condition) -> Check {
    let detail = c.first().map(|ce| {
        let at: Vec<String> = ce
            .positions
            .iter()
            .map(|(r, c)| format!("({r},{c})"))
            .collect();
        if at.is_empty() {
            ce.reason.clone()
        } else {
            format!("{}: {}", at.join(" "), ce.reason)
        }
    });
    Check::new(name, c.holds, detail)
}

fn c4_detail(p: &Pda) -> String {
    let t = p.row_star_count(1);
    match (2..=p.rows()).find(|&j| p.row_star_count(j) != t) {
        Some(j) => format!("row {j} has {} stars, row 1 has {t}", p.row_star_count(j)),
        None => format!(
            "K'Z/F' = {}*{}/{} is not an integer",
            p.cols(),
            p.z(),
            p.rows()
        ),
    }
}

fn ring_params(p: &Pda, l: usize, n: Option<usize>) -> Result<MultiaccessParams, CliError> {
    if l == 0 {
        return Err(usage("--L must be at least 1"));
    }
    let t = p.row_star_count(1);
    let k = p.cols() + t * (l - 1);
    Ok(MultiaccessParams::new(k, l, t, n.unwrap_or(k))?)
}

pub fn verify(args: &VerifyArgs, mut report: RunReport) -> Result<(), CliError> {
    let p = load_pda(&args.pda, &mut report)?;
    let v = validate_pda(&p);
    report.check(condition_check("C1", &v.c1));
    report.check(condition_check("C2", &v.c2));
    report.check(condition_check("C3", &v.c3));
    let c4 = check_c4(&p);
    report.check(Check::new("C4", c4, (!c4).then(|| c4_detail(&p))));
    let mut results = json!({
        "signature": v.signature,
        "t": c4.then(|| p.row_star_count(1)),
    });
    if let Some(l) = args.l {
        let c5 = c4 && check_c5(&p, l);
        let detail = if !c4 {
            Some("C5 needs C4".to_string())
        } else if !c5 {
            let params = ring_params(&p, l, None)?;
            build_scheme(&p, &params).err().map(|e| e.to_string())
        } else {
            None
        };
        report.check(Check::new("C5", c5, detail));
        results["L"] = json!(l);
        if c4 {
            let lp = lambda_profile(&p, l)?;
            results["K"] = json!(p.cols() + p.row_star_count(1) * (l - 1));
            results["lambdas"] = json!(lp.lambdas);
            results["compression_applicable"] = json!(lp.applicable);
        }
    }
    report.results = results;
    report.finish(&args.output)
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(long)]
    pub pda: String,
    #[arg(long = "L")]
    pub l: usize,
    /// Number of files; defaults to K.
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(short = 'o', long, default_value = "-")]
    pub output: String,
}

fn star_rows(g: &Grid<bool>) -> Vec<String> {
    g.row_iter()
        .map(|r| r.iter().map(|&s| if s { '*' } else { '.' }).collect())
        .collect()
}

fn entry_rows(g: &Grid<PdaEntry>) -> Vec<String> {
    g.row_iter()
        .map(|r| {
            r.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub fn describe(p: &Pda, s: &SchemeArrays) -> SchemeDescriptor {
    SchemeDescriptor {
        pda: serialize_pda(p),
        k: s.params.k(),
        l: s.params.l(),
        t: s.params.t(),
        n: s.params.n(),
        signature: s.pda_signature,
        memory_ratio: frac(&s.memory_ratio()),
        subpacketization: s.subpacketization(),
        load: frac(&s.load()),
        round1: RoundOne {
            c: star_rows(&s.round_c(1).grid),
            u: star_rows(&s.round_u(1).grid),
            q: entry_rows(&s.round_q(1).grid),
            psi: s.psi.clone(),
        },
    }
}

pub fn transform(args: &TransformArgs, mut report: RunReport) -> Result<(), CliError> {
    let p = load_pda(&args.pda, &mut report)?;
    if !check_c4(&p) {
        return Err(CliError::Failed(format!("C4: {}", c4_detail(&p))));
    }
    let params = ring_params(&p, args.l, args.n)?;
    let s = build_scheme(&p, &params).map_err(|e| CliError::Failed(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&describe(&p, &s))?;
    text.push('\n');
    write_output(&args.output, &text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Gf256,
    Gf65536,
}

impl From<FieldArg> for FieldSpec {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Gf256 => FieldSpec::Gf256,
            FieldArg::Gf65536 => FieldSpec::Gf65536,
        }
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scheme descriptor written by `transform`.
    #[arg(long)]
    pub scheme: String,
    /// Number of files N; defaults to the descriptor's N.
    #[arg(long)]
    pub files: Option<usize>,
    /// Comma-separated demand vector, one file index per user.
    #[arg(long)]
    pub demand: Option<String>,
    /// Random demands added to identity/constant/reversed when --demand is absent.
    #[arg(long, default_value_t = 20)]
    pub random: usize,
    #[arg(long, default_value_t = 2)]
    pub packet_size: usize,
    /// Also run the coded (compressed) delivery.
    #[arg(long)]
    pub compressed: bool,
    #[arg(long, value_enum, default_value = "gf65536")]
    pub field: FieldArg,
    #[arg(short = 'o', long, default_value = "-")]
    pub output: String,
}

fn parse_demand(text: &str, k: usize, n: usize) -> Result<DemandVector, CliError> {
    let files: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("parsing demand {text:?}"))?;
    if files.len() != k {
        return Err(usage(format!(
            "demand has {} entries, expected K = {k}",
            files.len()
        )));
    }
    Ok(DemandVector::new(files, n)?)
}

fn failed_users(results: &[macc_core::sim::UserResult]) -> Vec<usize> {
    results
        .iter()
        .filter(|r| !r.decoded)
        .map(|r| r.user)
        .collect()
}

pub fn simulate(args: &SimulateArgs, seed: u64, mut report: RunReport) -> Result<(), CliError> {
    let text = read_input(&args.scheme, &mut report.inputs)?;
    let desc: SchemeDescriptor =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.scheme))?;
    let p = parse_pda(&desc.pda).context("parsing embedded PDA")?.pda;
    let n = args.files.unwrap_or(desc.n);
    let params = ring_params(&p, desc.l, Some(n))?;
    if params.k() != desc.k || params.t() != desc.t {
        return Err(usage("descriptor K or t disagrees with its PDA"));
    }
    let s = build_scheme(&p, &params).map_err(|e| CliError::Failed(e.to_string()))?;
    if frac(&s.load()) != desc.load || s.subpacketization() != desc.subpacketization {
        return Err(usage(
            "descriptor load or subpacketization disagrees with its PDA",
        ));
    }
    let k = s.k();
    let demands = match &args.demand {
        Some(d) => vec![parse_demand(d, k, n)?],
        None => demand_sample(k, n, seed, args.random),
    };
    let lib = PacketLibrary::for_scheme(&s, n, args.packet_size, seed)?;
    let caches = populate_caches(&lib, &s)?;

    let mut rows = Vec::new();
    let mut worst = ratio(0, 1);
    let mut plain_failures = Vec::new();
    for d in &demands {
        let log = deliver(&lib, &s, d)?;
        let failed = failed_users(&decode_all(&lib, &caches, &s, d, &log));
        if !failed.is_empty() {
            plain_failures.push(format!("demand {:?}: users {failed:?}", d.as_slice()));
        }
        worst = worst.max(log.load());
        rows.push(json!({
            "demand": d.as_slice(),
            "load": frac(&log.load()),
            "messages": log.total_packets_sent(),
            "bytes_sent": log.bytes_sent(),
            "failed_users": failed,
        }));
    }
    let mut results = json!({
        "K": k,
        "L": s.params.l(),
        "N": n,
        "packet_size": args.packet_size,
        "file_bytes": lib.file_size(),
        "scheme_load": frac(&s.load()),
        "worst_case_load": frac(&worst),
        "demands": rows,
    });
    report.check(Check::new(
        "plain delivery decodes at every user",
        plain_failures.is_empty(),
        plain_failures.first().cloned(),
    ));
    report.check(Check::new(
        "measured load equals S/F'",
        worst == s.load(),
        (worst != s.load()).then(|| format!("measured {}", frac(&worst))),
    ));

    if args.compressed {
        results["compressed"] = compressed(
            &p,
            &s,
            &lib,
            &caches,
            &demands,
            args.field.into(),
            &mut report,
        )?;
    }
    report.results = results;
    report.finish(&args.output)
}

fn compressed(
    p: &Pda,
    s: &SchemeArrays,
    lib: &PacketLibrary,
    caches: &[macc_core::sim::NodeCache],
    demands: &[DemandVector],
    spec: FieldSpec,
    report: &mut RunReport,
) -> Result<Value, CliError> {
    let lp = lambda_profile(p, s.params.l())?;
    let mut out = json!({ "field": spec.name(), "lambdas": lp.lambdas });
    if !lp.applicable {
        report.check(Check::new(
            "compression applicable",
            false,
            Some(format!(
                "lambda profile {:?} has non-positive entries",
                lp.lambdas
            )),
        ));
        return Ok(out);
    }
    let k = s.k() as i64;
    let expected = s.load() * ratio(k - lp.total, k);
    let mut decoders = None;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut worst = ratio(0, 1);
    for d in demands {
        let batch = match compressed_deliver(lib, s, &lp, d, spec) {
            Ok(b) => b,
            Err(e @ CodingError::PayloadWidth { .. }) => return Err(usage(e)),
            Err(e) => return Err(CliError::Failed(e.to_string())),
        };
        let dec = match &decoders {
            Some(dec) => dec,
            None => decoders.insert(user_decoders(s, &batch.matrix)?),
        };
        let failed = failed_users(&compressed_decode_all(dec, lib, caches, s, d, &batch));
        if !failed.is_empty() {
            failures.push(format!("demand {:?}: users {failed:?}", d.as_slice()));
        }
        worst = worst.max(batch.load());
        rows.push(json!({
            "demand": d.as_slice(),
            "load": frac(&batch.load()),
            "messages": batch.payloads.len(),
            "bytes_sent": batch.bytes_sent(),
            "failed_users": failed,
        }));
    }
    out["expected_load"] = json!(frac(&expected));
    out["worst_case_load"] = json!(frac(&worst));
    out["demands"] = json!(rows);
    report.check(Check::new(
        "compressed delivery decodes at every user",
        failures.is_empty(),
        failures.first().cloned(),
    ));
    report.check(Check::new(
        "compressed load equals S/F' (K - sum lambda)/K",
        worst == expected,
        (worst != expected).then(|| format!("measured {}", frac(&worst))),
    ));
    Ok(out)
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long = "L")]
    pub l: usize,
    /// Number of files. Normalized loads do not depend on it beyond N >= K.
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "hkd,rk,sr,t1,conv")]
    pub schemes: Vec<String>,
    /// Grid points are i/(steps L) for i = 0..=steps.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// CSV destination; overrides -o.
    #[arg(long)]
    pub csv: Option<String>,
    #[arg(short = 'o', long, default_value = "-")]
    pub output: String,
}

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    if let Some(n) = args.n {
        if n < args.k {
            return Err(usage(format!("need N >= K, got N={n} K={}", args.k)));
        }
    }
    if args.steps == 0 {
        return Err(usage("--steps must be positive"));
    }
    let schemes: Vec<Scheme> = args
        .schemes
        .iter()
        .map(|s| s.parse::<Scheme>())
        .collect::<Result<_, _>>()?;
    let grid: Vec<Ratio> = (0..=args.steps)
        .map(|i| ratio(i as i64, (args.steps * args.l.max(1)) as i64))
        .collect();
    let rows = comparison_table(args.k, args.l, &grid)?;
    let out = args.csv.as_deref().unwrap_or(&args.output);
    write_output(out, &comparison_csv(&rows, &schemes))
}

#[derive(Args, Debug)]
pub struct ConverseArgs {
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(short = 'o', long, default_value = "-")]
    pub output: String,
}

pub fn converse(args: &ConverseArgs, mut report: RunReport) -> Result<(), CliError> {
    let c = converse_bound(args.k, args.l, args.t)?;
    let achievable = r_t1(args.k, args.l, args.t)?;
    let gap = (c.bound > ratio(0, 1)).then(|| frac(&(&achievable / &c.bound)));
    report.results = json!({
        "K": c.k,
        "L": c.l,
        "t": c.t,
        "X": c.x,
        "bound": frac(&c.bound),
        "r_t1": frac(&achievable),
        "r_t1_over_bound": gap,
    });
    report.check(Check::new(
        "bound is non-negative",
        c.bound >= ratio(0, 1),
        None,
    ));
    report.check(Check::new(
        "bound does not exceed r_t1",
        c.bound <= achievable,
        None,
    ));
    report.finish(&args.output)
}

#[derive(Args, Debug)]
pub struct GapsArgs {
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(short = 'o', long, default_value = "-")]
    pub output: String,
}

fn gap_rows(rows: &[GapRow]) -> Value {
    rows.iter()
        .map(|r| {
            json!({
                "t": r.t,
                "r_t1": frac(&r.lhs),
                "other": frac(&r.rhs),
                "hypothesis": r.hypothesis,
                "holds": r.holds,
            })
        })
        .collect()
}

pub fn gaps(args: &GapsArgs, mut report: RunReport) -> Result<(), CliError> {
    let g = gap_checks(args.k, args.l)?;
    let mut results: BTreeMap<&str, Value> = BTreeMap::new();
    results.insert("K", json!(g.k));
    results.insert("L", json!(g.l));
    results.insert("rk", gap_rows(&g.rk));
    results.insert("sr", gap_rows(&g.sr));
    for (scheme, rows) in [("rk", &g.rk), ("sr", &g.sr)] {
        let bad: Vec<usize> = rows
            .iter()
            .filter(|r| r.hypothesis && !r.holds)
            .map(|r| r.t)
            .collect();
        report.check(Check::new(
            format!("r_t1 < {scheme} under hypothesis"),
            bad.is_empty(),
            (!bad.is_empty()).then(|| format!("fails at t = {bad:?}")),
        ));
    }
    if let Some(h) = &g.hkd {
        let points: Vec<Value> = h
            .points
            .iter()
            .map(|p| {
                json!({
                    "m_over_n": frac(&p.m_over_n),
                    "ratio": frac(&p.ratio),
                    "strict": p.strict,
                    "at_m1": p.at_m1,
                })
            })
            .collect();
        results.insert(
            "hkd",
            json!({
                "m1": frac(&h.m1),
                "threshold": frac(&h.threshold),
                "equality_at_m1": h.equality_at_m1(),
                "points": points,
            }),
        );
        let bad = h.strict_violations();
        report.check(Check::new(
            "hkd / r_t1 exceeds threshold on (M1, 1/L)",
            bad.is_empty(),
            bad.first().map(|p| format!("M/N = {}", frac(&p.m_over_n))),
        ));
    }
    report.results = json!(results);
    report.finish(&args.output)
}
