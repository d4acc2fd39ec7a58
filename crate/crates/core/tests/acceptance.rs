//! Acceptance criteria 1-12. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion does.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;

use macc_core::analysis::{
    comparison_table, converse_bound, count_sq, count_sq_oracle, default_grid, gap_checks, r_cor1,
    r_rk, r_t1, DistanceReading,
};
use macc_core::coding::{
    compressed_decode_all, compressed_deliver, lambda_profile, reconstructable_messages,
    user_decoders,
};
use macc_core::combinatorics::binomial_usize;
use macc_core::construct::{mn_pda, partition_pda, MnParams, PartitionParams};
use macc_core::field::FieldSpec;
use macc_core::grid::Grid;
use macc_core::pda::{parse_pda, validate_pda, Pda, PdaEntry};
use macc_core::ratio::{int, ratio, Ratio};
use macc_core::sim::{
    decode_all, deliver, demand_sample, message_members, populate_caches, worst_case_load,
    DemandVector, PacketLibrary,
};
use macc_core::transform::{
    build_scheme, node_placement, user_delivery, user_retrieve, MultiaccessParams, RoundArray,
    SchemeArrays,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn mn(k: usize, t: usize) -> Pda {
    mn_pda(MnParams::new(k, t).unwrap()).unwrap()
}

fn scheme(p: &Pda, k: usize, l: usize) -> SchemeArrays {
    let t = p.row_star_count(1);
    build_scheme(p, &MultiaccessParams::new(k, l, t, k).unwrap()).unwrap()
}

fn star_grid(rows: &[&str]) -> Grid<bool> {
    Grid::from_rows(
        rows.iter()
            .map(|r| r.chars().map(|c| c == '*').collect())
            .collect(),
    )
    .unwrap()
}

fn entry_grid(rows: &[&str]) -> Grid<PdaEntry> {
    let text = format!("8 {} 0 4\n{}\n", rows.len(), rows.join("\n"));
    parse_pda(&text).unwrap().pda.grid().clone()
}

/// MN-based instances with K <= 10, L <= 4, t >= 1 and K > tL + 1.
fn mn_instances() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for k in 2..=10 {
        for l in 1..=4 {
            for t in 1..=k / l {
                if k > t * l + 1 {
                    out.push((k, l, t));
                }
            }
        }
    }
    out
}

/// Partition instances for `(m, q)` in `{2,3}^2` and `L` in `1..=4`.
fn partition_instances() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for m in 2..=3 {
        for q in 2..=3 {
            for l in 1..=4 {
                out.push((m, q, l));
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let p = mn(4, 2);
    let golden = parse_pda("4 6 3 4\n* * 1 2\n* 1 * 3\n* 2 3 *\n1 * * 4\n2 * 4 *\n3 4 * *\n")
        .unwrap()
        .pda;
    ensure!(p == golden, "array differs:\n{p}");
    let report = validate_pda(&p);
    ensure!(report.is_pda(), "validation failed: {report:?}");
    ensure!(
        report.signature == (4, 6, 3, 4),
        "signature {:?}",
        report.signature
    );
    Ok("(4,6,3,4) array matches".into())
}

fn criterion_2() -> Outcome {
    let p = mn(4, 2);
    let params = MultiaccessParams::new(8, 3, 2, 8).unwrap();
    let c1 = node_placement(&p, &params).unwrap();
    ensure!(
        c1.grid
            == star_grid(&["..*..*..", "..*...*.", "..*....*", "...*..*.", "...*...*", "....*..*"]),
        "C1 differs"
    );
    ensure!(
        c1.shift_round(2).unwrap().grid
            == star_grid(&["...*..*.", "...*...*", "*..*....", "....*..*", "*...*...", "*....*.."]),
        "C2 differs"
    );
    let u1 = user_retrieve(&c1, &params);
    ensure!(
        u1.grid
            == star_grid(&["******..", "***.***.", "***..***", ".******.", ".***.***", "..******"]),
        "U1 differs"
    );
    ensure!(
        u1.shift_round(2).unwrap().grid
            == star_grid(&[".******.", ".***.***", "****..**", "..******", "*.***.**", "*..*****"]),
        "U2 differs"
    );
    let (q1, psi) = user_delivery(&p, &u1).unwrap();
    ensure!(
        q1.grid
            == entry_grid(&[
                "* * * * * * 1 2",
                "* * * 1 * * * 3",
                "* * * 2 3 * * *",
                "1 * * * * * * 4",
                "2 * * * 4 * * *",
                "3 4 * * * * * *",
            ]),
        "Q1 differs"
    );
    ensure!(
        q1.shift_round(2).unwrap().grid
            == entry_grid(&[
                "2 * * * * * * 1",
                "3 * * * 1 * * *",
                "* * * * 2 3 * *",
                "4 1 * * * * * *",
                "* 2 * * * 4 * *",
                "* 3 4 * * * * *",
            ]),
        "Q2 differs"
    );
    let expected_psi = vec![
        vec![(7, 3), (8, 4)],
        vec![(4, 2), (8, 4)],
        vec![(4, 2), (5, 3)],
        vec![(1, 1), (8, 4)],
        vec![(1, 1), (5, 3)],
        vec![(1, 1), (2, 2)],
    ];
    ensure!(psi == expected_psi, "filling maps differ: {psi:?}");
    Ok("C, U, Q for rounds 1 and 2 and filling maps match".into())
}

fn criterion_3() -> Outcome {
    let s = scheme(&mn(4, 2), 4, 1);
    let d = DemandVector::identity(4);
    let table: [&[(usize, usize)]; 4] = [
        &[(1, 4), (2, 2), (3, 1)],
        &[(1, 5), (2, 3), (4, 1)],
        &[(1, 6), (3, 3), (4, 2)],
        &[(2, 6), (3, 5), (4, 4)],
    ];
    let members = message_members(&s, 1);
    ensure!(members.len() == 4, "{} signals in round 1", members.len());
    let lib = PacketLibrary::for_scheme(&s, 4, 4, 0).unwrap();
    let log = deliver(&lib, &s, &d).unwrap();
    for (slot, expected) in table.iter().enumerate() {
        let got: BTreeSet<(usize, usize)> =
            members[slot].iter().map(|&(j, k)| (d.file(k), j)).collect();
        let want: BTreeSet<(usize, usize)> = expected.iter().copied().collect();
        ensure!(got == want, "signal {}: {got:?}", slot + 1);
        let mut xor = vec![0u8; 4];
        for &(n, j) in expected.iter() {
            for (a, b) in xor.iter_mut().zip(lib.packet(n, 1, j)) {
                *a ^= b;
            }
        }
        ensure!(
            log.messages[slot].payload == xor,
            "signal {} payload",
            slot + 1
        );
    }
    Ok("four signals match".into())
}

fn criterion_4() -> Outcome {
    let p = mn(4, 2);
    let s = scheme(&p, 8, 3);
    let lib = PacketLibrary::for_scheme(&s, 8, 2, 0).unwrap();
    let demands = demand_sample(8, 8, 0, 20);
    let plain = worst_case_load(&lib, &s, &demands).unwrap();
    ensure!(plain == ratio(2, 3), "plain load {plain}");
    let lp = lambda_profile(&p, 3).unwrap();
    let mut worst = Ratio::from_integer(0.into());
    for d in &demands {
        let batch = compressed_deliver(&lib, &s, &lp, d, FieldSpec::default()).unwrap();
        worst = worst.max(batch.load());
    }
    ensure!(worst == ratio(1, 2), "compressed load {worst}");
    Ok("plain 2/3, compressed 1/2".into())
}

fn criterion_5() -> Outcome {
    let instances = mn_instances();
    for &(k, l, t) in &instances {
        let s = scheme(&mn(k - t * (l - 1), t), k, l);
        let lib = PacketLibrary::for_scheme(&s, k, 1, 0).unwrap();
        let load = worst_case_load(&lib, &s, &demand_sample(k, k, 0, 2)).unwrap();
        ensure!(
            load == r_t1(k, l, t).unwrap(),
            "K={k} L={l} t={t}: load {load}"
        );
        let f = k * binomial_usize(k - t * (l - 1), t).unwrap();
        ensure!(
            s.subpacketization() == f,
            "K={k} L={l} t={t}: F={}",
            s.subpacketization()
        );
    }
    Ok(format!("{} instances", instances.len()))
}

fn criterion_6() -> Outcome {
    for (m, q, l) in partition_instances() {
        let pp = partition_pda(PartitionParams::new(m, q).unwrap()).unwrap();
        let k = m * (q + l - 1);
        let t = pp.pda.row_star_count(1);
        let s = build_scheme(&pp.pda, &MultiaccessParams::new(k, l, t, k).unwrap())
            .map_err(|e| format!("m={m} q={q} L={l}: {e}"))?;
        let lib = PacketLibrary::for_scheme(&s, k, 1, 0).unwrap();
        let load = worst_case_load(&lib, &s, &demand_sample(k, k, 0, 2)).unwrap();
        ensure!(load == int(q as i64 - 1), "m={m} q={q} L={l}: load {load}");
        let f = m * q.pow(m as u32 - 1) * (q + l - 1);
        ensure!(
            s.subpacketization() == f,
            "m={m} q={q} L={l}: F={}",
            s.subpacketization()
        );
    }
    Ok("12 instances".into())
}

fn decodes_everywhere(p: &Pda, k: usize, l: usize) -> Result<usize, String> {
    let s = scheme(p, k, l);
    let lib = PacketLibrary::for_scheme(&s, k, 2, 7).unwrap();
    let caches = populate_caches(&lib, &s).unwrap();
    let lp = lambda_profile(p, l).unwrap();
    let mut decoders = None;
    let mut runs = 0;
    for d in demand_sample(k, k, 1, 20) {
        let log = deliver(&lib, &s, &d).unwrap();
        for r in decode_all(&lib, &caches, &s, &d, &log) {
            ensure!(
                r.decoded,
                "{p} K={k} L={l} user {} {d:?}: {:?}",
                r.user,
                r.error
            );
        }
        runs += 1;
        if lp.applicable {
            let batch = compressed_deliver(&lib, &s, &lp, &d, FieldSpec::default())
                .map_err(|e| e.to_string())?;
            let dec = decoders.get_or_insert_with(|| user_decoders(&s, &batch.matrix).unwrap());
            for r in compressed_decode_all(dec, &lib, &caches, &s, &d, &batch) {
                ensure!(
                    r.decoded,
                    "compressed K={k} L={l} user {} {d:?}: {:?}",
                    r.user,
                    r.error
                );
            }
            runs += 1;
        }
    }
    Ok(runs)
}

fn criterion_7() -> Outcome {
    let mut runs = 0;
    for (k, l, t) in mn_instances() {
        runs += decodes_everywhere(&mn(k - t * (l - 1), t), k, l)?;
    }
    for (m, q, l) in partition_instances() {
        let pp = partition_pda(PartitionParams::new(m, q).unwrap()).unwrap();
        runs += decodes_everywhere(&pp.pda, m * (q + l - 1), l)?;
    }
    Ok(format!("{runs} delivery runs, every user decoded"))
}

fn criterion_8() -> Outcome {
    let mut cases: Vec<(Pda, usize, usize)> = mn_instances()
        .into_iter()
        .map(|(k, l, t)| (mn(k - t * (l - 1), t), k, l))
        .collect();
    for (m, q, l) in partition_instances() {
        let pp = partition_pda(PartitionParams::new(m, q).unwrap()).unwrap();
        cases.push((pp.pda, m * (q + l - 1), l));
    }
    let (mut applicable, mut mismatched) = (0, Vec::new());
    for (p, k, l) in &cases {
        let lp = lambda_profile(p, *l).unwrap();
        if !lp.applicable {
            continue;
        }
        applicable += 1;
        let s = scheme(p, *k, *l);
        let expected = lp.total as usize * s.s() as usize;
        let counts: Vec<usize> = (1..=*k)
            .map(|u| reconstructable_messages(&s, u).len())
            .collect();
        if counts.iter().any(|&c| c != expected) {
            mismatched.push(format!("K={k} L={l} expected {expected} got {counts:?}"));
        }
    }

    let mut cor1 = 0;
    for k in 3..=12usize {
        for l in 2..=k {
            for t in 1..=k / l {
                if !(t * l + 1 < k && k < t * l + l) {
                    continue;
                }
                let p = mn(k - t * (l - 1), t);
                let s = scheme(&p, k, l);
                let lp = lambda_profile(&p, l).unwrap();
                let lib = PacketLibrary::for_scheme(&s, k, 2, 0).unwrap();
                let batch = compressed_deliver(
                    &lib,
                    &s,
                    &lp,
                    &DemandVector::identity(k),
                    FieldSpec::default(),
                )
                .unwrap();
                let want = ratio(((k - t * l) * (k - t * l)) as i64, k as i64);
                ensure!(
                    batch.load() == want
                        && r_cor1(k, l, t).unwrap() == want
                        && r_rk(k, l, t).unwrap() == want,
                    "corollary 1 fails at K={k} L={l} t={t}: {}",
                    batch.load()
                );
                cor1 += 1;
            }
        }
    }
    ensure!(
        mismatched.is_empty(),
        "corollary 1 holds on {cor1} instances, but per-user counts differ on {}/{applicable} \
         applicable instances, e.g. {}",
        mismatched.len(),
        mismatched[0]
    );
    Ok(format!(
        "{applicable} applicable instances, corollary 1 on {cor1}"
    ))
}

fn criterion_9() -> Outcome {
    let mut checked = 0;
    for k in 1..=40 {
        for l in 1..=k {
            for t in 1..=k / l {
                let b = converse_bound(k, l, t).unwrap().bound;
                ensure!(b <= r_t1(k, l, t).unwrap(), "K={k} L={l} t={t}: bound {b}");
                checked += 1;
            }
        }
    }
    let ratios: Vec<Ratio> = (30..=40)
        .map(|k| r_t1(k, 3, 2).unwrap() / converse_bound(k, 3, 2).unwrap().bound)
        .collect();
    ensure!(
        ratios.windows(2).all(|w| w[1] <= w[0]),
        "ratio not monotone: {ratios:?}"
    );
    let last = ratios.last().unwrap();
    ensure!(*last < ratio(6, 5), "ratio at K=40 is {last}");
    Ok(format!("{checked} points; ratio at K=40 is {last}"))
}

fn criterion_10() -> Outcome {
    let (mut total, mut ring, mut linear) = (0, 0, 0);
    for k in 1..=14 {
        for l in 1..=4.min(k) {
            for t in 1..=k / l {
                for q in t * l..=k {
                    total += 1;
                    let closed = count_sq(k, l, t, q).unwrap();
                    let count = |r| BigInt::from(count_sq_oracle(k, l, t, q, r).unwrap());
                    ensure!(
                        count(DistanceReading::CyclicInterval) == closed,
                        "K={k} L={l} t={t} q={q}: closed form {closed}"
                    );
                    ring += (count(DistanceReading::CyclicRing) != closed) as usize;
                    linear += (count(DistanceReading::Linear) != closed) as usize;
                }
            }
        }
    }
    Ok(format!(
        "{total} instances match under the cyclic-interval reading \
         (cyclic-ring misses {ring}, linear misses {linear})"
    ))
}

fn criterion_11() -> Outcome {
    let (mut m1_equal, mut hkd_points, mut rows) = (0, 0, 0);
    for k in 2..=40 {
        for l in 1..=k {
            let g = gap_checks(k, l).unwrap();
            ensure!(
                g.violations().is_empty(),
                "K={k} L={l}: {:?}",
                g.violations()
            );
            rows += g.rk.iter().filter(|r| r.hypothesis).count();
            if let Some(h) = &g.hkd {
                let bad = h.strict_violations();
                ensure!(
                    bad.is_empty(),
                    "K={k} L={l}: cyclic-wrap gap fails at {:?}",
                    bad[0]
                );
                hkd_points += h.points.len();
                m1_equal += h.equality_at_m1() as usize;
            }
        }
    }
    let g = gap_checks(200, 3).unwrap();
    let tested: Vec<usize> = g.sr.iter().filter(|r| r.hypothesis).map(|r| r.t).collect();
    ensure!(g.violations().is_empty(), "K=200 L=3: {:?}", g.violations());
    let outside: Vec<usize> =
        g.sr.iter()
            .filter(|r| !r.hypothesis && !r.holds)
            .map(|r| r.t)
            .collect();
    Ok(format!(
        "{hkd_points} cyclic-wrap points strict ({m1_equal} equalities at the left endpoint), \
         {rows} rank rows, K=200 t in [{}, {}] strict (fails outside hypothesis at t={outside:?})",
        tested[0],
        tested[tested.len() - 1]
    ))
}

fn criterion_12() -> Outcome {
    let rows = comparison_table(20, 3, &default_grid(3)).unwrap();
    let mut checked = 0;
    for r in rows.iter().filter(|r| r.m_over_n <= ratio(7, 25)) {
        ensure!(
            &r.t1 <= r.best_other(),
            "M/N={}: t1 {} vs best {}",
            r.m_over_n,
            r.t1,
            r.best_other()
        );
        checked += 1;
    }
    Ok(format!("{checked} grid points"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 12] = [
        ("MN PDA golden", criterion_1),
        ("transformation golden", criterion_2),
        ("shared-link embedding", criterion_3),
        ("load reproduction", criterion_4),
        ("MN-based load and subpacketization", criterion_5),
        ("partition-based scheme", criterion_6),
        ("decodability", criterion_7),
        ("self-reconstructable messages", criterion_8),
        ("converse", criterion_9),
        ("gap-subset counting", criterion_10),
        ("gap inequalities", criterion_11),
        ("comparison table", criterion_12),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({ms} ms): {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL {name} ({ms} ms): {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
