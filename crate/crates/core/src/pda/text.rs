//! Plain-text PDA format.
//!
//! ```text
//! K' F' Z S
//! <F' lines of K' whitespace-separated tokens, each `*` or an integer in [1,S]>
//! ```

use std::collections::{BTreeMap, BTreeSet};

use super::{Pda, PdaEntry, PdaError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedPda {
    pub pda: Pda,
    /// Present when the file's integers were not exactly `[1, S]`: maps each
    /// original label to its contiguous replacement.
    pub renumbering: Option<BTreeMap<u32, u32>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> PdaError {
    PdaError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_pda(text: &str) -> Result<ParsedPda, PdaError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|f| f.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(hline, format!("header: {e}")))?;
    let [k, f, z, s] = fields[..] else {
        return Err(parse_err(hline, "header must be `K' F' Z S`"));
    };
    if k == 0 || f == 0 {
        return Err(parse_err(hline, "K' and F' must be positive"));
    }
    let s = u32::try_from(s).map_err(|_| parse_err(hline, "S too large"))?;

    let mut rows = Vec::with_capacity(f);
    for (lno, line) in lines.by_ref() {
        if rows.len() == f {
            return Err(parse_err(lno, format!("expected {f} rows, found more")));
        }
        let row: Vec<PdaEntry> = line
            .split_whitespace()
            .map(|tok| {
                if tok == "*" {
                    return Ok(PdaEntry::Star);
                }
                let v: u32 = tok
                    .parse()
                    .map_err(|_| parse_err(lno, format!("bad token `{tok}`")))?;
                if v == 0 || v > s {
                    return Err(parse_err(lno, format!("integer {v} outside [1, {s}]")));
                }
                Ok(PdaEntry::Int(v))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != k {
            return Err(parse_err(
                lno,
                format!("expected {k} entries, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != f {
        return Err(parse_err(
            hline,
            format!("expected {f} rows, found {}", rows.len()),
        ));
    }

    let present: BTreeSet<u32> = rows.iter().flatten().filter_map(|e| e.int()).collect();
    let contiguous = present.len() as u32 == s;
    let (rows, s, renumbering) = if contiguous {
        (rows, s, None)
    } else {
        let map: BTreeMap<u32, u32> = present
            .iter()
            .enumerate()
            .map(|(i, &old)| (old, i as u32 + 1))
            .collect();
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| match e {
                        PdaEntry::Int(v) => PdaEntry::Int(map[&v]),
                        star => star,
                    })
                    .collect()
            })
            .collect();
        (rows, present.len() as u32, Some(map))
    };

    Ok(ParsedPda {
        pda: Pda::with_signature(rows, z, s)?,
        renumbering,
    })
}

pub fn serialize_pda(p: &Pda) -> String {
    let (k, f, z, s) = p.signature();
    let mut out = format!("{k} {f} {z} {s}\n");
    for row in p.grid().row_iter() {
        let tokens: Vec<String> = row.iter().map(ToString::to_string).collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MN_4_2: &str = "4 6 3 4\n* * 1 2\n* 1 * 3\n* 2 3 *\n1 * * 4\n2 * 4 *\n3 4 * *\n";

    #[test]
    fn round_trip_is_byte_exact() {
        let parsed = parse_pda(MN_4_2).unwrap();
        assert!(parsed.renumbering.is_none());
        assert_eq!(serialize_pda(&parsed.pda), MN_4_2);
    }

    #[test]
    fn gaps_are_renumbered() {
        let parsed = parse_pda("2 2 1 5\n* 5\n5 *\n").unwrap();
        assert_eq!(parsed.pda.s(), 1);
        assert_eq!(parsed.renumbering, Some(BTreeMap::from([(5, 1)])));
        assert_eq!(serialize_pda(&parsed.pda), "2 2 1 1\n* 1\n1 *\n");
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            parse_pda(""),
            Err(PdaError::Parse { line: 1, .. })
        ));
        assert!(matches!(parse_pda("2 2 1"), Err(PdaError::Parse { .. })));
        assert!(matches!(
            parse_pda("2 2 1 1\n* 1\n"),
            Err(PdaError::Parse { .. })
        ));
        assert!(matches!(
            parse_pda("2 1 1 1\n* 2\n"),
            Err(PdaError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_pda("2 1 1 1\n* x\n"),
            Err(PdaError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_pda("2 1 1 1\n* 1 1\n"),
            Err(PdaError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_pda("0 1 1 1\n"),
            Err(PdaError::Parse { .. })
        ));
    }
}
