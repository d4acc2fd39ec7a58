//! MDS compression of the multicast messages.
//!
//! When every `λ_h = a_h + L - b_h` is positive, each user can rebuild part
//! of the `K S` plain messages from its own nodes. The server then sends
//! `(K - Σλ) S` Cauchy combinations of the plain messages instead, and each
//! user solves for the messages it cannot rebuild.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{from_symbols, to_symbols, Field, FieldSpec};
use crate::pda::{check_c4, star_profile, Pda};
use crate::ratio::{ratio, Ratio};
use crate::sim::{
    decode_with, message_members, plain_messages, user_view, DecodeOutcome, DemandVector,
    NodeCache, PacketLibrary, SimError, UserCache, UserResult,
};
use crate::transform::SchemeArrays;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodingError {
    #[error("PDA violates C4")]
    NotC4,
    #[error("compression needs every lambda positive, got {0:?}")]
    NotApplicable(Vec<i64>),
    #[error("Cauchy matrix needs {needed} distinct elements, field has {size}")]
    FieldTooSmall { needed: usize, size: usize },
    #[error("{rows} x {cols} matrix requested; need 1 <= rows <= cols")]
    BadShape { rows: usize, cols: usize },
    #[error("packet size {packet_size} is not a multiple of the {symbol_bytes}-byte symbol")]
    PayloadWidth {
        packet_size: usize,
        symbol_bytes: usize,
    },
    #[error("user {user} faces a singular system")]
    SingularSystem { user: usize },
    #[error("batch does not belong to this scheme")]
    BatchMismatch,
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaProfile {
    /// `λ_h = a_h + L - b_h`.
    pub lambdas: Vec<i64>,
    pub total: i64,
    pub applicable: bool,
}

pub fn lambda_profile(p: &Pda, l: usize) -> Result<LambdaProfile, CodingError> {
    if !check_c4(p) {
        return Err(CodingError::NotC4);
    }
    let sp = star_profile(p).map_err(|_| CodingError::NotC4)?;
    let lambdas: Vec<i64> =
        sp.a.iter()
            .zip(&sp.b)
            .map(|(&a, &b)| a as i64 + l as i64 - b as i64)
            .collect();
    Ok(LambdaProfile {
        total: lambdas.iter().sum(),
        applicable: lambdas.iter().all(|&x| x > 0),
        lambdas,
    })
}

/// Message `(g, s)`.
pub type MessageId = (usize, u32);

fn message_index(scheme: &SchemeArrays, (g, s): MessageId) -> usize {
    (g - 1) * scheme.s() as usize + s as usize - 1
}

/// Messages whose every constituent packet user `k` can read from its nodes.
pub fn reconstructable_messages(scheme: &SchemeArrays, k: usize) -> BTreeSet<MessageId> {
    let view = user_view(scheme, k);
    let mut out = BTreeSet::new();
    for g in 1..=scheme.k() {
        for (s0, members) in message_members(scheme, g).iter().enumerate() {
            if members.iter().all(|&(j, _)| view.contains(&(g, j))) {
                out.insert((g, s0 as u32 + 1));
            }
        }
    }
    out
}

/// All messages of the rounds in which user `k` reads every packet.
pub fn full_round_messages(scheme: &SchemeArrays, k: usize) -> BTreeSet<MessageId> {
    let view = user_view(scheme, k);
    (1..=scheme.k())
        .filter(|&g| (1..=scheme.rows()).all(|j| view.contains(&(g, j))))
        .flat_map(|g| (1..=scheme.s()).map(move |s| (g, s)))
        .collect()
}

/// Row-major `rows x cols` matrix over the field of `spec`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingMatrix {
    pub spec: FieldSpec,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<u16>,
}

impl CodingMatrix {
    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.entries[i * self.cols + j]
    }
}

/// Cauchy matrix `1 / (x_i + y_j)` with `x_i = i` and `y_j = rows + j`
/// (0-based), so the `rows + cols` elements used are distinct.
pub fn cauchy_matrix(field: &Field, rows: usize, cols: usize) -> Result<Vec<u16>, CodingError> {
    if rows == 0 || rows > cols {
        return Err(CodingError::BadShape { rows, cols });
    }
    if rows + cols > field.size() {
        return Err(CodingError::FieldTooSmall {
            needed: rows + cols,
            size: field.size(),
        });
    }
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let x = i as u16;
            let y = (rows + j) as u16;
            out.push(field.inv(field.add(x, y)).expect("distinct elements"));
        }
    }
    Ok(out)
}

pub fn mds_matrix(rows: usize, cols: usize, spec: FieldSpec) -> Result<CodingMatrix, CodingError> {
    Ok(CodingMatrix {
        spec,
        rows,
        cols,
        entries: cauchy_matrix(&spec.field(), rows, cols)?,
    })
}

/// Inverse of a square matrix by Gauss-Jordan elimination; `None` if singular.
pub fn invert(field: &Field, n: usize, a: &[u16]) -> Option<Vec<u16>> {
    let w = 2 * n;
    let mut m = vec![0u16; n * w];
    for i in 0..n {
        m[i * w..i * w + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        m[i * w + n + i] = 1;
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r * w + col] != 0)?;
        if pivot != col {
            for c in 0..w {
                m.swap(pivot * w + c, col * w + c);
            }
        }
        let inv = field.inv(m[col * w + col])?;
        for c in 0..w {
            m[col * w + c] = field.mul(m[col * w + c], inv);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r * w + col];
            if factor == 0 {
                continue;
            }
            for c in 0..w {
                let v = field.mul(factor, m[col * w + c]);
                m[r * w + c] ^= v;
            }
        }
    }
    Some(
        (0..n)
            .flat_map(|i| m[i * w + n..(i + 1) * w].to_vec())
            .collect(),
    )
}

/// Solves `a x = b` for square `a`.
pub fn solve(field: &Field, n: usize, a: &[u16], b: &[u16]) -> Option<Vec<u16>> {
    let inv = invert(field, n, a)?;
    Some(
        (0..n)
            .map(|i| (0..n).fold(0, |acc, j| acc ^ field.mul(inv[i * n + j], b[j])))
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedBatch {
    pub matrix: CodingMatrix,
    pub packet_size: usize,
    /// Packets per file `K F'`.
    pub file_packets: usize,
    pub payloads: Vec<Vec<u8>>,
}

impl CodedBatch {
    pub fn load(&self) -> Ratio {
        ratio(self.payloads.len(), self.file_packets)
    }

    pub fn bytes_sent(&self) -> usize {
        self.payloads.iter().map(Vec::len).sum()
    }
}

/// `(K - Σλ) S` rows over `K S` columns.
pub fn coded_dimensions(scheme: &SchemeArrays, profile: &LambdaProfile) -> (usize, usize) {
    let s = scheme.s() as usize;
    let k = scheme.k() as i64;
    ((k - profile.total).max(0) as usize * s, scheme.k() * s)
}

fn combine(
    field: &Field,
    spec: FieldSpec,
    matrix: &CodingMatrix,
    plain: &[Vec<u16>],
    i: usize,
) -> Vec<u8> {
    let width = plain.first().map_or(0, Vec::len);
    let mut acc = vec![0u16; width];
    for (j, symbols) in plain.iter().enumerate() {
        let c = matrix.get(i, j);
        for (a, &x) in acc.iter_mut().zip(symbols) {
            *a ^= field.mul(c, x);
        }
    }
    from_symbols(spec, &acc)
}

/// Codes the plain messages of demand `d` with the Cauchy matrix.
pub fn compressed_deliver(
    lib: &PacketLibrary,
    scheme: &SchemeArrays,
    profile: &LambdaProfile,
    d: &DemandVector,
    spec: FieldSpec,
) -> Result<CodedBatch, CodingError> {
    if !profile.applicable {
        return Err(CodingError::NotApplicable(profile.lambdas.clone()));
    }
    if lib.packet_size() % spec.symbol_bytes() != 0 {
        return Err(CodingError::PayloadWidth {
            packet_size: lib.packet_size(),
            symbol_bytes: spec.symbol_bytes(),
        });
    }
    lib.check(scheme)?;
    d.check(scheme.k(), lib.n_files())?;
    let (m1, m2) = coded_dimensions(scheme, profile);
    let matrix = if m1 == 0 {
        CodingMatrix {
            spec,
            rows: 0,
            cols: m2,
            entries: Vec::new(),
        }
    } else {
        mds_matrix(m1, m2, spec)?
    };
    let field = spec.field();
    let plain: Vec<Vec<u16>> = plain_messages(lib, scheme, d)
        .into_iter()
        .map(|m| to_symbols(spec, &m.payload))
        .collect();
    let payloads = (0..m1)
        .into_par_iter()
        .map(|i| combine(&field, spec, &matrix, &plain, i))
        .collect();
    Ok(CodedBatch {
        matrix,
        packet_size: lib.packet_size(),
        file_packets: scheme.subpacketization(),
        payloads,
    })
}

/// Per-user elimination state; depends only on the scheme and the matrix.
#[derive(Clone, Debug)]
pub struct UserDecoder {
    pub user: usize,
    /// Plain-message indices the user rebuilds from its nodes.
    pub known: Vec<usize>,
    /// Plain-message indices solved from the coded batch.
    pub unknown: Vec<usize>,
    /// Inverse of the coded-row x unknown-column block, `|unknown|` square.
    inverse: Vec<u16>,
}

impl UserDecoder {
    pub fn new(
        scheme: &SchemeArrays,
        matrix: &CodingMatrix,
        k: usize,
    ) -> Result<Self, CodingError> {
        let known: Vec<usize> = reconstructable_messages(scheme, k)
            .into_iter()
            .map(|id| message_index(scheme, id))
            .collect();
        let known_set: BTreeSet<usize> = known.iter().copied().collect();
        let unknown: Vec<usize> = (0..matrix.cols)
            .filter(|i| !known_set.contains(i))
            .collect();
        let n = unknown.len();
        if n > matrix.rows {
            return Err(CodingError::SingularSystem { user: k });
        }
        let field = matrix.spec.field();
        let block: Vec<u16> = (0..n)
            .flat_map(|i| unknown.iter().map(move |&j| (i, j)))
            .map(|(i, j)| matrix.get(i, j))
            .collect();
        let inverse = invert(&field, n, &block).ok_or(CodingError::SingularSystem { user: k })?;
        Ok(UserDecoder {
            user: k,
            known,
            unknown,
            inverse,
        })
    }

    /// Recovers all `K S` plain payloads.
    fn plain_payloads(
        &self,
        scheme: &SchemeArrays,
        d: &DemandVector,
        cache: &UserCache<'_>,
        batch: &CodedBatch,
    ) -> Result<Vec<Vec<u8>>, CodingError> {
        let spec = batch.matrix.spec;
        let field = spec.field();
        let mut plain: Vec<Option<Vec<u16>>> = vec![None; batch.matrix.cols];
        let s = scheme.s() as usize;
        for &idx in &self.known {
            let g = idx / s + 1;
            let members = &message_members(scheme, g)[idx % s];
            let mut payload = vec![0u8; batch.packet_size];
            for &(j, k2) in members {
                let p = cache
                    .packet(d.file(k2), g, j)
                    .ok_or(CodingError::BatchMismatch)?;
                crate::sim::xor_into(&mut payload, p);
            }
            plain[idx] = Some(to_symbols(spec, &payload));
        }

        let n = self.unknown.len();
        let width = batch.packet_size / spec.symbol_bytes();
        // right-hand side: coded rows minus the known contributions
        let rhs: Vec<Vec<u16>> = (0..n)
            .map(|i| {
                let mut row = to_symbols(spec, &batch.payloads[i]);
                for &j in &self.known {
                    let c = batch.matrix.get(i, j);
                    let x = plain[j].as_ref().expect("known");
                    for (r, &v) in row.iter_mut().zip(x) {
                        *r ^= field.mul(c, v);
                    }
                }
                row
            })
            .collect();
        for (a, &col) in self.unknown.iter().enumerate() {
            let mut symbols = vec![0u16; width];
            for (b, r) in rhs.iter().enumerate() {
                let c = self.inverse[a * n + b];
                for (out, &v) in symbols.iter_mut().zip(r) {
                    *out ^= field.mul(c, v);
                }
            }
            plain[col] = Some(symbols);
        }
        Ok(plain
            .into_iter()
            .map(|p| from_symbols(spec, &p.expect("all messages resolved")))
            .collect())
    }
}

/// Decoders for every user of `scheme`.
pub fn user_decoders(
    scheme: &SchemeArrays,
    matrix: &CodingMatrix,
) -> Result<Vec<UserDecoder>, CodingError> {
    (1..=scheme.k())
        .into_par_iter()
        .map(|k| UserDecoder::new(scheme, matrix, k))
        .collect()
}

fn check_batch(scheme: &SchemeArrays, batch: &CodedBatch) -> Result<(), CodingError> {
    if batch.matrix.cols != scheme.k() * scheme.s() as usize
        || batch.payloads.len() != batch.matrix.rows
        || batch.file_packets != scheme.subpacketization()
    {
        return Err(CodingError::BatchMismatch);
    }
    Ok(())
}

/// Decodes with a prepared [`UserDecoder`].
pub fn compressed_decode_with(
    decoder: &UserDecoder,
    caches: &[NodeCache],
    scheme: &SchemeArrays,
    d: &DemandVector,
    batch: &CodedBatch,
) -> Result<DecodeOutcome, CodingError> {
    check_batch(scheme, batch)?;
    let k = decoder.user;
    let cache = UserCache::new(caches, k, scheme.params.l());
    let plain = decoder.plain_payloads(scheme, d, &cache, batch)?;
    let s = scheme.s() as usize;
    Ok(decode_with(scheme, d, k, &cache, |g, sv| {
        &plain[(g - 1) * s + sv as usize - 1]
    })?)
}

/// Rebuilds known messages, solves for the rest and decodes as in the plain
/// pipeline.
pub fn compressed_decode(
    caches: &[NodeCache],
    scheme: &SchemeArrays,
    d: &DemandVector,
    batch: &CodedBatch,
    k: usize,
) -> Result<DecodeOutcome, CodingError> {
    let decoder = UserDecoder::new(scheme, &batch.matrix, k)?;
    compressed_decode_with(&decoder, caches, scheme, d, batch)
}

/// Decodes at every user with prepared decoders and compares with the library.
pub fn compressed_decode_all(
    decoders: &[UserDecoder],
    lib: &PacketLibrary,
    caches: &[NodeCache],
    scheme: &SchemeArrays,
    d: &DemandVector,
    batch: &CodedBatch,
) -> Vec<UserResult> {
    decoders
        .par_iter()
        .map(
            |dec| match compressed_decode_with(dec, caches, scheme, d, batch) {
                Ok(out) => UserResult {
                    user: dec.user,
                    decoded: out.file == lib.file(d.file(dec.user)),
                    messages_used: out.messages_used,
                    error: None,
                },
                Err(e) => UserResult {
                    user: dec.user,
                    decoded: false,
                    messages_used: 0,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect()
}
