//! Byte-level placement, XOR delivery and decoding driven by [`SchemeArrays`].

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::wrap;
use crate::pda::PdaEntry;
use crate::ratio::{ratio, Ratio};
use crate::transform::SchemeArrays;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("packet size must be at least one byte")]
    EmptyPackets,
    #[error(
        "library has {lib_parts} parts x {lib_packets} packets, scheme needs {parts} x {packets}"
    )]
    DimensionMismatch {
        lib_parts: usize,
        lib_packets: usize,
        parts: usize,
        packets: usize,
    },
    #[error("demand vector has {found} entries, expected {expected}")]
    DemandLength { expected: usize, found: usize },
    #[error("user {user} requests file {file}, outside [1, {n}]")]
    DemandOutOfRange { user: usize, file: usize, n: usize },
    #[error("log has {found} messages, expected {expected}")]
    LogLength { expected: usize, found: usize },
    #[error("user {user} cannot recover packet ({round},{row}): {reason}")]
    UndecodablePacket {
        user: usize,
        round: usize,
        row: usize,
        reason: String,
    },
}

/// `N` files, each split into `K` parts of `F'` packets of `B` bytes, filled
/// from a seeded ChaCha stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PacketLibrary {
    n_files: usize,
    parts: usize,
    packets: usize,
    packet_size: usize,
    seed: u64,
    data: Vec<u8>,
}

impl PacketLibrary {
    pub fn new(
        n_files: usize,
        parts: usize,
        packets: usize,
        packet_size: usize,
        seed: u64,
    ) -> Result<Self, SimError> {
        if packet_size == 0 {
            return Err(SimError::EmptyPackets);
        }
        let mut data = vec![0u8; n_files * parts * packets * packet_size];
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut data);
        Ok(PacketLibrary {
            n_files,
            parts,
            packets,
            packet_size,
            seed,
            data,
        })
    }

    /// Library sized for `scheme`.
    pub fn for_scheme(
        scheme: &SchemeArrays,
        n_files: usize,
        packet_size: usize,
        seed: u64,
    ) -> Result<Self, SimError> {
        PacketLibrary::new(n_files, scheme.k(), scheme.rows(), packet_size, seed)
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn packets(&self) -> usize {
        self.packets
    }

    pub fn packet_size(&self) -> usize {
        self.packet_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `K F' B`.
    pub fn file_size(&self) -> usize {
        self.parts * self.packets * self.packet_size
    }

    /// Packet `W^(g)_{n,j}`.
    pub fn packet(&self, n: usize, g: usize, j: usize) -> &[u8] {
        let idx = ((n - 1) * self.parts + (g - 1)) * self.packets + (j - 1);
        &self.data[idx * self.packet_size..(idx + 1) * self.packet_size]
    }

    /// File `n` as packets in `(g, j)` order.
    pub fn file(&self, n: usize) -> &[u8] {
        let size = self.file_size();
        &self.data[(n - 1) * size..n * size]
    }

    pub(crate) fn check(&self, scheme: &SchemeArrays) -> Result<(), SimError> {
        if self.parts != scheme.k() || self.packets != scheme.rows() {
            return Err(SimError::DimensionMismatch {
                lib_parts: self.parts,
                lib_packets: self.packets,
                parts: scheme.k(),
                packets: scheme.rows(),
            });
        }
        Ok(())
    }
}

/// `d[k-1]` is the file requested by user `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DemandVector(Vec<usize>);

impl DemandVector {
    pub fn new(demands: Vec<usize>, n_files: usize) -> Result<Self, SimError> {
        if let Some((i, &file)) = demands
            .iter()
            .enumerate()
            .find(|(_, &f)| f == 0 || f > n_files)
        {
            return Err(SimError::DemandOutOfRange {
                user: i + 1,
                file,
                n: n_files,
            });
        }
        Ok(DemandVector(demands))
    }

    /// User `k` requests file `k`.
    pub fn identity(k: usize) -> Self {
        DemandVector((1..=k).collect())
    }

    pub fn constant(k: usize, file: usize) -> Self {
        DemandVector(vec![file; k])
    }

    /// User `k` requests file `K + 1 - k`.
    pub fn reversed(k: usize) -> Self {
        DemandVector((1..=k).rev().collect())
    }

    pub fn random(k: usize, n_files: usize, rng: &mut impl Rng) -> Self {
        DemandVector((0..k).map(|_| rng.gen_range(1..=n_files)).collect())
    }

    pub fn users(&self) -> usize {
        self.0.len()
    }

    /// File requested by user `k`.
    pub fn file(&self, k: usize) -> usize {
        self.0[k - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub(crate) fn check(&self, k: usize, n_files: usize) -> Result<(), SimError> {
        if self.0.len() != k {
            return Err(SimError::DemandLength {
                expected: k,
                found: self.0.len(),
            });
        }
        DemandVector::new(self.0.clone(), n_files).map(|_| ())
    }
}

/// Demand vectors used to exercise a scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandSuite {
    pub demands: Vec<DemandVector>,
    /// True when `demands` is all of `[N]^K`.
    pub exhaustive: bool,
}

const EXHAUSTIVE_LIMIT: u128 = 100_000;

/// Every demand vector when `N^K <= 10^5`; otherwise identity (if `N >= K`),
/// constant, reversed and `random` seeded draws.
pub fn demand_suite(k: usize, n_files: usize, seed: u64, random: usize) -> DemandSuite {
    let total = (n_files as u128).checked_pow(k as u32);
    if total.is_some_and(|t| t <= EXHAUSTIVE_LIMIT) {
        let total = total.unwrap() as usize;
        let demands = (0..total)
            .map(|mut idx| {
                let mut d = vec![0; k];
                for slot in d.iter_mut().rev() {
                    *slot = idx % n_files + 1;
                    idx /= n_files;
                }
                DemandVector(d)
            })
            .collect();
        return DemandSuite {
            demands,
            exhaustive: true,
        };
    }
    DemandSuite {
        demands: demand_sample(k, n_files, seed, random),
        exhaustive: false,
    }
}

/// Identity (if `N >= K`), constant, reversed (if `N >= K`), then `random`
/// seeded draws.
pub fn demand_sample(k: usize, n_files: usize, seed: u64, random: usize) -> Vec<DemandVector> {
    let mut out = Vec::with_capacity(random + 3);
    if n_files >= k {
        out.push(DemandVector::identity(k));
    }
    out.push(DemandVector::constant(k, 1));
    if n_files >= k {
        out.push(DemandVector::reversed(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.extend((0..random).map(|_| DemandVector::random(k, n_files, &mut rng)));
    out
}

/// Packet coordinate `(g, j)` within a part-indexed file.
pub type PacketId = (usize, usize);

/// Contents of one cache-node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeCache {
    pub node: usize,
    /// Packet coordinates stored for every file.
    pub coords: BTreeSet<PacketId>,
    stored: HashMap<(usize, usize, usize), Vec<u8>>,
}

impl NodeCache {
    /// Packet `W^(g)_{n,j}` if this node holds it.
    pub fn packet(&self, n: usize, g: usize, j: usize) -> Option<&[u8]> {
        self.stored.get(&(n, g, j)).map(Vec::as_slice)
    }

    pub fn stored_bytes(&self) -> usize {
        self.stored.values().map(Vec::len).sum()
    }
}

/// Node `k` stores `W^(g)_{n,j}` for every file `n` wherever `C^(g)` has a
/// star at `(j, k)`.
pub fn populate_caches(
    lib: &PacketLibrary,
    scheme: &SchemeArrays,
) -> Result<Vec<NodeCache>, SimError> {
    lib.check(scheme)?;
    let caches = (1..=scheme.k())
        .into_par_iter()
        .map(|k| {
            let coords: BTreeSet<PacketId> = scheme
                .c
                .iter()
                .flat_map(|c| {
                    (1..=scheme.rows())
                        .filter(move |&j| *c.grid.get(j, k))
                        .map(move |j| (c.round, j))
                })
                .collect();
            let stored = coords
                .iter()
                .flat_map(|&(g, j)| {
                    (1..=lib.n_files()).map(move |n| ((n, g, j), lib.packet(n, g, j).to_vec()))
                })
                .collect();
            NodeCache {
                node: k,
                coords,
                stored,
            }
        })
        .collect();
    Ok(caches)
}

/// Packets user `k` can read from its `L` nodes, taken from the `U` arrays.
pub fn user_view(scheme: &SchemeArrays, k: usize) -> BTreeSet<PacketId> {
    scheme
        .u
        .iter()
        .flat_map(|u| {
            (1..=scheme.rows())
                .filter(move |&j| *u.grid.get(j, k))
                .map(move |j| (u.round, j))
        })
        .collect()
}

/// Nodes read by user `k`: `k, k+1, ..., k+L-1` around the ring.
pub fn accessible_nodes(k: usize, l: usize, n_nodes: usize) -> Vec<usize> {
    (0..l).map(|w| wrap((k + w) as i64, n_nodes)).collect()
}

/// Constituents `(j, k)` of message `(g, s)`, indexed by `s - 1`.
pub fn message_members(scheme: &SchemeArrays, g: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new(); scheme.s() as usize];
    for (j, k, e) in scheme.round_q(g).grid.positions() {
        if let PdaEntry::Int(s) = *e {
            out[s as usize - 1].push((j, k));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub round: usize,
    pub s: u32,
    pub payload: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionLog {
    pub seed: u64,
    pub packet_size: usize,
    /// Packets per file `K F'`.
    pub file_packets: usize,
    /// Messages in `(g, s)` order.
    pub messages: Vec<Message>,
}

impl TransmissionLog {
    pub fn total_packets_sent(&self) -> usize {
        self.messages.len()
    }

    pub fn bytes_sent(&self) -> usize {
        self.messages.iter().map(|m| m.payload.len()).sum()
    }

    /// Messages sent, in units of one file.
    pub fn load(&self) -> Ratio {
        ratio(self.messages.len(), self.file_packets)
    }
}

pub(crate) fn xor_into(acc: &mut [u8], other: &[u8]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

/// Plain payloads of all `K S` messages in `(g, s)` order.
pub(crate) fn plain_messages(
    lib: &PacketLibrary,
    scheme: &SchemeArrays,
    d: &DemandVector,
) -> Vec<Message> {
    let rounds: Vec<Vec<Message>> = (1..=scheme.k())
        .into_par_iter()
        .map(|g| {
            message_members(scheme, g)
                .into_iter()
                .enumerate()
                .map(|(s0, members)| {
                    let mut payload = vec![0u8; lib.packet_size()];
                    for (j, k) in members {
                        xor_into(&mut payload, lib.packet(d.file(k), g, j));
                    }
                    Message {
                        round: g,
                        s: s0 as u32 + 1,
                        payload,
                    }
                })
                .collect()
        })
        .collect();
    rounds.into_iter().flatten().collect()
}

/// For each round `g` and integer `s`, sends the XOR of `W^(g)_{d_k,j}` over
/// the cells `(j, k)` of `Q^(g)` holding `s`.
pub fn deliver(
    lib: &PacketLibrary,
    scheme: &SchemeArrays,
    d: &DemandVector,
) -> Result<TransmissionLog, SimError> {
    lib.check(scheme)?;
    d.check(scheme.k(), lib.n_files())?;
    Ok(TransmissionLog {
        seed: lib.seed(),
        packet_size: lib.packet_size(),
        file_packets: scheme.subpacketization(),
        messages: plain_messages(lib, scheme, d),
    })
}

/// Read access of one user to its cache-nodes.
pub(crate) struct UserCache<'a> {
    nodes: Vec<&'a NodeCache>,
}

impl<'a> UserCache<'a> {
    pub(crate) fn new(caches: &'a [NodeCache], k: usize, l: usize) -> Self {
        UserCache {
            nodes: accessible_nodes(k, l, caches.len())
                .into_iter()
                .map(|n| &caches[n - 1])
                .collect(),
        }
    }

    pub(crate) fn packet(&self, n: usize, g: usize, j: usize) -> Option<&'a [u8]> {
        self.nodes.iter().find_map(|c| c.packet(n, g, j))
    }
}

/// Recovers every packet of `(g, j)` not in the user's cache from the plain
/// message it appears in.
pub(crate) fn decode_with<'m>(
    scheme: &SchemeArrays,
    d: &DemandVector,
    k: usize,
    cache: &UserCache<'_>,
    message: impl Fn(usize, u32) -> &'m [u8],
) -> Result<DecodeOutcome, SimError> {
    let want = d.file(k);
    let f = scheme.rows();
    let mut file = Vec::new();
    let mut used = BTreeSet::new();
    for g in 1..=scheme.k() {
        let q = &scheme.round_q(g).grid;
        let members = message_members(scheme, g);
        for j in 1..=f {
            if let Some(bytes) = cache.packet(want, g, j) {
                file.extend_from_slice(bytes);
                continue;
            }
            let undecodable = |reason: String| SimError::UndecodablePacket {
                user: k,
                round: g,
                row: j,
                reason,
            };
            let PdaEntry::Int(s) = *q.get(j, k) else {
                return Err(undecodable(
                    "marked retrievable but no node holds it".into(),
                ));
            };
            let mut packet = message(g, s).to_vec();
            for &(j2, k2) in &members[s as usize - 1] {
                if (j2, k2) == (j, k) {
                    continue;
                }
                let side = cache.packet(d.file(k2), g, j2).ok_or_else(|| {
                    undecodable(format!(
                        "message ({g},{s}) also carries uncached ({g},{j2})"
                    ))
                })?;
                xor_into(&mut packet, side);
            }
            used.insert((g, s));
            file.extend_from_slice(&packet);
        }
    }
    Ok(DecodeOutcome {
        file,
        messages_used: used.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub file: Vec<u8>,
    /// Distinct messages consumed.
    pub messages_used: usize,
}

/// Reconstructs file `d_k` for user `k` from its nodes and the log.
pub fn decode(
    caches: &[NodeCache],
    scheme: &SchemeArrays,
    d: &DemandVector,
    log: &TransmissionLog,
    k: usize,
) -> Result<DecodeOutcome, SimError> {
    let s = scheme.s() as usize;
    let expected = scheme.k() * s;
    if log.messages.len() != expected {
        return Err(SimError::LogLength {
            expected,
            found: log.messages.len(),
        });
    }
    let cache = UserCache::new(caches, k, scheme.params.l());
    decode_with(scheme, d, k, &cache, |g, sv| {
        &log.messages[(g - 1) * s + sv as usize - 1].payload
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserResult {
    pub user: usize,
    pub decoded: bool,
    pub messages_used: usize,
    pub error: Option<String>,
}

/// Decodes at every user and compares with the library.
pub fn decode_all(
    lib: &PacketLibrary,
    caches: &[NodeCache],
    scheme: &SchemeArrays,
    d: &DemandVector,
    log: &TransmissionLog,
) -> Vec<UserResult> {
    (1..=scheme.k())
        .into_par_iter()
        .map(|k| match decode(caches, scheme, d, log, k) {
            Ok(out) => UserResult {
                user: k,
                decoded: out.file == lib.file(d.file(k)),
                messages_used: out.messages_used,
                error: None,
            },
            Err(e) => UserResult {
                user: k,
                decoded: false,
                messages_used: 0,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// Largest measured load over `demands`.
pub fn worst_case_load<'a>(
    lib: &PacketLibrary,
    scheme: &SchemeArrays,
    demands: impl IntoIterator<Item = &'a DemandVector>,
) -> Result<Ratio, SimError> {
    let mut worst = ratio(0, 1);
    for d in demands {
        let load = deliver(lib, scheme, d)?.load();
        if load > worst {
            worst = load;
        }
    }
    Ok(worst)
}
