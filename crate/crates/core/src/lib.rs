//! Multiaccess coded caching from placement delivery arrays.
//!
//! Cache nodes sit on a ring and each user reads `L` consecutive nodes. The
//! crate builds PDAs, turns them into multiaccess schemes, simulates delivery
//! and decoding, and evaluates the rate expressions used to compare schemes.

pub mod analysis;
pub mod coding;
pub mod combinatorics;
pub mod construct;
pub mod field;
pub mod grid;
pub mod pda;
pub mod ratio;
pub mod sim;
pub mod transform;

pub use analysis::{AnalysisError, LoadPoint};
pub use coding::{lambda_profile, CodedBatch, LambdaProfile};
pub use construct::{
    mn_pda, partition_pda, uncoded_pda, ConstructionError, MnParams, PartitionParams,
};
pub use field::FieldSpec;
pub use pda::{Pda, PdaEntry, PdaError};
pub use sim::{DemandVector, PacketLibrary, TransmissionLog};
pub use transform::{build_scheme, MultiaccessParams, RoundArray, SchemeArrays, TransformError};
