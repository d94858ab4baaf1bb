//! Algorithms for correspondence packing and list packing of complete
//! bipartite graphs `K_{d,t}`.

pub mod certificate;
pub mod cover;
pub mod error;
pub mod exact;
pub mod latin;
pub mod matching;
pub mod packing;
pub mod perm;
pub mod reproduce;
pub mod search;
pub mod thresholds;

pub use certificate::{verify_certificate, Certificate, Claim, Instance, Verdict, VerifyLimits, Witness};
pub use cover::{CorrespondenceCover, ListAssignment, ListCorrespondence, PartialInjection, PartialMatchingCover};
pub use error::{Error, Result};
pub use packing::{FoldMode, LatinWitness, ObstructionKind, ObstructionReport, PackingMatrix};
pub use perm::{Parity, Permutation};
pub use search::{
    ColouringWitness, ListColouringWitness, ListPackingOutcome, ListPackingWitness, PackingOutcome, PackingWitness,
    SearchBudget,
};
