//! Sampled functions, partitions of unity and multiplier norms.

mod corpus;
mod grid;
mod norms;
mod partition;

pub use corpus::{load_corpus, ClosedForm, CorpusEntry, SampleSource};
pub use grid::{fft, frequencies, ifft, Coordinate, GridSpec, SampledFunction};
pub use norms::{
    besov_norm, classical_hoermander, hoermander_norm, log_derivatives, mihlin_norm,
    modern_hoermander, partition_equivalence, sobexp_norm, sobolev_norm, NormDiagnostics,
    NormKind, NormResult, SobolevNorm, SobolevWeight, TAIL_DIVERGENT, TAIL_WARNING,
};
pub use partition::{make_partition, Bump, BumpParams, PartitionKind, PartitionOfUnity, PartitionParams};
