pub mod aggregation;
pub mod dataset;
pub mod descriptors;
pub mod error;
pub mod graph;
pub mod higher_order;
pub mod kernel_ml;
pub mod linalg;
pub mod perturbation;
pub mod random;
pub mod scattering;
pub mod spectral;
pub mod tolerance;

pub use error::{Error, Result};

// The guide's Rust snippets run as doctests.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
struct Introduction;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/graphs.md")]
struct Graphs;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/filter-banks.md")]
struct FilterBanks;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/scattering.md")]
struct Scattering;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/aggregation.md")]
struct Aggregation;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/stability.md")]
struct Stability;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/edge-signals.md")]
struct EdgeSignals;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/kernel-methods.md")]
struct KernelMethods;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
struct CommandLine;
