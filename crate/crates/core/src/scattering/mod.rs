//! The tree-structured scattering transform and its energy bookkeeping.

mod architecture;
mod config;
mod connecting;
mod domain;
mod energy;
mod nonlinearity;
mod tree;


pub use architecture::{LayerModule, ScatteringArchitecture};
pub use config::{ArchitectureSpec, ConnectingName, ConnectingSpec, LayerSpec, OperatorName, OperatorSpec};
pub use connecting::ConnectingOperator;
pub use domain::{LayerSignal, SignalDomain};
pub use energy::{
    energy_decay_certificate, energy_sandwich_check, lower_energy_constant, signal_stability_constant,
    truncation_bound, upper_energy_constant, EigenvectorChoice, EnergyCertificate, LayerDecay, SandwichCheck,
};
pub use nonlinearity::Nonlinearity;
pub use tree::{scatter, FeatureTree, Path, TreeLayer};
