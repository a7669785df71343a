//! Stability checks under operator and vertex-set perturbations.

mod contour;
mod experiments;
mod identification;

pub use contour::{cg_constant, cg_quadrature, ContourConstant};
pub use experiments::{
    filter_intertwining_defect, graph_perturbation_experiment, graph_stability_constant, hermitian_perturbation,
    layer_lipschitz_constant, lipschitz_transfer, operator_perturbation_experiment, operator_stability_constant,
    perturb_edge_weights, CommutationBranch, GraphExperimentConfig, GraphPerturbationReport, LayerCertificate,
    LipschitzTransfer, OperatorPerturbationReport, SampleRow,
};
pub use identification::{
    closeness_defect, equivalence_defects, reference_graph, reference_split_pair, split_vertex_pair, ClosenessReport,
    EquivalenceReport, IdentificationPair, SplitVertexPair,
};
