//! Weighted signal spaces, shift operators and their spectral decompositions.

mod canonical;
mod decomposition;
pub(crate) mod edgelist;
mod operator;
mod space;

pub use canonical::canonical_order;
pub use decomposition::SpectralDecomposition;
pub use edgelist::{parse_edge_list, parse_matrix, read_edge_list, read_matrix, EdgeList};
pub use operator::{
    adjacency_operator, degree_operator, frobenius_distance, laplacian, rescaled_laplacian, validate_adjacency,
    OperatorKind, ShiftOperator,
};
pub(crate) use space::same_space;
pub use space::{inner_product, GraphSignalSpace, Signal};
