//! Filter kernels, functional-calculus filtering and frame bounds.

mod bank;
mod kernel;

pub use bank::{
    apply_filter, architecture_i_bank, architecture_ii_bank, kernel_matrix, BankConfig, FilterBank, FrameBounds,
    FrameCheck, Preset, ZeroMode,
};
pub use kernel::{FilterKernel, KernelKind};
