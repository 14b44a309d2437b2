//! Matrix files, synthetic test matrices, and factorization reports.

pub mod format;
pub mod report;
pub mod testmat;

pub use format::{load_binary, read_matrix, save_binary, write_matrix};
pub use report::{
    nnz_counts, nnz_report, verify, Density, ErrorReport, FactorKind, Factorization, NnzCounts,
    VerifyContext,
};
pub use testmat::{gen_test_matrix, logspace, read_spectrum, write_spectrum, SpectrumSpec};
