//! Sparse symmetric linear algebra: storage, LDLᵀ, MINRES and small dense
//! eigenproblems.

mod eigen;
mod ldlt;
mod minres;
mod ordering;
mod precond;
mod sparse;

pub use eigen::{dense_symmetric_eigen, dense_symmetric_eigenvalues, EIGEN_CAP};
pub use ldlt::{
    ldlt_factor, ldlt_factor_ordered, ldlt_factor_with, relative_residual, Factorization, Inertia,
};
pub use minres::{minres, KrylovReport, MinresOptions};
pub use ordering::{amd_order, OrderingCache};
pub use precond::{block_jacobi_precond, BlockJacobi};
pub use sparse::{dot, norm2, norm_inf, CscMatrix, SparseSymmetric};
