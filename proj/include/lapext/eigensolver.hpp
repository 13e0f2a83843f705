#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>

namespace lapext {

using SparseCxd = Eigen::SparseMatrix<std::complex<double>>;

struct EigsOptions {
    int k = 1;               // number of smallest eigenvalues
    double shift = 0.0;      // must sit strictly below the smallest eigenvalue
    double tol = 1e-10;      // residual target: ||Ax - lambda Mx|| <= tol (1+|lambda|) ||x||
    int block = 4;           // Lanczos block width (>= expected multiplicity)
    int max_blocks = 160;    // Krylov budget in blocks
    unsigned long long seed = 0x1a9ec5u;
};

struct EigsResult {
    Eigen::VectorXd values;     // ascending
    Eigen::MatrixXcd vectors;   // M-orthonormal columns
    Eigen::VectorXd residuals;  // ||A x - lambda M x||_2 per pair
    bool converged = false;
    int blocks_used = 0;
};

/// All-pairs dense solve of the Hermitian-definite pencil (A, M); returns the
/// k smallest. Intended for reduced systems up to a few thousand unknowns.
EigsResult dense_lowest(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& m, int k);

/// Shift-invert block Lanczos in the M inner product with full
/// reorthogonalization. Requires options.shift below the spectrum; throws
/// SolverFailure when the factorization fails or the Krylov budget is
/// exhausted before the k smallest pairs reach the residual target.
EigsResult lanczos_lowest(const SparseCxd& a, const SparseCxd& m, const EigsOptions& options);

} // namespace lapext
