#pragma once

#include "lapext/boundary_unitary.hpp"
#include "lapext/eigensolver.hpp"
#include "lapext/isotropy.hpp"
#include "lapext/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <limits>
#include <string>
#include <vector>

namespace lapext {

struct AssembleOptions {
    double gap_min = default_gap_min;
    double snap_tol = default_snap_tol;
    double unitarity_tol = -1.0; // forwarded to decompose() for raw matrices
    double constraint_tol = 1e-8; // relative SVD cutoff for the trace constraint
};

/// Discretization of the constrained quadratic form
///   Q(phi) = integral rho |grad phi|^2 - <trace phi, A trace phi>_w
/// over the subspace where the weighted trace lies in the range of the
/// partial Cayley projector. Eigenvalue problems are posed on the reduced
/// (constraint-eliminated) pencil (reduced_form, reduced_mass).
struct QuadraticFormSystem {
    Mesh mesh;
    BoundaryUnitary unitary;
    PartialCayley cayley;
    GapReport gap;

    SparseCxd stiffness;         // weighted Dirichlet energy K
    Eigen::VectorXd mass;        // lumped mass diagonal
    SparseCxd boundary_term;     // B = -W^{1/2} A W^{1/2} on boundary slots
    SparseCxd form;              // K + B

    SparseCxd constraint_basis;  // C: orthonormal columns spanning the constraint kernel
    SparseCxd reduced_form;      // C^H (K + B) C
    SparseCxd reduced_mass;      // C^H M C
    int num_constraints = 0;     // independent trace constraints eliminated

    std::string fingerprint;     // stable content hash of the boundary unitary

    int num_nodes() const { return static_cast<int>(mass.size()); }
    int reduced_dim() const { return static_cast<int>(constraint_basis.cols()); }
};

/// Builds the constrained discrete form for the extension described by the
/// boundary unitary. Throws DimensionMismatch when the unitary does not act
/// on the mesh boundary slots and NoGap when the eigenphase gap at -1 is
/// below options.gap_min.
QuadraticFormSystem assemble(const Mesh& mesh, const BoundaryUnitary& unitary,
                             const AssembleOptions& options = {});
QuadraticFormSystem assemble(const Mesh& mesh, const Eigen::MatrixXcd& unitary,
                             const AssembleOptions& options = {});

struct SolveOptions {
    int k = 6;                // number of lowest eigenpairs
    int dense_cutoff = 3000;  // reduced dims up to this use the dense path
    double solver_tol = 1e-7; // acceptance threshold for scaled residuals
    double lanczos_tol = 1e-10;
    int block = 4;
    int max_blocks = 160;
    unsigned seed = 0x1a9ec5u;
    // Spectral shift for the iterative path; NaN derives one from the
    // certified lower bound of the form.
    double shift = std::numeric_limits<double>::quiet_NaN();
};

struct Spectrum {
    Eigen::VectorXd values;     // ascending
    Eigen::MatrixXcd vectors;   // full-grid coordinates, M-orthonormal columns
    Eigen::VectorXd residuals;  // reduced-pencil residual per pair
    bool used_dense = false;
    int blocks_used = 0;
    int reduced_dim = 0;
};

/// Lowest eigenpairs of the reduced pencil, lifted back to the grid.
Spectrum solve(const QuadraticFormSystem& system, const SolveOptions& options = {});

/// Certified lower bound for the spectrum of the constrained form: one
/// half-width Robin collar per axis with coefficient ||A|| / (1 - delta),
/// combined as (sum over axes) * (1 - delta) / (1 + delta) where delta is
/// the metric distortion.
struct BoundReport {
    double bound = 0.0;
    double slack = 0.0;       // discretization allowance: 10 h^2 |bound| + 1e-10
    double min_value = 0.0;   // smallest computed eigenvalue that was checked
    bool passes = false;
    double c_eff = 0.0;       // collar Robin coefficient
    std::vector<double> collar_lengths; // per axis
    std::vector<double> axis_bounds;    // per-axis collar ground states
};

double spectral_lower_bound(const QuadraticFormSystem& system, BoundReport* detail = nullptr);
BoundReport verify_lower_bound(const QuadraticFormSystem& system,
                               const Eigen::VectorXd& values);

struct ConsistencyReport {
    double interior_defect = 0.0; // worst interior-equation residual, scaled
    double residual_defect = 0.0; // worst algebraic residual, scaled
    double tolerance = 0.0;
    bool passes = false;
};

/// Checks that each computed eigenpair satisfies the interior second-order
/// stencil equation and the reduced pencil equation to within
/// tol * (1 + |lambda|) * ||x||.
ConsistencyReport extension_consistency(const QuadraticFormSystem& system,
                                        const Spectrum& spectrum,
                                        double tol = 1e-7);

/// max_{ij} |X_ij - conj(X_ji)|.
double hermiticity_defect(const SparseCxd& matrix);

/// Boundary-value imposition by row replacement: rows of constrained
/// boundary nodes are overwritten with identity rows while their columns are
/// left intact. This textbook shortcut destroys the symmetry of the form;
/// it is kept as a negative control for the Hermiticity checks.
SparseCxd row_replacement_form(const QuadraticFormSystem& system);

/// Weighted boundary trace of a grid function: value block W^{1/2} phi_b and
/// derivative block W^{1/2} d_n phi_b with the outward normal derivative from
/// a second-order one-sided stencil. A corner uses the normal of the edge
/// that begins there in the counterclockwise traversal.
BoundaryPair boundary_trace(const Mesh& mesh, const Eigen::VectorXcd& state);

} // namespace lapext
