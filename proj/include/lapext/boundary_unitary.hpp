#pragma once

#include <Eigen/Dense>
#include <random>

namespace lapext {

inline constexpr double default_snap_tol = 1e-10;
inline constexpr double default_gap_min = 1e-6;

/// Unitary matrix on the discretized boundary space together with its
/// eigenphase decomposition. Eigenphases live in (-pi, pi], sorted ascending,
/// with phases within snap_tol of the circle point pi snapped exactly to pi.
/// Eigenvector columns are orthonormal and diagonalize the matrix.
struct BoundaryUnitary {
    Eigen::MatrixXcd matrix;
    Eigen::VectorXd eigenphases;
    Eigen::MatrixXcd eigenvectors;

    int dim() const { return static_cast<int>(matrix.rows()); }
};

/// Location report for the eigenphase cluster at -1 (phase pi).
struct GapReport {
    bool has_minus_one = false;
    double gap_width = 0.0; // min circle distance of non-pi phases to pi; pi if none
    bool passes = false;    // gap_width >= the requested threshold
};

/// A_U = i P (U - I)(U + I)^{-1} restricted off the -1 eigenspace, realized
/// spectrally as sum_k -tan(phase_k / 2) * projector_k over phases != pi.
struct PartialCayley {
    Eigen::MatrixXcd matrix;    // Hermitian
    Eigen::MatrixXcd projector; // orthogonal projector onto the non-(-1) eigenspace
    double norm = 0.0;          // max |tan(phase/2)| = spectral norm of matrix
};

/// Validates unitarity (defect in Frobenius norm <= unitarity_tol, default
/// 1e-12 * dim) and computes the sorted, snapped eigenphase decomposition.
/// Throws NotUnitary / DimensionMismatch.
BoundaryUnitary decompose(const Eigen::MatrixXcd& u,
                          double unitarity_tol = -1.0,
                          double snap_tol = default_snap_tol);

GapReport gap_report(const BoundaryUnitary& u, double gap_min = default_gap_min);

/// Requires gap_report(u, gap_min).passes; throws NoGap otherwise.
PartialCayley partial_cayley(const BoundaryUnitary& u, double gap_min = default_gap_min);

/// Connectivity and quadrature data of a discretized boundary, enough to
/// build the graph Laplacian entering the Sobolev-trace surrogate norm.
struct BoundaryMesh {
    Eigen::VectorXd weights;   // quadrature weight per node
    Eigen::MatrixXd laplacian; // graph Laplacian, 1/h^2 edge weights

    int size() const { return static_cast<int>(weights.size()); }

    /// n isolated point elements with unit weight (interval endpoints).
    static BoundaryMesh isolated(int n);
    /// Closed uniform cycle of n nodes with the given total circumference.
    static BoundaryMesh circle(int n, double circumference);
    /// Closed polyline through nodes separated by the given segment lengths
    /// (segment k joins node k to node k+1 mod n).
    static BoundaryMesh cycle(const Eigen::VectorXd& segment_lengths);
};

/// || S A S^{-1} ||_2 with S = (I + L_b)^{1/2} computed by eigendecomposition
/// of the boundary graph Laplacian. Finite iff A is bounded on the discrete
/// trace scale; used as the admissibility surrogate.
double admissibility_norm(const Eigen::MatrixXcd& a, const BoundaryMesh& bm);

/// Haar-like random unitary: QR of a complex Gaussian matrix.
Eigen::MatrixXcd random_unitary_matrix(int dim, std::mt19937_64& rng);

/// Random unitary whose eigenphases keep a circle distance >= gap_min from pi
/// and satisfy max |tan(phase/2)| <= norm_max. A dirichlet_fraction of the
/// phases is placed exactly at pi (snapped -1 eigenvalues).
BoundaryUnitary random_admissible_unitary(int dim, double gap_min, double norm_max,
                                          std::mt19937_64& rng,
                                          double dirichlet_fraction = 0.25);

} // namespace lapext
