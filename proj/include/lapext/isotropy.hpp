#pragma once

#include "lapext/boundary_unitary.hpp"

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace lapext {

/// Element of the doubled boundary space C^n (+) C^n: a trace value block
/// and a conormal (outward) derivative block.
struct BoundaryPair {
    Eigen::VectorXcd value;
    Eigen::VectorXcd derivative;

    int n() const { return static_cast<int>(value.size()); }
};

/// Boundary form Sigma(p, q) = <p.value, q.derivative> - <p.derivative, q.value>,
/// conjugate linear in the first slot.
std::complex<double> sigma(const BoundaryPair& p, const BoundaryPair& q);

/// Image of a pair under the Cayley rotation:
/// plus = (value + i derivative)/sqrt(2), minus = (value - i derivative)/sqrt(2).
struct CayleyPair {
    Eigen::VectorXcd plus;
    Eigen::VectorXcd minus;
};

CayleyPair cayley(const BoundaryPair& p);

/// Sigma expressed in Cayley coordinates:
/// -i (<a.plus, b.plus> - <a.minus, b.minus>). Equals sigma of the preimages.
std::complex<double> sigma_cayley(const CayleyPair& a, const CayleyPair& b);

/// Residual of the boundary equation (value - i derivative) - U (value + i derivative).
double boundary_equation_residual(const BoundaryPair& p, const Eigen::MatrixXcd& u);

/// Maximal Sigma-isotropic subspace of C^{2n}, stored through an orthonormal
/// basis of stacked pairs plus the associated orthogonal projector.
struct IsotropicSubspace {
    int n = 0;
    std::vector<BoundaryPair> basis; // orthonormal as vectors of C^{2n}
    Eigen::MatrixXcd projector;      // 2n x 2n

    int dim() const { return static_cast<int>(basis.size()); }

    /// Orthonormalizes the raw pairs and validates isotropy; throws
    /// NotIsotropic / DegenerateBasis / DimensionMismatch.
    static IsotropicSubspace from_pairs(const std::vector<BoundaryPair>& pairs,
                                        double isotropy_tol = 1e-12);
};

/// Subspace spanned by the pairs ((I+U) e_k, -i (I-U) e_k); the graph of the
/// boundary equation of U.
IsotropicSubspace subspace_from_unitary(const BoundaryUnitary& u);

/// Reconstructs the unitary whose boundary-equation graph is the span of the
/// pairs. Requires n pairs (NotMaximal), isotropy (NotIsotropic) and a
/// non-degenerate Cayley-plus block (DegenerateBasis). The solve is followed
/// by a polar correction so the result is exactly unitary.
Eigen::MatrixXcd recover_unitary(const std::vector<BoundaryPair>& pairs,
                                 double degeneracy_tol = 1e-10);
Eigen::MatrixXcd recover_unitary(const IsotropicSubspace& w,
                                 double degeneracy_tol = 1e-10);

} // namespace lapext
