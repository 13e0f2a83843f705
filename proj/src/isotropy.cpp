#include "lapext/isotropy.hpp"
#include "lapext/errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>

namespace lapext {

namespace {

const std::complex<double> ci(0.0, 1.0);

Eigen::VectorXcd stack(const BoundaryPair& p) {
    Eigen::VectorXcd s(2 * p.n());
    s << p.value, p.derivative;
    return s;
}

BoundaryPair unstack(const Eigen::VectorXcd& s) {
    const auto n = s.size() / 2;
    return {s.head(n), s.tail(n)};
}

} // namespace

std::complex<double> sigma(const BoundaryPair& p, const BoundaryPair& q) {
    if (p.n() != q.n())
        throw DimensionMismatch("sigma: pair sizes differ");
    return p.value.dot(q.derivative) - p.derivative.dot(q.value);
}

CayleyPair cayley(const BoundaryPair& p) {
    const double s = 1.0 / std::sqrt(2.0);
    return {s * (p.value + ci * p.derivative), s * (p.value - ci * p.derivative)};
}

std::complex<double> sigma_cayley(const CayleyPair& a, const CayleyPair& b) {
    if (a.plus.size() != b.plus.size())
        throw DimensionMismatch("sigma_cayley: pair sizes differ");
    return -ci * (a.plus.dot(b.plus) - a.minus.dot(b.minus));
}

double boundary_equation_residual(const BoundaryPair& p, const Eigen::MatrixXcd& u) {
    if (u.rows() != p.n() || u.cols() != p.n())
        throw DimensionMismatch("boundary_equation_residual: size mismatch");
    return ((p.value - ci * p.derivative) - u * (p.value + ci * p.derivative)).norm();
}

IsotropicSubspace IsotropicSubspace::from_pairs(const std::vector<BoundaryPair>& pairs,
                                                double isotropy_tol) {
    if (pairs.empty())
        throw DimensionMismatch("IsotropicSubspace: no pairs given");
    const int n = pairs[0].n();
    const int m = static_cast<int>(pairs.size());
    Eigen::MatrixXcd raw(2 * n, m);
    for (int k = 0; k < m; ++k) {
        if (pairs[k].n() != n || pairs[k].derivative.size() != n)
            throw DimensionMismatch("IsotropicSubspace: inconsistent pair sizes");
        raw.col(k) = stack(pairs[k]);
    }

    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            const double scale = raw.col(i).norm() * raw.col(j).norm();
            if (std::abs(sigma(pairs[i], pairs[j])) > isotropy_tol * std::max(scale, 1e-300))
                throw NotIsotropic("IsotropicSubspace: sigma(b_" + std::to_string(i) +
                                   ", b_" + std::to_string(j) + ") is nonzero");
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(raw, Eigen::ComputeThinU);
    const double smax = svd.singularValues()[0];
    if (smax <= 0.0 || svd.singularValues()[m - 1] <= 1e-12 * smax)
        throw DegenerateBasis("IsotropicSubspace: pairs are numerically dependent");

    IsotropicSubspace w;
    w.n = n;
    w.basis.reserve(m);
    for (int k = 0; k < m; ++k)
        w.basis.push_back(unstack(svd.matrixU().col(k)));
    w.projector = svd.matrixU() * svd.matrixU().adjoint();
    w.projector = 0.5 * (w.projector + w.projector.adjoint()).eval();
    return w;
}

IsotropicSubspace subspace_from_unitary(const BoundaryUnitary& u) {
    const int n = u.dim();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    // columns ((I+U)e_k, -i(I-U)e_k) stacked; they satisfy M^H M = 4 I, so
    // halving them orthonormalizes exactly
    Eigen::MatrixXcd b(2 * n, n);
    b.topRows(n) = 0.5 * (id + u.matrix);
    b.bottomRows(n) = -0.5 * ci * (id - u.matrix);

    IsotropicSubspace w;
    w.n = n;
    w.basis.reserve(n);
    for (int k = 0; k < n; ++k)
        w.basis.push_back(unstack(b.col(k)));
    w.projector = b * b.adjoint();
    w.projector = 0.5 * (w.projector + w.projector.adjoint()).eval();
    return w;
}

Eigen::MatrixXcd recover_unitary(const std::vector<BoundaryPair>& pairs,
                                 double degeneracy_tol) {
    if (pairs.empty())
        throw DimensionMismatch("recover_unitary: no pairs given");
    const int n = pairs[0].n();
    if (static_cast<int>(pairs.size()) != n)
        throw NotMaximal("recover_unitary: need exactly n pairs, got " +
                         std::to_string(pairs.size()) + " for n = " + std::to_string(n));

    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double scale = std::max(stack(pairs[i]).norm() * stack(pairs[j]).norm(), 1e-300);
            if (std::abs(sigma(pairs[i], pairs[j])) > 1e-12 * scale)
                throw NotIsotropic("recover_unitary: basis is not sigma-isotropic");
        }
    }

    Eigen::MatrixXcd phi_plus(n, n), phi_minus(n, n);
    for (int k = 0; k < n; ++k) {
        const CayleyPair c = cayley(pairs[k]);
        phi_plus.col(k) = c.plus;
        phi_minus.col(k) = c.minus;
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(phi_plus,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()[0];
    if (smax <= 0.0 || svd.singularValues()[n - 1] <= degeneracy_tol * smax)
        throw DegenerateBasis("recover_unitary: Cayley-plus block is singular");

    // On the graph, minus = U plus for every column, so U = Phi- Phi+^{-1};
    // the polar factor removes the O(eps) departure from unitarity.
    const Eigen::MatrixXcd u0 = phi_minus * svd.solve(Eigen::MatrixXcd::Identity(n, n));
    Eigen::JacobiSVD<Eigen::MatrixXcd> polar(u0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return polar.matrixU() * polar.matrixV().adjoint();
}

Eigen::MatrixXcd recover_unitary(const IsotropicSubspace& w, double degeneracy_tol) {
    return recover_unitary(w.basis, degeneracy_tol);
}

} // namespace lapext
