#include "lapext/boundary_unitary.hpp"
#include "lapext/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace lapext {

namespace {
constexpr double pi = std::numbers::pi;
}

BoundaryUnitary decompose(const Eigen::MatrixXcd& u, double unitarity_tol, double snap_tol) {
    if (u.rows() == 0 || u.rows() != u.cols())
        throw DimensionMismatch("decompose: matrix must be square and non-empty");
    const int n = static_cast<int>(u.rows());
    if (unitarity_tol < 0.0)
        unitarity_tol = 1e-12 * n;

    const double defect =
        (u * u.adjoint() - Eigen::MatrixXcd::Identity(n, n)).norm();
    if (defect > unitarity_tol)
        throw NotUnitary("decompose: unitarity defect " + std::to_string(defect) +
                         " exceeds tolerance " + std::to_string(unitarity_tol));

    // A unitary matrix is normal, so its Schur form is diagonal up to
    // rounding and the Schur basis is an orthonormal eigenbasis.
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u);
    if (schur.info() != Eigen::Success)
        throw SolverFailure("decompose: Schur iteration failed");

    Eigen::VectorXd phases(n);
    for (int i = 0; i < n; ++i) {
        double lam = std::arg(schur.matrixT()(i, i)); // in (-pi, pi]
        if (pi - std::abs(lam) <= snap_tol)
            lam = pi;
        phases[i] = lam;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return phases[a] < phases[b]; });

    BoundaryUnitary out;
    out.matrix = u;
    out.eigenphases.resize(n);
    out.eigenvectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.eigenphases[i] = phases[order[i]];
        out.eigenvectors.col(i) = schur.matrixU().col(order[i]);
    }
    return out;
}

GapReport gap_report(const BoundaryUnitary& u, double gap_min) {
    GapReport rep;
    rep.gap_width = pi; // vacuous when every phase sits at pi
    for (int i = 0; i < u.dim(); ++i) {
        const double lam = u.eigenphases[i];
        if (lam == pi) {
            rep.has_minus_one = true;
        } else {
            rep.gap_width = std::min(rep.gap_width, pi - std::abs(lam));
        }
    }
    rep.passes = rep.gap_width >= gap_min;
    return rep;
}

PartialCayley partial_cayley(const BoundaryUnitary& u, double gap_min) {
    const GapReport rep = gap_report(u, gap_min);
    if (!rep.passes)
        throw NoGap("partial_cayley: eigenphase gap " + std::to_string(rep.gap_width) +
                    " below threshold " + std::to_string(gap_min));

    const int n = u.dim();
    std::vector<int> keep;
    keep.reserve(n);
    for (int i = 0; i < n; ++i)
        if (u.eigenphases[i] != pi)
            keep.push_back(i);

    PartialCayley pc;
    pc.matrix = Eigen::MatrixXcd::Zero(n, n);
    pc.projector = Eigen::MatrixXcd::Zero(n, n);
    if (!keep.empty()) {
        Eigen::MatrixXcd v(n, static_cast<int>(keep.size()));
        Eigen::VectorXd t(static_cast<int>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            v.col(static_cast<int>(k)) = u.eigenvectors.col(keep[k]);
            t[static_cast<int>(k)] = -std::tan(u.eigenphases[keep[k]] / 2.0);
            pc.norm = std::max(pc.norm, std::abs(t[static_cast<int>(k)]));
        }
        pc.matrix = v * t.asDiagonal() * v.adjoint();
        pc.projector = v * v.adjoint();
        // the spectral sums are Hermitian in exact arithmetic; symmetrize to
        // remove rounding drift
        pc.matrix = 0.5 * (pc.matrix + pc.matrix.adjoint()).eval();
        pc.projector = 0.5 * (pc.projector + pc.projector.adjoint()).eval();
    }
    return pc;
}

BoundaryMesh BoundaryMesh::isolated(int n) {
    BoundaryMesh bm;
    bm.weights = Eigen::VectorXd::Ones(n);
    bm.laplacian = Eigen::MatrixXd::Zero(n, n);
    return bm;
}

BoundaryMesh BoundaryMesh::circle(int n, double circumference) {
    return cycle(Eigen::VectorXd::Constant(n, circumference / n));
}

BoundaryMesh BoundaryMesh::cycle(const Eigen::VectorXd& segment_lengths) {
    const int n = static_cast<int>(segment_lengths.size());
    if (n < 3)
        throw DimensionMismatch("BoundaryMesh::cycle: need at least 3 nodes");
    BoundaryMesh bm;
    bm.weights.resize(n);
    bm.laplacian = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double next = segment_lengths[i];
        const double prev = segment_lengths[(i + n - 1) % n];
        bm.weights[i] = 0.5 * (prev + next);
        const int j = (i + 1) % n;
        const double w = 1.0 / (next * next);
        bm.laplacian(i, i) += w;
        bm.laplacian(j, j) += w;
        bm.laplacian(i, j) -= w;
        bm.laplacian(j, i) -= w;
    }
    return bm;
}

double admissibility_norm(const Eigen::MatrixXcd& a, const BoundaryMesh& bm) {
    const int n = bm.size();
    if (a.rows() != n || a.cols() != n)
        throw DimensionMismatch("admissibility_norm: matrix/mesh size mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bm.laplacian);
    if (es.info() != Eigen::Success)
        throw SolverFailure("admissibility_norm: Laplacian eigendecomposition failed");
    const Eigen::VectorXd scale = (es.eigenvalues().array() + 1.0).sqrt();
    const Eigen::MatrixXd vt = es.eigenvectors().transpose();
    const Eigen::MatrixXcd conj =
        scale.asDiagonal() * (vt * a * es.eigenvectors()) *
        scale.cwiseInverse().asDiagonal();
    return conj.jacobiSvd().singularValues()[0];
}

Eigen::MatrixXcd random_unitary_matrix(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            g(i, j) = {gauss(rng), gauss(rng)};
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, dim);
    // fix the R diagonal phases so the distribution does not favor a sign
    for (int j = 0; j < dim; ++j) {
        const std::complex<double> r = qr.matrixQR()(j, j);
        if (std::abs(r) > 0.0)
            q.col(j) *= r / std::abs(r);
    }
    return q;
}

BoundaryUnitary random_admissible_unitary(int dim, double gap_min, double norm_max,
                                          std::mt19937_64& rng,
                                          double dirichlet_fraction) {
    const double lam_max = std::min(pi - gap_min, 2.0 * std::atan(norm_max));
    if (lam_max <= 0.0)
        throw RangeViolation("random_admissible_unitary: empty admissible phase range");
    std::uniform_real_distribution<double> unif(-lam_max, lam_max);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    Eigen::VectorXcd eigs(dim);
    for (int i = 0; i < dim; ++i) {
        if (coin(rng) < dirichlet_fraction)
            eigs[i] = std::polar(1.0, pi);
        else
            eigs[i] = std::polar(1.0, unif(rng));
    }
    const Eigen::MatrixXcd v = random_unitary_matrix(dim, rng);
    return decompose(v * eigs.asDiagonal() * v.adjoint());
}

} // namespace lapext
