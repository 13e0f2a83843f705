#include "lapext/eigensolver.hpp"
#include "lapext/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace lapext {

namespace {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// M-inner-product Gram-Schmidt of the columns of w against themselves,
// producing w * r^{-1} with w^H M w = I. Numerically dead columns are
// replaced by fresh random directions (their r entries stay zero).
void m_orthonormalize(Matrix& w, const SparseCxd& m, Matrix& r,
                      const std::vector<Matrix>& against, std::mt19937_64& rng) {
    const int b = static_cast<int>(w.cols());
    r = Matrix::Zero(b, b);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int j = 0; j < b; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const Matrix& v : against) {
                const Matrix coef = v.adjoint() * (m * w.col(j));
                w.col(j).noalias() -= v * coef;
            }
            for (int i = 0; i < j; ++i) {
                const std::complex<double> c = w.col(i).dot(m * w.col(j));
                if (pass == 0)
                    r(i, j) += c;
                w.col(j) -= c * w.col(i);
            }
        }
        double nrm = std::sqrt(std::abs(w.col(j).dot(m * w.col(j)).real()));
        if (nrm < 1e-13) {
            // invariant subspace exhausted in this direction; restart it
            for (Eigen::Index t = 0; t < w.rows(); ++t)
                w(t, j) = {gauss(rng), gauss(rng)};
            for (const Matrix& v : against)
                w.col(j).noalias() -= v * (v.adjoint() * (m * w.col(j)));
            for (int i = 0; i < j; ++i)
                w.col(j) -= w.col(i).dot(m * w.col(j)) * w.col(i);
            nrm = std::sqrt(std::abs(w.col(j).dot(m * w.col(j)).real()));
            r(j, j) = 0.0;
            w.col(j) /= nrm;
        } else {
            r(j, j) = nrm;
            w.col(j) /= nrm;
        }
    }
}

} // namespace

EigsResult dense_lowest(const Matrix& a, const Matrix& m, int k) {
    const int n = static_cast<int>(a.rows());
    k = std::min(k, n);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(a, m);
    if (ges.info() != Eigen::Success)
        throw SolverFailure("dense_lowest: generalized eigensolver failed");
    EigsResult out;
    out.values = ges.eigenvalues().head(k);
    out.vectors = ges.eigenvectors().leftCols(k);
    out.residuals.resize(k);
    for (int i = 0; i < k; ++i)
        out.residuals[i] =
            (a * out.vectors.col(i) - out.values[i] * (m * out.vectors.col(i))).norm();
    out.converged = true;
    return out;
}

EigsResult lanczos_lowest(const SparseCxd& a, const SparseCxd& m,
                          const EigsOptions& options) {
    const int n = static_cast<int>(a.rows());
    const int k = std::min(options.k, n);
    const int b = std::max(1, std::min(options.block, n));
    const double sigma = options.shift;

    SparseCxd shifted = a - std::complex<double>(sigma, 0.0) * m;
    shifted.makeCompressed();
    Eigen::SparseLU<SparseCxd> lu;
    lu.analyzePattern(shifted);
    lu.factorize(shifted);
    if (lu.info() != Eigen::Success)
        throw SolverFailure("lanczos_lowest: factorization of the shifted pencil failed");

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Matrix> basis;   // M-orthonormal blocks
    std::vector<Matrix> alphas;  // diagonal blocks of the projected operator
    std::vector<Matrix> betas;   // subdiagonal blocks

    Matrix x0(n, b);
    for (int j = 0; j < b; ++j)
        for (int i = 0; i < n; ++i)
            x0(i, j) = {gauss(rng), gauss(rng)};
    Matrix r;
    m_orthonormalize(x0, m, r, {}, rng);
    basis.push_back(x0);

    const int max_blocks = std::min(options.max_blocks, (n + b - 1) / b + 1);
    const int want = std::min(n, k + b); // converge a buffer past the target

    EigsResult out;
    for (int step = 0; step < max_blocks; ++step) {
        const Matrix& xj = basis.back();
        Matrix w = lu.solve(m * xj);
        if (lu.info() != Eigen::Success)
            throw SolverFailure("lanczos_lowest: triangular solve failed");
        if (step > 0)
            w.noalias() -= basis[step - 1] * betas[step - 1].adjoint();
        Matrix alpha = xj.adjoint() * (m * w);
        alpha = 0.5 * (alpha + alpha.adjoint()).eval();
        w.noalias() -= xj * alpha;
        alphas.push_back(alpha);

        Matrix beta;
        m_orthonormalize(w, m, beta, basis, rng);
        betas.push_back(beta);
        basis.push_back(w);

        const int nblk = static_cast<int>(alphas.size());
        const int dim = nblk * b;
        if (dim < want && step + 1 < max_blocks)
            continue;

        // projected operator: block tridiagonal in the M-orthonormal basis
        Matrix t = Matrix::Zero(dim, dim);
        for (int jb = 0; jb < nblk; ++jb) {
            t.block(jb * b, jb * b, b, b) = alphas[jb];
            if (jb + 1 < nblk) {
                t.block((jb + 1) * b, jb * b, b, b) = betas[jb];
                t.block(jb * b, (jb + 1) * b, b, b) = betas[jb].adjoint();
            }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> tes(t);
        if (tes.info() != Eigen::Success)
            throw SolverFailure("lanczos_lowest: projected eigensolve failed");

        // largest theta of (A - sigma M)^{-1} M <-> eigenvalues nearest above sigma
        const int avail = std::min(want, dim);
        std::vector<int> sel(avail);
        for (int i = 0; i < avail; ++i)
            sel[i] = dim - 1 - i; // descending theta
        bool shift_ok = true;
        for (int i = 0; i < std::min(k, avail); ++i)
            if (tes.eigenvalues()[sel[i]] <= 0.0)
                shift_ok = false;
        if (!shift_ok)
            throw SolverFailure("lanczos_lowest: shift is not below the spectrum");

        // cheap residual estimates from the trailing block before forming
        // Ritz vectors
        bool promising = true;
        for (int i = 0; i < std::min(k, avail); ++i) {
            const Eigen::VectorXcd y = tes.eigenvectors().col(sel[i]);
            const double est = (betas.back() * y.tail(b)).norm();
            const double theta = tes.eigenvalues()[sel[i]];
            const double lam = sigma + 1.0 / theta;
            if (est / std::abs(theta) > 0.25 * options.tol * (1.0 + std::abs(lam))) {
                promising = false;
                break;
            }
        }
        if (!promising && step + 1 < max_blocks)
            continue;

        // assemble Ritz pairs and check true residuals of the pencil
        std::vector<std::pair<double, int>> pairs;
        for (int i = 0; i < avail; ++i)
            pairs.push_back({sigma + 1.0 / tes.eigenvalues()[sel[i]], sel[i]});
        std::sort(pairs.begin(), pairs.end(),
                  [](const auto& p, const auto& q) { return p.first < q.first; });

        out.values.resize(k);
        out.vectors.resize(n, k);
        out.residuals.resize(k);
        bool all_ok = true;
        for (int i = 0; i < k; ++i) {
            const auto [lam, col] = pairs[i];
            Vector x = Vector::Zero(n);
            const Eigen::VectorXcd y = tes.eigenvectors().col(col);
            for (int jb = 0; jb < nblk; ++jb)
                x.noalias() += basis[jb] * y.segment(jb * b, b);
            const double mnorm = std::sqrt(std::abs(x.dot(m * x).real()));
            x /= mnorm;
            const double res = (a * x - std::complex<double>(lam, 0.0) * (m * x)).norm();
            out.values[i] = lam;
            out.vectors.col(i) = x;
            out.residuals[i] = res;
            if (res > options.tol * (1.0 + std::abs(lam)) * x.norm())
                all_ok = false;
        }
        out.blocks_used = nblk;
        if (all_ok) {
            out.converged = true;
            return out;
        }
        if (step + 1 >= max_blocks)
            break;
    }
    throw SolverFailure("lanczos_lowest: Krylov budget exhausted before convergence");
}

} // namespace lapext
