#include "lapext/form_assembly.hpp"

#include "lapext/errors.hpp"
#include "lapext/json_io.hpp"
#include "lapext/robin_1d.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace lapext {

namespace {

using Triplet = Eigen::Triplet<std::complex<double>>;

// Average density of the cells adjacent to an x-link (i -> i+1) in row j.
double x_link_density(const Mesh& mesh, int i, int j) {
    const int ncx = mesh.npts[0] - 1;
    double sum = 0.0;
    int cnt = 0;
    if (j - 1 >= 0 && j - 1 <= mesh.npts[1] - 2) {
        sum += mesh.cell_density[(j - 1) * ncx + i];
        ++cnt;
    }
    if (j <= mesh.npts[1] - 2) {
        sum += mesh.cell_density[j * ncx + i];
        ++cnt;
    }
    return sum / cnt;
}

double y_link_density(const Mesh& mesh, int i, int j) {
    const int ncx = mesh.npts[0] - 1;
    double sum = 0.0;
    int cnt = 0;
    if (i - 1 >= 0) {
        sum += mesh.cell_density[j * ncx + i - 1];
        ++cnt;
    }
    if (i <= mesh.npts[0] - 2) {
        sum += mesh.cell_density[j * ncx + i];
        ++cnt;
    }
    return sum / cnt;
}

// Average density of the cells touching a node.
double node_density(const Mesh& mesh, int i, int j) {
    if (mesh.kind == DomainKind::interval) {
        double sum = 0.0;
        int cnt = 0;
        if (i - 1 >= 0) {
            sum += mesh.cell_density[i - 1];
            ++cnt;
        }
        if (i <= mesh.npts[0] - 2) {
            sum += mesh.cell_density[i];
            ++cnt;
        }
        return sum / cnt;
    }
    const int ncx = mesh.npts[0] - 1;
    double sum = 0.0;
    int cnt = 0;
    for (int cj = j - 1; cj <= j; ++cj) {
        if (cj < 0 || cj > mesh.npts[1] - 2)
            continue;
        for (int ci = i - 1; ci <= i; ++ci) {
            if (ci < 0 || ci > mesh.npts[0] - 2)
                continue;
            sum += mesh.cell_density[cj * ncx + ci];
            ++cnt;
        }
    }
    return sum / cnt;
}

void assemble_grid(const Mesh& mesh, SparseCxd& k, Eigen::VectorXd& m) {
    const int n = mesh.num_nodes();
    std::vector<Triplet> trips;
    m = Eigen::VectorXd::Zero(n);

    if (mesh.kind == DomainKind::interval) {
        const double h = mesh.spacing(0);
        const int nx = mesh.npts[0];
        trips.reserve(4 * (nx - 1));
        for (int i = 0; i + 1 < nx; ++i) {
            const double w = mesh.cell_density[i] / h;
            trips.emplace_back(i, i, w);
            trips.emplace_back(i + 1, i + 1, w);
            trips.emplace_back(i, i + 1, -w);
            trips.emplace_back(i + 1, i, -w);
        }
        for (int i = 0; i < nx; ++i) {
            const double t = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
            m[i] = node_density(mesh, i, 0) * h * t;
        }
    } else {
        const int nx = mesh.npts[0];
        const int ny = mesh.npts[1];
        const double hx = mesh.spacing(0);
        const double hy = mesh.spacing(1);
        trips.reserve(8 * n);
        for (int j = 0; j < ny; ++j) {
            const double tj = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
            for (int i = 0; i + 1 < nx; ++i) {
                const double w = x_link_density(mesh, i, j) * tj * hy / hx;
                const int a = mesh.node_index(i, j);
                const int b = mesh.node_index(i + 1, j);
                trips.emplace_back(a, a, w);
                trips.emplace_back(b, b, w);
                trips.emplace_back(a, b, -w);
                trips.emplace_back(b, a, -w);
            }
        }
        for (int i = 0; i < nx; ++i) {
            const double ti = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
            for (int j = 0; j + 1 < ny; ++j) {
                const double w = y_link_density(mesh, i, j) * ti * hx / hy;
                const int a = mesh.node_index(i, j);
                const int b = mesh.node_index(i, j + 1);
                trips.emplace_back(a, a, w);
                trips.emplace_back(b, b, w);
                trips.emplace_back(a, b, -w);
                trips.emplace_back(b, a, -w);
            }
        }
        for (int j = 0; j < ny; ++j) {
            const double tj = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
            for (int i = 0; i < nx; ++i) {
                const double ti = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
                m[mesh.node_index(i, j)] = node_density(mesh, i, j) * hx * hy * ti * tj;
            }
        }
    }
    k.resize(n, n);
    k.setFromTriplets(trips.begin(), trips.end());
    k.makeCompressed();
}

// Ranges of the boundary slot cycle per rectangle side, in mesh slot order.
struct SideRanges {
    int bottom_begin, right_begin, top_begin, left_begin, end;
};

SideRanges side_ranges(const Mesh& mesh) {
    const int nx = mesh.npts[0];
    const int ny = mesh.npts[1];
    SideRanges r;
    r.bottom_begin = 0;
    r.right_begin = nx - 1;
    r.top_begin = nx - 1 + ny - 1;
    r.left_begin = 2 * (nx - 1) + ny - 1;
    r.end = 2 * (nx - 1) + 2 * (ny - 1);
    return r;
}

} // namespace

QuadraticFormSystem assemble(const Mesh& mesh, const BoundaryUnitary& unitary,
                             const AssembleOptions& options) {
    const int n_b = mesh.num_boundary();
    if (unitary.dim() != n_b)
        throw DimensionMismatch("assemble: boundary unitary acts on " +
                                std::to_string(unitary.dim()) + " slots, mesh has " +
                                std::to_string(n_b));

    QuadraticFormSystem sys;
    sys.mesh = mesh;
    sys.unitary = unitary;
    sys.gap = gap_report(unitary, options.gap_min);
    if (!sys.gap.passes)
        throw NoGap("assemble: eigenphase gap at -1 is below the threshold");
    sys.cayley = partial_cayley(unitary, options.gap_min);
    sys.fingerprint = matrix_fingerprint(unitary.matrix);

    assemble_grid(mesh, sys.stiffness, sys.mass);
    const int n = mesh.num_nodes();

    // boundary term B = -W^{1/2} A W^{1/2} placed on the boundary nodes
    Eigen::VectorXd wsq(n_b);
    for (int s = 0; s < n_b; ++s)
        wsq[s] = std::sqrt(mesh.boundary_weights[s]);
    Eigen::MatrixXcd bb = -(wsq.asDiagonal() * sys.cayley.matrix * wsq.asDiagonal());
    std::vector<Triplet> btrips;
    btrips.reserve(static_cast<size_t>(n_b) * n_b);
    for (int s = 0; s < n_b; ++s)
        for (int t = 0; t < n_b; ++t)
            if (bb(s, t) != std::complex<double>(0.0, 0.0))
                btrips.emplace_back(mesh.boundary_nodes[s], mesh.boundary_nodes[t],
                                    bb(s, t));
    sys.boundary_term.resize(n, n);
    sys.boundary_term.setFromTriplets(btrips.begin(), btrips.end());
    sys.form = sys.stiffness + sys.boundary_term;
    sys.form.makeCompressed();

    // constraint: (I - P) W^{1/2} x_b = 0; its kernel is spanned by the
    // right singular vectors of G with vanishing singular value
    Eigen::MatrixXcd g =
        (Eigen::MatrixXcd::Identity(n_b, n_b) - sys.cayley.projector) *
        wsq.asDiagonal().toDenseMatrix().cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g, Eigen::ComputeThinV);
    const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    const double cutoff = options.constraint_tol * std::max(smax, 1e-300);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > cutoff)
            ++rank;
    sys.num_constraints = rank;
    const int r_null = n_b - rank;

    std::vector<int> interior;
    interior.reserve(n - n_b);
    {
        std::vector<char> is_b(n, 0);
        for (int node : mesh.boundary_nodes)
            is_b[node] = 1;
        for (int i = 0; i < n; ++i)
            if (!is_b[i])
                interior.push_back(i);
    }
    const int n_red = static_cast<int>(interior.size()) + r_null;
    std::vector<Triplet> ctrips;
    ctrips.reserve(interior.size() + static_cast<size_t>(n_b) * r_null);
    for (int c = 0; c < static_cast<int>(interior.size()); ++c)
        ctrips.emplace_back(interior[c], c, 1.0);
    for (int q = 0; q < r_null; ++q) {
        const Eigen::VectorXcd col = svd.matrixV().col(n_b - 1 - q);
        for (int s = 0; s < n_b; ++s)
            if (std::abs(col[s]) > 0.0)
                ctrips.emplace_back(mesh.boundary_nodes[s],
                                    static_cast<int>(interior.size()) + q, col[s]);
    }
    sys.constraint_basis.resize(n, n_red);
    sys.constraint_basis.setFromTriplets(ctrips.begin(), ctrips.end());
    sys.constraint_basis.makeCompressed();

    SparseCxd mdiag(n, n);
    {
        std::vector<Triplet> mt;
        mt.reserve(n);
        for (int i = 0; i < n; ++i)
            mt.emplace_back(i, i, sys.mass[i]);
        mdiag.setFromTriplets(mt.begin(), mt.end());
    }
    const SparseCxd ct = sys.constraint_basis.adjoint();
    sys.reduced_form = ct * sys.form * sys.constraint_basis;
    sys.reduced_form.makeCompressed();
    sys.reduced_mass = ct * mdiag * sys.constraint_basis;
    sys.reduced_mass.makeCompressed();
    return sys;
}

QuadraticFormSystem assemble(const Mesh& mesh, const Eigen::MatrixXcd& unitary,
                             const AssembleOptions& options) {
    return assemble(mesh, decompose(unitary, options.unitarity_tol, options.snap_tol),
                    options);
}

double spectral_lower_bound(const QuadraticFormSystem& system, BoundReport* detail) {
    const double delta = system.mesh.metric_distortion;
    const double c_eff = system.cayley.norm / (1.0 - delta);
    double sum = 0.0;
    std::vector<double> collars, axis_bounds;
    for (int axis = 0; axis < system.mesh.dimension(); ++axis) {
        const double collar = system.mesh.lengths[axis] / 2.0;
        const double lb = lower_bound(c_eff, collar);
        collars.push_back(collar);
        axis_bounds.push_back(lb);
        sum += lb;
    }
    const double bound = sum * (1.0 - delta) / (1.0 + delta);
    if (detail) {
        detail->bound = bound;
        detail->c_eff = c_eff;
        detail->collar_lengths = collars;
        detail->axis_bounds = axis_bounds;
    }
    return bound;
}

BoundReport verify_lower_bound(const QuadraticFormSystem& system,
                               const Eigen::VectorXd& values) {
    BoundReport report;
    spectral_lower_bound(system, &report);
    const double h = system.mesh.max_spacing();
    report.slack = 10.0 * h * h * std::abs(report.bound) + 1e-10;
    report.min_value = values.size() ? values.minCoeff() : 0.0;
    report.passes = values.size() == 0 || report.min_value >= report.bound - report.slack;
    return report;
}

Spectrum solve(const QuadraticFormSystem& system, const SolveOptions& options) {
    Spectrum spec;
    const int n_red = system.reduced_dim();
    const int k = std::min(options.k, n_red);
    spec.reduced_dim = n_red;

    Eigen::MatrixXcd y;
    if (n_red <= options.dense_cutoff) {
        const Eigen::MatrixXcd ad(system.reduced_form);
        const Eigen::MatrixXcd md(system.reduced_mass);
        EigsResult res = dense_lowest(ad, md, k);
        spec.values = res.values;
        spec.residuals = res.residuals;
        y = res.vectors;
        spec.used_dense = true;
    } else {
        EigsOptions eo;
        eo.k = k;
        eo.tol = options.lanczos_tol;
        eo.block = options.block;
        eo.max_blocks = options.max_blocks;
        eo.seed = options.seed;
        double shift = options.shift;
        if (std::isnan(shift))
            shift = spectral_lower_bound(system) * 1.05 - 1.0;
        EigsResult res;
        for (int attempt = 0;; ++attempt) {
            eo.shift = shift;
            try {
                res = lanczos_lowest(system.reduced_form, system.reduced_mass, eo);
                break;
            } catch (const SolverFailure&) {
                if (attempt >= 2)
                    throw;
                shift = 2.0 * shift - 1.0;
            }
        }
        spec.values = res.values;
        spec.residuals = res.residuals;
        spec.blocks_used = res.blocks_used;
        y = res.vectors;
    }
    spec.vectors = system.constraint_basis * y;
    return spec;
}

ConsistencyReport extension_consistency(const QuadraticFormSystem& system,
                                        const Spectrum& spectrum, double tol) {
    ConsistencyReport report;
    report.tolerance = tol;
    const int n = system.num_nodes();
    std::vector<char> is_b(n, 0);
    for (int node : system.mesh.boundary_nodes)
        is_b[node] = 1;

    const int k = static_cast<int>(spectrum.values.size());
    for (int p = 0; p < k; ++p) {
        const Eigen::VectorXcd& x = spectrum.vectors.col(p);
        const double lam = spectrum.values[p];
        const double scale = (1.0 + std::abs(lam)) * x.norm();
        Eigen::VectorXcd rc = system.form * x;
        for (int i = 0; i < n; ++i)
            rc[i] -= lam * system.mass[i] * x[i];
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            if (!is_b[i])
                worst = std::max(worst, std::abs(rc[i]) / system.mass[i]);
        report.interior_defect = std::max(report.interior_defect, worst / scale);
        report.residual_defect =
            std::max(report.residual_defect, spectrum.residuals[p] / (1.0 + std::abs(lam)));
    }
    report.passes = report.interior_defect <= tol && report.residual_defect <= tol;
    return report;
}

double hermiticity_defect(const SparseCxd& matrix) {
    const SparseCxd diff = SparseCxd(matrix.adjoint()) - matrix;
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseCxd::InnerIterator it(diff, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

SparseCxd row_replacement_form(const QuadraticFormSystem& system) {
    Eigen::MatrixXcd dense(system.form);
    for (int node : system.mesh.boundary_nodes) {
        dense.row(node).setZero();
        dense(node, node) = 1.0;
    }
    return dense.sparseView();
}

BoundaryPair boundary_trace(const Mesh& mesh, const Eigen::VectorXcd& state) {
    const int n_b = mesh.num_boundary();
    BoundaryPair pair;
    pair.value.resize(n_b);
    pair.derivative.resize(n_b);

    auto one_sided = [&](int n0, int n1, int n2, double h) {
        // outward derivative: the stencil walks inward, so negate the
        // forward-difference formula
        return (3.0 * state[n0] - 4.0 * state[n1] + state[n2]) / (2.0 * h);
    };

    if (mesh.kind == DomainKind::interval) {
        const double h = mesh.spacing(0);
        const int nx = mesh.npts[0];
        pair.value[0] = state[0];
        pair.value[1] = state[nx - 1];
        pair.derivative[0] = one_sided(0, 1, 2, h);
        pair.derivative[1] = one_sided(nx - 1, nx - 2, nx - 3, h);
    } else {
        const SideRanges r = side_ranges(mesh);
        const double hx = mesh.spacing(0);
        const double hy = mesh.spacing(1);
        for (int s = 0; s < n_b; ++s) {
            const int i = mesh.boundary_ij[s][0];
            const int j = mesh.boundary_ij[s][1];
            pair.value[s] = state[mesh.boundary_nodes[s]];
            if (s < r.right_begin) { // bottom, outward -y
                pair.derivative[s] = one_sided(mesh.node_index(i, 0),
                                               mesh.node_index(i, 1),
                                               mesh.node_index(i, 2), hy);
            } else if (s < r.top_begin) { // right, outward +x
                pair.derivative[s] = one_sided(mesh.node_index(mesh.npts[0] - 1, j),
                                               mesh.node_index(mesh.npts[0] - 2, j),
                                               mesh.node_index(mesh.npts[0] - 3, j), hx);
            } else if (s < r.left_begin) { // top, outward +y
                pair.derivative[s] = one_sided(mesh.node_index(i, mesh.npts[1] - 1),
                                               mesh.node_index(i, mesh.npts[1] - 2),
                                               mesh.node_index(i, mesh.npts[1] - 3), hy);
            } else { // left, outward -x
                pair.derivative[s] = one_sided(mesh.node_index(0, j),
                                               mesh.node_index(1, j),
                                               mesh.node_index(2, j), hx);
            }
        }
    }
    for (int s = 0; s < n_b; ++s) {
        const double ws = std::sqrt(mesh.boundary_weights[s]);
        pair.value[s] *= ws;
        pair.derivative[s] *= ws;
    }
    return pair;
}

} // namespace lapext
