#include "lapext/mesh.hpp"
#include "lapext/errors.hpp"

#include <cmath>
#include <numbers>

namespace lapext {

namespace {

void check_distortion(double delta) {
    if (delta < 0.0 || delta >= 1.0)
        throw RangeViolation("metric_distortion must lie in [0, 1)");
}

// Smooth density profile spanning [1 - delta, 1 + delta]; evaluated at cell
// centers so the density is piecewise constant per cell.
double density_1d(double x, double length, double delta) {
    return 1.0 + delta * std::cos(2.0 * std::numbers::pi * x / length);
}

} // namespace

Mesh Mesh::interval(double length, int n, double metric_distortion) {
    if (length <= 0.0)
        throw RangeViolation("interval length must be positive");
    if (n < 3)
        throw DimensionMismatch("interval mesh needs at least 3 nodes");
    check_distortion(metric_distortion);

    Mesh m;
    m.kind = DomainKind::interval;
    m.lengths = {length, 0.0};
    m.npts = {n, 1};
    m.metric_distortion = metric_distortion;

    m.boundary_nodes = {0, n - 1};
    m.boundary_weights = Eigen::VectorXd::Ones(2); // point measure
    m.boundary_arc = {0.0, length};
    m.boundary_ij = {{0, 0}, {n - 1, 0}};

    const double h = m.spacing(0);
    m.cell_density.resize(n - 1);
    for (int i = 0; i < n - 1; ++i)
        m.cell_density[i] = density_1d((i + 0.5) * h, length, metric_distortion);
    return m;
}

Mesh Mesh::rectangle(double lx, double ly, int nx, int ny, double metric_distortion) {
    if (lx <= 0.0 || ly <= 0.0)
        throw RangeViolation("rectangle side lengths must be positive");
    if (nx < 4 || ny < 4)
        throw DimensionMismatch("rectangle mesh needs at least 4 nodes per axis");
    check_distortion(metric_distortion);

    Mesh m;
    m.kind = DomainKind::rectangle;
    m.lengths = {lx, ly};
    m.npts = {nx, ny};
    m.metric_distortion = metric_distortion;

    const double hx = m.spacing(0);
    const double hy = m.spacing(1);

    // counterclockwise boundary cycle; each side owns its starting corner
    auto push = [&](int i, int j, double arc) {
        m.boundary_nodes.push_back(m.node_index(i, j));
        m.boundary_ij.push_back({i, j});
        m.boundary_arc.push_back(arc);
    };
    double arc = 0.0;
    for (int i = 0; i <= nx - 2; ++i, arc += hx)
        push(i, 0, arc);
    for (int j = 0; j <= ny - 2; ++j, arc += hy)
        push(nx - 1, j, arc);
    for (int i = nx - 1; i >= 1; --i, arc += hx)
        push(i, ny - 1, arc);
    for (int j = ny - 1; j >= 1; --j, arc += hy)
        push(0, j, arc);

    const int nb = static_cast<int>(m.boundary_nodes.size());
    const double total = 2.0 * (lx + ly);
    m.boundary_weights.resize(nb);
    for (int s = 0; s < nb; ++s) {
        const double seg_next =
            (s + 1 < nb ? m.boundary_arc[s + 1] : total) - m.boundary_arc[s];
        const double seg_prev =
            s > 0 ? m.boundary_arc[s] - m.boundary_arc[s - 1]
                  : total - m.boundary_arc[nb - 1];
        m.boundary_weights[s] = 0.5 * (seg_prev + seg_next);
    }

    m.cell_density.resize((nx - 1) * (ny - 1));
    for (int cj = 0; cj < ny - 1; ++cj)
        for (int ci = 0; ci < nx - 1; ++ci)
            m.cell_density[cj * (nx - 1) + ci] =
                1.0 + metric_distortion *
                          std::cos(2.0 * std::numbers::pi * (ci + 0.5) * hx / lx) *
                          std::cos(2.0 * std::numbers::pi * (cj + 0.5) * hy / ly);
    return m;
}

double Mesh::max_spacing() const {
    return kind == DomainKind::interval ? spacing(0)
                                        : std::max(spacing(0), spacing(1));
}

std::array<double, 2> Mesh::node_position(int node) const {
    if (kind == DomainKind::interval)
        return {node * spacing(0), 0.0};
    const int i = node % npts[0];
    const int j = node / npts[0];
    return {i * spacing(0), j * spacing(1)};
}

bool Mesh::is_boundary_node(int node) const {
    if (kind == DomainKind::interval)
        return node == 0 || node == npts[0] - 1;
    const int i = node % npts[0];
    const int j = node / npts[0];
    return i == 0 || i == npts[0] - 1 || j == 0 || j == npts[1] - 1;
}

BoundaryMesh Mesh::boundary_mesh() const {
    if (kind == DomainKind::interval)
        return BoundaryMesh::isolated(2);
    const int nb = num_boundary();
    Eigen::VectorXd segments(nb);
    const double total = 2.0 * (lengths[0] + lengths[1]);
    for (int s = 0; s < nb; ++s) {
        const double a0 = boundary_arc[s];
        const double a1 = s + 1 < nb ? boundary_arc[s + 1] : total;
        segments[s] = a1 - a0;
    }
    return BoundaryMesh::cycle(segments);
}

} // namespace lapext
