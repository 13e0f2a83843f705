#pragma once

#include "lapext/boundary_unitary.hpp"

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace lapext {

enum class DomainKind { interval, rectangle };

/// Uniform tensor grid on an interval [0, L] or rectangle [0, Lx] x [0, Ly].
/// Nodes are indexed x-fastest: node = j * nx + i. Boundary nodes are listed
/// in a fixed order ("slots"): interval -> {left end, right end}; rectangle ->
/// one counterclockwise cycle starting at (0,0), each side owning its starting
/// corner. Boundary unitaries act on the slot index space.
///
/// metric_distortion delta in [0, 1) installs a piecewise-constant cell
/// density with values in [1 - delta, 1 + delta] that weights both the
/// Dirichlet energy and the mass; delta = 0 keeps the flat metric.
struct Mesh {
    DomainKind kind = DomainKind::interval;
    std::array<double, 2> lengths{0.0, 0.0};
    std::array<int, 2> npts{0, 0};
    double metric_distortion = 0.0;

    std::vector<int> boundary_nodes;      // mesh node per slot
    Eigen::VectorXd boundary_weights;     // boundary quadrature weight per slot
    std::vector<double> boundary_arc;     // arc-length coordinate per slot
    std::vector<std::array<int, 2>> boundary_ij; // (i, j) grid coordinates per slot
    Eigen::VectorXd cell_density;         // one value per cell

    static Mesh interval(double length, int n, double metric_distortion = 0.0);
    static Mesh rectangle(double lx, double ly, int nx, int ny,
                          double metric_distortion = 0.0);

    int dimension() const { return kind == DomainKind::interval ? 1 : 2; }
    int num_nodes() const {
        return kind == DomainKind::interval ? npts[0] : npts[0] * npts[1];
    }
    int num_boundary() const { return static_cast<int>(boundary_nodes.size()); }
    double spacing(int axis) const { return lengths[axis] / (npts[axis] - 1); }
    double max_spacing() const;

    int node_index(int i, int j = 0) const { return j * npts[0] + i; }
    std::array<double, 2> node_position(int node) const;
    bool is_boundary_node(int node) const;

    /// Graph data of the boundary as a standalone mesh: isolated endpoints
    /// for intervals, the closed quadrature cycle for rectangles.
    BoundaryMesh boundary_mesh() const;
};

} // namespace lapext
