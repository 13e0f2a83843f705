#pragma once

#include "lapext/boundary_unitary.hpp"
#include "lapext/mesh.hpp"

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lapext {

/// Partition of the boundary slots into named elements (interval: left /
/// right endpoints; rectangle: bottom / right / top / left sides). Slot
/// lists are sorted by the coordinate running along the element. Corners
/// belong to exactly one element, chosen by descending claim priority with
/// ties going to the side that begins at the corner in the counterclockwise
/// traversal.
struct Triangulation {
    int num_slots = 0;
    std::vector<std::string> order;                   // element names, ccw
    std::map<std::string, std::vector<int>> elements; // owned slots
    // Per-slot split of the quadrature weight by adjacent element; the parts
    // sum to the mesh boundary weight of the slot. Non-corner slots carry a
    // single entry.
    std::map<int, std::vector<std::pair<std::string, double>>> contributions;

    /// Element owning a slot.
    const std::string& owner(int slot) const;
};

/// priorities: element name -> claim strength for corner ownership
/// (identified edges 3, Dirichlet 2, Robin 1, Neumann 0 by convention).
Triangulation default_triangulation(const Mesh& mesh,
                                    const std::map<std::string, int>& priorities = {});

/// Pairing of two boundary elements slot-by-slot along their coordinate.
/// In weight-normalized trace coordinates the pairing map is exactly the
/// identity permutation, hence exactly unitary; the implied pointwise glue
/// scale on raw traces is sqrt(w_first / w_second).
struct EdgeIdentification {
    std::string first, second;
    std::vector<int> slots_first, slots_second;
};

/// Throws IncompatibleElements when the elements differ in slot count.
EdgeIdentification identify(const Triangulation& tri, const std::string& first,
                            const std::string& second);

/// Full boundary unitary realizing the glue second = e^{i phase} * first on
/// weighted traces (per-pair phases), identity (Neumann) on uninvolved
/// slots. Eigenphases are exactly {0, pi} on the identified block.
Eigen::MatrixXcd identification_matrix(const Triangulation& tri,
                                       const EdgeIdentification& id,
                                       const Eigen::VectorXd& alphas);
Eigen::MatrixXcd identification_matrix(const Triangulation& tri,
                                       const EdgeIdentification& id, double alpha);

/// Per-edge boundary condition for mixed assemblies.
struct EdgeBc {
    std::string kind;   // "dirichlet" | "neumann" | "robin" | "robin_beta"
    double value = 0.0; // Robin coefficient c, or the eigenphase beta directly
};

/// Diagonal boundary unitary realizing per-edge conditions: Dirichlet -> -1,
/// Neumann -> +1, Robin c -> exp(i beta) with beta = -2 atan(c). At corners
/// owned by a Robin edge the coefficient is rescaled by the owned share of
/// the quadrature weight so the boundary term reproduces the per-edge
/// trapezoid rule exactly. Throws RangeViolation when a requested beta leaves
/// (-pi + gap, pi - gap).
BoundaryUnitary mixed_unitary(const Mesh& mesh, const std::map<std::string, EdgeBc>& bcs);

/// Identification preset on the axis (0 = x, 1 = y) with twist alpha;
/// remaining sides are Neumann. Intervals ignore the axis.
BoundaryUnitary identification_unitary(const Mesh& mesh, int axis, double alpha);

/// Parsed "name:key=value,..." or "name(key=value,...)" preset text.
struct PresetSpec {
    std::string name;
    std::map<std::string, std::string> params;
};

PresetSpec parse_preset(const std::string& text);

/// Named boundary unitaries: dirichlet, neumann, robin (c= or beta=),
/// periodic (axis=), quasiperiodic (alpha=, axis=), zaremba (dirichlet=side).
/// Throws ConfigError for unknown names or parameters.
BoundaryUnitary preset_unitary(const Mesh& mesh, const std::string& preset);

/// Isometry defect of the parametrization-Jacobian identification map
/// between a warped segment x = theta + amplitude * sin(pi theta) and a
/// uniform segment, at the given node count. The defect of the weighted map
/// decays at second order in the spacing; the discrete-weight map is exactly
/// unitary by construction.
double jacobian_pairing_defect(int nodes, double amplitude);

struct DefectStudy {
    std::vector<int> nodes;
    std::vector<double> spacings;
    std::vector<double> defects;
    std::vector<double> orders; // log2(defect ratio) per refinement step
};

DefectStudy isometry_defect_study(const std::vector<int>& node_counts,
                                  double amplitude);

} // namespace lapext
