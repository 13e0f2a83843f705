#include "lapext/gallery.hpp"

#include "lapext/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>

namespace lapext {

namespace {

constexpr std::complex<double> ci(0.0, 1.0);

int side_priority(const std::map<std::string, int>& priorities, const std::string& name) {
    auto it = priorities.find(name);
    return it == priorities.end() ? 0 : it->second;
}

double parse_number(const std::string& key, const std::string& text) {
    try {
        size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size())
            throw ConfigError("preset parameter " + key + " has trailing junk: " + text);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("preset parameter " + key + " is not a number: " + text);
    }
}

} // namespace

const std::string& Triangulation::owner(int slot) const {
    for (const auto& [name, slots] : elements)
        if (std::find(slots.begin(), slots.end(), slot) != slots.end())
            return name;
    throw ConfigError("triangulation: slot " + std::to_string(slot) +
                      " belongs to no element");
}

Triangulation default_triangulation(const Mesh& mesh,
                                    const std::map<std::string, int>& priorities) {
    Triangulation tri;
    tri.num_slots = mesh.num_boundary();

    if (mesh.kind == DomainKind::interval) {
        tri.order = {"left", "right"};
        tri.elements["left"] = {0};
        tri.elements["right"] = {1};
        tri.contributions[0] = {{"left", mesh.boundary_weights[0]}};
        tri.contributions[1] = {{"right", mesh.boundary_weights[1]}};
        return tri;
    }

    const int nx = mesh.npts[0];
    const int ny = mesh.npts[1];
    const double hx = mesh.spacing(0);
    const double hy = mesh.spacing(1);
    tri.order = {"bottom", "right", "top", "left"};

    // slot index of each corner in the mesh cycle (each side starts at one)
    const int c00 = 0;                       // (0, 0), bottom start
    const int c10 = nx - 1;                  // (nx-1, 0), right start
    const int c11 = nx - 1 + ny - 1;         // (nx-1, ny-1), top start
    const int c01 = 2 * (nx - 1) + ny - 1;   // (0, ny-1), left start

    // corner -> (side starting here, side ending here, start half-seg, end half-seg)
    struct Corner {
        int slot;
        std::string starts, ends;
        double w_start, w_end;
    };
    const std::vector<Corner> corners = {
        {c00, "bottom", "left", hx / 2.0, hy / 2.0},
        {c10, "right", "bottom", hy / 2.0, hx / 2.0},
        {c11, "top", "right", hx / 2.0, hy / 2.0},
        {c01, "left", "top", hy / 2.0, hx / 2.0},
    };

    std::map<std::string, std::vector<int>> owned;
    for (const Corner& c : corners) {
        const int ps = side_priority(priorities, c.starts);
        const int pe = side_priority(priorities, c.ends);
        owned[pe > ps ? c.ends : c.starts].push_back(c.slot);
        tri.contributions[c.slot] = {{c.starts, c.w_start}, {c.ends, c.w_end}};
    }
    for (int s = c00 + 1; s < c10; ++s) {
        owned["bottom"].push_back(s);
        tri.contributions[s] = {{"bottom", mesh.boundary_weights[s]}};
    }
    for (int s = c10 + 1; s < c11; ++s) {
        owned["right"].push_back(s);
        tri.contributions[s] = {{"right", mesh.boundary_weights[s]}};
    }
    for (int s = c11 + 1; s < c01; ++s) {
        owned["top"].push_back(s);
        tri.contributions[s] = {{"top", mesh.boundary_weights[s]}};
    }
    for (int s = c01 + 1; s < tri.num_slots; ++s) {
        owned["left"].push_back(s);
        tri.contributions[s] = {{"left", mesh.boundary_weights[s]}};
    }

    // order each element by the coordinate running along it
    for (auto& [name, slots] : owned) {
        const int axis = (name == "bottom" || name == "top") ? 0 : 1;
        std::sort(slots.begin(), slots.end(), [&](int a, int b) {
            return mesh.boundary_ij[a][axis] < mesh.boundary_ij[b][axis];
        });
    }
    tri.elements = std::move(owned);
    for (const std::string& name : tri.order)
        tri.elements.try_emplace(name);
    return tri;
}

EdgeIdentification identify(const Triangulation& tri, const std::string& first,
                            const std::string& second) {
    auto a = tri.elements.find(first);
    auto b = tri.elements.find(second);
    if (a == tri.elements.end() || b == tri.elements.end())
        throw ConfigError("identify: unknown element name");
    if (a->second.size() != b->second.size())
        throw IncompatibleElements("identify: " + first + " has " +
                                   std::to_string(a->second.size()) + " slots, " + second +
                                   " has " + std::to_string(b->second.size()));
    EdgeIdentification id;
    id.first = first;
    id.second = second;
    id.slots_first = a->second;
    id.slots_second = b->second;
    return id;
}

Eigen::MatrixXcd identification_matrix(const Triangulation& tri,
                                       const EdgeIdentification& id,
                                       const Eigen::VectorXd& alphas) {
    const int m = static_cast<int>(id.slots_first.size());
    if (alphas.size() != m)
        throw DimensionMismatch("identification_matrix: one twist per slot pair required");
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(tri.num_slots, tri.num_slots);
    for (int p = 0; p < m; ++p) {
        const int a = id.slots_first[p];
        const int b = id.slots_second[p];
        const std::complex<double> e = std::exp(ci * alphas[p]);
        u(a, a) = 0.0;
        u(b, b) = 0.0;
        u(a, b) = std::conj(e);
        u(b, a) = e;
    }
    return u;
}

Eigen::MatrixXcd identification_matrix(const Triangulation& tri,
                                       const EdgeIdentification& id, double alpha) {
    return identification_matrix(
        tri, id,
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(id.slots_first.size()), alpha));
}

BoundaryUnitary mixed_unitary(const Mesh& mesh, const std::map<std::string, EdgeBc>& bcs) {
    const std::vector<std::string> valid =
        mesh.kind == DomainKind::interval
            ? std::vector<std::string>{"left", "right"}
            : std::vector<std::string>{"bottom", "right", "top", "left"};
    std::map<std::string, int> priorities;
    for (const auto& [edge, bc] : bcs) {
        if (std::find(valid.begin(), valid.end(), edge) == valid.end())
            throw ConfigError("mixed_unitary: unknown edge " + edge);
        if (bc.kind == "dirichlet")
            priorities[edge] = 2;
        else if (bc.kind == "robin" || bc.kind == "robin_beta")
            priorities[edge] = 1;
        else if (bc.kind == "neumann")
            priorities[edge] = 0;
        else
            throw ConfigError("mixed_unitary: unknown condition " + bc.kind);
    }

    const Triangulation tri = default_triangulation(mesh, priorities);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(tri.num_slots, tri.num_slots);
    auto bc_of = [&](const std::string& edge) -> const EdgeBc* {
        auto it = bcs.find(edge);
        return it == bcs.end() ? nullptr : &it->second;
    };

    for (const std::string& edge : tri.order) {
        const EdgeBc* bc = bc_of(edge);
        if (!bc || bc->kind == "neumann")
            continue;
        for (int s : tri.elements.at(edge)) {
            if (bc->kind == "dirichlet") {
                u(s, s) = -1.0;
            } else if (bc->kind == "robin_beta") {
                if (std::abs(bc->value) > M_PI - default_gap_min)
                    throw RangeViolation("mixed_unitary: beta leaves the admissible arc");
                u(s, s) = std::exp(ci * bc->value);
            } else {
                // Robin coefficient averaged over the shares of the slot
                // weight held by adjacent Robin edges; interior edge slots
                // reduce to the plain coefficient.
                double num = 0.0;
                for (const auto& [neighbor, part] : tri.contributions.at(s)) {
                    const EdgeBc* nbc = bc_of(neighbor);
                    if (nbc && nbc->kind == "robin")
                        num += nbc->value * part;
                }
                const double c_eff = num / mesh.boundary_weights[s];
                u(s, s) = std::exp(ci * (-2.0 * std::atan(c_eff)));
            }
        }
    }
    return decompose(u);
}

BoundaryUnitary identification_unitary(const Mesh& mesh, int axis, double alpha) {
    if (mesh.kind == DomainKind::interval) {
        Eigen::MatrixXcd u(2, 2);
        const std::complex<double> e = std::exp(ci * alpha);
        u << 0.0, std::conj(e), e, 0.0;
        return decompose(u);
    }
    if (axis != 0 && axis != 1)
        throw ConfigError("identification_unitary: axis must be 0 or 1");
    const std::string first = axis == 0 ? "left" : "bottom";
    const std::string second = axis == 0 ? "right" : "top";
    const Triangulation tri =
        default_triangulation(mesh, {{first, 3}, {second, 3}});
    const EdgeIdentification id = identify(tri, first, second);
    return decompose(identification_matrix(tri, id, alpha));
}

PresetSpec parse_preset(const std::string& text) {
    PresetSpec spec;
    std::string body;
    const auto paren = text.find('(');
    const auto colon = text.find(':');
    if (paren != std::string::npos && (colon == std::string::npos || paren < colon)) {
        if (text.back() != ')')
            throw ConfigError("preset: missing closing parenthesis in " + text);
        spec.name = text.substr(0, paren);
        body = text.substr(paren + 1, text.size() - paren - 2);
    } else if (colon != std::string::npos) {
        spec.name = text.substr(0, colon);
        body = text.substr(colon + 1);
    } else {
        spec.name = text;
    }
    auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    spec.name = strip(spec.name);
    if (spec.name.empty())
        throw ConfigError("preset: empty name in " + text);
    std::transform(spec.name.begin(), spec.name.end(), spec.name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (item.empty())
            continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("preset: expected key=value, got " + item);
        const std::string key = strip(item.substr(0, eq));
        const std::string value = strip(item.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("preset: expected key=value, got " + item);
        spec.params[key] = value;
    }
    return spec;
}

BoundaryUnitary preset_unitary(const Mesh& mesh, const std::string& preset) {
    PresetSpec spec = parse_preset(preset);
    const int n_b = mesh.num_boundary();

    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = spec.params.find(key);
        if (it == spec.params.end())
            return std::nullopt;
        std::string v = it->second;
        spec.params.erase(it);
        return v;
    };
    auto finish = [&]() {
        if (!spec.params.empty())
            throw ConfigError("preset " + spec.name + ": unknown parameter " +
                              spec.params.begin()->first);
    };
    auto axis_of = [&](const std::string& v) {
        if (v == "x" || v == "0")
            return 0;
        if (v == "y" || v == "1")
            return 1;
        throw ConfigError("preset " + spec.name + ": axis must be x or y");
    };
    const std::vector<std::string> sides =
        mesh.kind == DomainKind::interval
            ? std::vector<std::string>{"left", "right"}
            : std::vector<std::string>{"bottom", "right", "top", "left"};

    if (spec.name == "dirichlet") {
        finish();
        return decompose(-Eigen::MatrixXcd::Identity(n_b, n_b));
    }
    if (spec.name == "neumann") {
        finish();
        return decompose(Eigen::MatrixXcd::Identity(n_b, n_b));
    }
    if (spec.name == "robin") {
        const auto c = take("c");
        const auto beta = take("beta");
        finish();
        if (c.has_value() == beta.has_value())
            throw ConfigError("preset robin: give exactly one of c=, beta=");
        std::map<std::string, EdgeBc> bcs;
        for (const std::string& side : sides)
            bcs[side] = c ? EdgeBc{"robin", parse_number("c", *c)}
                          : EdgeBc{"robin_beta", parse_number("beta", *beta)};
        return mixed_unitary(mesh, bcs);
    }
    if (spec.name == "periodic" || spec.name == "quasiperiodic") {
        double alpha = 0.0;
        if (spec.name == "quasiperiodic") {
            const auto a = take("alpha");
            if (!a)
                throw ConfigError("preset quasiperiodic: alpha= is required");
            alpha = parse_number("alpha", *a);
        }
        const auto axis = take("axis");
        finish();
        return identification_unitary(mesh, axis ? axis_of(*axis) : 0, alpha);
    }
    if (spec.name == "zaremba") {
        const auto side = take("dirichlet");
        finish();
        const std::string chosen = side.value_or("left");
        if (std::find(sides.begin(), sides.end(), chosen) == sides.end())
            throw ConfigError("preset zaremba: unknown side " + chosen);
        std::map<std::string, EdgeBc> bcs;
        for (const std::string& s : sides)
            bcs[s] = EdgeBc{s == chosen ? "dirichlet" : "neumann", 0.0};
        return mixed_unitary(mesh, bcs);
    }
    throw ConfigError("unknown preset " + spec.name);
}

double jacobian_pairing_defect(int nodes, double amplitude) {
    if (nodes < 3)
        throw ConfigError("jacobian_pairing_defect: need at least 3 nodes");
    const int n = nodes;
    const double h = 1.0 / (n - 1);
    Eigen::VectorXd x(n), wa(n), wb(n), jac(n);
    for (int i = 0; i < n; ++i) {
        const double theta = i * h;
        x[i] = theta + amplitude * std::sin(M_PI * theta);
        jac[i] = 1.0 + amplitude * M_PI * std::cos(M_PI * theta);
        wb[i] = (i == 0 || i == n - 1) ? h / 2.0 : h;
    }
    for (int i = 0; i < n; ++i) {
        const double lo = i == 0 ? x[0] : x[i - 1];
        const double hi = i == n - 1 ? x[n - 1] : x[i + 1];
        wa[i] = (hi - lo) / 2.0;
    }
    double defect = 0.0;
    for (int i = 0; i < n; ++i)
        defect = std::max(defect, std::abs(jac[i] * wb[i] / wa[i] - 1.0));
    return defect;
}

DefectStudy isometry_defect_study(const std::vector<int>& node_counts, double amplitude) {
    DefectStudy study;
    for (int n : node_counts) {
        study.nodes.push_back(n);
        study.spacings.push_back(1.0 / (n - 1));
        study.defects.push_back(jacobian_pairing_defect(n, amplitude));
    }
    for (size_t i = 0; i + 1 < study.defects.size(); ++i) {
        const double num = std::log(study.defects[i] / study.defects[i + 1]);
        const double den = std::log(study.spacings[i] / study.spacings[i + 1]);
        study.orders.push_back(num / den);
    }
    return study;
}

} // namespace lapext
