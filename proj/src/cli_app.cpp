#include "lapext/cli_app.hpp"

#include "lapext/boundary_unitary.hpp"
#include "lapext/errors.hpp"
#include "lapext/form_assembly.hpp"
#include "lapext/gallery.hpp"
#include "lapext/isotropy.hpp"
#include "lapext/json_io.hpp"
#include "lapext/robin_1d.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace lapext {

namespace {

// ---------------------------------------------------------------------------
// small utilities

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(strip(item));
    return out;
}

double to_number(const std::string& what, const std::string& text) {
    try {
        size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size())
            throw ConfigError(what + ": trailing characters in " + text);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(what + ": not a number: " + text);
    }
}

int to_int(const std::string& what, const std::string& text) {
    try {
        size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used != text.size())
            throw ConfigError(what + ": trailing characters in " + text);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(what + ": not an integer: " + text);
    }
}

int thread_count() {
    if (const char* env = std::getenv("LAPEXT_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1)
            return std::min(v, 64);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(hc == 0 ? 1u : hc, 8u));
}

// Dispatches jobs 0..count-1 to a bounded pool. Each job writes only its own
// result slot, so the output is independent of scheduling.
template <typename Fn>
void parallel_for(int count, Fn&& fn) {
    const int workers = std::min(thread_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// configuration

struct RunConfig {
    std::string domain_text = "interval:2pi";
    std::string grid_text;
    double distortion = 0.0;
    std::string preset;
    std::string unitary_path;
    std::string pairs_path;
    int k = 6;
    int dense_cutoff = 3000;
    double solver_tol = 1e-7;
    double lanczos_tol = 1e-10;
    double gap_min = default_gap_min;
    double norm_max = 5.0;
    unsigned long long seed = 0x1a9ec5ull;
    double shift = std::numeric_limits<double>::quiet_NaN();
    std::string out_path;
    std::string json_path;
    std::string levels_text;
    std::string robin_sweep_text;
    int samples = 0;
    double robin_c = 1.0;
    double robin_length = 2.0 * M_PI;
    std::string robin_length_text;
};

// flat key set shared by all verbs; unknown keys are configuration errors
const std::vector<std::string> config_keys = {
    "domain",     "grid",        "distortion", "preset",      "unitary",
    "pairs",      "k",           "dense_cutoff", "solver_tol", "lanczos_tol",
    "gap_min",    "norm_max",    "seed",       "shift",       "out",
    "json",       "levels",      "robin_sweep", "samples",    "c",
    "length",
};

void apply_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config: top level must be an object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(config_keys.begin(), config_keys.end(), key) == config_keys.end())
            throw ConfigError("config: unknown field \"" + key + "\"");
        try {
            if (key == "domain")
                cfg.domain_text = value.get<std::string>();
            else if (key == "grid")
                cfg.grid_text = value.is_number() ? std::to_string(value.get<long long>())
                                                  : value.get<std::string>();
            else if (key == "distortion")
                cfg.distortion = value.get<double>();
            else if (key == "preset")
                cfg.preset = value.get<std::string>();
            else if (key == "unitary")
                cfg.unitary_path = value.get<std::string>();
            else if (key == "pairs")
                cfg.pairs_path = value.get<std::string>();
            else if (key == "k")
                cfg.k = value.get<int>();
            else if (key == "dense_cutoff")
                cfg.dense_cutoff = value.get<int>();
            else if (key == "solver_tol")
                cfg.solver_tol = value.get<double>();
            else if (key == "lanczos_tol")
                cfg.lanczos_tol = value.get<double>();
            else if (key == "gap_min")
                cfg.gap_min = value.get<double>();
            else if (key == "norm_max")
                cfg.norm_max = value.get<double>();
            else if (key == "seed")
                cfg.seed = value.get<unsigned long long>();
            else if (key == "shift")
                cfg.shift = value.get<double>();
            else if (key == "out")
                cfg.out_path = value.get<std::string>();
            else if (key == "json")
                cfg.json_path = value.get<std::string>();
            else if (key == "levels")
                cfg.levels_text = value.is_array()
                                      ? [&] {
                                            std::string s;
                                            for (const auto& v : value) {
                                                if (!s.empty())
                                                    s += ',';
                                                s += std::to_string(v.get<long long>());
                                            }
                                            return s;
                                        }()
                                      : value.get<std::string>();
            else if (key == "robin_sweep")
                cfg.robin_sweep_text = value.is_array()
                                           ? [&] {
                                                 std::string s;
                                                 for (const auto& v : value) {
                                                     if (!s.empty())
                                                         s += ',';
                                                     s += format_g17(v.get<double>());
                                                 }
                                                 return s;
                                             }()
                                           : value.get<std::string>();
            else if (key == "samples")
                cfg.samples = value.get<int>();
            else if (key == "c")
                cfg.robin_c = value.get<double>();
            else if (key == "length")
                cfg.robin_length = value.is_string()
                                       ? parse_length(value.get<std::string>())
                                       : value.get<double>();
        } catch (const json::exception& e) {
            throw ConfigError("config: field \"" + key + "\": " + e.what());
        }
    }
}

Mesh make_mesh(const RunConfig& cfg) {
    const DomainSpec dom = parse_domain(cfg.domain_text);
    int n[2] = {0, 0};
    std::string grid = cfg.grid_text;
    if (grid.empty())
        grid = dom.kind == DomainKind::interval ? "800" : "64";
    parse_grid(grid, dom.kind, n);
    if (dom.kind == DomainKind::interval)
        return Mesh::interval(dom.lengths[0], n[0], cfg.distortion);
    return Mesh::rectangle(dom.lengths[0], dom.lengths[1], n[0], n[1], cfg.distortion);
}

Eigen::MatrixXcd load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("unitary: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("unitary: ") + path + ": " + e.what());
    }
    return matrix_from_json(j);
}

BoundaryUnitary make_unitary(const RunConfig& cfg, const Mesh& mesh) {
    if (!cfg.unitary_path.empty() && !cfg.preset.empty())
        throw ConfigError("give either a preset or a unitary file, not both");
    if (!cfg.unitary_path.empty())
        return decompose(load_matrix(cfg.unitary_path));
    if (!cfg.preset.empty())
        return preset_unitary(mesh, cfg.preset);
    throw ConfigError("a boundary condition is required: --preset or --unitary");
}

SolveOptions solve_options(const RunConfig& cfg) {
    SolveOptions opt;
    opt.k = cfg.k;
    opt.dense_cutoff = cfg.dense_cutoff;
    opt.solver_tol = cfg.solver_tol;
    opt.lanczos_tol = cfg.lanczos_tol;
    opt.seed = static_cast<unsigned>(cfg.seed);
    opt.shift = cfg.shift;
    return opt;
}

// Output sink: file when a path is given, stdout otherwise.
class Sink {
  public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_)
                throw ConfigError("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

void write_json(const std::string& path, const json& j) {
    if (path.empty())
        return;
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open output file " + path);
    out << j.dump(2) << "\n";
}

json domain_json(const RunConfig& cfg, const Mesh& mesh) {
    return json{{"kind", mesh.kind == DomainKind::interval ? "interval" : "rectangle"},
                {"lengths", mesh.kind == DomainKind::interval
                                ? json::array({mesh.lengths[0]})
                                : json::array({mesh.lengths[0], mesh.lengths[1]})},
                {"grid", mesh.kind == DomainKind::interval
                             ? json::array({mesh.npts[0]})
                             : json::array({mesh.npts[0], mesh.npts[1]})},
                {"distortion", cfg.distortion}};
}

// ---------------------------------------------------------------------------
// verbs

int run_spectrum(const RunConfig& cfg) {
    const Mesh mesh = make_mesh(cfg);
    const BoundaryUnitary bu = make_unitary(cfg, mesh);
    AssembleOptions aopt;
    aopt.gap_min = cfg.gap_min;
    const QuadraticFormSystem sys = assemble(mesh, bu, aopt);
    const Spectrum spec = solve(sys, solve_options(cfg));
    const BoundReport bound = verify_lower_bound(sys, spec.values);
    const ConsistencyReport cons = extension_consistency(sys, spec, cfg.solver_tol);

    Sink sink(cfg.out_path);
    std::ostream& os = sink.stream();
    os << "index,value,residual\n";
    for (int i = 0; i < spec.values.size(); ++i)
        os << i << ',' << format_g17(spec.values[i]) << ','
           << format_g17(spec.residuals[i]) << "\n";

    json meta{
        {"domain", domain_json(cfg, mesh)},
        {"boundary",
         {{"preset", cfg.preset},
          {"unitary_path", cfg.unitary_path},
          {"dim", bu.dim()},
          {"fingerprint", sys.fingerprint}}},
        {"gap",
         {{"has_minus_one", sys.gap.has_minus_one},
          {"gap_width", sys.gap.gap_width},
          {"passes", sys.gap.passes}}},
        {"cayley_norm", sys.cayley.norm},
        {"admissibility_norm", admissibility_norm(sys.cayley.matrix, mesh.boundary_mesh())},
        {"num_constraints", sys.num_constraints},
        {"reduced_dim", sys.reduced_dim()},
        {"solver",
         {{"k", cfg.k},
          {"dense_cutoff", cfg.dense_cutoff},
          {"used_dense", spec.used_dense},
          {"blocks_used", spec.blocks_used},
          {"seed", cfg.seed}}},
        {"values", std::vector<double>(spec.values.data(), spec.values.data() + spec.values.size())},
        {"residuals",
         std::vector<double>(spec.residuals.data(), spec.residuals.data() + spec.residuals.size())},
        {"bound",
         {{"bound", bound.bound},
          {"slack", bound.slack},
          {"min_value", bound.min_value},
          {"passes", bound.passes},
          {"c_eff", bound.c_eff},
          {"collar_lengths", bound.collar_lengths},
          {"axis_bounds", bound.axis_bounds}}},
        {"consistency",
         {{"interior_defect", cons.interior_defect},
          {"residual_defect", cons.residual_defect},
          {"tolerance", cons.tolerance},
          {"passes", cons.passes}}},
    };
    write_json(cfg.json_path, meta);
    return 0;
}

struct VerifyRow {
    std::string label;
    double gap_width = 0.0;
    double norm = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    double min_value = 0.0;
    int negatives = 0;
    double consistency = 0.0;
    bool passes = false;
};

VerifyRow verify_one(const RunConfig& cfg, const Mesh& mesh, const BoundaryUnitary& bu,
                     const std::string& label) {
    AssembleOptions aopt;
    aopt.gap_min = cfg.gap_min;
    const QuadraticFormSystem sys = assemble(mesh, bu, aopt);
    SolveOptions sopt = solve_options(cfg);
    sopt.k = std::max(cfg.k, 3);
    const Spectrum spec = solve(sys, sopt);
    const BoundReport bound = verify_lower_bound(sys, spec.values);
    const ConsistencyReport cons = extension_consistency(sys, spec, cfg.solver_tol);

    VerifyRow row;
    row.label = label;
    row.gap_width = sys.gap.gap_width;
    row.norm = sys.cayley.norm;
    row.bound = bound.bound;
    row.slack = bound.slack;
    row.min_value = bound.min_value;
    for (int i = 0; i < spec.values.size(); ++i)
        if (spec.values[i] < -1e-8)
            ++row.negatives;
    row.consistency = std::max(cons.interior_defect, cons.residual_defect);
    row.passes = bound.passes && cons.passes;
    return row;
}

int run_verify(const RunConfig& cfg) {
    std::vector<VerifyRow> rows;

    if (!cfg.robin_sweep_text.empty()) {
        const DomainSpec dom = parse_domain(cfg.domain_text);
        if (dom.kind != DomainKind::interval)
            throw ConfigError("verify: the Robin sweep runs on interval domains");
        std::vector<double> cs;
        for (const std::string& tok : split(cfg.robin_sweep_text, ','))
            if (!tok.empty())
                cs.push_back(to_number("robin_sweep", tok));
        if (cs.empty())
            throw ConfigError("verify: empty Robin sweep");
        rows.resize(cs.size());
        parallel_for(static_cast<int>(cs.size()), [&](int i) {
            const Mesh mesh = make_mesh(cfg);
            // one Robin end, one Neumann end: the configuration with exactly
            // one negative mode for c > 0
            const BoundaryUnitary bu = mixed_unitary(
                mesh, {{"left", {"neumann", 0.0}}, {"right", {"robin", cs[i]}}});
            rows[i] = verify_one(cfg, mesh, bu, format_g17(cs[i]));
        });
    } else if (cfg.samples > 0) {
        rows.resize(cfg.samples);
        parallel_for(cfg.samples, [&](int i) {
            const Mesh mesh = make_mesh(cfg);
            std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ull * (i + 1)));
            const double gap = std::max(cfg.gap_min, 0.1);
            const BoundaryUnitary bu =
                random_admissible_unitary(mesh.num_boundary(), gap, cfg.norm_max, rng);
            rows[i] = verify_one(cfg, mesh, bu, "sample_" + std::to_string(i));
        });
    } else {
        const Mesh mesh = make_mesh(cfg);
        const BoundaryUnitary bu = make_unitary(cfg, mesh);
        rows.push_back(verify_one(cfg, mesh, bu,
                                  cfg.preset.empty() ? cfg.unitary_path : cfg.preset));
    }

    Sink sink(cfg.out_path);
    std::ostream& os = sink.stream();
    os << "index,label,gap_width,cayley_norm,bound,slack,min_value,negatives,"
          "consistency,passes\n";
    bool all = true;
    for (size_t i = 0; i < rows.size(); ++i) {
        const VerifyRow& r = rows[i];
        os << i << ',' << r.label << ',' << format_g17(r.gap_width) << ','
           << format_g17(r.norm) << ',' << format_g17(r.bound) << ','
           << format_g17(r.slack) << ',' << format_g17(r.min_value) << ','
           << r.negatives << ',' << format_g17(r.consistency) << ','
           << (r.passes ? 1 : 0) << "\n";
        all = all && r.passes;
    }
    if (!cfg.json_path.empty()) {
        json arr = json::array();
        for (const VerifyRow& r : rows)
            arr.push_back({{"label", r.label},
                           {"gap_width", r.gap_width},
                           {"cayley_norm", r.norm},
                           {"bound", r.bound},
                           {"slack", r.slack},
                           {"min_value", r.min_value},
                           {"negatives", r.negatives},
                           {"consistency", r.consistency},
                           {"passes", r.passes}});
        write_json(cfg.json_path, json{{"reports", arr}, {"all_pass", all}});
    }
    if (!all) {
        std::cerr << "verify: " << rows.size() << " report(s), at least one failed\n";
        return 4;
    }
    return 0;
}

int run_convergence(const RunConfig& cfg) {
    if (cfg.levels_text.empty())
        throw ConfigError("convergence: --levels n1,n2,n3[,...] is required");
    std::vector<int> levels;
    for (const std::string& tok : split(cfg.levels_text, ','))
        if (!tok.empty())
            levels.push_back(to_int("levels", tok));
    if (levels.size() < 3)
        throw ConfigError("convergence: at least 3 refinement levels are required");
    for (size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1])
            throw ConfigError("convergence: levels must increase");

    const DomainSpec dom = parse_domain(cfg.domain_text);
    std::vector<Eigen::VectorXd> values(levels.size());
    std::vector<double> spacings(levels.size());
    parallel_for(static_cast<int>(levels.size()), [&](int li) {
        RunConfig local = cfg;
        local.grid_text = std::to_string(levels[li]);
        const Mesh mesh = make_mesh(local);
        const BoundaryUnitary bu = make_unitary(local, mesh);
        AssembleOptions aopt;
        aopt.gap_min = cfg.gap_min;
        const QuadraticFormSystem sys = assemble(mesh, bu, aopt);
        values[li] = solve(sys, solve_options(local)).values;
        spacings[li] = mesh.max_spacing();
    });
    (void)dom;

    Sink sink(cfg.out_path);
    std::ostream& os = sink.stream();
    os << "eigen_index,n_coarse,n_mid,n_fine,value_coarse,value_mid,value_fine,"
          "order,extrapolated\n";
    for (size_t t = 0; t + 2 < levels.size(); ++t) {
        for (int e = 0; e < cfg.k; ++e) {
            const double l1 = values[t][e], l2 = values[t + 1][e], l3 = values[t + 2][e];
            const double d12 = std::abs(l1 - l2);
            const double d23 = std::abs(l2 - l3);
            double order = std::numeric_limits<double>::quiet_NaN();
            double extrapolated = l3;
            const double floor = 1e-13 * std::max(1.0, std::abs(l3));
            if (d12 > floor && d23 > floor) {
                order = std::log(d12 / d23) / std::log(spacings[t] / spacings[t + 1]);
                const double ratio = std::pow(spacings[t + 1] / spacings[t + 2], order);
                extrapolated = l3 + (l3 - l2) / (ratio - 1.0);
            }
            os << e << ',' << levels[t] << ',' << levels[t + 1] << ',' << levels[t + 2]
               << ',' << format_g17(l1) << ',' << format_g17(l2) << ',' << format_g17(l3)
               << ',' << format_g17(order) << ',' << format_g17(extrapolated) << "\n";
        }
    }
    return 0;
}

int run_robin1d(const RunConfig& cfg) {
    const double length =
        cfg.robin_length_text.empty() ? cfg.robin_length : parse_length(cfg.robin_length_text);
    const RobinParams params{cfg.robin_c, length};
    const auto negative = solve_negative(params);
    const auto positive = solve_positive(params, cfg.k);

    Sink sink(cfg.out_path);
    std::ostream& os = sink.stream();
    os << "branch,parameter,eigenvalue,residual\n";
    if (negative)
        os << "negative," << format_g17(negative->parameter) << ','
           << format_g17(negative->eigenvalue) << ',' << format_g17(negative->residual)
           << "\n";
    for (size_t i = 0; i < positive.size(); ++i)
        os << "positive_" << i << ',' << format_g17(positive[i].parameter) << ','
           << format_g17(positive[i].eigenvalue) << ','
           << format_g17(positive[i].residual) << "\n";

    if (!cfg.json_path.empty()) {
        json j{{"c", cfg.robin_c},
               {"length", length},
               {"lower_bound", lower_bound(cfg.robin_c, length)},
               {"has_negative", negative.has_value()}};
        if (negative)
            j["negative"] = {{"mu", negative->parameter},
                             {"eigenvalue", negative->eigenvalue},
                             {"residual", negative->residual}};
        json arr = json::array();
        for (const RobinRoot& r : positive)
            arr.push_back({{"lambda", r.parameter},
                           {"eigenvalue", r.eigenvalue},
                           {"residual", r.residual}});
        j["positive"] = arr;
        write_json(cfg.json_path, j);
    }
    return 0;
}

int run_gap(const RunConfig& cfg) {
    std::optional<Mesh> mesh;
    BoundaryUnitary bu;
    if (!cfg.unitary_path.empty() && cfg.preset.empty()) {
        bu = decompose(load_matrix(cfg.unitary_path));
    } else {
        mesh = make_mesh(cfg);
        bu = make_unitary(cfg, *mesh);
    }
    const GapReport gap = gap_report(bu, cfg.gap_min);
    json j{{"dim", bu.dim()},
           {"eigenphases",
            std::vector<double>(bu.eigenphases.data(),
                                bu.eigenphases.data() + bu.eigenphases.size())},
           {"has_minus_one", gap.has_minus_one},
           {"gap_width", gap.gap_width},
           {"passes", gap.passes},
           {"gap_min", cfg.gap_min},
           {"fingerprint", matrix_fingerprint(bu.matrix)}};
    if (gap.passes) {
        const PartialCayley pc = partial_cayley(bu, cfg.gap_min);
        j["cayley_norm"] = pc.norm;
        if (mesh)
            j["admissibility_norm"] = admissibility_norm(pc.matrix, mesh->boundary_mesh());
    }
    Sink sink(cfg.out_path.empty() ? cfg.json_path : cfg.out_path);
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

int run_cayley(const RunConfig& cfg) {
    std::optional<Mesh> mesh;
    BoundaryUnitary bu;
    if (!cfg.unitary_path.empty() && cfg.preset.empty()) {
        bu = decompose(load_matrix(cfg.unitary_path));
    } else {
        mesh = make_mesh(cfg);
        bu = make_unitary(cfg, *mesh);
    }
    const PartialCayley pc = partial_cayley(bu, cfg.gap_min); // throws NoGap -> exit 2
    int rank = 0;
    for (int i = 0; i < bu.eigenphases.size(); ++i)
        if (bu.eigenphases[i] != M_PI)
            ++rank;
    json j{{"dim", bu.dim()},
           {"norm", pc.norm},
           {"projector_rank", rank},
           {"fingerprint", matrix_fingerprint(bu.matrix)},
           {"a_u", matrix_to_json(pc.matrix)},
           {"projector", matrix_to_json(pc.projector)}};
    if (mesh)
        j["admissibility_norm"] = admissibility_norm(pc.matrix, mesh->boundary_mesh());
    Sink sink(cfg.out_path.empty() ? cfg.json_path : cfg.out_path);
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

int run_isotropy_check(const RunConfig& cfg) {
    json j;
    if (!cfg.pairs_path.empty()) {
        std::ifstream in(cfg.pairs_path);
        if (!in)
            throw ConfigError("pairs: cannot open " + cfg.pairs_path);
        json parsed;
        try {
            parsed = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("pairs: ") + e.what());
        }
        if (!parsed.is_object() || !parsed.contains("pairs") || !parsed["pairs"].is_array())
            throw ConfigError("pairs: expected an object with a \"pairs\" array");
        std::vector<BoundaryPair> pairs;
        for (const auto& item : parsed["pairs"]) {
            BoundaryPair p;
            p.value = vector_from_json(item.at("value"));
            p.derivative = vector_from_json(item.at("derivative"));
            pairs.push_back(std::move(p));
        }
        if (pairs.empty())
            throw ConfigError("pairs: empty list");
        const int n = pairs.front().n();
        double max_sigma = 0.0;
        for (const BoundaryPair& p : pairs)
            for (const BoundaryPair& q : pairs)
                max_sigma = std::max(max_sigma, std::abs(sigma(p, q)));
        j["n"] = n;
        j["count"] = pairs.size();
        j["max_sigma"] = max_sigma;
        bool isotropic = false;
        bool maximal = static_cast<int>(pairs.size()) == n;
        std::string reason;
        try {
            IsotropicSubspace w = IsotropicSubspace::from_pairs(pairs);
            isotropic = true;
            j["dim"] = w.dim();
            if (maximal) {
                const Eigen::MatrixXcd u = recover_unitary(w);
                j["recovered_fingerprint"] = matrix_fingerprint(u);
            }
        } catch (const Error& e) {
            reason = e.what();
        }
        j["isotropic"] = isotropic;
        j["maximal"] = maximal;
        if (!reason.empty())
            j["reason"] = reason;
    } else {
        std::optional<Mesh> mesh;
        BoundaryUnitary bu;
        if (!cfg.unitary_path.empty() && cfg.preset.empty()) {
            bu = decompose(load_matrix(cfg.unitary_path));
        } else {
            mesh = make_mesh(cfg);
            bu = make_unitary(cfg, *mesh);
        }
        const IsotropicSubspace w = subspace_from_unitary(bu);
        double max_sigma = 0.0, max_residual = 0.0;
        for (const BoundaryPair& p : w.basis) {
            max_residual = std::max(max_residual, boundary_equation_residual(p, bu.matrix));
            for (const BoundaryPair& q : w.basis)
                max_sigma = std::max(max_sigma, std::abs(sigma(p, q)));
        }
        const Eigen::MatrixXcd recovered = recover_unitary(w);
        const IsotropicSubspace w2 = subspace_from_unitary(decompose(recovered));
        const double proj_dist = (w2.projector - w.projector).norm();
        j = json{{"n", w.n},
                 {"dim", w.dim()},
                 {"max_sigma", max_sigma},
                 {"max_boundary_residual", max_residual},
                 {"projector_distance", proj_dist},
                 {"isotropic", true},
                 {"maximal", true},
                 {"fingerprint", matrix_fingerprint(bu.matrix)},
                 {"recovered_fingerprint", matrix_fingerprint(recovered)}};
    }
    Sink sink(cfg.out_path.empty() ? cfg.json_path : cfg.out_path);
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

} // namespace

double parse_length(const std::string& token) {
    const std::string t = strip(token);
    if (t.empty())
        throw ConfigError("length: empty token");
    double value;
    if (t.size() >= 2 && t.substr(t.size() - 2) == "pi") {
        const std::string prefix = strip(t.substr(0, t.size() - 2));
        value = (prefix.empty() ? 1.0 : to_number("length", prefix)) * M_PI;
    } else {
        value = to_number("length", t);
    }
    if (!(value > 0.0))
        throw ConfigError("length: must be positive, got " + token);
    return value;
}

DomainSpec parse_domain(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("domain: expected kind:lengths, got " + text);
    const std::string kind = strip(text.substr(0, colon));
    const std::vector<std::string> parts = split(text.substr(colon + 1), ',');
    DomainSpec dom;
    if (kind == "interval") {
        if (parts.size() != 1)
            throw ConfigError("domain: interval takes one length");
        dom.kind = DomainKind::interval;
        dom.lengths[0] = parse_length(parts[0]);
    } else if (kind == "rectangle") {
        if (parts.size() != 2)
            throw ConfigError("domain: rectangle takes two lengths");
        dom.kind = DomainKind::rectangle;
        dom.lengths[0] = parse_length(parts[0]);
        dom.lengths[1] = parse_length(parts[1]);
    } else {
        throw ConfigError("domain: unknown kind " + kind);
    }
    return dom;
}

void parse_grid(const std::string& text, DomainKind kind, int n_out[2]) {
    const std::vector<std::string> parts = split(text, ',');
    if (kind == DomainKind::interval) {
        if (parts.size() != 1)
            throw ConfigError("grid: interval takes one size");
        n_out[0] = to_int("grid", parts[0]);
        n_out[1] = 1;
    } else if (parts.size() == 1) {
        n_out[0] = n_out[1] = to_int("grid", parts[0]);
    } else if (parts.size() == 2) {
        n_out[0] = to_int("grid", parts[0]);
        n_out[1] = to_int("grid", parts[1]);
    } else {
        throw ConfigError("grid: expected n or nx,ny");
    }
    if (n_out[0] < 3 || (kind == DomainKind::rectangle && n_out[1] < 3))
        throw ConfigError("grid: at least 3 points per axis are required");
}

int cli_main(int argc, const char* const* argv) {
    RunConfig cfg;
    std::string config_path;

    CLI::App app{"Self-adjoint Laplacian extensions: boundary unitaries, "
                 "constrained quadratic forms, and spectra"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "print help for all subcommands");

    auto add_common = [&](CLI::App* sub, bool wants_domain) {
        sub->add_option("--config", config_path, "JSON config file; flags override it");
        if (wants_domain) {
            sub->add_option("--domain", cfg.domain_text,
                            "domain: interval:<len> | rectangle:<lx>,<ly> "
                            "(lengths accept a pi suffix)");
            sub->add_option("--n", cfg.grid_text, "grid points per axis: n | nx,ny");
            sub->add_option("--distortion", cfg.distortion,
                            "metric distortion delta in [0,1)");
            sub->add_option("--preset", cfg.preset,
                            "boundary preset: dirichlet | neumann | robin:c=X | "
                            "robin:beta=X | periodic[:axis=x|y] | "
                            "quasiperiodic:alpha=X[,axis=..] | zaremba[:dirichlet=side]");
            sub->add_option("--unitary", cfg.unitary_path, "boundary unitary JSON file");
        }
        sub->add_option("--k", cfg.k, "number of lowest eigenvalues");
        sub->add_option("--seed", cfg.seed, "base random seed");
        sub->add_option("--out", cfg.out_path, "CSV/JSON output path (default stdout)");
        sub->add_option("--json", cfg.json_path, "JSON metadata output path");
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--dense-cutoff", cfg.dense_cutoff,
                        "largest reduced dimension solved densely");
        sub->add_option("--solver-tol", cfg.solver_tol, "scaled residual acceptance");
        sub->add_option("--lanczos-tol", cfg.lanczos_tol, "iterative convergence target");
        sub->add_option("--shift", cfg.shift, "spectral shift override");
        sub->add_option("--gap-min", cfg.gap_min, "required eigenphase gap at -1");
    };

    CLI::App* spectrum = app.add_subcommand("spectrum", "lowest eigenvalues of one extension");
    add_common(spectrum, true);
    add_solver(spectrum);

    CLI::App* verify = app.add_subcommand(
        "verify", "semi-boundedness and consistency reports over a sweep");
    add_common(verify, true);
    add_solver(verify);
    verify->add_option("--robin-sweep", cfg.robin_sweep_text,
                       "comma list of Robin coefficients (one Robin end, one Neumann end)");
    verify->add_option("--samples", cfg.samples, "number of random admissible unitaries");
    verify->add_option("--norm-max", cfg.norm_max, "norm cap for random samples");

    CLI::App* convergence =
        app.add_subcommand("convergence", "empirical eigenvalue convergence orders");
    add_common(convergence, true);
    add_solver(convergence);
    convergence->add_option("--levels", cfg.levels_text, "grid sizes, e.g. 200,400,800");

    CLI::App* robin1d = app.add_subcommand("robin1d", "transcendental Robin roots on an interval");
    add_common(robin1d, false);
    robin1d->add_option("--c", cfg.robin_c, "Robin coefficient");
    robin1d->add_option("--length", cfg.robin_length_text,
                        "interval length (accepts a pi suffix)");

    CLI::App* gap = app.add_subcommand("gap", "eigenphase gap report of a boundary unitary");
    add_common(gap, true);
    gap->add_option("--gap-min", cfg.gap_min, "required eigenphase gap at -1");

    CLI::App* cayley = app.add_subcommand("cayley", "partial Cayley transform of a boundary unitary");
    add_common(cayley, true);
    cayley->add_option("--gap-min", cfg.gap_min, "required eigenphase gap at -1");

    CLI::App* isotropy = app.add_subcommand("isotropy", "Lagrange boundary form tools");
    isotropy->require_subcommand(1);
    CLI::App* check = isotropy->add_subcommand(
        "check", "isotropy / maximality of boundary pairs or a unitary's graph");
    add_common(check, true);
    check->add_option("--pairs", cfg.pairs_path, "JSON file with boundary pairs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        // config file first, then re-parse so explicit flags win
        if (!config_path.empty()) {
            apply_config_file(config_path, cfg);
            try {
                app.clear();
                app.parse(argc, argv);
            } catch (const CLI::ParseError& e) {
                const int rc = app.exit(e);
                return rc == 0 ? 0 : 1;
            }
        }
        if (spectrum->parsed())
            return run_spectrum(cfg);
        if (verify->parsed())
            return run_verify(cfg);
        if (convergence->parsed())
            return run_convergence(cfg);
        if (robin1d->parsed())
            return run_robin1d(cfg);
        if (gap->parsed())
            return run_gap(cfg);
        if (cayley->parsed())
            return run_cayley(cfg);
        if (isotropy->parsed() && check->parsed())
            return run_isotropy_check(cfg);
        throw ConfigError("no subcommand selected");
    } catch (const NoGap& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SolverFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace lapext
