// Acceptance suite: eight structural criteria checked at desk scale.
// Prints one [PASS]/[FAIL] line per criterion; the exit code is the number
// of failed criteria.

#include "lapext/boundary_unitary.hpp"
#include "lapext/errors.hpp"
#include "lapext/form_assembly.hpp"
#include "lapext/gallery.hpp"
#include "lapext/isotropy.hpp"
#include "lapext/mesh.hpp"
#include "lapext/robin_1d.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace lapext;

namespace {

const double pi = std::acos(-1.0);
const double two_pi = 2.0 * pi;

SolveOptions acceptance_solver(int k) {
    SolveOptions opt;
    opt.k = k;
    // push moderate 1D problems onto the iterative path and leave margin
    // between the iterative target and the consistency tolerance
    opt.dense_cutoff = 600;
    opt.solver_tol = 1e-7;
    opt.lanczos_tol = 1e-11;
    return opt;
}

template <typename Fn>
void parallel_for(int count, Fn&& fn) {
    unsigned workers = std::thread::hardware_concurrency();
    workers = std::min(std::max(workers, 1u), 8u);
    workers = std::min<unsigned>(workers, count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
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

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void fail(const std::string& why) {
        if (pass)
            detail << why;
        pass = false;
    }
    void expect(bool ok, const std::string& why) {
        if (!ok)
            fail(why);
    }
};

// shared across criteria 4/5 -> consumed by criteria 6/7
struct SystemAudit {
    std::mutex mutex;
    double worst_consistency = 0.0;
    bool all_consistent = true;
    double worst_hermiticity_ratio = 0.0;
    int systems = 0;

    void record(const QuadraticFormSystem& sys, const Spectrum& spec) {
        const ConsistencyReport rep = extension_consistency(sys, spec, 1e-7);
        double scale = 0.0;
        for (int k = 0; k < sys.form.outerSize(); ++k)
            for (SparseCxd::InnerIterator it(sys.form, k); it; ++it)
                scale = std::max(scale, std::abs(it.value()));
        const double herm = hermiticity_defect(sys.reduced_form) / std::max(scale, 1e-300);
        std::lock_guard<std::mutex> lock(mutex);
        worst_consistency =
            std::max(worst_consistency, std::max(rep.interior_defect, rep.residual_defect));
        all_consistent = all_consistent && rep.passes;
        worst_hermiticity_ratio = std::max(worst_hermiticity_ratio, herm);
        ++systems;
    }
};

SystemAudit audit;

// criterion 1: one-sided Robin mode counting against the closed-form root,
// with second-order FD confirmation of each present mode
Check criterion_robin_counting() {
    Check c;
    const double cs[6] = {-2.0, -1.0, 0.0, 0.5, 1.0, 2.0};
    const bool present[6] = {false, false, false, true, true, true};

    for (int i = 0; i < 6; ++i) {
        const auto root = solve_negative({cs[i], two_pi});
        if (root.has_value() != present[i]) {
            c.fail("mode presence wrong at c = " + std::to_string(cs[i]));
            continue;
        }
        if (!root)
            continue;
        c.expect(root->residual <= 1e-10,
                 "transcendental residual above 1e-10 at c = " + std::to_string(cs[i]));

        // FD ground states under h-halving
        double errors[3];
        const int sizes[3] = {201, 401, 801};
        bool solved = true;
        for (int t = 0; t < 3 && solved; ++t) {
            const Mesh mesh = Mesh::interval(two_pi, sizes[t]);
            const BoundaryUnitary bu = mixed_unitary(
                mesh, {{"left", {"neumann", 0.0}}, {"right", {"robin", cs[i]}}});
            const QuadraticFormSystem sys = assemble(mesh, bu);
            const Spectrum spec = solve(sys, acceptance_solver(2));
            errors[t] = std::abs(spec.values[0] - root->eigenvalue);
            if (errors[t] <= 0.0) {
                c.fail("exact FD hit prevents an order estimate");
                solved = false;
            }
        }
        if (!solved)
            continue;
        const double order1 = std::log2(errors[0] / errors[1]);
        const double order2 = std::log2(errors[1] / errors[2]);
        if (!(order1 >= 1.9 && order2 >= 1.9)) {
            std::ostringstream os;
            os << "observed orders " << order1 << ", " << order2 << " at c = " << cs[i];
            c.fail(os.str());
        }
    }
    if (c.pass)
        c.detail << "counts 0/0/0/1/1/1, orders >= 1.9 on h-halving";
    return c;
}

// criterion 2: eigenvalues of the extension map against the tangent map
Check criterion_cayley_eigenvalues() {
    Check c;
    std::mt19937_64 rng(0xc2u);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 1 + static_cast<int>(rng() % 32);
        const BoundaryUnitary bu = random_admissible_unitary(dim, 0.1, 1e9, rng);
        const PartialCayley pc = partial_cayley(bu);
        const double scale = std::max(1.0, pc.norm);

        const double herm = (pc.matrix - pc.matrix.adjoint()).norm();
        c.expect(herm <= 1e-12 * std::max(pc.matrix.norm(), 1.0),
                 "extension map drifted from Hermitian");

        std::vector<double> expected;
        for (int i = 0; i < dim; ++i)
            expected.push_back(bu.eigenphases[i] == pi
                                   ? 0.0
                                   : -std::tan(bu.eigenphases[i] / 2.0));
        std::sort(expected.begin(), expected.end());

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pc.matrix);
        if (es.info() != Eigen::Success) {
            c.fail("eigensolver failed on the extension map");
            continue;
        }
        for (int i = 0; i < dim; ++i) {
            const double err = std::abs(es.eigenvalues()[i] - expected[i]);
            worst = std::max(worst, err / scale);
            if (err > 1e-12 * scale) {
                std::ostringstream os;
                os << "eigenvalue mismatch " << err << " at dim " << dim;
                c.fail(os.str());
            }
        }
    }
    if (c.pass)
        c.detail << "100 unitaries, worst scaled mismatch " << worst;
    return c;
}

// criterion 3: graph subspaces are isotropic, solve the boundary equation,
// and the unitary is recoverable
Check criterion_isotropy_roundtrip() {
    Check c;
    std::mt19937_64 rng(0xc3u);
    double worst_sigma = 0.0, worst_residual = 0.0, worst_distance = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 16);
        const BoundaryUnitary bu = decompose(random_unitary_matrix(n, rng));
        const IsotropicSubspace w = subspace_from_unitary(bu);
        for (int i = 0; i < n; ++i) {
            const double r = boundary_equation_residual(w.basis[i], bu.matrix);
            worst_residual = std::max(worst_residual, r);
            c.expect(r <= 1e-12, "boundary equation residual above 1e-12");
            for (int j = i; j < n; ++j) {
                const double s = std::abs(sigma(w.basis[i], w.basis[j]));
                worst_sigma = std::max(worst_sigma, s);
                c.expect(s <= 1e-12, "boundary form value above 1e-12 on basis pair");
            }
        }
        const Eigen::MatrixXcd recovered = recover_unitary(w);
        const IsotropicSubspace w2 = subspace_from_unitary(decompose(recovered));
        const double dist = (w2.projector - w.projector).norm();
        worst_distance = std::max(worst_distance, dist);
        c.expect(dist <= 1e-10, "round-trip projector distance above 1e-10");
    }
    if (c.pass)
        c.detail << "worst sigma " << worst_sigma << ", residual " << worst_residual
                 << ", projector distance " << worst_distance;
    return c;
}

struct SpectrumCase {
    std::string label;
    DomainKind kind;
    double lx, ly;
    int nx, ny;
    std::function<BoundaryUnitary(const Mesh&)> unitary;
    std::vector<double> expected;
};

std::vector<double> lowest_sums(const std::vector<double>& a,
                                const std::vector<double>& b, int count) {
    std::vector<double> v;
    for (double x : a)
        for (double y : b)
            v.push_back(x + y);
    std::sort(v.begin(), v.end());
    v.resize(count);
    return v;
}

std::vector<double> bloch_ladder(double alpha, double length, int count) {
    std::vector<double> v;
    for (int k = -6; k <= 6; ++k) {
        const double q = (two_pi * k + alpha) / length;
        v.push_back(q * q);
    }
    std::sort(v.begin(), v.end());
    v.resize(count);
    return v;
}

// criterion 4: gallery spectra at n = 1600 / 128^2 against closed forms
Check criterion_gallery_spectra() {
    Check c;
    std::vector<SpectrumCase> cases;

    auto preset = [](const std::string& text) {
        return [text](const Mesh& mesh) { return preset_unitary(mesh, text); };
    };

    cases.push_back({"dirichlet_interval", DomainKind::interval, pi, 0, 1600, 1,
                     preset("dirichlet"), {1.0, 4.0, 9.0, 16.0, 25.0}});
    cases.push_back({"neumann_interval", DomainKind::interval, two_pi, 0, 1600, 1,
                     preset("neumann"), {0.0, 0.25, 1.0, 2.25, 4.0}});
    cases.push_back({"periodic_interval", DomainKind::interval, two_pi, 0, 1600, 1,
                     preset("periodic"), bloch_ladder(0.0, two_pi, 5)});
    for (double alpha : {0.5, 1.0, pi})
        cases.push_back({"quasiperiodic_" + std::to_string(alpha), DomainKind::interval,
                         two_pi, 0, 1600, 1,
                         [alpha](const Mesh& mesh) {
                             return identification_unitary(mesh, 0, alpha);
                         },
                         bloch_ladder(alpha, two_pi, 5)});
    {
        std::vector<double> zaremba;
        for (int k = 0; k < 5; ++k)
            zaremba.push_back(0.25 * (k + 0.5) * (k + 0.5));
        cases.push_back({"zaremba_interval", DomainKind::interval, two_pi, 0, 1600, 1,
                         preset("zaremba"), zaremba});
    }

    // rectangles on [0, 2 pi] x [0, pi]: sums of the axis ladders
    const std::vector<double> neumann_y = {0.0, 1.0, 4.0, 9.0};
    cases.push_back({"periodic_rectangle", DomainKind::rectangle, two_pi, pi, 128, 128,
                     preset("periodic"),
                     lowest_sums(bloch_ladder(0.0, two_pi, 6), neumann_y, 5)});
    cases.push_back({"quasiperiodic_rectangle", DomainKind::rectangle, two_pi, pi, 128,
                     128, preset("quasiperiodic:alpha=1.0"),
                     lowest_sums(bloch_ladder(1.0, two_pi, 6), neumann_y, 5)});
    {
        std::vector<double> zaremba_x;
        for (int k = 0; k < 6; ++k)
            zaremba_x.push_back(0.25 * (k + 0.5) * (k + 0.5));
        cases.push_back({"zaremba_rectangle", DomainKind::rectangle, two_pi, pi, 128,
                         128, preset("zaremba"),
                         lowest_sums(zaremba_x, neumann_y, 5)});
    }

    std::vector<std::string> failures(cases.size());
    parallel_for(static_cast<int>(cases.size()), [&](int idx) {
        const SpectrumCase& sc = cases[idx];
        const Mesh mesh = sc.kind == DomainKind::interval
                              ? Mesh::interval(sc.lx, sc.nx)
                              : Mesh::rectangle(sc.lx, sc.ly, sc.nx, sc.ny);
        const QuadraticFormSystem sys = assemble(mesh, sc.unitary(mesh));
        const Spectrum spec = solve(sys, acceptance_solver(5));
        audit.record(sys, spec);
        for (int i = 0; i < 5; ++i) {
            const double tol = 1e-3 * std::max(1.0, std::abs(sc.expected[i]));
            if (std::abs(spec.values[i] - sc.expected[i]) > tol) {
                std::ostringstream os;
                os << sc.label << ": value " << spec.values[i] << " vs "
                   << sc.expected[i];
                failures[idx] = os.str();
                return;
            }
        }
    });
    int checked = 0;
    for (const std::string& f : failures) {
        if (!f.empty())
            c.fail(f);
        ++checked;
    }
    if (c.pass)
        c.detail << checked << " closed-form spectra matched to 1e-3";
    return c;
}

// criterion 5: randomized semi-boundedness sweep on both domain kinds
Check criterion_semibounded_sweep() {
    Check c;
    const int interval_samples = 25;
    const int rectangle_samples = 25;
    std::vector<std::string> failures(interval_samples + rectangle_samples);

    parallel_for(interval_samples + rectangle_samples, [&](int idx) {
        std::mt19937_64 rng(0xc5ull ^ (0x9e3779b97f4a7c15ull * (idx + 1)));
        const bool is_interval = idx < interval_samples;
        const Mesh mesh = is_interval
                              ? Mesh::interval(two_pi, 401, (idx % 2) ? 0.15 : 0.0)
                              : Mesh::rectangle(two_pi, pi, 48, 40, (idx % 2) ? 0.1 : 0.0);
        const BoundaryUnitary bu =
            random_admissible_unitary(mesh.num_boundary(), 0.1, 5.0, rng);
        const QuadraticFormSystem sys = assemble(mesh, bu);
        const Spectrum spec = solve(sys, acceptance_solver(3));
        audit.record(sys, spec);
        const BoundReport rep = verify_lower_bound(sys, spec.values);
        if (!rep.passes) {
            std::ostringstream os;
            os << "sample " << idx << ": min " << rep.min_value << " below bound "
               << rep.bound << " - slack " << rep.slack;
            failures[idx] = os.str();
        }
    });
    for (const std::string& f : failures)
        if (!f.empty())
            c.fail(f);
    if (c.pass)
        c.detail << interval_samples << " interval + " << rectangle_samples
                 << " rectangle samples stayed above the collar bound";
    return c;
}

// criterion 6: every eigenpair from criteria 4-5 satisfies the interior
// equation at the solver tolerance
Check criterion_extension_consistency() {
    Check c;
    c.expect(audit.systems > 0, "no systems were audited");
    c.expect(audit.all_consistent, "an eigenpair violated the interior equation");
    if (c.pass)
        c.detail << audit.systems << " systems, worst scaled defect "
                 << audit.worst_consistency << " <= 1e-7";
    return c;
}

// criterion 7: Hermiticity of every constrained form, plus a negative
// control that must be caught
Check criterion_hermiticity() {
    Check c;
    c.expect(audit.worst_hermiticity_ratio <= 1e-12,
             "a constrained form drifted from Hermitian");

    // negative control: Dirichlet rows replaced into a system whose boundary
    // term is nonzero must fail the same check
    const Mesh mesh = Mesh::interval(two_pi, 201);
    const BoundaryUnitary bu = preset_unitary(mesh, "robin:c=1");
    const QuadraticFormSystem sys = assemble(mesh, bu);
    double scale = 0.0;
    for (int k = 0; k < sys.form.outerSize(); ++k)
        for (SparseCxd::InnerIterator it(sys.form, k); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    const double control = hermiticity_defect(row_replacement_form(sys));
    c.expect(control > 1e-12 * scale,
             "the row-replacement control was not detected as non-Hermitian");
    if (c.pass)
        c.detail << "worst ratio " << audit.worst_hermiticity_ratio
                 << "; control defect ratio " << control / scale;
    return c;
}

// criterion 8: the warped-edge pairing isometry defect decays at order >= 1.9
Check criterion_pairing_isometry() {
    Check c;
    const DefectStudy study = isometry_defect_study({17, 33, 65}, 0.18);
    c.expect(study.orders.size() == 2, "expected two refinement steps");
    for (double order : study.orders)
        if (!(order >= 1.9)) {
            std::ostringstream os;
            os << "observed order " << order << " below 1.9";
            c.fail(os.str());
        }
    if (c.pass)
        c.detail << "defects " << study.defects[0] << " -> " << study.defects[1]
                 << " -> " << study.defects[2] << ", orders " << study.orders[0]
                 << ", " << study.orders[1];
    return c;
}

} // namespace

int main() {
    struct Item {
        const char* name;
        Check (*run)();
    };
    const Item items[8] = {
        {"Robin mode counting with FD second-order confirmation", criterion_robin_counting},
        {"extension-map eigenvalues match the tangent map", criterion_cayley_eigenvalues},
        {"graph subspaces: isotropy, boundary equation, recovery", criterion_isotropy_roundtrip},
        {"gallery spectra match closed forms at scale", criterion_gallery_spectra},
        {"randomized semi-boundedness above the collar bound", criterion_semibounded_sweep},
        {"eigenpairs satisfy the interior equation", criterion_extension_consistency},
        {"constrained forms are Hermitian; control caught", criterion_hermiticity},
        {"warped-edge pairing defect decays at second order", criterion_pairing_isometry},
    };

    int failures = 0;
    for (int i = 0; i < 8; ++i) {
        Check result;
        try {
            result = items[i].run();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail.str(std::string("exception: ") + e.what());
        }
        std::printf("[%s] %d. %s (%s)\n", result.pass ? "PASS" : "FAIL", i + 1,
                    items[i].name, result.detail.str().c_str());
        std::fflush(stdout);
        if (!result.pass)
            ++failures;
    }
    return failures;
}
