#include "lapext/robin_1d.hpp"
#include "lapext/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace lapext {

namespace {

constexpr double pi = std::numbers::pi;
constexpr int max_bisect_iters = 200;

double bisect(double lo, double hi, double flo, const auto& f) {
    double lam = 0.5 * (lo + hi);
    for (int it = 0; it < max_bisect_iters; ++it) {
        lam = 0.5 * (lo + hi);
        const double fm = f(lam);
        if (fm == 0.0)
            return lam;
        if (std::abs(fm) <= 1e-12 && (hi - lo) <= 1e-12 * std::max(1.0, lam))
            return lam;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = lam;
            flo = fm;
        } else {
            hi = lam;
        }
        if ((hi - lo) <= 1e-15 * std::max(1.0, lam))
            break;
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::vector<RobinRoot> solve_positive(const RobinParams& p, int k_max) {
    if (p.length <= 0.0)
        throw RangeViolation("solve_positive: length must be positive");
    if (k_max <= 0)
        return {};

    const double L = p.length;
    const double c = p.c;
    const auto f = [&](double lam) { return std::tan(L * lam) + c / lam; };

    std::vector<RobinRoot> roots;
    if (c == 0.0) {
        // constant mode, handled exactly rather than through the 0/0 quotient
        roots.push_back({0.0, 0.0, 0.0});
    }

    for (int branch = 0; static_cast<int>(roots.size()) < k_max; ++branch) {
        // branch b spans ((2b-1) pi / (2L), (2b+1) pi / (2L)); tan(L*)
        // sweeps the whole real line there, so at most one root lives inside
        const double lo_pole = (branch == 0) ? 0.0 : (2.0 * branch - 1.0) * pi / (2.0 * L);
        const double hi_pole = (2.0 * branch + 1.0) * pi / (2.0 * L);
        const double width = hi_pole - lo_pole;

        bool found = false;
        double root = 0.0;
        for (double inset : {1e-12 * width, 1e-9}) {
            const double lo = lo_pole + inset;
            const double hi = hi_pole - inset;
            if (lo >= hi)
                continue;
            const double flo = f(lo);
            const double fhi = f(hi);
            if (!std::isfinite(flo) || !std::isfinite(fhi))
                continue;
            if ((flo < 0.0) != (fhi < 0.0)) {
                root = bisect(lo, hi, flo, f);
                found = true;
                break;
            }
        }

        if (!found) {
            // without a sign change the branch holds no eigenvalue; that is
            // expected on the first branch (c >= 0) and an error elsewhere
            if (branch == 0)
                continue;
            throw BracketFailure("solve_positive: lost the root bracket on branch " +
                                 std::to_string(branch));
        }
        if (root <= 0.0)
            continue;
        roots.push_back({root, root * root, std::abs(f(root))});
    }
    return roots;
}

std::optional<RobinRoot> solve_negative(const RobinParams& p) {
    if (p.length <= 0.0)
        throw RangeViolation("solve_negative: length must be positive");
    const double c = p.c;
    if (c <= 0.0)
        return std::nullopt; // no decaying mode; c = 0 only admits mu = 0

    const double L = p.length;
    const auto g = [&](double mu) {
        return std::exp(-2.0 * L * mu) - (mu - c) / (mu + c);
    };

    // g(c) = exp(-2Lc) > 0 and g is strictly decreasing on (c, inf)
    double lo = c, hi = c + 1.0;
    int guard = 0;
    while (g(hi) > 0.0) {
        hi = c + 2.0 * (hi - c);
        if (++guard > 200)
            throw BracketFailure("solve_negative: no sign change found");
    }
    const double mu = bisect(lo, hi, g(lo), g);
    return RobinRoot{mu, -mu * mu, std::abs(g(mu))};
}

double lower_bound(double c, double length) {
    if (c <= 0.0)
        return 0.0;
    const auto root = solve_negative({c, length});
    return root ? root->eigenvalue : 0.0;
}

} // namespace lapext
