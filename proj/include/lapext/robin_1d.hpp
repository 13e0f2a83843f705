#pragma once

#include <optional>
#include <vector>

namespace lapext {

/// Model problem -u'' on [0, length] with a natural (Neumann) condition at 0
/// and the outward-derivative condition u'(length) = c * u(length).
struct RobinParams {
    double c = 0.0;
    double length = 0.0;
};

/// One spectral point. For eigenvalue = lambda^2 >= 0, parameter holds lambda
/// and residual is |tan(length * lambda) + c / lambda| (0 for the exact
/// lambda = 0 root at c = 0). For the negative mode, eigenvalue = -mu^2,
/// parameter holds mu and residual is
/// |exp(-2 length mu) - (mu - c)/(mu + c)|.
struct RobinRoot {
    double parameter = 0.0;
    double eigenvalue = 0.0;
    double residual = 0.0;
};

/// k_max smallest non-negative eigenvalues, one root per branch of
/// tan(length * lambda) = -c / lambda between consecutive tangent poles,
/// located by bracketed bisection. Throws BracketFailure if a bracket cannot
/// be established after the retry perturbation.
std::vector<RobinRoot> solve_positive(const RobinParams& p, int k_max);

/// The unique negative eigenvalue -mu^2, present exactly when c > 0; the
/// decay rate mu solves exp(-2 length mu) = (mu - c)/(mu + c) on (c, inf).
std::optional<RobinRoot> solve_negative(const RobinParams& p);

/// min(0, -mu^2): the sharp lower bound of the model quadratic form
/// |u'|^2 - c |u(length)|^2 over the interval of the given length.
double lower_bound(double c, double length);

} // namespace lapext
