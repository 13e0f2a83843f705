#pragma once

#include <stdexcept>
#include <string>

namespace lapext {

// Error taxonomy shared across the library. The CLI maps these onto process
// exit codes: configuration problems -> 1, NoGap -> 2, SolverFailure -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matrix fails the unitarity check within tolerance.
struct NotUnitary : Error { using Error::Error; };

// Eigenphase cluster at -1 is too close to the rest of the spectrum, so the
// partial Cayley transform is not defined at the requested threshold.
struct NoGap : Error { using Error::Error; };

struct DimensionMismatch : Error { using Error::Error; };

// Subspace fails the boundary-form isotropy test.
struct NotIsotropic : Error { using Error::Error; };

// Subspace dimension differs from the boundary dimension.
struct NotMaximal : Error { using Error::Error; };

// Supplied basis is numerically rank deficient.
struct DegenerateBasis : Error { using Error::Error; };

// Root bracketing failed even after the retry perturbation.
struct BracketFailure : Error { using Error::Error; };

// Parameter outside its admissible range (e.g. Robin angle at +-pi).
struct RangeViolation : Error { using Error::Error; };

// Boundary elements cannot be identified (node counts differ, overlap, ...).
struct IncompatibleElements : Error { using Error::Error; };

// Eigensolver did not converge or factorization failed.
struct SolverFailure : Error { using Error::Error; };

// Bad CLI arguments or config file contents.
struct ConfigError : Error { using Error::Error; };

} // namespace lapext
