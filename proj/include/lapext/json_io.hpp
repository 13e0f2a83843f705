#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "json.hpp"

namespace lapext {

using json = nlohmann::json;

// Complex square matrices travel as {"dim": n, "re": [...], "im": [...]}
// with row-major coefficient order.
json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const json& j);

// Complex vectors travel as {"re": [...], "im": [...]}.
json vector_to_json(const Eigen::VectorXcd& v);
Eigen::VectorXcd vector_from_json(const json& j);

// Hex SHA-256 digest of a byte string. Used to fingerprint boundary
// unitaries in spectrum metadata.
std::string sha256_hex(const std::string& bytes);

// Canonical serialization used for fingerprints: dump of matrix_to_json
// with 17-significant-digit coefficients.
std::string matrix_fingerprint(const Eigen::MatrixXcd& m);

// Shortest-exact decimal rendering capped at 17 significant digits.
std::string format_g17(double x);

} // namespace lapext
