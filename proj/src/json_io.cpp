#include "lapext/json_io.hpp"
#include "lapext/errors.hpp"

#include <openssl/evp.h>

#include <cstdio>

namespace lapext {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols())
        throw DimensionMismatch("matrix_to_json: matrix must be square");
    const auto n = m.rows();
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            re.push_back(m(i, j).real());
            im.push_back(m(i, j).imag());
        }
    }
    return json{{"dim", n}, {"re", std::move(re)}, {"im", std::move(im)}};
}

Eigen::MatrixXcd matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im"))
        throw ConfigError("matrix JSON must contain dim, re, im");
    const auto n = j.at("dim").get<Eigen::Index>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (n <= 0 || static_cast<Eigen::Index>(re.size()) != n * n ||
        static_cast<Eigen::Index>(im.size()) != n * n)
        throw ConfigError("matrix JSON coefficient count does not match dim");
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j2 = 0; j2 < n; ++j2)
            m(i, j2) = {re[i * n + j2].get<double>(), im[i * n + j2].get<double>()};
    return m;
}

json vector_to_json(const Eigen::VectorXcd& v) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v[i].real());
        im.push_back(v[i].imag());
    }
    return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

Eigen::VectorXcd vector_from_json(const json& j) {
    if (!j.is_object() || !j.contains("re") || !j.contains("im"))
        throw ConfigError("vector JSON must contain re, im");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != im.size())
        throw ConfigError("vector JSON re/im lengths differ");
    Eigen::VectorXcd v(re.size());
    for (std::size_t i = 0; i < re.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = {re[i].get<double>(), im[i].get<double>()};
    return v;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("sha256 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hexd = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hexd[digest[i] >> 4]);
        out.push_back(hexd[digest[i] & 0xf]);
    }
    return out;
}

std::string matrix_fingerprint(const Eigen::MatrixXcd& m) {
    // 17 significant digits round-trip doubles, so the digest is stable
    // across serialize/parse cycles.
    std::string s = "dim=" + std::to_string(m.rows()) + ";";
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            s += format_g17(m(i, j).real()) + "," + format_g17(m(i, j).imag()) + ";";
    return sha256_hex(s);
}

} // namespace lapext
