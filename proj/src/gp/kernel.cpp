#include "skel/gp/kernel.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace skel::gp {

void KernelConfig::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!positive(rq_length_scale)) throw ConfigError("rq_length_scale must be > 0");
    if (!positive(se_length_scale)) throw ConfigError("se_length_scale must be > 0");
    if (!positive(rq_alpha)) throw ConfigError("rq_alpha must be > 0");
    if (!nonneg(noise_variance)) throw ConfigError("noise_variance must be >= 0");
    if (!nonneg(jitter)) throw ConfigError("jitter must be >= 0");
    if (!std::isfinite(const_value)) throw ConfigError("const_value must be finite");
}

double squared_distance(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw UsageError(fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
    }
    return (a - b).squaredNorm();
}

double rational_quadratic(const KernelConfig& cfg, double r2) {
    const double base = 1.0 + r2 / (2.0 * cfg.rq_alpha * cfg.rq_length_scale * cfg.rq_length_scale);
    return cfg.rq_alpha == 1.0 ? 1.0 / base : std::pow(base, -cfg.rq_alpha);
}

double squared_exponential(const KernelConfig& cfg, double r2) {
    return std::exp(-r2 / (2.0 * cfg.se_length_scale * cfg.se_length_scale));
}

double kernel_from_sqdist(const KernelConfig& cfg, double r2) {
    return cfg.const_value + rational_quadratic(cfg, r2) + squared_exponential(cfg, r2);
}

double kernel_eval(const KernelConfig& cfg, const Vector& a, const Vector& b,
                   bool same_observation) {
    const double k = kernel_from_sqdist(cfg, squared_distance(a, b));
    return same_observation ? k + cfg.noise_variance : k;
}

Matrix gram(const KernelConfig& cfg, const std::vector<Vector>& rows) {
    return gram(cfg, rows, cfg.jitter);
}

Matrix gram(const KernelConfig& cfg, const std::vector<Vector>& rows, double jitter) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix k(n, n);
    if (n == 0) return k;
    const auto dim = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != dim) throw UsageError("gram: rows have different dimensions");
        if (!r.allFinite()) throw DataError("gram: non-finite input");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = kernel_from_sqdist(cfg, (rows[i] - rows[j]).squaredNorm());
            k(i, j) = v;
            k(j, i) = v;
        }
        k(i, i) = kernel_from_sqdist(cfg, 0.0) + cfg.noise_variance + jitter;
    }
    return k;
}

}  // namespace skel::gp
