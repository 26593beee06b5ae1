#pragma once

#include <Eigen/Core>

#include <vector>

namespace skel::gp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Hyperparameters of the composite covariance
///
///   k(a, b) = c + (1 + r^2 / (2 alpha l_rq^2))^(-alpha) + exp(-r^2 / (2 l_se^2))
///
/// with r = |a - b|. `noise_variance` is the white-noise term, added only on
/// the training diagonal. `jitter` is extra diagonal regularization for the
/// factorization and is escalated x10 (up to 1e-4) when it fails.
/// Hyperparameters are fixed; nothing is optimized.
struct KernelConfig {
    double const_value = 1.0;
    double rq_length_scale = 0.2;
    double rq_alpha = 1.0;
    double se_length_scale = 1.0;
    double noise_variance = 1e-8;
    double jitter = 1e-8;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

inline constexpr double kMaxJitter = 1e-4;

double squared_distance(const Vector& a, const Vector& b);

/// Covariance as a function of squared distance, without the white-noise term.
double kernel_from_sqdist(const KernelConfig& cfg, double r2);

/// Rational-quadratic component alone.
double rational_quadratic(const KernelConfig& cfg, double r2);
/// Squared-exponential component alone.
double squared_exponential(const KernelConfig& cfg, double r2);

/// Full covariance. `same_observation` adds the white-noise variance; it is
/// set only for a training point against itself. Throws UsageError on a
/// dimension mismatch.
double kernel_eval(const KernelConfig& cfg, const Vector& a, const Vector& b,
                   bool same_observation = false);

/// Regularized Gram matrix: K + (noise_variance + jitter) I. Throws DataError
/// on non-finite input and UsageError on ragged rows.
Matrix gram(const KernelConfig& cfg, const std::vector<Vector>& rows);
Matrix gram(const KernelConfig& cfg, const std::vector<Vector>& rows, double jitter);

}  // namespace skel::gp
