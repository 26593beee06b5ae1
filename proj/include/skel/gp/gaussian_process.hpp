#pragma once

#include "skel/gp/kernel.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace skel::gp {

inline constexpr std::size_t kDefaultCapacity = 2000;

/// Posterior at one probe point. All outputs share the inputs and the
/// kernel, so they share one predictive variance.
struct Posterior {
    Vector mean;
    double variance = 0.0;

    double stddev() const;
};

/// Kernel vector of a probe point already pushed through the triangular
/// factor. A probe is tied to the revision of the process that produced it
/// and can be reused to extend that process at the same point.
class Probe {
public:
    const Vector& point() const { return point_; }

private:
    friend class GaussianProcess;
    Vector point_;
    Vector cross_;     // k(x, X)
    Vector solved_;    // L^{-1} k(x, X)
    double prior_ = 0.0;
    std::uint64_t revision_ = 0;
};

/// Raw contents of a process, for persistence.
struct ProcessState {
    KernelConfig config;
    Eigen::Index dim = 0;
    Eigen::Index outputs = 1;
    std::size_t capacity = kDefaultCapacity;
    double jitter = 0.0;
    int escalations = 0;
    std::vector<Vector> inputs;
    std::vector<double> targets;    // row-major n x outputs
    std::vector<double> factor;     // packed rows of L
    std::vector<double> projected;  // row-major n x outputs
};

/// Exact GP regression with a (possibly multi-column) target, kept as a
/// packed lower-triangular Cholesky factor of K + (rho + jitter) I and the
/// projected targets L^{-1} Y. Extending by one observation appends one
/// factor row, O(n^2). When the training set reaches `capacity` the oldest
/// observation is evicted (FIFO) with a rank-one factor update.
class GaussianProcess {
public:
    GaussianProcess(KernelConfig cfg, Eigen::Index dim, Eigen::Index outputs = 1,
                    std::size_t capacity = kDefaultCapacity);

    /// Batch fit. `targets` is n x outputs. Throws NumericError if the Gram
    /// matrix cannot be factored with jitter <= kMaxJitter.
    static GaussianProcess fit(const KernelConfig& cfg, std::vector<Vector> inputs,
                               const Matrix& targets, std::size_t capacity = kDefaultCapacity);
    static GaussianProcess fit(const KernelConfig& cfg, std::vector<Vector> inputs,
                               const std::vector<double>& targets,
                               std::size_t capacity = kDefaultCapacity);

    /// Reinstates a saved process exactly. Throws DataError when the
    /// pieces have inconsistent sizes.
    static GaussianProcess restore(ProcessState state);
    ProcessState state() const;

    Probe probe(const Vector& x) const;
    Posterior posterior(const Probe& probe) const;
    Posterior predict(const Vector& x) const { return posterior(probe(x)); }

    void extend(const Vector& x, std::span<const double> y);
    void extend(const Vector& x, double y) { extend(x, std::span<const double>(&y, 1)); }
    /// Same as extend(probe.point(), y) but reuses the solve when the probe
    /// is current.
    void extend(const Probe& probe, std::span<const double> y);

    std::size_t size() const { return inputs_.size(); }
    bool empty() const { return inputs_.empty(); }
    Eigen::Index dim() const { return dim_; }
    Eigen::Index outputs() const { return outputs_; }
    std::size_t capacity() const { return capacity_; }
    const KernelConfig& config() const { return cfg_; }
    /// Jitter actually in the factor (>= config().jitter after escalation).
    double jitter() const { return jitter_; }
    /// Number of x10 jitter escalations applied so far.
    int escalations() const { return escalations_; }

    const std::vector<Vector>& inputs() const { return inputs_; }
    double target(std::size_t row, Eigen::Index output) const {
        return targets_[row * static_cast<std::size_t>(outputs_) + static_cast<std::size_t>(output)];
    }
    Matrix targets() const;
    /// Dense copy of the lower-triangular factor.
    Matrix factor() const;

    /// Stable 64-bit digest of inputs, targets and factor.
    std::uint64_t fingerprint() const;

private:
    const double* row(std::size_t i) const { return factor_.data() + i * (i + 1) / 2; }
    void forward_solve(const Vector& rhs, Vector& out) const;
    void append(const Vector& x, const Vector& solved, double pivot_sq, std::span<const double> y);
    void evict_oldest();
    void refit(double jitter, int escalations);

    KernelConfig cfg_;
    Eigen::Index dim_;
    Eigen::Index outputs_;
    std::size_t capacity_;
    double jitter_;
    int escalations_ = 0;
    std::uint64_t revision_ = 0;

    std::vector<Vector> inputs_;
    std::vector<double> targets_;    // row-major n x outputs
    std::vector<double> factor_;     // packed rows of L
    std::vector<double> projected_;  // row-major n x outputs, L^{-1} Y
};

}  // namespace skel::gp
