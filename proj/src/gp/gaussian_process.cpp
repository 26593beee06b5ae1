#include "skel/gp/gaussian_process.hpp"

#include "skel/errors.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <cstring>

namespace skel::gp {

namespace {

// Revisions are globally unique so a probe can never be mistaken as
// current by a diverged copy of the process that produced it.
std::uint64_t next_revision() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

double escalate(double jitter) { return jitter > 0.0 ? jitter * 10.0 : 1e-10; }

void check_point(const Vector& x, Eigen::Index dim) {
    if (x.size() != dim) {
        throw UsageError(fmt::format("point has dimension {}, model expects {}", x.size(), dim));
    }
    if (!x.allFinite()) throw DataError("non-finite model input");
}

struct Fnv1a {
    std::uint64_t h = 1469598103934665603ULL;
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    }
    void doubles(const double* p, std::size_t n) { bytes(p, n * sizeof(double)); }
};

}  // namespace

double Posterior::stddev() const { return std::sqrt(std::max(variance, 0.0)); }

GaussianProcess::GaussianProcess(KernelConfig cfg, Eigen::Index dim, Eigen::Index outputs,
                                 std::size_t capacity)
    : cfg_(cfg), dim_(dim), outputs_(outputs), capacity_(capacity), jitter_(cfg.jitter),
      revision_(next_revision()) {
    cfg_.validate();
    if (dim < 0) throw UsageError("negative dimension");
    if (outputs < 1) throw UsageError("a process needs at least one output");
    if (capacity < 1) throw UsageError("capacity must be >= 1");
}

GaussianProcess GaussianProcess::fit(const KernelConfig& cfg, std::vector<Vector> inputs,
                                     const Matrix& targets, std::size_t capacity) {
    if (static_cast<Eigen::Index>(inputs.size()) != targets.rows()) {
        throw UsageError(fmt::format("{} inputs but {} target rows", inputs.size(), targets.rows()));
    }
    const Eigen::Index dim = inputs.empty() ? 0 : inputs.front().size();
    GaussianProcess gp(cfg, dim, std::max<Eigen::Index>(targets.cols(), 1), capacity);
    for (const auto& x : inputs) check_point(x, dim);
    // Keep the newest `capacity` rows, as a sequence of extensions would.
    const std::size_t skip = inputs.size() > capacity ? inputs.size() - capacity : 0;
    gp.inputs_.assign(std::make_move_iterator(inputs.begin() + static_cast<std::ptrdiff_t>(skip)),
                      std::make_move_iterator(inputs.end()));
    gp.targets_.reserve(gp.inputs_.size() * static_cast<std::size_t>(gp.outputs_));
    for (Eigen::Index r = static_cast<Eigen::Index>(skip); r < targets.rows(); ++r) {
        for (Eigen::Index c = 0; c < targets.cols(); ++c) gp.targets_.push_back(targets(r, c));
    }
    gp.refit(cfg.jitter, 0);
    return gp;
}

GaussianProcess GaussianProcess::fit(const KernelConfig& cfg, std::vector<Vector> inputs,
                                     const std::vector<double>& targets, std::size_t capacity) {
    Matrix y(static_cast<Eigen::Index>(targets.size()), 1);
    for (std::size_t i = 0; i < targets.size(); ++i) y(static_cast<Eigen::Index>(i), 0) = targets[i];
    return fit(cfg, std::move(inputs), y, capacity);
}

GaussianProcess GaussianProcess::restore(ProcessState st) {
    GaussianProcess gp(st.config, st.dim, st.outputs, st.capacity);
    const std::size_t n = st.inputs.size();
    const auto outs = static_cast<std::size_t>(st.outputs);
    if (n > st.capacity || st.targets.size() != n * outs || st.projected.size() != n * outs ||
        st.factor.size() != n * (n + 1) / 2) {
        throw DataError("inconsistent process state");
    }
    for (const auto& x : st.inputs) check_point(x, st.dim);
    if (!(st.jitter >= 0.0) || st.jitter > kMaxJitter * (1.0 + 1e-9)) {
        throw DataError("process state jitter out of range");
    }
    gp.jitter_ = st.jitter;
    gp.escalations_ = st.escalations;
    gp.inputs_ = std::move(st.inputs);
    gp.targets_ = std::move(st.targets);
    gp.factor_ = std::move(st.factor);
    gp.projected_ = std::move(st.projected);
    return gp;
}

ProcessState GaussianProcess::state() const {
    return ProcessState{cfg_,    dim_,          outputs_, capacity_, jitter_, escalations_,
                        inputs_, targets_, factor_,  projected_};
}

void GaussianProcess::refit(double jitter, int escalations) {
    std::vector<Vector> rows = inputs_;
    const auto n = static_cast<Eigen::Index>(rows.size());
    for (;;) {
        if (jitter > kMaxJitter * (1.0 + 1e-9)) {
            throw NumericError(fmt::format(
                "Cholesky factorization failed for {} points with jitter up to {}", n, kMaxJitter));
        }
        Eigen::LLT<Matrix> llt(gram(cfg_, rows, jitter));
        const Matrix& l = llt.matrixLLT();
        bool ok = llt.info() == Eigen::Success;
        for (Eigen::Index i = 0; ok && i < n; ++i) ok = std::isfinite(l(i, i)) && l(i, i) > 0.0;
        if (!ok) {
            jitter = escalate(jitter);
            ++escalations;
            continue;
        }
        factor_.clear();
        factor_.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) factor_.push_back(l(i, j));
        }
        Matrix y = targets();
        Matrix proj = llt.matrixL().solve(y);
        projected_.assign(static_cast<std::size_t>(n * outputs_), 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index c = 0; c < outputs_; ++c) {
                projected_[static_cast<std::size_t>(i * outputs_ + c)] = proj(i, c);
            }
        }
        jitter_ = jitter;
        escalations_ = escalations;
        revision_ = next_revision();
        return;
    }
}

void GaussianProcess::forward_solve(const Vector& rhs, Vector& out) const {
    const auto n = inputs_.size();
    out.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = row(i);
        double acc = rhs[static_cast<Eigen::Index>(i)];
        if (i > 0) {
            acc -= Eigen::Map<const Vector>(r, static_cast<Eigen::Index>(i))
                       .dot(out.head(static_cast<Eigen::Index>(i)));
        }
        out[static_cast<Eigen::Index>(i)] = acc / r[i];
    }
}

Probe GaussianProcess::probe(const Vector& x) const {
    check_point(x, dim_);
    Probe p;
    p.point_ = x;
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    p.cross_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p.cross_[i] = kernel_from_sqdist(cfg_, (inputs_[static_cast<std::size_t>(i)] - x).squaredNorm());
    }
    forward_solve(p.cross_, p.solved_);
    p.prior_ = kernel_from_sqdist(cfg_, 0.0);
    p.revision_ = revision_;
    return p;
}

Posterior GaussianProcess::posterior(const Probe& probe) const {
    if (probe.revision_ != revision_) throw UsageError("probe is stale for this process");
    Posterior out;
    out.mean = Vector::Zero(outputs_);
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = probe.solved_[i];
        const double* v = projected_.data() + i * outputs_;
        for (Eigen::Index c = 0; c < outputs_; ++c) out.mean[c] += w * v[c];
    }
    out.variance = std::max(probe.prior_ - probe.solved_.squaredNorm(), 0.0);
    return out;
}

void GaussianProcess::extend(const Vector& x, std::span<const double> y) {
    extend(probe(x), y);
}

void GaussianProcess::extend(const Probe& p, std::span<const double> y) {
    if (static_cast<Eigen::Index>(y.size()) != outputs_) {
        throw UsageError(fmt::format("expected {} target values, got {}", outputs_, y.size()));
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw DataError("non-finite target");
    }
    if (inputs_.size() >= capacity_) {
        evict_oldest();
        extend(probe(p.point()), y);
        return;
    }
    if (p.revision_ != revision_) {
        extend(probe(p.point()), y);
        return;
    }

    const double diag = p.prior_ + cfg_.noise_variance + jitter_;
    const double pivot_sq = diag - p.solved_.squaredNorm();
    if (!(pivot_sq > 0.0) || !std::isfinite(pivot_sq)) {
        inputs_.push_back(p.point_);
        targets_.insert(targets_.end(), y.begin(), y.end());
        refit(escalate(jitter_), escalations_ + 1);
        return;
    }
    append(p.point_, p.solved_, pivot_sq, y);
}

void GaussianProcess::append(const Vector& x, const Vector& solved, double pivot_sq,
                             std::span<const double> y) {
    const auto n = inputs_.size();
    const double pivot = std::sqrt(pivot_sq);
    factor_.insert(factor_.end(), solved.data(), solved.data() + n);
    factor_.push_back(pivot);
    const auto outs = static_cast<std::size_t>(outputs_);
    std::vector<double> acc(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double w = solved[static_cast<Eigen::Index>(i)];
        const double* v = projected_.data() + i * outs;
        for (std::size_t c = 0; c < outs; ++c) acc[c] -= w * v[c];
    }
    for (std::size_t c = 0; c < outs; ++c) projected_.push_back(acc[c] / pivot);
    inputs_.push_back(x);
    targets_.insert(targets_.end(), y.begin(), y.end());
    revision_ = next_revision();
}

void GaussianProcess::evict_oldest() {
    const std::size_t n = inputs_.size();
    if (n == 0) return;
    const std::size_t m = n - 1;
    // Trailing block L22 and the dropped column l: K22 = L22 L22^T + l l^T.
    std::vector<double> next;
    next.reserve(m * (m + 1) / 2);
    Vector col(static_cast<Eigen::Index>(m));
    for (std::size_t i = 1; i < n; ++i) {
        const double* r = row(i);
        col[static_cast<Eigen::Index>(i - 1)] = r[0];
        next.insert(next.end(), r + 1, r + i + 1);
    }
    auto at = [&next](std::size_t i, std::size_t j) -> double& { return next[i * (i + 1) / 2 + j]; };
    for (std::size_t k = 0; k < m; ++k) {
        const double lkk = at(k, k);
        const double xk = col[static_cast<Eigen::Index>(k)];
        const double r = std::hypot(lkk, xk);
        const double c = r / lkk;
        const double s = xk / lkk;
        at(k, k) = r;
        for (std::size_t i = k + 1; i < m; ++i) {
            double& lik = at(i, k);
            lik = (lik + s * col[static_cast<Eigen::Index>(i)]) / c;
            col[static_cast<Eigen::Index>(i)] = c * col[static_cast<Eigen::Index>(i)] - s * lik;
        }
    }
    factor_ = std::move(next);
    inputs_.erase(inputs_.begin());
    targets_.erase(targets_.begin(), targets_.begin() + outputs_);

    // Reproject the targets through the updated factor.
    const auto outs = static_cast<std::size_t>(outputs_);
    projected_.assign(m * outs, 0.0);
    for (std::size_t c = 0; c < outs; ++c) {
        for (std::size_t i = 0; i < m; ++i) {
            const double* r = row(i);
            double acc = targets_[i * outs + c];
            for (std::size_t j = 0; j < i; ++j) acc -= r[j] * projected_[j * outs + c];
            projected_[i * outs + c] = acc / r[i];
        }
    }
    revision_ = next_revision();
}

Matrix GaussianProcess::targets() const {
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    Matrix y(n, outputs_);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < outputs_; ++c) y(i, c) = target(static_cast<std::size_t>(i), c);
    }
    return y;
}

Matrix GaussianProcess::factor() const {
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* r = row(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = r[j];
    }
    return l;
}

std::uint64_t GaussianProcess::fingerprint() const {
    Fnv1a h;
    const std::uint64_t header[3] = {static_cast<std::uint64_t>(inputs_.size()),
                                     static_cast<std::uint64_t>(dim_),
                                     static_cast<std::uint64_t>(outputs_)};
    h.bytes(header, sizeof(header));
    for (const auto& x : inputs_) h.doubles(x.data(), static_cast<std::size_t>(x.size()));
    h.doubles(targets_.data(), targets_.size());
    h.doubles(factor_.data(), factor_.size());
    return h.h;
}

}  // namespace skel::gp
