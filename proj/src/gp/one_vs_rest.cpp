#include "skel/gp/one_vs_rest.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

#include <limits>

namespace skel::gp {

ClassPosterior make_class_posterior(std::vector<double> mean, std::vector<double> stddev) {
    ClassPosterior out;
    out.mean = std::move(mean);
    out.stddev = std::move(stddev);
    if (out.mean.empty()) return out;
    std::size_t best = 0;
    for (std::size_t c = 1; c < out.mean.size(); ++c) {
        if (out.mean[c] > out.mean[best]) best = c;
    }
    double second = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < out.mean.size(); ++c) {
        if (c != best && out.mean[c] > second) second = out.mean[c];
    }
    out.predicted = best;
    out.margin = out.mean.size() > 1 ? out.mean[best] - second : 0.0;
    return out;
}

OneVsRestGp::OneVsRestGp(KernelConfig cfg, Taxonomy taxonomy, Eigen::Index dim,
                         std::size_t capacity)
    : taxonomy_(taxonomy),
      process_(cfg, dim, static_cast<Eigen::Index>(taxonomy.size()), capacity) {}

OneVsRestGp OneVsRestGp::fit(const KernelConfig& cfg, Taxonomy taxonomy, Eigen::Index dim,
                             std::vector<Vector> inputs, const std::vector<ClassIndex>& labels,
                             std::size_t capacity) {
    if (inputs.size() != labels.size()) throw UsageError("inputs and labels differ in length");
    OneVsRestGp model(cfg, taxonomy, dim, capacity);
    if (inputs.empty()) return model;
    const auto k = static_cast<Eigen::Index>(taxonomy.size());
    Matrix y = Matrix::Constant(static_cast<Eigen::Index>(labels.size()), k, -1.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= taxonomy.size()) {
            throw UsageError(fmt::format("label {} outside taxonomy", labels[i]));
        }
        y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
    }
    for (const auto& x : inputs) {
        if (x.size() != dim) throw UsageError("input dimension does not match the model");
    }
    model.process_ = GaussianProcess::fit(cfg, std::move(inputs), y, capacity);
    return model;
}

OneVsRestGp OneVsRestGp::restore(Taxonomy taxonomy, ProcessState state) {
    if (state.outputs != static_cast<Eigen::Index>(taxonomy.size())) {
        throw DataError(fmt::format("saved model has {} outputs, taxonomy has {} classes",
                                    state.outputs, taxonomy.size()));
    }
    OneVsRestGp model(state.config, taxonomy, state.dim, state.capacity);
    model.process_ = GaussianProcess::restore(std::move(state));
    return model;
}

ClassPosterior OneVsRestGp::posterior(const Probe& probe) const {
    const Posterior p = process_.posterior(probe);
    std::vector<double> mean(p.mean.data(), p.mean.data() + p.mean.size());
    return make_class_posterior(std::move(mean), std::vector<double>(classes(), p.stddev()));
}

std::vector<double> OneVsRestGp::one_hot(ClassIndex label) const {
    if (label >= classes()) {
        throw UsageError(fmt::format("label {} outside taxonomy of {} classes", label, classes()));
    }
    std::vector<double> y(classes(), -1.0);
    y[label] = 1.0;
    return y;
}

void OneVsRestGp::update(const Vector& x, ClassIndex label) { process_.extend(x, one_hot(label)); }

void OneVsRestGp::update(const Probe& probe, ClassIndex label) {
    process_.extend(probe, one_hot(label));
}

ClassIndex OneVsRestGp::label_at(std::size_t row) const {
    for (ClassIndex c = 0; c < classes(); ++c) {
        if (process_.target(row, static_cast<Eigen::Index>(c)) > 0.0) return c;
    }
    throw UsageError("training row has no positive class");
}

std::vector<ClassIndex> OneVsRestGp::labels() const {
    std::vector<ClassIndex> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(label_at(i));
    return out;
}

}  // namespace skel::gp
