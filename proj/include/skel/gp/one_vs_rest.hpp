#pragma once

#include "skel/gp/gaussian_process.hpp"
#include "skel/taxonomy.hpp"

#include <vector>

namespace skel::gp {

/// Per-class scores for one example. `predicted` is the argmax of `mean`,
/// ties going to the lowest class index; `margin` is best minus runner-up.
struct ClassPosterior {
    std::vector<double> mean;
    std::vector<double> stddev;
    ClassIndex predicted = 0;
    double margin = 0.0;
};

/// Builds a ClassPosterior from raw class means and a shared std.
ClassPosterior make_class_posterior(std::vector<double> mean, std::vector<double> stddev);

/// One-vs-rest GP classifier: class c regresses +1 on its own examples and
/// -1 on everyone else's. All class regressors see the same inputs with the
/// same kernel, so they are stored as one multi-output process sharing a
/// single Cholesky factor; column c holds class c's targets.
class OneVsRestGp {
public:
    OneVsRestGp(KernelConfig cfg, Taxonomy taxonomy, Eigen::Index dim,
                std::size_t capacity = kDefaultCapacity);

    /// Rebuilds a model from stored training data (batch fit).
    static OneVsRestGp fit(const KernelConfig& cfg, Taxonomy taxonomy, Eigen::Index dim,
                           std::vector<Vector> inputs, const std::vector<ClassIndex>& labels,
                           std::size_t capacity = kDefaultCapacity);

    /// Reinstates a saved model; the process must have one output per class.
    static OneVsRestGp restore(Taxonomy taxonomy, ProcessState state);

    Probe probe(const Vector& x) const { return process_.probe(x); }
    ClassPosterior posterior(const Probe& probe) const;
    ClassPosterior predict(const Vector& x) const { return posterior(probe(x)); }

    /// Extends every class regressor with (x, +1 for `label`, -1 otherwise).
    /// Throws UsageError for a label outside the taxonomy.
    void update(const Vector& x, ClassIndex label);
    void update(const Probe& probe, ClassIndex label);

    const Taxonomy& taxonomy() const { return taxonomy_; }
    std::size_t classes() const { return taxonomy_.size(); }
    const GaussianProcess& process() const { return process_; }
    std::size_t size() const { return process_.size(); }
    /// Class whose +1 target is set on training row `row`.
    ClassIndex label_at(std::size_t row) const;
    std::vector<ClassIndex> labels() const;
    std::uint64_t fingerprint() const { return process_.fingerprint(); }

private:
    std::vector<double> one_hot(ClassIndex label) const;

    Taxonomy taxonomy_;
    GaussianProcess process_;
};

}  // namespace skel::gp
