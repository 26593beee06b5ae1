#include "skel/engine/skeptical_learner.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace skel::engine {

namespace {

constexpr std::array<std::string_view, 2> kPolicyNames{"always", "uncertainty"};
constexpr std::array<std::string_view, 3> kPhaseNames{"bootstrap", "skeptical", "evaluation"};
constexpr std::array<std::string_view, 6> kSourceNames{
    "time_diary",          "contradiction_confirmed_machine", "contradiction_reasserted",
    "contradiction_new_label", "expired_unresolved",          "evaluation_confirmed"};

template <typename Enum, std::size_t N>
Enum parse_named(const std::array<std::string_view, N>& names, std::string_view s, const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<Enum>(i);
    }
    throw ConfigError(fmt::format("unknown {} '{}'", what, s));
}

}  // namespace

std::string_view to_string(QueryPolicy p) { return kPolicyNames[static_cast<std::size_t>(p)]; }
QueryPolicy parse_query_policy(std::string_view s) {
    return parse_named<QueryPolicy>(kPolicyNames, s, "query policy");
}
std::string_view to_string(Phase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }
Phase parse_phase(std::string_view s) { return parse_named<Phase>(kPhaseNames, s, "phase"); }
std::string_view to_string(AnnotationSource s) { return kSourceNames[static_cast<std::size_t>(s)]; }
AnnotationSource parse_annotation_source(std::string_view s) {
    return parse_named<AnnotationSource>(kSourceNames, s, "annotation source");
}

void EngineConfig::validate() const {
    if (!(query_threshold >= 0.0)) throw ConfigError("query_threshold must be >= 0");
    if (!(skeptic_threshold >= 0.0)) throw ConfigError("skeptic_threshold must be >= 0");
}

bool decide_query(const gp::ClassPosterior& p, const EngineConfig& cfg) {
    if (cfg.query_policy == QueryPolicy::Always) return true;
    return p.margin < cfg.query_threshold;
}

bool decide_skeptical(const gp::ClassPosterior& p, ClassIndex user_class, const EngineConfig& cfg) {
    if (!cfg.skepticism || cfg.phase != Phase::Skeptical) return false;
    if (p.mean.empty() || user_class >= p.mean.size() || p.predicted == user_class) return false;
    const double gap = p.mean[p.predicted] - p.mean[user_class];
    const double spread = p.stddev[p.predicted] + p.stddev[user_class];
    // With kappa = +inf and zero spread the product is NaN and this is false.
    return gap > cfg.skeptic_threshold * spread;
}

SkepticalLearner::SkepticalLearner(EngineConfig cfg, gp::KernelConfig kernel, Eigen::Index dim,
                                   std::size_t capacity)
    : cfg_(cfg), model_(kernel, Taxonomy(cfg.granularity), dim, capacity) {
    cfg_.validate();
}

void SkepticalLearner::train(const gp::Vector& x, const Annotation& a) {
    model_.update(x, taxonomy().class_of(a.label));
    trained_.push_back(a);
}

void SkepticalLearner::train(const gp::Probe& probe, const Annotation& a) {
    model_.update(probe, taxonomy().class_of(a.label));
    trained_.push_back(a);
}

EngineOutcome SkepticalLearner::step(const ExampleWindow& w, const std::optional<Annotation>& annotation) {
    if (last_window_ && w.window_index <= *last_window_) {
        throw UsageError(fmt::format("window {} does not follow window {}", w.window_index, *last_window_));
    }
    if (annotation && annotation->window_index != w.window_index) {
        throw UsageError(fmt::format("annotation for window {} given with window {}",
                                     annotation->window_index, w.window_index));
    }
    last_window_ = w.window_index;

    const auto probe = model_.probe(w.features);
    EngineOutcome out;
    out.window_index = w.window_index;
    out.prediction = model_.posterior(probe);

    if (cfg_.phase == Phase::Evaluation) {
        if (cfg_.learn_from_evaluation) {
            evaluated_.emplace(w.window_index, Evaluated{out.prediction.predicted, w.features});
        }
        return out;
    }

    out.queried = decide_query(out.prediction, cfg_);
    if (!out.queried || !annotation) return out;

    const ClassIndex user_class = taxonomy().class_of(annotation->label);
    out.suspicious = decide_skeptical(out.prediction, user_class, cfg_);
    if (out.suspicious) {
        Contradiction c{w.window_index, taxonomy().label_of(out.prediction.predicted), annotation->label,
                        w.start};
        pending_.emplace(w.window_index, Held{c, w.features});
        out.pending_contradiction = c;
        return out;
    }
    Annotation a = *annotation;
    a.source = AnnotationSource::TimeDiary;
    train(probe, a);
    out.trained_on = a;
    return out;
}

Annotation SkepticalLearner::resolve_contradiction(std::int64_t window_index,
                                                   const ContradictionResponse& response,
                                                   Timestamp answered_at) {
    const auto it = pending_.find(window_index);
    if (it == pending_.end()) {
        throw UsageError(fmt::format("no pending contradiction for window {}", window_index));
    }
    const Contradiction& c = it->second.contradiction;
    Annotation a{window_index, c.user_label, AnnotationSource::ContradictionReasserted, answered_at};
    if (std::holds_alternative<ConfirmMachine>(response)) {
        a.label = c.machine_label;
        a.source = AnnotationSource::ContradictionConfirmedMachine;
    } else if (const auto* nl = std::get_if<NewLabel>(&response)) {
        a.label = nl->label;
        a.source = AnnotationSource::ContradictionNewLabel;
    }
    train(it->second.features, a);
    pending_.erase(it);
    return a;
}

Annotation SkepticalLearner::expire_contradiction(std::int64_t window_index, Timestamp at) {
    const auto it = pending_.find(window_index);
    if (it == pending_.end()) {
        throw UsageError(fmt::format("no pending contradiction for window {}", window_index));
    }
    Annotation a{window_index, it->second.contradiction.user_label, AnnotationSource::ExpiredUnresolved, at};
    train(it->second.features, a);
    pending_.erase(it);
    return a;
}

std::optional<Annotation> SkepticalLearner::apply_evaluation_verdict(std::int64_t window_index,
                                                                     bool correct, Timestamp at) {
    const auto it = evaluated_.find(window_index);
    if (it == evaluated_.end()) return std::nullopt;
    std::optional<Annotation> out;
    if (correct) {
        out = Annotation{window_index, taxonomy().label_of(it->second.predicted),
                         AnnotationSource::EvaluationConfirmed, at};
        train(it->second.features, *out);
    }
    evaluated_.erase(it);
    return out;
}

std::vector<Contradiction> SkepticalLearner::pending_contradictions() const {
    std::vector<Contradiction> out;
    out.reserve(pending_.size());
    for (const auto& [_, held] : pending_) out.push_back(held.contradiction);
    return out;
}

}  // namespace skel::engine
