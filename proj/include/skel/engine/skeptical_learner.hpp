#pragma once

#include "skel/gp/one_vs_rest.hpp"
#include "skel/taxonomy.hpp"
#include "skel/time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace skel::engine {

enum class QueryPolicy : std::uint8_t { Always, Uncertainty };
enum class Phase : std::uint8_t { Bootstrap, Skeptical, Evaluation };

std::string_view to_string(QueryPolicy p);
QueryPolicy parse_query_policy(std::string_view s);
std::string_view to_string(Phase p);
Phase parse_phase(std::string_view s);

struct EngineConfig {
    QueryPolicy query_policy = QueryPolicy::Always;
    /// Uncertainty policy: query when the class margin is below this.
    double query_threshold = 0.5;
    /// kappa in m_pred - m_user > kappa * (s_pred + s_user). +inf never fires.
    double skeptic_threshold = 1.0;
    /// false gives the never-contradict baseline.
    bool skepticism = true;
    Phase phase = Phase::Bootstrap;
    Granularity granularity = Granularity::MainCategory;
    /// Train on evaluation-phase predictions the annotator marked correct.
    bool learn_from_evaluation = false;

    /// Throws ConfigError for negative or NaN thresholds.
    void validate() const;
    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct ExampleWindow {
    std::string user_id;
    std::int64_t window_index = 0;
    Timestamp start;
    gp::Vector features;
};

enum class AnnotationSource : std::uint8_t {
    TimeDiary,
    ContradictionConfirmedMachine,
    ContradictionReasserted,
    ContradictionNewLabel,
    ExpiredUnresolved,
    EvaluationConfirmed,
};
std::string_view to_string(AnnotationSource s);
AnnotationSource parse_annotation_source(std::string_view s);

struct Annotation {
    std::int64_t window_index = 0;
    Label label;
    AnnotationSource source = AnnotationSource::TimeDiary;
    Timestamp answered_at;
    friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Contradiction {
    std::int64_t window_index = 0;
    Label machine_label;
    Label user_label;
    Timestamp window_start;
    friend bool operator==(const Contradiction&, const Contradiction&) = default;
};

struct EngineOutcome {
    std::int64_t window_index = 0;
    gp::ClassPosterior prediction;
    bool queried = false;
    bool suspicious = false;
    std::optional<Contradiction> pending_contradiction;
    std::optional<Annotation> trained_on;
};

struct ConfirmMachine {};
struct ReassertOriginal {};
struct NewLabel {
    Label label;
};
using ContradictionResponse = std::variant<ConfirmMachine, ReassertOriginal, NewLabel>;

bool decide_query(const gp::ClassPosterior& p, const EngineConfig& cfg);
/// Never true in bootstrap or evaluation, or with skepticism off.
bool decide_skeptical(const gp::ClassPosterior& p, ClassIndex user_class, const EngineConfig& cfg);

/// Per-user learning loop: predict, maybe query, maybe challenge the
/// answer, train. Suspicious examples are held back until the
/// contradiction is resolved or expires; every window trains at most once.
class SkepticalLearner {
public:
    SkepticalLearner(EngineConfig cfg, gp::KernelConfig kernel, Eigen::Index dim,
                     std::size_t capacity = gp::kDefaultCapacity);

    const EngineConfig& config() const { return cfg_; }
    const Taxonomy& taxonomy() const { return model_.taxonomy(); }
    void set_phase(Phase phase) { cfg_.phase = phase; }

    /// Processes one window. `annotation` is the diary answer, if any.
    /// Throws UsageError when window indices do not strictly increase or the
    /// annotation belongs to another window.
    EngineOutcome step(const ExampleWindow& w, const std::optional<Annotation>& annotation);

    /// Trains on the final label and clears the pending entry. Throws
    /// UsageError when nothing is pending for the window.
    Annotation resolve_contradiction(std::int64_t window_index, const ContradictionResponse& response,
                                     Timestamp answered_at);
    /// Unanswered contradiction: trains on the original label.
    Annotation expire_contradiction(std::int64_t window_index, Timestamp at);

    /// Evaluation answer for a window predicted in the evaluation phase.
    /// Trains on the prediction when it is marked correct and
    /// learn_from_evaluation is set; otherwise a no-op.
    std::optional<Annotation> apply_evaluation_verdict(std::int64_t window_index, bool correct,
                                                       Timestamp at);

    bool has_pending(std::int64_t window_index) const { return pending_.count(window_index) > 0; }
    std::vector<Contradiction> pending_contradictions() const;

    /// Every training event, in training order.
    const std::vector<Annotation>& training_log() const { return trained_; }
    const gp::OneVsRestGp& model() const { return model_; }
    std::optional<std::int64_t> last_window() const { return last_window_; }
    /// Digest of the model; changes whenever the learner trains.
    std::uint64_t state_hash() const { return model_.fingerprint(); }

private:
    friend std::string save_snapshot(const SkepticalLearner& learner);
    friend SkepticalLearner load_snapshot(std::string_view text);

    struct Held {
        Contradiction contradiction;
        gp::Vector features;
    };
    struct Evaluated {
        ClassIndex predicted;
        gp::Vector features;
    };

    void train(const gp::Vector& x, const Annotation& a);
    void train(const gp::Probe& probe, const Annotation& a);

    EngineConfig cfg_;
    gp::OneVsRestGp model_;
    std::optional<std::int64_t> last_window_;
    std::map<std::int64_t, Held> pending_;
    std::map<std::int64_t, Evaluated> evaluated_;
    std::vector<Annotation> trained_;
};

}  // namespace skel::engine
