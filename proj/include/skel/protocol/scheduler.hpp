#pragma once

#include "skel/config.hpp"
#include "skel/engine/skeptical_learner.hpp"
#include "skel/taxonomy.hpp"
#include "skel/time.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace skel::protocol {

struct StudyConfig {
    int bootstrap_days = 7;
    int skeptical_days = 14;
    int evaluation_days = 7;
    int diary_period_minutes = 30;
    double diary_expiry_hours = 8.0;
    double question_expiry_hours = 12.0;
    /// Minutes after midnight at which contradictions and evaluation lists go out.
    int batch_dispatch_minute = 19 * 60;
    Timestamp study_start = default_study_start();

    /// Throws ConfigError for non-positive durations, a period that does not
    /// divide 24 h, a start that is not midnight, or a dispatch time off the grid.
    void validate() const;
    /// Reads the [study] section; missing keys keep their defaults.
    static StudyConfig from_config(const KeyValueConfig& kv);

    int total_days() const { return bootstrap_days + skeptical_days + evaluation_days; }
    Duration period() const { return std::chrono::minutes(diary_period_minutes); }
    std::int64_t slots_per_day() const { return 24 * 60 / diary_period_minutes; }
    Timestamp study_end() const { return study_start + std::chrono::hours(24 * total_days()); }
    Timestamp slot_start(std::int64_t slot) const { return study_start + period() * slot; }
    /// Slot containing t (negative before the study).
    std::int64_t slot_of(Timestamp t) const;
    /// 1-based study day of t.
    int day_of(Timestamp t) const;
    friend bool operator==(const StudyConfig&, const StudyConfig&) = default;
};

enum class Part : std::uint8_t { Before, Bootstrap, Skeptical, Evaluation, Done };
Part part_at(const StudyConfig& cfg, Timestamp t);
engine::Phase phase_of(Part p);

enum class QuestionKind : std::uint8_t { Diary, Skeptic, Relabel, Evaluation };
std::string_view to_string(QuestionKind k);

struct EvaluationItem {
    std::int64_t window_index = 0;
    Timestamp window_start;
    Label predicted;
    friend bool operator==(const EvaluationItem&, const EvaluationItem&) = default;
};

struct Question {
    std::uint64_t id = 0;
    QuestionKind kind = QuestionKind::Diary;
    std::vector<std::int64_t> window_refs;
    Timestamp dispatched_at;
    Timestamp expires_at;
    /// Skeptic and relabel questions: the machine's label and the first answer.
    std::optional<Label> machine_label;
    std::optional<Label> original_label;
    /// Evaluation question: the predictions being reviewed.
    std::vector<EvaluationItem> items;
};

struct DiaryAnswer {
    Label label;
};
/// "Is <time> <predicted label> correct?"
struct SkepticAnswer {
    bool machine_correct = false;
};
struct RelabelAnswer {
    Label label;
};
/// Windows the annotator marked incorrect; empty means "All correct".
struct EvaluationAnswer {
    std::vector<std::int64_t> flagged;
};
using Answer = std::variant<DiaryAnswer, SkepticAnswer, RelabelAnswer, EvaluationAnswer>;

struct Resolution {
    std::int64_t window_index = 0;
    engine::ContradictionResponse response;
};

struct AnswerEvent {
    std::uint64_t question_id = 0;
    QuestionKind kind = QuestionKind::Diary;
    Timestamp answered_at;
    std::optional<engine::Annotation> annotation;       // diary
    std::optional<Resolution> resolution;                // skeptic "Yes" or relabel
    std::optional<Question> follow_up;                   // relabel after skeptic "No"
    std::vector<std::pair<std::int64_t, bool>> verdicts;  // evaluation: (window, correct)
};

struct PhaseClose {
    std::vector<Question> expired;
    /// Suspicions never dispatched; they resolve as expired.
    std::vector<engine::Contradiction> undispatched;
};

/// Question timeline of one participant on a simulated clock. The clock
/// moves in diary-period steps; on each step the caller records answers,
/// expires, feeds engine output, then calls tick() to dispatch.
/// A question is live while now <= expires_at.
class Scheduler {
public:
    Scheduler(StudyConfig cfg, std::string user_id);

    const StudyConfig& config() const { return cfg_; }
    const std::string& user_id() const { return user_; }

    /// Questions dispatched at `now`, which must lie on the slot grid and
    /// not precede the previous tick.
    std::vector<Question> tick(Timestamp now);
    /// Removes and returns questions whose expiry is before `now`.
    std::vector<Question> expire(Timestamp now);
    /// Throws UsageError for an unknown or expired question, or an answer
    /// of the wrong kind.
    AnswerEvent record_answer(std::uint64_t question_id, const Answer& answer, Timestamp now);

    /// Queues a contradiction for the next evening batch.
    void add_suspicion(const engine::Contradiction& c);
    /// Registers an evaluation-phase prediction for the next evaluation list.
    void add_prediction(const EvaluationItem& item);
    /// Ends the skeptical part: every live question expires and queued
    /// suspicions are returned undispatched.
    PhaseClose close_phase(Timestamp now);

    const std::map<std::uint64_t, Question>& live() const { return live_; }
    std::size_t queued_suspicions() const { return suspicions_.size(); }

    /// JSON lines, one per dispatch, answer and expiry.
    const std::vector<std::string>& trace() const { return trace_; }

private:
    Question dispatch(QuestionKind kind, Timestamp now, double expiry_hours);
    void log(const char* event, const Question& q, Timestamp at);

    StudyConfig cfg_;
    std::string user_;
    std::uint64_t next_id_ = 1;
    std::optional<Timestamp> last_tick_;
    std::map<std::uint64_t, Question> live_;
    std::vector<engine::Contradiction> suspicions_;
    std::vector<EvaluationItem> predictions_;
    std::vector<std::string> trace_;
};

/// Rebuilds question lifecycles from trace lines and checks them: every
/// question is dispatched once and then answered or expired at most once,
/// never after its expiry. Throws FormatError on a violation.
struct TraceSummary {
    std::map<QuestionKind, std::size_t> dispatched;
    std::map<QuestionKind, std::size_t> answered;
    std::map<QuestionKind, std::size_t> expired;
    std::size_t open = 0;
};
TraceSummary replay_trace(std::istream& in);

}  // namespace skel::protocol
