#pragma once

#include "skel/config.hpp"
#include "skel/engine/skeptical_learner.hpp"
#include "skel/features/sensor_event.hpp"
#include "skel/gp/kernel.hpp"
#include "skel/harness/metrics.hpp"
#include "skel/protocol/scheduler.hpp"
#include "skel/world/annotator.hpp"
#include "skel/world/world.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace skel::harness {

enum class Method : std::uint8_t { Skel, GpNever };
std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct Cohort {
    std::string name;
    world::AnnotatorProfile annotator;
};

struct RunConfig {
    protocol::StudyConfig study;
    engine::EngineConfig engine;
    gp::KernelConfig kernel;
    world::WorldConfig world;
    std::vector<Cohort> cohorts;
    std::vector<std::uint64_t> seeds{1};
    /// Simulated participants per seed; every cohort sees the same worlds.
    std::size_t users = 20;
    std::vector<Method> methods{Method::Skel, Method::GpNever};
    std::size_t capacity = gp::kDefaultCapacity;
    /// Multiplies every standardized input before it reaches the kernel.
    /// The kernel's length scales are fixed, so this sets how far apart
    /// z-scored windows look: at 1 two unrelated windows are ~sqrt(2d)
    /// apart and all covariances vanish.
    double input_scale = 0.0625;
    /// Worker threads; 0 uses the hardware concurrency.
    std::size_t threads = 0;
    /// First study day (1-based) scored by the progressive F1.
    int f1_start_day = 15;
    /// Per-run engine event logs and question traces under out/.
    bool event_logs = true;
    /// Replay dumped worlds from here instead of generating them.
    std::optional<std::filesystem::path> world_dir;
    std::filesystem::path out = "out";

    /// Throws ConfigError.
    void validate() const;
    /// Default cohorts: reliable, inattentive, predictable, tricky presets.
    static RunConfig defaults();
    /// Sections [run], [study], [engine], [kernel], [features], [world] and one
    /// [cohort.<name>] per entry of run.cohorts (annotator keys; kind
    /// defaults to the cohort name). Missing keys keep their defaults.
    static RunConfig from_config(const KeyValueConfig& kv);
};

gp::KernelConfig kernel_from_config(const KeyValueConfig& kv);
engine::EngineConfig engine_from_config(const KeyValueConfig& kv);

/// Raw material of one participant: sensor events plus truth timeline.
struct UserData {
    std::string user_id;
    std::vector<features::SensorEvent> events;
    std::vector<world::SlotTruth> timeline;
};

/// Per-slot standardized model inputs times `input_scale`; nullopt where
/// the phone recorded nothing, which leaves the slot unscored and untrained.
struct PreparedUser {
    std::string user_id;
    std::vector<std::optional<gp::Vector>> inputs;
    std::vector<world::SlotTruth> timeline;
};

/// Throws DataError when the timeline does not cover the study.
PreparedUser prepare_user(const UserData& data, const protocol::StudyConfig& study, double input_scale);

/// Worlds of one seed, from the generator or from a dump directory
/// (seed_<seed>/sensors.jsonl and truth.csv).
std::vector<UserData> load_worlds(const RunConfig& cfg, std::uint64_t seed);
std::vector<UserData> generate_worlds(const RunConfig& cfg, std::uint64_t seed);
std::filesystem::path world_dump_dir(const std::filesystem::path& root, std::uint64_t seed);
/// Writes the dump layout read by load_worlds.
void dump_worlds(const std::vector<UserData>& users, const protocol::StudyConfig& study,
                 const std::filesystem::path& dir);

struct ContradictionStats {
    std::size_t raised = 0;    // suspicious steps
    std::size_t sent = 0;      // skeptic questions dispatched
    std::size_t answered = 0;  // skeptic questions answered
    std::size_t confirmed_machine = 0;
    std::size_t reasserted = 0;
    std::size_t new_label = 0;
    std::size_t expired = 0;
    std::size_t diaries_answered = 0;
    std::size_t diaries_answered_after_bootstrap = 0;
};

struct EvaluationStats {
    std::size_t lists = 0;
    std::size_t lists_answered = 0;
    std::size_t items = 0;    // predictions shown in answered lists
    std::size_t flagged = 0;  // marked incorrect by the annotator
    std::size_t wrong = 0;    // actually wrong on the main category
};

struct UserRun {
    std::uint64_t seed = 0;
    std::string cohort;
    std::string user_id;
    Method method = Method::Skel;
    /// Main-category prediction per slot.
    ClassStream predicted;
    ClassStream truth;
    ContradictionStats contradictions;
    EvaluationStats evaluation;
    std::vector<engine::Annotation> trained;
    std::vector<std::string> event_log;
    std::vector<std::string> trace;
};

/// One participant under one method on the simulated clock. Deterministic
/// in (seed, user_index, cohort, method, cfg).
UserRun simulate_user(const PreparedUser& user, std::uint64_t seed, std::size_t user_index,
                      const Cohort& cohort, Method method, const RunConfig& cfg, bool keep_logs);

struct MethodSeries {
    Method method = Method::Skel;
    std::vector<std::optional<double>> macro;
    std::vector<std::optional<double>> weighted;
    /// Users with a prediction and a truth label at each slot.
    std::vector<std::size_t> users;
};

struct CohortMetrics {
    std::string name;
    std::vector<MethodSeries> series;
};

struct UserSummary {
    std::uint64_t seed = 0;
    std::string cohort;
    std::string user_id;
    Method method = Method::Skel;
    std::optional<double> final_macro;
    std::optional<double> final_weighted;
    ContradictionStats contradictions;
    EvaluationStats evaluation;
};

struct MetricsBundle {
    Timestamp span_start;
    int period_minutes = 30;
    std::vector<CohortMetrics> cohorts;
    std::vector<UserSummary> users;
};

/// Scores the runs of one cohort and method from `first_slot` on.
MethodSeries average_series(const std::vector<const UserRun*>& runs, std::int64_t first_slot);

/// Full study: every seed, user, cohort and method. Event logs go under
/// cfg.out when enabled. Aggregation is independent of thread scheduling.
MetricsBundle run_experiment(const RunConfig& cfg);

}  // namespace skel::harness
