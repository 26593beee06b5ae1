#pragma once

#include "skel/harness/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace skel::harness {

struct MethodSummary {
    Method method = Method::Skel;
    std::size_t users = 0;
    std::optional<double> mean_final_macro;
    std::optional<double> mean_final_weighted;
    ContradictionStats contradictions;  // summed over users
    EvaluationStats evaluation;         // summed over users
    /// Suspicions per answered post-bootstrap diary.
    std::optional<double> contradiction_rate;
    /// Answered skeptic questions that confirmed the machine.
    std::optional<double> confirm_machine_fraction;
    /// Share of reviewed predictions the annotators left unflagged.
    std::optional<double> evaluation_correctness;
    /// Share of reviewed predictions that were right on the main category.
    std::optional<double> evaluation_accuracy;
};

struct CohortSummary {
    std::string name;
    std::vector<MethodSummary> methods;
    /// Mean final macro-F1 of skel minus gp_never, when both ran.
    std::optional<double> skel_minus_gp_never;
};

std::vector<CohortSummary> summarize(const MetricsBundle& m);

nlohmann::json to_json(const MetricsBundle& m);
/// Throws FormatError on a malformed document.
MetricsBundle metrics_from_json(const nlohmann::json& j);

/// Writes progressive_f1.csv, user_final_f1.csv, contradictions.csv,
/// evaluation.csv, summary.json, metrics.json and one
/// progressive_f1_<cohort>.svg per cohort. Output bytes depend only on `m`.
/// Throws IoError when the directory cannot be created or written.
void report(const MetricsBundle& m, const std::filesystem::path& dir);

/// SVG line chart of the macro-F1 series of one cohort with the
/// active-user count on a secondary axis.
std::string render_f1_chart(const CohortMetrics& c, Timestamp span_start, int period_minutes);

}  // namespace skel::harness
