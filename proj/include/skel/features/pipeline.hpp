#pragma once

#include "skel/features/feature_row.hpp"
#include "skel/features/sensor_event.hpp"

#include <optional>
#include <span>
#include <vector>

namespace skel::features {

/// Half-open aggregation window [start, start + length) of one user.
struct Window {
    std::string user_id;
    std::int64_t index = 0;
    Timestamp start;
    Duration length = std::chrono::minutes(30);
    std::vector<SensorEvent> events;
};

struct WindowOptions {
    Duration period = std::chrono::minutes(30);
    /// Slot 0 starts here. Defaults to the first event, floored to a period
    /// boundary (boundaries are aligned to midnight UTC).
    std::optional<Timestamp> origin;
    /// Number of windows per user. Defaults to the slot of the last event.
    std::optional<std::int64_t> count;
};

struct WindowedStream {
    std::vector<Window> windows;  // grouped by user (first-appearance order), then index
    std::size_t dropped = 0;      // events outside an explicit origin/count range
};

/// Assigns every event to exactly one window; empty slots are still emitted.
/// An event exactly on a boundary belongs to the later window. Throws
/// UsageError when the period does not divide 24 h.
WindowedStream windowize(std::vector<SensorEvent> events, const WindowOptions& opts = {});

/// Hour bands for the time-of-day booleans.
/// Contiguous (default): morning [6,10) noon [10,14) afternoon [14,18)
/// evening [18,22) night [22,6). Literal: morning [6,9) noon [10,13)
/// afternoon [14,17) evening [18,21) night [22,5), leaving gaps.
enum class TimeBands { Contiguous, Literal };

struct FeatureOptions {
    TimeBands bands = TimeBands::Contiguous;
    /// An activity counts as recognized at this confidence or above.
    double activity_confidence = 50.0;
};

/// Time features of a window starting at `start`.
void compute_time_features(Timestamp start, TimeBands bands, FeatureRow& row);

/// Aggregates one window. Families whose sensor produced no (well-formed)
/// events are marked missing; malformed payloads are skipped with a warning.
FeatureRow compute_features(const Window& w, const FeatureOptions& opts = {});

/// Population mean and variance.
struct MeanVar {
    double mean = 0;
    double var = 0;
};
MeanVar mean_var(std::span<const double> xs);

}  // namespace skel::features
