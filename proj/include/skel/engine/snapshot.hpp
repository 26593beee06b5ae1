#pragma once

#include "skel/engine/skeptical_learner.hpp"

#include <string>
#include <string_view>

namespace skel::engine {

inline constexpr int kSnapshotVersion = 1;

/// Versioned JSON image of a learner: config, exact model factor, pending
/// contradictions and the training log. Doubles are written with enough
/// digits to round-trip.
std::string save_snapshot(const SkepticalLearner& learner);
/// Throws FormatError for an unknown version or a corrupt document.
SkepticalLearner load_snapshot(std::string_view text);

}  // namespace skel::engine
