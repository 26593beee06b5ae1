#pragma once

#include "skel/engine/skeptical_learner.hpp"

#include <string>

namespace skel::engine {

/// One JSON line per engine step:
///   {"type":"step","user":..,"window":..,"start":..,"predicted":..,
///    "margin":..,"mean":[..],"std":..,"queried":..,"suspicious":..,
///    "trained_label":..|null,"source":..|null}
std::string step_record(const std::string& user, Timestamp window_start, const EngineOutcome& outcome,
                        const Taxonomy& taxonomy);

/// One JSON line per contradiction outcome or evaluation-driven update:
///   {"type":"resolution","user":..,"window":..,"label":..,"source":..,"at":..}
std::string resolution_record(const std::string& user, const Annotation& a);

}  // namespace skel::engine
