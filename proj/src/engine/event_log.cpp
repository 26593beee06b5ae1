#include "skel/engine/event_log.hpp"

#include <json.hpp>

namespace skel::engine {

using nlohmann::json;

std::string step_record(const std::string& user, Timestamp window_start, const EngineOutcome& o,
                        const Taxonomy& taxonomy) {
    const auto& p = o.prediction;
    json j;
    j["type"] = "step";
    j["user"] = user;
    j["window"] = o.window_index;
    j["start"] = format_iso(window_start);
    j["predicted"] = taxonomy.class_name(p.predicted);
    j["margin"] = p.margin;
    j["mean"] = p.mean;
    j["std"] = p.stddev.empty() ? 0.0 : p.stddev.front();
    j["queried"] = o.queried;
    j["suspicious"] = o.suspicious;
    j["trained_label"] = o.trained_on ? json(o.trained_on->label.slug()) : json(nullptr);
    j["source"] = o.trained_on ? json(to_string(o.trained_on->source)) : json(nullptr);
    return j.dump();
}

std::string resolution_record(const std::string& user, const Annotation& a) {
    json j;
    j["type"] = "resolution";
    j["user"] = user;
    j["window"] = a.window_index;
    j["label"] = a.label.slug();
    j["source"] = to_string(a.source);
    j["at"] = format_iso(a.answered_at);
    return j.dump();
}

}  // namespace skel::engine
