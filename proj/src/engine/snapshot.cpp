#include "skel/engine/snapshot.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <limits>

namespace skel::engine {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "skel-engine-snapshot";

json vec(const gp::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

gp::Vector to_vec(const json& j) {
    const auto xs = j.get<std::vector<double>>();
    return Eigen::Map<const gp::Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

// JSON has no infinity; an unbounded threshold is written as the string "inf".
json threshold(double v) { return std::isinf(v) ? json("inf") : json(v); }
double to_threshold(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

Label to_label(const json& j) {
    const auto l = Label::parse(j.get<std::string>());
    if (!l) throw FormatError(fmt::format("unknown label '{}'", j.get<std::string>()));
    return *l;
}

json annotation(const Annotation& a) {
    return {{"window", a.window_index},
            {"label", a.label.slug()},
            {"source", to_string(a.source)},
            {"at", format_iso(a.answered_at)}};
}

Annotation to_annotation(const json& j) {
    return Annotation{j.at("window").get<std::int64_t>(), to_label(j.at("label")),
                      parse_annotation_source(j.at("source").get<std::string>()),
                      parse_iso(j.at("at").get<std::string>())};
}

}  // namespace

std::string save_snapshot(const SkepticalLearner& learner) {
    const auto& cfg = learner.cfg_;
    const auto st = learner.model_.process().state();
    json inputs = json::array();
    for (const auto& x : st.inputs) inputs.push_back(vec(x));
    json pending = json::array();
    for (const auto& [w, held] : learner.pending_) {
        const auto& c = held.contradiction;
        pending.push_back({{"window", w},
                           {"machine", c.machine_label.slug()},
                           {"user", c.user_label.slug()},
                           {"start", format_iso(c.window_start)},
                           {"features", vec(held.features)}});
    }
    json evaluated = json::array();
    for (const auto& [w, ev] : learner.evaluated_) {
        evaluated.push_back({{"window", w}, {"predicted", ev.predicted}, {"features", vec(ev.features)}});
    }
    json trained = json::array();
    for (const auto& a : learner.trained_) trained.push_back(annotation(a));

    json doc{
        {"format", std::string(kFormatName)},
        {"version", kSnapshotVersion},
        {"engine",
         {{"query_policy", to_string(cfg.query_policy)},
          {"query_threshold", cfg.query_threshold},
          {"skeptic_threshold", threshold(cfg.skeptic_threshold)},
          {"skepticism", cfg.skepticism},
          {"phase", to_string(cfg.phase)},
          {"granularity", to_string(cfg.granularity)},
          {"learn_from_evaluation", cfg.learn_from_evaluation}}},
        {"kernel",
         {{"const_value", st.config.const_value},
          {"rq_length_scale", st.config.rq_length_scale},
          {"rq_alpha", st.config.rq_alpha},
          {"se_length_scale", st.config.se_length_scale},
          {"noise_variance", st.config.noise_variance},
          {"jitter", st.config.jitter}}},
        {"model",
         {{"dim", st.dim},
          {"outputs", st.outputs},
          {"capacity", st.capacity},
          {"jitter", st.jitter},
          {"escalations", st.escalations},
          {"inputs", std::move(inputs)},
          {"targets", st.targets},
          {"factor", st.factor},
          {"projected", st.projected}}},
        {"last_window", learner.last_window_ ? json(*learner.last_window_) : json(nullptr)},
        {"pending", std::move(pending)},
        {"evaluated", std::move(evaluated)},
        {"trained", std::move(trained)},
    };
    return doc.dump();
}

SkepticalLearner load_snapshot(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& ex) {
        throw FormatError(fmt::format("snapshot is not valid JSON: {}", ex.what()));
    }
    if (!doc.is_object() || doc.value("format", "") != kFormatName) {
        throw FormatError("not an engine snapshot");
    }
    if (!doc.contains("version") || !doc["version"].is_number_integer() ||
        doc["version"].get<int>() != kSnapshotVersion) {
        throw FormatError(fmt::format("unsupported snapshot version {} (expected {})",
                                      doc.contains("version") ? doc["version"].dump() : "missing",
                                      kSnapshotVersion));
    }
    try {
        const auto& e = doc.at("engine");
        EngineConfig cfg;
        cfg.query_policy = parse_query_policy(e.at("query_policy").get<std::string>());
        cfg.query_threshold = e.at("query_threshold").get<double>();
        cfg.skeptic_threshold = to_threshold(e.at("skeptic_threshold"));
        cfg.skepticism = e.at("skepticism").get<bool>();
        cfg.phase = parse_phase(e.at("phase").get<std::string>());
        cfg.granularity = parse_granularity(e.at("granularity").get<std::string>());
        cfg.learn_from_evaluation = e.at("learn_from_evaluation").get<bool>();

        const auto& k = doc.at("kernel");
        gp::ProcessState st;
        st.config.const_value = k.at("const_value").get<double>();
        st.config.rq_length_scale = k.at("rq_length_scale").get<double>();
        st.config.rq_alpha = k.at("rq_alpha").get<double>();
        st.config.se_length_scale = k.at("se_length_scale").get<double>();
        st.config.noise_variance = k.at("noise_variance").get<double>();
        st.config.jitter = k.at("jitter").get<double>();

        const auto& m = doc.at("model");
        st.dim = m.at("dim").get<Eigen::Index>();
        st.outputs = m.at("outputs").get<Eigen::Index>();
        st.capacity = m.at("capacity").get<std::size_t>();
        st.jitter = m.at("jitter").get<double>();
        st.escalations = m.at("escalations").get<int>();
        for (const auto& x : m.at("inputs")) st.inputs.push_back(to_vec(x));
        st.targets = m.at("targets").get<std::vector<double>>();
        st.factor = m.at("factor").get<std::vector<double>>();
        st.projected = m.at("projected").get<std::vector<double>>();

        SkepticalLearner learner(cfg, st.config, st.dim, st.capacity);
        learner.model_ = gp::OneVsRestGp::restore(Taxonomy(cfg.granularity), std::move(st));
        if (!doc.at("last_window").is_null()) learner.last_window_ = doc["last_window"].get<std::int64_t>();
        for (const auto& p : doc.at("pending")) {
            SkepticalLearner::Held held{
                Contradiction{p.at("window").get<std::int64_t>(), to_label(p.at("machine")),
                              to_label(p.at("user")), parse_iso(p.at("start").get<std::string>())},
                to_vec(p.at("features"))};
            learner.pending_.emplace(held.contradiction.window_index, std::move(held));
        }
        for (const auto& ev : doc.at("evaluated")) {
            learner.evaluated_.emplace(
                ev.at("window").get<std::int64_t>(),
                SkepticalLearner::Evaluated{ev.at("predicted").get<ClassIndex>(), to_vec(ev.at("features"))});
        }
        for (const auto& a : doc.at("trained")) learner.trained_.push_back(to_annotation(a));
        return learner;
    } catch (const json::exception& ex) {
        throw FormatError(fmt::format("corrupt snapshot: {}", ex.what()));
    } catch (const Error& ex) {
        throw FormatError(fmt::format("corrupt snapshot: {}", ex.what()));
    }
}

}  // namespace skel::engine
