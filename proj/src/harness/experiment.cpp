#include "skel/harness/experiment.hpp"

#include "skel/engine/event_log.hpp"
#include "skel/errors.hpp"
#include "skel/features/pipeline.hpp"
#include "skel/features/sensor_io.hpp"
#include "skel/features/standardizer.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace skel::harness {

namespace {

using protocol::Question;
using protocol::QuestionKind;

constexpr std::array<std::string_view, 2> kMethodNames{"skel", "gp_never"};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::uint64_t parse_seed(const std::string& s) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw ConfigError(fmt::format("run.seeds: bad seed '{}'", s));
    return v;
}

std::size_t to_size(std::int64_t v, const char* key) {
    if (v < 0) throw ConfigError(fmt::format("{} must not be negative", key));
    return static_cast<std::size_t>(v);
}

}  // namespace

std::string_view to_string(Method m) { return kMethodNames[static_cast<std::size_t>(m)]; }

Method parse_method(std::string_view s) {
    for (std::size_t i = 0; i < kMethodNames.size(); ++i) {
        if (kMethodNames[i] == s) return static_cast<Method>(i);
    }
    throw ConfigError(fmt::format("unknown method '{}'", s));
}

gp::KernelConfig kernel_from_config(const KeyValueConfig& kv) {
    kv.reject_unknown("kernel", {"const_value", "rq_length_scale", "rq_alpha", "se_length_scale", "noise_variance",
                                 "jitter"});
    gp::KernelConfig k;
    k.const_value = kv.get_double("kernel.const_value", k.const_value);
    k.rq_length_scale = kv.get_double("kernel.rq_length_scale", k.rq_length_scale);
    k.rq_alpha = kv.get_double("kernel.rq_alpha", k.rq_alpha);
    k.se_length_scale = kv.get_double("kernel.se_length_scale", k.se_length_scale);
    k.noise_variance = kv.get_double("kernel.noise_variance", k.noise_variance);
    k.jitter = kv.get_double("kernel.jitter", k.jitter);
    k.validate();
    return k;
}

engine::EngineConfig engine_from_config(const KeyValueConfig& kv) {
    kv.reject_unknown("engine", {"query_policy", "query_threshold", "skeptic_threshold", "skepticism", "granularity",
                                 "learn_from_evaluation"});
    engine::EngineConfig e;
    if (kv.has("engine.query_policy")) e.query_policy = engine::parse_query_policy(kv.get_string("engine.query_policy", ""));
    e.query_threshold = kv.get_double("engine.query_threshold", e.query_threshold);
    e.skeptic_threshold = kv.get_double("engine.skeptic_threshold", e.skeptic_threshold);
    e.skepticism = kv.get_bool("engine.skepticism", e.skepticism);
    if (kv.has("engine.granularity")) e.granularity = parse_granularity(kv.get_string("engine.granularity", ""));
    e.learn_from_evaluation = kv.get_bool("engine.learn_from_evaluation", e.learn_from_evaluation);
    e.validate();
    return e;
}

void RunConfig::validate() const {
    study.validate();
    engine.validate();
    kernel.validate();
    world.validate();
    if (study.diary_period_minutes != 30) throw ConfigError("the simulated world uses 30-minute slots");
    if (world.days != study.total_days()) {
        throw ConfigError(fmt::format("world covers {} days but the study lasts {}", world.days, study.total_days()));
    }
    if (world.start != study.study_start) throw ConfigError("world and study must start at the same instant");
    if (users == 0) throw ConfigError("run.users must be at least 1");
    if (seeds.empty()) throw ConfigError("run.seeds is empty");
    if (methods.empty()) throw ConfigError("run.methods is empty");
    if (cohorts.empty()) throw ConfigError("run.cohorts is empty");
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
        cohorts[i].annotator.validate();
        for (std::size_t j = 0; j < i; ++j) {
            if (cohorts[i].name == cohorts[j].name) throw ConfigError(fmt::format("duplicate cohort '{}'", cohorts[i].name));
        }
    }
    if (!(input_scale > 0.0) || !std::isfinite(input_scale)) throw ConfigError("features.input_scale must be positive");
    if (capacity < 2) throw ConfigError("run.capacity must be at least 2");
    if (f1_start_day < 1 || f1_start_day > study.total_days()) {
        throw ConfigError("run.f1_start_day must be a study day");
    }
}

RunConfig RunConfig::defaults() {
    RunConfig cfg;
    for (const auto kind : {world::AnnotatorKind::Reliable, world::AnnotatorKind::Inattentive,
                            world::AnnotatorKind::Predictable, world::AnnotatorKind::Tricky}) {
        cfg.cohorts.push_back({std::string(world::to_string(kind)), world::AnnotatorProfile::preset(kind)});
    }
    return cfg;
}

RunConfig RunConfig::from_config(const KeyValueConfig& kv) {
    kv.reject_unknown("run", {"seeds", "users", "methods", "cohorts", "capacity", "threads", "f1_start_day",
                              "event_logs", "world_dir", "out"});
    RunConfig cfg = defaults();
    cfg.study = protocol::StudyConfig::from_config(kv);
    cfg.engine = engine_from_config(kv);
    cfg.kernel = kernel_from_config(kv);
    cfg.world = world::WorldConfig::from_config(kv);
    if (!kv.has("world.days")) cfg.world.days = cfg.study.total_days();
    if (!kv.has("world.start")) cfg.world.start = cfg.study.study_start;

    if (kv.has("run.seeds")) {
        cfg.seeds.clear();
        for (const auto& s : split_list(kv.get_string("run.seeds", ""))) cfg.seeds.push_back(parse_seed(s));
    }
    cfg.users = to_size(kv.get_int("run.users", static_cast<std::int64_t>(cfg.users)), "run.users");
    if (kv.has("run.methods")) {
        cfg.methods.clear();
        for (const auto& m : split_list(kv.get_string("run.methods", ""))) cfg.methods.push_back(parse_method(m));
    }
    if (kv.has("run.cohorts")) {
        cfg.cohorts.clear();
        for (const auto& name : split_list(kv.get_string("run.cohorts", ""))) {
            const std::string section = "cohort." + name;
            KeyValueConfig local = kv;
            if (!local.has(section + ".kind")) local.set(section + ".kind", name);
            cfg.cohorts.push_back({name, world::AnnotatorProfile::from_config(local, section)});
        }
    }
    for (const auto& [key, value] : kv.values()) {
        if (key.rfind("cohort.", 0) != 0) continue;
        const auto dot = key.find('.', 7);
        const auto name = key.substr(7, dot == std::string::npos ? std::string::npos : dot - 7);
        if (std::none_of(cfg.cohorts.begin(), cfg.cohorts.end(), [&](const Cohort& c) { return c.name == name; })) {
            throw ConfigError(fmt::format("section [cohort.{}] is not listed in run.cohorts", name));
        }
    }
    kv.reject_unknown("features", {"input_scale"});
    cfg.input_scale = kv.get_double("features.input_scale", cfg.input_scale);
    cfg.capacity = to_size(kv.get_int("run.capacity", static_cast<std::int64_t>(cfg.capacity)), "run.capacity");
    cfg.threads = to_size(kv.get_int("run.threads", 0), "run.threads");
    cfg.f1_start_day = static_cast<int>(kv.get_int("run.f1_start_day", cfg.f1_start_day));
    cfg.event_logs = kv.get_bool("run.event_logs", cfg.event_logs);
    if (kv.has("run.world_dir")) cfg.world_dir = kv.get_string("run.world_dir", "");
    cfg.out = kv.get_string("run.out", cfg.out.string());
    cfg.validate();
    return cfg;
}

PreparedUser prepare_user(const UserData& data, const protocol::StudyConfig& study, double input_scale) {
    const auto n = static_cast<std::size_t>(study.total_days() * study.slots_per_day());
    if (data.timeline.size() != n) {
        throw DataError(fmt::format("{}: truth covers {} slots, the study has {}", data.user_id, data.timeline.size(), n));
    }
    PreparedUser out;
    out.user_id = data.user_id;
    out.timeline = data.timeline;
    out.inputs.resize(n);
    const auto stream = features::windowize(
        data.events, {.period = study.period(), .origin = study.study_start, .count = static_cast<std::int64_t>(n)});
    features::OnlineStandardizer standardizer;
    for (const auto& w : stream.windows) {
        if (w.user_id != data.user_id) {
            throw DataError(fmt::format("sensor events of '{}' mixed into '{}'", w.user_id, data.user_id));
        }
        if (w.events.empty()) continue;
        out.inputs[static_cast<std::size_t>(w.index)] =
            input_scale * standardizer.transform(features::compute_features(w)).values;
    }
    return out;
}

std::filesystem::path world_dump_dir(const std::filesystem::path& root, std::uint64_t seed) {
    return root / fmt::format("seed_{}", seed);
}

std::vector<UserData> generate_worlds(const RunConfig& cfg, std::uint64_t seed) {
    std::vector<UserData> out;
    out.reserve(cfg.users);
    for (std::size_t u = 0; u < cfg.users; ++u) {
        auto w = world::generate_user(seed, u, cfg.world);
        out.push_back({std::move(w.user_id), std::move(w.events), std::move(w.timeline)});
    }
    return out;
}

void dump_worlds(const std::vector<UserData>& users, const protocol::StudyConfig& study,
                 const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    std::ofstream sensors(dir / "sensors.jsonl", std::ios::binary);
    std::ofstream truth(dir / "truth.csv", std::ios::binary);
    if (!sensors || !truth) throw IoError(fmt::format("cannot write world dump in {}", dir.string()));
    world::WorldConfig wcfg;
    wcfg.start = study.study_start;
    world::write_truth_header(truth);
    for (const auto& u : users) {
        features::write_sensor_log(sensors, u.events, features::SensorLogFormat::JsonLines);
        world::UserWorld w;
        w.user_id = u.user_id;
        w.timeline = u.timeline;
        world::write_truth(truth, w, wcfg);
    }
    if (!sensors || !truth) throw IoError(fmt::format("write failed in {}", dir.string()));
}

std::vector<UserData> load_worlds(const RunConfig& cfg, std::uint64_t seed) {
    if (!cfg.world_dir) return generate_worlds(cfg, seed);
    const auto dir = world_dump_dir(*cfg.world_dir, seed);
    std::ifstream truth_in(dir / "truth.csv");
    if (!truth_in) throw IoError(fmt::format("cannot open {}", (dir / "truth.csv").string()));
    auto truth = world::read_truth(truth_in);
    auto events = features::read_sensor_log((dir / "sensors.jsonl").string());
    if (truth.size() < cfg.users) {
        throw ConfigError(fmt::format("{} holds {} users, run.users is {}", dir.string(), truth.size(), cfg.users));
    }
    truth.resize(cfg.users);
    std::map<std::string, std::size_t> index;
    std::vector<UserData> out;
    for (auto& [id, timeline] : truth) {
        index[id] = out.size();
        out.push_back({id, {}, std::move(timeline)});
    }
    for (auto& e : events) {
        const auto it = index.find(e.user_id);
        if (it != index.end()) out[it->second].events.push_back(std::move(e));
    }
    return out;
}

namespace {

struct Inbox {
    Timestamp due;
    std::uint64_t question_id = 0;
    protocol::Answer answer;
};

/// Latency streams are keyed by question kind and subject so that both
/// methods see the same diary timing.
std::uint64_t latency_index(QuestionKind kind, std::int64_t subject) {
    return (static_cast<std::uint64_t>(kind) << 40) + static_cast<std::uint64_t>(subject);
}

class UserSimulation {
public:
    UserSimulation(const PreparedUser& user, std::uint64_t seed, std::size_t user_index, const Cohort& cohort,
                   Method method, const RunConfig& cfg, bool keep_logs)
        : user_(user),
          seed_(seed),
          user_index_(user_index),
          profile_(cohort.annotator),
          cfg_(cfg),
          keep_logs_(keep_logs),
          study_(cfg.study),
          slots_(study_.total_days() * study_.slots_per_day()),
          bootstrap_end_(study_.bootstrap_days * study_.slots_per_day()),
          skeptical_end_((study_.bootstrap_days + study_.skeptical_days) * study_.slots_per_day()),
          learner_(engine_config(cfg, method), cfg.kernel, static_cast<Eigen::Index>(features::kFeatureCount),
                   cfg.capacity),
          scheduler_(study_, user.user_id),
          diary_(static_cast<std::size_t>(slots_)),
          diary_done_(static_cast<std::size_t>(slots_), false) {
        if (static_cast<std::int64_t>(user.timeline.size()) != slots_ ||
            static_cast<std::int64_t>(user.inputs.size()) != slots_) {
            throw DataError(fmt::format("{}: prepared data does not cover the study", user.user_id));
        }
        run_.seed = seed;
        run_.cohort = cohort.name;
        run_.user_id = user.user_id;
        run_.method = method;
        run_.predicted.resize(static_cast<std::size_t>(slots_));
        run_.truth.reserve(static_cast<std::size_t>(slots_));
        for (const auto& t : user.timeline) run_.truth.push_back(static_cast<ClassIndex>(t.truth.main()));
    }

    UserRun run() {
        for (std::int64_t k = 0; k <= slots_; ++k) {
            const Timestamp now = study_.slot_start(k);
            deliver(now);
            for (const auto& q : scheduler_.expire(now)) on_expired(q, now);
            step_ready(now);
            if (k == skeptical_end_) close_skeptical(now);
            if (k < slots_) {
                for (const auto& q : scheduler_.tick(now)) on_dispatch(q);
            }
        }
        // Questions dispatched near the end stay answerable until they expire.
        for (std::int64_t k = slots_ + 1; !scheduler_.live().empty(); ++k) {
            const Timestamp now = study_.slot_start(k);
            deliver(now);
            for (const auto& q : scheduler_.expire(now)) on_expired(q, now);
        }
        run_.trained = learner_.training_log();
        if (keep_logs_) run_.trace = scheduler_.trace();
        return std::move(run_);
    }

private:
    static engine::EngineConfig engine_config(const RunConfig& cfg, Method method) {
        auto e = cfg.engine;
        e.phase = engine::Phase::Bootstrap;
        if (method == Method::GpNever) e.skepticism = false;
        return e;
    }

    const world::SlotTruth& slot(std::int64_t w) const { return user_.timeline[static_cast<std::size_t>(w)]; }

    engine::Phase phase_of_window(std::int64_t w) const {
        if (w < bootstrap_end_) return engine::Phase::Bootstrap;
        if (w < skeptical_end_) return engine::Phase::Skeptical;
        return engine::Phase::Evaluation;
    }

    void schedule(const Question& q, protocol::Answer answer, std::int64_t subject) {
        auto rng = world::derive_rng(seed_, user_index_, world::purpose::kLatency, latency_index(q.kind, subject));
        const Duration expiry = q.expires_at - q.dispatched_at;
        const Timestamp at = q.dispatched_at + world::answer_delay(expiry, rng);
        const auto period = study_.period();
        const auto offset = at - study_.study_start;
        Timestamp due = study_.study_start + period * ((offset.count() + period.count() - 1) / period.count());
        due = std::max(due, q.dispatched_at + period);
        inbox_.push_back({due, q.id, std::move(answer)});
    }

    void deliver(Timestamp now) {
        std::stable_sort(inbox_.begin(), inbox_.end(), [](const Inbox& a, const Inbox& b) {
            return a.due != b.due ? a.due < b.due : a.question_id < b.question_id;
        });
        std::size_t i = 0;
        for (; i < inbox_.size() && inbox_[i].due <= now; ++i) {
            if (scheduler_.live().count(inbox_[i].question_id) == 0) continue;
            on_answer(scheduler_.record_answer(inbox_[i].question_id, inbox_[i].answer, now), now);
        }
        inbox_.erase(inbox_.begin(), inbox_.begin() + static_cast<std::ptrdiff_t>(i));
    }

    void log_resolution(const engine::Annotation& a) {
        if (keep_logs_) run_.event_log.push_back(engine::resolution_record(user_.user_id, a));
    }

    void resolve(const protocol::Resolution& r, Timestamp now) {
        if (!learner_.has_pending(r.window_index)) return;
        log_resolution(learner_.resolve_contradiction(r.window_index, r.response, now));
        auto& s = run_.contradictions;
        std::visit(
            [&s](const auto& resp) {
                using T = std::decay_t<decltype(resp)>;
                if constexpr (std::is_same_v<T, engine::ConfirmMachine>) ++s.confirmed_machine;
                if constexpr (std::is_same_v<T, engine::ReassertOriginal>) ++s.reasserted;
                if constexpr (std::is_same_v<T, engine::NewLabel>) ++s.new_label;
            },
            r.response);
    }

    void on_answer(const protocol::AnswerEvent& ev, Timestamp now) {
        switch (ev.kind) {
            case QuestionKind::Diary: {
                const auto w = ev.annotation->window_index;
                diary_[static_cast<std::size_t>(w)] = ev.annotation;
                diary_done_[static_cast<std::size_t>(w)] = true;
                ++run_.contradictions.diaries_answered;
                if (w >= bootstrap_end_) ++run_.contradictions.diaries_answered_after_bootstrap;
                break;
            }
            case QuestionKind::Skeptic:
                ++run_.contradictions.answered;
                if (ev.resolution) resolve(*ev.resolution, now);
                if (ev.follow_up) on_dispatch(*ev.follow_up);
                break;
            case QuestionKind::Relabel:
                if (ev.resolution) resolve(*ev.resolution, now);
                break;
            case QuestionKind::Evaluation:
                for (const auto& [w, correct] : ev.verdicts) {
                    if (auto a = learner_.apply_evaluation_verdict(w, correct, now)) log_resolution(*a);
                }
                break;
        }
    }

    void on_expired(const Question& q, Timestamp now) {
        switch (q.kind) {
            case QuestionKind::Diary: diary_done_[static_cast<std::size_t>(q.window_refs.front())] = true; break;
            case QuestionKind::Skeptic:
            case QuestionKind::Relabel: {
                const auto w = q.window_refs.front();
                if (learner_.has_pending(w)) {
                    log_resolution(learner_.expire_contradiction(w, now));
                    ++run_.contradictions.expired;
                }
                break;
            }
            case QuestionKind::Evaluation: break;
        }
    }

    void on_dispatch(const Question& q) {
        switch (q.kind) {
            case QuestionKind::Diary: {
                const auto w = q.window_refs.front();
                auto rng = world::derive_rng(seed_, user_index_, world::purpose::kDiary, static_cast<std::uint64_t>(w));
                if (const auto label = world::answer_diary(profile_, slot(w).truth, slot(w).routine, rng)) {
                    schedule(q, protocol::DiaryAnswer{*label}, w);
                }
                break;
            }
            case QuestionKind::Skeptic: {
                ++run_.contradictions.sent;
                const auto w = q.window_refs.front();
                auto rng = world::derive_rng(seed_, user_index_, world::purpose::kContradiction,
                                             static_cast<std::uint64_t>(w));
                if (!world::responds(profile_, rng)) break;
                const auto response = world::answer_contradiction(profile_, *q.original_label, *q.machine_label,
                                                                   slot(w).truth, rng);
                if (std::holds_alternative<engine::ConfirmMachine>(response)) {
                    schedule(q, protocol::SkepticAnswer{true}, w);
                    break;
                }
                const Label relabel = std::holds_alternative<engine::NewLabel>(response)
                                          ? std::get<engine::NewLabel>(response).label
                                          : *q.original_label;
                if (world::responds(profile_, rng)) relabels_[w] = relabel;
                schedule(q, protocol::SkepticAnswer{false}, w);
                break;
            }
            case QuestionKind::Relabel: {
                const auto w = q.window_refs.front();
                const auto it = relabels_.find(w);
                if (it == relabels_.end()) break;
                schedule(q, protocol::RelabelAnswer{it->second}, w);
                relabels_.erase(it);
                break;
            }
            case QuestionKind::Evaluation: {
                ++run_.evaluation.lists;
                const auto day = study_.day_of(q.dispatched_at);
                auto rng = world::derive_rng(seed_, user_index_, world::purpose::kEvaluation,
                                             static_cast<std::uint64_t>(day));
                if (!world::responds(profile_, rng)) break;
                std::vector<world::Judged> judged;
                for (const auto& item : q.items) {
                    judged.push_back({item.window_index, item.predicted, slot(item.window_index).truth});
                }
                auto flagged = world::answer_evaluation(profile_, judged, rng);
                auto& e = run_.evaluation;
                ++e.lists_answered;
                e.items += judged.size();
                e.flagged += flagged.size();
                for (const auto& j : judged) e.wrong += j.predicted.main() != j.truth.main();
                schedule(q, protocol::EvaluationAnswer{std::move(flagged)}, day);
                break;
            }
        }
    }

    void step_ready(Timestamp now) {
        while (next_ < slots_ && study_.slot_start(next_ + 1) <= now &&
               (next_ >= skeptical_end_ || diary_done_[static_cast<std::size_t>(next_)])) {
            step(next_++);
        }
    }

    void step(std::int64_t w) {
        const auto& input = user_.inputs[static_cast<std::size_t>(w)];
        if (!input) return;
        const auto phase = phase_of_window(w);
        learner_.set_phase(phase);
        const Timestamp start = study_.slot_start(w);
        const auto outcome = learner_.step({user_.user_id, w, start, *input}, diary_[static_cast<std::size_t>(w)]);
        const Label predicted = learner_.taxonomy().label_of(outcome.prediction.predicted);
        run_.predicted[static_cast<std::size_t>(w)] = static_cast<ClassIndex>(predicted.main());
        if (outcome.pending_contradiction) {
            ++run_.contradictions.raised;
            if (!skeptical_closed_) scheduler_.add_suspicion(*outcome.pending_contradiction);
        }
        if (phase == engine::Phase::Evaluation) scheduler_.add_prediction({w, start, predicted});
        if (keep_logs_) {
            run_.event_log.push_back(engine::step_record(user_.user_id, start, outcome, learner_.taxonomy()));
        }
    }

    void close_skeptical(Timestamp now) {
        const auto closed = scheduler_.close_phase(now);
        skeptical_closed_ = true;
        for (const auto& q : closed.expired) on_expired(q, now);
        for (const auto& c : closed.undispatched) {
            if (learner_.has_pending(c.window_index)) {
                log_resolution(learner_.expire_contradiction(c.window_index, now));
                ++run_.contradictions.expired;
            }
        }
        // The last Part 2 windows are stepped after the close; anything they
        // raise can no longer be asked.
        step_ready(now);
        for (const auto& c : learner_.pending_contradictions()) {
            log_resolution(learner_.expire_contradiction(c.window_index, now));
            ++run_.contradictions.expired;
        }
        relabels_.clear();
        learner_.set_phase(engine::Phase::Evaluation);
    }

    const PreparedUser& user_;
    std::uint64_t seed_;
    std::size_t user_index_;
    const world::AnnotatorProfile& profile_;
    const RunConfig& cfg_;
    bool keep_logs_;
    const protocol::StudyConfig& study_;
    std::int64_t slots_;
    std::int64_t bootstrap_end_;
    std::int64_t skeptical_end_;
    bool skeptical_closed_ = false;
    engine::SkepticalLearner learner_;
    protocol::Scheduler scheduler_;
    std::vector<std::optional<engine::Annotation>> diary_;
    std::vector<bool> diary_done_;
    std::vector<Inbox> inbox_;
    std::map<std::int64_t, Label> relabels_;
    std::int64_t next_ = 0;
    UserRun run_;
};

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    for (const auto& l : lines) out << l << '\n';
    if (!out) throw IoError(fmt::format("write failed: {}", path.string()));
}

}  // namespace

UserRun simulate_user(const PreparedUser& user, std::uint64_t seed, std::size_t user_index, const Cohort& cohort,
                      Method method, const RunConfig& cfg, bool keep_logs) {
    return UserSimulation(user, seed, user_index, cohort, method, cfg, keep_logs).run();
}

MethodSeries average_series(const std::vector<const UserRun*>& runs, std::int64_t first_slot) {
    MethodSeries out;
    if (runs.empty()) return out;
    out.method = runs.front()->method;
    const auto n = runs.front()->predicted.size();
    const auto from = static_cast<std::size_t>(std::clamp<std::int64_t>(first_slot, 0, static_cast<std::int64_t>(n)));
    const auto len = n - from;
    std::vector<double> macro(len, 0.0), weighted(len, 0.0);
    out.users.assign(len, 0);
    for (const auto* r : runs) {
        const std::span<const std::optional<ClassIndex>> p(r->predicted);
        const std::span<const std::optional<ClassIndex>> y(r->truth);
        const auto f1 = progressive_f1(p.subspan(from), y.subspan(from), kMainCategoryCount);
        if (f1.macro.empty()) continue;
        for (std::size_t t = 0; t < len; ++t) {
            if (!p[from + t] || !y[from + t]) continue;
            macro[t] += *f1.macro[t];
            weighted[t] += *f1.weighted[t];
            ++out.users[t];
        }
    }
    out.macro.resize(len);
    out.weighted.resize(len);
    for (std::size_t t = 0; t < len; ++t) {
        if (out.users[t] == 0) continue;
        out.macro[t] = macro[t] / static_cast<double>(out.users[t]);
        out.weighted[t] = weighted[t] / static_cast<double>(out.users[t]);
    }
    return out;
}

MetricsBundle run_experiment(const RunConfig& cfg) {
    cfg.validate();
    const std::size_t cohorts = cfg.cohorts.size();
    const std::size_t methods = cfg.methods.size();
    const std::size_t per_user = cohorts * methods;
    const std::size_t threads = cfg.threads > 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    const std::int64_t first_slot = static_cast<std::int64_t>(cfg.f1_start_day - 1) * cfg.study.slots_per_day();

    // results[((seed * users) + user) * per_user + cohort * methods + method]
    std::vector<UserRun> results(cfg.seeds.size() * cfg.users * per_user);
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
        const auto seed = cfg.seeds[s];
        std::vector<UserData> worlds;
        if (cfg.world_dir) worlds = load_worlds(cfg, seed);
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (std::size_t u = next++; u < cfg.users; u = next++) {
                try {
                    const auto data = cfg.world_dir ? std::move(worlds[u]) : [&] {
                        auto w = world::generate_user(seed, u, cfg.world);
                        return UserData{std::move(w.user_id), std::move(w.events), std::move(w.timeline)};
                    }();
                    const auto prepared = prepare_user(data, cfg.study, cfg.input_scale);
                    for (std::size_t c = 0; c < cohorts; ++c) {
                        for (std::size_t m = 0; m < methods; ++m) {
                            auto run = simulate_user(prepared, seed, u, cfg.cohorts[c], cfg.methods[m], cfg,
                                                     cfg.event_logs);
                            if (cfg.event_logs) {
                                const auto base = cfg.out / "events" / fmt::format("seed_{}", seed) / cfg.cohorts[c].name;
                                const auto stem = fmt::format("{}_{}", run.user_id, to_string(run.method));
                                write_lines(base / (stem + ".jsonl"), run.event_log);
                                write_lines(base / (stem + "_questions.jsonl"), run.trace);
                                run.event_log = {};
                                run.trace = {};
                            }
                            run.trained = {};
                            results[(s * cfg.users + u) * per_user + c * methods + m] = std::move(run);
                        }
                    }
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = cfg.users;
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 1; t < std::min(threads, cfg.users); ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
        spdlog::info("seed {} done ({} users x {} cohorts x {} methods)", seed, cfg.users, cohorts, methods);
    }

    MetricsBundle bundle;
    bundle.span_start = cfg.study.slot_start(first_slot);
    bundle.period_minutes = cfg.study.diary_period_minutes;
    for (std::size_t c = 0; c < cohorts; ++c) {
        CohortMetrics cm;
        cm.name = cfg.cohorts[c].name;
        for (std::size_t m = 0; m < methods; ++m) {
            std::vector<const UserRun*> runs;
            for (std::size_t i = c * methods + m; i < results.size(); i += per_user) runs.push_back(&results[i]);
            cm.series.push_back(average_series(runs, first_slot));
            cm.series.back().method = cfg.methods[m];
        }
        bundle.cohorts.push_back(std::move(cm));
    }
    for (const auto& r : results) {
        UserSummary s{r.seed, r.cohort, r.user_id, r.method, {}, {}, r.contradictions, r.evaluation};
        const std::span<const std::optional<ClassIndex>> p(r.predicted), y(r.truth);
        const auto from = static_cast<std::size_t>(first_slot);
        const auto f1 = progressive_f1(p.subspan(from), y.subspan(from), kMainCategoryCount);
        s.final_macro = final_value(f1.macro);
        s.final_weighted = final_value(f1.weighted);
        bundle.users.push_back(std::move(s));
    }
    return bundle;
}

}  // namespace skel::harness
