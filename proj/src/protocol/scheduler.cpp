#include "skel/protocol/scheduler.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <istream>

namespace skel::protocol {

using nlohmann::json;
using namespace std::chrono;

namespace {

constexpr std::array<std::string_view, 4> kKindNames{"diary", "skeptic", "relabel", "evaluation"};

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

std::string_view to_string(QuestionKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

void StudyConfig::validate() const {
    if (bootstrap_days <= 0 || skeptical_days <= 0 || evaluation_days <= 0) {
        throw ConfigError("study parts must last at least one day");
    }
    if (diary_period_minutes <= 0 || (24 * 60) % diary_period_minutes != 0) {
        throw ConfigError("diary_period_minutes must divide 24 hours");
    }
    if (!(diary_expiry_hours > 0.0) || !(question_expiry_hours > 0.0)) {
        throw ConfigError("expiry durations must be positive");
    }
    if (batch_dispatch_minute < 0 || batch_dispatch_minute >= 24 * 60 ||
        batch_dispatch_minute % diary_period_minutes != 0) {
        throw ConfigError("batch_dispatch_time must be a slot boundary within the day");
    }
    if (start_of_day(study_start) != study_start) throw ConfigError("study_start must be a midnight (UTC)");
}

StudyConfig StudyConfig::from_config(const KeyValueConfig& kv) {
    kv.reject_unknown("study", {"bootstrap_days", "skeptical_days", "evaluation_days",
                                "diary_period_minutes", "diary_expiry_hours", "question_expiry_hours",
                                "batch_dispatch_time", "study_start"});
    StudyConfig c;
    c.bootstrap_days = static_cast<int>(kv.get_int("study.bootstrap_days", c.bootstrap_days));
    c.skeptical_days = static_cast<int>(kv.get_int("study.skeptical_days", c.skeptical_days));
    c.evaluation_days = static_cast<int>(kv.get_int("study.evaluation_days", c.evaluation_days));
    c.diary_period_minutes = static_cast<int>(kv.get_int("study.diary_period_minutes", c.diary_period_minutes));
    c.diary_expiry_hours = kv.get_double("study.diary_expiry_hours", c.diary_expiry_hours);
    c.question_expiry_hours = kv.get_double("study.question_expiry_hours", c.question_expiry_hours);
    if (kv.has("study.batch_dispatch_time")) {
        const auto s = kv.get_string("study.batch_dispatch_time", "");
        int h = 0, m = 0;
        if (std::sscanf(s.c_str(), "%d:%d", &h, &m) != 2 || h < 0 || h > 23 || m < 0 || m > 59) {
            throw ConfigError(fmt::format("study.batch_dispatch_time: expected HH:MM, got '{}'", s));
        }
        c.batch_dispatch_minute = h * 60 + m;
    }
    if (kv.has("study.study_start")) {
        try {
            c.study_start = parse_iso(kv.get_string("study.study_start", ""));
        } catch (const DataError& ex) {
            throw ConfigError(fmt::format("study.study_start: {}", ex.what()));
        }
    }
    c.validate();
    return c;
}

std::int64_t StudyConfig::slot_of(Timestamp t) const {
    return floor_div((t - study_start).count(), duration_cast<milliseconds>(period()).count());
}

int StudyConfig::day_of(Timestamp t) const {
    return static_cast<int>(floor_div((t - study_start).count(), 86'400'000)) + 1;
}

Part part_at(const StudyConfig& cfg, Timestamp t) {
    const int day = cfg.day_of(t);
    if (day < 1) return Part::Before;
    if (day <= cfg.bootstrap_days) return Part::Bootstrap;
    if (day <= cfg.bootstrap_days + cfg.skeptical_days) return Part::Skeptical;
    if (day <= cfg.total_days()) return Part::Evaluation;
    return Part::Done;
}

engine::Phase phase_of(Part p) {
    switch (p) {
        case Part::Before:
        case Part::Bootstrap: return engine::Phase::Bootstrap;
        case Part::Skeptical: return engine::Phase::Skeptical;
        default: return engine::Phase::Evaluation;
    }
}

Scheduler::Scheduler(StudyConfig cfg, std::string user_id) : cfg_(cfg), user_(std::move(user_id)) {
    cfg_.validate();
}

void Scheduler::log(const char* event, const Question& q, Timestamp at) {
    json j;
    j["event"] = event;
    j["user"] = user_;
    j["id"] = q.id;
    j["kind"] = to_string(q.kind);
    j["at"] = format_iso(at);
    j["windows"] = q.window_refs;
    j["expires_at"] = format_iso(q.expires_at);
    trace_.push_back(j.dump());
}

Question Scheduler::dispatch(QuestionKind kind, Timestamp now, double expiry_hours) {
    Question q;
    q.id = next_id_++;
    q.kind = kind;
    q.dispatched_at = now;
    q.expires_at = now + hours_to_duration(expiry_hours);
    return q;
}

std::vector<Question> Scheduler::tick(Timestamp now) {
    if ((now - cfg_.study_start) % cfg_.period() != Duration::zero()) {
        throw UsageError(fmt::format("tick at {} is off the slot grid", format_iso(now)));
    }
    if (last_tick_ && now <= *last_tick_) {
        throw UsageError(fmt::format("tick at {} does not advance the clock", format_iso(now)));
    }
    last_tick_ = now;

    std::vector<Question> out;
    const Part part = part_at(cfg_, now);
    if (part == Part::Bootstrap || part == Part::Skeptical) {
        Question q = dispatch(QuestionKind::Diary, now, cfg_.diary_expiry_hours);
        q.window_refs = {cfg_.slot_of(now)};
        out.push_back(std::move(q));
    }
    if (minute_of_day(now) == cfg_.batch_dispatch_minute) {
        if (part == Part::Skeptical) {
            for (const auto& c : suspicions_) {
                Question q = dispatch(QuestionKind::Skeptic, now, cfg_.question_expiry_hours);
                q.window_refs = {c.window_index};
                q.machine_label = c.machine_label;
                q.original_label = c.user_label;
                out.push_back(std::move(q));
            }
            suspicions_.clear();
        } else if (part == Part::Evaluation) {
            Question q = dispatch(QuestionKind::Evaluation, now, cfg_.question_expiry_hours);
            const auto from = now - hours(24);
            for (const auto& item : predictions_) {
                if (item.window_start >= from && item.window_start < now) {
                    q.items.push_back(item);
                    q.window_refs.push_back(item.window_index);
                }
            }
            std::erase_if(predictions_, [now](const EvaluationItem& i) { return i.window_start < now; });
            out.push_back(std::move(q));
        }
    }
    for (const auto& q : out) {
        log("dispatch", q, now);
        live_.emplace(q.id, q);
    }
    return out;
}

std::vector<Question> Scheduler::expire(Timestamp now) {
    std::vector<Question> out;
    for (auto it = live_.begin(); it != live_.end();) {
        if (now > it->second.expires_at) {
            log("expire", it->second, now);
            out.push_back(std::move(it->second));
            it = live_.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

AnswerEvent Scheduler::record_answer(std::uint64_t question_id, const Answer& answer, Timestamp now) {
    const auto it = live_.find(question_id);
    if (it == live_.end()) throw UsageError(fmt::format("question {} is not live", question_id));
    if (now > it->second.expires_at) {
        throw UsageError(fmt::format("question {} expired at {}", question_id, format_iso(it->second.expires_at)));
    }
    const Question q = it->second;
    AnswerEvent ev;
    ev.question_id = q.id;
    ev.kind = q.kind;
    ev.answered_at = now;
    auto wrong_kind = [&] {
        return UsageError(fmt::format("answer does not fit a {} question", to_string(q.kind)));
    };
    switch (q.kind) {
        case QuestionKind::Diary: {
            const auto* a = std::get_if<DiaryAnswer>(&answer);
            if (!a) throw wrong_kind();
            ev.annotation = engine::Annotation{q.window_refs.front(), a->label,
                                               engine::AnnotationSource::TimeDiary, now};
            break;
        }
        case QuestionKind::Skeptic: {
            const auto* a = std::get_if<SkepticAnswer>(&answer);
            if (!a) throw wrong_kind();
            if (a->machine_correct) {
                ev.resolution = Resolution{q.window_refs.front(), engine::ConfirmMachine{}};
            } else {
                Question f = dispatch(QuestionKind::Relabel, now, cfg_.question_expiry_hours);
                f.window_refs = q.window_refs;
                f.machine_label = q.machine_label;
                f.original_label = q.original_label;
                ev.follow_up = f;
            }
            break;
        }
        case QuestionKind::Relabel: {
            const auto* a = std::get_if<RelabelAnswer>(&answer);
            if (!a) throw wrong_kind();
            if (q.original_label && a->label == *q.original_label) {
                ev.resolution = Resolution{q.window_refs.front(), engine::ReassertOriginal{}};
            } else {
                ev.resolution = Resolution{q.window_refs.front(), engine::NewLabel{a->label}};
            }
            break;
        }
        case QuestionKind::Evaluation: {
            const auto* a = std::get_if<EvaluationAnswer>(&answer);
            if (!a) throw wrong_kind();
            for (const auto& item : q.items) {
                const bool flagged =
                    std::find(a->flagged.begin(), a->flagged.end(), item.window_index) != a->flagged.end();
                ev.verdicts.emplace_back(item.window_index, !flagged);
            }
            break;
        }
    }
    live_.erase(it);
    log("answer", q, now);
    if (ev.follow_up) {
        log("dispatch", *ev.follow_up, now);
        live_.emplace(ev.follow_up->id, *ev.follow_up);
    }
    return ev;
}

void Scheduler::add_suspicion(const engine::Contradiction& c) { suspicions_.push_back(c); }

void Scheduler::add_prediction(const EvaluationItem& item) { predictions_.push_back(item); }

PhaseClose Scheduler::close_phase(Timestamp now) {
    PhaseClose out;
    for (auto& [_, q] : live_) {
        log("expire", q, now);
        out.expired.push_back(std::move(q));
    }
    live_.clear();
    out.undispatched = std::move(suspicions_);
    suspicions_.clear();
    return out;
}

TraceSummary replay_trace(std::istream& in) {
    struct Life {
        QuestionKind kind;
        Timestamp expires_at;
        bool closed = false;
    };
    std::map<std::pair<std::string, std::uint64_t>, Life> lives;
    TraceSummary s;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) {
        return FormatError(fmt::format("trace line {}: {}", lineno, why));
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            throw fail("not JSON");
        }
        const auto event = j.value("event", "");
        const std::pair key{j.value("user", ""), j.value("id", std::uint64_t{0})};
        const auto kind_name = j.value("kind", "");
        const auto kind_it = std::find(kKindNames.begin(), kKindNames.end(), kind_name);
        if (kind_it == kKindNames.end()) throw fail("unknown question kind");
        const auto kind = static_cast<QuestionKind>(kind_it - kKindNames.begin());
        Timestamp at, expires;
        try {
            at = parse_iso(j.value("at", ""));
            expires = parse_iso(j.value("expires_at", ""));
        } catch (const DataError& ex) {
            throw fail(ex.what());
        }
        if (event == "dispatch") {
            if (!lives.emplace(key, Life{kind, expires}).second) throw fail("question dispatched twice");
            ++s.dispatched[kind];
            ++s.open;
            continue;
        }
        const auto it = lives.find(key);
        if (it == lives.end()) throw fail("event for an undispatched question");
        if (it->second.closed) throw fail("question closed twice");
        it->second.closed = true;
        --s.open;
        if (event == "answer") {
            if (at > it->second.expires_at) throw fail("answer after expiry");
            ++s.answered[kind];
        } else if (event == "expire") {
            ++s.expired[kind];
        } else {
            throw fail("unknown event");
        }
    }
    return s;
}

}  // namespace skel::protocol
