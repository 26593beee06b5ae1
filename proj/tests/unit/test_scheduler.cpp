#include <doctest.h>

#include "skel/errors.hpp"
#include "skel/protocol/scheduler.hpp"

#include <random>
#include <sstream>

using namespace skel;
using namespace skel::protocol;
using namespace std::chrono;

namespace {

const Label kHome = Label::representative(MainCategory::Home);
const Label kUniversity = Label::representative(MainCategory::University);
const Label kOther = Label::representative(MainCategory::Other);

// Day is 1-based; hh:mm is the time of day.
Timestamp at(const StudyConfig& cfg, int day, int hh, int mm = 0) {
    return cfg.study_start + hours(24 * (day - 1) + hh) + minutes(mm);
}

engine::Contradiction contradiction(std::int64_t window) {
    return engine::Contradiction{window, kUniversity, kHome, default_study_start() + minutes(30 * window)};
}

std::size_t count_kind(const std::vector<Question>& qs, QuestionKind k) {
    return static_cast<std::size_t>(std::count_if(qs.begin(), qs.end(), [k](const Question& q) { return q.kind == k; }));
}

}  // namespace

TEST_CASE("study calendar") {
    StudyConfig cfg;
    CHECK(cfg.total_days() == 28);
    CHECK(cfg.slots_per_day() == 48);
    CHECK(format_iso(cfg.study_start) == "2023-10-02T00:00:00.000Z");
    CHECK(part_at(cfg, at(cfg, 1, 0)) == Part::Bootstrap);
    CHECK(part_at(cfg, at(cfg, 7, 23, 30)) == Part::Bootstrap);
    CHECK(part_at(cfg, at(cfg, 8, 0)) == Part::Skeptical);
    CHECK(part_at(cfg, at(cfg, 21, 23, 30)) == Part::Skeptical);
    CHECK(part_at(cfg, at(cfg, 22, 0)) == Part::Evaluation);
    CHECK(part_at(cfg, at(cfg, 29, 0)) == Part::Done);
    CHECK(part_at(cfg, cfg.study_start - minutes(30)) == Part::Before);
    CHECK(cfg.slot_of(at(cfg, 2, 1, 0)) == 50);
    CHECK(cfg.slot_of(at(cfg, 1, 0, 29)) == 0);
    CHECK(cfg.day_of(at(cfg, 3, 14)) == 3);
}

TEST_CASE("study config from INI") {
    const auto kv = KeyValueConfig::from_string(
        "[study]\nbootstrap_days = 3\nbatch_dispatch_time = 18:30\nstudy_start = 2024-01-01T00:00:00.000Z\n"
        "question_expiry_hours = 6\n");
    const auto cfg = StudyConfig::from_config(kv);
    CHECK(cfg.bootstrap_days == 3);
    CHECK(cfg.skeptical_days == 14);
    CHECK(cfg.batch_dispatch_minute == 18 * 60 + 30);
    CHECK(cfg.question_expiry_hours == 6.0);
    CHECK(format_iso(cfg.study_start) == "2024-01-01T00:00:00.000Z");

    CHECK_THROWS_AS(StudyConfig::from_config(KeyValueConfig::from_string("[study]\nbogus = 1\n")), ConfigError);
    CHECK_THROWS_AS(StudyConfig::from_config(KeyValueConfig::from_string("[study]\nbatch_dispatch_time = 7pm\n")),
                    ConfigError);
    CHECK_THROWS_AS(StudyConfig::from_config(KeyValueConfig::from_string("[study]\ndiary_period_minutes = 7\n")),
                    ConfigError);
    CHECK_THROWS_AS(StudyConfig::from_config(KeyValueConfig::from_string("[study]\nbootstrap_days = x\n")),
                    ConfigError);
    CHECK_THROWS_AS(StudyConfig::from_config(KeyValueConfig::from_string("[study]\nbatch_dispatch_time = 19:10\n")),
                    ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::from_string("[study\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::from_file("/nonexistent/skel.ini"), IoError);
}

TEST_CASE("a diary goes out at every slot of the first parts") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    s.tick(at(cfg, 3, 13, 30));
    const auto qs = s.tick(at(cfg, 3, 14));
    REQUIRE(qs.size() == 1);
    CHECK(qs[0].kind == QuestionKind::Diary);
    CHECK(qs[0].window_refs == std::vector<std::int64_t>{cfg.slot_of(at(cfg, 3, 14))});
    CHECK(qs[0].expires_at - qs[0].dispatched_at == hours(8));
}

TEST_CASE("contradictions go out together in the evening batch") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    s.tick(at(cfg, 10, 18, 30));
    for (std::int64_t w : {440, 450, 460}) s.add_suspicion(contradiction(w));
    const auto qs = s.tick(at(cfg, 10, 19));
    CHECK(count_kind(qs, QuestionKind::Skeptic) == 3);
    CHECK(count_kind(qs, QuestionKind::Diary) == 1);
    for (const auto& q : qs) {
        CHECK(q.dispatched_at == at(cfg, 10, 19));
        if (q.kind != QuestionKind::Skeptic) continue;
        CHECK(q.window_refs.size() == 1);
        CHECK(q.machine_label == kUniversity);
        CHECK(q.expires_at - q.dispatched_at == hours(12));
    }
    CHECK(s.queued_suspicions() == 0);
}

TEST_CASE("the evaluation list covers the previous day") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    for (auto t = at(cfg, 23, 0); t < at(cfg, 24, 19); t += minutes(30)) {
        if (cfg.slot_of(t) % 5 == 0) continue;  // some windows have no prediction
        s.add_prediction(EvaluationItem{cfg.slot_of(t), t, kHome});
    }
    s.tick(at(cfg, 24, 18, 30));
    const auto qs = s.tick(at(cfg, 24, 19));
    REQUIRE(qs.size() == 1);
    const auto& q = qs[0];
    CHECK(q.kind == QuestionKind::Evaluation);
    CHECK(q.items.size() <= 48);
    CHECK(q.items.size() > 30);
    for (const auto& item : q.items) {
        CHECK(item.window_start >= at(cfg, 23, 19));
        CHECK(item.window_start < at(cfg, 24, 19));
    }
    CHECK(q.expires_at - q.dispatched_at == hours(12));
}

TEST_CASE("expiry boundaries") {
    StudyConfig cfg;
    SUBCASE("diary lives eight hours") {
        Scheduler s(cfg, "u");
        s.tick(at(cfg, 2, 8));
        CHECK(s.expire(at(cfg, 2, 16)).empty());
        const auto gone = s.expire(at(cfg, 2, 16, 1));
        REQUIRE(gone.size() == 1);
        CHECK(gone[0].kind == QuestionKind::Diary);
    }
    SUBCASE("questions live twelve hours") {
        Scheduler s(cfg, "u");
        s.add_suspicion(contradiction(400));
        const auto qs = s.tick(at(cfg, 9, 19));
        std::uint64_t q2 = 0;
        for (const auto& q : qs) if (q.kind == QuestionKind::Skeptic) q2 = q.id;
        REQUIRE(q2 != 0);
        s.expire(at(cfg, 10, 6, 59));
        CHECK(s.live().count(q2) == 1);
        s.expire(at(cfg, 10, 7, 0));
        CHECK(s.live().count(q2) == 1);
        s.expire(at(cfg, 10, 7, 1));
        CHECK(s.live().count(q2) == 0);
    }
    SUBCASE("empty queue") {
        Scheduler s(cfg, "u");
        CHECK(s.expire(at(cfg, 5, 5)).empty());
        CHECK(s.trace().empty());
    }
}

TEST_CASE("answers map to engine events") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    s.add_suspicion(contradiction(400));
    s.add_suspicion(contradiction(401));
    s.add_suspicion(contradiction(402));
    const auto qs = s.tick(at(cfg, 9, 19));
    std::vector<Question> q2;
    const Question* q1 = nullptr;
    for (const auto& q : qs) {
        if (q.kind == QuestionKind::Skeptic) q2.push_back(q);
        else q1 = &q;
    }
    REQUIRE(q2.size() == 3);
    REQUIRE(q1);

    const auto t = at(cfg, 9, 20);
    const auto d = s.record_answer(q1->id, DiaryAnswer{kHome}, t);
    REQUIRE(d.annotation);
    CHECK(d.annotation->label == kHome);
    CHECK(d.annotation->window_index == q1->window_refs[0]);
    CHECK(d.annotation->source == engine::AnnotationSource::TimeDiary);

    const auto yes = s.record_answer(q2[0].id, SkepticAnswer{true}, t);
    REQUIRE(yes.resolution);
    CHECK(std::holds_alternative<engine::ConfirmMachine>(yes.resolution->response));
    CHECK_FALSE(yes.follow_up);

    const auto no = s.record_answer(q2[1].id, SkepticAnswer{false}, t);
    CHECK_FALSE(no.resolution);
    REQUIRE(no.follow_up);
    CHECK(no.follow_up->kind == QuestionKind::Relabel);
    CHECK(no.follow_up->expires_at - no.follow_up->dispatched_at == hours(12));
    const auto re = s.record_answer(no.follow_up->id, RelabelAnswer{kHome}, at(cfg, 9, 21));
    REQUIRE(re.resolution);
    CHECK(std::holds_alternative<engine::ReassertOriginal>(re.resolution->response));

    const auto no2 = s.record_answer(q2[2].id, SkepticAnswer{false}, t);
    const auto nl = s.record_answer(no2.follow_up->id, RelabelAnswer{kOther}, t);
    REQUIRE(nl.resolution);
    CHECK(std::get<engine::NewLabel>(nl.resolution->response).label == kOther);

    CHECK(s.live().empty());
    CHECK_THROWS_AS(s.record_answer(q1->id, DiaryAnswer{kHome}, t), UsageError);
    CHECK_THROWS_AS(s.record_answer(999, DiaryAnswer{kHome}, t), UsageError);
}

TEST_CASE("answer validation") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    const auto q = s.tick(at(cfg, 2, 8)).front();
    CHECK_THROWS_AS(s.record_answer(q.id, SkepticAnswer{true}, at(cfg, 2, 9)), UsageError);
    CHECK_THROWS_AS(s.record_answer(q.id, DiaryAnswer{kHome}, at(cfg, 2, 16, 30)), UsageError);
    CHECK_NOTHROW(s.record_answer(q.id, DiaryAnswer{kHome}, at(cfg, 2, 16)));
}

TEST_CASE("evaluation verdicts") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    for (int i = 0; i < 4; ++i) {
        const auto t = at(cfg, 22, 10) + minutes(30 * i);
        s.add_prediction(EvaluationItem{cfg.slot_of(t), t, kHome});
    }
    const auto q = s.tick(at(cfg, 22, 19)).front();
    REQUIRE(q.items.size() == 4);
    SUBCASE("all correct") {
        const auto ev = s.record_answer(q.id, EvaluationAnswer{}, at(cfg, 22, 20));
        REQUIRE(ev.verdicts.size() == 4);
        for (const auto& [_, ok] : ev.verdicts) CHECK(ok);
    }
    SUBCASE("one flagged") {
        const auto ev = s.record_answer(q.id, EvaluationAnswer{{q.items[2].window_index}}, at(cfg, 22, 20));
        for (const auto& [w, ok] : ev.verdicts) CHECK(ok == (w != q.items[2].window_index));
    }
}

TEST_CASE("clock discipline") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    CHECK_THROWS_AS(s.tick(at(cfg, 1, 0, 10)), UsageError);
    s.tick(at(cfg, 1, 1));
    CHECK_THROWS_AS(s.tick(at(cfg, 1, 1)), UsageError);
    CHECK_THROWS_AS(s.tick(at(cfg, 1, 0, 30)), UsageError);
}

TEST_CASE("closing the skeptical part empties the queue") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    s.add_suspicion(contradiction(1000));
    s.tick(at(cfg, 21, 19));
    s.tick(at(cfg, 21, 23, 30));
    s.add_suspicion(contradiction(1030));
    const auto close = s.close_phase(at(cfg, 22, 0));
    CHECK(close.expired.size() == 3);  // two diaries and one skeptic question
    REQUIRE(close.undispatched.size() == 1);
    CHECK(close.undispatched[0].window_index == 1030);
    CHECK(s.live().empty());
    CHECK(s.queued_suspicions() == 0);
}

TEST_CASE("full study timeline") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    std::mt19937_64 rng(42);
    std::bernoulli_distribution answer(0.6), suspicious(0.05), yes(0.3);
    std::map<int, std::map<QuestionKind, std::size_t>> per_day;
    std::vector<Question> inbox;
    bool closed = false;
    for (auto now = cfg.study_start; now <= cfg.study_end() + hours(13); now += minutes(30)) {
        if (!closed && part_at(cfg, now) == Part::Evaluation) {
            s.close_phase(now);
            closed = true;
            inbox.clear();
        }
        std::vector<Question> still;
        for (const auto& q : inbox) {
            if (!s.live().count(q.id)) continue;
            if (!answer(rng)) {
                still.push_back(q);
                continue;
            }
            Answer a = DiaryAnswer{kHome};
            if (q.kind == QuestionKind::Skeptic) a = SkepticAnswer{yes(rng)};
            if (q.kind == QuestionKind::Relabel) a = RelabelAnswer{kOther};
            if (q.kind == QuestionKind::Evaluation) a = EvaluationAnswer{};
            const auto ev = s.record_answer(q.id, a, now);
            if (ev.follow_up) still.push_back(*ev.follow_up);
        }
        inbox = std::move(still);
        s.expire(now);
        const auto part = part_at(cfg, now);
        if (part == Part::Skeptical && suspicious(rng)) s.add_suspicion(contradiction(cfg.slot_of(now)));
        if (part == Part::Evaluation) s.add_prediction(EvaluationItem{cfg.slot_of(now), now, kHome});
        if (part == Part::Done) continue;
        for (const auto& q : s.tick(now)) {
            ++per_day[cfg.day_of(now)][q.kind];
            if (q.kind != QuestionKind::Diary) CHECK(minute_of_day(q.dispatched_at) == 19 * 60);
            if (q.kind == QuestionKind::Skeptic) CHECK(part == Part::Skeptical);
            const auto life = q.expires_at - q.dispatched_at;
            CHECK(life == (q.kind == QuestionKind::Diary ? hours(8) : hours(12)));
            inbox.push_back(q);
        }
    }
    for (int day = 1; day <= 28; ++day) {
        const auto& c = per_day[day];
        const auto get = [&](QuestionKind k) { return c.count(k) ? c.at(k) : 0; };
        CHECK(get(QuestionKind::Diary) == (day <= 21 ? 48u : 0u));
        CHECK(get(QuestionKind::Evaluation) == (day >= 22 ? 1u : 0u));
        if (day <= 7) CHECK(get(QuestionKind::Skeptic) == 0);
    }
    CHECK(s.live().empty());

    std::stringstream ss;
    for (const auto& line : s.trace()) ss << line << '\n';
    const auto summary = replay_trace(ss);
    CHECK(summary.open == 0);
    CHECK(summary.dispatched.at(QuestionKind::Diary) == 48u * 21);
    CHECK(summary.dispatched.at(QuestionKind::Evaluation) == 7u);
    for (const auto& [kind, n] : summary.dispatched) {
        const auto answered = summary.answered.count(kind) ? summary.answered.at(kind) : 0;
        const auto expired = summary.expired.count(kind) ? summary.expired.at(kind) : 0;
        CHECK(answered + expired == n);
    }
}

TEST_CASE("trace replay rejects inconsistent histories") {
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    const auto q = s.tick(at(cfg, 2, 8)).front();
    s.record_answer(q.id, DiaryAnswer{kHome}, at(cfg, 2, 9));
    std::stringstream twice;
    for (const auto& line : s.trace()) twice << line << '\n';
    twice << s.trace().back() << '\n';
    CHECK_THROWS_AS(replay_trace(twice), FormatError);

    std::stringstream orphan;
    orphan << s.trace().back() << '\n';
    CHECK_THROWS_AS(replay_trace(orphan), FormatError);

    std::stringstream junk("{oops\n");
    CHECK_THROWS_AS(replay_trace(junk), FormatError);
}
