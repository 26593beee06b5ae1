// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails.

#include "gp_oracle.hpp"
#include "skel/engine/skeptical_learner.hpp"
#include "skel/errors.hpp"
#include "skel/features/geo.hpp"
#include "skel/features/pipeline.hpp"
#include "skel/features/standardizer.hpp"
#include "skel/gp/gaussian_process.hpp"
#include "skel/gp/kernel.hpp"
#include "skel/gp/one_vs_rest.hpp"
#include "skel/harness/experiment.hpp"
#include "skel/harness/metrics.hpp"
#include "skel/harness/report.hpp"
#include "skel/protocol/scheduler.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace skel;
using namespace std::chrono;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failed conditions; the first few are kept for the report line.
struct Checker {
    std::size_t failures = 0;
    std::vector<std::string> notes;
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures;
        if (notes.size() < 3) notes.push_back(what);
    }
    std::string failed() const {
        std::string s = fmt::format("{} failed", failures);
        for (const auto& n : notes) s += "; " + n;
        return s;
    }
};

double seconds_since(steady_clock::time_point t0) {
    return duration<double>(steady_clock::now() - t0).count();
}

// --- GP correctness ---------------------------------------------------------

Outcome gp_correctness() {
    const auto t0 = steady_clock::now();
    gp::KernelConfig cfg;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dims(2, 47);
    std::uniform_int_distribution<ClassIndex> cls(0, 3);
    double worst_mean = 0.0, worst_var = 0.0;
    Checker c;
    for (int stream = 0; stream < 50; ++stream) {
        const int d = dims(rng);
        const auto xs = oracle::random_points(rng, 300, d);
        const auto probes = oracle::random_points(rng, 20, d);
        std::vector<ClassIndex> labels;
        gp::OneVsRestGp inc(cfg, Taxonomy(Granularity::MainCategory), d);
        for (const auto& x : xs) {
            labels.push_back(cls(rng));
            inc.update(x, labels.back());
        }
        const auto batch = gp::OneVsRestGp::fit(cfg, Taxonomy(Granularity::MainCategory), d, xs, labels);
        for (const auto& p : probes) {
            const auto a = inc.process().predict(p);
            const auto b = batch.process().predict(p);
            for (Eigen::Index k = 0; k < a.mean.size(); ++k) {
                const double rel = std::abs(a.mean[k] - b.mean[k]) / std::max({1.0, std::abs(a.mean[k]), std::abs(b.mean[k])});
                worst_mean = std::max(worst_mean, rel);
            }
            const double rel_var =
                std::abs(a.variance - b.variance) / std::max({1.0, std::abs(a.variance), std::abs(b.variance)});
            worst_var = std::max(worst_var, rel_var);
        }
    }
    c.expect(worst_mean <= 1e-8, fmt::format("mean error {:.3g}", worst_mean));
    c.expect(worst_var <= 1e-8, fmt::format("variance error {:.3g}", worst_var));

    std::uniform_int_distribution<int> sizes(1, 300);
    int factored = 0;
    for (int t = 0; t < 100; ++t) {
        const auto xs = oracle::random_points(rng, sizes(rng), dims(rng));
        Eigen::LLT<gp::Matrix> llt(gp::gram(cfg, xs));
        if (llt.info() == Eigen::Success) ++factored;
    }
    c.expect(factored == 100, fmt::format("{} of 100 Gram matrices factored", factored));
    const double secs = seconds_since(t0);
    c.expect(secs < 60.0, fmt::format("runtime {:.1f} s", secs));
    return {c.failures == 0, c.failures ? c.failed()
                                        : fmt::format("max rel error mean {:.2g} variance {:.2g}; 100/100 Cholesky; {:.1f} s",
                                                      worst_mean, worst_var, secs)};
}

// --- Kernel values ----------------------------------------------------------

Outcome kernel_values() {
    gp::KernelConfig cfg;
    const double se = gp::squared_exponential(cfg, 0.0);
    const double rq = gp::rational_quadratic(cfg, 0.2 * 0.2);
    gp::Vector a(3);
    a << 0.4, -1.1, 2.5;
    const double diag = gp::kernel_eval(cfg, a, a, true);
    Checker c;
    c.expect(std::abs(se - 1.0) <= 1e-9, fmt::format("SE(0) = {:.12f}", se));
    c.expect(std::abs(rq - 0.66667) <= 1e-5 && std::abs(rq - 2.0 / 3.0) <= 1e-9, fmt::format("RQ(0.2) = {:.12f}", rq));
    c.expect(std::abs(diag - (3.0 + 1e-8)) <= 1e-9, fmt::format("k(x,x) = {:.12f}", diag));
    return {c.failures == 0, c.failures ? c.failed() : fmt::format("SE {:.12f} RQ {:.12f} diag {:.12f}", se, rq, diag)};
}

// --- Learner conformance ----------------------------------------------------

const Timestamp kStart = default_study_start();

gp::Vector cluster_point(std::mt19937_64& rng, std::size_t c) {
    std::normal_distribution<double> n(0.0, 0.05);
    gp::Vector x(3);
    for (int i = 0; i < 3; ++i) x[i] = 3.0 * static_cast<double>(c) + n(rng);
    return x;
}

Outcome learner_conformance() {
    using namespace engine;
    Checker c;
    std::size_t suspicions = 0, bootstrap_disagreements = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> cls(0, 3);
        std::bernoulli_distribution noisy(0.3), answered(0.85);
        std::uniform_int_distribution<int> response(0, 3);
        SkepticalLearner l(EngineConfig{}, gp::KernelConfig{}, 3);
        std::map<std::int64_t, int> trained_count;
        std::set<std::int64_t> contradicted;
        std::size_t log_seen = 0;
        const auto absorb_log = [&] {
            const auto& log = l.training_log();
            for (; log_seen < log.size(); ++log_seen) ++trained_count[log[log_seen].window_index];
        };
        const std::int64_t windows = 240;
        for (std::int64_t i = 0; i < windows; ++i) {
            if (i == 60) l.set_phase(Phase::Skeptical);
            if (i == 180) {
                for (const auto& p : l.pending_contradictions()) l.expire_contradiction(p.window_index, kStart);
                l.set_phase(Phase::Evaluation);
            }
            const auto phase = l.config().phase;
            const auto truth = cls(rng);
            auto label = Label::representative(static_cast<MainCategory>(truth));
            if (noisy(rng)) label = Label::representative(static_cast<MainCategory>((truth + 1 + cls(rng) % 3) % 4));
            std::optional<Annotation> a;
            if (answered(rng)) a = Annotation{i, label, AnnotationSource::TimeDiary, kStart + minutes(30 * i + 5)};
            const auto hash_before = l.state_hash();
            const auto out = l.step(ExampleWindow{"u", i, kStart + minutes(30 * i), cluster_point(rng, truth)}, a);
            absorb_log();

            if (phase == Phase::Bootstrap) {
                c.expect(!out.suspicious, "bootstrap raised a contradiction");
                if (a && out.prediction.predicted != l.taxonomy().class_of(a->label)) ++bootstrap_disagreements;
            }
            if (out.suspicious) {
                ++suspicions;
                contradicted.insert(i);
                c.expect(phase == Phase::Skeptical, "suspicion outside the skeptical phase");
                c.expect(a.has_value(), "suspicion without an answer");
                c.expect(out.pending_contradiction.has_value(), "suspicion without a pending contradiction");
                if (a && out.pending_contradiction) {
                    c.expect(out.prediction.predicted != l.taxonomy().class_of(a->label),
                             "suspicion while machine agrees");
                    c.expect(out.pending_contradiction->machine_label != out.pending_contradiction->user_label,
                             "contradiction with equal labels");
                }
                c.expect(!out.trained_on, "suspicious window trained immediately");
            }
            if (phase == Phase::Evaluation) {
                c.expect(!out.queried && !out.trained_on, "evaluation phase queried or trained");
                c.expect(!l.apply_evaluation_verdict(i, true, kStart), "evaluation verdict trained");
                c.expect(l.state_hash() == hash_before, "state hash changed in evaluation phase");
            }
            if (phase == Phase::Skeptical && i % 7 == 6) {
                for (const auto& p : l.pending_contradictions()) {
                    switch (response(rng)) {
                        case 0: l.resolve_contradiction(p.window_index, ConfirmMachine{}, kStart); break;
                        case 1: l.resolve_contradiction(p.window_index, ReassertOriginal{}, kStart); break;
                        case 2:
                            l.resolve_contradiction(p.window_index, NewLabel{Label::representative(MainCategory::Other)},
                                                    kStart);
                            break;
                        default: l.expire_contradiction(p.window_index, kStart); break;
                    }
                    absorb_log();
                    bool rejected = false;
                    try {
                        l.resolve_contradiction(p.window_index, ConfirmMachine{}, kStart);
                    } catch (const UsageError&) {
                        rejected = true;
                    }
                    c.expect(rejected, "second resolution accepted");
                }
            }
        }
        c.expect(l.pending_contradictions().empty(), "contradiction left open");
        for (const auto w : contradicted) c.expect(trained_count[w] == 1, fmt::format("window {} trained {} times", w, trained_count[w]));
        for (const auto& [w, n] : trained_count) c.expect(n == 1, fmt::format("window {} trained {} times", w, n));
    }
    c.expect(suspicions > 0, "scripted traces raised no contradiction");
    c.expect(bootstrap_disagreements > 0, "bootstrap never disagreed, check is vacuous");

    // Whole-protocol trace for one simulated participant.
    auto cfg = harness::RunConfig::defaults();
    cfg.users = 1;
    cfg.event_logs = false;
    const auto worlds = harness::generate_worlds(cfg, 3);
    const auto prepared = harness::prepare_user(worlds[0], cfg.study, cfg.input_scale);
    for (const auto& cohort : cfg.cohorts) {
        const auto r = harness::simulate_user(prepared, 3, 0, cohort, harness::Method::Skel, cfg, true);
        const auto& s = r.contradictions;
        c.expect(s.raised == s.confirmed_machine + s.reasserted + s.new_label + s.expired,
                 fmt::format("{}: {} raised, {} settled", cohort.name, s.raised,
                             s.confirmed_machine + s.reasserted + s.new_label + s.expired));
        std::stringstream trace;
        for (const auto& line : r.trace) trace << line << '\n';
        c.expect(protocol::replay_trace(trace).open == 0, cohort.name + ": questions left open");
        const auto freeze = static_cast<std::int64_t>(cfg.study.bootstrap_days + cfg.study.skeptical_days) * cfg.study.slots_per_day();
        for (const auto& a : r.trained) c.expect(a.window_index < freeze, cohort.name + ": trained on a Part 3 window");
    }
    return {c.failures == 0, c.failures ? c.failed()
                                        : fmt::format("30 scripted traces, {} contradictions, all settled once; "
                                                      "simulated protocol consistent for {} cohorts",
                                                      suspicions, cfg.cohorts.size())};
}

// --- Scheduler conformance --------------------------------------------------

Outcome scheduler_conformance() {
    using namespace protocol;
    Checker c;
    StudyConfig cfg;
    Scheduler s(cfg, "u");
    std::mt19937_64 rng(42);
    std::bernoulli_distribution answer(0.6), suspicious(0.05), yes(0.3);
    std::map<int, std::map<QuestionKind, std::size_t>> per_day;
    std::vector<Question> inbox;
    bool closed = false;
    const auto label = Label::representative(MainCategory::Home);
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
            Answer a = DiaryAnswer{label};
            if (q.kind == QuestionKind::Skeptic) a = SkepticAnswer{yes(rng)};
            if (q.kind == QuestionKind::Relabel) a = RelabelAnswer{Label::representative(MainCategory::Other)};
            if (q.kind == QuestionKind::Evaluation) a = EvaluationAnswer{};
            const auto ev = s.record_answer(q.id, a, now);
            if (ev.follow_up) still.push_back(*ev.follow_up);
        }
        inbox = std::move(still);
        s.expire(now);
        const auto part = part_at(cfg, now);
        if (part == Part::Skeptical && suspicious(rng)) {
            const auto slot = cfg.slot_of(now);
            s.add_suspicion(engine::Contradiction{slot, Label::representative(MainCategory::University), label,
                                                  cfg.study_start + minutes(30 * slot)});
        }
        if (part == Part::Evaluation) s.add_prediction(EvaluationItem{cfg.slot_of(now), now, label});
        if (part == Part::Done) continue;
        for (const auto& q : s.tick(now)) {
            ++per_day[cfg.day_of(now)][q.kind];
            if (q.kind == QuestionKind::Skeptic) {
                c.expect(minute_of_day(q.dispatched_at) == 19 * 60, "Q2 dispatched away from 19:00");
                c.expect(part == Part::Skeptical, "Q2 outside Part 2");
            }
            if (q.kind == QuestionKind::Evaluation) c.expect(minute_of_day(q.dispatched_at) == 19 * 60, "Q4 away from 19:00");
            const auto life = q.expires_at - q.dispatched_at;
            c.expect(life == (q.kind == QuestionKind::Diary ? hours(8) : hours(12)), "wrong expiry");
            inbox.push_back(q);
        }
    }
    std::size_t skeptic = 0;
    for (int day = 1; day <= 28; ++day) {
        const auto& m = per_day[day];
        const auto get = [&](QuestionKind k) { return m.count(k) ? m.at(k) : std::size_t{0}; };
        c.expect(get(QuestionKind::Diary) == (day <= 21 ? 48u : 0u), fmt::format("day {}: {} Q1", day, get(QuestionKind::Diary)));
        c.expect(get(QuestionKind::Evaluation) == (day >= 22 ? 1u : 0u), fmt::format("day {}: {} Q4", day, get(QuestionKind::Evaluation)));
        skeptic += get(QuestionKind::Skeptic);
    }
    c.expect(skeptic > 0, "no Q2 dispatched, check is vacuous");
    c.expect(s.live().empty(), "questions still live");
    return {c.failures == 0, c.failures ? c.failed()
                                        : fmt::format("48 Q1/day on days 1-21, one Q4/day on 22-28, {} Q2 all at 19:00, "
                                                      "expiries 8 h / 12 h",
                                                      skeptic)};
}

// --- Baseline equivalence ---------------------------------------------------

Outcome baseline_equivalence() {
    Checker c;
    auto cfg = harness::RunConfig::defaults();
    cfg.users = 4;
    cfg.event_logs = false;
    auto inf_cfg = cfg;
    inf_cfg.engine.skeptic_threshold = std::numeric_limits<double>::infinity();
    std::size_t compared = 0;
    for (const std::uint64_t seed : {1, 2}) {
        const auto worlds = harness::generate_worlds(cfg, seed);
        for (const auto& cohort : cfg.cohorts) {
            std::vector<harness::UserRun> never, inf;
            for (std::size_t u = 0; u < worlds.size(); ++u) {
                const auto p = harness::prepare_user(worlds[u], cfg.study, cfg.input_scale);
                never.push_back(harness::simulate_user(p, seed, u, cohort, harness::Method::GpNever, cfg, false));
                inf.push_back(harness::simulate_user(p, seed, u, cohort, harness::Method::Skel, inf_cfg, false));
                c.expect(inf.back().trained == never.back().trained, cohort.name + ": trained datasets differ");
                c.expect(inf.back().predicted == never.back().predicted, cohort.name + ": predictions differ");
                c.expect(inf.back().contradictions.raised == 0, cohort.name + ": contradiction at kappa=inf");
                ++compared;
            }
            std::vector<const harness::UserRun*> a, b;
            for (const auto& r : never) a.push_back(&r);
            for (const auto& r : inf) b.push_back(&r);
            const auto first = static_cast<std::int64_t>(cfg.f1_start_day - 1) * 48;
            const auto sa = harness::average_series(a, first);
            const auto sb = harness::average_series(b, first);
            c.expect(sa.macro == sb.macro && sa.weighted == sb.weighted && sa.users == sb.users,
                     cohort.name + ": metrics differ");
        }
    }
    return {c.failures == 0, c.failures ? c.failed()
                                        : fmt::format("{} user runs: trained sets, predictions and F1 series identical",
                                                      compared)};
}

// --- Qualitative reproduction -----------------------------------------------

Outcome qualitative_reproduction() {
    const auto t0 = steady_clock::now();
    auto cfg = harness::RunConfig::defaults();
    cfg.seeds.clear();
    for (std::uint64_t s = 1; s <= 10; ++s) cfg.seeds.push_back(s);
    cfg.users = 20;
    cfg.event_logs = false;
    std::vector<harness::Cohort> cohorts;
    for (const auto& c : cfg.cohorts) {
        if (c.name == "reliable" || c.name == "inattentive" || c.name == "tricky") cohorts.push_back(c);
    }
    cfg.cohorts = cohorts;
    const auto summary = harness::summarize(harness::run_experiment(cfg));
    const double secs = seconds_since(t0);

    std::map<std::string, const harness::CohortSummary*> by_name;
    for (const auto& c : summary) by_name[c.name] = &c;
    Checker c;
    std::string detail;
    const auto diff = [&](const std::string& name) -> std::optional<double> {
        if (!by_name.count(name)) return std::nullopt;
        return by_name.at(name)->skel_minus_gp_never;
    };
    const auto inattentive = diff("inattentive");
    const auto reliable = diff("reliable");
    const auto tricky = diff("tricky");
    std::optional<double> rate;
    if (by_name.count("reliable")) {
        for (const auto& m : by_name.at("reliable")->methods) {
            if (m.method == harness::Method::Skel) rate = m.contradiction_rate;
        }
    }
    c.expect(inattentive && *inattentive >= 0.05, fmt::format("(a) inattentive diff {}", inattentive.value_or(NAN)));
    c.expect(reliable && std::abs(*reliable) <= 0.02, fmt::format("(b) reliable diff {}", reliable.value_or(NAN)));
    c.expect(rate && *rate <= 0.02, fmt::format("(b) reliable contradiction rate {}", rate.value_or(NAN)));
    c.expect(tricky.has_value(), "(c) tricky diff missing");
    c.expect(secs < 600.0, fmt::format("runtime {:.0f} s", secs));
    for (const auto& s : summary) {
        for (const auto& m : s.methods) {
            detail += fmt::format("{}/{} F1 {:.4f}; ", s.name, harness::to_string(m.method), m.mean_final_macro.value_or(NAN));
        }
    }
    detail += fmt::format("(a) inattentive SkeL-GP_never {:+.4f}; (b) reliable {:+.4f}, contradictions {:.2f}% of "
                          "post-bootstrap diaries; (c) tricky {:+.4f}; {:.0f} s",
                          inattentive.value_or(NAN), reliable.value_or(NAN), 100.0 * rate.value_or(NAN),
                          tricky.value_or(NAN), secs);
    return {c.failures == 0, c.failures ? c.failed() + " | " + detail : detail};
}

// --- Feature pipeline -------------------------------------------------------

Outcome feature_pipeline() {
    using namespace features;
    Checker c;
    const std::array<GeoPoint, 2> pair{{{46.0, 11.0}, {46.001, 11.0}}};
    const auto g = geo_features(pair);
    c.expect(g.direct_distance && std::abs(*g.direct_distance - 111.19) <= 0.01,
             fmt::format("haversine {}", g.direct_distance.value_or(NAN)));
    c.expect(g.direct_distance && std::abs(g.radius_of_gyration - *g.direct_distance / 2) <= 1e-9,
             fmt::format("gyration {}", g.radius_of_gyration));

    const auto base = parse_iso("2023-10-02T00:00:00.000Z");
    for (int slot = 0; slot < 48 * 7; ++slot) {
        FeatureRow r;
        const auto t = base + minutes(30 * slot);
        compute_time_features(t, TimeBands::Contiguous, r);
        const double s = r.get(Feature::TimeSinHour), co = r.get(Feature::TimeCosHour);
        c.expect(std::abs(s * s + co * co - 1.0) <= 1e-12, "sin^2 + cos^2 != 1");
        const double hour = (slot % 48) / 2.0;
        c.expect(std::abs(s - std::sin(2 * std::numbers::pi * hour / 24)) <= 1e-12, "sin(hour) mismatch");
        c.expect(std::abs(co - std::cos(2 * std::numbers::pi * hour / 24)) <= 1e-12, "cos(hour) mismatch");
        const double bands = r.get(Feature::TimeIsMorning) + r.get(Feature::TimeIsNoon) +
                             r.get(Feature::TimeIsAfternoon) + r.get(Feature::TimeIsEvening) +
                             r.get(Feature::TimeIsNight);
        c.expect(bands == 1.0, "time bands do not partition the day");
        c.expect(r.get(Feature::TimeIsWorkday) == (slot / 48 < 5 ? 1.0 : 0.0), "workday flag");
    }

    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> count(1, 15), minute(0, 29);
    std::uniform_real_distribution<double> step(-0.01, 0.01);
    std::size_t with_path = 0;
    for (int k = 0; k < 1000; ++k) {
        Window w{"u", k, base + minutes(30 * k), minutes(30), {}};
        double lat = 46.0 + step(rng) * 100, lon = 11.0 + step(rng) * 100;
        std::vector<int> mins;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) mins.push_back(minute(rng));
        std::sort(mins.begin(), mins.end());
        for (const int m : mins) {
            w.events.push_back(SensorEvent{"u", w.start + minutes(m), SensorKind::Location,
                                           LocationReading{lat, lon, 200.0}});
            lat += step(rng);
            lon += step(rng);
        }
        const auto row = compute_features(w);
        if (n >= 2) {
            ++with_path;
            c.expect(row.get(Feature::LocationTotalDistance) >= row.get(Feature::LocationDirectDistance),
                     fmt::format("window {}: total < direct", k));
        }
        c.expect(row.get(Feature::LocationRadiusOfGyration) >= 0.0, "negative gyration");
    }

    std::bernoulli_distribution drop(0.9);
    std::uniform_int_distribution<int> kind(0, 11), n_events(0, 30);
    std::uniform_real_distribution<double> u(-10, 10);
    OnlineStandardizer standardizer;
    std::size_t missing = 0, cells = 0, bad = 0;
    for (int k = 0; k < 1000; ++k) {
        Window w{"u", k, base + minutes(30 * k), minutes(30), {}};
        const int n = n_events(rng);
        for (int i = 0; i < n; ++i) {
            if (drop(rng)) continue;
            const auto t = w.start + minutes(minute(rng));
            switch (kind(rng) % 4) {
                case 0: w.events.push_back({"u", t, SensorKind::Accelerometer, AxisReading{u(rng), u(rng), u(rng)}}); break;
                case 1: w.events.push_back({"u", t, SensorKind::Location, LocationReading{46 + u(rng) * 1e-3, 11, 200}}); break;
                case 2: w.events.push_back({"u", t, SensorKind::BatteryLevel, BatteryLevelReading{50 + u(rng)}}); break;
                default: w.events.push_back({"u", t, SensorKind::StepDetector, StepReading{}}); break;
            }
        }
        auto row = compute_features(w);
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            if (drop(rng)) row.missing[f] = true;
            missing += row.missing[f];
            ++cells;
        }
        if (!standardizer.transform(row).values.allFinite()) ++bad;
    }
    const double share = static_cast<double>(missing) / static_cast<double>(cells);
    c.expect(share >= 0.9, fmt::format("missingness only {:.3f}", share));
    c.expect(bad == 0, fmt::format("{} non-finite input vectors", bad));
    return {c.failures == 0, c.failures ? c.failed()
                                        : fmt::format("haversine {:.4f} m, r_g = D/2, time identities on 336 slots, "
                                                      "total >= direct on {} paths in 1000 windows, finite inputs at "
                                                      "{:.1f}% missingness",
                                                      *g.direct_distance, with_path, 100 * share)};
}

// --- Metrics oracle ---------------------------------------------------------

using Stream = std::vector<std::optional<ClassIndex>>;

// Recounts the whole prefix from scratch at every slot.
harness::F1Series naive_f1(const Stream& pred, const Stream& truth, std::size_t classes) {
    harness::F1Series out;
    bool any = false;
    for (std::size_t t = 0; t < pred.size(); ++t) {
        std::vector<std::vector<std::size_t>> confusion(classes, std::vector<std::size_t>(classes, 0));
        std::size_t pairs = 0;
        for (std::size_t i = 0; i <= t; ++i) {
            if (!pred[i] || !truth[i]) continue;
            ++confusion[*truth[i]][*pred[i]];
            ++pairs;
        }
        if (pairs == 0) {
            out.macro.emplace_back();
            out.weighted.emplace_back();
            continue;
        }
        any = true;
        double sum = 0, weighted = 0;
        std::size_t seen = 0, support_total = 0;
        for (std::size_t c = 0; c < classes; ++c) {
            std::size_t tp = confusion[c][c], fp = 0, fn = 0;
            for (std::size_t o = 0; o < classes; ++o) {
                if (o == c) continue;
                fp += confusion[o][c];
                fn += confusion[c][o];
            }
            if (2 * tp + fp + fn == 0) continue;
            const double f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
            sum += f1;
            weighted += f1 * static_cast<double>(tp + fn);
            support_total += tp + fn;
            ++seen;
        }
        out.macro.emplace_back(sum / static_cast<double>(seen));
        out.weighted.emplace_back(weighted / static_cast<double>(support_total));
    }
    if (!any) return {};
    return out;
}

Outcome metrics_oracle() {
    std::mt19937_64 rng(314);
    std::size_t mismatched = 0, slots = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 600)(rng);
        const std::size_t classes = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
        std::uniform_int_distribution<ClassIndex> cls(0, classes - 1);
        std::bernoulli_distribution gap(0.2);
        Stream pred(n), truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!gap(rng)) pred[i] = cls(rng);
            if (!gap(rng)) truth[i] = cls(rng);
        }
        const auto fast = harness::progressive_f1(pred, truth, classes);
        const auto slow = naive_f1(pred, truth, classes);
        if (fast.macro != slow.macro || fast.weighted != slow.weighted) ++mismatched;
        slots += n;
    }
    return {mismatched == 0, fmt::format("{} of 100 streams ({} slots) differ from full recount", mismatched, slots)};
}

// --- Determinism ------------------------------------------------------------

std::uint64_t fnv1a(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::uint64_t h = 1469598103934665603ULL;
    char ch;
    while (in.get(ch)) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    return h;
}

std::map<std::string, std::uint64_t> hash_tree(const std::filesystem::path& dir) {
    std::map<std::string, std::uint64_t> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).string()] = fnv1a(e.path());
    }
    return out;
}

Outcome determinism() {
    auto cfg = harness::RunConfig::defaults();
    cfg.seeds = {7};
    cfg.users = 3;
    cfg.event_logs = true;
    const auto root = std::filesystem::temp_directory_path() / "skel_acceptance_determinism";
    std::filesystem::remove_all(root);
    std::vector<std::map<std::string, std::uint64_t>> runs;
    for (const auto* name : {"a", "b"}) {
        cfg.out = root / name;
        harness::report(harness::run_experiment(cfg), cfg.out);
        runs.push_back(hash_tree(cfg.out));
    }
    std::filesystem::remove_all(root);
    const bool same = !runs[0].empty() && runs[0] == runs[1];
    return {same, fmt::format("{} files (reports and event logs), hashes {}", runs[0].size(),
                              same ? "identical" : "differ")};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gp-correctness", gp_correctness},
        {"kernel-values", kernel_values},
        {"learner-conformance", learner_conformance},
        {"scheduler-conformance", scheduler_conformance},
        {"baseline-equivalence", baseline_equivalence},
        {"qualitative-reproduction", qualitative_reproduction},
        {"feature-pipeline", feature_pipeline},
        {"metrics-oracle", metrics_oracle},
        {"determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        if (!o.pass) ++failed;
        fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
