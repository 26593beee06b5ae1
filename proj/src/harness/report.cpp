#include "skel/harness/report.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>

namespace skel::harness {

namespace {

using nlohmann::json;

std::string cell(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

json stats_json(const ContradictionStats& s) {
    return {{"raised", s.raised},
            {"sent", s.sent},
            {"answered", s.answered},
            {"confirmed_machine", s.confirmed_machine},
            {"reasserted", s.reasserted},
            {"new_label", s.new_label},
            {"expired", s.expired},
            {"diaries_answered", s.diaries_answered},
            {"diaries_answered_after_bootstrap", s.diaries_answered_after_bootstrap}};
}

ContradictionStats contradiction_stats(const json& j) {
    ContradictionStats s;
    s.raised = j.at("raised");
    s.sent = j.at("sent");
    s.answered = j.at("answered");
    s.confirmed_machine = j.at("confirmed_machine");
    s.reasserted = j.at("reasserted");
    s.new_label = j.at("new_label");
    s.expired = j.at("expired");
    s.diaries_answered = j.at("diaries_answered");
    s.diaries_answered_after_bootstrap = j.at("diaries_answered_after_bootstrap");
    return s;
}

json stats_json(const EvaluationStats& s) {
    return {{"lists", s.lists},
            {"lists_answered", s.lists_answered},
            {"items", s.items},
            {"flagged", s.flagged},
            {"wrong", s.wrong}};
}

EvaluationStats evaluation_stats(const json& j) {
    EvaluationStats s;
    s.lists = j.at("lists");
    s.lists_answered = j.at("lists_answered");
    s.items = j.at("items");
    s.flagged = j.at("flagged");
    s.wrong = j.at("wrong");
    return s;
}

json series_json(const std::vector<std::optional<double>>& s) {
    json out = json::array();
    for (const auto& v : s) out.push_back(opt(v));
    return out;
}

std::vector<std::optional<double>> series_from(const json& j) {
    std::vector<std::optional<double>> out;
    for (const auto& v : j) out.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    return out;
}

void add(ContradictionStats& a, const ContradictionStats& b) {
    a.raised += b.raised;
    a.sent += b.sent;
    a.answered += b.answered;
    a.confirmed_machine += b.confirmed_machine;
    a.reasserted += b.reasserted;
    a.new_label += b.new_label;
    a.expired += b.expired;
    a.diaries_answered += b.diaries_answered;
    a.diaries_answered_after_bootstrap += b.diaries_answered_after_bootstrap;
}

void add(EvaluationStats& a, const EvaluationStats& b) {
    a.lists += b.lists;
    a.lists_answered += b.lists_answered;
    a.items += b.items;
    a.flagged += b.flagged;
    a.wrong += b.wrong;
}

class File {
public:
    explicit File(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError(fmt::format("cannot write {}", path.string()));
    }
    ~File() noexcept(false) {
        out_.close();
        if (!out_ && std::uncaught_exceptions() == 0) throw IoError(fmt::format("write failed: {}", path_.string()));
    }
    std::ofstream& operator*() { return out_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace

std::vector<CohortSummary> summarize(const MetricsBundle& m) {
    std::vector<CohortSummary> out;
    for (const auto& c : m.cohorts) {
        CohortSummary cs;
        cs.name = c.name;
        std::optional<double> skel, never;
        for (const auto& s : c.series) {
            MethodSummary ms;
            ms.method = s.method;
            double macro = 0, weighted = 0;
            std::size_t scored = 0;
            for (const auto& u : m.users) {
                if (u.cohort != c.name || u.method != s.method) continue;
                ++ms.users;
                add(ms.contradictions, u.contradictions);
                add(ms.evaluation, u.evaluation);
                if (u.final_macro) {
                    macro += *u.final_macro;
                    weighted += *u.final_weighted;
                    ++scored;
                }
            }
            if (scored > 0) {
                ms.mean_final_macro = macro / static_cast<double>(scored);
                ms.mean_final_weighted = weighted / static_cast<double>(scored);
            }
            ms.contradiction_rate = ratio(ms.contradictions.raised, ms.contradictions.diaries_answered_after_bootstrap);
            ms.confirm_machine_fraction = ratio(ms.contradictions.confirmed_machine, ms.contradictions.answered);
            ms.evaluation_correctness = ratio(ms.evaluation.items - ms.evaluation.flagged, ms.evaluation.items);
            ms.evaluation_accuracy = ratio(ms.evaluation.items - ms.evaluation.wrong, ms.evaluation.items);
            if (s.method == Method::Skel) skel = ms.mean_final_macro;
            if (s.method == Method::GpNever) never = ms.mean_final_macro;
            cs.methods.push_back(ms);
        }
        if (skel && never) cs.skel_minus_gp_never = *skel - *never;
        out.push_back(std::move(cs));
    }
    return out;
}

json to_json(const MetricsBundle& m) {
    json cohorts = json::array();
    for (const auto& c : m.cohorts) {
        json series = json::array();
        for (const auto& s : c.series) {
            series.push_back({{"method", std::string(to_string(s.method))},
                              {"macro", series_json(s.macro)},
                              {"weighted", series_json(s.weighted)},
                              {"users", s.users}});
        }
        cohorts.push_back({{"name", c.name}, {"series", std::move(series)}});
    }
    json users = json::array();
    for (const auto& u : m.users) {
        users.push_back({{"seed", u.seed},
                         {"cohort", u.cohort},
                         {"user", u.user_id},
                         {"method", std::string(to_string(u.method))},
                         {"final_macro", opt(u.final_macro)},
                         {"final_weighted", opt(u.final_weighted)},
                         {"contradictions", stats_json(u.contradictions)},
                         {"evaluation", stats_json(u.evaluation)}});
    }
    return {{"format", "skel-metrics"},
            {"version", 1},
            {"span_start", format_iso(m.span_start)},
            {"period_minutes", m.period_minutes},
            {"cohorts", std::move(cohorts)},
            {"users", std::move(users)}};
}

MetricsBundle metrics_from_json(const json& j) {
    try {
        if (j.at("format") != "skel-metrics") throw FormatError("not a metrics document");
        if (j.at("version") != 1) throw FormatError(fmt::format("unsupported metrics version {}", j.at("version").dump()));
        MetricsBundle m;
        m.span_start = parse_iso(j.at("span_start").get<std::string>());
        m.period_minutes = j.at("period_minutes");
        for (const auto& c : j.at("cohorts")) {
            CohortMetrics cm;
            cm.name = c.at("name");
            for (const auto& s : c.at("series")) {
                MethodSeries ms;
                ms.method = parse_method(s.at("method").get<std::string>());
                ms.macro = series_from(s.at("macro"));
                ms.weighted = series_from(s.at("weighted"));
                ms.users = s.at("users").get<std::vector<std::size_t>>();
                if (ms.macro.size() != ms.users.size() || ms.weighted.size() != ms.users.size()) {
                    throw FormatError("series lengths differ");
                }
                cm.series.push_back(std::move(ms));
            }
            m.cohorts.push_back(std::move(cm));
        }
        for (const auto& u : j.at("users")) {
            UserSummary s;
            s.seed = u.at("seed");
            s.cohort = u.at("cohort");
            s.user_id = u.at("user");
            s.method = parse_method(u.at("method").get<std::string>());
            const auto& fm = u.at("final_macro");
            const auto& fw = u.at("final_weighted");
            if (!fm.is_null()) s.final_macro = fm.get<double>();
            if (!fw.is_null()) s.final_weighted = fw.get<double>();
            s.contradictions = contradiction_stats(u.at("contradictions"));
            s.evaluation = evaluation_stats(u.at("evaluation"));
            m.users.push_back(std::move(s));
        }
        return m;
    } catch (const FormatError&) {
        throw;
    } catch (const Error& e) {
        throw FormatError(fmt::format("metrics: {}", e.what()));
    } catch (const json::exception& e) {
        throw FormatError(fmt::format("metrics: {}", e.what()));
    }
}

std::string render_f1_chart(const CohortMetrics& c, Timestamp span_start, int period_minutes) {
    constexpr double kWidth = 800, kHeight = 420, kLeft = 60, kRight = 60, kTop = 40, kBottom = 50;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    std::size_t len = 0, max_users = 1;
    for (const auto& s : c.series) {
        len = std::max(len, s.macro.size());
        for (auto u : s.users) max_users = std::max(max_users, u);
    }
    const double step = len > 1 ? plot_w / static_cast<double>(len - 1) : 0.0;
    auto x_of = [&](std::size_t t) { return kLeft + step * static_cast<double>(t); };
    auto y_of = [&](double f) { return kTop + plot_h * (1.0 - f); };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n"
        "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"20\" font-size=\"14\">Progressive macro-F1, cohort {3}</text>\n"
        "<rect x=\"{2}\" y=\"{4}\" width=\"{5}\" height=\"{6}\" fill=\"none\" stroke=\"#444\"/>\n",
        kWidth, kHeight, kLeft, c.name, kTop, plot_w, plot_h);
    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        svg += fmt::format("<line x1=\"{0}\" x2=\"{1}\" y1=\"{2:.2f}\" y2=\"{2:.2f}\" stroke=\"#ddd\"/>\n"
                           "<text x=\"{3}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.2f}</text>\n"
                           "<text x=\"{6}\" y=\"{4:.2f}\" fill=\"#888\">{7}</text>\n",
                           kLeft, kLeft + plot_w, y_of(f), kLeft - 6, y_of(f) + 4, f, kLeft + plot_w + 6,
                           static_cast<std::size_t>(f * static_cast<double>(max_users) + 0.5));
    }
    const std::size_t per_day = period_minutes > 0 ? static_cast<std::size_t>(24 * 60 / period_minutes) : 1;
    for (std::size_t t = 0; t < len; t += per_day) {
        const auto label = format_iso(span_start + std::chrono::minutes(period_minutes) * static_cast<std::int64_t>(t))
                               .substr(5, 5);
        svg += fmt::format("<line x1=\"{0:.2f}\" x2=\"{0:.2f}\" y1=\"{1}\" y2=\"{2}\" stroke=\"#eee\"/>\n"
                           "<text x=\"{0:.2f}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>\n",
                           x_of(t), kTop, kTop + plot_h, kTop + plot_h + 16, label);
    }

    auto polyline = [&](auto value_at, const std::string& style) {
        std::string out, points;
        auto flush = [&] {
            if (!points.empty()) out += fmt::format("<polyline fill=\"none\" {} points=\"{}\"/>\n", style, points);
            points.clear();
        };
        for (std::size_t t = 0; t < len; ++t) {
            const std::optional<double> v = value_at(t);
            if (!v) {
                flush();
                continue;
            }
            if (!points.empty()) points += ' ';
            points += fmt::format("{:.2f},{:.2f}", x_of(t), y_of(*v));
        }
        flush();
        return out;
    };

    static constexpr std::array<const char*, 4> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    if (!c.series.empty()) {
        const auto& users = c.series.front().users;
        svg += polyline(
            [&](std::size_t t) -> std::optional<double> {
                if (t >= users.size()) return std::nullopt;
                return static_cast<double>(users[t]) / static_cast<double>(max_users);
            },
            "stroke=\"#aaa\" stroke-dasharray=\"4 3\"");
    }
    for (std::size_t i = 0; i < c.series.size(); ++i) {
        const auto& s = c.series[i];
        svg += polyline(
            [&](std::size_t t) { return t < s.macro.size() ? s.macro[t] : std::nullopt; },
            fmt::format("stroke=\"{}\" stroke-width=\"1.5\"", kColors[i % kColors.size()]));
        svg += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kLeft + 10 + 110 * static_cast<double>(i),
                           kHeight - 12, kColors[i % kColors.size()], to_string(s.method));
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"#888\">active users</text>\n",
                       kLeft + 10 + 110 * static_cast<double>(c.series.size()), kHeight - 12);
    svg += "</svg>\n";
    return svg;
}

void report(const MetricsBundle& m, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

    std::vector<Method> methods;
    for (const auto& c : m.cohorts) {
        for (const auto& s : c.series) {
            if (std::find(methods.begin(), methods.end(), s.method) == methods.end()) methods.push_back(s.method);
        }
    }
    {
        File f(dir / "progressive_f1.csv");
        *f << "cohort,slot,start";
        for (const auto& suffix : {"macro", "weighted", "users"}) {
            for (auto meth : methods) *f << ',' << to_string(meth) << '_' << suffix;
        }
        *f << '\n';
        for (const auto& c : m.cohorts) {
            std::size_t len = 0;
            for (const auto& s : c.series) len = std::max(len, s.macro.size());
            auto find = [&](Method meth) -> const MethodSeries* {
                for (const auto& s : c.series) {
                    if (s.method == meth) return &s;
                }
                return nullptr;
            };
            for (std::size_t t = 0; t < len; ++t) {
                *f << c.name << ',' << t << ','
                   << format_iso(m.span_start + std::chrono::minutes(m.period_minutes) * static_cast<std::int64_t>(t));
                for (auto meth : methods) {
                    const auto* s = find(meth);
                    *f << ',' << (s && t < s->macro.size() ? cell(s->macro[t]) : "");
                }
                for (auto meth : methods) {
                    const auto* s = find(meth);
                    *f << ',' << (s && t < s->weighted.size() ? cell(s->weighted[t]) : "");
                }
                for (auto meth : methods) {
                    const auto* s = find(meth);
                    *f << ',' << (s && t < s->users.size() ? std::to_string(s->users[t]) : "");
                }
                *f << '\n';
            }
        }
    }
    {
        File f(dir / "user_final_f1.csv");
        *f << "seed,cohort,user,method,final_macro,final_weighted\n";
        for (const auto& u : m.users) {
            *f << u.seed << ',' << u.cohort << ',' << u.user_id << ',' << to_string(u.method) << ','
               << cell(u.final_macro) << ',' << cell(u.final_weighted) << '\n';
        }
    }
    {
        File f(dir / "contradictions.csv");
        *f << "seed,cohort,user,method,raised,sent,answered,confirmed_machine,reasserted,new_label,expired,"
              "diaries_answered,diaries_answered_after_bootstrap\n";
        for (const auto& u : m.users) {
            const auto& s = u.contradictions;
            *f << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", u.seed, u.cohort, u.user_id,
                              to_string(u.method), s.raised, s.sent, s.answered, s.confirmed_machine, s.reasserted,
                              s.new_label, s.expired, s.diaries_answered, s.diaries_answered_after_bootstrap);
        }
    }
    {
        File f(dir / "evaluation.csv");
        *f << "seed,cohort,user,method,lists,lists_answered,items,flagged,wrong,reported_correctness,accuracy\n";
        for (const auto& u : m.users) {
            const auto& e = u.evaluation;
            *f << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", u.seed, u.cohort, u.user_id, to_string(u.method),
                              e.lists, e.lists_answered, e.items, e.flagged, e.wrong,
                              cell(ratio(e.items - e.flagged, e.items)), cell(ratio(e.items - e.wrong, e.items)));
        }
    }
    {
        json cohorts = json::array();
        for (const auto& cs : summarize(m)) {
            json methods_json = json::object();
            for (const auto& ms : cs.methods) {
                methods_json[std::string(to_string(ms.method))] = {
                    {"users", ms.users},
                    {"mean_final_macro_f1", opt(ms.mean_final_macro)},
                    {"mean_final_weighted_f1", opt(ms.mean_final_weighted)},
                    {"contradictions", stats_json(ms.contradictions)},
                    {"contradiction_rate", opt(ms.contradiction_rate)},
                    {"confirm_machine_fraction", opt(ms.confirm_machine_fraction)},
                    {"evaluation", stats_json(ms.evaluation)},
                    {"evaluation_correctness", opt(ms.evaluation_correctness)},
                    {"evaluation_accuracy", opt(ms.evaluation_accuracy)}};
            }
            cohorts.push_back({{"name", cs.name},
                               {"methods", std::move(methods_json)},
                               {"skel_minus_gp_never_macro_f1", opt(cs.skel_minus_gp_never)}});
        }
        File f(dir / "summary.json");
        *f << json{{"span_start", format_iso(m.span_start)}, {"cohorts", std::move(cohorts)}}.dump(2) << '\n';
    }
    {
        File f(dir / "metrics.json");
        *f << to_json(m).dump() << '\n';
    }
    for (const auto& c : m.cohorts) {
        File f(dir / fmt::format("progressive_f1_{}.svg", c.name));
        *f << render_f1_chart(c, m.span_start, m.period_minutes);
    }
}

}  // namespace skel::harness
