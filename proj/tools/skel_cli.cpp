#include "skel/config.hpp"
#include "skel/errors.hpp"
#include "skel/features/pipeline.hpp"
#include "skel/features/sensor_io.hpp"
#include "skel/harness/experiment.hpp"
#include "skel/harness/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

namespace {

using namespace skel;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string input;
    std::optional<std::size_t> threads;
    bool quiet = false;
};

harness::RunConfig load_config(const Options& o) {
    auto cfg = o.config.empty() ? [] {
        auto c = harness::RunConfig::defaults();
        c.validate();
        return c;
    }()
                                : harness::RunConfig::from_config(KeyValueConfig::from_file(o.config));
    if (o.seed) cfg.seeds = {*o.seed};
    if (!o.out.empty()) cfg.out = o.out;
    if (o.threads) cfg.threads = *o.threads;
    return cfg;
}

void simulate(const Options& o) {
    const auto cfg = load_config(o);
    for (const auto seed : cfg.seeds) {
        const auto dir = harness::world_dump_dir(cfg.out, seed);
        harness::dump_worlds(harness::generate_worlds(cfg, seed), cfg.study, dir);
        spdlog::info("wrote {} users to {}", cfg.users, dir.string());
    }
}

void featurize(const Options& o) {
    const auto cfg = load_config(o);
    if (o.input.empty()) throw UsageError("featurize needs --input <sensor log>");
    auto events = features::read_sensor_log(o.input);
    features::WindowOptions windows;
    windows.period = cfg.study.period();
    const auto stream = features::windowize(std::move(events), windows);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!o.out.empty()) {
        file.open(o.out, std::ios::binary);
        if (!file) throw IoError(fmt::format("cannot write {}", o.out));
        out = &file;
    }
    features::write_feature_header(*out);
    for (const auto& w : stream.windows) features::write_feature_row(*out, features::compute_features(w));
    if (!*out) throw IoError("failed to write features");
}

void run(const Options& o) {
    const auto cfg = load_config(o);
    const auto metrics = harness::run_experiment(cfg);
    harness::report(metrics, cfg.out);
    for (const auto& c : harness::summarize(metrics)) {
        for (const auto& m : c.methods) {
            spdlog::info("{} {}: mean final macro-F1 {}", c.name, harness::to_string(m.method),
                         m.mean_final_macro ? fmt::format("{:.4f}", *m.mean_final_macro) : "n/a");
        }
    }
}

void report(const Options& o) {
    if (o.input.empty()) throw UsageError("report needs --input <metrics.json>");
    std::ifstream in(o.input);
    if (!in) throw IoError(fmt::format("cannot open {}", o.input));
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("{}: {}", o.input, e.what()));
    }
    harness::report(harness::metrics_from_json(j), o.out.empty() ? "report" : o.out);
}

int fail(std::string_view kind, const std::string& message, int code) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Skeptical learning laboratory"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Run a single seed instead of run.seeds");
        sub->add_option("--out", o.out, "Output directory (file for featurize)");
        sub->add_flag("--quiet", o.quiet, "Only log warnings");
    };
    auto* sim = app.add_subcommand("simulate", "Generate simulated worlds and dump them");
    common(sim);
    auto* feat = app.add_subcommand("featurize", "Aggregate a sensor log into per-window features (CSV)");
    common(feat);
    feat->add_option("--input", o.input, "Sensor log (.jsonl or .csv)")->required();
    auto* runc = app.add_subcommand("run", "Run the full study and write the report");
    common(runc);
    runc->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    auto* rep = app.add_subcommand("report", "Render report files from a metrics.json");
    common(rep);
    rep->add_option("--input", o.input, "metrics.json written by run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }
    spdlog::set_level(o.quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (sim->parsed()) simulate(o);
        if (feat->parsed()) featurize(o);
        if (runc->parsed()) run(o);
        if (rep->parsed()) report(o);
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), 1);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
    return 0;
}
