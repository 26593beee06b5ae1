#include "skel/world/annotator.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>

namespace skel::world {

namespace {

constexpr std::array<std::string_view, 4> kKindNames{"reliable", "inattentive", "predictable", "tricky"};
constexpr std::array<std::string_view, 3> kStyleNames{"truthful", "mixture", "always_reassert"};

template <typename Enum, std::size_t N>
Enum parse_named(const std::array<std::string_view, N>& names, std::string_view s, const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<Enum>(i);
    }
    throw ConfigError(fmt::format("unknown {} '{}'", what, s));
}

MainCategory parse_main(const std::string& s, const char* key) {
    const auto m = parse_main_category(s);
    if (!m) throw ConfigError(fmt::format("{}: unknown main category '{}'", key, s));
    return *m;
}

Label wrong_label(Label truth, std::mt19937_64& rng) {
    auto main = static_cast<std::size_t>(truth.main());
    main = (main + std::uniform_int_distribution<std::size_t>(1, kMainCategoryCount - 1)(rng)) % kMainCategoryCount;
    const auto subs = subcategories_of(static_cast<MainCategory>(main));
    return subs[std::uniform_int_distribution<std::size_t>(0, subs.size() - 1)(rng)];
}

}  // namespace

std::string_view to_string(AnnotatorKind k) { return kKindNames[static_cast<std::size_t>(k)]; }
AnnotatorKind parse_annotator_kind(std::string_view s) {
    return parse_named<AnnotatorKind>(kKindNames, s, "annotator kind");
}
std::string_view to_string(ContradictionStyle s) { return kStyleNames[static_cast<std::size_t>(s)]; }
ContradictionStyle parse_contradiction_style(std::string_view s) {
    return parse_named<ContradictionStyle>(kStyleNames, s, "contradiction style");
}

void AnnotatorProfile::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("{} must lie in [0, 1]", name));
    };
    prob(noise_rate, "noise_rate");
    prob(response_rate, "response_rate");
    prob(p_confirm_machine, "p_confirm_machine");
    prob(p_reassert, "p_reassert");
    prob(p_new_label, "p_new_label");
    prob(evaluation_recall, "evaluation_recall");
    if (std::abs(p_confirm_machine + p_reassert + p_new_label - 1.0) > 1e-9) {
        throw ConfigError("contradiction probabilities must sum to 1");
    }
}

AnnotatorProfile AnnotatorProfile::preset(AnnotatorKind kind) {
    AnnotatorProfile p;
    p.kind = kind;
    p.response_rate = 0.9;
    switch (kind) {
        case AnnotatorKind::Reliable: break;
        case AnnotatorKind::Inattentive: p.noise_rate = 0.3; break;
        case AnnotatorKind::Predictable: break;
        case AnnotatorKind::Tricky: p.contradiction = ContradictionStyle::AlwaysReassert; break;
    }
    return p;
}

AnnotatorProfile AnnotatorProfile::from_config(const KeyValueConfig& kv, const std::string& section) {
    kv.reject_unknown(section, {"kind", "noise_rate", "response_rate", "contradiction", "p_confirm_machine",
                                "p_reassert", "p_new_label", "evaluation_recall", "tricky_from", "tricky_to"});
    const auto key = [&](const char* k) { return section + "." + k; };
    auto p = preset(parse_annotator_kind(kv.get_string(key("kind"), "reliable")));
    p.noise_rate = kv.get_double(key("noise_rate"), p.noise_rate);
    p.response_rate = kv.get_double(key("response_rate"), p.response_rate);
    if (kv.has(key("contradiction"))) {
        p.contradiction = parse_contradiction_style(kv.get_string(key("contradiction"), ""));
    }
    p.p_confirm_machine = kv.get_double(key("p_confirm_machine"), p.p_confirm_machine);
    p.p_reassert = kv.get_double(key("p_reassert"), p.p_reassert);
    p.p_new_label = kv.get_double(key("p_new_label"), p.p_new_label);
    p.evaluation_recall = kv.get_double(key("evaluation_recall"), p.evaluation_recall);
    if (kv.has(key("tricky_from"))) p.tricky_from = parse_main(kv.get_string(key("tricky_from"), ""), "tricky_from");
    if (kv.has(key("tricky_to"))) p.tricky_to = parse_main(kv.get_string(key("tricky_to"), ""), "tricky_to");
    p.validate();
    return p;
}

std::optional<Label> answer_diary(const AnnotatorProfile& p, Label truth, Label routine, std::mt19937_64& rng) {
    if (!std::bernoulli_distribution(p.response_rate)(rng)) return std::nullopt;
    switch (p.kind) {
        case AnnotatorKind::Reliable: return truth;
        case AnnotatorKind::Inattentive:
            return std::bernoulli_distribution(p.noise_rate)(rng) ? wrong_label(truth, rng) : truth;
        case AnnotatorKind::Predictable: return routine;
        case AnnotatorKind::Tricky:
            return truth.main() == p.tricky_from ? Label::representative(p.tricky_to) : truth;
    }
    return truth;
}

engine::ContradictionResponse answer_contradiction(const AnnotatorProfile& p, Label original, Label machine,
                                                   Label truth, std::mt19937_64& rng) {
    switch (p.contradiction) {
        case ContradictionStyle::AlwaysReassert: return engine::ReassertOriginal{};
        case ContradictionStyle::Mixture: {
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            if (u < p.p_confirm_machine) return engine::ConfirmMachine{};
            if (u < p.p_confirm_machine + p.p_reassert) return engine::ReassertOriginal{};
            return engine::NewLabel{wrong_label(original, rng)};
        }
        case ContradictionStyle::Truthful: break;
    }
    if (machine.main() == truth.main()) return engine::ConfirmMachine{};
    if (original.main() == truth.main()) return engine::ReassertOriginal{};
    return engine::NewLabel{truth};
}

std::vector<std::int64_t> answer_evaluation(const AnnotatorProfile& p, const std::vector<Judged>& items,
                                            std::mt19937_64& rng) {
    std::vector<std::int64_t> flagged;
    std::bernoulli_distribution notice(p.evaluation_recall);
    for (const auto& item : items) {
        if (item.predicted.main() != item.truth.main() && notice(rng)) flagged.push_back(item.window_index);
    }
    return flagged;
}

bool responds(const AnnotatorProfile& p, std::mt19937_64& rng) {
    return std::bernoulli_distribution(p.response_rate)(rng);
}

Duration answer_delay(Duration expiry, std::mt19937_64& rng) {
    const auto ms = std::uniform_int_distribution<std::int64_t>(0, expiry.count() - 1)(rng);
    return Duration{ms};
}

}  // namespace skel::world
