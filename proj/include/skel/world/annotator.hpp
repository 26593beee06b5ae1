#pragma once

#include "skel/config.hpp"
#include "skel/engine/skeptical_learner.hpp"
#include "skel/taxonomy.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace skel::world {

enum class AnnotatorKind : std::uint8_t { Reliable, Inattentive, Predictable, Tricky };
std::string_view to_string(AnnotatorKind k);
AnnotatorKind parse_annotator_kind(std::string_view s);

/// How the annotator answers "Is <time> <label> correct?".
enum class ContradictionStyle : std::uint8_t {
    Truthful,        // compares with what actually happened
    Mixture,         // draws confirm / reassert / new label at fixed rates
    AlwaysReassert,  // stands by the first answer
};
std::string_view to_string(ContradictionStyle s);
ContradictionStyle parse_contradiction_style(std::string_view s);

struct AnnotatorProfile {
    AnnotatorKind kind = AnnotatorKind::Reliable;
    /// Inattentive: probability of a wrong diary answer.
    double noise_rate = 0.0;
    /// Probability of answering any question at all.
    double response_rate = 1.0;
    ContradictionStyle contradiction = ContradictionStyle::Truthful;
    double p_confirm_machine = 0.25;
    double p_reassert = 0.60;
    double p_new_label = 0.15;
    /// Probability of flagging each wrong prediction in the evaluation list.
    double evaluation_recall = 1.0;
    /// Tricky: true main category that is reported as `tricky_to`.
    MainCategory tricky_from = MainCategory::Other;
    MainCategory tricky_to = MainCategory::Home;

    /// Throws ConfigError when a probability is out of range or the
    /// contradiction mix does not sum to 1.
    void validate() const;
    /// Preset for a kind: reliable (truthful, no noise), inattentive
    /// (noise 0.3), predictable (routine answers), tricky (Other reported
    /// as Home, always reasserts).
    static AnnotatorProfile preset(AnnotatorKind kind);
    /// Preset for [annotator] kind, overridden by the remaining keys.
    static AnnotatorProfile from_config(const KeyValueConfig& kv, const std::string& section = "annotator");
};

/// Diary answer, or nullopt for no response.
std::optional<Label> answer_diary(const AnnotatorProfile& p, Label truth, Label routine, std::mt19937_64& rng);

engine::ContradictionResponse answer_contradiction(const AnnotatorProfile& p, Label original, Label machine,
                                                   Label truth, std::mt19937_64& rng);

struct Judged {
    std::int64_t window_index = 0;
    Label predicted;
    Label truth;
};
/// Windows flagged as wrong. Correctness is judged on the main category.
std::vector<std::int64_t> answer_evaluation(const AnnotatorProfile& p, const std::vector<Judged>& items,
                                            std::mt19937_64& rng);

/// Whether a skeptic, relabel or evaluation question gets answered at all.
bool responds(const AnnotatorProfile& p, std::mt19937_64& rng);
/// Delay of an answered question: uniform in [0, expiry).
Duration answer_delay(Duration expiry, std::mt19937_64& rng);

}  // namespace skel::world
