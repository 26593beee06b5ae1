#include "skel/harness/metrics.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

namespace skel::harness {

F1Series progressive_f1(std::span<const std::optional<ClassIndex>> predicted,
                        std::span<const std::optional<ClassIndex>> truth, std::size_t classes) {
    if (predicted.size() != truth.size()) {
        throw UsageError(fmt::format("progressive_f1: {} predictions vs {} truth slots", predicted.size(),
                                     truth.size()));
    }
    std::vector<std::size_t> tp(classes), fp(classes), fn(classes);
    F1Series out;
    out.macro.reserve(predicted.size());
    out.weighted.reserve(predicted.size());
    bool scored = false;
    std::optional<double> macro, weighted;
    for (std::size_t t = 0; t < predicted.size(); ++t) {
        const auto& p = predicted[t];
        const auto& y = truth[t];
        if ((p && *p >= classes) || (y && *y >= classes)) {
            throw UsageError(fmt::format("progressive_f1: class index out of range at slot {}", t));
        }
        if (p && y) {
            scored = true;
            if (*p == *y) {
                ++tp[*p];
            } else {
                ++fp[*p];
                ++fn[*y];
            }
            double f1_sum = 0, weighted_sum = 0;
            std::size_t seen = 0, support_total = 0;
            for (std::size_t c = 0; c < classes; ++c) {
                const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
                if (denom == 0) continue;
                const double f1 = 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
                const std::size_t support = tp[c] + fn[c];
                f1_sum += f1;
                weighted_sum += f1 * static_cast<double>(support);
                support_total += support;
                ++seen;
            }
            macro = f1_sum / static_cast<double>(seen);
            weighted = weighted_sum / static_cast<double>(support_total);
        }
        out.macro.push_back(macro);
        out.weighted.push_back(weighted);
    }
    if (!scored) return {};
    return out;
}

std::optional<double> final_value(const std::vector<std::optional<double>>& series) {
    for (auto it = series.rbegin(); it != series.rend(); ++it) {
        if (*it) return *it;
    }
    return std::nullopt;
}

}  // namespace skel::harness
