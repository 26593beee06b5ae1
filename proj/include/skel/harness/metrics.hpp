#pragma once

#include "skel/taxonomy.hpp"

#include <optional>
#include <span>
#include <vector>

namespace skel::harness {

using ClassStream = std::vector<std::optional<ClassIndex>>;

/// Progressive F1: the value at slot t scores every slot <= t that has both
/// a prediction and a truth label. Macro averages per-class F1 over the
/// classes seen so far in either stream. Weighted averages it by truth
/// support. Slots before the first scored slot are nullopt; later slots
/// without a pair repeat the previous value.
struct F1Series {
    std::vector<std::optional<double>> macro;
    std::vector<std::optional<double>> weighted;
};

/// Throws UsageError when the streams differ in length or a class index
/// is >= `classes`. Returns empty series when no slot is scored.
F1Series progressive_f1(std::span<const std::optional<ClassIndex>> predicted,
                        std::span<const std::optional<ClassIndex>> truth, std::size_t classes);

/// Last defined value, if any.
std::optional<double> final_value(const std::vector<std::optional<double>>& series);

}  // namespace skel::harness
