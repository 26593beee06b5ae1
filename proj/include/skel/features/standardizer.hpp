#pragma once

#include "skel/features/feature_row.hpp"

#include <Eigen/Core>

#include <array>
#include <bitset>

namespace skel::features {

inline constexpr double kStdFloor = 1e-6;

struct ModelInput {
    Eigen::VectorXd values;  // kFeatureCount entries, all finite
    std::bitset<kFeatureCount> missing;
};

/// Per-user online z-scoring. Each observed numeric value first updates the
/// running mean/variance (Welford, population variance) and is then
/// transformed with the updated statistics; std is floored at 1e-6.
/// Missing numeric values map to 0 (the running mean). Boolean features
/// pass through unchanged, missing -> 0. Non-finite raw values count as
/// missing. The output depends only on the order of the stream.
class OnlineStandardizer {
public:
    ModelInput transform(const FeatureRow& row);

    std::size_t observations(std::size_t feature) const { return count_[feature]; }
    double mean(std::size_t feature) const { return mean_[feature]; }
    double stddev(std::size_t feature) const;

private:
    std::array<std::size_t, kFeatureCount> count_{};
    std::array<double, kFeatureCount> mean_{};
    std::array<double, kFeatureCount> m2_{};
};

}  // namespace skel::features
