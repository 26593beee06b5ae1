#include "skel/features/standardizer.hpp"

#include <algorithm>
#include <cmath>

namespace skel::features {

double OnlineStandardizer::stddev(std::size_t feature) const {
    if (count_[feature] == 0) return kStdFloor;
    return std::max(std::sqrt(m2_[feature] / static_cast<double>(count_[feature])), kStdFloor);
}

ModelInput OnlineStandardizer::transform(const FeatureRow& row) {
    ModelInput out;
    out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double raw = row.values[f];
        const bool missing = row.missing[f] || !std::isfinite(raw);
        out.missing[f] = missing;
        if (missing) continue;
        if (is_boolean_feature(f)) {
            out.values[static_cast<Eigen::Index>(f)] = raw != 0.0 ? 1.0 : 0.0;
            continue;
        }
        const double n = static_cast<double>(++count_[f]);
        const double delta = raw - mean_[f];
        mean_[f] += delta / n;
        m2_[f] += delta * (raw - mean_[f]);
        const double z = (raw - mean_[f]) / stddev(f);
        out.values[static_cast<Eigen::Index>(f)] = std::isfinite(z) ? z : 0.0;
    }
    return out;
}

}  // namespace skel::features
