#include "skel/features/geo.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace skel::features {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check(GeoPoint p) {
    if (!std::isfinite(p.latitude) || !std::isfinite(p.longitude) || std::abs(p.latitude) > 90.0 ||
        std::abs(p.longitude) > 180.0) {
        throw DataError(fmt::format("coordinate out of range: ({}, {})", p.latitude, p.longitude));
    }
}

}  // namespace

double haversine_m(GeoPoint a, GeoPoint b) {
    const double lat1 = a.latitude * kDegToRad;
    const double lat2 = b.latitude * kDegToRad;
    const double dlat = (b.latitude - a.latitude) * kDegToRad;
    const double dlon = (b.longitude - a.longitude) * kDegToRad;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(h)));
}

GeoSummary geo_features(std::span<const GeoPoint> points) {
    if (points.empty()) throw DataError("geo_features needs at least one point");
    for (auto p : points) check(p);

    GeoSummary out;
    if (points.size() >= 2) {
        out.direct_distance = haversine_m(points.front(), points.back());
        double total = 0.0;
        for (std::size_t i = 1; i < points.size(); ++i) total += haversine_m(points[i - 1], points[i]);
        // Triangle inequality can lose an ulp on collinear fixes.
        out.total_distance = std::max(total, *out.direct_distance);
    }

    GeoPoint centroid;
    for (auto p : points) {
        centroid.latitude += p.latitude;
        centroid.longitude += p.longitude;
    }
    centroid.latitude /= static_cast<double>(points.size());
    centroid.longitude /= static_cast<double>(points.size());
    double sq = 0.0;
    for (auto p : points) {
        const double d = haversine_m(p, centroid);
        sq += d * d;
    }
    out.radius_of_gyration = std::sqrt(sq / static_cast<double>(points.size()));
    return out;
}

}  // namespace skel::features
