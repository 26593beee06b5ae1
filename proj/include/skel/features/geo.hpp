#pragma once

#include <optional>
#include <span>

namespace skel::features {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

struct GeoPoint {
    double latitude = 0;
    double longitude = 0;
};

/// Great-circle distance in metres on a sphere of radius 6 371 000 m.
double haversine_m(GeoPoint a, GeoPoint b);

struct GeoSummary {
    std::optional<double> direct_distance;  // first -> last, needs >= 2 points
    std::optional<double> total_distance;   // sum of hops, needs >= 2 points
    double radius_of_gyration = 0;          // RMS haversine distance to the centroid
};

/// Trajectory summary of one window's GPS fixes, in order. Throws DataError
/// for an empty list or an out-of-range coordinate.
GeoSummary geo_features(std::span<const GeoPoint> points);

}  // namespace skel::features
