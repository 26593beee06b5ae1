#pragma once

#include "skel/time.hpp"

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace skel::features {

/// Engineered features of one 30-minute window, in the fixed column order
/// used by the CSV export (time, connectivity, activity, location, software).
enum class Feature : std::size_t {
    TimeIsWorkday,
    TimeIsMorning,
    TimeIsNoon,
    TimeIsAfternoon,
    TimeIsEvening,
    TimeIsNight,
    TimeSinHour,
    TimeCosHour,

    BluetoothRssiMean,
    BluetoothRssiVar,
    BluetoothNunique,
    WifiConnectionCount,
    WifiIsConnected,
    WifiNetworksNunique,

    StepDetectionCount,
    ActivityInVehicle,
    ActivityOnBicycle,
    ActivityOnFoot,
    ActivityRunning,
    ActivityStill,
    ActivityUnknown,
    ActivityWalking,
    AccelerometerAvgX,
    AccelerometerAvgY,
    AccelerometerAvgZ,
    AccelerometerMagnitudeAvg,
    AccelerometerMagnitudeVar,
    OrientationAvgX,
    OrientationAvgY,
    OrientationAvgZ,
    OrientationMagnitudeAvg,
    OrientationMagnitudeVar,

    LocationAltitude,
    LocationLongitude,
    LocationLatitude,
    LocationDirectDistance,
    LocationTotalDistance,
    LocationRadiusOfGyration,
    MagneticFieldAvgX,
    MagneticFieldAvgY,
    MagneticFieldAvgZ,
    MagneticFieldMagnitudeAvg,
    MagneticFieldMagnitudeVar,
    ProximityMean,
    ProximityVar,

    BatteryDeltaShift,
    BatteryChargeCount,

    Count_
};

inline constexpr std::size_t kFeatureCount = static_cast<std::size_t>(Feature::Count_);

std::string_view feature_name(Feature f);
std::string_view feature_name(std::size_t index);
bool is_boolean_feature(std::size_t index);

struct FeatureRow {
    std::string user_id;
    std::int64_t window_index = 0;
    Timestamp start;
    std::array<double, kFeatureCount> values{};
    std::bitset<kFeatureCount> missing;

    double get(Feature f) const { return values[static_cast<std::size_t>(f)]; }
    bool is_missing(Feature f) const { return missing[static_cast<std::size_t>(f)]; }
    void set(Feature f, double v) {
        values[static_cast<std::size_t>(f)] = v;
        missing[static_cast<std::size_t>(f)] = false;
    }
    void mark_missing(Feature f) {
        values[static_cast<std::size_t>(f)] = 0.0;
        missing[static_cast<std::size_t>(f)] = true;
    }
};

}  // namespace skel::features
