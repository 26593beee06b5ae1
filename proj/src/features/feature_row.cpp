#include "skel/features/feature_row.hpp"

#include "skel/errors.hpp"

namespace skel::features {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames{
    "time_is_workday",
    "time_is_morning",
    "time_is_noon",
    "time_is_afternoon",
    "time_is_evening",
    "time_is_night",
    "time_sin_hour",
    "time_cos_hour",
    "bluetoothdevices_rssi_mean",
    "bluetoothdevices_rssi_var",
    "bluetoothdevices_nunique",
    "wifi_connection_count",
    "wifi_is_connected",
    "wifinetworks_nunique",
    "step_detection_count",
    "activity_invehicle",
    "activity_onbicycle",
    "activity_onfoot",
    "activity_running",
    "activity_still",
    "activity_unknown",
    "activity_walking",
    "accelerometer_avg_x",
    "accelerometer_avg_y",
    "accelerometer_avg_z",
    "accelerometer_magnitude_avg",
    "accelerometer_magnitude_var",
    "orientation_avg_x",
    "orientation_avg_y",
    "orientation_avg_z",
    "orientation_magnitude_avg",
    "orientation_magnitude_var",
    "location_altitude",
    "location_longitude",
    "location_latitude",
    "location_direct_distance",
    "location_total_distance",
    "location_radius_of_gyration",
    "magneticfield_avg_x",
    "magneticfield_avg_y",
    "magneticfield_avg_z",
    "magneticfield_magnitude_avg",
    "magneticfield_magnitude_var",
    "proximity_mean",
    "proximity_var",
    "battery_deltashift",
    "battery_charge_count",
};

}  // namespace

std::string_view feature_name(Feature f) { return kNames[static_cast<std::size_t>(f)]; }

std::string_view feature_name(std::size_t index) {
    if (index >= kFeatureCount) throw UsageError("feature index out of range");
    return kNames[index];
}

bool is_boolean_feature(std::size_t index) {
    switch (static_cast<Feature>(index)) {
        case Feature::TimeIsWorkday:
        case Feature::TimeIsMorning:
        case Feature::TimeIsNoon:
        case Feature::TimeIsAfternoon:
        case Feature::TimeIsEvening:
        case Feature::TimeIsNight:
        case Feature::WifiIsConnected:
        case Feature::ActivityInVehicle:
        case Feature::ActivityOnBicycle:
        case Feature::ActivityOnFoot:
        case Feature::ActivityRunning:
        case Feature::ActivityStill:
        case Feature::ActivityUnknown:
        case Feature::ActivityWalking:
            return true;
        default:
            return false;
    }
}

}  // namespace skel::features
