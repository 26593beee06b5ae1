#include "skel/features/sensor_event.hpp"

#include <array>
#include <cmath>

namespace skel::features {

namespace {

constexpr std::array<std::string_view, kSensorKindCount> kSensorNames{
    "accelerometer", "activities", "step_detector", "orientation",
    "location",      "magnetic_field", "proximity", "bluetooth",
    "wifi_event",    "wifi_networks",  "battery_charge", "battery_level"};

constexpr std::array<std::string_view, 8> kActivityNames{
    "in_vehicle", "on_bicycle", "on_foot", "running", "still", "tilting", "walking", "unknown"};

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::string_view to_string(SensorKind k) { return kSensorNames[static_cast<std::size_t>(k)]; }

std::optional<SensorKind> parse_sensor_kind(std::string_view s) {
    for (std::size_t i = 0; i < kSensorNames.size(); ++i) {
        if (kSensorNames[i] == s) return static_cast<SensorKind>(i);
    }
    return std::nullopt;
}

std::string_view to_string(Activity a) { return kActivityNames[static_cast<std::size_t>(a)]; }

std::optional<Activity> parse_activity(std::string_view s) {
    for (std::size_t i = 0; i < kActivityNames.size(); ++i) {
        if (kActivityNames[i] == s) return static_cast<Activity>(i);
    }
    return std::nullopt;
}

bool payload_is_well_formed(const SensorEvent& e) {
    const auto& p = e.payload;
    switch (e.sensor) {
        case SensorKind::Accelerometer:
        case SensorKind::Orientation:
        case SensorKind::MagneticField:
            if (const auto* r = std::get_if<AxisReading>(&p)) return finite(r->x) && finite(r->y) && finite(r->z);
            return false;
        case SensorKind::Activities:
            if (const auto* r = std::get_if<ActivityReading>(&p)) return finite(r->confidence);
            return false;
        case SensorKind::StepDetector:
            return std::holds_alternative<StepReading>(p);
        case SensorKind::Location:
            if (const auto* r = std::get_if<LocationReading>(&p)) {
                return finite(r->latitude) && finite(r->longitude) && finite(r->altitude) &&
                       std::abs(r->latitude) <= 90.0 && std::abs(r->longitude) <= 180.0;
            }
            return false;
        case SensorKind::Proximity:
            if (const auto* r = std::get_if<ProximityReading>(&p)) return finite(r->distance_cm);
            return false;
        case SensorKind::Bluetooth:
            if (const auto* r = std::get_if<BluetoothReading>(&p)) return finite(r->rssi);
            return false;
        case SensorKind::WifiEvent:
            return std::holds_alternative<WifiEventReading>(p);
        case SensorKind::WifiNetworks:
            return std::holds_alternative<WifiScanReading>(p);
        case SensorKind::BatteryCharge:
            return std::holds_alternative<BatteryChargeReading>(p);
        case SensorKind::BatteryLevel:
            if (const auto* r = std::get_if<BatteryLevelReading>(&p)) return finite(r->level);
            return false;
    }
    return false;
}

}  // namespace skel::features
