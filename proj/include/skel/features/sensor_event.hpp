#pragma once

#include "skel/time.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace skel::features {

enum class SensorKind {
    Accelerometer,
    Activities,
    StepDetector,
    Orientation,
    Location,
    MagneticField,
    Proximity,
    Bluetooth,
    WifiEvent,
    WifiNetworks,
    BatteryCharge,
    BatteryLevel,
};

inline constexpr std::size_t kSensorKindCount = 12;

std::string_view to_string(SensorKind k);
std::optional<SensorKind> parse_sensor_kind(std::string_view s);

enum class Activity { InVehicle, OnBicycle, OnFoot, Running, Still, Tilting, Walking, Unknown };

std::string_view to_string(Activity a);
std::optional<Activity> parse_activity(std::string_view s);

/// Three-axis reading (accelerometer, orientation, magnetic field).
struct AxisReading {
    double x = 0, y = 0, z = 0;
    friend bool operator==(const AxisReading&, const AxisReading&) = default;
};

struct ActivityReading {
    Activity activity = Activity::Unknown;
    double confidence = 0;  // 0..100
    friend bool operator==(const ActivityReading&, const ActivityReading&) = default;
};

struct StepReading {
    friend bool operator==(const StepReading&, const StepReading&) = default;
};

struct LocationReading {
    double latitude = 0, longitude = 0, altitude = 0;
    friend bool operator==(const LocationReading&, const LocationReading&) = default;
};

/// Distance in centimetres; 'near'/'far' labels are mapped on ingest.
struct ProximityReading {
    double distance_cm = 0;
    friend bool operator==(const ProximityReading&, const ProximityReading&) = default;
};

struct BluetoothReading {
    std::string address;
    double rssi = 0;
    friend bool operator==(const BluetoothReading&, const BluetoothReading&) = default;
};

struct WifiEventReading {
    bool connected = false;
    std::string network_id;
    friend bool operator==(const WifiEventReading&, const WifiEventReading&) = default;
};

struct WifiScanReading {
    std::string bssid;
    friend bool operator==(const WifiScanReading&, const WifiScanReading&) = default;
};

struct BatteryChargeReading {
    bool charging = false;
    std::string charger;
    friend bool operator==(const BatteryChargeReading&, const BatteryChargeReading&) = default;
};

struct BatteryLevelReading {
    double level = 0;  // percent
    friend bool operator==(const BatteryLevelReading&, const BatteryLevelReading&) = default;
};

/// std::monostate marks a payload that could not be parsed.
using SensorPayload =
    std::variant<std::monostate, AxisReading, ActivityReading, StepReading, LocationReading,
                 ProximityReading, BluetoothReading, WifiEventReading, WifiScanReading,
                 BatteryChargeReading, BatteryLevelReading>;

struct SensorEvent {
    std::string user_id;
    Timestamp timestamp;
    SensorKind sensor = SensorKind::Accelerometer;
    SensorPayload payload;

    friend bool operator==(const SensorEvent&, const SensorEvent&) = default;
};

/// Proximity label mapping: 'near' -> 0 cm, 'far' -> 5 cm.
inline constexpr double kProximityNearCm = 0.0;
inline constexpr double kProximityFarCm = 5.0;

/// True when the payload alternative matches what `sensor` produces and all
/// numeric fields are finite.
bool payload_is_well_formed(const SensorEvent& e);

}  // namespace skel::features
