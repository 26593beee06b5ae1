#pragma once

#include "skel/config.hpp"
#include "skel/features/geo.hpp"
#include "skel/features/sensor_event.hpp"
#include "skel/taxonomy.hpp"
#include "skel/time.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace skel::world {

/// Independent generator for one (seed, user, purpose, index) tuple.
std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t user, std::uint64_t purpose,
                           std::uint64_t index = 0);

namespace purpose {
inline constexpr std::uint64_t kRoutine = 1;
inline constexpr std::uint64_t kDay = 2;
inline constexpr std::uint64_t kSensors = 3;
inline constexpr std::uint64_t kDiary = 4;
inline constexpr std::uint64_t kLatency = 5;
inline constexpr std::uint64_t kContradiction = 6;
inline constexpr std::uint64_t kEvaluation = 7;
}  // namespace purpose

struct WorldConfig {
    int days = 28;
    Timestamp start = default_study_start();
    /// Places are scattered within this radius of the city centre.
    double city_radius_m = 4000.0;
    double min_place_separation_m = 400.0;
    /// Standard deviation of GPS fixes around a place anchor.
    double gps_scatter_m = 25.0;
    /// Probability that a day departs from the weekly routine.
    double deviation_rate = 0.15;
    /// Probability that the phone records nothing in a window.
    double device_off_rate = 0.02;
    /// Per-sensor probability that the sensor is silent for a window, in
    /// SensorKind order. Bluetooth and Wi-Fi are the most often missing.
    std::array<double, features::kSensorKindCount> missing_rate{
        0.10,  // accelerometer
        0.20,  // activities
        0.30,  // step_detector
        0.15,  // orientation
        0.25,  // location
        0.15,  // magnetic_field
        0.30,  // proximity
        0.60,  // bluetooth
        0.50,  // wifi_event
        0.30,  // wifi_networks
        0.70,  // battery_charge
        0.10,  // battery_level
    };

    /// Throws ConfigError for out-of-range values.
    void validate() const;
    /// Reads the [world] section; missing keys keep their defaults. Per-sensor
    /// rates are keys "missing.<sensor>".
    static WorldConfig from_config(const KeyValueConfig& kv);
};

enum class PlaceKind : std::uint8_t {
    Home,
    University,
    Restaurant,
    Shopping,
    SportsCenter,
    Park,
    FriendsHome,
};
inline constexpr std::size_t kPlaceCount = 7;
Label place_label(PlaceKind p);

struct Place {
    PlaceKind kind;
    features::GeoPoint anchor;
    double altitude = 0;
    std::vector<std::string> access_points;
    std::vector<std::string> devices;
    bool has_known_wifi = false;
};

enum class TravelMode : std::uint8_t { Foot, Bicycle, Car, PublicTransport };
Label travel_label(TravelMode m);

/// What the user is doing during one slot.
struct SlotState {
    bool travelling = false;
    PlaceKind place = PlaceKind::Home;  // destination when travelling
    PlaceKind from = PlaceKind::Home;   // origin when travelling
    TravelMode mode = TravelMode::Foot;
    friend bool operator==(const SlotState&, const SlotState&) = default;
};
Label label_of(const SlotState& s);

struct SlotTruth {
    std::int64_t slot = 0;
    Label truth;
    /// The weekly routine's label for this slot (what a creature of habit
    /// would report).
    Label routine;
};

struct UserWorld {
    std::string user_id;
    std::vector<Place> places;  // indexed by PlaceKind
    TravelMode commute = TravelMode::Foot;
    std::vector<SlotTruth> timeline;
    std::vector<features::SensorEvent> events;  // time-ordered
};

std::string user_name(std::size_t index);

/// Deterministic in (seed, index, cfg). Throws ConfigError when places
/// cannot be laid out under the separation constraint.
UserWorld generate_user(std::uint64_t seed, std::size_t index, const WorldConfig& cfg);

/// Truth timeline CSV: user,slot,start,main,sub,routine_main,routine_sub.
void write_truth_header(std::ostream& out);
void write_truth(std::ostream& out, const UserWorld& w, const WorldConfig& cfg);
/// Reads a truth CSV back, grouped by user in file order.
std::vector<std::pair<std::string, std::vector<SlotTruth>>> read_truth(std::istream& in);

}  // namespace skel::world
