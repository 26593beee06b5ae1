#include "skel/world/world.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace skel::world {

using features::Activity;
using features::SensorEvent;
using features::SensorKind;
using namespace std::chrono;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr features::GeoPoint kCityCentre{46.0679, 11.1211};
constexpr double kMetersPerDegree = features::kEarthRadiusMeters * std::numbers::pi / 180.0;
constexpr int kSlotsPerDay = 48;

features::GeoPoint offset(features::GeoPoint p, double north_m, double east_m) {
    return {p.latitude + north_m / kMetersPerDegree,
            p.longitude + east_m / (kMetersPerDegree * std::cos(p.latitude * std::numbers::pi / 180.0))};
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}
int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}
bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }
double normal(std::mt19937_64& rng, double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(rng);
}

using DayPlan = std::array<PlaceKind, kSlotsPerDay>;

void fill(DayPlan& plan, int from, int to, PlaceKind p) {
    for (int s = std::max(from, 0); s < std::min(to, kSlotsPerDay); ++s) plan[static_cast<std::size_t>(s)] = p;
}

struct Routine {
    std::array<DayPlan, 7> week;  // Monday first
};

Routine make_routine(std::mt19937_64& rng) {
    Routine r;
    const int leave = uniform_int(rng, 15, 17);
    const int back = uniform_int(rng, 35, 38);
    std::array<bool, 5> lunch{}, sport{};
    for (auto& l : lunch) l = chance(rng, 0.5);
    const int sport_a = uniform_int(rng, 0, 4);
    const int sport_b = (sport_a + uniform_int(rng, 1, 4)) % 5;
    sport[static_cast<std::size_t>(sport_a)] = sport[static_cast<std::size_t>(sport_b)] = true;
    for (int d = 0; d < 5; ++d) {
        DayPlan& p = r.week[static_cast<std::size_t>(d)];
        p.fill(PlaceKind::Home);
        fill(p, leave, back, PlaceKind::University);
        if (lunch[static_cast<std::size_t>(d)]) fill(p, 24, 26, PlaceKind::Restaurant);
        if (sport[static_cast<std::size_t>(d)]) fill(p, back, back + 3, PlaceKind::SportsCenter);
    }
    DayPlan& sat = r.week[5];
    sat.fill(PlaceKind::Home);
    const int shop = uniform_int(rng, 28, 32);
    fill(sat, shop, shop + 4, PlaceKind::Shopping);
    DayPlan& sun = r.week[6];
    sun.fill(PlaceKind::Home);
    if (chance(rng, 0.5)) {
        fill(sun, 20, 25, PlaceKind::Park);
    } else {
        fill(sun, 38, 44, PlaceKind::FriendsHome);
    }
    return r;
}

DayPlan deviate(const DayPlan& base, bool weekday, std::mt19937_64& rng) {
    DayPlan p = base;
    const int kind = uniform_int(rng, 0, weekday ? 2 : 1);
    if (kind == 0) {
        p.fill(PlaceKind::Home);
    } else if (kind == 1) {
        constexpr std::array<PlaceKind, 5> outings{PlaceKind::Restaurant, PlaceKind::Shopping, PlaceKind::Park,
                                                   PlaceKind::FriendsHome, PlaceKind::SportsCenter};
        const auto where = outings[static_cast<std::size_t>(uniform_int(rng, 0, 4))];
        const int start = uniform_int(rng, 18, 40);
        fill(p, start, start + uniform_int(rng, 3, 6), where);
    } else {
        const int shift = uniform_int(rng, 2, 4) * (chance(rng, 0.5) ? 1 : -1);
        DayPlan q;
        q.fill(PlaceKind::Home);
        for (int s = 0; s < kSlotsPerDay; ++s) {
            const int src = s - shift;
            if (src >= 0 && src < kSlotsPerDay) q[static_cast<std::size_t>(s)] = base[static_cast<std::size_t>(src)];
        }
        p = q;
    }
    p[0] = p[kSlotsPerDay - 1] = PlaceKind::Home;
    return p;
}

TravelMode mode_for(const std::vector<Place>& places, TravelMode commute, PlaceKind a, PlaceKind b) {
    const double d = features::haversine_m(places[static_cast<std::size_t>(a)].anchor,
                                           places[static_cast<std::size_t>(b)].anchor);
    return d < 1000.0 ? TravelMode::Foot : commute;
}

std::array<SlotState, kSlotsPerDay> to_states(const DayPlan& plan, const std::vector<Place>& places,
                                              TravelMode commute) {
    std::array<SlotState, kSlotsPerDay> out;
    for (int s = 0; s < kSlotsPerDay; ++s) {
        SlotState st;
        st.place = plan[static_cast<std::size_t>(s)];
        st.from = st.place;
        if (s > 0 && plan[static_cast<std::size_t>(s - 1)] != st.place) {
            st.travelling = true;
            st.from = plan[static_cast<std::size_t>(s - 1)];
            st.mode = mode_for(places, commute, st.from, st.place);
        }
        out[static_cast<std::size_t>(s)] = st;
    }
    return out;
}

std::vector<Place> make_places(std::mt19937_64& rng, const WorldConfig& cfg) {
    std::vector<Place> places;
    for (std::size_t k = 0; k < kPlaceCount; ++k) {
        Place p;
        p.kind = static_cast<PlaceKind>(k);
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const double r = cfg.city_radius_m * std::sqrt(uniform(rng, 0.0, 1.0));
            const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            p.anchor = offset(kCityCentre, r * std::cos(theta), r * std::sin(theta));
            placed = std::all_of(places.begin(), places.end(), [&](const Place& q) {
                return features::haversine_m(p.anchor, q.anchor) >= cfg.min_place_separation_m;
            });
        }
        if (!placed) {
            throw ConfigError(fmt::format("cannot place {} locations {} m apart within {} m",
                                          kPlaceCount, cfg.min_place_separation_m, cfg.city_radius_m));
        }
        p.altitude = uniform(rng, 190.0, 260.0);
        const int aps = p.kind == PlaceKind::University ? 8 : uniform_int(rng, 2, 5);
        for (int i = 0; i < aps; ++i) p.access_points.push_back(fmt::format("ap:{:016x}", rng()));
        const int devs = p.kind == PlaceKind::Home || p.kind == PlaceKind::FriendsHome ? uniform_int(rng, 2, 4)
                                                                                      : uniform_int(rng, 0, 2);
        for (int i = 0; i < devs; ++i) p.devices.push_back(fmt::format("bt:{:012x}", rng() & 0xffffffffffffULL));
        p.has_known_wifi = p.kind == PlaceKind::Home || p.kind == PlaceKind::University ||
                           p.kind == PlaceKind::FriendsHome;
        places.push_back(std::move(p));
    }
    return places;
}

TravelMode draw_commute(std::mt19937_64& rng) {
    const double u = uniform(rng, 0.0, 1.0);
    if (u < 0.25) return TravelMode::Foot;
    if (u < 0.5) return TravelMode::Bicycle;
    if (u < 0.8) return TravelMode::PublicTransport;
    return TravelMode::Car;
}

bool crowded(PlaceKind k) {
    return k == PlaceKind::University || k == PlaceKind::Restaurant || k == PlaceKind::Shopping ||
           k == PlaceKind::SportsCenter;
}

// Battery percentage over the day: charged overnight, drains from 07:00.
double battery_at(Timestamp t) {
    const double h = hour_of_day(t);
    if (h < 7.0) return 100.0;
    if (h >= 22.0) return std::min(100.0, 25.0 + (h - 22.0) * 40.0);
    return 100.0 - (h - 7.0) * 5.0;
}

void synthesize_window(const UserWorld& w, const SlotState& st, Timestamp start, const WorldConfig& cfg,
                       std::mt19937_64& rng, std::vector<SensorEvent>& out) {
    if (chance(rng, cfg.device_off_rate)) return;
    std::array<bool, features::kSensorKindCount> on{};
    for (std::size_t s = 0; s < on.size(); ++s) on[s] = !chance(rng, cfg.missing_rate[s]);

    const Place& here = w.places[static_cast<std::size_t>(st.place)];
    const Place& from = w.places[static_cast<std::size_t>(st.from)];
    const std::size_t first = out.size();
    auto emit = [&](int second, SensorKind k, features::SensorPayload p) {
        out.push_back(SensorEvent{w.user_id, start + seconds(second), k, std::move(p)});
    };
    const bool moving_fast = st.travelling && (st.mode == TravelMode::Car || st.mode == TravelMode::PublicTransport);
    const bool active = st.travelling && !moving_fast;

    if (on[static_cast<std::size_t>(SensorKind::Location)]) {
        for (int k = 0; k < 6; ++k) {
            features::GeoPoint p = here.anchor;
            double alt = here.altitude;
            if (st.travelling) {
                const double f = (k + 0.5) / 6.0;
                p = {from.anchor.latitude + f * (here.anchor.latitude - from.anchor.latitude),
                     from.anchor.longitude + f * (here.anchor.longitude - from.anchor.longitude)};
                alt = from.altitude + f * (here.altitude - from.altitude);
            }
            p = offset(p, normal(rng, 0.0, cfg.gps_scatter_m), normal(rng, 0.0, cfg.gps_scatter_m));
            emit(150 + 300 * k, SensorKind::Location,
                 features::LocationReading{p.latitude, p.longitude, alt + normal(rng, 0.0, 3.0)});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::Accelerometer)]) {
        const double sd = active ? 2.5 : moving_fast ? 1.0 : 0.3;
        for (int k = 0; k < 6; ++k) {
            emit(60 + 300 * k, SensorKind::Accelerometer,
                 features::AxisReading{normal(rng, 0.0, sd), normal(rng, 0.0, sd), normal(rng, 9.81, sd)});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::Orientation)]) {
        const double sd = st.travelling ? 40.0 : 10.0;
        for (int k = 0; k < 3; ++k) {
            emit(90 + 600 * k, SensorKind::Orientation,
                 features::AxisReading{normal(rng, 180.0, sd), normal(rng, 0.0, sd / 2), normal(rng, 0.0, sd / 2)});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::MagneticField)]) {
        // Building steel shifts the field a little per place.
        const double bias = st.travelling ? 0.0 : 5.0 * (static_cast<double>(st.place) - 3.0);
        for (int k = 0; k < 3; ++k) {
            emit(120 + 600 * k, SensorKind::MagneticField,
                 features::AxisReading{normal(rng, 20.0 + bias, 3.0), normal(rng, -5.0, 3.0), normal(rng, -40.0, 3.0)});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::Activities)]) {
        for (int k = 0; k < 3; ++k) {
            Activity a = Activity::Still;
            if (st.travelling) {
                switch (st.mode) {
                    case TravelMode::Foot: a = chance(rng, 0.5) ? Activity::Walking : Activity::OnFoot; break;
                    case TravelMode::Bicycle: a = Activity::OnBicycle; break;
                    default: a = Activity::InVehicle; break;
                }
                if (chance(rng, 0.15)) a = Activity::Unknown;
            } else if (chance(rng, 0.1)) {
                a = chance(rng, 0.5) ? Activity::Tilting : Activity::Walking;
            }
            emit(200 + 600 * k, SensorKind::Activities, features::ActivityReading{a, uniform(rng, 55.0, 100.0)});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::StepDetector)]) {
        int steps = 0;
        if (st.travelling && st.mode == TravelMode::Foot) {
            steps = uniform_int(rng, 30, 60);
        } else if (st.travelling) {
            steps = uniform_int(rng, 0, 8);
        } else if (chance(rng, 0.5)) {
            steps = std::poisson_distribution<int>(4.0)(rng);
        }
        for (int k = 0; k < steps; ++k) emit(uniform_int(rng, 0, 1799), SensorKind::StepDetector, features::StepReading{});
    }
    if (on[static_cast<std::size_t>(SensorKind::WifiNetworks)]) {
        if (!st.travelling) {
            for (const auto& ap : here.access_points) {
                if (chance(rng, 0.8)) emit(uniform_int(rng, 0, 1799), SensorKind::WifiNetworks, features::WifiScanReading{ap});
            }
        }
        const int strangers = st.travelling ? uniform_int(rng, 0, 6) : uniform_int(rng, 0, 2);
        for (int k = 0; k < strangers; ++k) {
            emit(uniform_int(rng, 0, 1799), SensorKind::WifiNetworks,
                 features::WifiScanReading{fmt::format("ap:{:016x}", rng())});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::WifiEvent)]) {
        if (!st.travelling && here.has_known_wifi) {
            const int n = uniform_int(rng, 1, 2);
            for (int k = 0; k < n; ++k) {
                emit(uniform_int(rng, 0, 1799), SensorKind::WifiEvent,
                     features::WifiEventReading{true, here.access_points.front()});
            }
        } else if (chance(rng, 0.4)) {
            emit(uniform_int(rng, 0, 1799), SensorKind::WifiEvent, features::WifiEventReading{false, ""});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::Bluetooth)]) {
        if (!st.travelling) {
            for (const auto& d : here.devices) {
                if (chance(rng, 0.6)) {
                    emit(uniform_int(rng, 0, 1799), SensorKind::Bluetooth, features::BluetoothReading{d, normal(rng, -60.0, 6.0)});
                }
            }
        }
        const int strangers = crowded(st.place) && !st.travelling ? uniform_int(rng, 1, 6) : uniform_int(rng, 0, 2);
        for (int k = 0; k < strangers; ++k) {
            emit(uniform_int(rng, 0, 1799), SensorKind::Bluetooth,
                 features::BluetoothReading{fmt::format("bt:{:012x}", rng() & 0xffffffffffffULL), normal(rng, -80.0, 8.0)});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::Proximity)]) {
        const double near = st.travelling ? 0.7 : 0.3;
        for (int k = 0; k < 2; ++k) {
            emit(300 + 900 * k, SensorKind::Proximity,
                 features::ProximityReading{chance(rng, near) ? features::kProximityNearCm : features::kProximityFarCm});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::BatteryLevel)]) {
        for (int k = 0; k < 2; ++k) {
            const auto t = start + seconds(1 + 1797 * k);
            emit(1 + 1797 * k, SensorKind::BatteryLevel,
                 features::BatteryLevelReading{std::clamp(std::round(battery_at(t)), 0.0, 100.0)});
        }
    }
    if (on[static_cast<std::size_t>(SensorKind::BatteryCharge)]) {
        const double h = hour_of_day(start);
        const bool charging = st.place == PlaceKind::Home && !st.travelling && (h >= 22.0 || h < 7.0);
        if (charging || chance(rng, 0.3)) {
            emit(uniform_int(rng, 0, 1799), SensorKind::BatteryCharge, features::BatteryChargeReading{charging, "ac"});
        }
    }
    std::stable_sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
                     [](const SensorEvent& a, const SensorEvent& b) { return a.timestamp < b.timestamp; });
}

}  // namespace

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t user, std::uint64_t purpose, std::uint64_t index) {
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ user);
    h = splitmix(h ^ purpose);
    h = splitmix(h ^ index);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
}

void WorldConfig::validate() const {
    if (days <= 0) throw ConfigError("world.days must be positive");
    if (!(city_radius_m > 0.0)) throw ConfigError("world.city_radius_m must be positive");
    if (!(min_place_separation_m >= 0.0)) throw ConfigError("world.min_place_separation_m must be >= 0");
    if (!(gps_scatter_m >= 0.0)) throw ConfigError("world.gps_scatter_m must be >= 0");
    auto prob = [](double p, const std::string& name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("{} must lie in [0, 1]", name));
    };
    prob(deviation_rate, "world.deviation_rate");
    prob(device_off_rate, "world.device_off_rate");
    for (std::size_t s = 0; s < missing_rate.size(); ++s) {
        prob(missing_rate[s], fmt::format("world.missing.{}", features::to_string(static_cast<SensorKind>(s))));
    }
    // A separation the disc cannot hold is caught when places are laid out;
    // reject the obvious case early.
    if (min_place_separation_m > 2.0 * city_radius_m) {
        throw ConfigError("world.min_place_separation_m exceeds the city diameter");
    }
}

WorldConfig WorldConfig::from_config(const KeyValueConfig& kv) {
    std::set<std::string> known{"days", "city_radius_m", "min_place_separation_m", "gps_scatter_m",
                                "deviation_rate", "device_off_rate"};
    for (std::size_t s = 0; s < features::kSensorKindCount; ++s) {
        known.insert(fmt::format("missing.{}", features::to_string(static_cast<SensorKind>(s))));
    }
    kv.reject_unknown("world", known);
    WorldConfig c;
    c.days = static_cast<int>(kv.get_int("world.days", c.days));
    c.city_radius_m = kv.get_double("world.city_radius_m", c.city_radius_m);
    c.min_place_separation_m = kv.get_double("world.min_place_separation_m", c.min_place_separation_m);
    c.gps_scatter_m = kv.get_double("world.gps_scatter_m", c.gps_scatter_m);
    c.deviation_rate = kv.get_double("world.deviation_rate", c.deviation_rate);
    c.device_off_rate = kv.get_double("world.device_off_rate", c.device_off_rate);
    for (std::size_t s = 0; s < features::kSensorKindCount; ++s) {
        c.missing_rate[s] = kv.get_double(
            fmt::format("world.missing.{}", features::to_string(static_cast<SensorKind>(s))), c.missing_rate[s]);
    }
    c.validate();
    return c;
}

Label place_label(PlaceKind p) {
    switch (p) {
        case PlaceKind::Home: return *Label::parse("home/main_home");
        case PlaceKind::University: return *Label::parse("university/my_faculty");
        case PlaceKind::Restaurant: return *Label::parse("other/restaurant_cafe_pub");
        case PlaceKind::Shopping: return *Label::parse("other/shopping");
        case PlaceKind::SportsCenter: return *Label::parse("other/sports_center");
        case PlaceKind::Park: return *Label::parse("other/street_square_park");
        case PlaceKind::FriendsHome: return *Label::parse("home/other_peoples_home");
    }
    return Label{};
}

Label travel_label(TravelMode m) {
    switch (m) {
        case TravelMode::Foot: return *Label::parse("travelling/foot");
        case TravelMode::Bicycle: return *Label::parse("travelling/bicycle");
        case TravelMode::Car: return *Label::parse("travelling/passenger_car");
        case TravelMode::PublicTransport: return *Label::parse("travelling/public_transport");
    }
    return Label{};
}

Label label_of(const SlotState& s) { return s.travelling ? travel_label(s.mode) : place_label(s.place); }

std::string user_name(std::size_t index) { return fmt::format("u{:02d}", index + 1); }

UserWorld generate_user(std::uint64_t seed, std::size_t index, const WorldConfig& cfg) {
    cfg.validate();
    UserWorld w;
    w.user_id = user_name(index);
    auto rng = derive_rng(seed, index, purpose::kRoutine);
    w.places = make_places(rng, cfg);
    w.commute = draw_commute(rng);
    const Routine routine = make_routine(rng);

    const auto per_day = static_cast<std::size_t>(kSlotsPerDay);
    w.timeline.reserve(static_cast<std::size_t>(cfg.days) * per_day);
    w.events.reserve(static_cast<std::size_t>(cfg.days) * per_day * 40);
    for (int day = 0; day < cfg.days; ++day) {
        const auto day_start = cfg.start + hours(24 * day);
        const auto weekday = iso_weekday(day_start);
        const DayPlan& base = routine.week[weekday - 1];
        auto day_rng = derive_rng(seed, index, purpose::kDay, static_cast<std::uint64_t>(day));
        const DayPlan actual = chance(day_rng, cfg.deviation_rate) ? deviate(base, weekday <= 5, day_rng) : base;
        const auto truth = to_states(actual, w.places, w.commute);
        const auto habit = to_states(base, w.places, w.commute);
        for (int s = 0; s < kSlotsPerDay; ++s) {
            const std::int64_t slot = static_cast<std::int64_t>(day) * kSlotsPerDay + s;
            const auto& st = truth[static_cast<std::size_t>(s)];
            w.timeline.push_back(SlotTruth{slot, label_of(st), label_of(habit[static_cast<std::size_t>(s)])});
            auto slot_rng = derive_rng(seed, index, purpose::kSensors, static_cast<std::uint64_t>(slot));
            synthesize_window(w, st, day_start + minutes(30 * s), cfg, slot_rng, w.events);
        }
    }
    return w;
}

void write_truth_header(std::ostream& out) { out << "user,slot,start,main,sub,routine_main,routine_sub\n"; }

void write_truth(std::ostream& out, const UserWorld& w, const WorldConfig& cfg) {
    for (const auto& t : w.timeline) {
        out << w.user_id << ',' << t.slot << ',' << format_iso(cfg.start + minutes(30 * t.slot)) << ','
            << to_string(t.truth.main()) << ',' << t.truth.sub_name() << ',' << to_string(t.routine.main()) << ','
            << t.routine.sub_name() << '\n';
    }
}

std::vector<std::pair<std::string, std::vector<SlotTruth>>> read_truth(std::istream& in) {
    std::vector<std::pair<std::string, std::vector<SlotTruth>>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (lineno == 1 && line.rfind("user,", 0) == 0)) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() != 7) throw DataError(fmt::format("truth line {}: expected 7 columns", lineno));
        const auto truth = Label::parse(cols[3] + "/" + cols[4]);
        const auto routine = Label::parse(cols[5] + "/" + cols[6]);
        if (!truth || !routine) throw DataError(fmt::format("truth line {}: unknown label", lineno));
        SlotTruth t;
        try {
            t.slot = std::stoll(cols[1]);
        } catch (const std::exception&) {
            throw DataError(fmt::format("truth line {}: bad slot '{}'", lineno, cols[1]));
        }
        t.truth = *truth;
        t.routine = *routine;
        if (out.empty() || out.back().first != cols[0]) out.emplace_back(cols[0], std::vector<SlotTruth>{});
        out.back().second.push_back(t);
    }
    return out;
}

}  // namespace skel::world
