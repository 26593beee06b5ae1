#include "skel/features/pipeline.hpp"

#include "skel/errors.hpp"
#include "skel/features/geo.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>

namespace skel::features {

using std::chrono::milliseconds;

MeanVar mean_var(std::span<const double> xs) {
    MeanVar out;
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - out.mean) * (x - out.mean);
    out.var = sq / static_cast<double>(xs.size());
    return out;
}

WindowedStream windowize(std::vector<SensorEvent> events, const WindowOptions& opts) {
    const auto period = opts.period.count();
    if (period <= 0 || 86'400'000 % period != 0) {
        throw UsageError("window period must divide 24 hours");
    }
    WindowedStream out;
    if (events.empty() && !(opts.origin && opts.count)) return out;

    std::vector<std::string> users;
    std::unordered_map<std::string, std::vector<SensorEvent>> by_user;
    for (auto& e : events) {
        auto [it, inserted] = by_user.try_emplace(e.user_id);
        if (inserted) users.push_back(e.user_id);
        it->second.push_back(std::move(e));
    }
    for (auto& [_, evs] : by_user) {
        std::stable_sort(evs.begin(), evs.end(), [](const SensorEvent& a, const SensorEvent& b) {
            return a.timestamp < b.timestamp;
        });
    }

    auto floor_slot = [period](Timestamp t) {
        const auto ms = t.time_since_epoch().count();
        const auto q = ms >= 0 ? ms / period : -((-ms + period - 1) / period);
        return Timestamp{milliseconds{q * period}};
    };

    Timestamp origin;
    if (opts.origin) {
        origin = *opts.origin;
    } else {
        Timestamp first = Timestamp::max();
        for (const auto& [_, evs] : by_user) {
            if (!evs.empty()) first = std::min(first, evs.front().timestamp);
        }
        origin = floor_slot(first);
    }
    auto slot_of = [&](Timestamp t) {
        const auto d = (t - origin).count();
        return d >= 0 ? d / period : -((-d + period - 1) / period);
    };

    std::int64_t count = 0;
    if (opts.count) {
        count = *opts.count;
    } else {
        for (const auto& [_, evs] : by_user) {
            if (!evs.empty()) count = std::max(count, slot_of(evs.back().timestamp) + 1);
        }
    }

    for (const auto& user : users) {
        auto& evs = by_user[user];
        const auto base = out.windows.size();
        for (std::int64_t i = 0; i < count; ++i) {
            Window w;
            w.user_id = user;
            w.index = i;
            w.start = origin + milliseconds{i * period};
            w.length = opts.period;
            out.windows.push_back(std::move(w));
        }
        for (auto& e : evs) {
            const auto slot = slot_of(e.timestamp);
            if (slot < 0 || slot >= count) {
                ++out.dropped;
                continue;
            }
            out.windows[base + static_cast<std::size_t>(slot)].events.push_back(std::move(e));
        }
    }
    return out;
}

void compute_time_features(Timestamp start, TimeBands bands, FeatureRow& row) {
    const double hour = hour_of_day(start);
    const int h = static_cast<int>(std::floor(hour));
    auto in = [h](int lo, int hi) { return lo <= hi ? (h >= lo && h < hi) : (h >= lo || h < hi); };

    row.set(Feature::TimeIsWorkday, iso_weekday(start) <= 5 ? 1.0 : 0.0);
    if (bands == TimeBands::Contiguous) {
        row.set(Feature::TimeIsMorning, in(6, 10));
        row.set(Feature::TimeIsNoon, in(10, 14));
        row.set(Feature::TimeIsAfternoon, in(14, 18));
        row.set(Feature::TimeIsEvening, in(18, 22));
        row.set(Feature::TimeIsNight, in(22, 6));
    } else {
        row.set(Feature::TimeIsMorning, in(6, 9));
        row.set(Feature::TimeIsNoon, in(10, 13));
        row.set(Feature::TimeIsAfternoon, in(14, 17));
        row.set(Feature::TimeIsEvening, in(18, 21));
        row.set(Feature::TimeIsNight, in(22, 5));
    }
    const double angle = 2.0 * std::numbers::pi * hour / 24.0;
    row.set(Feature::TimeSinHour, std::sin(angle));
    row.set(Feature::TimeCosHour, std::cos(angle));
}

namespace {

struct AxisSummary {
    double x, y, z, magnitude_avg, magnitude_var;
};

AxisSummary summarize_axes(const std::vector<AxisReading>& rs) {
    AxisSummary s{0, 0, 0, 0, 0};
    std::vector<double> mags;
    mags.reserve(rs.size());
    for (const auto& r : rs) {
        s.x += r.x;
        s.y += r.y;
        s.z += r.z;
        mags.push_back(std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z));
    }
    const auto n = static_cast<double>(rs.size());
    s.x /= n;
    s.y /= n;
    s.z /= n;
    const auto mv = mean_var(mags);
    s.magnitude_avg = mv.mean;
    s.magnitude_var = mv.var;
    return s;
}

void set_axes(FeatureRow& row, const std::vector<AxisReading>& rs, Feature x, Feature y, Feature z,
              Feature avg, Feature var) {
    if (rs.empty()) {
        for (auto f : {x, y, z, avg, var}) row.mark_missing(f);
        return;
    }
    const auto s = summarize_axes(rs);
    row.set(x, s.x);
    row.set(y, s.y);
    row.set(z, s.z);
    row.set(avg, s.magnitude_avg);
    row.set(var, s.magnitude_var);
}

}  // namespace

FeatureRow compute_features(const Window& w, const FeatureOptions& opts) {
    FeatureRow row;
    row.user_id = w.user_id;
    row.window_index = w.index;
    row.start = w.start;
    compute_time_features(w.start, opts.bands, row);

    std::vector<double> bt_rssi;
    std::set<std::string> bt_devices;
    std::size_t wifi_events = 0, wifi_connections = 0;
    std::set<std::string> wifi_networks;
    std::size_t steps = 0;
    std::vector<ActivityReading> activities;
    std::vector<AxisReading> accel, orient, magnet;
    std::vector<LocationReading> locations;
    std::vector<double> proximity;
    std::vector<double> battery_levels;
    std::size_t charge_events = 0, charge_connects = 0;
    std::size_t malformed = 0;

    for (const auto& e : w.events) {
        if (!payload_is_well_formed(e)) {
            ++malformed;
            continue;
        }
        switch (e.sensor) {
            case SensorKind::Accelerometer: accel.push_back(std::get<AxisReading>(e.payload)); break;
            case SensorKind::Orientation: orient.push_back(std::get<AxisReading>(e.payload)); break;
            case SensorKind::MagneticField: magnet.push_back(std::get<AxisReading>(e.payload)); break;
            case SensorKind::Activities: activities.push_back(std::get<ActivityReading>(e.payload)); break;
            case SensorKind::StepDetector: ++steps; break;
            case SensorKind::Location: locations.push_back(std::get<LocationReading>(e.payload)); break;
            case SensorKind::Proximity:
                proximity.push_back(std::get<ProximityReading>(e.payload).distance_cm);
                break;
            case SensorKind::Bluetooth: {
                const auto& r = std::get<BluetoothReading>(e.payload);
                bt_rssi.push_back(r.rssi);
                bt_devices.insert(r.address);
                break;
            }
            case SensorKind::WifiEvent:
                ++wifi_events;
                if (std::get<WifiEventReading>(e.payload).connected) ++wifi_connections;
                break;
            case SensorKind::WifiNetworks:
                wifi_networks.insert(std::get<WifiScanReading>(e.payload).bssid);
                break;
            case SensorKind::BatteryCharge:
                ++charge_events;
                if (std::get<BatteryChargeReading>(e.payload).charging) ++charge_connects;
                break;
            case SensorKind::BatteryLevel:
                battery_levels.push_back(std::get<BatteryLevelReading>(e.payload).level);
                break;
        }
    }
    if (malformed > 0) {
        spdlog::warn("user {} window {}: skipped {} malformed sensor payload(s)", w.user_id, w.index,
                     malformed);
    }

    if (bt_rssi.empty()) {
        row.mark_missing(Feature::BluetoothRssiMean);
        row.mark_missing(Feature::BluetoothRssiVar);
        row.mark_missing(Feature::BluetoothNunique);
    } else {
        const auto mv = mean_var(bt_rssi);
        row.set(Feature::BluetoothRssiMean, mv.mean);
        row.set(Feature::BluetoothRssiVar, mv.var);
        row.set(Feature::BluetoothNunique, static_cast<double>(bt_devices.size()));
    }

    if (wifi_events == 0) {
        row.mark_missing(Feature::WifiConnectionCount);
        row.mark_missing(Feature::WifiIsConnected);
    } else {
        row.set(Feature::WifiConnectionCount, static_cast<double>(wifi_connections));
        row.set(Feature::WifiIsConnected, wifi_connections > 0 ? 1.0 : 0.0);
    }
    if (wifi_networks.empty()) {
        row.mark_missing(Feature::WifiNetworksNunique);
    } else {
        row.set(Feature::WifiNetworksNunique, static_cast<double>(wifi_networks.size()));
    }

    if (steps == 0) {
        row.mark_missing(Feature::StepDetectionCount);
    } else {
        row.set(Feature::StepDetectionCount, static_cast<double>(steps));
    }

    constexpr std::array<std::pair<Activity, Feature>, 7> kActivityFeatures{{
        {Activity::InVehicle, Feature::ActivityInVehicle},
        {Activity::OnBicycle, Feature::ActivityOnBicycle},
        {Activity::OnFoot, Feature::ActivityOnFoot},
        {Activity::Running, Feature::ActivityRunning},
        {Activity::Still, Feature::ActivityStill},
        {Activity::Unknown, Feature::ActivityUnknown},
        {Activity::Walking, Feature::ActivityWalking},
    }};
    for (const auto& [activity, feature] : kActivityFeatures) {
        if (activities.empty()) {
            row.mark_missing(feature);
            continue;
        }
        const bool seen = std::any_of(activities.begin(), activities.end(), [&](const ActivityReading& r) {
            return r.activity == activity && r.confidence >= opts.activity_confidence;
        });
        row.set(feature, seen ? 1.0 : 0.0);
    }

    set_axes(row, accel, Feature::AccelerometerAvgX, Feature::AccelerometerAvgY,
             Feature::AccelerometerAvgZ, Feature::AccelerometerMagnitudeAvg,
             Feature::AccelerometerMagnitudeVar);
    set_axes(row, orient, Feature::OrientationAvgX, Feature::OrientationAvgY,
             Feature::OrientationAvgZ, Feature::OrientationMagnitudeAvg,
             Feature::OrientationMagnitudeVar);
    set_axes(row, magnet, Feature::MagneticFieldAvgX, Feature::MagneticFieldAvgY,
             Feature::MagneticFieldAvgZ, Feature::MagneticFieldMagnitudeAvg,
             Feature::MagneticFieldMagnitudeVar);

    constexpr std::array<Feature, 6> kLocationFeatures{
        Feature::LocationAltitude,       Feature::LocationLongitude,
        Feature::LocationLatitude,       Feature::LocationDirectDistance,
        Feature::LocationTotalDistance,  Feature::LocationRadiusOfGyration};
    if (locations.empty()) {
        for (auto f : kLocationFeatures) row.mark_missing(f);
    } else {
        double alt = 0, lon = 0, lat = 0;
        std::vector<GeoPoint> points;
        points.reserve(locations.size());
        for (const auto& l : locations) {
            alt += l.altitude;
            lon += l.longitude;
            lat += l.latitude;
            points.push_back({l.latitude, l.longitude});
        }
        const auto n = static_cast<double>(locations.size());
        row.set(Feature::LocationAltitude, alt / n);
        row.set(Feature::LocationLongitude, lon / n);
        row.set(Feature::LocationLatitude, lat / n);
        const auto geo = geo_features(points);
        if (geo.direct_distance) {
            row.set(Feature::LocationDirectDistance, *geo.direct_distance);
            row.set(Feature::LocationTotalDistance, *geo.total_distance);
        } else {
            row.mark_missing(Feature::LocationDirectDistance);
            row.mark_missing(Feature::LocationTotalDistance);
        }
        row.set(Feature::LocationRadiusOfGyration, geo.radius_of_gyration);
    }

    if (proximity.empty()) {
        row.mark_missing(Feature::ProximityMean);
        row.mark_missing(Feature::ProximityVar);
    } else {
        const auto mv = mean_var(proximity);
        row.set(Feature::ProximityMean, mv.mean);
        row.set(Feature::ProximityVar, mv.var);
    }

    if (battery_levels.empty()) {
        row.mark_missing(Feature::BatteryDeltaShift);
    } else {
        row.set(Feature::BatteryDeltaShift, battery_levels.back() - battery_levels.front());
    }
    if (charge_events == 0) {
        row.mark_missing(Feature::BatteryChargeCount);
    } else {
        row.set(Feature::BatteryChargeCount, static_cast<double>(charge_connects));
    }
    return row;
}

}  // namespace skel::features
