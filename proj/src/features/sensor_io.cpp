#include "skel/features/sensor_io.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace skel::features {

using nlohmann::json;

namespace {

json payload_to_json(const SensorEvent& e) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return json::object();
            } else if constexpr (std::is_same_v<T, AxisReading>) {
                return {{"x", r.x}, {"y", r.y}, {"z", r.z}};
            } else if constexpr (std::is_same_v<T, ActivityReading>) {
                return {{"activity", to_string(r.activity)}, {"confidence", r.confidence}};
            } else if constexpr (std::is_same_v<T, StepReading>) {
                return json::object();
            } else if constexpr (std::is_same_v<T, LocationReading>) {
                return {{"latitude", r.latitude}, {"longitude", r.longitude}, {"altitude", r.altitude}};
            } else if constexpr (std::is_same_v<T, ProximityReading>) {
                return {{"distance", r.distance_cm}};
            } else if constexpr (std::is_same_v<T, BluetoothReading>) {
                return {{"address", r.address}, {"rssi", r.rssi}};
            } else if constexpr (std::is_same_v<T, WifiEventReading>) {
                return {{"connected", r.connected}, {"network_id", r.network_id}};
            } else if constexpr (std::is_same_v<T, WifiScanReading>) {
                return {{"bssid", r.bssid}};
            } else if constexpr (std::is_same_v<T, BatteryChargeReading>) {
                return {{"charging", r.charging}, {"charger", r.charger}};
            } else {
                return {{"level", r.level}};
            }
        },
        e.payload);
}

double number(const json& p, const char* key) {
    const auto it = p.find(key);
    if (it == p.end() || !it->is_number()) throw std::invalid_argument(key);
    return it->get<double>();
}

std::string text(const json& p, const char* key) {
    const auto it = p.find(key);
    if (it == p.end()) throw std::invalid_argument(key);
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

bool boolean(const json& p, const char* key) {
    const auto it = p.find(key);
    if (it == p.end()) throw std::invalid_argument(key);
    if (it->is_boolean()) return it->get<bool>();
    if (it->is_number()) return it->get<double>() != 0.0;
    throw std::invalid_argument(key);
}

SensorPayload payload_from_json(SensorKind kind, const json& p) {
    if (!p.is_object()) return std::monostate{};
    try {
        switch (kind) {
            case SensorKind::Accelerometer:
            case SensorKind::Orientation:
            case SensorKind::MagneticField:
                return AxisReading{number(p, "x"), number(p, "y"), number(p, "z")};
            case SensorKind::Activities: {
                const auto a = parse_activity(text(p, "activity"));
                if (!a) return std::monostate{};
                return ActivityReading{*a, number(p, "confidence")};
            }
            case SensorKind::StepDetector:
                return StepReading{};
            case SensorKind::Location:
                return LocationReading{number(p, "latitude"), number(p, "longitude"),
                                       p.contains("altitude") ? number(p, "altitude") : 0.0};
            case SensorKind::Proximity: {
                const auto it = p.find("distance");
                if (it == p.end()) return std::monostate{};
                if (it->is_number()) return ProximityReading{it->get<double>()};
                if (it->is_string()) {
                    const auto s = it->get<std::string>();
                    if (s == "near") return ProximityReading{kProximityNearCm};
                    if (s == "far") return ProximityReading{kProximityFarCm};
                }
                return std::monostate{};
            }
            case SensorKind::Bluetooth:
                return BluetoothReading{text(p, "address"), number(p, "rssi")};
            case SensorKind::WifiEvent:
                return WifiEventReading{boolean(p, "connected"),
                                        p.contains("network_id") ? text(p, "network_id") : ""};
            case SensorKind::WifiNetworks:
                return WifiScanReading{text(p, "bssid")};
            case SensorKind::BatteryCharge:
                return BatteryChargeReading{boolean(p, "charging"),
                                            p.contains("charger") ? text(p, "charger") : ""};
            case SensorKind::BatteryLevel:
                return BatteryLevelReading{number(p, "level")};
        }
    } catch (const std::exception&) {
        return std::monostate{};
    }
    return std::monostate{};
}

SensorKind sensor_or_throw(std::string_view name) {
    const auto kind = parse_sensor_kind(name);
    if (!kind) throw DataError(fmt::format("unknown sensor '{}'", name));
    return *kind;
}

std::string csv_value(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return fmt::format("{}", v.get<double>());
    return v.dump();
}

json parse_csv_value(std::string_view s) {
    if (s == "true") return true;
    if (s == "false") return false;
    double d = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec == std::errc{} && p == s.data() + s.size() && !s.empty()) return d;
    return std::string(s);
}

}  // namespace

std::string to_json_line(const SensorEvent& e) {
    json j{{"user_id", e.user_id},
           {"timestamp", format_iso(e.timestamp)},
           {"sensor", to_string(e.sensor)},
           {"payload", payload_to_json(e)}};
    return j.dump();
}

SensorEvent parse_json_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& ex) {
        throw DataError(fmt::format("invalid JSON sensor record: {}", ex.what()));
    }
    if (!j.is_object() || !j.contains("user_id") || !j.contains("timestamp") ||
        !j.contains("sensor")) {
        throw DataError("sensor record needs user_id, timestamp and sensor");
    }
    SensorEvent e;
    e.user_id = j["user_id"].is_string() ? j["user_id"].get<std::string>() : j["user_id"].dump();
    if (!j["timestamp"].is_string()) throw DataError("timestamp must be an ISO string");
    e.timestamp = parse_iso(j["timestamp"].get<std::string>());
    if (!j["sensor"].is_string()) throw DataError("sensor must be a string");
    e.sensor = sensor_or_throw(j["sensor"].get<std::string>());
    e.payload = payload_from_json(e.sensor, j.value("payload", json::object()));
    return e;
}

std::string to_csv_line(const SensorEvent& e) {
    const json p = payload_to_json(e);
    std::string payload;
    for (auto it = p.begin(); it != p.end(); ++it) {
        if (!payload.empty()) payload += ';';
        payload += it.key();
        payload += '=';
        payload += csv_value(it.value());
    }
    return fmt::format("{},{},{},{}", e.user_id, format_iso(e.timestamp), to_string(e.sensor), payload);
}

SensorEvent parse_csv_line(std::string_view line) {
    std::array<std::string_view, 4> cols;
    std::size_t start = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) throw DataError("sensor CSV line needs 4 columns");
        cols[i] = line.substr(start, comma - start);
        start = comma + 1;
    }
    cols[3] = line.substr(start);
    if (!cols[3].empty() && cols[3].back() == '\r') cols[3].remove_suffix(1);

    SensorEvent e;
    e.user_id = std::string(cols[0]);
    e.timestamp = parse_iso(cols[1]);
    e.sensor = sensor_or_throw(cols[2]);
    json p = json::object();
    std::string_view rest = cols[3];
    while (!rest.empty()) {
        const auto semi = rest.find(';');
        const auto pair = rest.substr(0, semi);
        const auto eq = pair.find('=');
        if (eq != std::string_view::npos) {
            p[std::string(pair.substr(0, eq))] = parse_csv_value(pair.substr(eq + 1));
        }
        if (semi == std::string_view::npos) break;
        rest.remove_prefix(semi + 1);
    }
    e.payload = payload_from_json(e.sensor, p);
    return e;
}

SensorLogFormat format_for_path(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0 ? SensorLogFormat::Csv
                                                                             : SensorLogFormat::JsonLines;
}

std::vector<SensorEvent> read_sensor_log(std::istream& in, SensorLogFormat format) {
    std::vector<SensorEvent> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (format == SensorLogFormat::Csv && lineno == 1 && line.rfind("user_id,", 0) == 0) continue;
        try {
            out.push_back(format == SensorLogFormat::Csv ? parse_csv_line(line) : parse_json_line(line));
        } catch (const DataError& ex) {
            throw DataError(fmt::format("line {}: {}", lineno, ex.what()));
        }
    }
    return out;
}

std::vector<SensorEvent> read_sensor_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open sensor log '{}'", path));
    return read_sensor_log(in, format_for_path(path));
}

void write_sensor_log(std::ostream& out, const std::vector<SensorEvent>& events,
                      SensorLogFormat format) {
    if (format == SensorLogFormat::Csv) out << kSensorCsvHeader << '\n';
    for (const auto& e : events) {
        out << (format == SensorLogFormat::Csv ? to_csv_line(e) : to_json_line(e)) << '\n';
    }
}

void write_feature_header(std::ostream& out) {
    out << "user_id,window_index,window_start";
    for (std::size_t f = 0; f < kFeatureCount; ++f) out << ',' << feature_name(f);
    out << '\n';
}

void write_feature_row(std::ostream& out, const FeatureRow& row) {
    out << row.user_id << ',' << row.window_index << ',' << format_iso(row.start);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        out << ',';
        if (!row.missing[f]) out << fmt::format("{}", row.values[f]);
    }
    out << '\n';
}

}  // namespace skel::features
