#pragma once

#include "skel/features/feature_row.hpp"
#include "skel/features/sensor_event.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace skel::features {

/// One event per line:
///   {"user_id":"u01","timestamp":"2023-10-02T08:00:00.000Z",
///    "sensor":"accelerometer","payload":{"x":0.1,"y":0.2,"z":9.8}}
/// Payload keys per sensor: x/y/z; activity/confidence; (none);
/// latitude/longitude/altitude; distance (number or "near"/"far");
/// address/rssi; connected/network_id; bssid; charging/charger; level.
std::string to_json_line(const SensorEvent& e);
/// Throws DataError for unparseable JSON, unknown sensors or bad timestamps.
/// A payload that does not fit the sensor is kept as malformed.
SensorEvent parse_json_line(std::string_view line);

/// CSV form: user_id,timestamp,sensor,payload where payload is
/// semicolon-separated key=value pairs using the same keys as JSON.
std::string to_csv_line(const SensorEvent& e);
SensorEvent parse_csv_line(std::string_view line);
inline constexpr std::string_view kSensorCsvHeader = "user_id,timestamp,sensor,payload";

enum class SensorLogFormat { JsonLines, Csv };

/// Picks the format from the extension: ".csv" is CSV, anything else JSON-lines.
SensorLogFormat format_for_path(const std::string& path);

std::vector<SensorEvent> read_sensor_log(std::istream& in, SensorLogFormat format);
std::vector<SensorEvent> read_sensor_log(const std::string& path);
void write_sensor_log(std::ostream& out, const std::vector<SensorEvent>& events,
                      SensorLogFormat format);

/// Feature CSV: user_id,window_index,window_start, then every feature in
/// column order. Missing values are empty cells.
void write_feature_header(std::ostream& out);
void write_feature_row(std::ostream& out, const FeatureRow& row);

}  // namespace skel::features
