#include "skel/config.hpp"

#include "skel/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace skel {

namespace {

KeyValueConfig flatten(const boost::property_tree::ptree& tree) {
    KeyValueConfig out;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            out.set(section, body.data());
            continue;
        }
        for (const auto& [key, value] : body) out.set(section + "." + key, value.data());
    }
    return out;
}

KeyValueConfig parse(std::istream& in, const std::string& what) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& ex) {
        throw ConfigError(fmt::format("{}: {}", what, ex.message()));
    }
    return flatten(tree);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", path));
    return parse(in, path);
}

KeyValueConfig KeyValueConfig::from_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in, "config");
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, s));
    }
    return v;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, s));
    }
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(fmt::format("{}: expected a boolean, got '{}'", key, s));
}

void KeyValueConfig::reject_unknown(const std::string& section, const std::set<std::string>& known) const {
    const std::string prefix = section + ".";
    for (const auto& [key, _] : values_) {
        if (key.rfind(prefix, 0) != 0) continue;
        const auto name = key.substr(prefix.size());
        if (!known.count(name)) throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
}

}  // namespace skel
