#include "skel/time.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

#include <charconv>

namespace skel {

using namespace std::chrono;

Timestamp default_study_start() {
    return time_point_cast<milliseconds>(sys_days{year{2023} / October / 2});
}

std::string format_iso(Timestamp t) {
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    auto ms = (t - day).count();
    const auto h = ms / 3'600'000;
    ms %= 3'600'000;
    const auto m = ms / 60'000;
    ms %= 60'000;
    const auto s = ms / 1000;
    ms %= 1000;
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h, m,
                       s, ms);
}

namespace {

int parse_field(std::string_view s, std::size_t pos, std::size_t len, std::string_view whole) {
    int v = 0;
    if (pos + len > s.size()) throw DataError(fmt::format("malformed timestamp '{}'", whole));
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    if (ec != std::errc{} || p != s.data() + pos + len) {
        throw DataError(fmt::format("malformed timestamp '{}'", whole));
    }
    return v;
}

}  // namespace

Timestamp parse_iso(std::string_view s) {
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':') {
        throw DataError(fmt::format("malformed timestamp '{}'", s));
    }
    const int y = parse_field(s, 0, 4, s);
    const int mo = parse_field(s, 5, 2, s);
    const int d = parse_field(s, 8, 2, s);
    const int h = parse_field(s, 11, 2, s);
    const int mi = parse_field(s, 14, 2, s);
    const int se = parse_field(s, 17, 2, s);
    int millis = 0;
    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (digits < 3) millis = millis * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) throw DataError(fmt::format("malformed timestamp '{}'", s));
        for (int k = digits; k < 3; ++k) millis *= 10;
    }
    if (pos < s.size() && s[pos] == 'Z') ++pos;
    if (pos != s.size()) throw DataError(fmt::format("malformed timestamp '{}'", s));

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 59) {
        throw DataError(fmt::format("invalid timestamp '{}'", s));
    }
    return time_point_cast<milliseconds>(sys_days{ymd}) + hours{h} + minutes{mi} + seconds{se} +
           milliseconds{millis};
}

double hour_of_day(Timestamp t) {
    const auto since = t - floor<days>(t);
    return static_cast<double>(since.count()) / 3'600'000.0;
}

int minute_of_day(Timestamp t) {
    return static_cast<int>(duration_cast<minutes>(t - floor<days>(t)).count());
}

unsigned iso_weekday(Timestamp t) { return weekday{floor<days>(t)}.iso_encoding(); }

Timestamp start_of_day(Timestamp t) { return time_point_cast<milliseconds>(floor<days>(t)); }

}  // namespace skel
