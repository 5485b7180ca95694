#include "crowdflow/timeutil.hpp"

#include <charconv>
#include <cstdio>

namespace crowdflow {

namespace {

using namespace std::chrono;

bool read_fixed(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{} && ptr == text.data() + pos + len;
}

std::optional<Timestamp> make_timestamp(int y, int mo, int d, int h, int mi, int s) {
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SS
    if (text.size() < 19) return std::nullopt;
    int y, mo, d, h, mi, s;
    if (!read_fixed(text, 0, 4, y) || text[4] != '-' || !read_fixed(text, 5, 2, mo) || text[7] != '-' ||
        !read_fixed(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') || !read_fixed(text, 11, 2, h) ||
        text[13] != ':' || !read_fixed(text, 14, 2, mi) || text[16] != ':' || !read_fixed(text, 17, 2, s)) {
        return std::nullopt;
    }
    auto t = make_timestamp(y, mo, d, h, mi, s);
    if (!t) return std::nullopt;

    std::string_view rest = text.substr(19);
    if (rest.empty() || rest == "Z") return t;
    if (rest.size() != 6 || (rest[0] != '+' && rest[0] != '-') || rest[3] != ':') return std::nullopt;
    int oh, om;
    if (!read_fixed(rest, 1, 2, oh) || !read_fixed(rest, 4, 2, om) || oh > 23 || om > 59) return std::nullopt;
    const seconds offset = hours{oh} + minutes{om};
    // local = utc + offset
    return rest[0] == '+' ? *t - offset : *t + offset;
}

std::string format_iso8601(Timestamp t) {
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::string segment_file_stem(Timestamp t) {
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d%02u%02u_%02d%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()));
    return buf;
}

std::optional<Timestamp> parse_segment_file_name(std::string_view name) {
    if (name.size() >= 4 && name.substr(name.size() - 4) == ".csv") name.remove_suffix(4);
    if (name.size() != 13 || name[8] != '_') return std::nullopt;
    int y, mo, d, h, mi;
    if (!read_fixed(name, 0, 4, y) || !read_fixed(name, 4, 2, mo) || !read_fixed(name, 6, 2, d) ||
        !read_fixed(name, 9, 2, h) || !read_fixed(name, 11, 2, mi)) {
        return std::nullopt;
    }
    return make_timestamp(y, mo, d, h, mi, 0);
}

int weekday_monday0(Timestamp t) {
    const weekday wd{floor<days>(t)};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

int hour_of_day(Timestamp t) {
    return static_cast<int>(floor<hours>(t - floor<days>(t)).count());
}

int minute_of_hour(Timestamp t) {
    return static_cast<int>(floor<minutes>(t - floor<hours>(t)).count());
}

bool is_aligned(Timestamp t, Seconds step) {
    if (step.count() <= 0) return false;
    auto r = t.time_since_epoch().count() % step.count();
    return r == 0;
}

}  // namespace crowdflow
