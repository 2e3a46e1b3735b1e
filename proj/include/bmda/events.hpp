#pragma once

// Line-delimited event records exchanged with the monitor: spoil events
// {timestamp, location_id, machine_id} and cumulative cast-count updates
// {timestamp, location_id, cast_total}. Timestamps are ISO 8601
// "YYYY-MM-DDTHH:MM:SS" (optional trailing 'Z'), stored as seconds since the
// Unix epoch.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "bmda/errors.hpp"

namespace bmda {

struct SpoilEvent {
  std::int64_t timestamp = 0;
  std::string location_id;
  std::string machine_id;
};

struct CastUpdate {
  std::int64_t timestamp = 0;
  std::string location_id;
  std::int64_t cast_total = 0;  // cumulative ballots cast at the location
};

namespace detail {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace detail

inline std::int64_t parse_iso8601(const std::string& s, long line = 0) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char sep = 0;
  const int got = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &sec);
  if (got < 7 || (sep != 'T' && sep != ' ') || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 ||
      mi > 59 || sec > 60)
    throw data_error("bad ISO 8601 timestamp: '" + s + "'", line);
  return detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + sec;
}

inline std::string format_iso8601(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  // invert days_from_civil
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld",
                static_cast<long long>(y + (m <= 2)), m, d, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem % 3600) / 60), static_cast<long long>(rem % 60));
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

// Parses "timestamp,location_id,machine_id" lines. A leading header line
// (first field "timestamp") is skipped.
inline std::vector<SpoilEvent> parse_spoil_events(const std::string& text) {
  std::vector<SpoilEvent> out;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv_line(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "timestamp") continue;
    if (fields.size() != 3) throw data_error("expected 3 fields (timestamp,location_id,machine_id)", line_no);
    out.push_back({parse_iso8601(fields[0], line_no), fields[1], fields[2]});
  }
  return out;
}

// Parses "timestamp,location_id,cast_total" lines (cumulative counts).
inline std::vector<CastUpdate> parse_cast_updates(const std::string& text) {
  std::vector<CastUpdate> out;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv_line(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "timestamp") continue;
    if (fields.size() != 3) throw data_error("expected 3 fields (timestamp,location_id,cast_total)", line_no);
    char* endp = nullptr;
    const long long v = std::strtoll(fields[2].c_str(), &endp, 10);
    if (endp == fields[2].c_str() || *endp != '\0' || v < 0)
      throw data_error("bad cast_total '" + fields[2] + "'", line_no);
    out.push_back({parse_iso8601(fields[0], line_no), fields[1], v});
  }
  return out;
}

}  // namespace bmda
