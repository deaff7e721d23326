#include "aqad/core/time.hpp"

#include <cctype>
#include <cstdio>

#include "aqad/core/error.hpp"

namespace aqad {
namespace {

int read_digits(std::string_view text, std::size_t& pos, int count) {
  int value = 0;
  for (int i = 0; i < count; ++i, ++pos) {
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) {
      throw Error(Errc::ParseError, "bad ISO-8601 timestamp \"" + std::string(text) + "\"");
    }
    value = value * 10 + (text[pos] - '0');
  }
  return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(Errc::ParseError, "bad ISO-8601 timestamp \"" + std::string(text) + "\"");
  }
  ++pos;
}

}  // namespace

// Accepts YYYY-MM-DDTHH:MM[:SS][.fff](Z|+00:00) and the date-only form.
Instant parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  std::size_t pos = 0;
  const int y = read_digits(text, pos, 4);
  expect(text, pos, '-');
  const int mo = read_digits(text, pos, 2);
  expect(text, pos, '-');
  const int d = read_digits(text, pos, 2);
  int hh = 0, mm = 0, ss = 0;
  if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
    ++pos;
    hh = read_digits(text, pos, 2);
    expect(text, pos, ':');
    mm = read_digits(text, pos, 2);
    if (pos < text.size() && text[pos] == ':') {
      ++pos;
      ss = read_digits(text, pos, 2);
    }
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
  }
  std::string_view rest = text.substr(pos);
  if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) {
    throw Error(Errc::ParseError,
                "timestamp must be UTC (Z or +00:00): \"" + std::string(text) + "\"");
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw Error(Errc::ParseError, "invalid calendar value in \"" + std::string(text) + "\"");
  }
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_iso8601(Instant t) {
  using namespace std::chrono;
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

Instant floor_to_interval(Instant t, Duration interval) {
  const auto s = to_epoch_seconds(t);
  const auto step = interval.count();
  auto q = s / step;
  if (s % step != 0 && s < 0) --q;
  return from_epoch_seconds(q * step);
}

}  // namespace aqad
