#include "lorasim/time.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lorasim {

Duration parse_duration(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty duration");

  std::size_t split = 0;
  while (split < text.size() && (std::isdigit(static_cast<unsigned char>(text[split])) || text[split] == '.')) {
    ++split;
  }
  const std::string number(text.substr(0, split));
  const std::string_view unit = text.substr(split);
  if (number.empty()) throw std::invalid_argument("duration has no numeric part: " + std::string(text));

  std::size_t consumed = 0;
  double value = 0;
  try {
    value = std::stod(number, &consumed);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad duration: " + std::string(text));
  }
  if (consumed != number.size()) throw std::invalid_argument("bad duration: " + std::string(text));

  double scale = 1e6;
  if (unit.empty() || unit == "s") scale = 1e6;
  else if (unit == "us") scale = 1;
  else if (unit == "ms") scale = 1e3;
  else if (unit == "m" || unit == "min") scale = 60e6;
  else if (unit == "h") scale = 3600e6;
  else if (unit == "d") scale = 86400e6;
  else throw std::invalid_argument("unknown duration unit '" + std::string(unit) + "'");

  return Duration(static_cast<std::int64_t>(std::llround(value * scale)));
}

std::string format_duration(Duration d) {
  std::ostringstream out;
  auto us = d.count();
  if (us < 0) {
    out << '-';
    us = -us;
  }
  const std::int64_t hours = us / 3'600'000'000;
  const std::int64_t minutes = (us / 60'000'000) % 60;
  const std::int64_t rest = us % 60'000'000;
  if (hours) out << hours << 'h';
  if (minutes) out << minutes << 'm';
  if (rest || (!hours && !minutes)) {
    if (rest % 1'000'000 == 0) out << rest / 1'000'000 << 's';
    else out << static_cast<double>(rest) / 1e6 << 's';
  }
  return out.str();
}

}  // namespace lorasim
