#include "lv/util.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>

namespace lv {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t state = seed ^ (stream_id * 0xD1B54A32D192ED03ULL);
  return splitmix64(state);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  // Rejection sampling over the top of the range keeps the draw unbiased.
  std::uint64_t threshold = (0ULL - n) % n;
  for (;;) {
    std::uint64_t v = next();
    if (v >= threshold) return v % n;
  }
}

double Rng::next_double() {
  // 53 random bits into [0, 1).
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::string utf8_prefix(const std::string& s, int n_codepoints) {
  if (n_codepoints <= 0) return std::string();
  std::size_t i = 0;
  int seen = 0;
  while (i < s.size() && seen < n_codepoints) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((b & 0x80U) == 0x00U) {
      len = 1;
    } else if ((b & 0xE0U) == 0xC0U) {
      len = 2;
    } else if ((b & 0xF0U) == 0xE0U) {
      len = 3;
    } else if ((b & 0xF8U) == 0xF0U) {
      len = 4;
    }
    // Clip a truncated trailing sequence; treat stray continuation bytes as
    // one unit each (the len=1 default above).
    for (std::size_t k = 1; k < len; ++k) {
      if (i + k >= s.size() ||
          (static_cast<unsigned char>(s[i + k]) & 0xC0U) != 0x80U) {
        len = k;
        break;
      }
    }
    i += len;
    ++seen;
  }
  return s.substr(0, i);
}

std::size_t utf8_length(const std::string& s) {
  std::size_t count = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0U) != 0x80U) ++count;
  }
  return count;
}

std::string format_g17(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return std::string(buf);
}

std::string join_codes(const std::vector<int>& codes) {
  std::string out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(codes[i]);
  }
  return out;
}

std::vector<int> split_codes(const std::string& key) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= key.size()) {
    std::size_t end = key.find(',', start);
    if (end == std::string::npos) end = key.size();
    std::string part = key.substr(start, end - start);
    if (part.empty()) throw Error("empty code in context key: '" + key + "'");
    char* endptr = nullptr;
    long v = std::strtol(part.c_str(), &endptr, 10);
    if (endptr == nullptr || *endptr != '\0') {
      throw Error("non-numeric code in context key: '" + key + "'");
    }
    out.push_back(static_cast<int>(v));
    if (end == key.size()) break;
    start = end + 1;
  }
  return out;
}

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("LV_LOG");
    if (env == nullptr) return LogLevel::kWarn;
    if (std::strcmp(env, "error") == 0) return LogLevel::kError;
    if (std::strcmp(env, "warn") == 0) return LogLevel::kWarn;
    if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    return LogLevel::kWarn;
  }();
  return level;
}

void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  const char* tag = "warn";
  switch (level) {
    case LogLevel::kError: tag = "error"; break;
    case LogLevel::kWarn: tag = "warn"; break;
    case LogLevel::kInfo: tag = "info"; break;
    case LogLevel::kDebug: tag = "debug"; break;
  }
  std::cerr << "[" << tag << "] " << message << "\n";
}

}  // namespace lv
