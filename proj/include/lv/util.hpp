#ifndef LV_UTIL_HPP_
#define LV_UTIL_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lv {

// Base error type for corpus/model/decoding failures. The CLI maps these to
// exit code 1 (usage errors from the argument parser map to exit code 2).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// All randomness in the toolkit flows from a single user seed through these
// helpers. std::shuffle / std::uniform_int_distribution are deliberately
// avoided: their outputs are implementation-defined, and the determinism
// contract ("byte-identical outputs for identical inputs and seed") should
// not depend on the standard library build.
// ---------------------------------------------------------------------------

// splitmix64 step: advances the state and returns the next 64-bit value.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives an independent stream seed from (seed, stream_id). Used for
// cross-validation folds and synthetic-data generators so that adding a new
// consumer never perturbs existing streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64(state_); }

  // Uniform draw in [0, n) without modulo bias (n > 0).
  std::uint64_t next_below(std::uint64_t n);

  // Uniform draw in [0, 1).
  double next_double();

  // Fisher-Yates shuffle with draws from this generator.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i + 1));
      std::swap(items[i], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// UTF-8 helpers.
// ---------------------------------------------------------------------------

// Returns the first `n_codepoints` codepoints of a UTF-8 string (the whole
// string if it is shorter). Bytes that do not form valid UTF-8 lead bytes are
// treated as single-codepoint units so malformed input degrades gracefully.
std::string utf8_prefix(const std::string& s, int n_codepoints);

// Number of codepoints in a UTF-8 string (used for text-table alignment).
std::size_t utf8_length(const std::string& s);

// ---------------------------------------------------------------------------
// Formatting.
// ---------------------------------------------------------------------------

// Shortest-exact decimal form of a double (17 significant digits): parsing the
// result with strtod reproduces the bit pattern. Used by every serialized
// number so reruns are byte-identical.
std::string format_g17(double value);

// Joins integer codes with ',' — the conditioning-context key syntax used by
// probability tables and their serialized records.
std::string join_codes(const std::vector<int>& codes);

// Splits a ','-separated code key back into integers. Throws Error on
// non-numeric input.
std::vector<int> split_codes(const std::string& key);

// ---------------------------------------------------------------------------
// Logging. Level comes from the LV_LOG environment variable
// (error|warn|info|debug); default warn. Messages go to stderr so stdout
// stays reserved for command output.
// ---------------------------------------------------------------------------

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel log_level();
void log_message(LogLevel level, const std::string& message);

inline void log_error(const std::string& m) { log_message(LogLevel::kError, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::kWarn, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::kInfo, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::kDebug, m); }

}  // namespace lv

#endif  // LV_UTIL_HPP_
