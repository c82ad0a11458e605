#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

namespace cdtkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Bad flags, configs or inputs. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A per-row numeric failure. Maps to exit code 3.
class RowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::filesystem::path output_dir;
  unsigned threads = 1;

  std::filesystem::path output(const std::filesystem::path& name) const;
  std::uint64_t require_seed(const nlohmann::json* config = nullptr) const;
  void note(const std::string& message) const;
};

/// Hardware concurrency, capped by CDTKIT_THREADS when set.
unsigned thread_limit();

nlohmann::json read_json(const std::filesystem::path& path);
/// Throws UsageError unless config["schema"] == expected.
void require_schema(const nlohmann::json& config, const std::string& expected);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. If any call throws,
/// the exception of the smallest failing index is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace cdtkit::cli
