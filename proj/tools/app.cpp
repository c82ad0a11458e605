#include "app.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "cdtkit/features.hpp"

namespace cdtkit::cli {

std::filesystem::path Globals::output(const std::filesystem::path& name) const {
  if (output_dir.empty() || name.is_absolute()) return name;
  return output_dir / name;
}

std::uint64_t Globals::require_seed(const nlohmann::json* config) const {
  if (seed) return *seed;
  if (config && config->contains("seed")) {
    const auto& s = (*config)["seed"];
    if (!s.is_number_unsigned()) throw UsageError("config field 'seed' must be a nonnegative integer");
    return s.get<std::uint64_t>();
  }
  throw UsageError("a seed is required (--seed or the config's 'seed' field)");
}

void Globals::note(const std::string& message) const {
  if (!quiet) std::cerr << message << '\n';
}

unsigned thread_limit() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CDTKIT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) {
      throw UsageError("CDTKIT_THREADS must be a positive integer, got '" + std::string(env) + "'");
    }
    n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

void require_schema(const nlohmann::json& config, const std::string& expected) {
  if (!config.is_object()) throw UsageError("config must be a JSON object");
  const auto it = config.find("schema");
  if (it == config.end() || !it->is_string()) {
    throw UsageError("config has no 'schema' field (expected \"" + expected + "\")");
  }
  if (*it != expected) {
    throw UsageError("unsupported schema \"" + it->get<std::string>() + "\" (expected \"" +
                     expected + "\")");
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  write_file_atomic(path, value.dump(2) + "\n");
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto count = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cdtkit::cli
