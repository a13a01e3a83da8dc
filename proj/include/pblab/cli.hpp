#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace pblab::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_check = 2 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Strict reader for one JSON object: every key must be consumed before
// finish(), and errors name the full field path.
class Fields {
 public:
  Fields(const nlohmann::json& j, std::string path);

  bool has(const std::string& key) const { return j_.contains(key); }
  const nlohmann::json& raw(const std::string& key);
  const nlohmann::json* optional_raw(const std::string& key);
  long integer(const std::string& key, std::optional<long> fallback = std::nullopt, long min = 0);
  double real(const std::string& key, std::optional<double> fallback = std::nullopt);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  std::vector<long> integers(const std::string& key, std::optional<std::vector<long>> fallback = std::nullopt);
  std::vector<double> reals(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
  void finish() const;

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

struct RunRequest {
  std::string subcommand;
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

const std::vector<std::string>& subcommands();

// Loads, validates and executes; returns the process exit code. Messages go
// to `err`, progress to `log`.
int run(const RunRequest& req, std::ostream& log, std::ostream& err);

void write_atomic(const std::filesystem::path& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static CsvTable parse(std::istream& in);
  static CsvTable read(const std::filesystem::path& path);
  std::string str() const;
  std::size_t column(const std::string& name) const;  // throws if absent
};

struct DiffOptions {
  std::vector<std::string> keys;             // columns identifying a row
  std::set<std::string> integer_columns;     // exact match required
  std::map<std::string, double> abs_tol;     // per real column
  std::map<std::string, double> rel_tol;
  double default_abs_tol = 0.0;
};

struct CellDiff {
  std::string row_key;
  std::string column;
  std::string produced;
  std::string golden;
  double abs_dev = 0.0;
  double rel_dev = 0.0;
  bool pass = true;
  bool hard = false;  // integer mismatch or missing row
};

struct DiffReport {
  std::vector<CellDiff> cells;
  std::size_t failures = 0;
  std::size_t hard_failures = 0;
  bool pass() const { return failures == 0; }
  nlohmann::json to_json() const;
};

// Compares the golden cells against the produced table; columns only in the
// produced table are ignored. Throws std::invalid_argument on schema mismatch.
DiffReport diff_tables(const CsvTable& produced, const CsvTable& golden, const DiffOptions& opts);

}  // namespace pblab::cli
