#pragma once

// Flat config files, binary field snapshots, CSV series and JSON reports.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "decm/diagnostics.hpp"
#include "decm/dynamics.hpp"
#include "decm/error.hpp"
#include "decm/experiments.hpp"
#include "decm/initial_data.hpp"

namespace decm {

/// Missing, unreadable or unwritable file, or a corrupt snapshot.
class IoError : public Error {
public:
  using Error::Error;
};

/// Any problem with a config file. line() is 1-based (0 when the problem is not tied to a line).
class ConfigError : public Error {
public:
  ConfigError(const std::string& what, int line, std::string key)
      : Error(what), line_(line), key_(std::move(key)) {}
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

private:
  int line_;
  std::string key_;
};

/// A line that is not `key = value`.
class ConfigSyntaxError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class UnknownKeyError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// A value that does not parse or breaks an invariant.
class ConfigValueError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

struct RunConfig {
  SimConfig sim;
  InitialData init;
  std::string output_dir = "decm_out";
  /// Present when the file sets experiment.kind.
  std::optional<ExperimentSpec> experiment;
};

/// Parses config text. `source` names the origin in messages.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
/// Reads and parses a file; DECM_OUTPUT_DIR (when set) overrides output.dir.
RunConfig load_config(const std::filesystem::path& path);

// ----- snapshots ----------------------------------------------------------------------------

enum class ScaleTag : std::uint8_t { laboratory = 0, gyration = 1, friction = 2, friction_boosted = 3 };

ScaleTag scale_tag(TimeScale s, bool boosted);
std::string_view to_string(ScaleTag t) noexcept;

struct Snapshot {
  ScalarField field;
  double t = 0.0;
  double b = 0.0;
  ScaleTag tag = ScaleTag::laboratory;
};

inline constexpr std::size_t snapshot_size(int n) {
  return 6 + 4 + 8 + 8 + 1 + 8 * static_cast<std::size_t>(n) * n;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot load_snapshot(const std::filesystem::path& path);

// ----- series and reports -------------------------------------------------------------------

inline constexpr std::string_view kSeriesHeader = "t,l2,l4,linf,h_half,h3,mean,balance_residual";

/// One row per record; residual must have the same length.
void write_series(const std::filesystem::path& path, std::span<const NormRecord> records,
                  std::span<const double> residual);
std::string format_series(std::span<const NormRecord> records, std::span<const double> residual);

std::string report_json(const ExperimentReport& report);
void write_report(const std::filesystem::path& path, const ExperimentReport& report);

/// Writes `text` to path, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace decm
