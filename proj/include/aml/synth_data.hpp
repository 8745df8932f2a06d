#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace aml {

/// Parameters for a synthetic transaction file in the IBM CSV layout.
struct SynthCsvConfig {
  std::size_t rows = 1000;
  /// Target share of rows that belong to laundering attempts.
  double laundering_fraction = 0.01;
  /// Background account pool; 0 picks max(16, rows / 10).
  std::size_t n_accounts = 0;
  unsigned n_banks = 20;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidArgument
};

struct SynthCsvResult {
  std::string csv;
  /// Laundering-attempt companion file, one block per generated attempt.
  std::string patterns;
  std::size_t rows = 0;
  std::size_t laundering_rows = 0;
  std::size_t attempts = 0;
  std::size_t accounts = 0;  // distinct accounts appearing in rows
  std::size_t banks = 0;     // distinct banks appearing in rows
};

/// Background transfers among a random pool plus typology instances from
/// typology::generate on fresh accounts, rows sorted by time. Laundering
/// kinds rotate through all eight. Deterministic per seed.
SynthCsvResult synth_csv(const SynthCsvConfig& cfg);

/// synth_csv written to disk; the patterns file only when a path is given.
SynthCsvResult write_synth_csv(const SynthCsvConfig& cfg, const std::filesystem::path& csv_path,
                               const std::optional<std::filesystem::path>& patterns_path = std::nullopt);

}  // namespace aml
