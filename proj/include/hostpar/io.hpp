#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "hostpar/mc.hpp"
#include "hostpar/model.hpp"
#include "hostpar/oracle.hpp"
#include "hostpar/sim.hpp"

namespace hostpar {

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed model file. line is 0 when it could not be located.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, std::size_t line, const std::string& detail);
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

struct ModelFile {
  ModelParams params;
  std::string name;
  bool relaxed = false;
};

/// Parses the JSON model format. Throws ParseError for structural problems
/// and NormalizationError for laws whose probabilities do not sum to 1.
ModelFile parse_model(const std::string& text);
ModelFile load_model(const std::filesystem::path& path);

std::string model_to_json(const ModelFile& file);
void save_model(const std::filesystem::path& path, const ModelFile& file);

/// Validates with the file's relaxed flag.
Validation validate(const ModelFile& file);

/// 16 hex digits of FNV-1a over the canonical JSON of the parameters.
std::string params_hash(const ModelParams& params);

struct RunMetadata {
  std::string command;
  std::string params_hash;
  std::optional<std::uint64_t> seed;
};

/// "# tool=hostpar version=.. params_hash=.. seed=.." line for CSV files.
std::string csv_header_comment(const RunMetadata& meta);

// Writers. Each CSV begins with the metadata comment line.

void write_trajectory_csv(std::ostream& out, const RunMetadata& meta, const std::vector<Trajectory>& replicates,
                          const DerivedQuantities& d);
void write_mc_csv(std::ostream& out, const RunMetadata& meta, const McSummary& summary);
/// Runs the Monte Carlo summary and renders it exactly as the mc command does.
std::string mc_csv(const ModelFile& file, const McConfig& cfg);

void write_pmf_csv(std::ostream& out, const RunMetadata& meta, const PmfVector& pmf);

/// Regime report: every derived quantity and every flag with the values
/// that decided it.
std::string classify_text(const ModelFile& file, const RegimeReport& report);
std::string classify_json(const ModelFile& file, const RegimeReport& report);

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double x);

}  // namespace hostpar
