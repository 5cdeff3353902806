#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hbs/dataset.hpp"
#include "hbs/pls_solver.hpp"
#include "hbs/rkhs.hpp"
#include "hbs/synthetic.hpp"

namespace hbs {

std::string_view library_version() noexcept;

// ---------------------------------------------------------------- CSV

/// Comma-separated text with a mandatory header row. No quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; throws IngestionError when missing.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Locale-independent parse of a decimal cell. Rejects trailing garbage and
/// non-finite values with an IngestionError carrying the location.
double parse_number(std::string_view cell, long row, long column);

struct IngestedData {
  Matrix raw;
  Vector y;  ///< empty when no response column was requested
  std::vector<std::string> predictors;
  std::string response;
};

/// Predictors default to every column except the response.
IngestedData ingest_csv(const CsvTable& table, const std::string& response,
                        const std::vector<std::string>& predictors = {});

// ---------------------------------------------------------------- models

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  FittedModel model;
  std::vector<std::string> predictors;
  std::string response;
};

std::string spec_to_json(const AnovaSpec& spec);
/// {"mains": [...], "pairs": [[a, b], ...], "theta": [...]} with 0-based
/// column indices; theta is optional (all ones).
AnovaSpec spec_from_json(std::string_view text, int dims);

/// Default term structure: all mains and pairs, additive for d >= 8.
AnovaSpec default_spec(int dims);

std::string model_to_json(const ModelFile& file);
/// Throws InvalidInput for malformed files or an unknown format_version.
ModelFile model_from_json(std::string_view text);
void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------- bench config

/// Every schema problem is listed in one InvalidConfig message.
ExperimentConfig experiment_config_from_json(std::string_view text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- manifests

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version{library_version()};
  std::string started;
  std::string finished;
  std::vector<std::string> warnings;

  std::string to_json() const;
};

/// FNV-1a 64 of the canonical configuration text, as 16 hex digits.
std::string config_hash(std::string_view canonical);
std::string utc_timestamp();

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace hbs
