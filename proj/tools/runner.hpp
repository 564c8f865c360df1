#pragma once

// Batch runner behind the specint CLI: sweeps operators x N, runs the
// verification suites per cell and assembles deterministic CSV reports.

#include <specint/core.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace specint::cli {

struct CheckRow {
  std::string name;
  std::string op;
  Index n = 0;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct ConvergenceRow {
  std::string op;
  Index n = 0;
  std::string metric;  // HEURISTIC rows carry a "HEURISTIC:" prefix
  double value = 0.0;
};

struct ExperimentRow {
  std::string experiment;
  std::string op;
  Index n = 0;
  Index m = 0;
  int k = 0;
  double value = 0.0;
};

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string body;
};

/// Everything one (operator, N) cell produced. Cells are pure: they own no
/// shared state and are assembled by the runner afterwards.
struct CellResult {
  std::string op;
  std::string field;
  Index n = 0;
  std::vector<CheckRow> checks;
  std::vector<ConvergenceRow> convergence;
  std::vector<ExperimentRow> experiments;
  std::vector<OutputFile> files;
  std::vector<double> nu_e1_lambda;  // normalised nu^{e1,e1}, for cross-N distances
  std::vector<double> nu_e1_mass;
  std::optional<double> semicircle_distance;
  double graph_residual = 0.0;
  std::optional<std::string> error;
  double wall_seconds = 0.0;
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides output.dir
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  bool write_files = true;
};

struct Report {
  std::vector<CellResult> cells;  // ordered by (operator label, N)
  std::vector<CheckRow> cross_checks;
  std::vector<ConvergenceRow> cross_convergence;
  std::vector<OutputFile> files;  // every file written, manifest excluded
  std::filesystem::path out_dir;
  double wall_seconds = 0.0;

  /// True iff no cell failed and every non-HEURISTIC check passed.
  bool success() const;
};

/// Reads SPECINT_SEED (decimal or 0x-prefixed hex); 0 when unset.
std::uint64_t seed_from_environment();

/// Seed of one cell: the run seed mixed with the operator label and N.
std::uint64_t cell_seed(std::uint64_t seed, const std::string& label, Index n);

/// Report label of each configured operator: its kind, suffixed by the field
/// when complex and by a position when two entries would collide.
std::vector<std::string> operator_labels(const RunConfig& config);

/// Runs a single cell.
CellResult run_cell(const RunConfig& config, const OperatorRef& ref, const std::string& label,
                    Index n, std::uint64_t seed);

/// Runs the full sweep and writes reports and manifest.json.
Report run(const RunConfig& config, const RunOptions& options,
           const std::optional<nlohmann::json>& raw_config = std::nullopt);

std::string checks_csv(const std::vector<CheckRow>& rows);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);
std::string experiments_csv(const std::vector<ExperimentRow>& rows);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace specint::cli
