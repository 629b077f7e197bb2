#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vgne/game.hpp"
#include "vgne/graph.hpp"
#include "vgne/inner.hpp"
#include "vgne/params.hpp"
#include "vgne/splitting.hpp"
#include "vgne/trace.hpp"

namespace vgne {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitDivergence = 3, kExitIo = 4 };

/// INI experiment description. See README for the key table.
struct ExperimentConfig {
  // [game]
  std::string game_builtin;
  std::uint64_t game_seed = 0;
  std::filesystem::path game_file;
  // [graph]
  std::string graph_builtin = "path";
  std::vector<Edge> edges;  ///< 0-based, converted from the 1-based config list
  // [algorithm]
  std::string algorithm;
  // [params]
  /// Empty = unset, one value = scalar, otherwise one value per block.
  std::vector<double> r, h, w;
  std::optional<Range> r_range, h_range, w_range;
  double rho = 1.0;
  MuSchedule mu;
  std::uint64_t params_seed = 0;
  ValidationPolicy policy = ValidationPolicy::Enforce;
  // [inner]
  InnerSettings inner;
  // [stop]
  StopCriteria stop;
  // [output]
  std::filesystem::path output_dir = "out";
  std::size_t trace_stride = 1;
  // [init]
  std::uint64_t init_seed = 0;
};

/// Throws IoError for unreadable files and ValidationError for bad values
/// or unknown keys.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::filesystem::path& base_dir = ".");

struct Experiment {
  GameInstance game;
  CommGraph graph;
  AlgoParams params;
};

/// Builds the game, graph and parameters and checks the algorithm matches
/// the coupling kind.
Experiment build_experiment(const ExperimentConfig& config);

/// Runs the experiment and writes trace.csv, summary.json and instance.json
/// into the output directory (VGNE_OUTPUT_DIR overrides it). Returns an
/// ExitCode; messages go to err.
int run_experiment(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

/// Parses and validates only; prints the step-size margins.
int validate_experiment(const std::filesystem::path& config_path, std::ostream& out,
                        std::ostream& err);

/// Writes "k,value" lines for one trace column (no header).
int extract_quantity(const std::filesystem::path& trace_path, const std::string& quantity,
                     std::ostream& out, std::ostream& err);

const std::vector<std::string>& trace_columns();
std::string format_double(double v);
void write_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path);

}  // namespace vgne
