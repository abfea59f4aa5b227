#pragma once

// Run configuration, file formats and the two front-end commands.

#include "assignflow/harness.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace assignflow {

struct RunConfig {
  /// Generated scenario; ignored when `input` is set.
  std::string scenario = "vertex31";
  /// PPM image (P3/P6) or CSV feature file, one row per node.
  std::string input;
  /// Label count k (k-means) or a CSV of label prototypes. Empty: scenario default.
  std::string labels;
  std::optional<double> rho;
  std::optional<Index> window;
  std::string integrator = "rkmk12";
  double tau = 0.01;
  int n_tau = 20;
  /// Initial step (adaptive) or fixed step. Default depends on the integrator.
  std::optional<double> h0;
  double c = 1.0;
  Index m = 5;
  /// Exponential-integrator horizon; chosen from the entropy threshold when unset.
  std::optional<double> horizon;
  std::uint64_t seed = 1;
  std::string out = "out";
  /// "auto" (ground truth of the matching flow), "none", or a label CSV path.
  std::string oracle = "auto";

  void validate() const;
};

const std::vector<std::string> &integrator_names();
bool is_linear_integrator(const std::string &name);
double default_step(const std::string &integrator);

/// Side length used for generated colorquant images.
inline constexpr Index kColorImageSize = 128;

ScenarioData load_scenario(const RunConfig &config);

struct RunSummary {
  std::size_t iterations = 0;
  bool converged = false;
  double final_time = 0.0;
  double wall_time = 0.0;
  std::optional<Agreement> oracle_agreement;
  std::optional<Agreement> truth_agreement;
  std::filesystem::path directory;
};

/// Integrates, then writes labels.ppm, labels.csv, trace.csv, summary.json
/// and (1-D three-label runs) trajectory.csv into config.out.
RunSummary run(const RunConfig &config, std::ostream &log);

struct CompareReport {
  Agreement agreement;
  Index width = 0;
  Index height = 0;
};

/// Compares two label CSVs; writes a white-on-black difference mask when
/// `mask` is given.
CompareReport compare(const std::filesystem::path &a, const std::filesystem::path &b,
                      const std::optional<std::filesystem::path> &mask = {});

// -- file formats ------------------------------------------------------------

struct Image {
  Index width = 0;
  Index height = 0;
  /// One RGB row per pixel, values in [0, 1].
  RowMatrix rgb;
};

Image read_ppm(const std::filesystem::path &path);
void write_ppm(const std::filesystem::path &path, Index width, Index height,
               const std::vector<std::uint8_t> &rgb);
/// Fixed seeded palette, three bytes per label.
std::vector<std::uint8_t> label_palette(Index labels);

RowMatrix read_csv_matrix(const std::filesystem::path &path);

struct LabelGrid {
  Index width = 0;
  Index height = 0;
  std::vector<int> labels;
};
LabelGrid read_label_csv(const std::filesystem::path &path);
void write_label_csv(const std::filesystem::path &path, const LabelGrid &grid);

/// Shortest round-trip decimal representation, locale independent.
std::string format_double(double x);

} // namespace assignflow
