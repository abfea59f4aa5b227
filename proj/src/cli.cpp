#include "assignflow/cli.hpp"

#include "assignflow/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

namespace assignflow {
namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path &path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) {
    throw InvalidArgument("cannot read '" + path.string() + "'");
  }
  return in;
}

std::ofstream open_output(const fs::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <class T> T parse_number(const std::string &text, const fs::path &where) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw InvalidArgument("malformed number '" + s + "' in '" + where.string() + "'");
  }
  return value;
}

bool all_digits(const std::string &s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isdigit(ch); });
}

bool has_extension(const std::string &path, std::string_view ext) {
  std::string e = fs::path(path).extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return e == ext;
}

} // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// -- configuration -------------------------------------------------------------

const std::vector<std::string> &integrator_names() {
  static const std::vector<std::string> names{"be",     "fe",        "h2",         "h3",
                                              "rk4",    "rkmk12",    "rkmk32",     "linear-be",
                                              "linear-rk1", "linear-rk4", "expint"};
  return names;
}

bool is_linear_integrator(const std::string &name) {
  return name.rfind("linear-", 0) == 0 || name == "expint";
}

double default_step(const std::string &integrator) {
  if (integrator == "be" || integrator == "linear-be") {
    return 0.5;
  }
  if (integrator == "rkmk12" || integrator == "rkmk32") {
    return 0.01;
  }
  return 0.1;
}

void RunConfig::validate() const {
  const auto &names = integrator_names();
  if (std::find(names.begin(), names.end(), integrator) == names.end()) {
    throw InvalidArgument("unknown integrator '" + integrator + "'");
  }
  if (input.empty()) {
    scenario_kind_from_string(scenario);
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw InvalidArgument("--tau must lie in (0, 1)");
  }
  if (n_tau < 1) {
    throw InvalidArgument("--n-tau must be at least 1");
  }
  if (h0 && !(*h0 > 0.0)) {
    throw InvalidArgument("--h0 must be positive");
  }
  if (!(c >= 1.0)) {
    throw InvalidArgument("--c must be at least 1");
  }
  if (m < 1) {
    throw InvalidArgument("--m must be at least 1");
  }
  if (horizon && !(*horizon > 0.0)) {
    throw InvalidArgument("--T must be positive");
  }
  if (rho && !(*rho > 0.0)) {
    throw InvalidArgument("--rho must be positive");
  }
  if (window && (*window < 1 || *window % 2 == 0)) {
    throw InvalidArgument("--window must be a positive odd integer");
  }
  if (out.empty()) {
    throw InvalidArgument("--out must not be empty");
  }
}

ScenarioData load_scenario(const RunConfig &config) {
  ScenarioData data;
  std::optional<Index> k;
  std::optional<RowMatrix> prototypes;
  if (all_digits(config.labels)) {
    k = parse_number<Index>(config.labels, "--labels");
    if (*k < 1) {
      throw InvalidArgument("--labels: need at least one label");
    }
  } else if (!config.labels.empty()) {
    prototypes = read_csv_matrix(config.labels);
  }

  if (!config.input.empty()) {
    if (has_extension(config.input, ".ppm")) {
      Image img = read_ppm(config.input);
      if (!k && !prototypes) {
        k = 4;
      }
      data = gen_colorquant(img.rgb, img.width, img.height, k.value_or(1), config.seed);
    } else if (has_extension(config.input, ".csv")) {
      RowMatrix features = read_csv_matrix(config.input);
      if (!k && !prototypes) {
        throw InvalidArgument("CSV input needs --labels (a count or a prototype CSV)");
      }
      data.kind = ScenarioKind::signal1d;
      data.width = features.rows();
      data.height = 1;
      data.rho = 0.1;
      data.window = 3;
      data.labels.prototypes = k ? kmeans(features, *k, config.seed) : RowMatrix();
      data.features = std::move(features);
    } else {
      throw InvalidArgument("unsupported input '" + config.input + "' (expected .ppm or .csv)");
    }
  } else {
    switch (scenario_kind_from_string(config.scenario)) {
    case ScenarioKind::signal1d:
      data = gen_signal1d(config.seed);
      break;
    case ScenarioKind::vertex31:
      data = gen_vertex31(config.seed);
      break;
    case ScenarioKind::colorquant:
      data = gen_colorquant(synthetic_color_image(kColorImageSize, kColorImageSize),
                            kColorImageSize, kColorImageSize, k.value_or(4), config.seed);
      break;
    }
    if (k && data.kind != ScenarioKind::colorquant) {
      throw InvalidArgument("--labels <count> applies to colorquant and to file input only");
    }
  }
  if (prototypes) {
    if (prototypes->cols() != data.features.cols()) {
      throw InvalidArgument("--labels: prototype dimension does not match the features");
    }
    data.labels.prototypes = std::move(*prototypes);
  }
  if (config.rho) {
    data.rho = *config.rho;
  }
  if (config.window) {
    data.window = *config.window;
  }
  return data;
}

// -- file formats --------------------------------------------------------------

Image read_ppm(const fs::path &path) {
  std::ifstream in = open_input(path, std::ios::binary);
  auto token = [&]() {
    std::string t;
    char ch = 0;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string comment;
        std::getline(in, comment);
      } else if (!std::isspace(static_cast<unsigned char>(ch))) {
        t.push_back(ch);
        break;
      }
    }
    while (in.get(ch) && !std::isspace(static_cast<unsigned char>(ch))) {
      t.push_back(ch);
    }
    return t;
  };
  const std::string magic = token();
  if (magic != "P6" && magic != "P3") {
    throw InvalidArgument("'" + path.string() + "' is not a P3/P6 pixmap");
  }
  Image img;
  img.width = parse_number<Index>(token(), path);
  img.height = parse_number<Index>(token(), path);
  const int maxval = parse_number<int>(token(), path);
  if (img.width < 1 || img.height < 1 || maxval < 1 || maxval > 255) {
    throw InvalidArgument("'" + path.string() + "': unsupported pixmap header");
  }
  const Index n = img.width * img.height;
  img.rgb.resize(n, 3);
  if (magic == "P6") {
    std::vector<unsigned char> bytes(static_cast<std::size_t>(3 * n));
    if (!in.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
      throw InvalidArgument("'" + path.string() + "': truncated pixel data");
    }
    for (Index i = 0; i < 3 * n; ++i) {
      img.rgb.data()[i] = bytes[static_cast<std::size_t>(i)] / static_cast<double>(maxval);
    }
  } else {
    for (Index i = 0; i < 3 * n; ++i) {
      const std::string t = token();
      if (t.empty()) {
        throw InvalidArgument("'" + path.string() + "': truncated pixel data");
      }
      img.rgb.data()[i] = parse_number<int>(t, path) / static_cast<double>(maxval);
    }
  }
  return img;
}

void write_ppm(const fs::path &path, Index width, Index height,
               const std::vector<std::uint8_t> &rgb) {
  if (static_cast<Index>(rgb.size()) != 3 * width * height) {
    throw InvalidArgument("write_ppm: pixel buffer size mismatch");
  }
  std::ofstream out = open_output(path);
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char *>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

std::vector<std::uint8_t> label_palette(Index labels) {
  std::mt19937_64 rng(0xC0105EEDULL);
  std::vector<std::uint8_t> palette;
  palette.reserve(static_cast<std::size_t>(3 * labels));
  for (Index j = 0; j < 3 * labels; ++j) {
    palette.push_back(static_cast<std::uint8_t>(rng() >> 56));
  }
  return palette;
}

RowMatrix read_csv_matrix(const fs::path &path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::vector<double> row;
    for (const auto &cell : split_csv_line(line)) {
      row.push_back(parse_number<double>(cell, path));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidArgument("'" + path.string() + "': ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw InvalidArgument("'" + path.string() + "': no data");
  }
  RowMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

LabelGrid read_label_csv(const fs::path &path) {
  std::ifstream in = open_input(path);
  LabelGrid grid;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto cells = split_csv_line(line);
    if (grid.height > 0 && static_cast<Index>(cells.size()) != grid.width) {
      throw InvalidArgument("'" + path.string() + "': ragged rows");
    }
    grid.width = static_cast<Index>(cells.size());
    for (const auto &cell : cells) {
      grid.labels.push_back(parse_number<int>(cell, path));
    }
    ++grid.height;
  }
  if (grid.labels.empty()) {
    throw InvalidArgument("'" + path.string() + "': no labels");
  }
  return grid;
}

void write_label_csv(const fs::path &path, const LabelGrid &grid) {
  std::ofstream out = open_output(path);
  for (Index y = 0; y < grid.height; ++y) {
    for (Index x = 0; x < grid.width; ++x) {
      out << (x ? "," : "") << grid.labels[static_cast<std::size_t>(y * grid.width + x)];
    }
    out << '\n';
  }
}

// -- commands ------------------------------------------------------------------

namespace {

struct Integration {
  FlowTrace trace;
  std::optional<double> horizon;
  std::optional<Index> krylov_dim;
};

Integration integrate(const RunConfig &cfg, const LabelingGraph &g, const StateObserver &observer) {
  const AssignmentState init = AssignmentState::barycenter(g.nodes(), g.labels());
  const double h = cfg.h0.value_or(default_step(cfg.integrator));
  Integration out;
  if (cfg.integrator == "rkmk12" || cfg.integrator == "rkmk32") {
    StepControl control;
    control.tau = cfg.tau;
    control.n_tau = cfg.n_tau;
    control.h0 = h;
    out.trace = integrate_adaptive(tableau(cfg.integrator), init, g, control, {}, observer);
  } else if (!is_linear_integrator(cfg.integrator)) {
    out.trace = integrate_fixed(tableau(cfg.integrator), init, g, h, {}, observer);
  } else if (cfg.integrator == "linear-be") {
    LinearImplicitOptions options;
    options.h = h;
    out.trace = integrate_linear_relinearized(init, g, cfg.c, options, observer);
  } else {
    const LinearFlowOperator op = LinearFlowOperator::build(init, g);
    if (cfg.integrator == "expint") {
      const double horizon = cfg.horizon ? *cfg.horizon : exponential_horizon(op, cfg.m);
      if (observer) {
        observer(0.0, init);
      }
      ExponentialResult res = exponential_integrator(op, horizon, cfg.m);
      const double entropy = entropy_avg(res.state);
      if (observer) {
        observer(horizon, res.state);
      }
      out.trace.steps.push_back({0, horizon, horizon, entropy, std::nullopt});
      out.trace.converged = entropy < Termination{}.entropy_threshold;
      out.trace.final_time = horizon;
      out.trace.final_state = std::move(res.state);
      out.trace.final_tangent = std::move(res.v);
      out.trace.linearizations = 1;
      out.horizon = horizon;
      out.krylov_dim = res.krylov_dim;
    } else {
      const int q = cfg.integrator == "linear-rk1" ? 1 : 4;
      out.trace = integrate_linear_adaptive(op, q, cfg.tau, {}, observer);
    }
  }
  return out;
}

nlohmann::ordered_json agreement_json(const Agreement &a) {
  return {{"differing", a.differing}, {"fraction", a.fraction}};
}

} // namespace

RunSummary run(const RunConfig &config, std::ostream &log) {
  config.validate();
  const ScenarioData data = load_scenario(config);
  const LabelingGraph g = make_graph(data);
  const fs::path dir(config.out);
  fs::create_directories(dir);

  const bool trajectory = data.height == 1 && g.labels() == 3;
  std::ostringstream traj;
  StateObserver observer;
  if (trajectory) {
    traj << "t,node,w1,w2,w3\n";
    observer = [&](double t, const AssignmentState &w) {
      for (Index i = 0; i < w.nodes(); ++i) {
        traj << format_double(t) << ',' << i;
        for (Index j = 0; j < 3; ++j) {
          traj << ',' << format_double(w.row(i)(j));
        }
        traj << '\n';
      }
    };
  }

  const auto start = std::chrono::steady_clock::now();
  Integration result = integrate(config, g, observer);
  RunSummary summary;
  summary.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary.iterations = result.trace.iterations();
  summary.converged = result.trace.converged;
  summary.final_time = result.trace.final_time;
  summary.directory = dir;
  const LabelingResult labeling = labeling_of(result.trace.final_state);

  std::optional<std::string> oracle_name;
  if (config.oracle == "auto") {
    const bool linear = is_linear_integrator(config.integrator);
    oracle_name = linear ? "ground-truth-linear" : "ground-truth-nonlinear";
    const LabelingResult oracle = linear ? ground_truth_linear(data) : ground_truth_nonlinear(data);
    summary.oracle_agreement = label_agreement(labeling, oracle);
  } else if (config.oracle != "none") {
    oracle_name = config.oracle;
    const LabelGrid oracle = read_label_csv(config.oracle);
    if (oracle.width * oracle.height != data.nodes()) {
      throw InvalidArgument("--oracle: label map size does not match the problem");
    }
    summary.oracle_agreement = label_agreement(labeling.labels, oracle.labels);
  }
  if (!data.truth.empty()) {
    summary.truth_agreement = label_agreement(labeling.labels, data.truth);
  }

  // Artifacts.
  LabelGrid grid{data.width, data.height, labeling.labels};
  write_label_csv(dir / "labels.csv", grid);
  const auto palette = label_palette(g.labels());
  std::vector<std::uint8_t> pixels;
  pixels.reserve(static_cast<std::size_t>(3 * data.nodes()));
  for (int label : labeling.labels) {
    for (int ch = 0; ch < 3; ++ch) {
      pixels.push_back(palette[static_cast<std::size_t>(3 * label + ch)]);
    }
  }
  write_ppm(dir / "labels.ppm", data.width, data.height, pixels);
  {
    std::ofstream out = open_output(dir / "trace.csv");
    out << "k,t,h,entropy,error_estimate\n";
    for (const auto &s : result.trace.steps) {
      out << s.k << ',' << format_double(s.t) << ',' << format_double(s.h) << ','
          << format_double(s.entropy) << ','
          << (s.error_estimate ? format_double(*s.error_estimate) : std::string()) << '\n';
    }
  }
  if (trajectory) {
    std::ofstream out = open_output(dir / "trajectory.csv");
    out << traj.str();
  }

  nlohmann::ordered_json j;
  j["scenario"] = config.input.empty() ? config.scenario : config.input;
  j["integrator"] = config.integrator;
  j["nodes"] = data.nodes();
  j["labels"] = g.labels();
  j["width"] = data.width;
  j["height"] = data.height;
  j["rho"] = data.rho;
  j["window"] = data.window;
  j["seed"] = config.seed;
  j["iterations"] = summary.iterations;
  j["converged"] = summary.converged;
  j["final_time"] = summary.final_time;
  j["final_entropy"] = entropy_avg(result.trace.final_state);
  j["rejected_steps"] = result.trace.rejected_steps;
  j["rhs_evaluations"] = result.trace.rhs_evaluations;
  j["inner_iterations"] = result.trace.inner_iterations;
  j["linearizations"] = result.trace.linearizations;
  if (result.horizon) {
    j["T"] = *result.horizon;
    j["m"] = config.m;
    j["krylov_dim"] = *result.krylov_dim;
  }
  if (summary.oracle_agreement) {
    j["oracle"] = *oracle_name;
    j["oracle_agreement"] = agreement_json(*summary.oracle_agreement);
  }
  if (summary.truth_agreement) {
    j["truth_agreement"] = agreement_json(*summary.truth_agreement);
  }
  j["wall_time"] = summary.wall_time;
  j["threads"] = thread_limit();
  {
    std::ofstream out = open_output(dir / "summary.json");
    out << j.dump(2) << '\n';
  }

  log << config.integrator << ": " << summary.iterations << " steps, t = "
      << format_double(summary.final_time) << (summary.converged ? "" : " (not converged)")
      << ", " << format_double(summary.wall_time) << " s\n";
  if (summary.oracle_agreement) {
    log << "oracle " << *oracle_name << ": " << summary.oracle_agreement->differing
        << " differing (" << format_double(summary.oracle_agreement->fraction) << ")\n";
  }
  return summary;
}

CompareReport compare(const fs::path &a, const fs::path &b, const std::optional<fs::path> &mask) {
  const LabelGrid x = read_label_csv(a);
  const LabelGrid y = read_label_csv(b);
  if (x.width != y.width || x.height != y.height) {
    throw InvalidArgument("compare: label maps have different shapes");
  }
  CompareReport report{label_agreement(x.labels, y.labels), x.width, x.height};
  if (mask) {
    std::vector<std::uint8_t> pixels;
    pixels.reserve(3 * x.labels.size());
    for (std::size_t i = 0; i < x.labels.size(); ++i) {
      const std::uint8_t v = x.labels[i] != y.labels[i] ? 255 : 0;
      pixels.insert(pixels.end(), {v, v, v});
    }
    write_ppm(*mask, x.width, x.height, pixels);
  }
  return report;
}

} // namespace assignflow
