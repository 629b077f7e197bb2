#include "vgne/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "vgne/admm.hpp"
#include "vgne/bench_games.hpp"
#include "vgne/diagnostics.hpp"
#include "vgne/errors.hpp"
#include "vgne/game_io.hpp"
#include "vgne/pppa.hpp"

namespace vgne {

namespace {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;
using nlohmann::json;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"game", {"builtin", "seed", "file"}},
      {"graph", {"builtin", "edges"}},
      {"algorithm", {"name"}},
      {"params",
       {"r", "h", "w", "r_range", "h_range", "w_range", "rho", "mu", "mu0", "seed",
        "sufficient_conditions"}},
      {"inner", {"mode", "method", "gamma", "lipschitz", "max_iterations"}},
      {"stop", {"max_iter", "tol"}},
      {"output", {"dir", "trace_stride"}},
      {"init", {"seed"}},
  };
  return keys;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ValidationError(key + ": expected a finite number, got '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ValidationError(key + ": expected a nonnegative integer, got '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ValidationError(key + ": empty list");
  return out;
}

Range parse_range(const std::string& key, const std::string& text) {
  auto v = parse_list(key, text);
  if (v.size() != 2 || !(v[0] > 0.0) || !(v[1] >= v[0]))
    throw ValidationError(key + ": expected 'lo, hi' with 0 < lo <= hi");
  return {v[0], v[1]};
}

std::vector<Edge> parse_edges(const std::string& text) {
  std::vector<Edge> edges;
  for (const auto& item : split(text, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos)
      throw ValidationError("graph.edges: expected 'i-j' pairs, got '" + item + "'");
    const auto a = parse_uint("graph.edges", trim(item.substr(0, dash)));
    const auto b = parse_uint("graph.edges", trim(item.substr(dash + 1)));
    if (a == 0 || b == 0) throw ValidationError("graph.edges: node indices are 1-based");
    edges.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1)});
  }
  if (edges.empty()) throw ValidationError("graph.edges: empty edge list");
  return edges;
}

// Scalar or one value per block.
std::vector<Matrix> blocks_from_values(const std::string& key, const std::vector<double>& v,
                                       const std::vector<std::size_t>& dims) {
  if (v.size() != 1 && v.size() != dims.size())
    throw ValidationError("params." + key + ": expected 1 or " + std::to_string(dims.size()) +
                          " values, got " + std::to_string(v.size()));
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const double s = v.size() == 1 ? v[0] : v[i];
    const auto d = static_cast<Eigen::Index>(dims[i]);
    out.push_back(s * Matrix::Identity(d, d));
  }
  return out;
}

json matrix_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

// Diagonal blocks are written as {"diag": [...]}.
json blocks_json(const std::vector<Matrix>& blocks) {
  json out = json::array();
  for (const auto& B : blocks) {
    const Vector d = B.diagonal();
    if (B.isApprox(Matrix(d.asDiagonal()), 0.0)) {
      out.push_back({{"diag", std::vector<double>(d.data(), d.data() + d.size())}});
    } else {
      out.push_back(matrix_json(B));
    }
  }
  return out;
}

json kkt_json(const KktReport& r) {
  return {{"stationarity", r.stationarity},
          {"stationarity_per_player", r.stationarity_per_player},
          {"feasibility", r.feasibility},
          {"consensus", r.consensus},
          {"complementarity", r.complementarity},
          {"is_variational", r.is_variational}};
}

json residual_json(const OperatorResidual& r) {
  return {{"stationarity", r.stationarity},
          {"edge", r.edge},
          {"feasibility", r.feasibility},
          {"complementarity", r.complementarity}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write to " + path.string() + " failed");
}

bool is_equality_algorithm(const std::string& algorithm) { return algorithm == "admm"; }

StepSizeReport step_report(const Experiment& e, const std::string& algorithm) {
  return is_equality_algorithm(algorithm) ? check_step_sizes_equality(e.params, e.game, e.graph)
                                          : check_step_sizes_inequality(e.params, e.game, e.graph);
}

fs::path output_directory(const ExperimentConfig& config) {
  if (const char* env = std::getenv("VGNE_OUTPUT_DIR"); env != nullptr && *env != '\0')
    return fs::path(env);
  return config.output_dir;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const DivergenceError& e) {
    err << "error: divergence: " << e.what() << " (last finite iteration "
        << e.last_finite_iteration() << ")\n";
    return kExitDivergence;
  } catch (const InexactnessError& e) {
    err << "error: inner solve failed: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const NumericError& e) {
    err << "error: numeric failure: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: validation failed: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {"k",           "step_norm",        "consensus_error",
                                                "feasibility", "stationarity",     "complementarity",
                                                "inner_iterations", "mu_k"};
  return cols;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_trace_csv(const std::vector<TraceRow>& rows, const fs::path& path) {
  std::string text;
  const auto& cols = trace_columns();
  for (std::size_t j = 0; j < cols.size(); ++j) text += (j ? "," : "") + cols[j];
  text += '\n';
  for (const auto& r : rows) {
    text += std::to_string(r.k) + ',' + format_double(r.step_norm) + ',' +
            format_double(r.consensus_error) + ',' + format_double(r.feasibility) + ',' +
            format_double(r.stationarity) + ',' + format_double(r.complementarity) + ',' +
            std::to_string(r.inner_iterations) + ',' + format_double(r.mu_k) + '\n';
  }
  write_text(path, text);
}

ExperimentConfig parse_config_text(const std::string& text, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }

  for (const auto& [section, body] : tree) {
    const auto it = allowed_keys().find(section);
    if (it == allowed_keys().end()) {
      if (body.empty()) throw ValidationError("config: key '" + section + "' outside a section");
      throw ValidationError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key))
        throw ValidationError("config: unknown key " + section + "." + key);
    }
  }

  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) {
      auto s = trim(*v);
      if (!s.empty()) return s;
    }
    return std::nullopt;
  };

  ExperimentConfig c;
  if (auto v = get("game.builtin")) c.game_builtin = *v;
  if (auto v = get("game.seed")) c.game_seed = parse_uint("game.seed", *v);
  if (auto v = get("game.file")) {
    fs::path p(*v);
    c.game_file = p.is_absolute() ? p : base_dir / p;
  }
  if (c.game_builtin.empty() == c.game_file.empty())
    throw ValidationError("config: set exactly one of game.builtin and game.file");

  if (auto v = get("graph.builtin")) c.graph_builtin = *v;
  if (auto v = get("graph.edges")) {
    c.edges = parse_edges(*v);
    c.graph_builtin.clear();
  }
  if (!c.graph_builtin.empty() && c.graph_builtin != "path" && c.graph_builtin != "ring" &&
      c.graph_builtin != "benchmark")
    throw ValidationError("graph.builtin: expected path, ring or benchmark, got '" +
                          c.graph_builtin + "'");

  if (auto v = get("algorithm.name")) c.algorithm = *v;
  if (c.algorithm != "admm" && c.algorithm != "splitting")
    throw ValidationError("algorithm.name: expected admm or splitting, got '" + c.algorithm + "'");

  auto scalar_or_range = [&](const std::string& name, std::vector<double>& values,
                             std::optional<Range>& range) {
    if (auto v = get("params." + name + "_range"))
      range = parse_range("params." + name + "_range", *v);
    if (auto v = get("params." + name)) {
      if (range)
        throw ValidationError("params." + name + " and params." + name + "_range are exclusive");
      values = parse_list("params." + name, *v);
    }
  };
  scalar_or_range("r", c.r, c.r_range);
  scalar_or_range("h", c.h, c.h_range);
  scalar_or_range("w", c.w, c.w_range);

  if (auto v = get("params.rho")) c.rho = parse_double("params.rho", *v);
  std::string mu = get("params.mu").value_or("zero");
  double mu0 = 1.0;
  if (auto v = get("params.mu0")) mu0 = parse_double("params.mu0", *v);
  if (mu == "zero") {
    c.mu = MuSchedule::zero();
  } else if (mu == "inverse_square") {
    c.mu = MuSchedule::inverse_square(mu0);
  } else {
    throw ValidationError("params.mu: expected zero or inverse_square, got '" + mu + "'");
  }
  if (auto v = get("params.seed")) c.params_seed = parse_uint("params.seed", *v);
  const std::string policy = get("params.sufficient_conditions").value_or("enforce");
  if (policy == "enforce") {
    c.policy = ValidationPolicy::Enforce;
  } else if (policy == "warn") {
    c.policy = ValidationPolicy::Warn;
  } else {
    throw ValidationError("params.sufficient_conditions: expected enforce or warn, got '" +
                          policy + "'");
  }

  const std::string mode = get("inner.mode").value_or("oracle");
  if (mode == "oracle") {
    c.inner.mode = CertificateMode::Oracle;
  } else if (mode == "residual") {
    c.inner.mode = CertificateMode::Residual;
  } else {
    throw ValidationError("inner.mode: expected oracle or residual, got '" + mode + "'");
  }
  const std::string method = get("inner.method").value_or("gradient");
  if (method == "gradient") {
    c.inner.method = InnerMethod::Gradient;
  } else if (method == "best_response") {
    c.inner.method = InnerMethod::BestResponse;
  } else {
    throw ValidationError("inner.method: expected gradient or best_response, got '" + method +
                          "'");
  }
  if (auto v = get("inner.gamma")) c.inner.gamma = parse_double("inner.gamma", *v);
  if (auto v = get("inner.lipschitz")) c.inner.lipschitz = parse_double("inner.lipschitz", *v);
  if (auto v = get("inner.max_iterations"))
    c.inner.max_iterations = parse_uint("inner.max_iterations", *v);
  if (c.inner.gamma && !(*c.inner.gamma > 0.0)) throw ValidationError("inner.gamma must be > 0");
  if (c.inner.lipschitz && !(*c.inner.lipschitz >= 0.0))
    throw ValidationError("inner.lipschitz must be >= 0");
  if (c.inner.max_iterations == 0) throw ValidationError("inner.max_iterations must be >= 1");

  if (auto v = get("stop.max_iter")) c.stop.max_iter = parse_uint("stop.max_iter", *v);
  if (auto v = get("stop.tol")) c.stop.tol = parse_double("stop.tol", *v);
  if (!(c.stop.tol > 0.0)) throw ValidationError("stop.tol must be > 0");

  if (auto v = get("output.dir")) c.output_dir = *v;
  if (auto v = get("output.trace_stride")) c.trace_stride = parse_uint("output.trace_stride", *v);
  if (c.trace_stride == 0) throw ValidationError("output.trace_stride must be >= 1");

  if (auto v = get("init.seed")) c.init_seed = parse_uint("init.seed", *v);

  return c;
}

ExperimentConfig parse_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.parent_path().empty() ? fs::path(".")
                                                                  : path.parent_path());
}

Experiment build_experiment(const ExperimentConfig& c) {
  GameInstance game = c.game_file.empty() ? generate_builtin(c.game_builtin, c.game_seed)
                                          : load_game(c.game_file);

  const bool wants_equality = is_equality_algorithm(c.algorithm);
  if ((game.kind() == CouplingKind::Equality) != wants_equality)
    throw ValidationError("algorithm " + c.algorithm + " does not match a game with " +
                          std::string(to_string(game.kind())) + " coupling (use " +
                          (game.kind() == CouplingKind::Equality ? "admm" : "splitting") + ")");

  const std::size_t N = game.num_players();
  CommGraph graph = !c.edges.empty()         ? build_incidence(N, c.edges)
                    : c.graph_builtin == "ring" ? ring_graph(N)
                                                : path_graph(N);
  if (graph.num_nodes() != N)
    throw StructuralError("graph has " + std::to_string(graph.num_nodes()) + " nodes but the game has " +
                          std::to_string(N) + " players");

  const bool any_range = c.r_range || c.h_range || c.w_range;
  AlgoParams params;
  if (any_range) {
    if (!(c.r_range && c.h_range && c.w_range))
      throw ValidationError("params: random step sizes need all of r_range, h_range, w_range");
    params = random_diagonal_params(game, graph, c.params_seed, *c.r_range, *c.h_range,
                                    *c.w_range, c.rho, c.mu);
  } else {
    std::vector<std::size_t> player_dims, coupling_dims(N, game.coupling_dim()),
        edge_dims(graph.num_edges(), game.coupling_dim());
    for (std::size_t i = 0; i < N; ++i) player_dims.push_back(game.dim(i));
    auto values = [](const char* name, const std::vector<double>& v) {
      if (v.empty()) throw ValidationError(std::string("params.") + name + " is required");
      return v;
    };
    params.R = blocks_from_values("r", values("r", c.r), player_dims);
    params.H = blocks_from_values("h", values("h", c.h), coupling_dims);
    params.W = blocks_from_values("w", values("w", c.w), edge_dims);
    params.rho = c.rho;
    params.mu = c.mu;
  }
  validate_params(params, game, graph);
  return {std::move(game), std::move(graph), std::move(params)};
}

int validate_experiment(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto config = parse_config(config_path);
    const auto e = build_experiment(config);
    const auto report = step_report(e, config.algorithm);
    out << "game: " << e.game.name() << " (" << to_string(e.game.kind()) << ", "
        << e.game.num_players() << " players)\n"
        << "graph: " << e.graph.num_nodes() << " nodes, " << e.graph.num_edges() << " edges\n"
        << "margins: " << format_double(report.margin_first) << ", "
        << format_double(report.margin_second) << "\n";
    if (report.ok) {
      out << "ok\n";
      return static_cast<int>(kExitOk);
    }
    if (!is_equality_algorithm(config.algorithm) && config.policy == ValidationPolicy::Warn) {
      out << "warning: " << report.message << "\n";
      return static_cast<int>(kExitOk);
    }
    err << "error: validation failed: " << report.message << "\n";
    return static_cast<int>(kExitValidation);
  });
}

int run_experiment(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto config = parse_config(config_path);
    const auto e = build_experiment(config);
    const auto report = step_report(e, config.algorithm);
    const bool equality = is_equality_algorithm(config.algorithm);
    if (!report.ok && (equality || config.policy == ValidationPolicy::Enforce))
      throw ValidationError(report.message);

    const auto dir = output_directory(config);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    const auto inner = resolve_inner_settings(config.inner, e.game);
    RunOptions options;
    options.stop = config.stop;
    options.trace_stride = config.trace_stride;
    auto start = initial_state(e.game, e.graph, config.init_seed);

    const auto t0 = std::chrono::steady_clock::now();
    RunResult result =
        equality ? run_admm(e.game, e.graph, e.params, inner, options, std::move(start))
                 : run_splitting(e.game, e.graph, e.params, inner, options, std::move(start),
                                 config.policy);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const double kkt_tol = 10.0 * config.stop.tol;
    const auto kkt = kkt_residual_local(e.game, result.state.x, result.state.lambda_bar, kkt_tol);

    json edges = json::array();
    for (const auto& edge : e.graph.edges()) edges.push_back({edge.source + 1, edge.target + 1});

    json game_echo = {{"name", e.game.name()},
                      {"kind", to_string(e.game.kind())},
                      {"players", e.game.num_players()},
                      {"total_dim", e.game.total_dim()},
                      {"coupling_dim", e.game.coupling_dim()}};
    if (config.game_file.empty()) {
      game_echo["builtin"] = config.game_builtin;
      game_echo["seed"] = config.game_seed;
    } else {
      game_echo["file"] = config.game_file.string();
    }

    json summary = {
        {"status", result.converged ? "converged" : "max_iter"},
        {"converged", result.converged},
        {"iterations", result.iterations},
        {"inner_iterations", result.inner_iterations},
        {"wall_time_s", wall},
        {"is_variational", kkt.is_variational},
        {"kkt_tolerance", kkt_tol},
        {"kkt", kkt_json(kkt)},
        {"final_residual", residual_json(result.final_residual)},
        {"mean_multiplier",
         std::vector<double>(
             [&] {
               Vector lam = mean_multiplier(result.state.lambda_bar, e.game.coupling_dim());
               return std::vector<double>(lam.data(), lam.data() + lam.size());
             }())},
        {"x", std::vector<double>(result.state.x.data(),
                                  result.state.x.data() + result.state.x.size())},
        {"validator",
         {{"ok", report.ok},
          {"margin_first", report.margin_first},
          {"margin_second", report.margin_second},
          {"message", report.message},
          {"policy", config.policy == ValidationPolicy::Warn ? "warn" : "enforce"}}},
        {"config",
         {{"algorithm", config.algorithm},
          {"game", game_echo},
          {"graph", {{"nodes", e.graph.num_nodes()}, {"edges", edges}}},
          {"params",
           {{"R", blocks_json(e.params.R)},
            {"H", blocks_json(e.params.H)},
            {"W", blocks_json(e.params.W)},
            {"rho", e.params.rho},
            {"mu", e.params.mu.kind == MuSchedule::Kind::Zero ? "zero" : "inverse_square"},
            {"mu0", e.params.mu.mu0},
            {"seed", config.params_seed}}},
          {"inner",
           {{"mode", to_string(inner.mode)},
            {"method", to_string(inner.method)},
            {"gamma", inner.gamma ? json(*inner.gamma) : json(nullptr)},
            {"lipschitz", inner.lipschitz ? json(*inner.lipschitz) : json(nullptr)},
            {"max_iterations", inner.max_iterations}}},
          {"stop", {{"max_iter", config.stop.max_iter}, {"tol", config.stop.tol}}},
          {"trace_stride", config.trace_stride},
          {"init_seed", config.init_seed},
          {"output_dir", dir.string()}}}};

    write_trace_csv(result.trace, dir / "trace.csv");
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    save_game(e.game, dir / "instance.json");

    out << (result.converged ? "converged" : "stopped at max_iter") << " after "
        << result.iterations << " iterations (" << format_double(wall) << " s)\n"
        << "kkt: stationarity " << format_double(kkt.stationarity) << ", feasibility "
        << format_double(kkt.feasibility) << ", consensus " << format_double(kkt.consensus)
        << ", complementarity " << format_double(kkt.complementarity) << "\n"
        << "outputs in " << dir.string() << "\n";
    return static_cast<int>(kExitOk);
  });
}

int extract_quantity(const fs::path& trace_path, const std::string& quantity, std::ostream& out,
                     std::ostream& err) {
  return guarded(err, [&] {
    const auto& cols = trace_columns();
    const auto col = std::find(cols.begin(), cols.end(), quantity);
    if (col == cols.end() || quantity == "k") {
      std::string names;
      for (std::size_t j = 1; j < cols.size(); ++j) names += (j > 1 ? ", " : "") + cols[j];
      throw ValidationError("unknown quantity '" + quantity + "' (expected one of " + names + ")");
    }
    const auto index = static_cast<std::size_t>(col - cols.begin());

    std::ifstream in(trace_path, std::ios::binary);
    if (!in) throw IoError("cannot read trace " + trace_path.string());
    std::string line;
    if (!std::getline(in, line)) return static_cast<int>(kExitOk);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::string field;
      std::istringstream row(line);
      while (std::getline(row, field, ',')) fields.push_back(field);
      if (fields.size() != cols.size())
        throw IoError(trace_path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(cols.size()) + " columns");
      out << fields[0] << ',' << fields[index] << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

}  // namespace vgne
