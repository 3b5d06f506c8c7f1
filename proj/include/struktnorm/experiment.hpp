#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "struktnorm/io.hpp"
#include "struktnorm/solver.hpp"

namespace struktnorm {

// Regularizer specs -------------------------------------------------------------

/// {"kind": "l1" | "ridge" | "elastic_net" | "overlap_group" | "omega", ...}
inline RegularizerPtr regularizer_from_json(const json& j, int d) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "l1") return std::make_shared<L1Regularizer>(d);
  if (kind == "ridge") return std::make_shared<RidgeRegularizer>(d);
  if (kind == "elastic_net") return std::make_shared<ElasticNetRegularizer>(d, j.value("alpha", 0.5));
  if (kind == "overlap_group") {
    GroupSystem gs;
    gs.d = d;
    for (const auto& g : j.at("groups")) {
      std::vector<int> idx;
      for (int i : g.get<std::vector<int>>()) idx.push_back(i - 1);
      gs.groups.push_back(idx);
    }
    if (j.contains("weights")) gs.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    return std::make_shared<OverlapGroupRegularizer>(std::move(gs), "overlap_group");
  }
  if (kind == "omega") {
    const json& pj = j.at("p");
    const double p = pj.is_string() ? parse_p(pj.get<std::string>()) : pj.get<double>();
    conjugate_exponent(p);
    const auto pf = parse_function(j.at("function"));
    if (pf.d != d) throw InvalidArgument("regularizer dimension differs from the design");
    if (pf.range && (!pf.fn || d > 20)) return structured_regularizer(*pf.range, p, "omega");
    return structured_regularizer(*pf.fn, p, "omega");
  }
  throw InvalidArgument("unknown regularizer kind '" + kind + "'");
}

// Experiment configuration ---------------------------------------------------------

struct ExperimentConfig {
  bool grid2d = false;
  int d = 256, d1 = 16, d2 = 16;
  int k = 160, k1 = 0, k2 = 0;
  std::string signal = "constant";  ///< constant | modulated | gaussian
  bool sine = false;                ///< |sin(x) sin(5x)| instead of the cosine form
  bool anchored = false;            ///< support at the first valid position
  double sigma = 0.5;
  std::vector<int> n_grid{64, 128, 192, 256, 384, 512};
  int trials = 20;
  std::uint64_t seed = 0;
  std::vector<std::string> panel{"l1", "ridge", "elastic_net", "gl", "gl_w", "omega2", "omegainf"};
  int lambda_points = 50;
  double lambda_decades = 3.0;
  double tol = 1e-8;
  int max_iter = 50000;
  bool timing = false;  ///< write wall time to the CSV (breaks byte-identical reruns)

  void validate() const {
    if (grid2d) {
      if (d1 < 1 || d2 < 1) throw InvalidArgument("grid dimensions must be positive");
      if (k1 < 1 || k2 < 1 || k1 > d1 || k2 > d2) throw InvalidArgument("rectangle does not fit the grid");
    } else {
      if (d < 1) throw InvalidArgument("d must be positive");
      if (k < 1 || k > d) throw InvalidArgument("support size must satisfy 1 <= k <= d");
    }
    if (signal != "constant" && signal != "modulated" && signal != "gaussian")
      throw InvalidArgument("signal must be constant, modulated or gaussian");
    if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
    if (n_grid.empty()) throw InvalidArgument("n grid is empty");
    for (int n : n_grid)
      if (n < 1) throw InvalidArgument("sample sizes must be positive");
    if (trials < 1) throw InvalidArgument("trials must be >= 1");
    if (panel.empty()) throw InvalidArgument("regularizer panel is empty");
    for (const auto& r : panel)
      if (r != "l1" && r != "ridge" && r != "elastic_net" && r != "gl" && r != "gl_w" && r != "omega2" &&
          r != "omegainf")
        throw InvalidArgument("unknown regularizer '" + r + "' in panel");
    if (lambda_points < 1 || !(lambda_decades > 0.0)) throw InvalidArgument("bad lambda grid spec");
  }
  int dim() const { return grid2d ? d1 * d2 : d; }
};

/// Most square k1 x k2 = k that fits the grid.
inline std::pair<int, int> rectangle_shape(int k, int d1, int d2) {
  int best1 = 0, best2 = 0;
  for (int a = 1; a <= d1; ++a) {
    if (k % a != 0 || k / a > d2) continue;
    if (best1 == 0 || std::abs(a - k / a) < std::abs(best1 - best2)) best1 = a, best2 = k / a;
  }
  if (best1 == 0) throw InvalidArgument("no rectangle of size " + std::to_string(k) + " fits the grid");
  return {best1, best2};
}

inline ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig c;
  const std::string geom = j.value("geometry", std::string("chain1d"));
  if (geom == "grid2d") {
    c.grid2d = true;
    c.d1 = j.value("d1", 16);
    c.d2 = j.value("d2", 16);
    c.d = c.d1 * c.d2;
    if (j.contains("k1") || j.contains("k2")) {
      c.k1 = j.at("k1").get<int>();
      c.k2 = j.at("k2").get<int>();
    } else {
      std::tie(c.k1, c.k2) = rectangle_shape(j.value("k", 160), c.d1, c.d2);
    }
    c.k = c.k1 * c.k2;
    c.sigma = 1.0;
  } else if (geom == "chain1d") {
    c.d = j.value("d", 256);
    c.k = j.value("k", 160);
  } else {
    throw InvalidArgument("geometry must be chain1d or grid2d");
  }
  c.signal = j.value("signal", c.signal);
  c.sine = j.value("sine", c.sine);
  c.anchored = j.value("anchored", c.anchored);
  c.sigma = j.value("sigma", c.sigma);
  if (j.contains("n")) c.n_grid = j.at("n").get<std::vector<int>>();
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  if (j.contains("panel")) c.panel = j.at("panel").get<std::vector<std::string>>();
  c.lambda_points = j.value("lambda_points", c.lambda_points);
  c.lambda_decades = j.value("lambda_decades", c.lambda_decades);
  c.tol = j.value("tol", c.tol);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.timing = j.value("timing", c.timing);
  c.validate();
  return c;
}

// Data generation ------------------------------------------------------------

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<double> wstar;
};

inline std::mt19937_64 cell_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)};
  return std::mt19937_64(seq);
}

/// Signal values along a support of length k, with max |w| = 1.
inline std::vector<double> signal_values(const ExperimentConfig& cfg, int k, std::mt19937_64& rng) {
  std::vector<double> v(k, 1.0);
  if (cfg.signal == "modulated") {
    const double c = k > 1 ? std::numbers::pi / (k - 1) : 0.0;
    for (int i = 0; i < k; ++i) {
      const double x = c * i;
      v[i] = cfg.sine ? std::abs(std::sin(x) * std::sin(5 * x)) : std::abs(std::cos(x) * std::cos(5 * x));
    }
  } else if (cfg.signal == "gaussian") {
    std::normal_distribution<double> normal;
    for (double& x : v) x = normal(rng);
  }
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  if (mx > 0.0)
    for (double& x : v) x /= mx;
  return v;
}

/// Deterministic in (seed, n, trial); shared by every regularizer of the panel.
inline Dataset generate(const ExperimentConfig& cfg, int n, int trial) {
  cfg.validate();
  auto rng = cell_rng(cfg.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial));
  const int d = cfg.dim();
  Dataset ds;
  ds.wstar.assign(d, 0.0);
  std::vector<int> support;
  if (cfg.grid2d) {
    const int r0 = cfg.anchored ? 0 : std::uniform_int_distribution<int>(0, cfg.d1 - cfg.k1)(rng);
    const int c0 = cfg.anchored ? 0 : std::uniform_int_distribution<int>(0, cfg.d2 - cfg.k2)(rng);
    for (int r = r0; r < r0 + cfg.k1; ++r)
      for (int c = c0; c < c0 + cfg.k2; ++c) support.push_back(r * cfg.d2 + c);
  } else {
    const int s0 = cfg.anchored ? 0 : std::uniform_int_distribution<int>(0, cfg.d - cfg.k)(rng);
    for (int i = s0; i < s0 + cfg.k; ++i) support.push_back(i);
  }
  const auto vals = signal_values(cfg, static_cast<int>(support.size()), rng);
  for (std::size_t i = 0; i < support.size(); ++i) ds.wstar[support[i]] = vals[i];
  std::normal_distribution<double> normal;
  ds.X.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) ds.X(i, j) = normal(rng);
  ds.y = ds.X * detail::to_eigen(ds.wstar);
  for (int i = 0; i < n; ++i) ds.y[i] += cfg.sigma * normal(rng);
  return ds;
}

inline RegularizerPtr panel_regularizer(const ExperimentConfig& cfg, const std::string& name) {
  const int d = cfg.dim();
  if (name == "l1") return std::make_shared<L1Regularizer>(d);
  if (name == "ridge") return std::make_shared<RidgeRegularizer>(d);
  if (name == "elastic_net") return std::make_shared<ElasticNetRegularizer>(d, 0.5);
  if (name == "gl" || name == "gl_w") {
    const double beta = name == "gl" ? 0.0 : 0.5;
    auto gs = cfg.grid2d ? rectangle_group_system(cfg.d1, cfg.d2, beta) : interval_group_system(d, beta);
    return std::make_shared<OverlapGroupRegularizer>(std::move(gs), name);
  }
  const double p = name == "omega2" ? 2.0 : kInf;
  const auto f = cfg.grid2d ? RangeOracle::projected_range_2d(cfg.d1, cfg.d2) : RangeOracle::modified_range(d);
  return structured_regularizer(f, p, name);
}

// Runs ------------------------------------------------------------------------

struct TrialRecord {
  std::string regularizer;
  int n = 0;
  int trial = 0;
  double best_hamming = NAN;
  double best_l2 = NAN;
  double lambda_h = NAN;
  double lambda_l2 = NAN;
  double seconds = 0.0;
  std::string error;
};

/// Oracle selection along a warm-started path.
inline TrialRecord run_cell(const ExperimentConfig& cfg, const Regularizer& reg, const Dataset& ds, int n, int trial) {
  TrialRecord rec;
  rec.regularizer = reg.name();
  rec.n = n;
  rec.trial = trial;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto f = Quadratic::from(ds.X, ds.y);
    const auto grid = geometric_grid(reg.lambda_max(detail::to_std(f.b)), cfg.lambda_points, cfg.lambda_decades);
    SolveOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    const auto pts = path(f, reg, grid, ds.wstar, opts);
    rec.best_hamming = kInf;
    rec.best_l2 = kInf;
    for (const auto& pt : pts) {
      if (pt.hamming < rec.best_hamming) rec.best_hamming = pt.hamming, rec.lambda_h = pt.lambda;
      if (pt.l2_error < rec.best_l2) rec.best_l2 = pt.l2_error, rec.lambda_l2 = pt.lambda;
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.best_hamming = rec.best_l2 = rec.lambda_h = rec.lambda_l2 = NAN;
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

/// Rows ordered by panel, then n, then trial.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg,
                                               const std::function<void(const TrialRecord&)>& progress = nullptr) {
  cfg.validate();
  std::vector<RegularizerPtr> regs;
  for (const auto& name : cfg.panel) regs.push_back(panel_regularizer(cfg, name));
  std::vector<TrialRecord> rows(cfg.panel.size() * cfg.n_grid.size() * cfg.trials);
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni)
    for (int t = 0; t < cfg.trials; ++t) {
      const Dataset ds = generate(cfg, cfg.n_grid[ni], t);
      for (std::size_t r = 0; r < regs.size(); ++r) {
        auto rec = run_cell(cfg, *regs[r], ds, cfg.n_grid[ni], t);
        if (progress) progress(rec);
        rows[(r * cfg.n_grid.size() + ni) * cfg.trials + t] = std::move(rec);
      }
    }
  return rows;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline const char* kCsvHeader = "regularizer,n,trial,best_hamming,best_l2,lambda_h,lambda_l2,seconds";

inline void write_csv(std::ostream& os, const std::vector<TrialRecord>& rows, bool timing) {
  os << kCsvHeader << "\n";
  for (const auto& r : rows) {
    os << r.regularizer << ',' << r.n << ',' << r.trial << ',' << format_number(r.best_hamming) << ','
       << format_number(r.best_l2) << ',' << format_number(r.lambda_h) << ',' << format_number(r.lambda_l2) << ','
       << (timing ? format_number(r.seconds) : std::string("0")) << "\n";
  }
}

struct CellSummary {
  std::string regularizer;
  int n = 0;
  int count = 0, failures = 0;
  double mean_hamming = NAN, se_hamming = NAN, mean_l2 = NAN, se_l2 = NAN;
};

inline std::pair<double, double> mean_se(const std::vector<double>& v) {
  if (v.empty()) return {NAN, NAN};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (v.size() - 1) / v.size())};
}

/// Per (regularizer, n) means and standard errors, in row order.
inline std::vector<CellSummary> summarize(const std::vector<TrialRecord>& rows) {
  std::vector<CellSummary> out;
  std::map<std::pair<std::string, int>, std::size_t> at;
  std::vector<std::vector<double>> hs, ls;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.regularizer, r.n);
    auto it = at.find(key);
    if (it == at.end()) {
      it = at.emplace(key, out.size()).first;
      out.push_back({r.regularizer, r.n});
      hs.emplace_back();
      ls.emplace_back();
    }
    auto& c = out[it->second];
    ++c.count;
    if (std::isnan(r.best_hamming)) {
      ++c.failures;
      continue;
    }
    hs[it->second].push_back(r.best_hamming);
    ls[it->second].push_back(r.best_l2);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::tie(out[i].mean_hamming, out[i].se_hamming) = mean_se(hs[i]);
    std::tie(out[i].mean_l2, out[i].se_l2) = mean_se(ls[i]);
  }
  return out;
}

inline json summary_json(const ExperimentConfig& cfg, const std::vector<TrialRecord>& rows) {
  json j;
  j["d"] = cfg.dim();
  j["k"] = cfg.k;
  j["sigma"] = cfg.sigma;
  j["signal"] = cfg.signal;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  json cells = json::array();
  for (const auto& c : summarize(rows)) {
    cells.push_back({{"regularizer", c.regularizer},
                     {"n", c.n},
                     {"count", c.count},
                     {"failures", c.failures},
                     {"mean_hamming", c.mean_hamming},
                     {"se_hamming", c.se_hamming},
                     {"mean_l2", c.mean_l2},
                     {"se_l2", c.se_l2}});
  }
  j["cells"] = cells;
  json errors = json::array();
  double total = 0.0;
  for (const auto& r : rows) {
    total += r.seconds;
    if (!r.error.empty()) errors.push_back({{"regularizer", r.regularizer}, {"n", r.n}, {"trial", r.trial}, {"error", r.error}});
  }
  j["errors"] = errors;
  j["seconds"] = total;
  return j;
}

// CSV reading and plot data ----------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return NAN;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

inline std::vector<TrialRecord> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw InvalidArgument("CSV header does not match the results schema");
  std::vector<TrialRecord> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 8) throw InvalidArgument("CSV row with " + std::to_string(cells.size()) + " fields");
    TrialRecord r;
    r.regularizer = cells[0];
    r.n = static_cast<int>(parse_double(cells[1]));
    r.trial = static_cast<int>(parse_double(cells[2]));
    r.best_hamming = parse_double(cells[3]);
    r.best_l2 = parse_double(cells[4]);
    r.lambda_h = parse_double(cells[5]);
    r.lambda_l2 = parse_double(cells[6]);
    r.seconds = parse_double(cells[7]);
    rows.push_back(r);
  }
  if (rows.empty()) throw InvalidArgument("CSV has no data rows");
  return rows;
}

/// Wide table: n, then one mean per regularizer, then one SE per regularizer,
/// regularizers in order of first appearance.
inline std::string plot_table(const std::vector<TrialRecord>& rows, bool hamming) {
  const auto cells = summarize(rows);
  std::vector<std::string> regs;
  std::vector<int> ns;
  for (const auto& c : cells) {
    if (std::find(regs.begin(), regs.end(), c.regularizer) == regs.end()) regs.push_back(c.regularizer);
    if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
  }
  std::sort(ns.begin(), ns.end());
  std::ostringstream os;
  os << "# n";
  for (const auto& r : regs) os << ' ' << r;
  for (const auto& r : regs) os << ' ' << r << "_se";
  os << "\n";
  for (int n : ns) {
    std::vector<double> mean(regs.size(), NAN), se(regs.size(), NAN);
    for (const auto& c : cells) {
      if (c.n != n) continue;
      const auto k = std::find(regs.begin(), regs.end(), c.regularizer) - regs.begin();
      mean[k] = hamming ? c.mean_hamming : c.mean_l2;
      se[k] = hamming ? c.se_hamming : c.se_l2;
    }
    os << n;
    for (double v : mean) os << ' ' << format_number(v);
    for (double v : se) os << ' ' << format_number(v);
    os << "\n";
  }
  return os.str();
}

}  // namespace struktnorm
