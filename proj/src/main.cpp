#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "struktnorm/experiment.hpp"
#include "struktnorm/theory.hpp"

namespace fs = std::filesystem;
using namespace struktnorm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool is_file(const std::string& path) {
  std::error_code ec;
  return path.size() < 4096 && fs::is_regular_file(path, ec);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  const std::string text = slurp(path);
  if (ends_with(path, ".toml")) {
    try {
      const auto tbl = toml::parse(text, path);
      std::ostringstream os;
      os << toml::json_formatter{tbl};
      return json::parse(os.str());
    } catch (const toml::parse_error& e) {
      throw InvalidArgument(std::string("TOML error: ") + std::string(e.description()));
    }
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("JSON error: ") + e.what());
  }
}

/// Numbers from a JSON array or CSV text (commas, whitespace, newlines).
std::vector<double> parse_numbers(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    std::vector<double> out;
    for (const auto& v : json::parse(text)) out.push_back(parse_ext(v));
    return out;
  }
  std::vector<double> out;
  std::string cell;
  for (char ch : text + "\n") {
    if (ch == ',' || ch == '\n' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!cell.empty()) out.push_back(parse_double(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  return out;
}

/// Inline list or a path to a CSV / JSON file.
std::vector<double> read_vector(const std::string& arg) {
  if (is_file(arg)) return parse_numbers(slurp(arg));
  return parse_numbers(arg);
}

std::vector<double> vector_param(const json& cfg, const std::string& flag, const char* key) {
  if (!flag.empty()) return read_vector(flag);
  if (cfg.contains(key)) {
    const auto& v = cfg.at(key);
    if (v.is_string()) return read_vector(v.get<std::string>());
    std::vector<double> out;
    for (const auto& x : v) out.push_back(parse_ext(x));
    return out;
  }
  throw InvalidArgument(std::string("missing vector '") + key + "'");
}

/// CSV matrix; a non-numeric first row is treated as a header.
Eigen::MatrixXd read_matrix(const std::string& path) {
  std::istringstream is(slurp(path));
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    try {
      row = parse_numbers(line);
    } catch (const InvalidArgument&) {
      if (first) {
        first = false;
        continue;
      }
      throw;
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) throw InvalidArgument("ragged CSV matrix in '" + path + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("empty matrix in '" + path + "'");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

json json_param(const json& cfg, const std::string& flag, const char* key) {
  if (!flag.empty()) {
    if (is_file(flag)) return load_config(flag);
    try {
      return json::parse(flag);
    } catch (const json::parse_error&) {
      throw InvalidArgument(std::string("--") + key + " is neither a file nor JSON text");
    }
  }
  if (cfg.contains(key)) return cfg.at(key);
  throw InvalidArgument(std::string("missing '") + key + "'");
}

double p_param(const json& cfg, const std::string& flag) {
  if (!flag.empty()) return parse_p(flag);
  if (cfg.contains("p")) {
    const auto& v = cfg.at("p");
    return v.is_string() ? parse_p(v.get<std::string>()) : parse_p(v.dump());
  }
  return 2.0;
}

json vec_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(ext_to_json(x));
  return a;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw InvalidArgument("cannot write '" + path + "'");
  return file;
}

// Shared inputs for the function-level subcommands.
struct FnArgs {
  std::string config, function, vector, p, set;
  double lambda = 0.0;
};

ParsedFunction function_input(const json& cfg, const FnArgs& a) { return parse_function(json_param(cfg, a.function, "function")); }

void check_dim(const ParsedFunction& pf, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != pf.d)
    throw InvalidArgument("vector has " + std::to_string(v.size()) + " entries, function has d = " + std::to_string(pf.d));
}

json cmd_norm(const FnArgs& a) {
  const json cfg = load_config(a.config);
  const auto pf = function_input(cfg, a);
  const double p = p_param(cfg, a.p);
  const auto w = vector_param(cfg, a.vector, "vector");
  check_dim(pf, w);
  if (pf.fn) {
    const auto np = NormParams::make(*pf.fn, p);
    return {{"norm", norm(np, w)}, {"method", has_decomposition(*pf.fn) ? "decomposition" : "lp"}};
  }
  return {{"norm", decomposition_norm(*pf.range, w, p)}, {"method", "decomposition"}};
}

json cmd_dualnorm(const FnArgs& a) {
  const json cfg = load_config(a.config);
  const auto pf = function_input(cfg, a);
  const double p = p_param(cfg, a.p);
  const auto s = vector_param(cfg, a.vector, "vector");
  check_dim(pf, s);
  if (pf.fn) return {{"dual_norm", dual_norm(NormParams::make(*pf.fn, p), s)}};
  return {{"dual_norm", dinkelbach_dual(*pf.range, s, conjugate_exponent(p))}};
}

json cmd_prox(const FnArgs& a) {
  const json cfg = load_config(a.config);
  const auto pf = function_input(cfg, a);
  const double p = p_param(cfg, a.p);
  const auto z = vector_param(cfg, a.vector, "vector");
  check_dim(pf, z);
  const double lambda = a.lambda > 0.0 ? a.lambda : cfg.value("lambda", 0.0);
  if (!(lambda > 0.0)) throw InvalidArgument("prox needs lambda > 0");
  std::vector<double> x;
  std::string method = "decomposition";
  if (pf.fn) {
    const auto np = NormParams::make(*pf.fn, p);
    if (has_decomposition(*pf.fn)) {
      x = prox(np, lambda, z);
    } else {
      x = prox_generic(np, lambda, z);
      method = "generic";
    }
  } else {
    x = decomposition_prox(*pf.range, z, lambda, p);
  }
  return {{"prox", vec_json(x)}, {"lambda", lambda}, {"method", method}};
}

json cmd_sfm(const FnArgs& a) {
  const json cfg = load_config(a.config);
  const auto pf = function_input(cfg, a);
  const auto t = vector_param(cfg, a.vector, "vector");
  check_dim(pf, t);
  if (pf.fn) {
    const auto r = sfm(*pf.fn, t, SfmOptions{cfg.value("allow_minnorm", false), false});
    return {{"set", r.a.one_based()}, {"value", r.value}, {"method", method_name(r.method)}};
  }
  auto [idx, val] = pf.range->sfm(t);
  for (int& i : idx) ++i;
  return {{"set", idx}, {"value", val}, {"method", pf.range->two_d() ? "range2d" : "range1d"}};
}

json cmd_envelope(const FnArgs& a) {
  const json cfg = load_config(a.config);
  const auto pf = function_input(cfg, a);
  if (!pf.fn) throw CapabilityError("envelope requires d <= 64");
  const auto& f = *pf.fn;
  std::vector<SubsetMask> sets;
  if (!a.set.empty()) {
    std::vector<int> idx;
    for (double v : parse_numbers(a.set)) idx.push_back(static_cast<int>(v));
    sets.push_back(SubsetMask::from_one_based(idx, f.d()));
  } else if (cfg.contains("sets")) {
    sets = parse_subsets(cfg.at("sets"), f.d(), "sets");
  } else {
    if (f.d() > 12) throw CapabilityError("full envelope report requires d <= 12; request subsets with --set");
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << f.d()); ++m) sets.push_back(SubsetMask(m));
  }
  const CoreSet core = core_set(f);
  const SetFunction ft = uce(f, core);
  json rows = json::array();
  for (auto s : sets) {
    const bool in_core = std::find(core.sets.begin(), core.sets.end(), s) != core.sets.end();
    rows.push_back({{"A", s.one_based()},
                    {"F", ext_to_json(f(s))},
                    {"F_minus", ext_to_json(lce(f, s))},
                    {"F_plus", ext_to_json(ft(s))},
                    {"in_core_set", in_core}});
    if (f.d() <= 16) rows.back()["F_cover"] = ext_to_json(integer_cover(f, s).value);
  }
  json cs = json::array();
  for (auto s : core.sets) cs.push_back(s.one_based());
  return {{"d", f.d()}, {"subsets", rows}, {"core_set", cs}};
}

struct CertifyArgs {
  std::string config, function, p, gram, design, truth;
  double lambda = 0.0;
  int samples = 1000;
  std::uint64_t seed = 0;
};

json cmd_certify(const CertifyArgs& a) {
  const json cfg = load_config(a.config);
  FnArgs fa;
  fa.function = a.function;
  const auto pf = function_input(cfg, fa);
  if (!pf.fn) throw CapabilityError("certify requires d <= 64");
  const auto& f = *pf.fn;
  const double p = p_param(cfg, a.p);
  Eigen::MatrixXd Q;
  if (!a.gram.empty() || cfg.contains("gram")) {
    Q = read_matrix(!a.gram.empty() ? a.gram : cfg.at("gram").get<std::string>());
  } else if (!a.design.empty() || cfg.contains("design")) {
    const Eigen::MatrixXd X = read_matrix(!a.design.empty() ? a.design : cfg.at("design").get<std::string>());
    Q = X.transpose() * X / static_cast<double>(X.rows());
  } else {
    throw InvalidArgument("certify needs --gram or --design");
  }
  const auto wstar = vector_param(cfg, a.truth, "truth");
  const double lambda = a.lambda > 0.0 ? a.lambda : cfg.value("lambda", 0.0);
  const auto rc = irrepresentability(f, p, Q, wstar, lambda);
  json out = {{"J", rc.J.one_based()},      {"irrepresentability_lhs", rc.lhs}, {"eta", rc.eta},
              {"kappa", rc.kappa},          {"nu", rc.nu},                      {"lambda_threshold", rc.lambda_threshold},
              {"verdict", rc.verdict},      {"pass", rc.pass}};
  if (f.d() <= 14) {
    const auto tc = constants(f);
    out["constants"] = {{"m", tc.m}, {"M", tc.M}, {"m_tilde", tc.m_tilde}, {"c", tc.c}, {"rho", tc.rho}};
    if (rc.kappa > 0.0) {
      const auto re = restricted_eigenvalue(f, p, Q, rc.J, cfg.value("samples", a.samples), a.seed);
      out["restricted_eigenvalue"] = {{"kappa_hat", re.kappa_hat},
                                      {"samples", re.samples},
                                      {"in_cone", re.in_cone},
                                      {"note", "sampled estimate (an upper bound on the true constant), not a certificate"}};
      if (lambda > 0.0 && std::isfinite(re.kappa_hat) && re.kappa_hat > 0.0) {
        out["bounds"] = {{"omega_error", omega_error_bound(lambda, re.kappa_hat, tc.rho)},
                         {"prediction_error", prediction_error_bound(lambda, re.kappa_hat, tc.rho)},
                         {"note", "the printed constant of the consistency bound is ambiguous; 24 lambda / (kappa rho^2) "
                                  "is used for the norm error"}};
      }
    }
  }
  return out;
}

struct SolveArgs {
  std::string config, design, response, regularizer, truth, out, summary;
  double lambda = 0.0;
  int points = 50;
  double decades = 3.0;
  double tol = 1e-8;
  int max_iter = 50000;
};

void run_solve(const SolveArgs& a, bool is_path) {
  const json cfg = load_config(a.config);
  const std::string xpath = !a.design.empty() ? a.design : cfg.value("design", std::string());
  const std::string ypath = !a.response.empty() ? a.response : cfg.value("response", std::string());
  if (xpath.empty() || ypath.empty()) throw InvalidArgument("solve needs --design and --response");
  const Eigen::MatrixXd X = read_matrix(xpath);
  const auto yv = read_vector(ypath);
  const int d = static_cast<int>(X.cols());
  const auto reg = regularizer_from_json(json_param(cfg, a.regularizer, "regularizer"), d);
  Problem prob;
  prob.X = X;
  prob.y = detail::to_eigen(yv);
  prob.reg = reg;
  prob.validate();
  std::vector<double> wstar;
  if (!a.truth.empty() || cfg.contains("truth")) wstar = vector_param(cfg, a.truth, "truth");
  SolveOptions opts;
  opts.tol = cfg.value("tol", a.tol);
  opts.max_iter = cfg.value("max_iter", a.max_iter);
  const auto f = Quadratic::from(X, prob.y);
  std::vector<double> grid;
  if (is_path) {
    grid = geometric_grid(reg->lambda_max(detail::to_std(f.b)), cfg.value("points", a.points),
                          cfg.value("decades", a.decades));
  } else {
    const double lambda = a.lambda > 0.0 ? a.lambda : cfg.value("lambda", 0.0);
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    grid = {lambda};
  }
  const auto pts = path(f, *reg, grid, wstar, opts);
  std::ofstream file;
  std::ostream& os = open_out(a.out, file);
  os << "lambda,objective,nnz,hamming,l2err\n";
  json summary = json::array();
  for (const auto& pt : pts) {
    const double obj = pt.report.objective.empty() ? NAN : pt.report.objective.back();
    os << format_number(pt.lambda) << ',' << format_number(obj) << ',' << pt.support.size() << ','
       << (pt.hamming >= 0 ? std::to_string(pt.hamming) : std::string("nan")) << ','
       << format_number(pt.l2_error >= 0 ? pt.l2_error : NAN) << "\n";
    json s = {{"lambda", pt.lambda},
              {"objective", obj},
              {"iterations", pt.report.iterations},
              {"restarts", pt.report.restarts},
              {"converged", pt.report.converged},
              {"rel_change", pt.report.rel_change},
              {"support", [&] {
                 std::vector<int> one;
                 for (int i : pt.support) one.push_back(i + 1);
                 return one;
               }()},
              {"w_hat", pt.report.w}};
    if (pt.report.dual_residual) s["dual_residual"] = *pt.report.dual_residual;
    summary.push_back(s);
  }
  if (!a.summary.empty()) {
    std::ofstream js(a.summary, std::ios::binary);
    if (!js) throw InvalidArgument("cannot write '" + a.summary + "'");
    js << json{{"regularizer", reg->name()}, {"points", summary}}.dump(2) << "\n";
  }
}

struct ExperimentArgs {
  std::string config, out, summary;
  std::int64_t seed = -1;
  bool quiet = false;
};

void run_experiment_cmd(const ExperimentArgs& a) {
  json cfgj = load_config(a.config);
  if (cfgj.contains("experiment")) cfgj = cfgj.at("experiment");
  if (a.seed >= 0) cfgj["seed"] = a.seed;
  const auto cfg = experiment_from_json(cfgj);
  const auto rows = run_experiment(cfg, [&](const TrialRecord& r) {
    if (!a.quiet)
      std::cerr << r.regularizer << " n=" << r.n << " trial=" << r.trial << " hamming=" << format_number(r.best_hamming)
                << " l2=" << format_number(r.best_l2) << (r.error.empty() ? "" : " error: " + r.error) << "\n";
  });
  std::ofstream file;
  write_csv(open_out(a.out, file), rows, cfg.timing);
  if (!a.summary.empty()) {
    std::ofstream js(a.summary, std::ios::binary);
    if (!js) throw InvalidArgument("cannot write '" + a.summary + "'");
    js << summary_json(cfg, rows).dump(2) << "\n";
  }
}

void run_plotdata(const std::string& input, const std::string& prefix) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + input + "'");
  const auto rows = read_results_csv(in);
  for (const auto& [suffix, hamming] : {std::pair{"_hamming.dat", true}, std::pair{"_l2.dat", false}}) {
    const std::string path = prefix + suffix;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << plot_table(rows, hamming);
    std::cout << path << "\n";
  }
}

void add_fn_options(CLI::App* sub, FnArgs& a, bool vec, bool lambda) {
  sub->add_option("--config", a.config, "TOML or JSON config file");
  sub->add_option("--function", a.function, "set-function spec (JSON file or inline JSON)");
  sub->add_option("--p", a.p, "exponent p > 1 or \"inf\"");
  if (vec) sub->add_option("--vector", a.vector, "vector (CSV / JSON file or inline comma list)");
  if (lambda) sub->add_option("--lambda", a.lambda, "regularization level");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured sparsity norms from combinatorial penalties"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "random seed");

  FnArgs norm_a, dual_a, prox_a, sfm_a, env_a;
  auto* norm_c = app.add_subcommand("norm", "evaluate Omega_p(w)");
  add_fn_options(norm_c, norm_a, true, false);
  auto* dual_c = app.add_subcommand("dualnorm", "evaluate the dual norm");
  add_fn_options(dual_c, dual_a, true, false);
  auto* prox_c = app.add_subcommand("prox", "proximal operator of lambda * Omega_p");
  add_fn_options(prox_c, prox_a, true, true);
  auto* sfm_c = app.add_subcommand("sfm", "minimize F(A) - t(A)");
  add_fn_options(sfm_c, sfm_a, true, false);
  auto* env_c = app.add_subcommand("envelope", "lower / upper combinatorial envelopes");
  add_fn_options(env_c, env_a, false, false);
  env_c->add_option("--set", env_a.set, "1-based subset, e.g. 1,3");

  CertifyArgs cert_a;
  auto* cert_c = app.add_subcommand("certify", "support recovery certificate");
  cert_c->add_option("--config", cert_a.config);
  cert_c->add_option("--function", cert_a.function);
  cert_c->add_option("--p", cert_a.p);
  cert_c->add_option("--gram", cert_a.gram, "Gram matrix Q as CSV");
  cert_c->add_option("--design", cert_a.design, "design X as CSV (Q = X'X / n)");
  cert_c->add_option("--truth", cert_a.truth, "true parameter w*");
  cert_c->add_option("--lambda", cert_a.lambda);
  cert_c->add_option("--samples", cert_a.samples, "restricted-eigenvalue samples");

  SolveArgs solve_a, path_a;
  auto add_solve = [](CLI::App* sub, SolveArgs& a) {
    sub->add_option("--config", a.config);
    sub->add_option("--design", a.design, "design matrix X (CSV)");
    sub->add_option("--response", a.response, "response y (CSV)");
    sub->add_option("--regularizer", a.regularizer, "regularizer spec (JSON file or inline JSON)");
    sub->add_option("--truth", a.truth, "ground truth for Hamming / l2 metrics");
    sub->add_option("--out", a.out, "CSV output (default stdout)");
    sub->add_option("--summary", a.summary, "JSON summary output");
    sub->add_option("--tol", a.tol);
    sub->add_option("--max-iter", a.max_iter);
  };
  auto* solve_c = app.add_subcommand("solve", "regularized least squares at one lambda");
  add_solve(solve_c, solve_a);
  solve_c->add_option("--lambda", solve_a.lambda);
  auto* path_c = app.add_subcommand("path", "warm-started regularization path");
  add_solve(path_c, path_a);
  path_c->add_option("--points", path_a.points);
  path_c->add_option("--decades", path_a.decades);

  ExperimentArgs exp_a;
  auto* exp_c = app.add_subcommand("experiment", "synthetic support recovery experiment");
  exp_c->add_option("--config", exp_a.config);
  exp_c->add_option("--out", exp_a.out, "CSV output (default stdout)");
  exp_c->add_option("--summary", exp_a.summary, "JSON summary output");
  exp_c->add_flag("--quiet", exp_a.quiet);

  std::string plot_in, plot_prefix = "plot";
  auto* plot_c = app.add_subcommand("plotdata", "gnuplot tables from an experiment CSV");
  plot_c->add_option("--input", plot_in)->required();
  plot_c->add_option("--prefix", plot_prefix);

  std::string rc_p = "2";
  double rc_mu = 1.0, rc_nu = 1.0;
  auto* rc_c = app.add_subcommand("relaxation-constant", "scale factor (q mu)^(1/q) (p nu)^(1/p)");
  rc_c->add_option("--p", rc_p);
  rc_c->add_option("--mu", rc_mu);
  rc_c->add_option("--nu", rc_nu);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  auto emit = [](const json& j) { std::cout << j.dump(2) << "\n"; };
  try {
    if (*norm_c) emit(cmd_norm(norm_a));
    else if (*dual_c) emit(cmd_dualnorm(dual_a));
    else if (*prox_c) emit(cmd_prox(prox_a));
    else if (*sfm_c) emit(cmd_sfm(sfm_a));
    else if (*env_c) emit(cmd_envelope(env_a));
    else if (*cert_c) {
      cert_a.seed = seed;
      emit(cmd_certify(cert_a));
    } else if (*solve_c) run_solve(solve_a, false);
    else if (*path_c) run_solve(path_a, true);
    else if (*exp_c) {
      if (app.count("--seed")) exp_a.seed = static_cast<std::int64_t>(seed);
      run_experiment_cmd(exp_a);
    } else if (*plot_c) run_plotdata(plot_in, plot_prefix);
    else if (*rc_c) {
      const double p = parse_p(rc_p);
      emit({{"p", ext_to_json(p)}, {"mu", rc_mu}, {"nu", rc_nu}, {"constant", relaxation_constant(p, rc_mu, rc_nu)}});
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CapabilityError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
