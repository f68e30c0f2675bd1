// Command-line front end: spectra, existence thresholds, backward trajectories,
// gradient-measure marginals and samples, and the model tables, emitted as CSV
// or JSON data.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ggmtree/ggmtree.hpp"
#include "ggmtree/serialize.hpp"

namespace {

using namespace ggmtree;
using nlohmann::json;

constexpr double kPi = std::numbers::pi;

double base_tolerance() {
  if (const char* env = std::getenv("GGM_TREE_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
    throw std::invalid_argument("GGM_TREE_TOL must be a positive number");
  }
  return 1e-12;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list of numbers");
  return out;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << text;
}

// ---- model selection shared by the subcommands ----

struct ModelOptions {
  std::string model;
  double beta = 1.0;
  double a = 1.0;
  std::string table_path;
  std::string fuzzy_values; // explicit circulant, bypasses the integer model

  bool has_model() const { return !model.empty(); }
  bool has_fuzzy() const { return !fuzzy_values.empty(); }

  TransferOperator op(double summation_tol) const {
    if (model == "sos") return TransferOperator::sos(beta, summation_tol);
    if (model == "invsq") return TransferOperator::inverse_square(a, summation_tol);
    if (model == "custom") {
      if (table_path.empty()) throw std::invalid_argument("--table required for the custom model");
      return TransferOperator::from_file(table_path, summation_tol);
    }
    throw std::invalid_argument("unknown model '" + model + "'");
  }

  FuzzyOperator fuzzy_at(int q, double summation_tol) const {
    if (has_fuzzy()) {
      std::vector<double> values = parse_doubles(fuzzy_values);
      if (static_cast<int>(values.size()) != q)
        throw std::invalid_argument("--fuzzy length must equal q");
      return FuzzyOperator(q, std::move(values));
    }
    return fuzzy(op(summation_tol), q);
  }

  json describe() const {
    json j;
    if (has_fuzzy()) {
      j["fuzzy"] = parse_doubles(fuzzy_values);
    } else {
      j["model"] = model;
      if (model == "sos") j["beta"] = beta;
      if (model == "invsq") j["a"] = a;
      if (model == "custom") j["table"] = table_path;
    }
    return j;
  }
};

void add_model_flags(CLI::App* cmd, ModelOptions& m, bool allow_fuzzy) {
  cmd->add_option("--model", m.model, "model: sos | invsq | custom");
  cmd->add_option("--beta", m.beta, "SOS inverse temperature");
  cmd->add_option("--a", m.a, "inverse-square coefficient");
  cmd->add_option("--table", m.table_path, "custom model table file ('offset value' rows, optional tail header)");
  if (allow_fuzzy)
    cmd->add_option("--fuzzy", m.fuzzy_values,
                    "explicit mod-q operator values v0,v1,... (instead of --model)");
}

// Law construction shared by the ggm subcommands and trajectory.
struct SeedOptions {
  double eps = 0.0;       // chart radius; 0 keeps the free law
  std::string seed_u;     // explicit simplex vector
  std::string coeffs;     // chart coefficients, one per unstable mode
  double start = -1.0;    // q = 2 shortcut: first component of the seed
};

void add_seed_flags(CLI::App* cmd, SeedOptions& s) {
  cmd->add_option("--eps", s.eps, "chart radius of the seed on the unstable subspace (0: free law)");
  cmd->add_option("--seed-u", s.seed_u, "explicit seed u0,u1,... on the simplex");
  cmd->add_option("--mode-coeffs", s.coeffs, "coefficients over the unstable modes (default: first mode)");
  cmd->add_option("--start", s.start, "q=2 shortcut: seed (s, 1-s)");
}

SimplexVector resolve_seed(const SeedOptions& s, const FuzzyOperator& fz, int d) {
  if (!s.seed_u.empty()) return SimplexVector(parse_doubles(s.seed_u));
  if (s.start >= 0.0) {
    if (fz.q() != 2) throw std::invalid_argument("--start applies to q = 2 only");
    return SimplexVector({s.start, 1.0 - s.start});
  }
  if (s.eps == 0.0) return SimplexVector::uniform(fz.q());
  const auto rep = spectrum_at_eq(fz, d);
  const auto modes = unstable_subspace(rep);
  std::vector<double> coeffs(modes.size(), 0.0);
  if (s.coeffs.empty()) {
    coeffs[0] = 1.0;
  } else {
    coeffs = parse_doubles(s.coeffs);
    if (coeffs.size() != modes.size())
      throw std::invalid_argument("--mode-coeffs needs one value per unstable mode (" +
                                  std::to_string(modes.size()) + ")");
  }
  return seed_on_manifold(rep, modes, s.eps, coeffs);
}

RadialBoundaryLaw build_law(const ModelOptions& m, const SeedOptions& s, int q, int d, int depth,
                            double tol) {
  const auto fz = m.fuzzy_at(q, tol);
  const auto seed = resolve_seed(s, fz, d);
  const auto orbit = backward_orbit(fz, d, seed, depth, tol);
  return build_radial_law(orbit, d, fz, depth);
}

// ---- subcommand payloads ----

struct SpectrumArgs {
  ModelOptions model;
  int d = 2, q = 2;
  bool figure = false;
  std::string format = "csv", out;
};

int run_spectrum(const SpectrumArgs& args) {
  const double tol = base_tolerance();
  SpectrumReport rep;
  std::vector<double> ratios;
  if (args.model.has_fuzzy()) {
    const auto fz = args.model.fuzzy_at(args.q, tol);
    rep = spectrum_at_eq(fz, args.d);
    for (const auto& e : rep.eigenvalues) ratios.push_back(e.value / args.d);
  } else {
    const auto op = args.model.op(tol);
    const auto fz = args.model.fuzzy_at(args.q, tol);
    rep = spectrum_at_eq(fz, args.d, op);
    for (const auto& e : rep.eigenvalues) ratios.push_back(e.value / args.d);
  }

  std::ostringstream text;
  if (args.format == "json") {
    json j = rep;
    j["config"] = args.model.describe();
    if (args.figure) {
      json bars = json::array();
      for (size_t i = 0; i < ratios.size(); ++i)
        bars.push_back({{"j", rep.eigenvalues[i].j},
                        {"k", 2.0 * kPi * rep.eigenvalues[i].j / args.q},
                        {"qhat_ratio", ratios[i]}});
      j["figure"] = bars;
    }
    text << j.dump(2) << '\n';
  } else if (args.figure) {
    text << "j,k,qhat_ratio\n";
    for (size_t i = 0; i < ratios.size(); ++i)
      text << rep.eigenvalues[i].j << ',' << fmt(2.0 * kPi * rep.eigenvalues[i].j / args.q) << ','
           << fmt(ratios[i]) << '\n';
  } else {
    text << "j,k,qhat_ratio,eigenvalue,classification\n";
    for (size_t i = 0; i < ratios.size(); ++i) {
      const auto& e = rep.eigenvalues[i];
      std::string cls = "stable";
      if (std::abs(std::abs(e.value) - 1.0) <= 1e-9)
        cls = "neutral";
      else if (rep.tau && std::abs(e.value) > *rep.tau)
        cls = "unstable";
      text << e.j << ',' << fmt(2.0 * kPi * e.j / args.q) << ',' << fmt(ratios[i]) << ','
           << fmt(e.value) << ',' << cls << '\n';
    }
  }
  write_output(text.str(), args.out);
  return 0;
}

struct ThresholdsArgs {
  ModelOptions model;
  int d = 2, q_max = 32, jobs = 1;
  std::string grid; // lo:step:hi over beta (sos) or a (invsq)
  std::string format = "csv", out;
};

void emit_threshold_csv(std::ostringstream& text, const ThresholdReport& rep, bool header) {
  if (header)
    text << "model,param,value,d,minimal_period,closed_form_period,region_all_q,q,exists,"
            "unstable_dim,max_modulus,neutral,dobrushin_conclusive,dobrushin_unique\n";
  std::string minimal;
  switch (rep.kind) {
    case ThresholdReport::PeriodKind::value: minimal = std::to_string(rep.minimal_period); break;
    case ThresholdReport::PeriodKind::all_q: minimal = "all"; break;
    case ThresholdReport::PeriodKind::none: minimal = "none"; break;
  }
  const std::string param = rep.params.empty() ? "-" : rep.params.front().first;
  const std::string value = rep.params.empty() ? "0" : fmt(rep.params.front().second);
  for (size_t i = 0; i < rep.scan.rows.size(); ++i) {
    const auto& row = rep.scan.rows[i];
    const auto& dob = rep.dobrushin[i].second;
    std::string neutral;
    for (int j : row.neutral) neutral += (neutral.empty() ? "" : ";") + std::to_string(j);
    text << rep.model << ',' << param << ',' << value << ',' << rep.d << ',' << minimal << ','
         << (rep.closed_form_period ? std::to_string(*rep.closed_form_period) : "-") << ','
         << (rep.region_all_q ? 1 : 0) << ',' << row.q << ',' << (row.exists ? 1 : 0) << ','
         << row.unstable_dim << ',' << fmt(row.max_modulus) << ',' << neutral << ','
         << (dob.conclusive ? 1 : 0) << ',' << (dob.unique ? 1 : 0) << '\n';
  }
}

int run_thresholds(const ThresholdsArgs& args) {
  const double tol = base_tolerance();
  std::vector<TransferOperator> ops;
  if (args.grid.empty()) {
    ops.push_back(args.model.op(tol));
  } else {
    std::vector<double> spec;
    std::stringstream ss(args.grid);
    std::string tok;
    while (std::getline(ss, tok, ':')) spec.push_back(std::stod(tok));
    if (spec.size() != 3 || spec[1] <= 0.0)
      throw std::invalid_argument("--grid expects lo:step:hi with positive step");
    for (double v = spec[0]; v <= spec[2] + 1e-12; v += spec[1]) {
      if (args.model.model == "sos")
        ops.push_back(TransferOperator::sos(v, tol));
      else if (args.model.model == "invsq")
        ops.push_back(TransferOperator::inverse_square(v, tol));
      else
        throw std::invalid_argument("--grid supports the sos and invsq models");
    }
  }

  std::vector<ThresholdReport> reports(ops.size());
  const int jobs = std::max(1, args.jobs);
  if (jobs == 1 || ops.size() == 1) {
    for (size_t i = 0; i < ops.size(); ++i) reports[i] = make_threshold_report(ops[i], args.d, args.q_max);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < ops.size(); i = next.fetch_add(1))
          reports[i] = make_threshold_report(ops[i], args.d, args.q_max);
      });
    for (auto& th : pool) th.join();
  }

  std::ostringstream text;
  if (args.format == "json") {
    json j = json::array();
    for (const auto& rep : reports) j.push_back(rep);
    text << j.dump(2) << '\n';
  } else {
    for (size_t i = 0; i < reports.size(); ++i) emit_threshold_csv(text, reports[i], i == 0);
  }
  write_output(text.str(), args.out);
  return 0;
}

struct TrajectoryArgs {
  ModelOptions model;
  SeedOptions seed;
  int d = 2, q = 2, steps = 10, depth = 0;
  bool figure = false;
  std::string format = "csv", out;
};

int run_trajectory(const TrajectoryArgs& args) {
  const double tol = base_tolerance();
  const auto fz = args.model.fuzzy_at(args.q, tol);
  const auto seed = resolve_seed(args.seed, fz, args.d);
  const int depth = args.depth > 0 ? args.depth : args.steps;
  const int steps = std::max(args.steps, depth);
  const auto orbit = backward_orbit(fz, args.d, seed, steps, tol);
  const auto law = build_radial_law(orbit, args.d, fz, depth);
  const auto diag = law.depth >= 5 ? outbound_convergence(law) : ConvergenceDiagnostics{};
  const auto eq = SimplexVector::uniform(args.q);

  std::ostringstream text;
  if (args.figure) {
    if (args.q != 2) throw std::invalid_argument("--figure draws the q = 2 interval map only");
    text << "series,x,y\n";
    for (int i = 1; i < 200; ++i) {
      const double s = i / 200.0;
      const auto v = apply_S(fz, args.d, SimplexVector({s, 1.0 - s}));
      text << "map," << fmt(s) << ',' << fmt(v[0]) << '\n';
    }
    for (size_t k = 0; k < orbit.points.size(); ++k)
      text << "orbit," << k << ',' << fmt(orbit.points[k][0]) << '\n';
  } else if (args.format == "json") {
    json j;
    j["config"] = args.model.describe();
    j["seed"] = seed;
    json pts = json::array();
    for (const auto& p : orbit.points) pts.push_back(p);
    j["orbit"] = {{"points", pts},
                  {"residuals", orbit.residuals},
                  {"rate_estimate", orbit.rate_estimate},
                  {"truncated", orbit.truncated}};
    j["law"] = law;
    if (law.depth >= 5)
      j["outbound_convergence"] = {{"distances", diag.distances},
                                   {"fitted_rate", diag.fitted_rate},
                                   {"monotone_tail", diag.monotone_tail}};
    text << j.dump(2) << '\n';
  } else {
    text << "n";
    for (int i = 0; i < args.q; ++i) text << ",orbit" << i;
    for (int i = 0; i < args.q; ++i) text << ",inbound" << i;
    for (int i = 0; i < args.q; ++i) text << ",outbound" << i;
    text << ",dist_orbit,dist_outbound\n";
    for (int n = 0; n <= law.depth; ++n) {
      text << n;
      const auto& point = orbit.points[static_cast<size_t>(std::min<int>(n, static_cast<int>(orbit.points.size()) - 1))];
      for (int i = 0; i < args.q; ++i) text << ',' << fmt(point[i]);
      const auto& in = n >= 1 ? law.inbound_at(n) : eq;
      for (int i = 0; i < args.q; ++i) text << ',' << (n >= 1 ? fmt(in[i]) : std::string("-"));
      const auto& out = law.outbound_at(n);
      for (int i = 0; i < args.q; ++i) text << ',' << fmt(out[i]);
      text << ',' << fmt(l2_distance(point, eq)) << ',' << fmt(l2_distance(out, eq)) << '\n';
    }
  }
  write_output(text.str(), args.out);
  return 0;
}

struct GgmArgs {
  ModelOptions model;
  SeedOptions seed;
  int d = 2, q = 2, depth = 16;
  double tail_tol = 1e-9;
  std::string format = "csv", out;
  // marginal
  int edge_depth = 0;
  // sample
  int n_samples = 1000, subtree_radius = 1;
  std::uint64_t rng_seed = 1;
  // deloc
  int path_len = 12;
  // ti-test
  std::string u_value;
  // fingerprint
  int s_period = 2, t_period = 3;
  SeedOptions seed_t;
  std::string fuzzy_s, fuzzy_t;
};

int run_ggm_marginal(const GgmArgs& args) {
  const double tol = base_tolerance();
  const auto op = args.model.op(tol);
  const auto fz = args.model.fuzzy_at(args.q, tol);
  const int depth = std::max(args.depth, args.edge_depth + 2);
  const auto law = build_law(args.model, args.seed, args.q, args.d, depth, tol);
  const auto marg = edge_marginal(op, fz, law.outbound_at(args.edge_depth),
                                  law.inbound_at(args.edge_depth + 1), args.tail_tol);
  std::ostringstream text;
  if (args.format == "json") {
    json j = marg;
    j["config"] = args.model.describe();
    j["edge_depth"] = args.edge_depth;
    text << j.dump(2) << '\n';
  } else {
    text << "increment,prob\n";
    for (const auto& [k, p] : marg.probs) text << k << ',' << fmt(p) << '\n';
  }
  write_output(text.str(), args.out);
  return 0;
}

int run_ggm_sample(const GgmArgs& args) {
  const double tol = base_tolerance();
  const auto op = args.model.op(tol);
  const auto fz = args.model.fuzzy_at(args.q, tol);
  const auto subtree = FiniteSubtree::ball(args.d, args.subtree_radius);
  const int depth = std::max(args.depth, args.subtree_radius + 2);
  const auto law = build_law(args.model, args.seed, args.q, args.d, depth, tol);
  const auto samples =
      sample_gradients(op, fz, law, subtree, args.n_samples, args.rng_seed, args.tail_tol);
  std::ostringstream text;
  if (args.format == "json") {
    json j = json::array();
    std::map<std::string, std::map<long long, int>> hist;
    for (const auto& s : samples) {
      json inc = json::object();
      for (const auto& [v, z] : s.increments) {
        inc[v.to_string()] = z;
        hist[v.to_string()][z]++;
      }
      j.push_back(inc);
    }
    json histograms = json::object();
    for (const auto& [edge, counts] : hist) {
      json h = json::object();
      for (const auto& [z, c] : counts) h[std::to_string(z)] = c;
      histograms[edge] = h;
    }
    text << json{{"rng_seed", args.rng_seed}, {"samples", j}, {"histograms", histograms}}.dump(2)
         << '\n';
  } else {
    text << "sample,edge,increment\n";
    for (size_t i = 0; i < samples.size(); ++i)
      for (const auto& [v, z] : samples[i].increments)
        text << i << ',' << v.to_string() << ',' << z << '\n';
  }
  write_output(text.str(), args.out);
  return 0;
}

int run_ggm_ti_test(const GgmArgs& args) {
  const double tol = base_tolerance();
  const auto fz = args.model.fuzzy_at(args.q, tol);
  SimplexVector u = SimplexVector::uniform(args.q);
  if (!args.u_value.empty()) {
    u = SimplexVector(parse_doubles(args.u_value));
  } else {
    SeedOptions s = args.seed;
    u = resolve_seed(s, fz, args.d);
  }
  const auto res = ti_scalar(fz, u, args.d);
  const std::string verdict = res.value > 1e-10 ? "NOT-TI" : "INCONCLUSIVE";
  std::ostringstream text;
  if (args.format == "json") {
    json j = res;
    j["verdict"] = verdict;
    j["u"] = u;
    text << j.dump(2) << '\n';
  } else {
    text << "value,shift,verdict\n" << fmt(res.value) << ',' << res.shift << ',' << verdict << '\n';
  }
  write_output(text.str(), args.out);
  return 0;
}

int run_ggm_fingerprint(const GgmArgs& args) {
  const double tol = base_tolerance();
  ModelOptions model_s = args.model;
  model_s.fuzzy_values = args.fuzzy_s;
  ModelOptions model_t = args.model;
  model_t.fuzzy_values = args.fuzzy_t;
  const auto law_s = build_law(model_s, args.seed, args.s_period, args.d, args.depth, tol);
  const auto law_t = build_law(model_t, args.seed_t, args.t_period, args.d, args.depth, tol);
  const int q_ext = args.s_period * args.t_period;
  const auto fz_st = args.model.fuzzy_at(q_ext, tol);
  const auto shift = period_fingerprint(fz_st, law_s, law_t);
  const auto fs = root_edge_fingerprint(law_s, q_ext);
  const auto ft = root_edge_fingerprint(law_t, q_ext);
  std::ostringstream text;
  if (args.format == "json") {
    json j;
    j["distinguishing_shift"] = shift ? json(*shift) : json("indistinguishable");
    j["fingerprint_s"] = fs;
    j["fingerprint_t"] = ft;
    text << j.dump(2) << '\n';
  } else {
    text << "verdict," << (shift ? std::to_string(*shift) : std::string("indistinguishable")) << '\n';
    text << "j,fingerprint_s,fingerprint_t\n";
    for (int j = 0; j < q_ext; ++j)
      text << j << ',' << fmt(fs[static_cast<size_t>(j)]) << ',' << fmt(ft[static_cast<size_t>(j)])
           << '\n';
  }
  write_output(text.str(), args.out);
  return 0;
}

int run_ggm_deloc(const GgmArgs& args) {
  const double tol = base_tolerance();
  const auto op = args.model.op(tol);
  const auto fz = args.model.fuzzy_at(args.q, tol);
  const int depth = std::max(args.depth, args.path_len + 1);
  const auto law = build_law(args.model, args.seed, args.q, args.d, depth, tol);
  std::ostringstream text;
  json rows = json::array();
  if (args.format != "json") text << "n,max_prob,argmax\n";
  for (int n = 1; n <= args.path_len; ++n) {
    const auto dist = path_increment_distribution(op, fz, law, n, args.tail_tol);
    double peak = 0.0;
    long long arg = 0;
    for (const auto& [k, p] : dist.probs) {
      if (p > peak) {
        peak = p;
        arg = k;
      }
    }
    if (args.format == "json")
      rows.push_back({{"n", n}, {"max_prob", peak}, {"argmax", arg}});
    else
      text << n << ',' << fmt(peak) << ',' << arg << '\n';
  }
  if (args.format == "json") text << json{{"rows", rows}}.dump(2) << '\n';
  write_output(text.str(), args.out);
  return 0;
}

struct Table1Args {
  ModelOptions model;
  int q = 4;
  std::string format = "csv", out;
};

int run_table1(const Table1Args& args) {
  const double tol = base_tolerance();
  const auto op = args.model.op(tol);
  const auto closed = fuzzy(op, args.q);
  const auto direct = fuzzy_direct(op, args.q);
  const std::vector<double> ks = {0.0, kPi / 4.0, kPi / 2.0, 3.0 * kPi / 4.0, kPi};

  std::ostringstream text;
  json rows = json::array();
  auto emit = [&](const std::string& quantity, const std::string& arg, double closed_v,
                  double direct_v) {
    if (args.format == "json")
      rows.push_back({{"quantity", quantity},
                      {"arg", arg},
                      {"closed_form", closed_v},
                      {"direct_sum", direct_v},
                      {"abs_diff", std::abs(closed_v - direct_v)}});
    else
      text << quantity << ',' << arg << ',' << fmt(closed_v) << ',' << fmt(direct_v) << ','
           << fmt(std::abs(closed_v - direct_v)) << '\n';
  };
  if (args.format != "json") text << "quantity,arg,closed_form,direct_sum,abs_diff\n";
  for (double k : ks) emit("fourier", fmt(k), op.fourier(k), op.fourier_direct(k));
  emit("fourier_ratio_pi", "pi", op.fourier(kPi) / op.fourier(0.0),
       op.fourier_direct(kPi) / op.fourier_direct(0.0));
  for (int i = 0; i < args.q; ++i)
    emit("fuzzy", std::to_string(i), closed.values()[static_cast<size_t>(i)],
         direct.values()[static_cast<size_t>(i)]);
  if (args.format == "json") text << json{{"rows", rows}}.dump(2) << '\n';
  write_output(text.str(), args.out);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"height-periodic boundary laws and gradient Gibbs measures on regular trees"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "config file; keys live in a section named for the subcommand, and flags "
                 "given on the command line take precedence");
  app.footer("CSV columns:\n"
             "  spectrum:            j,k,qhat_ratio,eigenvalue,classification\n"
             "  spectrum --figure:   j,k,qhat_ratio  (one bar per frequency)\n"
             "  thresholds:          model,param,value,d,minimal_period,closed_form_period,\n"
             "                       region_all_q,q,exists,unstable_dim,max_modulus,neutral,\n"
             "                       dobrushin_conclusive,dobrushin_unique\n"
             "  trajectory:          n,orbit*,inbound*,outbound*,dist_orbit,dist_outbound\n"
             "  trajectory --figure: series,x,y  (series: map | orbit)\n"
             "  ggm marginal:        increment,prob\n"
             "  ggm sample:          sample,edge,increment\n"
             "  ggm ti-test:         value,shift,verdict\n"
             "  ggm fingerprint:     verdict line, then j,fingerprint_s,fingerprint_t\n"
             "  ggm deloc:           n,max_prob,argmax\n"
             "  table1:              quantity,arg,closed_form,direct_sum,abs_diff\n"
             "Environment: GGM_TREE_TOL overrides the core tolerance 1e-12.");

  SpectrumArgs spectrum_args;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues of the simplex map at eq");
  spectrum_cmd->fallthrough();
  add_model_flags(spectrum_cmd, spectrum_args.model, true);
  spectrum_cmd->add_option("--d", spectrum_args.d, "tree degree (children per vertex)")->required();
  spectrum_cmd->add_option("--q", spectrum_args.q, "period")->required();
  spectrum_cmd->add_flag("--figure", spectrum_args.figure, "emit bar data of the ratio plot");
  spectrum_cmd->add_option("--format", spectrum_args.format, "csv | json");
  spectrum_cmd->add_option("--out", spectrum_args.out, "output file (default stdout)");

  ThresholdsArgs thresholds_args;
  auto* thresholds_cmd = app.add_subcommand("thresholds", "existence regions, minimal periods, scans");
  thresholds_cmd->fallthrough();
  add_model_flags(thresholds_cmd, thresholds_args.model, false);
  thresholds_cmd->add_option("--d", thresholds_args.d, "tree degree")->required();
  thresholds_cmd->add_option("--q-max", thresholds_args.q_max, "scan periods up to this bound");
  thresholds_cmd->add_option("--grid", thresholds_args.grid, "parameter sweep lo:step:hi");
  thresholds_cmd->add_option("--jobs", thresholds_args.jobs, "worker threads for the sweep");
  thresholds_cmd->add_option("--format", thresholds_args.format, "csv | json");
  thresholds_cmd->add_option("--out", thresholds_args.out, "output file");

  TrajectoryArgs trajectory_args;
  auto* trajectory_cmd =
      app.add_subcommand("trajectory", "backward orbit and the radial boundary law it spans");
  trajectory_cmd->fallthrough();
  add_model_flags(trajectory_cmd, trajectory_args.model, true);
  add_seed_flags(trajectory_cmd, trajectory_args.seed);
  trajectory_cmd->add_option("--d", trajectory_args.d, "tree degree")->required();
  trajectory_cmd->add_option("--q", trajectory_args.q, "period")->required();
  trajectory_cmd->add_option("--steps", trajectory_args.steps, "backward steps");
  trajectory_cmd->add_option("--depth", trajectory_args.depth, "law depth (default: steps)");
  trajectory_cmd->add_flag("--figure", trajectory_args.figure, "emit the q=2 map graph and orbit polyline");
  trajectory_cmd->add_option("--format", trajectory_args.format, "csv | json");
  trajectory_cmd->add_option("--out", trajectory_args.out, "output file");

  auto* ggm_cmd = app.add_subcommand("ggm", "gradient-measure layer");
  ggm_cmd->require_subcommand(1);
  ggm_cmd->fallthrough();
  GgmArgs ggm_args;

  auto add_ggm_common = [&](CLI::App* cmd, bool fuzzy_ok) {
    add_model_flags(cmd, ggm_args.model, fuzzy_ok);
    cmd->add_option("--d", ggm_args.d, "tree degree")->required();
    cmd->add_option("--q", ggm_args.q, "period");
    cmd->add_option("--depth", ggm_args.depth, "law depth");
    cmd->add_option("--tail-tol", ggm_args.tail_tol, "truncation tolerance for integer supports");
    cmd->add_option("--format", ggm_args.format, "csv | json");
    cmd->add_option("--out", ggm_args.out, "output file");
  };

  auto* marginal_cmd = ggm_cmd->add_subcommand("marginal", "single-edge increment distribution");
  marginal_cmd->fallthrough();
  add_ggm_common(marginal_cmd, false);
  add_seed_flags(marginal_cmd, ggm_args.seed);
  marginal_cmd->add_option("--edge-depth", ggm_args.edge_depth, "depth of the edge tail vertex");

  auto* sample_cmd = ggm_cmd->add_subcommand("sample", "draw gradient configurations on a subtree");
  sample_cmd->fallthrough();
  add_ggm_common(sample_cmd, false);
  add_seed_flags(sample_cmd, ggm_args.seed);
  sample_cmd->add_option("--n", ggm_args.n_samples, "number of samples");
  sample_cmd->add_option("--subtree-radius", ggm_args.subtree_radius, "ball radius around the root");
  sample_cmd->add_option("--rng-seed", ggm_args.rng_seed, "random seed");

  auto* ti_cmd = ggm_cmd->add_subcommand("ti-test", "translation-invariance detector");
  ti_cmd->fallthrough();
  add_ggm_common(ti_cmd, true);
  add_seed_flags(ti_cmd, ggm_args.seed);
  ti_cmd->add_option("--u", ggm_args.u_value, "simplex vector to test (default: seed options)");

  auto* fingerprint_cmd = ggm_cmd->add_subcommand("fingerprint", "distinguish coprime periods");
  fingerprint_cmd->fallthrough();
  add_ggm_common(fingerprint_cmd, false);
  add_seed_flags(fingerprint_cmd, ggm_args.seed);
  fingerprint_cmd->add_option("--s", ggm_args.s_period, "first period");
  fingerprint_cmd->add_option("--t", ggm_args.t_period, "second period (coprime with --s)");
  fingerprint_cmd->add_option("--fuzzy-s", ggm_args.fuzzy_s, "explicit mod-s operator for the first law");
  fingerprint_cmd->add_option("--fuzzy-t", ggm_args.fuzzy_t, "explicit mod-t operator for the second law");
  fingerprint_cmd->add_option("--eps-t", ggm_args.seed_t.eps, "chart radius for the second law");
  fingerprint_cmd->add_option("--seed-ut", ggm_args.seed_t.seed_u, "explicit seed for the second law");

  auto* deloc_cmd = ggm_cmd->add_subcommand("deloc", "total path-increment spread");
  deloc_cmd->fallthrough();
  add_ggm_common(deloc_cmd, false);
  add_seed_flags(deloc_cmd, ggm_args.seed);
  deloc_cmd->add_option("--n", ggm_args.path_len, "maximal path length");

  Table1Args table1_args;
  auto* table1_cmd = app.add_subcommand("table1", "model table: closed forms vs direct sums");
  table1_cmd->fallthrough();
  add_model_flags(table1_cmd, table1_args.model, false);
  table1_cmd->add_option("--q", table1_args.q, "period for the mod-q operator");
  table1_cmd->add_option("--format", table1_args.format, "csv | json");
  table1_cmd->add_option("--out", table1_args.out, "output file");

  try {
    app.parse(argc, argv);
    if (spectrum_cmd->parsed()) return run_spectrum(spectrum_args);
    if (thresholds_cmd->parsed()) return run_thresholds(thresholds_args);
    if (trajectory_cmd->parsed()) return run_trajectory(trajectory_args);
    if (ggm_cmd->parsed()) {
      if (marginal_cmd->parsed()) return run_ggm_marginal(ggm_args);
      if (sample_cmd->parsed()) return run_ggm_sample(ggm_args);
      if (ti_cmd->parsed()) return run_ggm_ti_test(ggm_args);
      if (fingerprint_cmd->parsed()) return run_ggm_fingerprint(ggm_args);
      if (deloc_cmd->parsed()) return run_ggm_deloc(ggm_args);
    }
    if (table1_cmd->parsed()) return run_table1(table1_args);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
