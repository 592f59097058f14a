#include "mf/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "mf/cubature.h"
#include "mf/empirical.h"
#include "mf/error.h"
#include "mf/io.h"
#include "mf/reconstruct.h"
#include "mf/trace_moments.h"

namespace mf::cli {
namespace {

using io::Json;

bool ends_with(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Writes `out` (or prints it) and echoes the resolved configuration.
void emit(const std::string &out_path, const std::string &text,
          const Json &config, std::ostream &out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  io::write_text_file(out_path, text);
  io::write_json_file(out_path + ".config.json", config);
}

WeightMode parse_weight_mode(const std::string &s) {
  if (s == "uniform")
    return WeightMode::FixedUniform;
  if (s == "optimize")
    return WeightMode::Optimize;
  return WeightMode::SolveLinear;
}

Convention parse_convention(const std::string &s) {
  return s == "QX" ? Convention::QX : Convention::PX;
}

/// Exact or random-node rule as chosen by `method`; `converged` reports
/// whether the optimizer met its tolerance.
CubatureRule build_rule(const std::string &method, int d, int k, int t, int n,
                        const OptimizerConfig &cfg, Rng rng, bool &converged) {
  if (k < 1 || k >= d)
    throw Error(ErrorCode::InvalidArgument,
                "require 1 <= k < d (got k = " + std::to_string(k) +
                    ", d = " + std::to_string(d) + ")");
  if (n < 1 || t < 1)
    throw Error(ErrorCode::InvalidArgument, "n and t must be positive");
  converged = true;
  if (method == "probabilistic")
    return probabilistic_rule(n, k, d, t, rng);
  if (method == "solve") {
    CubatureRule rule;
    rule.d = d;
    rule.k = k;
    rule.t = t;
    for (int j = 0; j < n; ++j)
      rule.nodes.push_back(haar_sample(d, k, rng));
    rule.weights = solve_weights(rule.nodes, t, rng).weights;
    certify(rule);
    return rule;
  }
  auto res = minimize_potential(n, k, d, t, cfg, rng);
  converged = res.converged;
  return std::move(res.rule);
}

/// Numerical dim Pol_t(G_{k,d}): rank of the kernel matrix <P_i, P_j>^t over
/// Haar nodes, doubling the node count until the rank saturates.
int polynomial_space_dim(int k, int d, int t, Rng rng) {
  for (int m = 32;; m *= 2) {
    std::vector<Projector> nodes;
    for (int j = 0; j < m; ++j)
      nodes.push_back(haar_sample(d, k, rng));
    const int rank = kernel_weights(nodes, t).rank;
    if (rank < m || m >= 4096)
      return rank;
  }
}

/// Shared by `fuse`, `simulate` and the demo generator.
MomentTensor fuse_with(const std::string &mode, const CubatureRule &rule,
                       const ProjectedMomentSet &projected, int t, double tol) {
  if (mode == "sphere")
    return reconstruct_sphere(rule, projected, t, tol);
  if (mode == "general")
    return reconstruct_general(rule, projected, t, tol);
  if (mode == "rank1")
    return reconstruct_rank1(rule, projected, t, tol);
  throw Error(ErrorCode::InvalidArgument, "unknown fusion mode '" + mode + "'");
}

CubatureRule load_rule(const std::string &path) {
  CubatureRule rule = io::rule_from_json(io::read_json_file(path));
  // Stored gaps are informational; fusion trusts only a fresh certificate.
  certify_all_below(rule);
  return rule;
}

Json degree_errors(const MomentTensor &est, const MomentTensor &ref,
                   double &max_err) {
  Json per = Json::array();
  max_err = 0;
  for (int s = 1; s <= est.max_degree(); ++s) {
    const double e = est.max_abs_diff(ref, s, s);
    max_err = std::max(max_err, e);
    per.push_back(Json{{"degree", s}, {"max_abs_error", e}});
  }
  return per;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << std::scientific << x;
  return os.str();
}

// build-cubature -------------------------------------------------------------

struct BuildArgs {
  int d = 0, k = 0, t = 0, n = 0;
  std::string method = "minimize";
  std::uint64_t seed = 0;
  std::string out;
  int restarts = 10;
  int max_iters = 5000;
  double tol = 1e-8;
  std::string weights = "uniform";
  bool all_below = false;
};

int cmd_build(const BuildArgs &a, std::ostream &out, std::ostream &err) {
  OptimizerConfig cfg;
  cfg.restarts = a.restarts;
  cfg.max_iters = a.max_iters;
  cfg.tol_gap = a.tol;
  cfg.weight_mode = parse_weight_mode(a.weights);
  bool converged = true;
  CubatureRule rule =
      build_rule(a.method, a.d, a.k, a.t, a.n, cfg, Rng(a.seed), converged);
  if (a.all_below)
    certify_all_below(rule);
  const bool ok = a.method == "probabilistic" || rule.gap <= a.tol;
  Json j = io::to_json(rule);
  if (!ok)
    j["converged"] = false;
  const Json config{{"command", "build-cubature"}, {"d", a.d},
                    {"k", a.k},   {"t", a.t},
                    {"n", a.n},   {"method", a.method},
                    {"seed", a.seed}, {"restarts", a.restarts},
                    {"max_iters", a.max_iters}, {"tol", a.tol},
                    {"weights", a.weights}, {"certify_all_below", a.all_below}};
  emit(a.out, io::dump(j), config, out);
  err << "gap " << fmt(rule.gap) << (ok ? "" : " exceeds --tol") << '\n';
  return ok ? kOk : kNotConverged;
}

// verify-cubature ------------------------------------------------------------

int cmd_verify(const std::string &path, bool all_below, bool as_json,
               std::ostream &out) {
  CubatureRule rule = io::rule_from_json(io::read_json_file(path));
  const double stored = rule.gap;
  if (all_below)
    certify_all_below(rule);
  else
    certify(rule);
  std::map<int, double> gaps = rule.gaps_by_degree;
  if (gaps.empty())
    gaps[rule.t] = rule.gap;

  if (as_json) {
    Json degrees = Json::array();
    for (const auto &[s, g] : gaps)
      degrees.push_back(
          Json{{"t", s}, {"gap", g}, {"epsilon", std::sqrt(std::max(g, 0.0))}});
    out << io::dump(Json{{"d", rule.d},
                         {"k", rule.k},
                         {"t", rule.t},
                         {"n", rule.size()},
                         {"stored_gap", std::isfinite(stored) ? Json(stored) : Json()},
                         {"degrees", std::move(degrees)}});
    return kOk;
  }
  out << "d " << rule.d << "  k " << rule.k << "  t " << rule.t << "  n "
      << rule.size() << '\n'
      << "degree  gap            epsilon\n";
  for (const auto &[s, g] : gaps)
    out << std::setw(6) << s << "  " << fmt(g) << "  "
        << fmt(std::sqrt(std::max(g, 0.0))) << '\n';
  return kOk;
}

// project --------------------------------------------------------------------

int cmd_project(const std::string &source, const std::string &target, int p,
                const std::string &convention, const std::string &out_path,
                std::ostream &out) {
  const Json tj = io::read_json_file(target);
  MeasurementEnsemble ens;
  if (tj.contains("nodes"))
    ens = ensemble_of(io::rule_from_json(tj).nodes);
  else if (tj.contains("matrices"))
    ens = io::ensemble_from_json(tj);
  else
    throw Error(ErrorCode::ParseError,
                "target must be a rule or a measurement ensemble");
  if (p < 1)
    throw Error(ErrorCode::InvalidArgument, "--p must be positive");

  ProjectedMomentSet set;
  if (ends_with(source, ".csv")) {
    std::ifstream in(source);
    if (!in)
      throw Error(ErrorCode::InvalidArgument, "cannot read '" + source + "'");
    set = project_moments(io::read_csv(in), ens, p, parse_convention(convention));
  } else {
    set = project_moments(io::distribution_from_json(io::read_json_file(source)),
                          ens, p, parse_convention(convention));
  }
  const Json config{{"command", "project"}, {"source", source},
                    {"target", target},     {"p", p},
                    {"convention", convention}};
  emit(out_path, io::dump(io::to_json(set)), config, out);
  return kOk;
}

// fuse -----------------------------------------------------------------------

int cmd_fuse(const std::string &projected_path, const std::string &rule_path,
             int t, const std::string &mode, double tol,
             const std::string &out_path, std::ostream &out,
             std::ostream &err) {
  const ProjectedMomentSet projected =
      io::projected_from_json(io::read_json_file(projected_path));
  if (mode == "sphere" && !projected.sphere_supported) {
    err << "warning: sphere mode needs sphere-flagged projected moments; "
           "use --mode general for laws off the unit sphere\n";
    return kValidation;
  }
  MomentTensor result;
  int used_t = t;
  if (mode == "spanning") {
    const Json j = io::read_json_file(rule_path);
    const MeasurementEnsemble ens = j.contains("nodes")
                                        ? ensemble_of(io::rule_from_json(j).nodes)
                                        : io::ensemble_from_json(j);
    if (used_t == 0)
      used_t = projected.p;
    result = spanning_reconstruct(ens, projected, used_t);
  } else {
    const CubatureRule rule = load_rule(rule_path);
    if (used_t == 0)
      used_t = std::min(rule.t, projected.p);
    result = fuse_with(mode, rule, projected, used_t, tol);
  }
  if (result.approximate)
    err << "note: rule gap exceeds tolerance, result is approximate (epsilon "
        << fmt(result.epsilon) << ")\n";
  const Json config{{"command", "fuse"}, {"projected", projected_path},
                    {"rule", rule_path}, {"t", used_t},
                    {"mode", mode},      {"tol", tol}};
  emit(out_path, io::dump(io::to_json(result)), config, out);
  return kOk;
}

// simulate -------------------------------------------------------------------

struct SimArgs {
  std::string law = "uniform_sphere";
  int d = 4, k = 2, t = 3;
  int n_rule = 0;
  std::size_t n_samples = 100000;
  std::uint64_t seed = 0;
  std::string method = "solve";
  std::string mode = "auto";
  double tol = 1e-8;
  std::string out;
  bool json = false;
};

int cmd_simulate(SimArgs a, std::ostream &out) {
  if (a.k < 1 || a.k >= a.d)
    throw Error(ErrorCode::InvalidArgument, "require 1 <= k < d");
  Rng root(a.seed);
  // Independent streams: rule, law, samples.
  Rng rule_rng = root.split(0), law_rng = root.split(1),
      sample_rng = root.split(2);

  std::optional<DiscreteDistribution> atoms;
  MomentTensor truth;
  bool sphere = false;
  if (a.law == "atoms") {
    atoms = random_atoms(a.d, 50, false, law_rng);
    truth = true_moments(*atoms, a.t);
  } else {
    const NamedLaw law = parse_law(a.law);
    truth = law_moments(law, a.d, a.t);
    sphere = law == NamedLaw::UniformSphere;
  }

  if (a.mode == "auto")
    a.mode = a.t > 3 ? "rank1" : sphere ? "sphere" : "general";
  if (a.n_rule == 0)
    a.n_rule = static_cast<int>(
        std::ceil(1.25 * polynomial_space_dim(a.k, a.d, a.t, root.split(3))));
  bool converged = true;
  OptimizerConfig cfg;
  CubatureRule rule =
      build_rule(a.method, a.d, a.k, a.t, a.n_rule, cfg, rule_rng, converged);
  certify_all_below(rule);

  ProjectedMomentSet projected;
  MomentTensor reference = truth;
  if (a.n_samples == 0) {
    projected.convention = Convention::QX;
    projected.p = a.t;
    projected.sphere_supported = sphere;
    for (const auto &node : rule.nodes)
      projected.tensors.push_back(linear_image(node.measurement(), truth, a.t));
  } else {
    const SampleBatch batch =
        atoms ? sample(*atoms, a.n_samples, sample_rng)
              : sample(parse_law(a.law), a.d, a.n_samples, sample_rng);
    projected = project_moments(batch, rule.nodes, a.t, Convention::QX);
    projected.sphere_supported = sphere;
    reference = estimate_moments(batch, a.t);
  }
  const MomentTensor est = fuse_with(a.mode, rule, projected, a.t, a.tol);

  double max_truth = 0, max_sample = 0;
  Json per_truth = degree_errors(est, truth, max_truth);
  Json per_sample = degree_errors(est, reference, max_sample);
  const double gap = rule.gap;
  const Json report{
      {"law", a.law},
      {"d", a.d},
      {"k", a.k},
      {"t", a.t},
      {"mode", a.mode},
      {"method", a.method},
      {"n_rule", a.n_rule},
      {"n_samples", a.n_samples},
      {"seed", a.seed},
      {"rule_gap", gap},
      {"epsilon", std::sqrt(std::max(gap, 0.0))},
      {"max_error_vs_truth", max_truth},
      {"errors_vs_truth", per_truth},
      {"max_error_vs_sample_moments", max_sample},
      {"errors_vs_sample_moments", per_sample},
      {"error_over_sqrt_gap",
       gap > 0 ? Json(max_sample / std::sqrt(gap)) : Json()}};

  if (a.json) {
    out << io::dump(report);
  } else {
    out << "law " << a.law << "  d " << a.d << "  k " << a.k << "  t " << a.t
        << "  mode " << a.mode << "\nrule n " << a.n_rule << "  gap "
        << fmt(gap) << "\n"
        << "degree  err_vs_truth   err_vs_samples\n";
    for (int s = 1; s <= a.t; ++s)
      out << std::setw(6) << s << "  "
          << fmt(per_truth[s - 1]["max_abs_error"].get<double>()) << "  "
          << fmt(per_sample[s - 1]["max_abs_error"].get<double>()) << '\n';
  }
  if (!a.out.empty()) {
    Json config{{"command", "simulate"}, {"law", a.law},
                {"d", a.d},              {"k", a.k},
                {"t", a.t},              {"n_rule", a.n_rule},
                {"n_samples", a.n_samples}, {"seed", a.seed},
                {"method", a.method},    {"mode", a.mode},
                {"tol", a.tol}};
    io::write_json_file(a.out, report);
    io::write_json_file(a.out + ".config.json", config);
  }
  return converged ? kOk : kNotConverged;
}

// oracle ---------------------------------------------------------------------

struct OracleArgs {
  std::string what = "mu";
  int d = 4, k = 2, t = 2;
  std::size_t n = 200000;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int oracle_mu(const OracleArgs &a, std::ostream &out) {
  Rng rng(a.seed);
  Vector x(a.d), y(a.d);
  for (int i = 0; i < a.d; ++i) {
    x(i) = rng.normal();
    y(i) = rng.normal();
  }
  const SymMatrix m = e_matrix(x, y);
  const std::vector<SymMatrix> ms(a.t, m);
  const McEstimate mc = mc_trace_moment(ms, a.k, a.d, a.n, rng.split(1));
  const double exact = mu_t(m, a.k, a.t);
  const double diff = std::abs(mc.estimate - exact);
  const bool pass = diff <= std::max(1e-2 * std::abs(exact), 3 * mc.std_error);
  out << io::dump(Json{{"what", "mu"},
                       {"d", a.d},
                       {"k", a.k},
                       {"t", a.t},
                       {"closed_form", exact},
                       {"monte_carlo", mc.estimate},
                       {"std_error", mc.std_error},
                       {"pass", pass}});
  return pass ? kOk : kValidation;
}

int oracle_lambda(const OracleArgs &a, std::ostream &out) {
  Rng rng(a.seed);
  const Projector q = haar_sample(a.d, a.k, rng);
  const Matrix ip =
      haar_inner_products({SymMatrix(q.matrix())}, a.k, a.n, rng.split(1));
  const Vector vals = ip.col(0).array().pow(a.t);
  const McEstimate mc = mean_with_stderr(vals);
  const double exact = lambda_t(a.k, a.d, a.t);
  const double diff = std::abs(mc.estimate - exact);
  const bool pass = diff <= std::max(1e-2 * exact, 3 * mc.std_error);
  out << io::dump(Json{{"what", "lambda"},
                       {"d", a.d},
                       {"k", a.k},
                       {"t", a.t},
                       {"closed_form", exact},
                       {"monte_carlo", mc.estimate},
                       {"std_error", mc.std_error},
                       {"pass", pass}});
  return pass ? kOk : kValidation;
}

int oracle_identity(const OracleArgs &a, std::ostream &out) {
  Rng rng(a.seed);
  const auto set = MultiIndexSet::get(a.d, a.t);
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Vector x(a.d);
    for (int i = 0; i < a.d; ++i)
      x(i) = rng.normal();
    for (std::size_t i = 1; i < set->size(); ++i) {
      const MultiIndex &s = (*set)[i];
      double v = 0;
      for (const auto &term : polarize(s))
        v += term.coefficient * std::pow(x.dot(term.direction), s.degree());
      const double ref = s.evaluate(x);
      worst = std::max(worst, std::abs(v - ref) / (1 + std::abs(ref)));
    }
  }
  const bool pass = worst <= 1e-10;
  out << io::dump(Json{{"what", "identity"},
                       {"d", a.d},
                       {"t", a.t},
                       {"max_relative_error", worst},
                       {"pass", pass}});
  return pass ? kOk : kValidation;
}

/// Demo inputs for `fuse` and the expected output, checked against the
/// brute-force moments of the demo law before anything is written.
int oracle_demo(const OracleArgs &a, std::ostream &out) {
  if (a.out_dir.empty())
    throw Error(ErrorCode::InvalidArgument, "--out-dir is required for demo");
  Rng rng(a.seed);
  const DiscreteDistribution law = random_atoms(3, 8, true, rng);
  bool converged = true;
  CubatureRule rule = build_rule("solve", 3, 1, 3, 40, OptimizerConfig{},
                                 rng.split(1), converged);
  // Round-trip through text so the fused output matches a fresh `fuse` run.
  rule = io::rule_from_json(io::parse(io::dump(io::to_json(rule))));
  const ProjectedMomentSet projected = io::projected_from_json(io::parse(
      io::dump(io::to_json(project_moments(law, rule.nodes, 3, Convention::QX)))));
  certify_all_below(rule);
  const MomentTensor fused = fuse_with("sphere", rule, projected, 3, 1e-8);
  const MomentTensor truth = true_moments(law, 3);
  const double err = fused.max_abs_diff(truth, 1, 3);
  if (!(err <= 1e-8))
    throw Error(ErrorCode::InvariantViolated,
                "demo fusion misses the oracle by " + fmt(err));
  const std::string dir = a.out_dir + "/";
  io::write_json_file(dir + "demo_law.json", io::to_json(law));
  io::write_json_file(dir + "demo_rule.json", io::to_json(rule));
  io::write_json_file(dir + "demo_projected.json", io::to_json(projected));
  io::write_json_file(dir + "demo_expected.json", io::to_json(fused));
  io::write_json_file(dir + "demo_truth.json", io::to_json(truth));
  out << io::dump(Json{{"what", "demo"}, {"max_error_vs_truth", err}});
  return kOk;
}

int cmd_oracle(const OracleArgs &a, std::ostream &out) {
  if (a.what == "mu")
    return oracle_mu(a, out);
  if (a.what == "lambda")
    return oracle_lambda(a, out);
  if (a.what == "identity")
    return oracle_identity(a, out);
  return oracle_demo(a, out);
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"Moment fusion from projected moments via Grassmannian cubature",
               "momfuse"};
  app.require_subcommand(1);

  BuildArgs build;
  auto *b = app.add_subcommand("build-cubature", "Construct and certify a rule");
  b->add_option("--d", build.d)->required();
  b->add_option("--k", build.k)->required();
  b->add_option("--t", build.t)->required();
  b->add_option("--n", build.n)->required();
  b->add_option("--method", build.method)
      ->check(CLI::IsMember({"minimize", "solve", "probabilistic"}));
  b->add_option("--seed", build.seed);
  b->add_option("--out", build.out)->required();
  b->add_option("--restarts", build.restarts);
  b->add_option("--max-iters", build.max_iters);
  b->add_option("--tol", build.tol);
  b->add_option("--weights", build.weights, "minimize only")
      ->check(CLI::IsMember({"uniform", "optimize", "solve"}));
  b->add_flag("--certify-all-below", build.all_below);

  std::string verify_path;
  bool verify_all = false, verify_json = false;
  auto *v = app.add_subcommand("verify-cubature", "Recompute a rule's gaps");
  v->add_option("rule", verify_path)->required();
  v->add_flag("--t-all-below", verify_all);
  v->add_flag("--json", verify_json);

  std::string proj_source, proj_target, proj_conv = "PX", proj_out;
  int proj_p = 0;
  auto *pr = app.add_subcommand("project", "Moments of projected data");
  pr->add_option("source", proj_source, "law JSON or samples CSV")->required();
  pr->add_option("target", proj_target, "rule or ensemble JSON")->required();
  pr->add_option("--p", proj_p)->required();
  pr->add_option("--convention", proj_conv)
      ->check(CLI::IsMember({"PX", "QX"}));
  pr->add_option("--out", proj_out);

  std::string fuse_proj, fuse_rule, fuse_mode, fuse_out;
  int fuse_t = 0;
  double fuse_tol = kExactGapTol;
  auto *f = app.add_subcommand("fuse", "Reconstruct moments of X");
  f->add_option("projected", fuse_proj)->required();
  f->add_option("rule", fuse_rule, "rule JSON, or ensemble JSON for spanning")
      ->required();
  f->add_option("--t", fuse_t, "degree (default: rule t capped by p)");
  f->add_option("--mode", fuse_mode)
      ->required()
      ->check(CLI::IsMember({"sphere", "general", "rank1", "spanning"}));
  f->add_option("--tol", fuse_tol);
  f->add_option("--out", fuse_out);

  SimArgs sim;
  auto *s = app.add_subcommand("simulate", "Sample, project, fuse and compare");
  s->add_option("--law", sim.law)
      ->check(CLI::IsMember({"uniform_sphere", "gaussian", "dirichlet", "atoms"}));
  s->add_option("--d", sim.d);
  s->add_option("--k", sim.k);
  s->add_option("--t", sim.t);
  s->add_option("--n-rule", sim.n_rule, "0 picks a size from dim Pol_t");
  s->add_option("--n-samples", sim.n_samples, "0 uses exact projected moments");
  s->add_option("--seed", sim.seed);
  s->add_option("--method", sim.method)
      ->check(CLI::IsMember({"minimize", "solve", "probabilistic"}));
  s->add_option("--mode", sim.mode)
      ->check(CLI::IsMember({"auto", "sphere", "general", "rank1"}));
  s->add_option("--tol", sim.tol);
  s->add_option("--out", sim.out);
  s->add_flag("--json", sim.json);

  OracleArgs orc;
  auto *o = app.add_subcommand("oracle", "Monte Carlo and algebraic cross-checks");
  o->add_option("--what", orc.what)
      ->check(CLI::IsMember({"mu", "lambda", "identity", "demo"}));
  o->add_option("--d", orc.d);
  o->add_option("--k", orc.k);
  o->add_option("--t", orc.t);
  o->add_option("--n", orc.n);
  o->add_option("--seed", orc.seed);
  o->add_option("--out-dir", orc.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*b)
      return cmd_build(build, out, err);
    if (*v)
      return cmd_verify(verify_path, verify_all, verify_json, out);
    if (*pr)
      return cmd_project(proj_source, proj_target, proj_p, proj_conv, proj_out,
                         out);
    if (*f)
      return cmd_fuse(fuse_proj, fuse_rule, fuse_t, fuse_mode, fuse_tol,
                      fuse_out, out, err);
    if (*s)
      return cmd_simulate(sim, out);
    return cmd_oracle(orc, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::IllConditioned ? kNotConverged : kValidation;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

} // namespace mf::cli
