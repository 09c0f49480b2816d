// rmt-lab: command-line front end. Every subcommand computes its results in
// memory first, then writes its files and finally manifest.json, so a run
// that throws leaves no partial outputs behind.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rmtlab/equilibrium.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/kernels.hpp"
#include "rmtlab/model.hpp"
#include "rmtlab/simulator.hpp"
#include "rmtlab/special_functions.hpp"
#include "rmtlab/spectral_curve.hpp"
#include "rmtlab/uniformization.hpp"

#ifndef RMTLAB_VERSION
#define RMTLAB_VERSION "0.0.0"
#endif

using namespace rmtlab;
using json = nlohmann::ordered_json;

namespace {

struct OutputFile {
  std::string name, content;
};

struct Run {
  std::optional<std::uint64_t> seed;
  std::vector<OutputFile> files;
  std::string summary;  // echoed to stdout
  // Set when the outputs are a diagnostic of a failed check: they are still
  // written, and the run exits with status 1.
  std::string failure;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) {
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << "\n";
  }
  void row(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? "," : "") << num(v[i]);
    os_ << "\n";
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json complex_json(cdouble z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json params_json(const ModelParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"kappa", p.kappa}, {"nu", p.nu}, {"n", p.n}};
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("not a number in list: '" + item + "'");
    v.push_back(x);
  }
  if (v.empty()) throw std::invalid_argument("empty list");
  return v;
}

std::vector<std::pair<double, double>> parse_pairs(const std::string& s) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("pairs are written x:y, got '" + item + "'");
    const auto x = parse_list(item.substr(0, colon)), y = parse_list(item.substr(colon + 1));
    out.emplace_back(x.at(0), y.at(0));
  }
  if (out.empty()) throw std::invalid_argument("empty pair list");
  return out;
}

std::string density_column(Measure m) { return "d" + to_string(m) + "_dx"; }

// Subcommand state, filled by CLI11.
struct Options {
  double alpha = 1, beta = 2;
  int kappa = 0, nu = 0, n = 1;
  std::string out_dir = ".";

  double z_re = 10, z_im = 0;
  std::string side = "none";

  std::string which = "g2minus";
  int npoints = 200;

  std::string measure = "mu2";

  bool variational = false;

  std::string fn = "meijer";
  int m = 1, order = 0;
  std::string b_list = "0,0,0";
  double zeta = 1, x = 1, offset = 0;

  std::string mode = "hard-edge";
  int nu1 = 0, nu2 = 0;
  double y = 1;

  int trials = 40;
  std::uint64_t seed = 7;
  std::string sampler = "coupled";
  double tau = 1.0 / 3;

  std::string n_list = "4,6,8";
  std::string pairs = "0.5:0.5,1:1,1:2";
};

Side side_from_string(const std::string& s) {
  if (s == "none") return Side::none;
  if (s == "plus") return Side::plus;
  if (s == "minus") return Side::minus;
  throw std::invalid_argument("side must be none, plus or minus");
}

Run cmd_endpoints(const ModelParams& p) {
  const EndpointData e = endpoints(p);
  json j = {{"p", e.p}, {"q", e.q}, {"t_plus", e.t_plus}, {"t_minus", e.t_minus}, {"residuals", e.residuals}};
  return {std::nullopt, {{"endpoints.json", dump(j)}}, "p = " + num(e.p) + ", q = " + num(e.q)};
}

Run cmd_curve(const ModelParams& p, const Options& o) {
  const cdouble z(o.z_re, o.z_im);
  const BranchSet bs = solve_branches(p, z, side_from_string(o.side));
  const VietaResiduals v = vieta_residuals(p, bs);
  json xi = json::array();
  for (const cdouble& x : bs.xi) xi.push_back(complex_json(x));
  json j = {{"z", complex_json(z)},
            {"side", o.side},
            {"xi", xi},
            {"residuals",
             {{"sum_abs", v.sum_abs},
              {"pair_sum_rel", v.pair_sum_rel},
              {"triple_sum_rel", v.triple_sum_rel},
              {"product_rel", v.product_rel},
              {"max_quartic_residual", v.max_quartic_residual}}}};
  return {std::nullopt, {{"curve.json", dump(j)}}, "max quartic residual " + num(v.max_quartic_residual)};
}

Run cmd_contours(const ModelParams& p, const Options& o) {
  const Contour c = contour_from_string(o.which);
  if (o.npoints < 2) throw std::invalid_argument("--npoints must be at least 2");
  const ContourTrace tr = trace_gamma(p, c, contour_grid(p, c, o.npoints));
  Csv csv({"x", "t_re", "t_im", "z_residual"});
  double worst = 0;
  for (const ContourPoint& pt : tr.points) {
    csv.row({pt.x, pt.t.real(), pt.t.imag(), pt.z_residual});
    worst = std::max(worst, pt.z_residual);
  }
  return {std::nullopt, {{"contour_" + o.which + ".csv", csv.str()}},
          std::to_string(tr.points.size()) + " points, max z residual " + num(worst)};
}

Run cmd_density(const ModelParams& p, const Options& o) {
  const Measure m = measure_from_string(o.measure);
  if (o.npoints < 2) throw std::invalid_argument("--npoints must be at least 2");
  const DensityTable tab = Equilibrium(p).tabulate(m, o.npoints);
  Csv csv({"x", density_column(m)});
  for (const DensityRow& r : tab.rows) csv.row({r.x, r.density});
  json fits = tab.exponent_fits;
  json j = {{"measure", o.measure}, {"rows", tab.rows.size()}, {"exponent_fits", fits}};
  return {std::nullopt,
          {{"density_" + o.measure + ".csv", csv.str()}, {"density_" + o.measure + ".json", dump(j)}},
          std::to_string(tab.rows.size()) + " rows"};
}

Run cmd_verify(const ModelParams& p, const Options& o) {
  if (!o.variational) throw std::invalid_argument("verify: nothing selected (use --variational)");
  const VariationalReport r = variational_report(p);
  auto pairs = [](const std::vector<std::pair<double, double>>& v) {
    json a = json::array();
    for (const auto& [x, f] : v) a.push_back({x, f});
    return a;
  };
  json j = {{"ell", r.ell},
            {"spread_on_support", r.spread_on_support},
            {"support_values", pairs(r.support_values)},
            {"inequality_margins", pairs(r.inequality_margins)},
            {"mu3_equality_residuals", pairs(r.mu3_equality_residuals)},
            {"violations", r.violations}};
  Run run{std::nullopt, {{"variational.json", dump(j)}}, "ell = " + num(r.ell) + ", spread " + num(r.spread_on_support), ""};
  if (!r.violations.empty()) run.failure = "ViolationDetected: " + r.violations.front();
  return run;
}

Run cmd_special(const Options& o) {
  json j;
  std::string summary;
  if (o.fn == "meijer") {
    const auto b = parse_list(o.b_list);
    if (b.size() != 3) throw std::invalid_argument("--b needs three values");
    const MeijerSpec spec{o.m, {b[0], b[1], b[2]}};
    const MeijerValue v = meijer_g03(spec, o.zeta, {o.offset});
    j = {{"fn", "meijer"}, {"m", o.m}, {"b", b}, {"zeta", o.zeta}, {"contour_offset", o.offset},
         {"value", v.value}, {"error", v.error}, {"nodes", v.nodes}};
    if (o.m == 1) j["series_value"] = meijer_g03_series(spec, o.zeta);
    summary = "value " + num(v.value) + " error " + num(v.error);
  } else if (o.fn == "bessel_i" || o.fn == "bessel_k") {
    const double v = o.fn == "bessel_i" ? bessel_i(o.order, o.x) : bessel_k(o.order, o.x);
    j = {{"fn", o.fn}, {"order", o.order}, {"x", o.x}, {"value", v}};
    summary = "value " + num(v);
  } else if (o.fn == "wronskian") {
    const BesselPair bp = bessel_pair(o.order, o.x);
    const double r = wronskian_residual(o.order, o.x);
    j = {{"fn", "wronskian"}, {"a", o.order}, {"z", o.x}, {"y1", bp.y1}, {"y1p", bp.y1p}, {"y2", bp.y2},
         {"y2p", bp.y2p}, {"relative_residual", r}};
    summary = "relative residual " + num(r);
  } else {
    throw std::invalid_argument("--fn must be meijer, bessel_i, bessel_k or wronskian");
  }
  return {std::nullopt, {{"special.json", dump(j)}}, summary};
}

Run cmd_kernel(const ModelParams& p, const Options& o) {
  json j;
  std::string summary;
  if (o.mode == "hard-edge") {
    const HardEdgeValue v = hard_edge_kernel(o.nu1, o.nu2, o.x, o.y);
    j = {{"route", to_string(KernelRoute::hard_edge_limit)}, {"nu1", o.nu1}, {"nu2", o.nu2}, {"x", o.x}, {"y", o.y},
         {"value", v.value}, {"gauss_doubling", v.gauss_doubling}, {"trapezoid", v.trapezoid}};
    summary = "K = " + num(v.value);
  } else if (o.mode == "finite-n") {
    const GramMatrix g = gram_matrix(p);
    const KernelEval e = finite_n_kernel(p, g, o.x, o.y);
    j = {{"route", to_string(e.route)}, {"x", e.x}, {"y", e.y}, {"value", e.value},
         {"gram_condition_estimate", g.condition_estimate}, {"gram", g.entries}};
    summary = "K_n = " + num(e.value);
  } else {
    throw std::invalid_argument("--mode must be hard-edge or finite-n");
  }
  return {std::nullopt, {{"kernel.json", dump(j)}}, summary};
}

Run cmd_simulate(const ModelParams& p, const Options& o) {
  EnsembleStats st;
  if (o.sampler == "coupled") {
    st = run_ensemble(p, o.trials, o.seed);
  } else if (o.sampler == "tau") {
    if (p.kappa != 0) throw std::invalid_argument("the tau sampler has kappa = 0");
    st = run_tau_ensemble(p.n, p.nu, o.tau, o.trials, o.seed);
  } else {
    throw std::invalid_argument("--sampler must be coupled or tau");
  }
  Csv csv({"sq_singular_value_over_n2"});
  for (double v : st.values) csv.row({v});
  json j = {{"params", params_json(st.params)},
            {"sampler", to_string(st.sampler)},
            {"trials", st.trials},
            {"seed", st.seed},
            {"count", st.values.size()},
            {"ks_distance", st.ks_distance},
            {"moments", st.moments},
            {"moment_stderr", st.moment_stderr}};
  if (st.sampler == Sampler::tau) j["tau"] = o.tau;
  return {o.seed, {{"ensemble.json", dump(j)}, {"ensemble_values.csv", csv.str()}}, "KS distance " + num(st.ks_distance)};
}

Run cmd_compare(const ModelParams& p, const Options& o) {
  std::vector<int> ns;
  for (double v : parse_list(o.n_list)) {
    if (v != std::floor(v) || v < 1) throw std::invalid_argument("--n-list holds positive integers");
    ns.push_back(static_cast<int>(v));
  }
  json verdict = json::array();
  std::string summary;
  if (o.mode == "global") {
    const double pe = Equilibrium(p).ends().p;
    std::vector<double> grid;
    for (int k = 1; k <= o.npoints; ++k) grid.push_back(pe * k / (o.npoints + 1));
    Csv csv({"n", "x", "n_K_n_diag_n2x", "dmu2_dx", "deviation"});
    std::vector<std::vector<double>> dev(grid.size());
    for (int n : ns) {
      ModelParams q = p;
      q.n = n;
      for (std::size_t i = 0; const GlobalRow& r : check_global_limit(q, grid)) {
        csv.row({static_cast<double>(n), r.x, r.scaled, r.density, r.deviation});
        dev[i++].push_back(r.deviation);
      }
    }
    int down = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const bool d = strictly_decreasing(dev[i]);
      down += d;
      verdict.push_back({{"x", grid[i]}, {"deviations", dev[i]}, {"strictly_decreasing", d}});
    }
    summary = std::to_string(down) + " of " + std::to_string(grid.size()) + " points strictly decreasing in n";
    return {std::nullopt, {{"compare_global.csv", csv.str()}, {"compare_global.json", dump({{"n", ns}, {"points", verdict}})}},
            summary};
  }
  if (o.mode == "hard-edge") {
    const auto pairs = parse_pairs(o.pairs);
    Csv csv({"n", "x", "y", "scaled_K_n", "limit_K_nu_kappa", "deviation"});
    std::vector<std::vector<double>> dev(pairs.size());
    for (int n : ns) {
      ModelParams q = p;
      q.n = n;
      for (std::size_t i = 0; const HardEdgeRow& r : check_hard_edge(q, pairs)) {
        csv.row({static_cast<double>(n), r.x, r.y, r.scaled, r.limit, r.deviation});
        dev[i++].push_back(r.deviation);
      }
    }
    int down = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const bool d = strictly_decreasing(dev[i]);
      down += d;
      verdict.push_back({{"x", pairs[i].first}, {"y", pairs[i].second}, {"deviations", dev[i]}, {"strictly_decreasing", d}});
    }
    summary = std::to_string(down) + " of " + std::to_string(pairs.size()) + " pairs strictly decreasing in n";
    return {std::nullopt,
            {{"compare_hard_edge.csv", csv.str()}, {"compare_hard_edge.json", dump({{"n", ns}, {"pairs", verdict}})}},
            summary};
  }
  throw std::invalid_argument("--mode must be global or hard-edge");
}

void write_outputs(const std::filesystem::path& dir, const std::string& command, const ModelParams& p, const Run& run) {
  std::filesystem::create_directories(dir);
  json outs = json::array();
  for (const OutputFile& f : run.files) {
    std::ofstream os(dir / f.name, std::ios::binary);
    os << f.content;
    if (!os) throw std::runtime_error("cannot write " + (dir / f.name).string());
    outs.push_back({{"file", f.name}, {"sha256", sha256_hex(f.content)}});
  }
  json manifest = {{"command", command},
                   {"params", params_json(p)},
                   {"seed", run.seed ? json(*run.seed) : json(nullptr)},
                   {"tool_version", RMTLAB_VERSION},
                   {"outputs", outs}};
  std::ofstream ms(dir / "manifest.json", std::ios::binary);
  ms << dump(manifest);
  if (!ms) throw std::runtime_error("cannot write manifest.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the coupled two-matrix product model", "rmt-lab"};
  app.set_version_flag("--version", RMTLAB_VERSION);
  app.set_config("--config", "", "TOML file with the same keys as the flags; flags win");
  app.require_subcommand(1);
  // Model flags may follow the subcommand name.
  app.fallthrough();
  Options o;
  app.add_option("--alpha", o.alpha, "coupling alpha, 0 < alpha < beta");
  app.add_option("--beta", o.beta, "coupling beta");
  app.add_option("--kappa", o.kappa, "dimension offset kappa, 0 <= kappa <= nu");
  app.add_option("--nu", o.nu, "dimension offset nu");
  app.add_option("--n", o.n, "matrix size");
  app.add_option("--out-dir", o.out_dir, "directory for output files");

  auto* endpoints_cmd = app.add_subcommand("endpoints", "support endpoints p, q and critical points t+-");
  auto* curve = app.add_subcommand("curve", "the four branches of the spectral curve at z");
  curve->add_option("--z-re", o.z_re);
  curve->add_option("--z-im", o.z_im);
  curve->add_option("--side", o.side, "boundary value on a cut: none, plus, minus");
  auto* contours = app.add_subcommand("contours", "trace a preimage contour in the t-plane");
  contours->add_option("--which", o.which, "g1plus, g1minus, g2plus, g2minus, g3plus, g3minus");
  contours->add_option("--npoints", o.npoints);
  auto* density = app.add_subcommand("density", "tabulate an equilibrium density");
  density->add_option("--measure", o.measure, "mu1, mu2, mu3, sigma, sigma_minus_mu1");
  density->add_option("--npoints", o.npoints);
  auto* verify = app.add_subcommand("verify", "check the variational conditions");
  verify->add_flag("--variational", o.variational);
  auto* special = app.add_subcommand("special", "Bessel and Meijer G evaluations");
  special->add_option("--fn", o.fn, "meijer, bessel_i, bessel_k, wronskian");
  special->add_option("--m", o.m, "number of numerator Gammas (1 to 3)");
  special->add_option("--b", o.b_list, "b1,b2,b3");
  special->add_option("--zeta", o.zeta);
  special->add_option("--offset", o.offset, "contour shift to the right");
  special->add_option("--order", o.order, "Bessel order (a for the Wronskian)");
  special->add_option("--x", o.x, "Bessel argument (z for the Wronskian)");
  auto* kernel = app.add_subcommand("kernel", "hard-edge limit kernel or finite-n kernel");
  kernel->add_option("--mode", o.mode, "hard-edge or finite-n");
  kernel->add_option("--nu1", o.nu1);
  kernel->add_option("--nu2", o.nu2);
  kernel->add_option("--x", o.x);
  kernel->add_option("--y", o.y);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo ensemble of squared singular values");
  simulate->add_option("--trials", o.trials);
  simulate->add_option("--seed", o.seed);
  simulate->add_option("--sampler", o.sampler, "coupled or tau");
  simulate->add_option("--tau", o.tau, "tau in (0, 1) for the tau sampler");
  auto* compare = app.add_subcommand("compare", "finite-n kernel against the limit laws");
  compare->add_option("--mode", o.mode, "global or hard-edge");
  compare->add_option("--n-list", o.n_list, "comma-separated n values");
  compare->add_option("--npoints", o.npoints, "global mode: grid x = p k/(npoints + 1)");
  compare->add_option("--pairs", o.pairs, "hard-edge mode: x:y,x:y,...");
  // Per-command defaults that differ from the shared ones.
  compare->preparse_callback([&](std::size_t) {
    o.mode = "global";
    o.npoints = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    const ModelParams p = make_params(o.alpha, o.beta, o.kappa, o.nu, o.n);
    Run run;
    if (sub == endpoints_cmd) run = cmd_endpoints(p);
    else if (sub == curve) run = cmd_curve(p, o);
    else if (sub == contours) run = cmd_contours(p, o);
    else if (sub == density) run = cmd_density(p, o);
    else if (sub == verify) run = cmd_verify(p, o);
    else if (sub == special) run = cmd_special(o);
    else if (sub == kernel) run = cmd_kernel(p, o);
    else if (sub == simulate) run = cmd_simulate(p, o);
    else run = cmd_compare(p, o);
    write_outputs(o.out_dir, command, p, run);
    std::cout << command << ": " << run.summary << "\n";
    if (!run.failure.empty()) {
      std::cerr << "rmt-lab " << command << ": " << run.failure << "\n";
      return 1;
    }
    return 0;
  } catch (const RejectedParams& e) {
    std::cerr << "rmt-lab " << command << ": rejected parameters: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "rmt-lab " << command << ": invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rmt-lab " << command << ": " << e.what() << "\n";
    return 1;
  }
}
