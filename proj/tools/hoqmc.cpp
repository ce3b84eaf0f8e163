// hoqmc: construct interlaced Chen-Skriganov nets, audit their dual nets,
// evaluate Walsh coefficients and worst-case errors, run convergence sweeps.
//
// Exit codes: 0 success, 1 rejected input or bad flags, 2 size guard hit.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hoqmc/hoqmc.hpp"
#include "json_config.hpp"

namespace {

using namespace hoqmc;

constexpr std::uint64_t kDefaultPointsLimit = std::uint64_t{1} << 20;

std::optional<std::uint64_t> env_limit(const char* name) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(raw, &used);
    if (used != std::string(raw).size() || v == 0) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput(std::string(name) + " must be a positive integer, got '" + raw + "'");
  }
}

std::uint64_t dual_limit() { return env_limit("HOQMC_MAX_DUAL").value_or(kDefaultDualLimit); }

void emit(const Json& j) { std::cout << j.dump(2) << '\n'; }

struct NetSource {
  std::string path;

  void add_to(CLI::App* app) {
    app->add_option("--net-file", path, "Net JSON file (default: read stdin)")->check(CLI::ExistingFile);
  }

  DigitalNet load() const {
    std::string text;
    if (path.empty()) {
      text.assign(std::istreambuf_iterator<char>(std::cin), {});
    } else {
      std::ifstream in(path);
      if (!in) throw InvalidInput("cannot open " + path);
      text.assign(std::istreambuf_iterator<char>(in), {});
    }
    return net_from_json(net_from_text_json(text));
  }
};

struct ParamFlags {
  unsigned s = 1, alpha = 2, beta = 4, g = 1, w = 1;
  std::uint32_t b = 2;
  std::vector<Elem> betas;
  bool relaxed = false;

  void add_to(CLI::App* app, bool with_w = true) {
    app->add_option("--b", b, "Prime base")->required();
    app->add_option("--s", s, "Dimension")->capture_default_str();
    app->add_option("--alpha", alpha, "Smoothness alpha")->capture_default_str();
    app->add_option("--beta", beta, "Interlacing factor beta")->capture_default_str();
    app->add_option("--g", g, "Chen-Skriganov block count g")->capture_default_str();
    if (with_w) app->add_option("--w", w, "Block width w (N = b^(g w))")->capture_default_str();
    app->add_option("--betas", betas, "beta*g*s distinct field elements (default 0,1,2,...)")->delimiter(',');
    app->add_flag("--relaxed", relaxed, "Allow parameters outside the optimal-order hypotheses");
  }

  ConstructionParams params() const {
    ConstructionParams p;
    p.s = s;
    p.alpha = alpha;
    p.beta = beta;
    p.g = g;
    p.w = w;
    p.b = PrimeBase(b);
    p.betas = betas;
    p.strict = !relaxed;
    return p;
  }
};

WceMethod parse_method(const std::string& m) {
  if (m == "exact") return WceMethod::ExactKernelSum;
  if (m == "dual") return WceMethod::TruncatedDualSum;
  throw InvalidInput("--method must be exact or dual");
}

// The Chen-Skriganov base net alone, tagged with the beta = 1 view of its
// parameters so that metric bounds read g+1 and gw+1.
DigitalNet base_net(const ConstructionParams& p) {
  p.validate();
  const auto betas = p.effective_betas();
  auto q = chen_skriganov(p.b, p.beta * p.s, p.g, p.w, betas, p.strict);
  ConstructionParams view = p;
  view.s = p.beta * p.s;
  view.beta = 1;
  view.betas = betas;
  view.strict = false;
  q.set_params(view);
  return q;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order digital nets: construction, dual-net audits, Walsh coefficients, worst-case errors"};
  app.require_subcommand(1);
  // --config is accepted after any subcommand and handled here
  app.set_config("--config", "", "JSON file whose keys mirror flag names; flags win");
  app.config_formatter(std::make_shared<cli::JsonConfig>(&app));
  app.fallthrough();

  // construct
  ParamFlags construct_flags;
  bool base_only = false;
  auto* construct = app.add_subcommand("construct", "Build an interlaced Chen-Skriganov net; prints net JSON");
  construct_flags.add_to(construct);
  construct->add_flag("--base-net", base_only, "Emit the order-1 Chen-Skriganov net before interlacing");

  // points
  NetSource points_src;
  bool rational = false, decimal = false;
  auto* points = app.add_subcommand("points", "Print the points of a net as CSV, one row per point");
  points_src.add_to(points);
  auto* rat_flag = points->add_flag("--rational", rational, "Exact numerator/b^n values (default)");
  points->add_flag("--decimal", decimal, "Decimal floating-point values")->excludes(rat_flag);

  // metrics
  NetSource metrics_src;
  unsigned metrics_alpha = 0;
  auto* metrics = app.add_subcommand("metrics", "Minimum Hamming/NRT/Dick metrics of the dual net; prints JSON");
  metrics_src.add_to(metrics);
  metrics->add_option("--alpha", metrics_alpha, "Largest Dick order to measure (default: max(2, beta))");

  // walsh
  std::uint32_t walsh_b = 2;
  unsigned walsh_alpha = 2;
  std::vector<std::string> walsh_k, walsh_l;
  auto* walsh = app.add_subcommand("walsh", "Kernel Walsh coefficient K_hat_alpha(k, l); prints {re, im, abs_error}");
  walsh->add_option("--b", walsh_b, "Prime base")->required();
  walsh->add_option("--alpha", walsh_alpha, "Smoothness alpha")->capture_default_str();
  walsh->add_option("--k", walsh_k, "Index k (decimal; comma-separated for s > 1)")->required()->delimiter(',');
  walsh->add_option("--l", walsh_l, "Index l (decimal; comma-separated for s > 1)")->required()->delimiter(',');

  // wce
  NetSource wce_src;
  unsigned wce_alpha = 2, workers = 1;
  std::string wce_method = "exact";
  std::optional<unsigned> radius;
  bool wce_rational = false, allow_large = false;
  auto* wce = app.add_subcommand("wce", "Worst-case error of a net; prints WceReport JSON");
  wce_src.add_to(wce);
  wce->add_option("--alpha", wce_alpha, "Smoothness alpha")->capture_default_str();
  wce->add_option("--method", wce_method, "exact (kernel double sum) or dual (truncated dual sum)")
      ->check(CLI::IsMember({"exact", "dual"}))
      ->capture_default_str();
  wce->add_option("--radius", radius, "Dual method: per-coordinate digit radius (default n)");
  wce->add_flag("--rational", wce_rational, "Exact rational kernel sum (N <= 1024)");
  wce->add_option("--workers", workers, "Worker threads for the kernel sum")->capture_default_str();
  wce->add_flag("--allow-large", allow_large, "Permit N above the default point cap, up to 2^17");

  // bounds
  ParamFlags bounds_flags;
  std::optional<double> decay;
  auto* bounds = app.add_subcommand("bounds", "Explicit main-part and discretization bound constants; prints JSON");
  bounds_flags.add_to(bounds);
  bounds->add_option("--decay", decay, "Use this kernel-decay constant instead of the measured one");

  // sweep
  ParamFlags sweep_flags;
  unsigned w_min = 1, w_max = 1, sweep_workers = 1, replicas = 4;
  std::string sweep_method = "exact", output, baseline = "net";
  std::optional<unsigned> sweep_radius;
  std::uint64_t seed = 1;
  auto* sweep = app.add_subcommand("sweep", "Worst-case error over w; writes CSV w,N,e,log10N,log10e,slope");
  sweep_flags.add_to(sweep, /*with_w=*/false);
  sweep->add_option("--w-min", w_min, "First w")->required();
  sweep->add_option("--w-max", w_max, "Last w (inclusive)")->required();
  sweep->add_option("--method", sweep_method, "exact or dual")->check(CLI::IsMember({"exact", "dual"}))->capture_default_str();
  sweep->add_option("--radius", sweep_radius, "Dual method: digit radius (default n)");
  sweep->add_option("--workers", sweep_workers, "Worker threads for the kernel sum")->capture_default_str();
  sweep->add_option("--output", output, "CSV path (default stdout)");
  sweep->add_option("--baseline", baseline, "net, or mc for uniform random points of the same sizes")
      ->check(CLI::IsMember({"net", "mc"}))
      ->capture_default_str();
  sweep->add_option("--seed", seed, "Seed of the Monte Carlo baseline")->capture_default_str();
  sweep->add_option("--replicas", replicas, "Monte Carlo replicas per row (RMS)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (construct->parsed()) {
      const auto p = construct_flags.params();
      emit(to_json(base_only ? base_net(p) : construct_optimal_net(p)));
    } else if (points->parsed()) {
      const auto net = points_src.load();
      const auto cap = env_limit("HOQMC_MAX_N").value_or(kDefaultPointsLimit);
      if (net.log10_size() > std::log10(static_cast<double>(cap))) {
        throw GuardExceeded("point count", std::pow(10.0L, net.log10_size()), cap);
      }
      std::cout << points_csv(net, decimal ? PointFormat::Decimal : PointFormat::Rational);
    } else if (metrics->parsed()) {
      const auto net = metrics_src.load();
      std::optional<MetricBounds> mb;
      unsigned max_alpha = metrics_alpha;
      if (net.params()) {
        mb = metric_lower_bounds(*net.params());
        max_alpha = std::max(max_alpha, net.params()->beta);
      }
      max_alpha = std::max(max_alpha, 2u);
      emit(metrics_json(measure_metrics(net, max_alpha, dual_limit()), mb));
    } else if (walsh->parsed()) {
      const PrimeBase base(walsh_b);
      if (walsh_k.size() != walsh_l.size()) throw InvalidInput("--k and --l need the same number of components");
      std::vector<DigitVector> kc, lc;
      for (const auto& t : walsh_k) kc.push_back(DigitVector::from_decimal(base, t));
      for (const auto& t : walsh_l) lc.push_back(DigitVector::from_decimal(base, t));
      emit(to_json(kernel_walsh_coeff_sd(walsh_alpha, MultiIndex(kc), MultiIndex(lc))));
    } else if (wce->parsed()) {
      const auto net = wce_src.load();
      WceReport rep;
      if (parse_method(wce_method) == WceMethod::ExactKernelSum) {
        WceOptions opt;
        opt.workers = workers;
        opt.rational = wce_rational;
        opt.allow_large = allow_large;
        if (auto cap = env_limit("HOQMC_MAX_N")) {
          opt.max_points = *cap;
          opt.allow_large = true;
        }
        rep = wce_exact(net, wce_alpha, opt);
      } else {
        rep = wce_dual_truncated(net, wce_alpha, radius.value_or(static_cast<unsigned>(net.n())), dual_limit());
      }
      emit(to_json(rep));
    } else if (bounds->parsed()) {
      emit(to_json(discretization_bound(bounds_flags.params(), decay)));
    } else if (sweep->parsed()) {
      SweepConfig cfg;
      cfg.params = sweep_flags.params();
      cfg.w_min = w_min;
      cfg.w_max = w_max;
      cfg.method = sweep_method == "dual" ? SweepMethod::Dual : SweepMethod::Exact;
      cfg.radius = sweep_radius;
      cfg.wce.workers = sweep_workers;
      if (auto cap = env_limit("HOQMC_MAX_N")) {
        cfg.wce.max_points = *cap;
        cfg.wce.allow_large = true;
      }
      cfg.dual_limit = dual_limit();
      SweepResult result;
      if (baseline == "mc") {
        if (w_min == 0 || w_max < w_min) throw InvalidInput("w range must be nonempty with w >= 1");
        std::vector<std::uint64_t> counts;
        for (unsigned w = w_min; w <= w_max; ++w) {
          auto p = cfg.params;
          p.w = w;
          p.validate();
          std::uint64_t n = 1;
          for (unsigned i = 0; i < p.m(); ++i) n *= p.b.value();
          counts.push_back(n);
        }
        result = monte_carlo_sweep(counts, cfg.params.s, cfg.params.alpha, seed, replicas, cfg.wce);
        for (std::size_t i = 0; i < result.rows.size(); ++i) result.rows[i].w = w_min + static_cast<unsigned>(i);
      } else {
        result = run_sweep(cfg);
      }
      const std::string csv = sweep_csv(result);
      if (output.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(output, std::ios::binary);
        if (!out) throw InvalidInput("cannot write " + output);
        out << csv;
      }
      std::cerr << "fitted slope: " << result.slope << '\n';
    }
  } catch (const GuardExceeded& e) {
    std::cerr << "guard exceeded: " << e.what() << '\n';
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
