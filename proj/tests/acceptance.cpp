#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jdsmooth/estimators.hpp"
#include "jdsmooth/kernels.hpp"
#include "jdsmooth/mcstudy.hpp"
#include "jdsmooth/proxy.hpp"
#include "jdsmooth/simulate.hpp"
#include "oracles.hpp"

using namespace jdsmooth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

// Runs one criterion and prints a single result line. max_seconds <= 0 means no runtime bound.
void criterion(int id, const char* title, double max_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (max_seconds > 0 && secs >= max_seconds) {
    o.pass = false;
    o.detail += fmt("; exceeded %.0f s", max_seconds);
  }
  if (!o.pass) ++failures;
  std::printf("%s C%d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

void info(const std::string& line) {
  std::printf("INFO %s\n", line.c_str());
  std::fflush(stdout);
}

double simpson_moment(int power, int degree) {
  auto f = [&](double u) {
    const double v = oracle::gauss(u);
    return (power == 1 ? v : v * v) * std::pow(u, degree);
  };
  double total = 0;
  for (double a = -40.0; a < 40.0; a += 1.0) total += oracle::simpson(f, a, a + 1.0);
  return total;
}

Outcome kernel_moments() {
  const Kernel k = Kernel::gaussian();
  double worst = 0;
  for (int p = 1; p <= 2; ++p) {
    for (int j = 0; j <= (p == 1 ? 3 : 2); ++j) {
      const double closed = kernel_moment(k, p, j);
      worst = std::max({worst, std::abs(closed - simpson_moment(p, j)), std::abs(closed - quadrature_moment(k, p, j))});
    }
  }
  const double v = k.moments().k2[0];
  const bool ok = worst < 1e-10 && std::abs(v - 0.2820948) < 5e-8 && std::abs(k.moments().v - v) < 1e-14;
  return {ok, fmt("max |closed - quadrature| = %.2e, V = %.9f", worst, k.moments().v)};
}

Outcome affine_reproduction() {
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_int_distribution<int> size(30, 400);
  double worst_ll = 0, worst_nw = 0;
  int nw_misses = 0;
  for (int d = 0; d < 100; ++d) {
    RegressionDesign design;
    const int m = size(gen);
    const double spread = 0.2 + std::abs(unif(gen));
    for (int i = 0; i < m; ++i) {
      const double kp = spread * unif(gen);
      design.kernel_points.push_back(kp);
      design.regressors.push_back(d % 2 ? kp : kp + 0.1 * spread * unif(gen));
    }
    const double a = 3.0 * unif(gen), b = unif(gen) > 0 ? 1.0 + 4.0 * std::abs(unif(gen)) : -1.0 - 4.0 * std::abs(unif(gen));
    std::vector<double> resp;
    for (double z : design.regressors) resp.push_back(a + b * z);
    const double x = 0.5 * spread * unif(gen);
    const double h = 0.05 + 0.3 * spread * std::abs(unif(gen));
    EstimatorConfig cfg;
    cfg.bandwidth = h;
    const LocalFit ll = local_fit(design, resp, x, cfg);
    cfg.method = Method::nadaraya_watson;
    const LocalFit nw = local_fit(design, resp, x, cfg);
    if (!ll.defined || !nw.defined) return {false, fmt("design %d undefined", d)};
    const double e_ll = std::abs(ll.value - (a + b * x)), e_nw = std::abs(nw.value - (a + b * x));
    worst_ll = std::max(worst_ll, e_ll);
    worst_nw = std::max(worst_nw, e_nw);
    if (e_nw >= 1e-8) ++nw_misses;
  }
  return {worst_ll < 1e-8 && nw_misses >= 1,
          fmt("LL max error %.2e; NW misses %d/100 designs (max error %.3g)", worst_ll, nw_misses, worst_nw)};
}

Outcome second_moment_factor() {
  PathConfig pc;
  pc.n = 2000;
  pc.seed = 1;
  const SamplePath path = simulate_path(ModelSpec::mean_reverting(CompoundPoisson{}), pc);
  const ProxySeries xt = build_proxy(path.y, path.delta);
  const std::vector<double> grid{-0.1, -0.05, 0.0, 0.05, 0.1};
  EstimatorConfig cfg;
  cfg.bandwidth = 0.08;
  const CurveEstimate with = estimate_m(xt, grid, cfg, 1.5);
  const CurveEstimate without = estimate_m(xt, grid, cfg, 1.0);
  double worst = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(with.m_hat[i] / without.m_hat[i] - 1.5));
  return {worst < 0.0075, fmt("max |ratio - 1.5| = %.2e over %zu points", worst, grid.size())};
}

Outcome quantile_bias() {
  int passed = 0;
  std::string vals;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const McReport r = run_study(example_config(1, 10.0, 1000, 100, seed));
    const auto& ll = r.stats(Method::local_linear).bias_at_quantiles;
    const auto& nw = r.stats(Method::nadaraya_watson).bias_at_quantiles;
    const std::size_t q10 = 0, q90 = r.quantiles.size() - 1;
    const bool ok = std::abs(ll[q10]) < std::abs(nw[q10]) && std::abs(ll[q90]) < std::abs(nw[q90]) &&
                    std::abs(ll[q10]) >= 0.02 && std::abs(ll[q10]) <= 0.15;
    passed += ok;
    vals += fmt(" %+.3f/%+.3f%s", ll[q10], nw[q10], ok ? "" : "!");
  }
  return {passed >= 8, fmt("%d/10 seeds pass; bias at 10%% LL/NW:%s", passed, vals.c_str())};
}

Outcome rmse_across_n() {
  const std::size_t ns[] = {500, 1000, 2500};
  int inversions = 0, ordering_misses = 0;
  double sum2500 = 0, rep_sum[3] = {0, 0, 0};
  double mean_ll[3] = {0, 0, 0}, mean_nw[3] = {0, 0, 0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    double ll[3];
    for (int k = 0; k < 3; ++k) {
      const McReport r = run_study(example_config(1, 10.0, ns[k], 100, seed));
      ll[k] = r.stats(Method::local_linear).rmse;
      const double nw = r.stats(Method::nadaraya_watson).rmse;
      if (!(ll[k] < nw)) ++ordering_misses;
      mean_ll[k] += ll[k] / 10.0;
      mean_nw[k] += nw / 10.0;
      rep_sum[k] += r.stats(Method::local_linear).mean_replicate_rmse / 10.0;
    }
    if (ll[1] > ll[0] || ll[2] > ll[1]) ++inversions;
    sum2500 += ll[2];
  }
  const double m2500 = sum2500 / 10.0;
  info(fmt("C5 per-replicate RMSE-LL by n: %.4f %.4f %.4f", rep_sum[0], rep_sum[1], rep_sum[2]));
  const bool ok = inversions <= 1 && ordering_misses == 0 && m2500 >= 0.02 && m2500 <= 0.15;
  return {ok, fmt("RMSE-LL by n %.4f %.4f %.4f, RMSE-NW %.4f %.4f %.4f; repeats with inversion %d/10; LL>=NW in %d "
                  "runs; n=2500 RMSE-LL %.4f (band [0.02, 0.15])",
                  mean_ll[0], mean_ll[1], mean_ll[2], mean_nw[0], mean_nw[1], mean_nw[2], inversions, ordering_misses,
                  m2500)};
}

Outcome vg_rmse() {
  int ordered = 0;
  double sum_ll = 0, sum_nw = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const McReport r = run_study(example_config(2, 10.0, 2500, 100, seed));
    const double ll = r.stats(Method::local_linear).rmse, nw = r.stats(Method::nadaraya_watson).rmse;
    ordered += ll < nw;
    sum_ll += ll;
    sum_nw += nw;
  }
  const double m = sum_ll / 10.0;
  return {ordered >= 8 && m >= 0.02 && m <= 0.15,
          fmt("LL<NW in %d/10 seeds; mean RMSE-LL %.4f (band [0.02, 0.15]), RMSE-NW %.4f", ordered, m, sum_nw / 10.0)};
}

Outcome normality() {
  const double critical = 1.628 / std::sqrt(200.0);
  int passed = 0;
  std::string vals;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    McConfig c = example_config(1, 10.0, 1000, 200, seed);
    c.methods = {Method::local_linear};
    const McReport r = run_study(c);
    const double ks = qq_data(r.stats(Method::local_linear).at_fixed_x).ks;
    passed += ks < critical;
    vals += fmt(" %.3f", ks);
  }
  return {passed >= 8, fmt("%d/10 seeds below %.4f; KS:%s", passed, critical, vals.c_str())};
}

Outcome m_targets() {
  const double target1 = 0.1 + 2.0 * 0.036 * 0.036;
  const double target2 = 0.1 + 0.2 * 0.2 * 0.23 + 0.2 * 0.2;
  bool ok = std::abs(target1 - 0.102592) < 1e-12 && std::abs(target2 - 0.1492) < 1e-12;
  std::string detail;
  const double targets[] = {target1, target2};
  for (int ex = 1; ex <= 2; ++ex) {
    McConfig c = example_config(ex, 10.0, 2500, 100, 1);
    c.methods = {Method::local_linear};
    const McReport r = run_study(c);
    const double m = r.stats(Method::local_linear).mean_m_at_fixed_x;
    const double rel = m / targets[ex - 1] - 1.0;
    ok = ok && std::abs(r.m_target_at_fixed_x - targets[ex - 1]) < 1e-12 && std::abs(rel) <= 0.15;
    detail += fmt("%sexample %d M^(0) %.5f vs %.6f (%+.1f%%)", ex == 1 ? "" : "; ", ex, m, targets[ex - 1], 100 * rel);
  }
  return {ok, detail};
}

Outcome coverage() {
  McConfig c = example_config(1, 10.0, 1000, 200, 1);
  c.model = ModelSpec::mean_reverting();
  c.methods = {Method::local_linear};
  c.coverage = true;
  const McReport r = run_study(c);
  const CoverageStats& cs = *r.coverage;
  const double rate = static_cast<double>(cs.mu_covered) / static_cast<double>(cs.mu_defined);
  info(fmt("C9 M band coverage at x=0: %zu/%zu", cs.m_covered, cs.m_defined));
  return {cs.mu_defined >= 190 && rate >= 0.88 && rate <= 0.99,
          fmt("mu band covers %zu/%zu = %.1f%%", cs.mu_covered, cs.mu_defined, 100 * rate)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<missing " + p.string() + ">";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(JDSMOOTH_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "jdsmooth_acceptance";
  fs::remove_all(dir);
  const std::string threads[] = {"1", "4"};
  const std::vector<std::string> files{"path.csv",   "proxy.csv", "path.json", "curve.csv", "cv.csv",
                                       "curve.json", "mc.json",   "mc.csv",    "qq.csv"};
  for (const std::string& t : threads) {
    const fs::path d = dir / ("t" + t);
    fs::create_directories(d);
    const std::string p = d.string() + "/";
    const std::string th = " --threads " + t;
    const std::string cmds[] = {
        "simulate --seed 7 --n 1500 --out " + p + "path.csv --proxy-out " + p + "proxy.csv" + th,
        "simulate --seed 7 --n 1500 --jump vg --out " + p + "path.json" + th,
        // shared input so the recorded input path is the same in both runs
        "estimate --in " + (dir / "t1" / "proxy.csv").string() + " --h cv --cv-out " + p + "cv.csv --bands alpha=0.05 --out " +
            p + "curve.csv" + th,
        "estimate --in " + (dir / "t1" / "proxy.csv").string() + " --method nw --out " + p + "curve.json" + th,
        "mc-study --example 1 --n 500 --reps 40 --seed 3 --coverage --out " + p + "mc.json --curve-out " + p +
            "mc.csv --qq-out " + p + "qq.csv" + th,
    };
    for (const std::string& c : cmds) {
      const int code = run_cli(c, d / "log.txt");
      if (code != 0) return {false, fmt("exit %d from: %s", code, c.c_str())};
    }
  }
  std::size_t bytes = 0;
  for (const std::string& f : files) {
    const std::string a = slurp(dir / "t1" / f), b = slurp(dir / "t4" / f);
    if (a != b || a.empty()) return {false, f + " differs between 1 and 4 threads"};
    bytes += a.size();
  }
  fs::remove_all(dir);
  return {true, fmt("%zu outputs (%zu bytes) identical across 1 and 4 threads", files.size(), bytes)};
}

void informational() {
  const McReport nj = [] {
    McConfig c = example_config(1, 10.0, 2500, 100, 1);
    c.methods = {Method::local_linear};
    c.coverage = true;
    return run_study(c);
  }();
  info(fmt("example 1 n=2500 band coverage at x=0: mu %zu/%zu, M %zu/%zu", nj.coverage->mu_covered,
           nj.coverage->mu_defined, nj.coverage->m_covered, nj.coverage->m_defined));
  McConfig aw = example_config(1, 10.0, 1000, 100, 1);
  aw.alignment = IndexAlignment::as_written;
  const McReport r = run_study(aw);
  info(fmt("as_written alignment, example 1 n=1000: RMSE-LL %.4f, RMSE-NW %.4f, bias at 10%% LL %+.4f",
           r.stats(Method::local_linear).rmse, r.stats(Method::nadaraya_watson).rmse,
           r.stats(Method::local_linear).bias_at_quantiles[0]));
}

}  // namespace

int main() {
  criterion(1, "gaussian kernel moments", 1.0, kernel_moments);
  criterion(2, "affine reproduction", 5.0, affine_reproduction);
  criterion(3, "second-moment factor", 1.0, second_moment_factor);
  criterion(4, "example 1 quantile bias", 0.0, quantile_bias);
  criterion(5, "RMSE across n at T=10", 0.0, rmse_across_n);
  criterion(6, "variance gamma RMSE", 0.0, vg_rmse);
  criterion(7, "normality at x=0", 0.0, normality);
  criterion(8, "second-moment targets", 0.0, m_targets);
  criterion(9, "drift band coverage", 0.0, coverage);
  criterion(10, "thread determinism", 60.0, determinism);
  informational();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
