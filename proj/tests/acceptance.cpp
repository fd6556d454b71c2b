// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failing criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "blaspe/dag.hpp"
#include "blaspe/report.hpp"
#include "blaspe/tile_sim.hpp"

using namespace blaspe;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::vector<std::size_t> kGrid = {20, 40, 60, 80, 100};
const std::vector<AeLevel> kAll = {AeLevel::ae0, AeLevel::ae1, AeLevel::ae2, AeLevel::ae3, AeLevel::ae4, AeLevel::ae5};
const KernelKind kPeKernels[] = {KernelKind::ddot, KernelKind::dnrm2, KernelKind::daxpy, KernelKind::gemv,
                                 KernelKind::gemm};

std::map<std::pair<int, std::size_t>, double> published() {
  std::map<std::pair<int, std::size_t>, double> t;
  for (const PublishedLatency& p : load_published(BLASPE_DATA_DIR "/published_latencies.txt"))
    t[{static_cast<int>(p.ae), p.n}] = static_cast<double>(p.latency);
  return t;
}

Check metric_arithmetic() {
  Check c;
  auto t = published();
  const double want[] = {1.625, 1.614, 1.606, 1.6, 1.59};
  for (std::size_t i = 0; i < kGrid.size(); ++i) {
    const double got = cpf(t.at({0, kGrid[i]}), KernelKind::gemm, kGrid[i]);
    c.expect(std::abs(got - want[i]) <= 0.002, "n=" + std::to_string(kGrid[i]) + " cpf " + fmt("%.4f", got));
  }
  return c;
}

Check ablation_percentages() {
  Check c;
  auto t = published();
  const double printed[5][5] = {
      {41, 42.5, 42.78, 42.6, 42.6},     {33.7, 36.6, 37.57, 37.82, 37.85}, {16.4, 14.1, 12.5, 10.51, 10.48},
      {44.4, 45.8, 46.1, 46.12, 46.14}, {21.44, 27.07, 28.70, 29.5, 29.9},
  };
  for (int a = 1; a < kAeLevels; ++a)
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      const double got = improvement_pct(t.at({a - 1, kGrid[i]}), t.at({a, kGrid[i]}));
      c.expect(std::abs(got - printed[a - 1][i]) <= 0.3,
               "AE" + std::to_string(a) + " n=" + std::to_string(kGrid[i]) + " " + fmt("%.2f", got));
    }
  return c;
}

Check peak_fpc() {
  Check c;
  auto t = published();
  const double p1 = percent_of_peak_fpc(fpc(t.at({1, 100}), KernelKind::gemm, 100), with_level({}, AeLevel::ae1));
  const double p5 = percent_of_peak_fpc(fpc(t.at({5, 100}), KernelKind::gemm, 100), with_level({}, AeLevel::ae5));
  c.expect(p1 >= 54 && p1 <= 55, "AE1 " + fmt("%.2f", p1));
  c.expect(p5 >= 74 && p5 <= 75, "AE5 " + fmt("%.2f", p5));
  return c;
}

Check numerical_correctness() {
  Check c;
  const std::size_t ns[] = {4, 8, 20, 40};
  for (KernelKind k : kPeKernels)
    for (AeLevel ae : kAll)
      for (std::size_t n : ns) {
        double worst = 0.0;
#pragma omp parallel for reduction(max : worst)
        for (int seed = 0; seed < 20; ++seed)
          worst = std::max(worst, run_kernel(k, n, with_level({}, ae), 1000 + seed).rel_error);
        c.expect(worst <= 1e-10, std::string(kernel_name(k)) + " " + ae_name(ae) + " n=" + std::to_string(n) +
                                     " error " + fmt("%.2e", worst));
      }
  return c;
}

const AblationReport& grid(KernelKind k) {
  static std::map<KernelKind, AblationReport> cache;
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, ablation_report(k, kGrid, kAll, PeConfig{})).first;
  return it->second;
}

double lat(KernelKind k, std::size_t n, AeLevel ae) {
  const AblationCell& cell = grid(k).at(n, ae);
  if (!cell.ok) throw std::runtime_error(cell.error);
  return static_cast<double>(cell.metrics.latency);
}

Check calibrated_trends() {
  Check c;
  std::string lo_hi;
  for (std::size_t n : kGrid) {
    const double a = improvement_pct(lat(KernelKind::gemm, n, AeLevel::ae0), lat(KernelKind::gemm, n, AeLevel::ae1));
    const double b = improvement_pct(lat(KernelKind::gemm, n, AeLevel::ae3), lat(KernelKind::gemm, n, AeLevel::ae4));
    c.expect(a >= 35 && a <= 50, "AE0->AE1 n=" + std::to_string(n) + " " + fmt("%.2f", a));
    c.expect(b >= 38 && b <= 52, "AE3->AE4 n=" + std::to_string(n) + " " + fmt("%.2f", b));
  }
  const double s = lat(KernelKind::gemm, 60, AeLevel::ae0) / lat(KernelKind::gemm, 60, AeLevel::ae5);
  c.expect(s >= 6.5 && s <= 10, "AE0/AE5 n=60 " + fmt("%.2f", s));
  if (c.ok) c.detail = "AE0/AE5 at n=60 is " + fmt("%.2f", s);
  return c;
}

Check property_suite() {
  Check c;
  for (KernelKind k : kPeKernels) {
    const std::string name(kernel_name(k));
    for (std::size_t n : kGrid)
      for (std::size_t a = 0; a < kAll.size(); ++a) {
        const AblationCell& cell = grid(k).at(n, kAll[a]);
        c.expect(cell.ok, name + " cell failed: " + cell.error);
        if (!cell.ok) continue;
        c.expect(cell.metrics.fpc <= with_level({}, kAll[a]).peak_fpc(), name + " above peak");
        if (a > 0) c.expect(lat(k, n, kAll[a]) <= lat(k, n, kAll[a - 1]), name + " not monotone at n=" + std::to_string(n));
      }
    for (std::size_t n : kGrid) {
      const std::uint64_t w4 = grid(k).at(n, AeLevel::ae4).stalls.lm_wait;
      const std::uint64_t w5 = grid(k).at(n, AeLevel::ae5).stalls.lm_wait;
      c.expect(w5 < w4, name + " n=" + std::to_string(n) + " lm_wait AE4 " + std::to_string(w4) + " AE5 " +
                            std::to_string(w5));
    }
  }
  for (KernelKind k : kPeKernels) {
    std::ostringstream first, second;
    write_ablation_csv(first, grid(k));
    write_ablation_csv(second, ablation_report(k, kGrid, kAll, PeConfig{}, kDefaultSeed, false));
    c.expect(first.str() == second.str(), std::string(kernel_name(k)) + " report differs between runs");
  }
  return c;
}

Check tile_scaling() {
  Check c;
  std::string summary;
  for (std::size_t b : {2u, 3u, 4u}) {
    TileArrayConfig cfg;
    cfg.b = b;
    double prev = 0.0, last = 0.0;
    for (std::size_t step = 1; step <= 5; ++step) {
      const std::size_t n = (b == 3 ? 24 : 20) * step;
      SpeedupPoint p = tile_speedup(n, cfg);
      const std::string at = "b=" + std::to_string(b) + " n=" + std::to_string(n);
      c.expect(p.speedup >= 1.0 && p.speedup <= double(b * b), at + " speedup " + fmt("%.3f", p.speedup));
      c.expect(p.speedup >= prev, at + " speedup decreased");
      c.expect(p.rel_error <= 1e-10, at + " error " + fmt("%.2e", p.rel_error));
      prev = last = p.speedup;
    }
    if (b == 2) c.expect(last >= 3.2, "speedup(100, 2) " + fmt("%.3f", last));
    if (b == 4) c.expect(last >= 11, "speedup(100, 4) " + fmt("%.3f", last));
    summary += (summary.empty() ? "" : ", ") + std::string("b=") + std::to_string(b) + " " + fmt("%.2f", last);
  }
  if (c.ok) c.detail = "largest-n speedups " + summary;
  return c;
}

std::string sizes(const std::vector<std::size_t>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

Check dag_goldens() {
  Check c;
  Dag smm = build_dag({KernelKind::smm2x2, 2});
  Dag wmm = build_dag({KernelKind::wmm2x2, 2});
  Dag g22 = build_dag({KernelKind::gemm2x2, 2});
  Dag dot = build_dag({KernelKind::ddot, 8});
  const std::vector<std::size_t> smm_want = {9, 7, 6, 2};
  c.expect(smm.level_sizes() == smm_want, "SMM levels " + sizes(smm.level_sizes()) + " expected (9,7,6,2)");
  c.expect(critical_path(wmm) == 6, "WMM depth " + std::to_string(critical_path(wmm)));
  c.expect(g22.count(NodeOp::mul) == 8 && g22.add_sub_count() == 4, "GEMM-2x2 counts");
  c.expect(dot.count(NodeOp::mul) == 8 && dot.add_sub_count() == 7 && critical_path(dot) == 4, "ddot n=8");
  c.expect(smm.add_sub_count() == 18 && wmm.add_sub_count() == 15,
           "add counts SMM " + std::to_string(smm.add_sub_count()) + " WMM " + std::to_string(wmm.add_sub_count()));
  double worst = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const std::size_t dim = 2u << (seed % 3);
    Matrix a = random_matrix(dim, dim, 7000 + seed), b = random_matrix(dim, dim, 8000 + seed);
    Matrix want = oracle_gemm(a, b, Matrix(dim, dim));
    for (KernelKind k : {KernelKind::smm2x2, KernelKind::wmm2x2, KernelKind::gemm2x2})
      worst = std::max(worst, max_abs_diff(eval_block2x2(k, a, b), want));
  }
  c.expect(worst <= 1e-12, "block formulas differ by " + fmt("%.2e", worst));
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Check()> run;
    double limit_seconds;
  };
  const std::vector<Criterion> criteria = {
      {"1 metric arithmetic", metric_arithmetic, 1},
      {"2 ablation percentages", ablation_percentages, 1},
      {"3 peak FPC", peak_fpc, 1},
      {"4 numerical correctness", numerical_correctness, 120},
      {"5 calibrated trends", calibrated_trends, 600},
      {"6 property suite", property_suite, 600},
      {"7 tile scaling", tile_scaling, 600},
      {"8 DAG goldens", dag_goldens, 30},
  };
  int failures = 0;
  for (const auto& [name, run, limit] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < limit, "took longer than " + fmt("%.0fs", limit));
    std::printf("%s criterion %s (%.2fs)%s%s\n", c.ok ? "PASS" : "FAIL", name.c_str(), secs,
                c.detail.empty() ? "" : ": ", c.detail.c_str());
    failures += !c.ok;
  }
  return failures;
}
