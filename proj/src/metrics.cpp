#include "blaspe/metrics.hpp"

#include <string>

namespace blaspe {

std::uint64_t flop_count(KernelKind kind, std::size_t n) {
  if (n == 0) throw DimensionError("flop count needs n >= 1");
  const std::uint64_t m = n;
  switch (kind) {
    case KernelKind::gemm: return 3 * m * m * m;
    case KernelKind::gemv: return 2 * m * m;
    case KernelKind::ddot: return 2 * m - 1;
    case KernelKind::dnrm2: return 2 * m;
    case KernelKind::daxpy: return 2 * m;
    default: break;
  }
  throw ShapeError("no flop count for kernel " + std::string(kernel_name(kind)));
}

double cpf(double latency, KernelKind kind, std::size_t n) {
  if (!(latency > 0.0)) throw UndefinedMetric("CPF needs a positive latency");
  return latency / static_cast<double>(flop_count(kind, n));
}

double fpc(double latency, KernelKind kind, std::size_t n) {
  if (!(latency > 0.0)) throw UndefinedMetric("FPC needs a positive latency");
  return static_cast<double>(flop_count(kind, n)) / latency;
}

double percent_of_peak_fpc(double fpc, const PeConfig& cfg) { return 100.0 * fpc / cfg.peak_fpc(); }

double alpha(double latency, std::uint64_t dot4_issues) {
  if (dot4_issues == 0) throw UndefinedMetric("alpha is undefined without DOT4 work");
  if (!(latency > 0.0)) throw UndefinedMetric("alpha needs a positive latency");
  return latency / static_cast<double>(dot4_issues);
}

double gflops_per_watt(double latency, KernelKind kind, std::size_t n, double frequency_hz, double power_watts) {
  if (!(latency > 0.0) || !(frequency_hz > 0.0) || !(power_watts > 0.0)) {
    throw UndefinedMetric("Gflops/watt needs positive latency, frequency and power");
  }
  return static_cast<double>(flop_count(kind, n)) / latency * frequency_hz / power_watts / 1e9;
}

double improvement_pct(double previous, double current) {
  if (!(previous > 0.0)) throw UndefinedMetric("improvement needs a positive baseline");
  return 100.0 * (previous - current) / previous;
}

Metrics compute_metrics(KernelKind kind, std::size_t n, const PeConfig& cfg, std::uint64_t latency,
                        std::uint64_t dot4_issues) {
  Metrics m;
  const auto lat = static_cast<double>(latency);
  m.latency = latency;
  m.flops = flop_count(kind, n);
  m.cpf = cpf(lat, kind, n);
  m.fpc = fpc(lat, kind, n);
  m.percent_of_peak = percent_of_peak_fpc(m.fpc, cfg);
  if (dot4_issues > 0) m.alpha = alpha(lat, dot4_issues);
  m.frequency_hz = cfg.frequency_hz;
  m.power_watts = cfg.power();
  m.gflops_per_watt = gflops_per_watt(lat, kind, n, cfg.frequency_hz, m.power_watts);
  return m;
}

const AblationCell& AblationReport::at(std::size_t n, AeLevel ae) const {
  for (const AblationCell& c : cells)
    if (c.n == n && c.ae == ae) return c;
  throw DimensionError("no ablation cell for n=" + std::to_string(n) + " " + ae_name(ae));
}

AblationReport ablation_report(KernelKind kind, const std::vector<std::size_t>& ns,
                               const std::vector<AeLevel>& levels, const PeConfig& base, std::uint64_t seed,
                               bool parallel) {
  AblationReport report;
  report.kind = kind;
  report.seed = seed;
  report.ns = ns;
  report.levels = levels;
  report.cells.resize(ns.size() * levels.size());

  const long long count = static_cast<long long>(report.cells.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long idx = 0; idx < count; ++idx) {
    AblationCell& cell = report.cells[static_cast<std::size_t>(idx)];
    cell.n = ns[static_cast<std::size_t>(idx) / levels.size()];
    cell.ae = levels[static_cast<std::size_t>(idx) % levels.size()];
    const PeConfig cfg = with_level(base, cell.ae);
    try {
      KernelRun run = run_kernel(kind, cell.n, cfg, seed);
      cell.stalls = run.sim.stalls;
      cell.gm_words = run.sim.gm_words;
      cell.lm_words = run.sim.lm_words;
      cell.dot4 = run.sim.dot4;
      cell.rel_error = run.rel_error;
      if (!(run.rel_error <= 1e-10)) {
        throw NumericalMismatch("relative error " + std::to_string(run.rel_error) + " exceeds 1e-10");
      }
      cell.metrics = compute_metrics(kind, cell.n, cfg, run.sim.latency, run.sim.dot4);
      cell.ok = true;
    } catch (const Error& e) {
      cell.error_category = e.category();
      cell.error = e.what();
    } catch (const std::exception& e) {
      cell.error_category = ErrorCategory::internal;
      cell.error = e.what();
    }
  }

  for (std::size_t i = 0; i < ns.size(); ++i) {
    for (std::size_t j = 1; j < levels.size(); ++j) {
      AblationCell& cur = report.cells[i * levels.size() + j];
      const AblationCell& prev = report.cells[i * levels.size() + j - 1];
      if (cur.ok && prev.ok) {
        cur.improvement_pct = improvement_pct(static_cast<double>(prev.metrics.latency),
                                              static_cast<double>(cur.metrics.latency));
      }
    }
  }
  return report;
}

}  // namespace blaspe
