#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blaspe/errors.hpp"
#include "blaspe/isa.hpp"
#include "blaspe/kernel.hpp"
#include "blaspe/pe_sim.hpp"

namespace blaspe {

// gemm counts 3 n^3 (n^3 multiplies credited twice plus n^3 adds), which is
// what the published CPF figures divide by.
std::uint64_t flop_count(KernelKind kind, std::size_t n);

double cpf(double latency, KernelKind kind, std::size_t n);
double fpc(double latency, KernelKind kind, std::size_t n);
double percent_of_peak_fpc(double fpc, const PeConfig& cfg);
// Throws UndefinedMetric when no DOT4 was issued.
double alpha(double latency, std::uint64_t dot4_issues);
double gflops_per_watt(double latency, KernelKind kind, std::size_t n, double frequency_hz, double power_watts);
double improvement_pct(double previous, double current);

struct Metrics {
  std::uint64_t latency = 0;
  std::uint64_t flops = 0;
  double cpf = 0.0;
  double fpc = 0.0;
  double percent_of_peak = 0.0;
  std::optional<double> alpha;  // absent without DOT4 work
  double gflops_per_watt = 0.0;
  double frequency_hz = 0.0;
  double power_watts = 0.0;
};

Metrics compute_metrics(KernelKind kind, std::size_t n, const PeConfig& cfg, std::uint64_t latency,
                        std::uint64_t dot4_issues);

struct AblationCell {
  std::size_t n = 0;
  AeLevel ae = AeLevel::ae0;
  bool ok = false;
  ErrorCategory error_category = ErrorCategory::internal;
  std::string error;
  Metrics metrics;
  std::optional<double> improvement_pct;  // over the previous level in the list
  StallCounts stalls;
  std::uint64_t gm_words = 0;
  std::uint64_t lm_words = 0;
  std::uint64_t dot4 = 0;
  double rel_error = 0.0;
};

struct AblationReport {
  KernelKind kind = KernelKind::gemm;
  std::uint64_t seed = kDefaultSeed;
  std::vector<std::size_t> ns;
  std::vector<AeLevel> levels;
  std::vector<AblationCell> cells;  // n-major, levels in list order

  const AblationCell& at(std::size_t n, AeLevel ae) const;
};

// Cells that fail keep their error and leave the rest of the grid intact.
// Simulations fan out over OpenMP threads when `parallel` is set; the report
// is identical either way.
AblationReport ablation_report(KernelKind kind, const std::vector<std::size_t>& ns,
                               const std::vector<AeLevel>& levels, const PeConfig& base,
                               std::uint64_t seed = kDefaultSeed, bool parallel = true);

}  // namespace blaspe
