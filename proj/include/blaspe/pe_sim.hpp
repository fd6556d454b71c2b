#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "blaspe/isa.hpp"
#include "blaspe/matrix.hpp"

namespace blaspe {

// Every simulated cycle is either an FPS issue cycle or exactly one stall
// cause, so issue + stalls.total() == latency.
struct StallCounts {
  std::uint64_t raw_hazard = 0;      // FPS waits on its own pipeline or div/sqrt unit
  std::uint64_t lm_wait = 0;         // FPS waits on data from the load-store unit
  std::uint64_t gm_wait = 0;         // FPS waits on its own global memory load
  std::uint64_t bandwidth_wait = 0;  // FPS held by a GM handshake or a pending register read-out
  std::uint64_t drain = 0;           // FPS stream finished, transfers still in flight
  std::uint64_t total() const { return raw_hazard + lm_wait + gm_wait + bandwidth_wait + drain; }
};

struct UnitBusy {
  std::uint64_t fps_issue = 0;
  std::uint64_t mul = 0;
  std::uint64_t add = 0;
  std::uint64_t dot = 0;
  std::uint64_t div_sqrt = 0;
  std::uint64_t gm_port = 0;
  std::uint64_t channel = 0;
};

struct SimResult {
  std::uint64_t latency = 0;
  UnitBusy busy;
  StallCounts stalls;
  std::uint64_t gm_words = 0;
  std::uint64_t lm_words = 0;
  std::uint64_t dot4 = 0;
  std::uint64_t flops = 0;
  std::vector<double> gm;  // final global memory image
};

struct SimOptions {
  std::ostream* trace = nullptr;  // one line per issued instruction
  std::vector<std::pair<int, double>> registers;  // preloaded register values
};

// Throws AddressFault, CapacityError or DeadlockError.
SimResult simulate(const Program& program, const PeConfig& cfg, const std::vector<double>& gm_image,
                   const SimOptions& options = {});

// Balanced-tree k-element dot product used by the DOTk units.
double rdp_eval(int k, const std::vector<double>& a, const std::vector<double>& b);

struct KernelInputs {
  Matrix a;  // gemm A, gemv A
  Matrix b;  // gemm B
  Matrix c;  // gemm C
  Vector x;
  Vector y;
  double alpha = 0.0;
};

KernelInputs make_inputs(KernelKind kind, std::size_t n, std::uint64_t seed);
std::vector<double> gm_image(const Program& p, const KernelInputs& in);
std::vector<double> oracle_output(KernelKind kind, const KernelInputs& in);
std::vector<double> extract_output(const Program& p, const std::vector<double>& gm);

struct KernelRun {
  StaticCounts counts;
  SimResult sim;
  std::vector<double> output;
  std::vector<double> expected;
  double rel_error = 0.0;
};

// Compile, load seeded inputs, simulate and compare against the oracle.
KernelRun run_kernel(KernelKind kind, std::size_t n, const PeConfig& cfg, std::uint64_t seed = kDefaultSeed,
                     const SimOptions& options = {});

}  // namespace blaspe
