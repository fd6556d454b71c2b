#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "blaspe/metrics.hpp"
#include "blaspe/tile_sim.hpp"

namespace blaspe {

void write_ablation_csv(std::ostream& out, const AblationReport& report);
void write_ablation_json(std::ostream& out, const AblationReport& report);

struct RunRecord {
  KernelKind kind = KernelKind::gemm;
  std::size_t n = 0;
  AeLevel ae = AeLevel::ae0;
  std::uint64_t seed = kDefaultSeed;
  KernelRun run;
  Metrics metrics;
};

void write_run_json(std::ostream& out, const RunRecord& record);
void write_run_csv(std::ostream& out, const RunRecord& record);

void write_tiles_csv(std::ostream& out, const std::vector<SpeedupPoint>& points);
void write_tiles_json(std::ostream& out, const std::vector<SpeedupPoint>& points);

// Published gemm latencies used as calibration targets.
struct PublishedLatency {
  AeLevel ae = AeLevel::ae0;
  std::size_t n = 0;
  std::uint64_t latency = 0;
};

// Lines "AE<k> <n> <latency>"; '#' starts a comment.
std::vector<PublishedLatency> load_published(const std::string& path);
std::vector<PublishedLatency> parse_published(std::istream& in, const std::string& source = "<published>");

struct CalibrationRow {
  PublishedLatency target;
  std::uint64_t simulated = 0;
  double rel_diff = 0.0;  // (simulated - published) / published
};

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows);

}  // namespace blaspe
