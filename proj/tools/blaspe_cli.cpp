#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blaspe/config.hpp"
#include "blaspe/dag.hpp"
#include "blaspe/errors.hpp"
#include "blaspe/metrics.hpp"
#include "blaspe/pe_sim.hpp"
#include "blaspe/report.hpp"
#include "blaspe/tile_sim.hpp"

using namespace blaspe;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage:
    case ErrorCategory::config: return 2;
    case ErrorCategory::dimension:
    case ErrorCategory::partition:
    case ErrorCategory::shape:
    case ErrorCategory::capacity:
    case ErrorCategory::instruction_memory: return 3;
    case ErrorCategory::numerical_mismatch: return 4;
    default: return 5;
  }
}

struct Options {
  std::string kernel;
  std::vector<std::size_t> ns;
  std::vector<std::string> levels;
  std::vector<std::size_t> bs;
  std::string config;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string format;
  std::string data;
  bool trace = false;
  bool serial = false;
};

SimConfig load(const Options& o) { return o.config.empty() ? SimConfig{} : load_config(o.config); }

bool want_json(const Options& o, bool json_default) {
  if (o.format == "json") return true;
  if (o.format == "csv") return false;
  if (!o.format.empty()) throw Error(ErrorCategory::usage, "unknown format '" + o.format + "'");
  if (o.out.size() >= 5 && o.out.compare(o.out.size() - 5, 5, ".json") == 0) return true;
  if (o.out.size() >= 4 && o.out.compare(o.out.size() - 4, 4, ".csv") == 0) return false;
  return json_default;
}

// Writes to --out when given, otherwise to stdout.
template <typename F>
void emit(const Options& o, F&& write) {
  if (o.out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw Error(ErrorCategory::usage, "cannot write " + o.out);
  write(f);
}

KernelKind require_kernel(const Options& o) {
  if (o.kernel.empty()) throw Error(ErrorCategory::usage, "a kernel is required");
  return parse_kernel(o.kernel);
}

std::vector<AeLevel> levels_of(const Options& o, const std::vector<AeLevel>& fallback) {
  if (o.levels.empty()) return fallback;
  std::vector<AeLevel> out;
  for (const std::string& s : o.levels) out.push_back(parse_ae(s));
  return out;
}

int cmd_run(const Options& o) {
  SimConfig cfg = load(o);
  KernelKind kind = require_kernel(o);
  if (!is_pe_kernel(kind)) throw ShapeError(std::string(kernel_name(kind)) + " has no PE program; use dag");
  if (o.ns.size() != 1) throw Error(ErrorCategory::usage, "run takes exactly one --n");
  PeConfig pe = cfg.pe;
  if (!o.levels.empty()) {
    if (o.levels.size() != 1) throw Error(ErrorCategory::usage, "run takes exactly one --ae");
    pe.ae = parse_ae(o.levels.front());
  }
  SimOptions sim;
  if (o.trace) sim.trace = &std::cerr;
  RunRecord rec;
  rec.kind = kind;
  rec.n = o.ns.front();
  rec.ae = pe.ae;
  rec.seed = o.seed;
  rec.run = run_kernel(kind, rec.n, pe, o.seed, sim);
  if (!(rec.run.rel_error <= 1e-10)) {
    throw NumericalMismatch("result differs from the oracle, relative error " + std::to_string(rec.run.rel_error));
  }
  rec.metrics = compute_metrics(kind, rec.n, pe, rec.run.sim.latency, rec.run.sim.dot4);
  const bool json = want_json(o, true);
  emit(o, [&](std::ostream& out) { json ? write_run_json(out, rec) : write_run_csv(out, rec); });
  return 0;
}

int cmd_ablate(const Options& o) {
  SimConfig cfg = load(o);
  KernelKind kind = require_kernel(o);
  if (!is_pe_kernel(kind)) throw ShapeError(std::string(kernel_name(kind)) + " has no PE program");
  std::vector<std::size_t> ns = o.ns.empty() ? std::vector<std::size_t>{20, 40, 60, 80, 100} : o.ns;
  std::vector<AeLevel> all;
  for (int a = 0; a < kAeLevels; ++a) all.push_back(static_cast<AeLevel>(a));
  AblationReport rep = ablation_report(kind, ns, levels_of(o, all), cfg.pe, o.seed, !o.serial);
  const bool json = want_json(o, false);
  emit(o, [&](std::ostream& out) { json ? write_ablation_json(out, rep) : write_ablation_csv(out, rep); });
  for (const AblationCell& c : rep.cells) {
    if (!c.ok) {
      std::cerr << "error: " << category_name(c.error_category) << ": n=" << c.n << " " << ae_name(c.ae) << ": "
                << c.error << "\n";
      return exit_code(c.error_category);
    }
  }
  return 0;
}

std::vector<std::size_t> default_tile_sizes(std::size_t b) {
  if (b == 3) return {24, 48, 72, 96, 120};
  return {20, 40, 60, 80, 100};
}

int cmd_tiles(const Options& o) {
  SimConfig cfg = load(o);
  TileArrayConfig tc;
  tc.pe = cfg.pe;
  tc.noc = cfg.noc;
  if (!o.levels.empty()) {
    if (o.levels.size() != 1) throw Error(ErrorCategory::usage, "tiles takes exactly one --ae");
    tc.pe.ae = parse_ae(o.levels.front());
  }
  std::vector<std::size_t> bs = o.bs.empty() ? std::vector<std::size_t>{2, 3, 4} : o.bs;
  std::vector<SpeedupPoint> points;
  for (std::size_t b : bs) {
    tc.b = b;
    for (std::size_t n : o.ns.empty() ? default_tile_sizes(b) : o.ns) points.push_back(tile_speedup(n, tc, o.seed, !o.serial));
  }
  const bool json = want_json(o, false);
  emit(o, [&](std::ostream& out) { json ? write_tiles_json(out, points) : write_tiles_csv(out, points); });
  for (const SpeedupPoint& p : points) {
    if (!(p.rel_error <= 1e-10)) {
      std::cerr << "error: numerical-mismatch: tiles n=" << p.n << " b=" << p.b << "\n";
      return 4;
    }
  }
  return 0;
}

int cmd_dag(const Options& o) {
  KernelKind kind = require_kernel(o);
  if (o.ns.size() > 1) throw Error(ErrorCategory::usage, "dag takes at most one --n");
  std::size_t n = o.ns.empty() ? 4 : o.ns.front();
  Dag dag = build_dag({kind, n});
  std::ostringstream summary;
  summary << "kernel " << kernel_name(kind) << "\n"
          << "n " << n << "\n"
          << "nodes " << dag.nodes.size() << "\n"
          << "mul " << dag.count(NodeOp::mul) << "\n"
          << "add_sub " << dag.add_sub_count() << "\n"
          << "sqrt " << dag.count(NodeOp::sqrt) << "\n"
          << "depth " << critical_path(dag) << "\n"
          << "width " << max_parallelism(dag) << "\n"
          << "levels";
  for (std::size_t s : dag.level_sizes()) summary << ' ' << s;
  summary << "\n";
  if (o.out.empty()) {
    std::cout << summary.str();
  } else {
    std::cout << summary.str();
    emit(o, [&](std::ostream& out) { write_dot(out, dag, std::string(kernel_name(kind))); });
  }
  return 0;
}

int cmd_calibrate(const Options& o) {
  SimConfig cfg = load(o);
  std::string path = o.data.empty() ? std::string(BLASPE_DATA_DIR) + "/published_latencies.txt" : o.data;
  std::vector<PublishedLatency> targets = load_published(path);
  std::vector<CalibrationRow> rows(targets.size());
  const long long count = static_cast<long long>(rows.size());
  std::vector<std::exception_ptr> errors(rows.size());
#pragma omp parallel for schedule(dynamic) if (!o.serial)
  for (long long i = 0; i < count; ++i) {
    CalibrationRow& r = rows[static_cast<std::size_t>(i)];
    r.target = targets[static_cast<std::size_t>(i)];
    try {
      KernelRun run = run_kernel(KernelKind::gemm, r.target.n, with_level(cfg.pe, r.target.ae), o.seed);
      r.simulated = run.sim.latency;
      r.rel_diff = (static_cast<double>(r.simulated) - static_cast<double>(r.target.latency)) /
                   static_cast<double>(r.target.latency);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  emit(o, [&](std::ostream& out) { write_calibration_csv(out, rows); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level BLAS processing element and tile array simulator"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Flat key=value configuration file");
    sub->add_option("--seed", o.seed, "Input seed")->capture_default_str();
    sub->add_option("--out", o.out, "Output file (default stdout)");
    sub->add_option("--format", o.format, "csv or json (default from --out extension)");
  };
  auto kernel = [&](CLI::App* sub) {
    sub->add_option("kernel,--kernel", o.kernel,
                    "ddot, dnrm2, daxpy, gemv, gemm (dag also: smm2x2, wmm2x2, gemm2x2)");
  };

  CLI::App* run = app.add_subcommand("run", "Simulate one kernel and check it against the oracle");
  kernel(run);
  common(run);
  run->add_option("--n", o.ns, "Problem size")->required()->delimiter(',');
  run->add_option("--ae", o.levels, "Enhancement level AE0..AE5");
  run->add_flag("--trace", o.trace, "Per-instruction issue trace on stderr");

  CLI::App* ablate = app.add_subcommand("ablate", "Latency and metrics across enhancement levels");
  kernel(ablate);
  common(ablate);
  ablate->add_option("--n", o.ns, "Problem sizes")->delimiter(',');
  ablate->add_option("--ae", o.levels, "Levels")->delimiter(',');
  ablate->add_flag("--serial", o.serial, "Run cells on one thread");

  CLI::App* tiles = app.add_subcommand("tiles", "Tile array speedup over a single PE");
  common(tiles);
  tiles->add_option("--n", o.ns, "Problem sizes")->delimiter(',');
  tiles->add_option("--b", o.bs, "Grid sizes")->delimiter(',');
  tiles->add_option("--ae", o.levels, "PE enhancement level");
  tiles->add_flag("--serial", o.serial, "Simulate tiles on one thread");

  CLI::App* dag = app.add_subcommand("dag", "Dataflow graph summary and Graphviz export");
  kernel(dag);
  dag->add_option("--n", o.ns, "Problem size");
  dag->add_option("--out", o.out, "Graphviz output file");

  CLI::App* calibrate = app.add_subcommand("calibrate", "Compare simulated gemm latencies with published ones");
  common(calibrate);
  calibrate->add_option("--data", o.data, "Published latency table");
  calibrate->add_flag("--serial", o.serial, "Run on one thread");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*run) return cmd_run(o);
    if (*ablate) return cmd_ablate(o);
    if (*tiles) return cmd_tiles(o);
    if (*dag) return cmd_dag(o);
    if (*calibrate) return cmd_calibrate(o);
  } catch (const Error& e) {
    std::cerr << "error: " << category_name(e.category()) << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 5;
  }
  return 2;
}
