#include "blaspe/report.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace blaspe {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

json stalls_json(const StallCounts& s) {
  return json{{"raw_hazard", s.raw_hazard},         {"lm_wait", s.lm_wait}, {"gm_wait", s.gm_wait},
              {"bandwidth_wait", s.bandwidth_wait}, {"drain", s.drain},     {"total", s.total()}};
}

json metrics_json(const Metrics& m) {
  json j{{"latency", m.latency}, {"flops", m.flops}, {"cpf", m.cpf}, {"fpc", m.fpc},
         {"percent_of_peak", m.percent_of_peak}};
  if (m.alpha) j["alpha"] = *m.alpha;
  j["gflops_per_watt"] = m.gflops_per_watt;
  j["frequency_hz"] = m.frequency_hz;
  j["power_watts"] = m.power_watts;
  return j;
}

const char* kCsvHeader =
    "kernel,n,ae,status,latency,flops,cpf,fpc,percent_of_peak,alpha,gflops_per_watt,improvement_pct,"
    "raw_hazard,lm_wait,gm_wait,bandwidth_wait,drain,gm_words,lm_words,dot4,rel_error,error\n";

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void csv_row(std::ostream& out, KernelKind kind, std::size_t n, AeLevel ae, bool ok, const Metrics& m,
             const std::optional<double>& improvement, const StallCounts& s, std::uint64_t gm_words,
             std::uint64_t lm_words, std::uint64_t dot4, double rel_error, const std::string& error) {
  out << kernel_name(kind) << ',' << n << ',' << ae_name(ae) << ',';
  if (!ok) {
    out << "error,,,,,,,,,,,,,,,,,," << csv_escape(error) << '\n';
    return;
  }
  out << "ok," << m.latency << ',' << m.flops << ',' << fmt("%.6f", m.cpf) << ',' << fmt("%.6f", m.fpc) << ','
      << fmt("%.4f", m.percent_of_peak) << ',' << (m.alpha ? fmt("%.6f", *m.alpha) : "") << ','
      << fmt("%.4f", m.gflops_per_watt) << ',' << (improvement ? fmt("%.4f", *improvement) : "") << ','
      << s.raw_hazard << ',' << s.lm_wait << ',' << s.gm_wait << ',' << s.bandwidth_wait << ',' << s.drain << ','
      << gm_words << ',' << lm_words << ',' << dot4 << ',' << fmt("%.3e", rel_error) << ",\n";
}

}  // namespace

void write_ablation_csv(std::ostream& out, const AblationReport& report) {
  out << kCsvHeader;
  for (const AblationCell& c : report.cells) {
    csv_row(out, report.kind, c.n, c.ae, c.ok, c.metrics, c.improvement_pct, c.stalls, c.gm_words, c.lm_words,
            c.dot4, c.rel_error, c.ok ? "" : std::string(category_name(c.error_category)) + ": " + c.error);
  }
}

void write_ablation_json(std::ostream& out, const AblationReport& report) {
  json cells = json::array();
  for (const AblationCell& c : report.cells) {
    json j{{"n", c.n}, {"ae", ae_name(c.ae)}, {"ok", c.ok}};
    if (!c.ok) {
      j["error_category"] = category_name(c.error_category);
      j["error"] = c.error;
    } else {
      j["metrics"] = metrics_json(c.metrics);
      if (c.improvement_pct) j["improvement_pct"] = *c.improvement_pct;
      j["stalls"] = stalls_json(c.stalls);
      j["gm_words"] = c.gm_words;
      j["lm_words"] = c.lm_words;
      j["dot4"] = c.dot4;
      j["rel_error"] = c.rel_error;
    }
    cells.push_back(std::move(j));
  }
  json doc{{"kernel", kernel_name(report.kind)}, {"seed", report.seed}, {"cells", std::move(cells)}};
  out << doc.dump(2) << '\n';
}

void write_run_json(std::ostream& out, const RunRecord& r) {
  const SimResult& s = r.run.sim;
  json busy{{"fps_issue", s.busy.fps_issue}, {"mul", s.busy.mul},           {"add", s.busy.add},
            {"dot", s.busy.dot},             {"div_sqrt", s.busy.div_sqrt}, {"gm_port", s.busy.gm_port},
            {"channel", s.busy.channel}};
  json doc{{"kernel", kernel_name(r.kind)},
           {"n", r.n},
           {"ae", ae_name(r.ae)},
           {"seed", r.seed},
           {"metrics", metrics_json(r.metrics)},
           {"busy", std::move(busy)},
           {"stalls", stalls_json(s.stalls)},
           {"gm_words", s.gm_words},
           {"lm_words", s.lm_words},
           {"dot4", s.dot4},
           {"static_flops", r.run.counts.flops},
           {"rel_error", r.run.rel_error}};
  out << doc.dump(2) << '\n';
}

void write_run_csv(std::ostream& out, const RunRecord& r) {
  out << kCsvHeader;
  csv_row(out, r.kind, r.n, r.ae, true, r.metrics, std::nullopt, r.run.sim.stalls, r.run.sim.gm_words,
          r.run.sim.lm_words, r.run.sim.dot4, r.run.rel_error, "");
}

void write_tiles_csv(std::ostream& out, const std::vector<SpeedupPoint>& points) {
  out << "b,n,comp_comm_ratio,latency_single,latency_array,speedup,rel_error\n";
  for (const SpeedupPoint& p : points) {
    out << p.b << ',' << p.n << ',' << fmt("%.4f", p.ratio) << ',' << p.latency_single << ',' << p.latency_array
        << ',' << fmt("%.6f", p.speedup) << ',' << fmt("%.3e", p.rel_error) << '\n';
  }
}

void write_tiles_json(std::ostream& out, const std::vector<SpeedupPoint>& points) {
  json arr = json::array();
  for (const SpeedupPoint& p : points) {
    arr.push_back(json{{"b", p.b},
                       {"n", p.n},
                       {"comp_comm_ratio", p.ratio},
                       {"latency_single", p.latency_single},
                       {"latency_array", p.latency_array},
                       {"speedup", p.speedup},
                       {"rel_error", p.rel_error}});
  }
  out << json{{"points", std::move(arr)}}.dump(2) << '\n';
}

std::vector<PublishedLatency> parse_published(std::istream& in, const std::string& source) {
  std::vector<PublishedLatency> rows;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string level;
    if (!(ls >> level)) continue;
    PublishedLatency row;
    std::string extra;
    if (!(ls >> row.n >> row.latency) || (ls >> extra)) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected '<level> <n> <latency>'");
    }
    try {
      row.ae = parse_ae(level);
    } catch (const Error&) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": bad level '" + level + "'");
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<PublishedLatency> load_published(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_published(in, path);
}

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows) {
  out << "ae,n,published,simulated,rel_diff\n";
  for (const CalibrationRow& r : rows) {
    out << ae_name(r.target.ae) << ',' << r.target.n << ',' << r.target.latency << ',' << r.simulated << ','
        << fmt("%.4f", r.rel_diff) << '\n';
  }
}

}  // namespace blaspe
