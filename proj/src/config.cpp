#include "blaspe/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>
#include <vector>

#include "blaspe/errors.hpp"

namespace blaspe {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ConfigError(where + ": bad value '" + std::string(text) + "'");
  return value;
}

struct Field {
  std::function<void(SimConfig&, std::string_view, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

template <typename T>
Field field(T PeConfig::*member, T min_value) {
  return {[member, min_value](SimConfig& c, std::string_view v, const std::string& where) {
            T x = parse_number<T>(v, where);
            if (x < min_value) throw ConfigError(where + ": value below minimum");
            c.pe.*member = x;
          },
          [member](const SimConfig& c) {
            std::ostringstream os;
            os << std::setprecision(17) << c.pe.*member;
            return os.str();
          }};
}

Field noc_field(int NocConfig::*member, int min_value) {
  return {[member, min_value](SimConfig& c, std::string_view v, const std::string& where) {
            int x = parse_number<int>(v, where);
            if (x < min_value) throw ConfigError(where + ": value below minimum");
            c.noc.*member = x;
          },
          [member](const SimConfig& c) { return std::to_string(c.noc.*member); }};
}

Field power_field(int level) {
  return {[level](SimConfig& c, std::string_view v, const std::string& where) {
            double x = parse_number<double>(v, where);
            if (!(x > 0.0)) throw ConfigError(where + ": power must be positive");
            c.pe.power_watts[level] = x;
          },
          [level](const SimConfig& c) {
            std::ostringstream os;
            os << std::setprecision(17) << c.pe.power_watts[level];
            return os.str();
          }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("ae", Field{[](SimConfig& c, std::string_view v, const std::string& where) {
                                 try {
                                   c.pe.ae = parse_ae(std::string(v));
                                 } catch (const Error&) {
                                   throw ConfigError(where + ": bad level '" + std::string(v) + "'");
                                 }
                               },
                               [](const SimConfig& c) { return ae_name(c.pe.ae); }});
    t.emplace_back("registers", field(&PeConfig::registers, 1));
    t.emplace_back("lm_capacity_bits", field(&PeConfig::lm_capacity_bits, std::uint64_t{64}));
    t.emplace_back("gm_latency", field(&PeConfig::gm_latency, 0));
    t.emplace_back("gm_handshake", field(&PeConfig::gm_handshake, 0));
    t.emplace_back("lscfu_handshake", field(&PeConfig::lscfu_handshake, 0));
    t.emplace_back("wide_channel_words", field(&PeConfig::wide_channel_words, 1));
    t.emplace_back("depth_mul", field(&PeConfig::depth_mul, 1));
    t.emplace_back("depth_add", field(&PeConfig::depth_add, 1));
    t.emplace_back("depth_dot2", field(&PeConfig::depth_dot2, 1));
    t.emplace_back("depth_dot3", field(&PeConfig::depth_dot3, 1));
    t.emplace_back("depth_dot4", field(&PeConfig::depth_dot4, 1));
    t.emplace_back("depth_div", field(&PeConfig::depth_div, 1));
    t.emplace_back("depth_sqrt", field(&PeConfig::depth_sqrt, 1));
    t.emplace_back("imem_bytes", field(&PeConfig::imem_bytes, std::uint32_t{1}));
    t.emplace_back("instr_bytes", field(&PeConfig::instr_bytes, std::uint32_t{1}));
    t.emplace_back("frequency_hz", field(&PeConfig::frequency_hz, 1.0));
    for (int level = 0; level < kAeLevels; ++level)
      t.emplace_back("power_ae" + std::to_string(level), power_field(level));
    t.emplace_back("noc_hop_latency", noc_field(&NocConfig::hop_latency, 0));
    t.emplace_back("noc_link_words_per_cycle", noc_field(&NocConfig::link_words_per_cycle, 1));
    t.emplace_back("noc_packet_words", noc_field(&NocConfig::packet_words, 1));
    return t;
  }();
  return table;
}

}  // namespace

SimConfig parse_config(std::istream& in, const std::string& source) {
  SimConfig cfg;
  std::set<std::string> seen;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    std::string_view text = line;
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    std::string key(trim(text.substr(0, eq)));
    std::string_view value = trim(text.substr(eq + 1));
    if (value.empty()) throw ConfigError(where + ": missing value for '" + key + "'");
    const Field* f = nullptr;
    for (const auto& [name, fld] : fields())
      if (name == key) f = &fld;
    if (!f) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    f->set(cfg, value, where);
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in, path);
}

void write_config(std::ostream& out, const SimConfig& cfg) {
  for (const auto& [name, f] : fields()) out << name << " = " << f.get(cfg) << "\n";
}

}  // namespace blaspe
