#pragma once

#include <iosfwd>
#include <string>

#include "blaspe/isa.hpp"
#include "blaspe/tile_sim.hpp"

namespace blaspe {

struct SimConfig {
  PeConfig pe;
  NocConfig noc;
};

// Flat "key = value" text; '#' starts a comment. Unknown keys, malformed
// values and duplicates throw ConfigError with the line number.
SimConfig parse_config(std::istream& in, const std::string& source = "<config>");
SimConfig load_config(const std::string& path);
// Every key with its current value, in a stable order.
void write_config(std::ostream& out, const SimConfig& cfg);

}  // namespace blaspe
