#pragma once

#include <cstdint>
#include <vector>

#include "blaspe/isa.hpp"
#include "blaspe/matrix.hpp"

namespace blaspe {

struct NocConfig {
  int hop_latency = 4;
  int link_words_per_cycle = 1;
  int packet_words = 16;  // round-robin unit on a shared row link
};

// b x b grid of processing elements with the memory column on the right.
struct TileArrayConfig {
  std::size_t b = 2;
  PeConfig pe;
  NocConfig noc;
};

struct TileTiming {
  std::size_t tile_row = 0;
  std::size_t tile_col = 0;
  std::uint64_t words_in = 0;
  std::uint64_t words_out = 0;
  std::uint64_t first_data = 0;   // enough data for the first block iteration
  std::uint64_t inbound_done = 0;
  std::uint64_t compute_start = 0;
  std::uint64_t compute_done = 0;
  std::uint64_t finish = 0;       // C block back in the memory column
  std::uint64_t pe_latency = 0;
  std::uint64_t flops = 0;
};

struct TiledRun {
  std::uint64_t latency = 0;
  std::uint64_t flops = 0;
  std::vector<TileTiming> tiles;  // row-major over the grid
  Matrix c;
  Matrix expected;
  double rel_error = 0.0;
};

// Computation (2 m^2 n flops) over inbound operand words (2 m n) per tile,
// which is n / b.
double comp_comm_ratio(std::size_t n, std::size_t b);

// C += A B on the tile array with seeded inputs. Per-tile simulations run
// on OpenMP threads when `parallel` is set; results do not depend on it.
TiledRun run_tiled_gemm(std::size_t n, const TileArrayConfig& cfg, std::uint64_t seed = kDefaultSeed,
                        bool parallel = true);

struct SpeedupPoint {
  std::size_t n = 0;
  std::size_t b = 0;
  std::uint64_t latency_single = 0;
  std::uint64_t latency_array = 0;
  double speedup = 0.0;
  double ratio = 0.0;
  double rel_error = 0.0;
};

// Speedup over the same array model with b = 1.
SpeedupPoint tile_speedup(std::size_t n, const TileArrayConfig& cfg, std::uint64_t seed = kDefaultSeed,
                          bool parallel = true);

}  // namespace blaspe
