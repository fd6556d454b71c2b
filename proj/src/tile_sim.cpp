#include "blaspe/tile_sim.hpp"

#include <algorithm>
#include <exception>
#include <string>

#include "blaspe/errors.hpp"
#include "blaspe/pe_sim.hpp"

namespace blaspe {

namespace {

std::uint64_t link_cycles(std::uint64_t words, int rate) {
  return (words + static_cast<std::uint64_t>(rate) - 1) / static_cast<std::uint64_t>(rate);
}

void check_config(const TileArrayConfig& cfg) {
  if (cfg.b == 0) throw ConfigError("tile grid size b must be positive");
  if (cfg.noc.hop_latency < 0) throw ConfigError("noc hop_latency must be non-negative");
  if (cfg.noc.link_words_per_cycle <= 0) throw ConfigError("noc link_words_per_cycle must be positive");
  if (cfg.noc.packet_words <= 0) throw ConfigError("noc packet_words must be positive");
}

struct TileWork {
  std::uint64_t pe_latency = 0;
  std::uint64_t flops = 0;
  Matrix c;
};

TileWork run_tile(const Matrix& a, const Matrix& b, const Matrix& c, const PeConfig& pe) {
  Program p = compile_gemm(a.rows(), a.cols(), b.cols(), pe);
  KernelInputs in;
  in.a = a;
  in.b = b;
  in.c = c;
  SimResult r = simulate(p, pe, gm_image(p, in));
  TileWork w;
  w.pe_latency = r.latency;
  w.flops = r.flops;
  w.c = Matrix(c.rows(), c.cols(), extract_output(p, r.gm));
  return w;
}

// Inbound traffic of one grid row. Tiles share the row link and are served
// round-robin in packets, nearest tile first.
void schedule_inbound(std::vector<TileTiming*>& row, const NocConfig& noc, std::uint64_t first_words) {
  const std::uint64_t packet = static_cast<std::uint64_t>(noc.packet_words);
  std::vector<std::uint64_t> sent(row.size(), 0);
  std::vector<bool> first_seen(row.size(), false);
  std::uint64_t t = 0;
  std::size_t remaining = row.size();
  while (remaining > 0) {
    for (std::size_t r = 0; r < row.size(); ++r) {
      TileTiming& tile = *row[r];
      if (sent[r] >= tile.words_in) continue;
      std::uint64_t words = std::min(packet, tile.words_in - sent[r]);
      t += link_cycles(words, noc.link_words_per_cycle);
      sent[r] += words;
      std::uint64_t hops = row.size() - tile.tile_col;
      std::uint64_t arrival = t + hops * static_cast<std::uint64_t>(noc.hop_latency);
      if (!first_seen[r] && sent[r] >= std::min(first_words, tile.words_in)) {
        tile.first_data = arrival;
        first_seen[r] = true;
      }
      if (sent[r] == tile.words_in) {
        tile.inbound_done = arrival;
        --remaining;
      }
    }
  }
}

// Result blocks leave in completion order, one at a time.
void schedule_outbound(std::vector<TileTiming*> row, const NocConfig& noc) {
  std::stable_sort(row.begin(), row.end(),
                   [](const TileTiming* x, const TileTiming* y) { return x->compute_done < y->compute_done; });
  std::uint64_t link_free = 0;
  for (TileTiming* tile : row) {
    std::uint64_t start = std::max(link_free, tile->compute_done);
    link_free = start + link_cycles(tile->words_out, noc.link_words_per_cycle);
    std::uint64_t hops = row.size() - tile->tile_col;
    tile->finish = link_free + hops * static_cast<std::uint64_t>(noc.hop_latency);
  }
}

}  // namespace

double comp_comm_ratio(std::size_t n, std::size_t b) {
  if (b == 0 || n == 0) throw DimensionError("comp/comm ratio needs positive n and b");
  double m = static_cast<double>(n) / static_cast<double>(b);
  return (2.0 * m * m * static_cast<double>(n)) / (2.0 * m * static_cast<double>(n));
}

TiledRun run_tiled_gemm(std::size_t n, const TileArrayConfig& cfg, std::uint64_t seed, bool parallel) {
  check_config(cfg);
  const std::size_t b = cfg.b;
  if (n == 0 || n % b != 0) {
    throw PartitionError("n=" + std::to_string(n) + " is not divisible by b=" + std::to_string(b));
  }
  const std::size_t m = n / b;
  KernelInputs in = make_inputs(KernelKind::gemm, n, seed);

  std::vector<TileWork> work(b * b);
  // Compile errors surface as exceptions; capture one and rethrow outside
  // the parallel region.
  std::vector<std::exception_ptr> errors(b * b);
  const long long count = static_cast<long long>(b * b);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long idx = 0; idx < count; ++idx) {
    std::size_t i = static_cast<std::size_t>(idx) / b;
    std::size_t j = static_cast<std::size_t>(idx) % b;
    try {
      work[idx] = run_tile(in.a.block(i * m, 0, m, n), in.b.block(0, j * m, n, m), in.c.block(i * m, j * m, m, m),
                           cfg.pe);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  TiledRun run;
  run.c = in.c;
  run.tiles.resize(b * b);
  const std::uint64_t first_words = std::min<std::uint64_t>(4, m) * n + 32;
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<TileTiming*> row;
    for (std::size_t jj = 0; jj < b; ++jj) {
      std::size_t j = b - 1 - jj;  // nearest the memory column first
      TileTiming& t = run.tiles[i * b + j];
      t.tile_row = i;
      t.tile_col = j;
      t.words_in = 2 * m * n + m * m;
      t.words_out = m * m;
      t.pe_latency = work[i * b + j].pe_latency;
      t.flops = work[i * b + j].flops;
      row.push_back(&t);
    }
    schedule_inbound(row, cfg.noc, first_words);
    for (TileTiming* t : row) {
      if (cfg.pe.prefetch()) {
        t->compute_start = t->first_data;
        t->compute_done = std::max(t->inbound_done, t->compute_start + t->pe_latency);
      } else {
        t->compute_start = t->inbound_done;
        t->compute_done = t->compute_start + t->pe_latency;
      }
    }
    schedule_outbound(row, cfg.noc);
    for (std::size_t j = 0; j < b; ++j) run.c.set_block(i * m, j * m, work[i * b + j].c);
  }

  for (const TileTiming& t : run.tiles) {
    run.latency = std::max(run.latency, t.finish);
    run.flops += t.flops;
  }
  run.expected = oracle_gemm(in.a, in.b, in.c);
  run.rel_error = rel_error(run.c.data(), run.expected.data());
  return run;
}

SpeedupPoint tile_speedup(std::size_t n, const TileArrayConfig& cfg, std::uint64_t seed, bool parallel) {
  TileArrayConfig single = cfg;
  single.b = 1;
  TiledRun one = run_tiled_gemm(n, single, seed, parallel);
  TiledRun many = run_tiled_gemm(n, cfg, seed, parallel);
  SpeedupPoint p;
  p.n = n;
  p.b = cfg.b;
  p.latency_single = one.latency;
  p.latency_array = many.latency;
  p.speedup = static_cast<double>(one.latency) / static_cast<double>(many.latency);
  p.ratio = comp_comm_ratio(n, cfg.b);
  p.rel_error = many.rel_error;
  return p;
}

}  // namespace blaspe
