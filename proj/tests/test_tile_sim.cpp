#include <doctest.h>

#include "blaspe/errors.hpp"
#include "blaspe/tile_sim.hpp"

using namespace blaspe;

namespace {

TileArrayConfig array(std::size_t b) {
  TileArrayConfig cfg;
  cfg.b = b;
  cfg.pe.ae = AeLevel::ae5;
  return cfg;
}

}  // namespace

TEST_CASE("computation to communication ratio") {
  CHECK(comp_comm_ratio(20, 2) == doctest::Approx(10.0));
  CHECK(comp_comm_ratio(60, 3) == doctest::Approx(20.0));
  CHECK(comp_comm_ratio(100, 4) == doctest::Approx(25.0));
}

TEST_CASE("one tile is the baseline") {
  SpeedupPoint p = tile_speedup(20, array(1));
  CHECK(p.speedup == 1.0);
  CHECK(p.latency_single == p.latency_array);
}

TEST_CASE("tiled gemm assembles the right product") {
  for (std::size_t b : {1u, 2u, 3u, 4u}) {
    std::size_t n = b == 3 ? 24 : 20;
    TiledRun r = run_tiled_gemm(n, array(b), 9);
    CAPTURE(b);
    CHECK(r.rel_error <= 1e-10);
    CHECK(r.tiles.size() == b * b);
    std::uint64_t flops = 0, worst = 0;
    for (const TileTiming& t : r.tiles) {
      flops += t.flops;
      worst = std::max(worst, t.pe_latency);
      CHECK(t.compute_start <= t.inbound_done);
      CHECK(t.compute_done >= t.compute_start + t.pe_latency);
      CHECK(t.finish >= t.compute_done + t.words_out);
    }
    CHECK(flops == 3ull * n * n * n);
    CHECK(r.flops == flops);
    CHECK(r.latency >= worst);
  }
}

TEST_CASE("tile timings follow the operand volume") {
  TiledRun r = run_tiled_gemm(40, array(2), 1);
  for (const TileTiming& t : r.tiles) {
    CHECK(t.words_in == 2u * 20 * 40 + 20u * 20);
    CHECK(t.words_out == 20u * 20);
  }
}

TEST_CASE("overlap only with prefetching") {
  TileArrayConfig cfg = array(2);
  cfg.pe.ae = AeLevel::ae4;
  for (const TileTiming& t : run_tiled_gemm(40, cfg, 1).tiles) CHECK(t.compute_start == t.inbound_done);
  cfg.pe.ae = AeLevel::ae5;
  for (const TileTiming& t : run_tiled_gemm(40, cfg, 1).tiles) CHECK(t.compute_start < t.inbound_done);
}

TEST_CASE("speedup is bounded and grows with n") {
  for (std::size_t b : {2u, 3u, 4u}) {
    double prev = 0.0;
    for (std::size_t step = 1; step <= 5; ++step) {
      std::size_t n = (b == 3 ? 24 : 20) * step;
      SpeedupPoint p = tile_speedup(n, array(b));
      CAPTURE(b);
      CAPTURE(n);
      CHECK(p.speedup >= 1.0);
      CHECK(p.speedup <= static_cast<double>(b * b));
      CHECK(p.speedup >= prev);
      CHECK(p.rel_error <= 1e-10);
      prev = p.speedup;
    }
  }
}

TEST_CASE("parallel and serial tile runs agree") {
  TiledRun a = run_tiled_gemm(40, array(2), 3, true);
  TiledRun s = run_tiled_gemm(40, array(2), 3, false);
  CHECK(a.latency == s.latency);
  CHECK(a.c == s.c);
  for (std::size_t i = 0; i < a.tiles.size(); ++i) CHECK(a.tiles[i].finish == s.tiles[i].finish);
}

TEST_CASE("tile errors") {
  CHECK_THROWS_AS(run_tiled_gemm(30, array(4)), PartitionError);
  CHECK_THROWS_AS(run_tiled_gemm(20, array(0)), ConfigError);
  // The inner dimension 22 is not a multiple of 4.
  CHECK_THROWS_AS(run_tiled_gemm(22, array(2)), ShapeError);
  TileArrayConfig bad = array(2);
  bad.noc.link_words_per_cycle = 0;
  CHECK_THROWS_AS(run_tiled_gemm(20, bad), ConfigError);
  bad = array(2);
  bad.noc.packet_words = 0;
  CHECK_THROWS_AS(run_tiled_gemm(20, bad), ConfigError);
}
