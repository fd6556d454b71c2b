#include <algorithm>

#include "blaspe/errors.hpp"
#include "blaspe/isa.hpp"

namespace blaspe {

namespace {

// Register file plan shared by all kernels.
constexpr std::uint8_t kRegA = 0;    // A block rows, or x chunk
constexpr std::uint8_t kRegB = 16;   // B block columns, or y chunk
constexpr std::uint8_t kRegC = 32;   // C block, accumulator, alpha
constexpr std::uint8_t kRegS = 48;   // products and partial sums

std::uint8_t r8(std::uint32_t r) { return static_cast<std::uint8_t>(r); }

struct Tile {
  std::uint32_t base;
  std::uint32_t rows;
  std::uint32_t cols;
  std::uint32_t stride;
  bool col_major;
  std::uint32_t words() const { return rows * cols; }
};

class Builder {
 public:
  Builder(Program& p, const PeConfig& cfg) : p_(p), cfg_(cfg) {}

  void next_body() {
    p_.body_instructions = std::max(p_.body_instructions, current_);
    current_ = 0;
  }

  void finish() {
    next_body();
    p_.counts = count_program(p_.code);
    if (p_.code_bytes(cfg_) > cfg_.imem_bytes) {
      throw InstructionMemoryError("block body of " + std::to_string(p_.body_instructions) + " instructions (" +
                                   std::to_string(p_.code_bytes(cfg_)) + " bytes) exceeds instruction memory of " +
                                   std::to_string(cfg_.imem_bytes) + " bytes");
    }
  }

  void arith(Opcode op, std::uint32_t d, std::uint32_t a, std::uint32_t b, std::uint8_t flops) {
    Instruction i;
    i.op = op;
    i.dst = r8(d);
    i.src_a = r8(a);
    i.src_b = r8(b);
    i.flops = flops;
    emit(i);
  }

  // FPS scalar access to global memory (AE0 only).
  void fps_load(std::uint32_t reg, std::uint32_t gm) { emit(scalar(Opcode::LOAD, reg, Space::gm, gm)); }
  void fps_store(std::uint32_t reg, std::uint32_t gm) { emit(scalar(Opcode::STORE, reg, Space::gm, gm)); }

  void gm_to_lm(std::uint32_t lm, const Tile& t) { move_lm_gm(true, lm, t); }
  void lm_to_gm(std::uint32_t lm, const Tile& t) { move_lm_gm(false, lm, t); }

  // Contiguous GM run moved in pieces of `group` words.
  void gm_to_lm_run(std::uint32_t lm, std::uint32_t gm, std::uint32_t words, std::uint32_t group) {
    run(true, lm, gm, words, group);
  }
  void lm_to_gm_run(std::uint32_t lm, std::uint32_t gm, std::uint32_t words, std::uint32_t group) {
    run(false, lm, gm, words, group);
  }

  // Channel transfers between contiguous registers and contiguous LM words.
  // Block form moves `group` words per instruction (one operand row or
  // column) so that consumers can start on the first group. `order` lists
  // the word offsets for the scalar form.
  void lm_to_reg(std::uint32_t reg, std::uint32_t lm, std::uint32_t words, std::uint32_t group,
                 const std::vector<std::uint32_t>* order = nullptr) {
    channel(true, reg, lm, words, group, order);
  }
  void reg_to_lm(std::uint32_t reg, std::uint32_t lm, std::uint32_t words, std::uint32_t group) {
    channel(false, reg, lm, words, group, nullptr);
  }

 private:
  static Instruction scalar(Opcode op, std::uint32_t reg, Space space, std::uint32_t addr) {
    Instruction i;
    i.op = op;
    (op == Opcode::LOAD ? i.dst : i.src_a) = r8(reg);
    i.space = space;
    i.addr = addr;
    return i;
  }

  static std::uint32_t tile_address(const Tile& t, std::uint32_t w) {
    std::uint32_t r = t.col_major ? w % t.rows : w / t.cols;
    std::uint32_t c = t.col_major ? w / t.rows : w % t.cols;
    return t.base + r * t.stride + c;
  }

  void move_lm_gm(bool load, std::uint32_t lm, const Tile& t) {
    if (cfg_.has_block()) {
      Instruction i;
      i.op = load ? Opcode::BLOCK_LOAD : Opcode::BLOCK_STORE;
      i.space = Space::gm;
      i.words = static_cast<std::uint8_t>(t.words());
      i.addr = t.base;
      i.lm = lm;
      if (t.rows > 1 || t.stride != t.cols) {
        i.tile_cols = static_cast<std::uint8_t>(t.cols);
        i.stride = t.stride;
        i.col_major = t.col_major;
      }
      emit(i);
      return;
    }
    for (std::uint32_t w = 0; w < t.words(); ++w) {
      Instruction i;
      i.op = load ? Opcode::LOAD : Opcode::STORE;
      i.space = Space::gm;
      i.addr = tile_address(t, w);
      i.lm = lm + w;
      emit(i);
    }
  }

  void run(bool load, std::uint32_t lm, std::uint32_t gm, std::uint32_t words, std::uint32_t group) {
    if (!cfg_.has_block()) group = words;
    for (std::uint32_t w0 = 0; w0 < words; w0 += group) {
      const std::uint32_t len = std::min(group, words - w0);
      move_lm_gm(load, lm + w0, Tile{gm + w0, 1, len, len, false});
    }
  }

  void channel(bool load, std::uint32_t reg, std::uint32_t lm, std::uint32_t words, std::uint32_t group,
               const std::vector<std::uint32_t>* order) {
    if (cfg_.has_block()) {
      for (std::uint32_t w0 = 0; w0 < words; w0 += group) {
        Instruction i;
        i.op = Opcode::BLOCK_LOAD;
        if (!load) i.op = Opcode::BLOCK_STORE;
        (load ? i.dst : i.src_a) = r8(reg + w0);
        i.space = Space::lm;
        i.addr = lm + w0;
        i.words = static_cast<std::uint8_t>(std::min(group, words - w0));
        emit(i);
      }
      return;
    }
    auto one = [&](std::uint32_t w) {
      emit(scalar(load ? Opcode::LOAD : Opcode::STORE, reg + w, Space::lm, lm + w));
    };
    if (order) {
      for (std::uint32_t w : *order) one(w);
    } else {
      for (std::uint32_t w = 0; w < words; ++w) one(w);
    }
  }

  void emit(const Instruction& i) {
    p_.code.push_back(i);
    ++current_;
  }

  Program& p_;
  const PeConfig& cfg_;
  std::uint32_t current_ = 0;
};

std::uint32_t ceil_div(std::uint32_t a, std::uint32_t b) { return (a + b - 1) / b; }

struct GemmIter {
  std::uint32_t bi, bj, bk, tile;
};

}  // namespace

Program compile_gemm(std::size_t m_, std::size_t k_, std::size_t n_, const PeConfig& cfg, FlopPolicy policy,
                     KernelKind kind) {
  if (m_ == 0 || k_ == 0 || n_ == 0) throw ShapeError("gemm dimensions must be positive");
  if (k_ % 4) throw ShapeError("inner dimension " + std::to_string(k_) + " is not a multiple of 4");
  const auto M = static_cast<std::uint32_t>(m_), K = static_cast<std::uint32_t>(k_),
             N = static_cast<std::uint32_t>(n_);
  Program p;
  p.kind = kind;
  p.ae = cfg.ae;
  p.m = M;
  p.k = K;
  p.n = N;
  const bool gemv = kind == KernelKind::gemv;
  const std::uint32_t A = 0, B = M * K, C = M * K + K * N;
  p.operands = {{"A", A, M, K}, {gemv ? "x" : "B", B, K, N}, {gemv ? "y" : "C", C, M, N}};
  p.output = p.operands.back().name;

  const std::uint32_t BM = ceil_div(M, 4), BN = ceil_div(N, 4), BK = K / 4;
  const std::uint8_t mul_credit = policy == FlopPolicy::gemm3 ? 2 : 1;
  const std::uint8_t dot_credit = policy == FlopPolicy::gemm3 ? 11 : 7;

  // LM plan: A row panel, one B block, C input and C output blocks; doubled
  // for prefetch.
  const std::uint32_t region = 16 * BK + 48;
  if (cfg.has_lm()) {
    const std::uint32_t avail = cfg.prefetch() ? cfg.lm_words() / 2 : cfg.lm_words();
    if (region > avail) {
      throw CapacityError("gemm with k=" + std::to_string(K) + " needs " + std::to_string(region) +
                          " LM words per buffer, " + std::to_string(avail) + " available");
    }
  }
  auto lm_a = [&](std::uint32_t par) { return par * region; };
  auto lm_b = [&](std::uint32_t par) { return par * region + 16 * BK; };
  auto lm_c = [&](std::uint32_t par) { return par * region + 16 * BK + 16; };
  auto lm_out = [&](std::uint32_t par) { return par * region + 16 * BK + 32; };

  // Upper bound of about 100 instructions per block iteration keeps the
  // program within a few hundred megabytes.
  constexpr std::uint64_t kMaxIterations = std::uint64_t{1} << 18;
  if (std::uint64_t{BM} * BN * BK > kMaxIterations) {
    throw CapacityError("gemm " + std::to_string(M) + "x" + std::to_string(K) + "x" + std::to_string(N) +
                        " is too large to simulate");
  }

  std::vector<GemmIter> iters;
  iters.reserve(std::size_t{BM} * BN * BK);
  for (std::uint32_t bi = 0, tile = 0; bi < BM; ++bi)
    for (std::uint32_t bj = 0; bj < BN; ++bj, ++tile)
      for (std::uint32_t bk = 0; bk < BK; ++bk) iters.push_back({bi, bj, bk, tile});

  // Rows and columns are split into blocks of 3 or 4 rather than leaving a
  // narrow remainder block.
  auto row0 = [&](std::uint32_t bi) { return bi * M / BM; };
  auto col0 = [&](std::uint32_t bj) { return bj * N / BN; };
  auto rows_of = [&](std::uint32_t bi) { return row0(bi + 1) - row0(bi); };
  auto cols_of = [&](std::uint32_t bj) { return col0(bj + 1) - col0(bj); };
  auto par_a = [&](const GemmIter& it) { return cfg.prefetch() ? it.bi % 2 : 0u; };
  auto par_c = [&](const GemmIter& it) { return cfg.prefetch() ? it.tile % 2 : 0u; };
  auto par_b = [&](std::size_t t) { return cfg.prefetch() ? static_cast<std::uint32_t>(t % 2) : 0u; };
  auto c_tile = [&](const GemmIter& it) {
    return Tile{C + row0(it.bi) * N + col0(it.bj), rows_of(it.bi), cols_of(it.bj), N, false};
  };

  Builder b(p, cfg);

  auto fetch = [&](std::size_t t, bool with_panel) {
    const GemmIter& it = iters[t];
    const std::uint32_t r = rows_of(it.bi), c = cols_of(it.bj);
    if (with_panel && it.bj == 0 && it.bk == 0) {
      for (std::uint32_t bk = 0; bk < BK; ++bk)
        b.gm_to_lm(lm_a(par_a(it)) + 16 * bk, Tile{A + row0(it.bi) * K + 4 * bk, r, 4, K, false});
    }
    if (it.bk == 0) b.gm_to_lm(lm_c(par_c(it)), c_tile(it));
    b.gm_to_lm(lm_b(par_b(t)), Tile{B + 4 * it.bk * N + col0(it.bj), 4, c, N, true});
  };

  auto c_reg = [](std::uint32_t i, std::uint32_t j, std::uint32_t c) { return kRegC + i * c + j; };

  // Blocks with at most 12 outputs are software pipelined: products
  // alternate between two scratch sets and are accumulated one step late.
  // The second set borrows registers such a block leaves unused.
  auto scratch = [&](std::uint32_t r, std::uint32_t c, std::uint32_t half, std::uint32_t slot) -> std::uint32_t {
    if (half == 0) return kRegS + slot;
    if (r * c <= 8) return kRegS + 8 + slot;
    std::uint32_t spare[16], count = 0;
    for (std::uint32_t x = 60; x < 64; ++x) spare[count++] = x;
    for (std::uint32_t x = kRegC + r * c; x < kRegS && count < 16; ++x) spare[count++] = x;
    for (std::uint32_t x = kRegB + 4 * c; x < kRegC && count < 16; ++x) spare[count++] = x;
    for (std::uint32_t x = kRegA + 4 * r; x < kRegB && count < 16; ++x) spare[count++] = x;
    return spare[slot];
  };
  std::uint32_t pending_half = 0;
  bool pending = false;
  auto accumulate = [&](std::uint32_t r, std::uint32_t c, std::uint32_t half) {
    for (std::uint32_t j = 0; j < c; ++j)
      for (std::uint32_t i = 0; i < r; ++i)
        b.arith(Opcode::FADD, c_reg(i, j, c), c_reg(i, j, c), scratch(r, c, half, c * i + j), 1);
  };
  auto compute = [&](std::uint32_t r, std::uint32_t c, bool last) {
    if (cfg.has_dot() && r * c <= 12) {
      const std::uint32_t half = pending ? pending_half ^ 1u : 0u;
      for (std::uint32_t j = 0; j < c; ++j)
        for (std::uint32_t i = 0; i < r; ++i)
          b.arith(Opcode::DOT4, scratch(r, c, half, c * i + j), kRegA + 4 * i, kRegB + 4 * j, dot_credit);
      if (pending) accumulate(r, c, pending_half);
      pending = !last;
      pending_half = half;
      if (last) accumulate(r, c, half);
      return;
    }
    if (cfg.has_dot()) {
      for (std::uint32_t j = 0; j < c; ++j)
        for (std::uint32_t i = 0; i < r; ++i)
          b.arith(Opcode::DOT4, kRegS + 4 * i + j, kRegA + 4 * i, kRegB + 4 * j, dot_credit);
      for (std::uint32_t j = 0; j < c; ++j)
        for (std::uint32_t i = 0; i < r; ++i)
          b.arith(Opcode::FADD, c_reg(i, j, c), c_reg(i, j, c), kRegS + 4 * i + j, 1);
      return;
    }
    for (std::uint32_t kk = 0; kk < 4; ++kk) {
      for (std::uint32_t i = 0; i < r; ++i)
        for (std::uint32_t j = 0; j < c; ++j)
          b.arith(Opcode::FMUL, kRegS + 4 * i + j, kRegA + 4 * i + kk, kRegB + 4 * j + kk, mul_credit);
      for (std::uint32_t i = 0; i < r; ++i)
        for (std::uint32_t j = 0; j < c; ++j)
          b.arith(Opcode::FADD, c_reg(i, j, c), c_reg(i, j, c), kRegS + 4 * i + j, 1);
    }
  };

  auto writeback = [&](const GemmIter& it) {
    const std::uint32_t words = rows_of(it.bi) * cols_of(it.bj);
    b.reg_to_lm(kRegC, lm_out(par_c(it)), words, cols_of(it.bj));
    b.lm_to_gm(lm_out(par_c(it)), c_tile(it));
  };

  // AE1 feeds the scalar kernel one k-slice at a time.
  std::vector<std::uint32_t> order_a, order_b;

  for (std::size_t t = 0; t < iters.size(); ++t) {
    const GemmIter& it = iters[t];
    const std::uint32_t r = rows_of(it.bi), c = cols_of(it.bj);
    const bool first = it.bk == 0, last = it.bk + 1 == BK;
    b.next_body();
    if (!cfg.has_lm()) {
      const Tile ct = c_tile(it);
      if (first)
        for (std::uint32_t i = 0; i < r; ++i)
          for (std::uint32_t j = 0; j < c; ++j) b.fps_load(c_reg(i, j, c), ct.base + i * N + j);
      for (std::uint32_t kk = 0; kk < 4; ++kk) {
        for (std::uint32_t i = 0; i < r; ++i) b.fps_load(kRegA + 4 * i + kk, A + (row0(it.bi) + i) * K + 4 * it.bk + kk);
        for (std::uint32_t j = 0; j < c; ++j) b.fps_load(kRegB + 4 * j + kk, B + (4 * it.bk + kk) * N + col0(it.bj) + j);
      }
      compute(r, c, last);
      if (last)
        for (std::uint32_t i = 0; i < r; ++i)
          for (std::uint32_t j = 0; j < c; ++j) b.fps_store(c_reg(i, j, c), ct.base + i * N + j);
      continue;
    }
    if (!cfg.prefetch()) {
      fetch(t, true);
    } else {
      if (t == 0) fetch(0, true);
      if (t + 1 < iters.size()) fetch(t + 1, false);
      // The next A panel arrives piecewise while this block row computes.
      const std::uint32_t step = it.bj * BK + it.bk;
      if (it.bi + 1 < BM && step % BN == 0) {
        const std::uint32_t q = step / BN, nb = it.bi + 1;
        b.gm_to_lm(lm_a(nb % 2) + 16 * q, Tile{A + row0(nb) * K + 4 * q, rows_of(nb), 4, K, false});
      }
    }
    const std::uint32_t a_lm = lm_a(par_a(it)) + 16 * it.bk, b_lm = lm_b(par_b(t));
    if (cfg.has_dot()) {
      b.lm_to_reg(kRegA, a_lm, 4 * r, 4);
      b.lm_to_reg(kRegB, b_lm, 4 * c, 4);
    } else {
      // Interleave A column kk with B row kk.
      for (std::uint32_t kk = 0; kk < 4; ++kk) {
        order_a.clear();
        order_b.clear();
        for (std::uint32_t i = 0; i < r; ++i) order_a.push_back(4 * i + kk);
        for (std::uint32_t j = 0; j < c; ++j) order_b.push_back(4 * j + kk);
        b.lm_to_reg(kRegA, a_lm, 4 * r, 4, &order_a);
        b.lm_to_reg(kRegB, b_lm, 4 * c, 4, &order_b);
      }
    }
    // The previous tile's C is written back after this tile's fetches so that
    // the in-order GM port does not hold them behind the store.
    if (first && t > 0) writeback(iters[t - 1]);
    if (first) b.lm_to_reg(kRegC, lm_c(par_c(it)), r * c, c);
    compute(r, c, last);
  }
  if (cfg.has_lm()) writeback(iters.back());
  b.finish();
  return p;
}

namespace {

// ddot, dnrm2 and daxpy stream 16-element chunks.
Program compile_vector(KernelKind kind, std::uint32_t n, const PeConfig& cfg) {
  Program p;
  p.kind = kind;
  p.ae = cfg.ae;
  p.m = 1;
  p.k = n;
  p.n = 1;
  const bool axpy = kind == KernelKind::daxpy;
  const bool two_inputs = kind != KernelKind::dnrm2;
  std::uint32_t x = 0, y = 0, out = 0, alpha = 0;
  if (axpy) {
    alpha = 0, x = 1, y = 1 + n, out = y;
    p.operands = {{"alpha", alpha, 1, 1}, {"x", x, n, 1}, {"y", y, n, 1}};
    p.output = "y";
  } else if (two_inputs) {
    x = 0, y = n, out = 2 * n;
    p.operands = {{"x", x, n, 1}, {"y", y, n, 1}, {"out", out, 1, 1}};
    p.output = "out";
  } else {
    x = 0, out = n;
    p.operands = {{"x", x, n, 1}, {"out", out, 1, 1}};
    p.output = "out";
  }

  // LM: x and y slots per buffer, then one word for alpha or the result.
  auto lm_x = [&](std::uint32_t par) { return 32 * par; };
  auto lm_y = [&](std::uint32_t par) { return 32 * par + 16; };
  const std::uint32_t lm_scalar = 64;

  const std::uint32_t chunks = (n + 15) / 16;
  auto len_of = [&](std::uint32_t q) { return std::min(16u, n - 16 * q); };
  auto par = [&](std::uint32_t q) { return cfg.prefetch() ? q % 2 : 0u; };
  const std::uint8_t acc = kRegC;
  const std::uint8_t yreg = two_inputs ? kRegB : kRegA;

  Builder b(p, cfg);
  auto fetch = [&](std::uint32_t q) {
    const std::uint32_t len = len_of(q);
    b.gm_to_lm_run(lm_x(par(q)), x + 16 * q, len, 4);
    if (two_inputs) b.gm_to_lm_run(lm_y(par(q)), y + 16 * q, len, 4);
  };

  if (axpy) {
    if (cfg.has_lm()) {
      b.gm_to_lm(lm_scalar, Tile{alpha, 1, 1, 1, false});
      b.lm_to_reg(acc, lm_scalar, 1, 1);
    } else {
      b.fps_load(acc, alpha);
    }
  }

  bool first = true;
  for (std::uint32_t q = 0; q < chunks; ++q) {
    const std::uint32_t len = len_of(q);
    b.next_body();
    if (!cfg.has_lm()) {
      for (std::uint32_t e = 0; e < len; ++e) {
        b.fps_load(kRegA + e, x + 16 * q + e);
        if (two_inputs) b.fps_load(kRegB + e, y + 16 * q + e);
      }
    } else {
      if (!cfg.prefetch()) {
        fetch(q);
      } else {
        if (q == 0) fetch(0);
        if (q + 1 < chunks) fetch(q + 1);
      }
      b.lm_to_reg(kRegA, lm_x(par(q)), len, 4);
      if (two_inputs) b.lm_to_reg(kRegB, lm_y(par(q)), len, 4);
    }

    if (axpy) {
      for (std::uint32_t e = 0; e < len; ++e) b.arith(Opcode::FMUL, kRegS + e, acc, kRegA + e, 1);
      for (std::uint32_t e = 0; e < len; ++e) b.arith(Opcode::FADD, kRegB + e, kRegS + e, kRegB + e, 1);
      if (cfg.has_lm()) {
        b.reg_to_lm(kRegB, lm_y(par(q)), len, 4);
        b.lm_to_gm_run(lm_y(par(q)), y + 16 * q, len, 4);
      } else {
        for (std::uint32_t e = 0; e < len; ++e) b.fps_store(kRegB + e, y + 16 * q + e);
      }
      continue;
    }

    // Products land in scratch registers, except the very first which
    // initialises the accumulator. The sum is then chained in order.
    std::vector<std::uint8_t> partials;
    const std::uint32_t groups = cfg.has_dot() ? len / 4 : 0;
    for (std::uint32_t g = 0; g < groups; ++g) {
      std::uint8_t d = first ? acc : r8(kRegS + g);
      b.arith(Opcode::DOT4, d, kRegA + 4 * g, yreg + 4 * g, 7);
      if (!first) partials.push_back(d);
      first = false;
    }
    for (std::uint32_t e = 4 * groups; e < len; ++e) {
      std::uint8_t d = first ? acc : r8(kRegS + e);
      b.arith(Opcode::FMUL, d, kRegA + e, yreg + e, 1);
      if (!first) partials.push_back(d);
      first = false;
    }
    for (std::uint8_t s : partials) b.arith(Opcode::FADD, acc, acc, s, 1);
  }

  if (!axpy) {
    if (kind == KernelKind::dnrm2) b.arith(Opcode::FSQRT, acc, acc, 0, 1);
    if (cfg.has_lm()) {
      b.reg_to_lm(acc, lm_scalar, 1, 1);
      b.lm_to_gm(lm_scalar, Tile{out, 1, 1, 1, false});
    } else {
      b.fps_store(acc, out);
    }
  }
  b.finish();
  return p;
}

}  // namespace

Program compile_kernel(KernelKind kind, std::size_t n, const PeConfig& cfg) {
  if (!is_pe_kernel(kind)) {
    throw ShapeError(std::string(kernel_name(kind)) + " is a DAG-only kernel and does not run on the PE");
  }
  if (n == 0) throw ShapeError("n must be positive");
  if (n > (1u << 20)) throw ShapeError("n=" + std::to_string(n) + " is too large");
  switch (kind) {
    case KernelKind::gemm:
    case KernelKind::gemv:
      if (n % 4) {
        throw ShapeError(std::string(kernel_name(kind)) + " needs n divisible by 4, got " + std::to_string(n));
      }
      if (kind == KernelKind::gemm) return compile_gemm(n, n, n, cfg, FlopPolicy::gemm3, kind);
      return compile_gemm(n, n, 1, cfg, FlopPolicy::actual, kind);
    default:
      return compile_vector(kind, static_cast<std::uint32_t>(n), cfg);
  }
}

}  // namespace blaspe
