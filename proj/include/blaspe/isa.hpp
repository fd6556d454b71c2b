#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "blaspe/kernel.hpp"

namespace blaspe {

// Architectural enhancement levels. Each level includes all earlier ones:
// AE1 local memory and load-store unit, AE2 DOT instructions, AE3 block
// transfers, AE4 wide channel, AE5 software prefetch.
enum class AeLevel : int { ae0 = 0, ae1, ae2, ae3, ae4, ae5 };
inline constexpr int kAeLevels = 6;

std::string ae_name(AeLevel ae);
AeLevel parse_ae(const std::string& s);  // "AE3", "ae3" or "3"

enum class Opcode : std::uint8_t {
  LOAD, STORE, BLOCK_LOAD, BLOCK_STORE,
  FMUL, FADD, FSUB, FDIV, FSQRT,
  DOT2, DOT3, DOT4,
  NOP,
};

const char* opcode_name(Opcode op);

enum class Space : std::uint8_t { none, lm, gm };

// The load-store unit runs two in-order engines: one owns the global memory
// port, the other the register channel. The FPS runs the third.
enum class Engine : std::uint8_t { fps = 0, ls_gm = 1, ls_channel = 2 };
inline constexpr int kEngines = 3;

inline constexpr std::uint32_t kNoLm = 0xffffffffu;

struct Instruction {
  Opcode op = Opcode::NOP;
  std::uint8_t dst = 0;    // destination register (or first of a group)
  std::uint8_t src_a = 0;  // first source register (or group base)
  std::uint8_t src_b = 0;
  Space space = Space::none;  // far side of a memory operation
  std::uint8_t words = 1;     // transfer extent, at most 16
  std::uint8_t tile_cols = 0; // GM tile row width, 0 for a contiguous run
  bool col_major = false;     // LM side holds the GM tile column by column
  std::uint8_t flops = 0;     // accounted floating point operations
  std::uint32_t stride = 0;   // GM tile row stride
  std::uint32_t addr = 0;     // far address
  std::uint32_t lm = kNoLm;   // LM address of an LM<->GM move

  bool is_memory() const { return op <= Opcode::BLOCK_STORE; }
  bool is_load() const { return op == Opcode::LOAD || op == Opcode::BLOCK_LOAD; }
  bool is_block() const { return op == Opcode::BLOCK_LOAD || op == Opcode::BLOCK_STORE; }
  bool is_lm_gm() const { return is_memory() && lm != kNoLm; }
  Engine engine() const;
  // Global address of word w of a GM-side transfer.
  std::uint32_t gm_address(std::uint32_t w) const;
};

inline constexpr std::size_t kMaxBlockWords = 16;

struct PeConfig {
  AeLevel ae = AeLevel::ae5;
  int registers = 64;
  std::uint64_t lm_capacity_bits = 262144;
  int gm_latency = 20;
  int gm_handshake = 2;
  int lscfu_handshake = 1;
  int wide_channel_words = 4;
  int depth_mul = 5;
  int depth_add = 5;
  int depth_dot2 = 10;
  int depth_dot3 = 15;
  int depth_dot4 = 15;
  int depth_div = 16;
  int depth_sqrt = 16;
  std::uint32_t imem_bytes = 16384;
  std::uint32_t instr_bytes = 8;
  double frequency_hz = 0.2e9;
  std::array<double, kAeLevels> power_watts{7.2374e-3, 0.0137516, 0.0293185,
                                            0.0293226, 0.0293100, 0.0293085};

  std::uint32_t lm_words() const { return static_cast<std::uint32_t>(lm_capacity_bits / 64); }
  int channel_words() const { return ae >= AeLevel::ae4 ? wide_channel_words : 1; }
  bool has_lm() const { return ae >= AeLevel::ae1; }
  bool has_dot() const { return ae >= AeLevel::ae2; }
  bool has_block() const { return ae >= AeLevel::ae3; }
  bool prefetch() const { return ae >= AeLevel::ae5; }
  double power() const { return power_watts[static_cast<int>(ae)]; }
  double peak_fpc() const { return has_dot() ? 7.0 : 2.0; }
  int max_depth() const;
};

PeConfig with_level(PeConfig cfg, AeLevel ae);

struct Operand {
  std::string name;
  std::uint32_t base = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t size() const { return rows * cols; }
};

struct StaticCounts {
  std::uint64_t flops = 0;
  std::uint64_t dot4 = 0;
  std::uint64_t gm_words = 0;  // words through the GM port
  std::uint64_t lm_words = 0;  // words through the register channel
  bool operator==(const StaticCounts&) const = default;
};

struct Program {
  KernelKind kind = KernelKind::gemm;
  AeLevel ae = AeLevel::ae0;
  std::uint32_t m = 0, k = 0, n = 0;  // gemm view: C(m x n) += A(m x k) B(k x n)
  std::vector<Instruction> code;      // merged program order
  std::vector<Operand> operands;      // GM layout
  std::string output;
  std::uint32_t body_instructions = 0;  // largest straight-line block body
  StaticCounts counts;

  std::uint32_t gm_size() const;
  const Operand& operand(const std::string& name) const;
  std::uint64_t code_bytes(const PeConfig& cfg) const { return std::uint64_t{body_instructions} * cfg.instr_bytes; }
  std::vector<Instruction> fps_stream() const;
  std::vector<Instruction> lscfu_stream() const;
};

// Accounting policy for flop credits.
enum class FlopPolicy {
  actual,   // one per floating point operation
  gemm3,    // multiplies count twice so that gemm totals 3 n^3
};

// Throws ShapeError, CapacityError or InstructionMemoryError.
Program compile_kernel(KernelKind kind, std::size_t n, const PeConfig& cfg);
// C(m x n) += A(m x k) B(k x n); k must be a multiple of 4.
Program compile_gemm(std::size_t m, std::size_t k, std::size_t n, const PeConfig& cfg,
                     FlopPolicy policy = FlopPolicy::gemm3, KernelKind kind = KernelKind::gemm);

StaticCounts count_program(const std::vector<Instruction>& code);
std::vector<std::string> validate_program(const Program& p, const PeConfig& cfg);

std::string format_instruction(const Instruction& ins);
std::string to_assembly(const Program& p);

}  // namespace blaspe
