#include <doctest.h>

#include "blaspe/errors.hpp"
#include "blaspe/isa.hpp"

using namespace blaspe;

namespace {

Instruction arith(Opcode op, int dst, int a, int b) {
  Instruction i;
  i.op = op;
  i.dst = static_cast<std::uint8_t>(dst);
  i.src_a = static_cast<std::uint8_t>(a);
  i.src_b = static_cast<std::uint8_t>(b);
  return i;
}

Program program_of(std::vector<Instruction> code, AeLevel ae) {
  Program p;
  p.ae = ae;
  p.code = std::move(code);
  p.body_instructions = static_cast<std::uint32_t>(p.code.size());
  p.operands = {{"x", 0, 4, 1}};
  p.output = "x";
  return p;
}

bool has_violation(const std::vector<std::string>& v, const std::string& needle) {
  for (const std::string& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("enhancement level names round trip") {
  for (int a = 0; a < kAeLevels; ++a) {
    AeLevel ae = static_cast<AeLevel>(a);
    CHECK(parse_ae(ae_name(ae)) == ae);
    CHECK(parse_ae(std::to_string(a)) == ae);
  }
  CHECK(parse_ae("ae4") == AeLevel::ae4);
  CHECK_THROWS_AS(parse_ae("AE6"), ConfigError);
  CHECK_THROWS_AS(parse_ae("x"), ConfigError);
}

TEST_CASE("default PE parameters") {
  PeConfig c;
  CHECK(c.registers == 64);
  CHECK(c.lm_capacity_bits == 262144);
  CHECK(c.lm_words() == 4096);
  CHECK(c.gm_latency == 20);
  CHECK(c.depth_dot4 == 15);
  CHECK(c.depth_dot4 == c.depth_mul + 2 * c.depth_add);
  CHECK(c.depth_dot2 == c.depth_mul + c.depth_add);
  CHECK(c.imem_bytes == 16384);
  CHECK(c.instr_bytes == 8);
  CHECK(c.frequency_hz == 0.2e9);
}

TEST_CASE("features accumulate with the level") {
  PeConfig c;
  for (int a = 0; a < kAeLevels; ++a) {
    c.ae = static_cast<AeLevel>(a);
    CHECK(c.has_lm() == (a >= 1));
    CHECK(c.has_dot() == (a >= 2));
    CHECK(c.has_block() == (a >= 3));
    CHECK(c.channel_words() == (a >= 4 ? 4 : 1));
    CHECK(c.prefetch() == (a >= 5));
    CHECK(c.peak_fpc() == (a >= 2 ? 7.0 : 2.0));
  }
}

TEST_CASE("validate_program flags feature use below its level") {
  Program p = program_of({arith(Opcode::DOT4, 48, 0, 16)}, AeLevel::ae0);
  PeConfig c;
  c.ae = AeLevel::ae0;
  CHECK(has_violation(validate_program(p, c), "DOT4 requires AE2+"));
  c.ae = AeLevel::ae2;
  CHECK(validate_program(p, c).empty());

  Instruction blk;
  blk.op = Opcode::BLOCK_LOAD;
  blk.space = Space::gm;
  blk.words = 4;
  blk.dst = 0;
  Program q = program_of({blk}, AeLevel::ae2);
  CHECK(has_violation(validate_program(q, c), "BLOCK_LOAD requires AE3+"));
  c.ae = AeLevel::ae3;
  CHECK(validate_program(q, c).empty());

  Instruction lm;
  lm.op = Opcode::LOAD;
  lm.space = Space::lm;
  lm.dst = 1;
  Program r = program_of({lm}, AeLevel::ae0);
  c.ae = AeLevel::ae0;
  CHECK(has_violation(validate_program(r, c), "LM access requires AE1+"));
}

TEST_CASE("validate_program flags register, address and size errors") {
  PeConfig c;
  c.ae = AeLevel::ae5;
  CHECK(has_violation(validate_program(program_of({arith(Opcode::FADD, 64, 0, 1)}, c.ae), c), "r64"));
  CHECK(has_violation(validate_program(program_of({arith(Opcode::DOT4, 0, 61, 0)}, c.ae), c), "r64"));

  Instruction far;
  far.op = Opcode::LOAD;
  far.space = Space::gm;
  far.addr = 4;
  CHECK(has_violation(validate_program(program_of({far}, c.ae), c), "GM address"));

  Instruction lm;
  lm.op = Opcode::LOAD;
  lm.space = Space::lm;
  lm.addr = 4096;
  CHECK(has_violation(validate_program(program_of({lm}, c.ae), c), "beyond capacity"));

  Program big = program_of(std::vector<Instruction>(2049, arith(Opcode::FADD, 1, 2, 3)), c.ae);
  CHECK(has_violation(validate_program(big, c), "exceeds instruction memory"));
  big.code.pop_back();
  big.body_instructions = 2048;
  CHECK(validate_program(big, c).empty());
}

TEST_CASE("instruction text") {
  CHECK(format_instruction(arith(Opcode::DOT4, 48, 0, 16)) == "DOT4 r48, r0, r16");
  CHECK(format_instruction(arith(Opcode::FMUL, 1, 2, 3)) == "FMUL r1, r2, r3");
  Instruction ld;
  ld.op = Opcode::LOAD;
  ld.space = Space::gm;
  ld.dst = 5;
  ld.addr = 123;
  CHECK(format_instruction(ld) == "LOAD r5, @GM:123");
  Instruction blk;
  blk.op = Opcode::BLOCK_LOAD;
  blk.space = Space::gm;
  blk.lm = 0;
  blk.addr = 120;
  blk.words = 16;
  blk.tile_cols = 4;
  blk.stride = 20;
  blk.col_major = true;
  CHECK(format_instruction(blk) == "BLOCK_LOAD @LM:0, @GM:120 x16 tile=4/20 colmajor");
}

TEST_CASE("engines") {
  CHECK(arith(Opcode::FADD, 0, 1, 2).engine() == Engine::fps);
  Instruction g;
  g.op = Opcode::BLOCK_LOAD;
  g.space = Space::gm;
  g.lm = 0;
  CHECK(g.engine() == Engine::ls_gm);
  Instruction ch;
  ch.op = Opcode::BLOCK_LOAD;
  ch.space = Space::lm;
  CHECK(ch.engine() == Engine::ls_channel);
  Instruction fps_gm;
  fps_gm.op = Opcode::LOAD;
  fps_gm.space = Space::gm;
  CHECK(fps_gm.engine() == Engine::fps);
}
