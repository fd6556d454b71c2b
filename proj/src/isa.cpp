#include "blaspe/isa.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "blaspe/errors.hpp"

namespace blaspe {

std::string ae_name(AeLevel ae) { return "AE" + std::to_string(static_cast<int>(ae)); }

AeLevel parse_ae(const std::string& s) {
  std::string t = s;
  if (t.size() > 2 && std::tolower(static_cast<unsigned char>(t[0])) == 'a' &&
      std::tolower(static_cast<unsigned char>(t[1])) == 'e') {
    t = t.substr(2);
  }
  if (t.size() == 1 && t[0] >= '0' && t[0] < '0' + kAeLevels) return static_cast<AeLevel>(t[0] - '0');
  throw ConfigError("unknown enhancement level '" + s + "'");
}

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::LOAD: return "LOAD";
    case Opcode::STORE: return "STORE";
    case Opcode::BLOCK_LOAD: return "BLOCK_LOAD";
    case Opcode::BLOCK_STORE: return "BLOCK_STORE";
    case Opcode::FMUL: return "FMUL";
    case Opcode::FADD: return "FADD";
    case Opcode::FSUB: return "FSUB";
    case Opcode::FDIV: return "FDIV";
    case Opcode::FSQRT: return "FSQRT";
    case Opcode::DOT2: return "DOT2";
    case Opcode::DOT3: return "DOT3";
    case Opcode::DOT4: return "DOT4";
    case Opcode::NOP: return "NOP";
  }
  return "?";
}

Engine Instruction::engine() const {
  if (!is_memory()) return Engine::fps;
  if (lm != kNoLm) return Engine::ls_gm;
  return space == Space::lm ? Engine::ls_channel : Engine::fps;
}

std::uint32_t Instruction::gm_address(std::uint32_t w) const {
  if (tile_cols == 0) return addr + w;
  std::uint32_t r, c;
  if (col_major) {
    std::uint32_t rows = words / tile_cols;
    r = w % rows;
    c = w / rows;
  } else {
    r = w / tile_cols;
    c = w % tile_cols;
  }
  return addr + r * stride + c;
}

int PeConfig::max_depth() const {
  return std::max({depth_mul, depth_add, depth_dot2, depth_dot3, depth_dot4, depth_div, depth_sqrt});
}

PeConfig with_level(PeConfig cfg, AeLevel ae) {
  cfg.ae = ae;
  return cfg;
}

std::uint32_t Program::gm_size() const {
  std::uint32_t end = 0;
  for (const Operand& o : operands) end = std::max(end, o.base + o.size());
  return end;
}

const Operand& Program::operand(const std::string& name) const {
  for (const Operand& o : operands)
    if (o.name == name) return o;
  throw ShapeError("program has no operand '" + name + "'");
}

std::vector<Instruction> Program::fps_stream() const {
  std::vector<Instruction> out;
  for (const Instruction& i : code)
    if (i.engine() == Engine::fps) out.push_back(i);
  return out;
}

std::vector<Instruction> Program::lscfu_stream() const {
  std::vector<Instruction> out;
  for (const Instruction& i : code)
    if (i.engine() != Engine::fps) out.push_back(i);
  return out;
}

StaticCounts count_program(const std::vector<Instruction>& code) {
  StaticCounts c;
  for (const Instruction& i : code) {
    c.flops += i.flops;
    if (i.op == Opcode::DOT4) ++c.dot4;
    if (!i.is_memory()) continue;
    if (i.space == Space::gm) c.gm_words += i.words;
    if (i.engine() == Engine::ls_channel) c.lm_words += i.words;
  }
  return c;
}

namespace {

int dot_width(Opcode op) {
  switch (op) {
    case Opcode::DOT2: return 2;
    case Opcode::DOT3: return 3;
    case Opcode::DOT4: return 4;
    default: return 0;
  }
}

}  // namespace

std::vector<std::string> validate_program(const Program& p, const PeConfig& cfg) {
  std::vector<std::string> out;
  const std::uint32_t gm_size = p.gm_size();
  auto report = [&](std::size_t idx, const Instruction& ins, const std::string& what) {
    out.push_back("#" + std::to_string(idx) + " " + opcode_name(ins.op) + ": " + what);
  };
  auto check_regs = [&](std::size_t idx, const Instruction& ins, int base, int count, const char* role) {
    if (base + count > cfg.registers) {
      report(idx, ins, std::string(role) + " register r" + std::to_string(base + count - 1) +
                           " outside r0..r" + std::to_string(cfg.registers - 1));
    }
  };
  for (std::size_t idx = 0; idx < p.code.size(); ++idx) {
    const Instruction& ins = p.code[idx];
    if (int w = dot_width(ins.op)) {
      if (!cfg.has_dot()) report(idx, ins, std::string(opcode_name(ins.op)) + " requires AE2+");
      check_regs(idx, ins, ins.dst, 1, "destination");
      check_regs(idx, ins, ins.src_a, w, "source");
      check_regs(idx, ins, ins.src_b, w, "source");
      continue;
    }
    if (!ins.is_memory()) {
      if (ins.op == Opcode::NOP) continue;
      check_regs(idx, ins, ins.dst, 1, "destination");
      check_regs(idx, ins, ins.src_a, 1, "source");
      if (ins.op != Opcode::FSQRT) check_regs(idx, ins, ins.src_b, 1, "source");
      continue;
    }
    if (ins.is_block() && !cfg.has_block()) report(idx, ins, std::string(opcode_name(ins.op)) + " requires AE3+");
    if ((ins.space == Space::lm || ins.lm != kNoLm) && !cfg.has_lm()) report(idx, ins, "LM access requires AE1+");
    if (ins.words == 0 || ins.words > kMaxBlockWords) report(idx, ins, "transfer of " + std::to_string(ins.words) + " words");
    if (!ins.is_block() && ins.words != 1) report(idx, ins, "scalar transfer of " + std::to_string(ins.words) + " words");
    if (ins.tile_cols && ins.words % ins.tile_cols) report(idx, ins, "tile width does not divide the transfer");
    if (ins.space == Space::none) report(idx, ins, "memory operation without an address space");
    if (ins.lm == kNoLm) {
      check_regs(idx, ins, ins.is_load() ? ins.dst : ins.src_a, ins.words, ins.is_load() ? "destination" : "source");
    }
    const std::uint32_t lm_words = cfg.lm_words();
    auto check_lm = [&](std::uint32_t a) {
      if (std::uint64_t{a} + ins.words > lm_words) {
        report(idx, ins, "LM address " + std::to_string(a) + "+" + std::to_string(ins.words) +
                             " beyond capacity " + std::to_string(lm_words));
      }
    };
    if (ins.space == Space::lm) check_lm(ins.addr);
    if (ins.lm != kNoLm) check_lm(ins.lm);
    if (ins.space == Space::gm && ins.words > 0 && ins.gm_address(ins.words - 1) >= gm_size) {
      report(idx, ins, "GM address beyond the operand image");
    }
  }
  if (p.code_bytes(cfg) > cfg.imem_bytes) {
    out.push_back("code size " + std::to_string(p.code_bytes(cfg)) + " bytes exceeds instruction memory " +
                  std::to_string(cfg.imem_bytes));
  }
  return out;
}

std::string format_instruction(const Instruction& ins) {
  std::ostringstream s;
  s << opcode_name(ins.op);
  auto reg = [&](int r) { s << 'r' << r; };
  if (int w = dot_width(ins.op)) {
    (void)w;
    s << ' ';
    reg(ins.dst), s << ", ", reg(ins.src_a), s << ", ", reg(ins.src_b);
  } else if (ins.op == Opcode::FSQRT) {
    s << ' ';
    reg(ins.dst), s << ", ", reg(ins.src_a);
  } else if (!ins.is_memory()) {
    if (ins.op != Opcode::NOP) {
      s << ' ';
      reg(ins.dst), s << ", ", reg(ins.src_a), s << ", ", reg(ins.src_b);
    }
  } else {
    s << ' ';
    if (ins.lm != kNoLm) {
      s << "@LM:" << ins.lm;
    } else {
      reg(ins.is_load() ? ins.dst : ins.src_a);
    }
    s << ", @" << (ins.space == Space::gm ? "GM" : "LM") << ':' << ins.addr;
    if (ins.is_block()) s << " x" << int{ins.words};
    if (ins.tile_cols) s << " tile=" << int{ins.tile_cols} << '/' << ins.stride << (ins.col_major ? " colmajor" : "");
  }
  return s.str();
}

std::string to_assembly(const Program& p) {
  std::ostringstream s;
  s << "; " << kernel_name(p.kind) << " m=" << p.m << " k=" << p.k << " n=" << p.n << ' ' << ae_name(p.ae) << '\n';
  for (const Operand& o : p.operands) {
    s << "; operand " << o.name << " @GM:" << o.base << ' ' << o.rows << 'x' << o.cols << '\n';
  }
  for (const Instruction& i : p.code) {
    s << (i.engine() == Engine::fps ? "fps   " : "lscfu ") << format_instruction(i) << '\n';
  }
  return s.str();
}

}  // namespace blaspe
