#include "blaspe/pe_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "blaspe/errors.hpp"

namespace blaspe {

double rdp_eval(int k, const std::vector<double>& a, const std::vector<double>& b) {
  if (k < 2 || k > 4) throw DimensionError("rdp_eval supports k in 2..4, got " + std::to_string(k));
  if (a.size() != static_cast<std::size_t>(k) || b.size() != static_cast<std::size_t>(k)) {
    throw DimensionError("rdp_eval: operands must have " + std::to_string(k) + " elements");
  }
  double p0 = a[0] * b[0], p1 = a[1] * b[1];
  double s = p0 + p1;
  if (k == 2) return s;
  double p2 = a[2] * b[2];
  if (k == 3) return s + p2;
  double p3 = a[3] * b[3];
  return s + (p2 + p3);
}

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

enum class Writer : std::uint8_t { none, fps_arith, fps_gm, channel };
enum class Cause : std::uint8_t { raw, lm, gm, bandwidth };

struct Deps {
  std::int32_t issued[kEngines] = {-1, -1, -1};  // must have issued
  std::int32_t read[kEngines] = {-1, -1, -1};    // must have read its sources
};

struct Attempt {
  bool issued = false;
  Cause cause = Cause::raw;
  std::uint64_t wake = kNever;
};

Attempt blocked(Cause c, std::uint64_t wake) { return {false, c, wake}; }

int dot_width(Opcode op) {
  return op == Opcode::DOT2 ? 2 : op == Opcode::DOT3 ? 3 : op == Opcode::DOT4 ? 4 : 0;
}

class Simulator {
 public:
  Simulator(const Program& p, const PeConfig& cfg, const std::vector<double>& image, const SimOptions& opt)
      : p_(p), cfg_(cfg), opt_(opt), regs_(cfg.registers), lm_words_(cfg.lm_words()),
        gm_size_(static_cast<std::uint32_t>(image.size())) {
    reg_val_.assign(regs_, 0.0);
    reg_ready_.assign(regs_, kNever);
    reg_writer_.assign(regs_, Writer::none);
    for (const auto& [r, v] : opt.registers) {
      if (r < 0 || r >= regs_) throw AddressFault("preloaded register r" + std::to_string(r) + " does not exist");
      reg_val_[r] = v;
      reg_ready_[r] = 0;
    }
    if (cfg.has_lm()) {
      lm_val_.assign(lm_words_, 0.0);
      lm_ready_.assign(lm_words_, kNever);
    }
    gm_ = image;
    gm_ready_.assign(image.size(), 0);
    analyse();
  }

  SimResult run() {
    std::uint64_t t = 0;
    auto pending = [&](int e) { return ptr_[e] < stream_[e].size(); };
    while (pending(0) || pending(1) || pending(2)) {
      Attempt a[kEngines];
      bool any = false;
      for (int e : {1, 2, 0}) {
        if (!pending(e)) continue;
        a[e] = try_issue(static_cast<Engine>(e), t);
        any = any || a[e].issued;
      }
      std::uint64_t span = 1;
      if (!any) {
        std::uint64_t next = kNever;
        for (int e = 0; e < kEngines; ++e)
          if (pending(e)) next = std::min(next, a[e].wake);
        if (next == kNever || next <= t) {
          throw DeadlockError("deadlock at cycle " + std::to_string(t) + ": no engine can make progress" +
                              describe_block());
        }
        if (next > horizon_ + cfg_.gm_latency + cfg_.max_depth()) {
          throw DeadlockError("deadlock at cycle " + std::to_string(t) + ": no progress expected before cycle " +
                              std::to_string(next));
        }
        span = next - t;
      }
      if (a[0].issued) {
        r_.busy.fps_issue += 1;
      } else if (!pending(0) && !a[0].issued) {
        r_.stalls.drain += span;
      } else {
        switch (a[0].cause) {
          case Cause::raw: r_.stalls.raw_hazard += span; break;
          case Cause::lm: r_.stalls.lm_wait += span; break;
          case Cause::gm: r_.stalls.gm_wait += span; break;
          case Cause::bandwidth: r_.stalls.bandwidth_wait += span; break;
        }
      }
      t += span;
    }
    const std::uint64_t end = std::max(t, horizon_);
    r_.stalls.drain += end - t;
    r_.latency = end;
    r_.gm = std::move(gm_);
    return std::move(r_);
  }

 private:
  // Location ids: registers, then LM words, then GM words.
  std::uint32_t reg_loc(std::uint32_t r, const Instruction& ins) const {
    if (r >= static_cast<std::uint32_t>(regs_)) {
      throw AddressFault(format_instruction(ins) + ": register r" + std::to_string(r) + " does not exist");
    }
    return r;
  }
  std::uint32_t lm_loc(std::uint32_t a, const Instruction& ins) const {
    if (!cfg_.has_lm()) throw AddressFault(format_instruction(ins) + ": no local memory below AE1");
    if (a >= lm_words_) {
      throw CapacityError(format_instruction(ins) + ": LM word " + std::to_string(a) + " beyond capacity " +
                          std::to_string(lm_words_));
    }
    return regs_ + a;
  }
  std::uint32_t gm_loc(std::uint32_t a, const Instruction& ins) const {
    if (a >= gm_size_) {
      throw AddressFault(format_instruction(ins) + ": GM word " + std::to_string(a) + " outside image of " +
                         std::to_string(gm_size_));
    }
    return regs_ + lm_words_ + a;
  }

  template <class R, class W>
  void locations(const Instruction& ins, R&& on_read, W&& on_write) const {
    if (!ins.is_memory()) {
      if (ins.op == Opcode::NOP) return;
      if (int k = dot_width(ins.op)) {
        for (int q = 0; q < k; ++q) on_read(reg_loc(ins.src_a + q, ins));
        for (int q = 0; q < k; ++q) on_read(reg_loc(ins.src_b + q, ins));
      } else {
        on_read(reg_loc(ins.src_a, ins));
        if (ins.op != Opcode::FSQRT) on_read(reg_loc(ins.src_b, ins));
      }
      on_write(reg_loc(ins.dst, ins));
      return;
    }
    const bool load = ins.is_load();
    for (std::uint32_t w = 0; w < ins.words; ++w) {
      switch (ins.engine()) {
        case Engine::ls_gm:
          if (load) {
            on_read(gm_loc(ins.gm_address(w), ins));
            on_write(lm_loc(ins.lm + w, ins));
          } else {
            on_read(lm_loc(ins.lm + w, ins));
            on_write(gm_loc(ins.gm_address(w), ins));
          }
          break;
        case Engine::ls_channel:
          if (load) {
            on_read(lm_loc(ins.addr + w, ins));
            on_write(reg_loc(ins.dst + w, ins));
          } else {
            on_read(reg_loc(ins.src_a + w, ins));
            on_write(lm_loc(ins.addr + w, ins));
          }
          break;
        case Engine::fps:
          if (load) {
            on_read(gm_loc(ins.addr + w, ins));
            on_write(reg_loc(ins.dst + w, ins));
          } else {
            on_read(reg_loc(ins.src_a + w, ins));
            on_write(gm_loc(ins.addr + w, ins));
          }
          break;
      }
    }
  }

  // Cross-engine ordering derived from the merged program order: a reader
  // waits for the writer it follows, a writer waits for earlier readers and
  // writers of the same location on other engines.
  void analyse() {
    const std::size_t n = p_.code.size();
    const std::size_t locs = std::size_t(regs_) + lm_words_ + gm_size_;
    std::vector<std::int32_t> last_writer(locs, -1);
    std::vector<std::array<std::int32_t, kEngines>> last_reader(locs, {-1, -1, -1});
    deps_.assign(n, Deps{});
    issue_time_.assign(n, kNever);
    reads_done_.assign(n, kNever);
    std::vector<std::uint32_t> reads, writes;
    for (std::size_t i = 0; i < n; ++i) {
      const Instruction& ins = p_.code[i];
      const int e = static_cast<int>(ins.engine());
      stream_[e].push_back(static_cast<std::uint32_t>(i));
      reads.clear();
      writes.clear();
      locations(ins, [&](std::uint32_t l) { reads.push_back(l); }, [&](std::uint32_t l) { writes.push_back(l); });
      Deps& d = deps_[i];
      auto need_issue = [&](std::int32_t j) {
        if (j < 0) return;
        int f = static_cast<int>(p_.code[j].engine());
        if (f != e) d.issued[f] = std::max(d.issued[f], j);
      };
      for (std::uint32_t l : reads) need_issue(last_writer[l]);
      for (std::uint32_t l : writes) {
        need_issue(last_writer[l]);
        for (int f = 0; f < kEngines; ++f)
          if (f != e) d.read[f] = std::max(d.read[f], last_reader[l][f]);
      }
      for (std::uint32_t l : reads) last_reader[l][e] = static_cast<std::int32_t>(i);
      for (std::uint32_t l : writes) {
        last_writer[l] = static_cast<std::int32_t>(i);
        last_reader[l] = {-1, -1, -1};
      }
    }
  }

  bool deps_met(std::uint32_t i, std::uint64_t t, Attempt& out) const {
    const Deps& d = deps_[i];
    for (int f = 0; f < kEngines; ++f) {
      if (d.issued[f] >= 0) {
        std::uint64_t it = issue_time_[d.issued[f]];
        if (it == kNever || it >= t) {
          out = blocked(Cause::lm, it == kNever ? kNever : it + 1);
          return false;
        }
      }
      if (d.read[f] >= 0) {
        std::uint64_t rd = reads_done_[d.read[f]];
        if (rd == kNever || rd >= t) {
          out = blocked(Cause::bandwidth, rd == kNever ? kNever : rd + 1);
          return false;
        }
      }
    }
    return true;
  }

  static Cause cause_of(Writer w) {
    switch (w) {
      case Writer::fps_arith: return Cause::raw;
      case Writer::fps_gm: return Cause::gm;
      default: return Cause::lm;
    }
  }

  void note(std::uint64_t when) {
    if (when != kNever) horizon_ = std::max(horizon_, when);
  }

  void trace(std::uint64_t t, const char* engine, const Instruction& ins) {
    if (opt_.trace) *opt_.trace << t << ' ' << engine << ' ' << format_instruction(ins) << '\n';
  }

  void retire(std::uint32_t i, std::uint64_t t, std::uint64_t reads_done) {
    issue_time_[i] = t;
    reads_done_[i] = reads_done;
    const Instruction& ins = p_.code[i];
    r_.flops += ins.flops;
    if (ins.op == Opcode::DOT4) ++r_.dot4;
    if (ins.is_memory()) {
      if (ins.space == Space::gm) r_.gm_words += ins.words;
      if (ins.engine() == Engine::ls_channel) r_.lm_words += ins.words;
    }
  }

  Attempt try_issue(Engine e, std::uint64_t t) {
    switch (e) {
      case Engine::fps: return try_fps(t);
      case Engine::ls_gm: return try_gm(t);
      case Engine::ls_channel: return try_channel(t);
    }
    return {};
  }

  Attempt try_fps(std::uint64_t t) {
    if (fps_busy_until_ > t) return blocked(Cause::bandwidth, fps_busy_until_);
    const std::uint32_t i = stream_[0][ptr_[0]];
    const Instruction& ins = p_.code[i];
    Attempt out;
    if (!deps_met(i, t, out)) return out;

    auto need_reg = [&](int r) -> bool {
      if (reg_ready_[r] > t) {
        out = blocked(cause_of(reg_writer_[r]), reg_ready_[r]);
        return false;
      }
      return true;
    };
    const int k = dot_width(ins.op);
    if (ins.is_memory()) {
      if (ins.is_load()) {
        if (gm_ready_[ins.addr] > t) return blocked(Cause::gm, gm_ready_[ins.addr]);
      } else if (!need_reg(ins.src_a)) {
        return out;
      }
    } else if (k) {
      for (int q = 0; q < k; ++q)
        if (!need_reg(ins.src_a + q) || !need_reg(ins.src_b + q)) return out;
    } else if (ins.op != Opcode::NOP) {
      if (!need_reg(ins.src_a)) return out;
      if (ins.op != Opcode::FSQRT && !need_reg(ins.src_b)) return out;
      if ((ins.op == Opcode::FDIV || ins.op == Opcode::FSQRT) && div_free_ > t) return blocked(Cause::raw, div_free_);
    }

    auto write = [&](int r, double v, std::uint64_t ready, Writer w) {
      reg_val_[r] = v;
      reg_ready_[r] = ready;
      reg_writer_[r] = w;
      note(ready);
    };
    const double a = reg_val_[ins.src_a], b = reg_val_[ins.src_b];
    switch (ins.op) {
      case Opcode::FMUL: write(ins.dst, a * b, t + cfg_.depth_mul, Writer::fps_arith), ++r_.busy.mul; break;
      case Opcode::FADD: write(ins.dst, a + b, t + cfg_.depth_add, Writer::fps_arith), ++r_.busy.add; break;
      case Opcode::FSUB: write(ins.dst, a - b, t + cfg_.depth_add, Writer::fps_arith), ++r_.busy.add; break;
      case Opcode::FDIV:
        write(ins.dst, a / b, t + cfg_.depth_div, Writer::fps_arith);
        div_free_ = t + cfg_.depth_div;
        r_.busy.div_sqrt += cfg_.depth_div;
        break;
      case Opcode::FSQRT:
        write(ins.dst, std::sqrt(a), t + cfg_.depth_sqrt, Writer::fps_arith);
        div_free_ = t + cfg_.depth_sqrt;
        r_.busy.div_sqrt += cfg_.depth_sqrt;
        break;
      case Opcode::DOT2:
      case Opcode::DOT3:
      case Opcode::DOT4: {
        std::vector<double> x(reg_val_.begin() + ins.src_a, reg_val_.begin() + ins.src_a + k);
        std::vector<double> y(reg_val_.begin() + ins.src_b, reg_val_.begin() + ins.src_b + k);
        int depth = k == 2 ? cfg_.depth_dot2 : k == 3 ? cfg_.depth_dot3 : cfg_.depth_dot4;
        write(ins.dst, rdp_eval(k, x, y), t + depth, Writer::fps_arith);
        ++r_.busy.dot;
        break;
      }
      case Opcode::NOP: break;
      case Opcode::LOAD:
        write(ins.dst, gm_[ins.addr], t + cfg_.gm_handshake + cfg_.gm_latency, Writer::fps_gm);
        fps_busy_until_ = t + 1 + cfg_.gm_handshake;
        break;
      case Opcode::STORE:
        gm_[ins.addr] = reg_val_[ins.src_a];
        gm_ready_[ins.addr] = t + cfg_.gm_handshake + cfg_.gm_latency;
        note(gm_ready_[ins.addr]);
        fps_busy_until_ = t + 1 + cfg_.gm_handshake;
        break;
      default:
        throw AddressFault(format_instruction(ins) + ": block transfer issued to the FPS");
    }
    note(fps_busy_until_);
    trace(t, "fps", ins);
    retire(i, t, t);
    ++ptr_[0];
    return {true, Cause::raw, t + 1};
  }

  // One GM transaction: a handshake, then one word per cycle.
  Attempt try_gm(std::uint64_t t) {
    if (port_free_ > t) return blocked(Cause::raw, port_free_);
    const std::uint32_t i = stream_[1][ptr_[1]];
    const Instruction& ins = p_.code[i];
    Attempt out;
    if (!deps_met(i, t, out)) return out;
    const bool load = ins.is_load();
    for (std::uint32_t w = 0; w < ins.words; ++w) {
      if (!load && lm_ready_[ins.lm + w] == kNever) return blocked(Cause::raw, kNever);
    }
    std::uint64_t depart = t + cfg_.gm_handshake;
    std::uint64_t last = depart;
    for (std::uint32_t w = 0; w < ins.words; ++w) {
      const std::uint32_t g = ins.gm_address(w), l = ins.lm + w;
      std::uint64_t src_ready = load ? gm_ready_[g] : lm_ready_[l];
      depart = std::max(w == 0 ? depart : last + 1, src_ready);
      last = depart;
      const std::uint64_t arrive = depart + cfg_.gm_latency;
      if (load) {
        lm_val_[l] = gm_[g];
        lm_ready_[l] = arrive;
      } else {
        gm_[g] = lm_val_[l];
        gm_ready_[g] = arrive;
      }
      note(arrive);
    }
    port_free_ = last + 1;
    r_.busy.gm_port += port_free_ - t;
    note(port_free_);
    trace(t, "lsgm", ins);
    retire(i, t, last);
    ++ptr_[1];
    return {true, Cause::raw, t + 1};
  }

  // Register channel: transactions of up to channel_words words, each paying
  // the LM access plus the FPS/LS-CFU handshake.
  Attempt try_channel(std::uint64_t t) {
    if (chan_free_ > t) return blocked(Cause::raw, chan_free_);
    const std::uint32_t i = stream_[2][ptr_[2]];
    const Instruction& ins = p_.code[i];
    Attempt out;
    if (!deps_met(i, t, out)) return out;
    const bool load = ins.is_load();
    for (std::uint32_t w = 0; w < ins.words; ++w) {
      std::uint64_t src = load ? lm_ready_[ins.addr + w] : reg_ready_[ins.src_a + w];
      if (src == kNever) return blocked(Cause::raw, kNever);
    }
    const std::uint32_t width = static_cast<std::uint32_t>(cfg_.channel_words());
    const std::uint64_t cost = 1 + static_cast<std::uint64_t>(cfg_.lscfu_handshake);
    std::uint64_t s = t, last_start = t;
    for (std::uint32_t w0 = 0; w0 < ins.words; w0 += width) {
      const std::uint32_t w1 = std::min<std::uint32_t>(ins.words, w0 + width);
      std::uint64_t start = s;
      for (std::uint32_t w = w0; w < w1; ++w)
        start = std::max(start, load ? lm_ready_[ins.addr + w] : reg_ready_[ins.src_a + w]);
      const std::uint64_t end = start + cost;
      for (std::uint32_t w = w0; w < w1; ++w) {
        if (load) {
          const int r = ins.dst + w;
          reg_val_[r] = lm_val_[ins.addr + w];
          reg_ready_[r] = end;
          reg_writer_[r] = Writer::channel;
        } else {
          lm_val_[ins.addr + w] = reg_val_[ins.src_a + w];
          lm_ready_[ins.addr + w] = end;
        }
      }
      r_.busy.channel += cost;
      last_start = start;
      s = end;
    }
    chan_free_ = s;
    note(s);
    trace(t, "lsch", ins);
    retire(i, t, last_start);
    ++ptr_[2];
    return {true, Cause::raw, t + 1};
  }

  std::string describe_block() const {
    std::string s;
    const char* names[] = {"fps", "lsgm", "lsch"};
    for (int e = 0; e < kEngines; ++e) {
      if (ptr_[e] < stream_[e].size()) {
        s += std::string("; ") + names[e] + " at '" + format_instruction(p_.code[stream_[e][ptr_[e]]]) + "'";
      }
    }
    return s;
  }

  const Program& p_;
  const PeConfig& cfg_;
  const SimOptions& opt_;
  const int regs_;
  const std::uint32_t lm_words_;
  const std::uint32_t gm_size_;

  std::vector<double> reg_val_;
  std::vector<std::uint64_t> reg_ready_;
  std::vector<Writer> reg_writer_;
  std::vector<double> lm_val_;
  std::vector<std::uint64_t> lm_ready_;
  std::vector<double> gm_;
  std::vector<std::uint64_t> gm_ready_;

  std::vector<std::uint32_t> stream_[kEngines];
  std::size_t ptr_[kEngines] = {0, 0, 0};
  std::vector<Deps> deps_;
  std::vector<std::uint64_t> issue_time_;
  std::vector<std::uint64_t> reads_done_;

  std::uint64_t fps_busy_until_ = 0;
  std::uint64_t div_free_ = 0;
  std::uint64_t port_free_ = 0;
  std::uint64_t chan_free_ = 0;
  std::uint64_t horizon_ = 0;
  SimResult r_;
};

}  // namespace

SimResult simulate(const Program& program, const PeConfig& cfg, const std::vector<double>& gm_image,
                   const SimOptions& options) {
  if (cfg.registers <= 0 || cfg.registers > 256) throw ConfigError("register count must be in 1..256");
  Simulator sim(program, cfg, gm_image, options);
  return sim.run();
}

KernelInputs make_inputs(KernelKind kind, std::size_t n, std::uint64_t seed) {
  KernelInputs in;
  switch (kind) {
    case KernelKind::gemm:
      in.a = random_matrix(n, n, seed);
      in.b = random_matrix(n, n, seed + 1);
      in.c = random_matrix(n, n, seed + 2);
      break;
    case KernelKind::gemv:
      in.a = random_matrix(n, n, seed);
      in.x = random_vector(n, seed + 1);
      in.y = random_vector(n, seed + 2);
      break;
    case KernelKind::ddot:
      in.x = random_vector(n, seed);
      in.y = random_vector(n, seed + 1);
      break;
    case KernelKind::dnrm2:
      in.x = random_vector(n, seed);
      break;
    case KernelKind::daxpy:
      in.alpha = random_vector(1, seed + 3)[0];
      in.x = random_vector(n, seed);
      in.y = random_vector(n, seed + 1);
      break;
    default:
      throw ShapeError(std::string(kernel_name(kind)) + " has no PE inputs");
  }
  return in;
}

std::vector<double> gm_image(const Program& p, const KernelInputs& in) {
  std::vector<double> gm(p.gm_size(), 0.0);
  for (const Operand& o : p.operands) {
    const std::vector<double>* src = nullptr;
    if (o.name == "A") src = &in.a.data();
    else if (o.name == "B") src = &in.b.data();
    else if (o.name == "C") src = &in.c.data();
    else if (o.name == "x") src = &in.x;
    else if (o.name == "y") src = &in.y;
    if (o.name == "alpha") {
      gm[o.base] = in.alpha;
      continue;
    }
    if (!src) continue;
    if (src->size() != o.size()) throw DimensionError("operand " + o.name + " size mismatch");
    std::copy(src->begin(), src->end(), gm.begin() + o.base);
  }
  return gm;
}

std::vector<double> oracle_output(KernelKind kind, const KernelInputs& in) {
  switch (kind) {
    case KernelKind::gemm: return oracle_gemm(in.a, in.b, in.c).data();
    case KernelKind::gemv: return oracle_gemv(in.a, in.x, in.y);
    case KernelKind::ddot: return {oracle_dot(in.x, in.y)};
    case KernelKind::dnrm2: return {oracle_nrm2(in.x)};
    case KernelKind::daxpy: return oracle_axpy(in.alpha, in.x, in.y);
    default: throw ShapeError(std::string(kernel_name(kind)) + " has no PE oracle");
  }
}

std::vector<double> extract_output(const Program& p, const std::vector<double>& gm) {
  const Operand& o = p.operand(p.output);
  return std::vector<double>(gm.begin() + o.base, gm.begin() + o.base + o.size());
}

KernelRun run_kernel(KernelKind kind, std::size_t n, const PeConfig& cfg, std::uint64_t seed,
                     const SimOptions& options) {
  Program p = compile_kernel(kind, n, cfg);
  KernelInputs in = make_inputs(kind, n, seed);
  KernelRun run;
  run.counts = p.counts;
  run.sim = simulate(p, cfg, gm_image(p, in), options);
  run.output = extract_output(p, run.sim.gm);
  run.expected = oracle_output(kind, in);
  run.rel_error = rel_error(run.output, run.expected);
  return run;
}

}  // namespace blaspe
