#include "blaspe/dag.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "blaspe/errors.hpp"

namespace blaspe {

const char* node_op_name(NodeOp op) {
  switch (op) {
    case NodeOp::input: return "input";
    case NodeOp::mul: return "mul";
    case NodeOp::add: return "add";
    case NodeOp::sub: return "sub";
    case NodeOp::sqrt: return "sqrt";
    case NodeOp::output: return "output";
  }
  return "?";
}

std::size_t Dag::add_input(std::string label) {
  nodes.push_back({NodeOp::input, std::move(label), {}, 0});
  return nodes.size() - 1;
}

std::size_t Dag::add_op(NodeOp op, std::string label, std::vector<std::size_t> preds) {
  int level = 0;
  for (std::size_t p : preds) {
    if (p >= nodes.size()) throw GraphError("edge from unknown node " + std::to_string(p));
    level = std::max(level, nodes[p].level);
  }
  nodes.push_back({op, std::move(label), std::move(preds), op == NodeOp::output ? level : level + 1});
  return nodes.size() - 1;
}

std::size_t Dag::find(const std::string& label) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].label == label) return i;
  throw GraphError("no node labelled " + label);
}

std::size_t Dag::count(NodeOp op) const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [op](const DagNode& n) { return n.op == op; }));
}

namespace {

bool is_compute(NodeOp op) { return op != NodeOp::input && op != NodeOp::output; }

// Levels over an arbitrary node order; preds may point forward.
std::vector<int> compute_levels(const Dag& dag) {
  const std::size_t n = dag.nodes.size();
  std::vector<int> level(n, -1);
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t root = 0; root < n; ++root) {
    if (state[root] == 2) continue;
    stack.push_back({root, 0});
    state[root] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      const auto& preds = dag.nodes[v].preds;
      if (next < preds.size()) {
        std::size_t p = preds[next++];
        if (p >= n) throw GraphError("edge from unknown node " + std::to_string(p));
        if (state[p] == 1) throw GraphError("cycle through node '" + dag.nodes[p].label + "'");
        if (state[p] == 0) {
          state[p] = 1;
          stack.push_back({p, 0});
        }
        continue;
      }
      const DagNode& node = dag.nodes[v];
      int l = 0;
      if (node.op != NodeOp::input) {
        for (std::size_t p : preds) l = std::max(l, level[p]);
        if (is_compute(node.op)) ++l;
      }
      level[v] = l;
      state[v] = 2;
      stack.pop_back();
    }
  }
  return level;
}

std::vector<std::size_t> reduce_tree(Dag& dag, std::vector<std::size_t> terms, const std::string& prefix) {
  int round = 0;
  while (terms.size() > 1) {
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
      next.push_back(dag.add_op(NodeOp::add,
                                prefix + "s" + std::to_string(round) + "_" + std::to_string(i / 2),
                                {terms[i], terms[i + 1]}));
    }
    if (terms.size() % 2) next.push_back(terms.back());
    terms = std::move(next);
    ++round;
  }
  return terms;
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void build_dot(Dag& dag, const std::vector<std::size_t>& x, const std::vector<std::size_t>& y,
               const std::string& prefix, const std::string& out_label, bool root) {
  std::vector<std::size_t> products;
  for (std::size_t i = 0; i < x.size(); ++i)
    products.push_back(dag.add_op(NodeOp::mul, prefix + "p" + std::to_string(i), {x[i], y[i]}));
  std::size_t sum = reduce_tree(dag, products, prefix).front();
  if (root) sum = dag.add_op(NodeOp::sqrt, prefix + "sqrt", {sum});
  dag.add_op(NodeOp::output, out_label, {sum});
}

std::vector<std::size_t> inputs(Dag& dag, const std::string& name, std::size_t n) {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(dag.add_input(name + std::to_string(i)));
  return ids;
}

struct Formula {
  const char* out;
  NodeOp op;
  const char* lhs;
  const char* rhs;
};

Dag build_formulas(const std::vector<Formula>& formulas, const std::vector<const char*>& outputs) {
  Dag dag;
  for (const char* m : {"A", "B"})
    for (const char* ij : {"11", "12", "21", "22"}) dag.add_input(std::string(m) + ij);
  std::map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) ids[dag.nodes[i].label] = i;
  for (const Formula& f : formulas) {
    ids[f.out] = dag.add_op(f.op, f.out, {ids.at(f.lhs), ids.at(f.rhs)});
  }
  for (const char* o : outputs) dag.add_op(NodeOp::output, std::string("out ") + o, {ids.at(o)});
  return dag;
}

constexpr NodeOp M = NodeOp::mul;
constexpr NodeOp A = NodeOp::add;
constexpr NodeOp S = NodeOp::sub;

// Strassen. T10 and K2 differ from the commonly reprinted level table, whose
// M2 = T2*B11 and K2 = M3-M7 do not reproduce A*B.
const std::vector<Formula> kStrassen = {
    {"T1", A, "A11", "A22"}, {"T2", A, "B11", "B22"}, {"T3", S, "B12", "B22"},
    {"T4", S, "B21", "B11"}, {"T5", A, "A11", "A12"}, {"T6", S, "A21", "A11"},
    {"T7", A, "B11", "B12"}, {"T8", S, "A12", "A22"}, {"T9", A, "B21", "B22"},
    {"T10", A, "A21", "A22"},
    {"M1", M, "T1", "T2"},   {"M2", M, "T10", "B11"}, {"M3", M, "A11", "T3"},
    {"M4", M, "A22", "T4"},  {"M5", M, "T5", "B22"},  {"M6", M, "T6", "T7"},
    {"M7", M, "T8", "T9"},
    {"K1", A, "M1", "M4"},   {"K2", S, "M5", "M7"},   {"K3", S, "M1", "M2"},
    {"K4", A, "M3", "M6"},   {"C12", A, "M3", "M5"},  {"C21", A, "M2", "M4"},
    {"C11", S, "K1", "K2"},  {"C22", A, "K3", "K4"},
};

const std::vector<Formula> kWinograd = {
    {"S1", A, "A21", "A22"}, {"S3", S, "A11", "A21"}, {"S5", S, "B12", "B11"},
    {"S7", S, "B22", "B12"}, {"M2", M, "A11", "B11"}, {"M3", M, "A12", "B21"},
    {"S2", S, "S1", "A11"},  {"S6", S, "B22", "S5"},  {"M4", M, "S3", "S7"},
    {"M5", M, "S1", "S5"},   {"C11", A, "M2", "M3"},
    {"S4", S, "A12", "S2"},  {"S8", S, "S6", "B21"},  {"M1", M, "S2", "S6"},
    {"M6", M, "S4", "B22"},  {"M7", M, "A22", "S8"},  {"V1", A, "M1", "M2"},
    {"V2", A, "V1", "M4"},   {"K1", A, "M5", "M6"},
    {"C12", A, "V1", "K1"},  {"C21", S, "V2", "M7"},  {"C22", A, "V2", "M5"},
};

const std::vector<Formula> kBlockGemm = {
    {"P1", M, "A11", "B11"}, {"P2", M, "A12", "B21"}, {"P3", M, "A11", "B12"},
    {"P4", M, "A12", "B22"}, {"P5", M, "A21", "B11"}, {"P6", M, "A22", "B21"},
    {"P7", M, "A21", "B12"}, {"P8", M, "A22", "B22"},
    {"C11", A, "P1", "P2"},  {"C12", A, "P3", "P4"},  {"C21", A, "P5", "P6"},
    {"C22", A, "P7", "P8"},
};

const std::vector<const char*> kOutputs = {"C11", "C12", "C21", "C22"};

}  // namespace

std::vector<std::size_t> Dag::level_sizes() const {
  std::vector<std::size_t> sizes;
  for (const DagNode& n : nodes) {
    if (!is_compute(n.op)) continue;
    if (sizes.size() < static_cast<std::size_t>(n.level)) sizes.resize(n.level, 0);
    ++sizes[n.level - 1];
  }
  return sizes;
}

Dag build_dag(const KernelSpec& spec) {
  const std::size_t n = spec.n;
  Dag dag;
  switch (spec.kind) {
    case KernelKind::ddot:
    case KernelKind::dnrm2: {
      if (!is_pow2(n)) {
        throw ShapeError(std::string(kernel_name(spec.kind)) + " DAG needs a power-of-two n, got " +
                         std::to_string(n));
      }
      auto x = inputs(dag, "x", n);
      if (spec.kind == KernelKind::ddot) {
        build_dot(dag, x, inputs(dag, "y", n), "", "out", false);
      } else {
        build_dot(dag, x, x, "", "out", true);
      }
      break;
    }
    case KernelKind::daxpy: {
      if (n == 0) throw ShapeError("daxpy DAG needs n >= 1");
      std::size_t a = dag.add_input("a");
      auto x = inputs(dag, "x", n);
      auto y = inputs(dag, "y", n);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t t = dag.add_op(NodeOp::mul, "t" + std::to_string(i), {a, x[i]});
        std::size_t s = dag.add_op(NodeOp::add, "r" + std::to_string(i), {t, y[i]});
        dag.add_op(NodeOp::output, "out" + std::to_string(i), {s});
      }
      break;
    }
    case KernelKind::gemv:
    case KernelKind::gemm: {
      if (n == 0) throw ShapeError("DAG needs n >= 1");
      std::vector<std::vector<std::size_t>> b_cols;
      if (spec.kind == KernelKind::gemm) {
        for (std::size_t j = 0; j < n; ++j) b_cols.push_back(inputs(dag, "B" + std::to_string(j) + "_", n));
      } else {
        b_cols.push_back(inputs(dag, "x", n));
      }
      for (std::size_t i = 0; i < n; ++i) {
        auto a_row = inputs(dag, "A" + std::to_string(i) + "_", n);
        for (std::size_t j = 0; j < b_cols.size(); ++j) {
          std::string tag = "c" + std::to_string(i) + "_" + std::to_string(j) + ":";
          build_dot(dag, a_row, b_cols[j], tag, "out " + tag, false);
        }
      }
      break;
    }
    case KernelKind::smm2x2: dag = build_formulas(kStrassen, kOutputs); break;
    case KernelKind::wmm2x2: dag = build_formulas(kWinograd, kOutputs); break;
    case KernelKind::gemm2x2: dag = build_formulas(kBlockGemm, kOutputs); break;
  }
  return dag;
}

void assign_levels(Dag& dag) {
  auto levels = compute_levels(dag);
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) dag.nodes[i].level = levels[i];
}

int critical_path(const Dag& dag) {
  auto levels = compute_levels(dag);
  int depth = 0;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i)
    if (is_compute(dag.nodes[i].op)) depth = std::max(depth, levels[i]);
  return depth;
}

std::size_t max_parallelism(const Dag& dag) {
  auto levels = compute_levels(dag);
  std::map<int, std::size_t> width;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i)
    if (is_compute(dag.nodes[i].op)) ++width[levels[i]];
  std::size_t best = 0;
  for (const auto& [l, w] : width) best = std::max(best, w);
  return best;
}

Matrix eval_block2x2(KernelKind kind, const Matrix& a, const Matrix& b) {
  if (kind != KernelKind::smm2x2 && kind != KernelKind::wmm2x2 && kind != KernelKind::gemm2x2) {
    throw ShapeError("eval_block2x2 needs smm2x2, wmm2x2 or gemm2x2");
  }
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() || a.rows() % 2) {
    throw DimensionError("eval_block2x2 needs equal square operands of even dimension");
  }
  const std::size_t h = a.rows() / 2;
  Dag dag = build_dag({kind, 2});
  std::vector<Matrix> value(dag.nodes.size());
  Matrix zero(h, h);
  Matrix out(a.rows(), a.cols());
  // Nodes are stored in a topological order by construction.
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    const DagNode& node = dag.nodes[i];
    switch (node.op) {
      case NodeOp::input: {
        const Matrix& src = node.label[0] == 'A' ? a : b;
        std::size_t r = node.label[1] == '1' ? 0 : h;
        std::size_t c = node.label[2] == '1' ? 0 : h;
        value[i] = src.block(r, c, h, h);
        break;
      }
      case NodeOp::mul: value[i] = oracle_gemm(value[node.preds[0]], value[node.preds[1]], zero); break;
      case NodeOp::add: value[i] = add(value[node.preds[0]], value[node.preds[1]]); break;
      case NodeOp::sub: value[i] = sub(value[node.preds[0]], value[node.preds[1]]); break;
      case NodeOp::sqrt: throw GraphError("sqrt in a block formula");
      case NodeOp::output: {
        const std::string& l = node.label;  // "out Cij"
        std::size_t r = l[5] == '1' ? 0 : h;
        std::size_t c = l[6] == '1' ? 0 : h;
        out.set_block(r, c, value[node.preds[0]]);
        break;
      }
    }
  }
  return out;
}

void write_dot(std::ostream& out, const Dag& dag, const std::string& name) {
  out << "digraph \"" << name << "\" {\n  rankdir=TB;\n";
  std::map<int, std::vector<std::size_t>> by_level;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    const DagNode& n = dag.nodes[i];
    const char* shape = n.op == NodeOp::input ? "box" : n.op == NodeOp::output ? "doublecircle" : "ellipse";
    out << "  n" << i << " [label=\"" << n.label;
    if (is_compute(n.op)) out << "\\n" << node_op_name(n.op);
    out << "\" shape=" << shape << "];\n";
    if (is_compute(n.op)) by_level[n.level].push_back(i);
  }
  for (std::size_t i = 0; i < dag.nodes.size(); ++i)
    for (std::size_t p : dag.nodes[i].preds) out << "  n" << p << " -> n" << i << ";\n";
  for (const auto& [level, ids] : by_level) {
    out << "  { rank=same;";
    for (std::size_t id : ids) out << " n" << id << ";";
    out << " }  // level " << level << "\n";
  }
  out << "}\n";
}

}  // namespace blaspe
