#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "blaspe/kernel.hpp"
#include "blaspe/matrix.hpp"

namespace blaspe {

enum class NodeOp { input, mul, add, sub, sqrt, output };

const char* node_op_name(NodeOp op);

struct DagNode {
  NodeOp op;
  std::string label;
  std::vector<std::size_t> preds;  // ordered operands
  int level = 0;                   // ASAP level; inputs are 0
};

struct Dag {
  std::vector<DagNode> nodes;

  std::size_t add_input(std::string label);
  std::size_t add_op(NodeOp op, std::string label, std::vector<std::size_t> preds);
  std::size_t find(const std::string& label) const;  // throws GraphError

  // Counts of mul / add+sub nodes.
  std::size_t count(NodeOp op) const;
  std::size_t add_sub_count() const { return count(NodeOp::add) + count(NodeOp::sub); }
  // Number of compute nodes (not input or output) on each level, index 0 is level 1.
  std::vector<std::size_t> level_sizes() const;
};

// ddot/dnrm2 need a power-of-two n; gemm/gemv build the full per-element
// reduction trees; the 2x2 kinds ignore n.
Dag build_dag(const KernelSpec& spec);

// Recomputes ASAP levels. Throws GraphError on a cycle.
void assign_levels(Dag& dag);
// Number of compute levels. Throws GraphError on a cycle.
int critical_path(const Dag& dag);
std::size_t max_parallelism(const Dag& dag);

// Evaluates the 2x2 block formula sequence of smm2x2, wmm2x2 or gemm2x2 by
// walking the DAG. A and B must be square with even dimension.
Matrix eval_block2x2(KernelKind kind, const Matrix& a, const Matrix& b);

void write_dot(std::ostream& out, const Dag& dag, const std::string& name);

}  // namespace blaspe
