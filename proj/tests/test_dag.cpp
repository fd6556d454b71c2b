#include <doctest.h>

#include <sstream>

#include "blaspe/dag.hpp"
#include "blaspe/errors.hpp"

using namespace blaspe;

namespace {

using Sizes = std::vector<std::size_t>;

void check_grading(const Dag& d) {
  for (const DagNode& v : d.nodes) {
    if (v.op == NodeOp::input) {
      CHECK(v.preds.empty());
      CHECK(v.level == 0);
      continue;
    }
    REQUIRE_FALSE(v.preds.empty());
    int top = 0;
    for (std::size_t p : v.preds) top = std::max(top, d.nodes[p].level);
    // Output markers sit on the level of the value they name.
    CHECK(v.level == (v.op == NodeOp::output ? top : top + 1));
  }
}

}  // namespace

TEST_CASE("ddot DAG for n=8") {
  Dag d = build_dag({KernelKind::ddot, 8});
  CHECK(d.count(NodeOp::mul) == 8);
  CHECK(d.count(NodeOp::add) == 7);
  CHECK(critical_path(d) == 4);
  CHECK(max_parallelism(d) == 8);
  CHECK(d.level_sizes() == Sizes{8, 4, 2, 1});
}

TEST_CASE("ddot and dnrm2 counts across sizes") {
  for (std::size_t n : {1u, 2u, 4u, 16u, 64u}) {
    Dag dot = build_dag({KernelKind::ddot, n});
    Dag nrm = build_dag({KernelKind::dnrm2, n});
    CHECK(dot.count(NodeOp::mul) == n);
    CHECK(dot.count(NodeOp::add) == n - 1);
    CHECK(nrm.count(NodeOp::mul) == n);
    CHECK(nrm.count(NodeOp::add) == n - 1);
    CHECK(nrm.count(NodeOp::sqrt) == 1);
    CHECK(critical_path(nrm) == critical_path(dot) + 1);
  }
  CHECK_THROWS_AS(build_dag({KernelKind::ddot, 6}), ShapeError);
  CHECK_THROWS_AS(build_dag({KernelKind::dnrm2, 0}), ShapeError);
}

TEST_CASE("daxpy DAG has depth 2") {
  for (std::size_t n : {1u, 3u, 8u, 20u}) {
    Dag d = build_dag({KernelKind::daxpy, n});
    CHECK(critical_path(d) == 2);
    CHECK(d.count(NodeOp::mul) == n);
    CHECK(d.count(NodeOp::add) == n);
  }
}

TEST_CASE("gemm and gemv DAGs") {
  Dag g = build_dag({KernelKind::gemm, 4});
  CHECK(max_parallelism(g) == 64);
  CHECK(g.count(NodeOp::mul) == 64);
  CHECK(critical_path(g) == 3);
  Dag v = build_dag({KernelKind::gemv, 4});
  CHECK(v.count(NodeOp::mul) == 16);
  CHECK(v.count(NodeOp::add) == 12);
  // x is shared by every row.
  CHECK(v.count(NodeOp::input) == 16 + 4);
}

TEST_CASE("Strassen 2x2 DAG") {
  Dag d = build_dag({KernelKind::smm2x2, 2});
  CHECK(d.count(NodeOp::mul) == 7);
  CHECK(d.add_sub_count() == 18);
  CHECK(critical_path(d) == 4);
  // The first level holds the ten operand sums of a correct Strassen
  // product; see the decisions ledger for the nine-entry variant.
  CHECK(d.level_sizes() == Sizes{10, 7, 6, 2});
}

TEST_CASE("Winograd 2x2 DAG") {
  Dag d = build_dag({KernelKind::wmm2x2, 2});
  CHECK(d.count(NodeOp::mul) == 7);
  CHECK(d.add_sub_count() == 15);
  CHECK(critical_path(d) == 6);
}

TEST_CASE("conventional 2x2 DAG") {
  Dag d = build_dag({KernelKind::gemm2x2, 2});
  CHECK(d.count(NodeOp::mul) == 8);
  CHECK(d.add_sub_count() == 4);
  CHECK(critical_path(d) == 2);
}

TEST_CASE("levels are a topological grading") {
  for (KernelSpec s : {KernelSpec{KernelKind::ddot, 16}, KernelSpec{KernelKind::dnrm2, 8},
                       KernelSpec{KernelKind::daxpy, 5}, KernelSpec{KernelKind::gemv, 4},
                       KernelSpec{KernelKind::gemm, 4}, KernelSpec{KernelKind::smm2x2, 2},
                       KernelSpec{KernelKind::wmm2x2, 2}, KernelSpec{KernelKind::gemm2x2, 2}}) {
    CAPTURE(kernel_name(s.kind));
    check_grading(build_dag(s));
  }
}

TEST_CASE("cycles are detected") {
  Dag d;
  std::size_t x = d.add_input("x");
  std::size_t a = d.add_op(NodeOp::add, "a", {x, x});
  std::size_t b = d.add_op(NodeOp::mul, "b", {a, x});
  d.nodes[a].preds[1] = b;
  CHECK_THROWS_AS(critical_path(d), GraphError);
  CHECK_THROWS_AS(assign_levels(d), GraphError);
  CHECK_THROWS_AS(d.find("missing"), GraphError);
}

TEST_CASE("eval_block2x2 examples") {
  Matrix a(2, 2, {1, 2, 3, 4}), b(2, 2, {5, 6, 7, 8});
  CHECK(eval_block2x2(KernelKind::gemm2x2, a, b) == Matrix(2, 2, {19, 22, 43, 50}));
  Matrix rb = random_matrix(2, 2, 5);
  // Strassen reassociates, so even an identity operand rounds.
  CHECK(max_abs_diff(eval_block2x2(KernelKind::smm2x2, Matrix::identity(2), rb), rb) <= 1e-15);
  CHECK(eval_block2x2(KernelKind::wmm2x2, a, b) == Matrix(2, 2, {19, 22, 43, 50}));
  CHECK_THROWS_AS(eval_block2x2(KernelKind::smm2x2, Matrix(3, 3), Matrix(3, 3)), DimensionError);
  CHECK_THROWS_AS(eval_block2x2(KernelKind::gemm, a, b), ShapeError);
}

TEST_CASE("all three 2x2 algorithms agree with oracle_gemm") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (std::size_t dim : {2u, 4u, 8u}) {
      Matrix a = random_matrix(dim, dim, seed), b = random_matrix(dim, dim, seed + 1000);
      Matrix want = oracle_gemm(a, b, Matrix(dim, dim, 0.0));
      for (KernelKind k : {KernelKind::smm2x2, KernelKind::wmm2x2, KernelKind::gemm2x2})
        CHECK(rel_error(eval_block2x2(k, a, b), want) <= 1e-12);
    }
  }
}

TEST_CASE("Graphviz export lists every node and edge") {
  Dag d = build_dag({KernelKind::ddot, 4});
  std::ostringstream os;
  write_dot(os, d, "ddot");
  const std::string s = os.str();
  CHECK(s.rfind("digraph", 0) == 0);
  std::size_t edges = 0, pos = 0;
  while ((pos = s.find("->", pos)) != std::string::npos) {
    ++edges;
    pos += 2;
  }
  std::size_t want = 0;
  for (const DagNode& v : d.nodes) want += v.preds.size();
  CHECK(edges == want);
}
