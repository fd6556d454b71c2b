#include "blaspe/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "blaspe/errors.hpp"

namespace blaspe {

namespace {

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void require_same_length(const Vector& x, const Vector& y, const char* op) {
  if (x.size() != y.size()) {
    throw DimensionError(std::string(op) + ": length " + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()));
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": " + dims(a.rows(), a.cols()) + " vs " +
                         dims(b.rows(), b.cols()));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw DimensionError("matrix must be at least 1x1");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) throw DimensionError("matrix must be at least 1x1");
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix " + dims(rows, cols) + " given " +
                         std::to_string(data_.size()) + " values");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("block out of range");
  Matrix out(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
  return out;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& m) {
  if (r0 + m.rows() > rows_ || c0 + m.cols() > cols_) throw DimensionError("block out of range");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) (*this)(r0 + i, c0 + j) = m(i, j);
}

double oracle_dot(const Vector& x, const Vector& y) {
  require_same_length(x, y, "dot");
  if (x.empty()) throw DimensionError("dot: empty vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = x[i] * y[i];
    s = (i == 0) ? p : s + p;
  }
  return s;
}

double oracle_nrm2(const Vector& x) { return std::sqrt(oracle_dot(x, x)); }

Vector oracle_axpy(double a, const Vector& x, const Vector& y) {
  require_same_length(x, y, "axpy");
  Vector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double p = a * x[i];
    out[i] = p + y[i];
  }
  return out;
}

Vector oracle_gemv(const Matrix& a, const Vector& x, const Vector& y) {
  if (a.cols() != x.size() || a.rows() != y.size()) {
    throw DimensionError("gemv: A " + dims(a.rows(), a.cols()) + ", x " +
                         std::to_string(x.size()) + ", y " + std::to_string(y.size()));
  }
  Vector out(y.size());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double p = a(i, k) * x[k];
      s = s + p;
    }
    out[i] = s;
  }
  return out;
}

namespace {

void check_gemm(const Matrix& a, const Matrix& b, const Matrix& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols()) {
    throw DimensionError("gemm: A " + dims(a.rows(), a.cols()) + ", B " +
                         dims(b.rows(), b.cols()) + ", C " + dims(c.rows(), c.cols()));
  }
}

void gemm_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  for (std::size_t j = 0; j < b.cols(); ++j) {
    double s = out(i, j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double p = a(i, k) * b(k, j);
      s = s + p;
    }
    out(i, j) = s;
  }
}

}  // namespace

Matrix oracle_gemm(const Matrix& a, const Matrix& b, const Matrix& c) {
  check_gemm(a, b, c);
  Matrix out = c;
  for (std::size_t i = 0; i < a.rows(); ++i) gemm_row(a, b, out, i);
  return out;
}

Matrix oracle_gemm_parallel(const Matrix& a, const Matrix& b, const Matrix& c) {
  check_gemm(a, b, c);
  Matrix out = c;
  const long rows = static_cast<long>(a.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < rows; ++i) gemm_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  require_same_length(a, b, "diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "diff");
  return max_abs_diff(a.data(), b.data());
}

double rel_error(const Vector& got, const Vector& want) {
  double scale = 1.0;
  for (double v : want) scale = std::max(scale, std::abs(v));
  return max_abs_diff(got, want) / scale;
}

double rel_error(const Matrix& got, const Matrix& want) {
  require_same_shape(got, want, "rel_error");
  return rel_error(got.data(), want.data());
}

BlockPlan partition_blocks(std::size_t n, std::size_t b) {
  if (n == 0 || b == 0) throw PartitionError("n and b must be positive");
  if (n % b != 0) {
    throw PartitionError("n=" + std::to_string(n) + " is not divisible by b=" + std::to_string(b));
  }
  BlockPlan plan{n, b, {}};
  const std::size_t m = n / b;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j)
      plan.blocks.push_back({i, j, i * m, (i + 1) * m, j * m, (j + 1) * m});
  return plan;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

Vector random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

Matrix read_matrix(std::istream& in) {
  long long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
    throw DimensionError("matrix file: bad header");
  }
  std::vector<double> data(static_cast<std::size_t>(rows * cols));
  for (double& v : data) {
    if (!(in >> v)) throw DimensionError("matrix file: expected " + std::to_string(rows * cols) + " values");
  }
  double extra;
  if (in >> extra) throw DimensionError("matrix file: trailing values");
  return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data));
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DimensionError("cannot open matrix file " + path);
  return read_matrix(in);
}

void save_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  write_matrix(out, m);
}

}  // namespace blaspe
