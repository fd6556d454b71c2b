#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace blaspe {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles with at least one row and one column.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& m);

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Reference kernels. Accumulation order is fixed so that results are
// reproducible bit for bit.
double oracle_dot(const Vector& x, const Vector& y);
double oracle_nrm2(const Vector& x);
Vector oracle_axpy(double a, const Vector& x, const Vector& y);
Vector oracle_gemv(const Matrix& a, const Vector& x, const Vector& y);
Matrix oracle_gemm(const Matrix& a, const Matrix& b, const Matrix& c);

// Same per-element accumulation order as oracle_gemm, rows spread over
// OpenMP threads. Bitwise identical to the serial version.
Matrix oracle_gemm_parallel(const Matrix& a, const Matrix& b, const Matrix& c);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(const Vector& a, const Vector& b);
// max |a-b| / max(1, max |b|)
double rel_error(const Matrix& got, const Matrix& want);
double rel_error(const Vector& got, const Vector& want);

struct Block {
  std::size_t tile_row;
  std::size_t tile_col;
  std::size_t row_begin;
  std::size_t row_end;
  std::size_t col_begin;
  std::size_t col_end;
};

struct BlockPlan {
  std::size_t n = 0;
  std::size_t b = 0;
  std::vector<Block> blocks;  // row-major over the b x b grid
  std::size_t block_size() const { return n / b; }
};

BlockPlan partition_blocks(std::size_t n, std::size_t b);

// Seeded uniform [-1, 1) inputs.
inline constexpr std::uint64_t kDefaultSeed = 42;
Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);
Vector random_vector(std::size_t n, std::uint64_t seed);

// Text format: "rows cols" header then row-major values.
Matrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const Matrix& m);
Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& m);

}  // namespace blaspe
