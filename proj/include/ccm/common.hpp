#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccm {

using Vec = std::vector<double>;

/// Tolerances shared by the whole library. Inputs are assumed scaled so that
/// entries are at most ~1e3 in magnitude.
namespace tol {
inline constexpr double kGeom = 1e-9;     // geometric predicates
inline constexpr double kLp = 1e-9;       // LP residuals
inline constexpr double kOpt = 1e-10;     // log-sum optimality
inline constexpr double kSupport = 1e-8;  // "q^j > 0"
inline constexpr double kVerify = 1e-8;   // equilibrium verification slack
inline constexpr double kDedup = 1e-6;    // payoff deduplication in sweeps
}  // namespace tol

/// Malformed input: wrong shapes, negative utilities, violated preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver could not produce a trustworthy answer (cycling, ill-conditioning,
/// failed post-condition).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix. Rows are agents throughout the library.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<Vec>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  Vec row_vec(std::size_t r) const { return Vec(row(r).begin(), row(r).end()); }
  Vec col_vec(std::size_t c) const;

  std::vector<Vec> to_rows() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double max_abs(std::span<const double> a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

std::string format_vec(std::span<const double> v);

}  // namespace ccm
