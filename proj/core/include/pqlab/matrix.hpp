#pragma once

#include <array>
#include <cmath>
#include <string>

namespace pqlab {

inline constexpr int kMaxDim = 2;
inline constexpr int kMaxComponents = 3;

/// Points live in R^2; 1D problems leave the second coordinate at zero.
using Point = std::array<double, kMaxDim>;

/// Dense n x m matrix with fixed small capacity. Row i holds the partial
/// derivative along x_i of every component, so |z| is the Frobenius norm.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols);

  static Mat zeros(int rows, int cols) { return Mat(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }

  double& operator()(int i, int a) { return a_[i * cols_ + a]; }
  double operator()(int i, int a) const { return a_[i * cols_ + a]; }
  double& operator[](int k) { return a_[k]; }
  double operator[](int k) const { return a_[k]; }

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, double s) { return a *= s; }
  friend Mat operator*(double s, Mat a) { return a *= s; }
  friend Mat operator-(Mat a) { return a *= -1.0; }

  double dot(const Mat& o) const;
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  double row_norm(int i) const;
  bool finite() const;
  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  std::string str() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::array<double, kMaxDim * kMaxComponents> a_{};
};

bool finite(const Point& x);
double distance(const Point& a, const Point& b);

}  // namespace pqlab
