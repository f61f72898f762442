#include "pqlab/matrix.hpp"

#include <sstream>

#include "pqlab/errors.hpp"

namespace pqlab {

Mat::Mat(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1 || rows > kMaxDim || cols > kMaxComponents) {
    throw InvalidArgument("matrix shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " exceeds supported 2x3");
  }
}

Mat& Mat::operator+=(const Mat& o) {
  for (int k = 0; k < size(); ++k) a_[k] += o.a_[k];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  for (int k = 0; k < size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (int k = 0; k < size(); ++k) a_[k] *= s;
  return *this;
}

double Mat::dot(const Mat& o) const {
  double s = 0.0;
  for (int k = 0; k < size(); ++k) s += a_[k] * o.a_[k];
  return s;
}

double Mat::row_norm(int i) const {
  double s = 0.0;
  for (int a = 0; a < cols_; ++a) s += (*this)(i, a) * (*this)(i, a);
  return std::sqrt(s);
}

bool Mat::finite() const {
  for (int k = 0; k < size(); ++k) {
    if (!std::isfinite(a_[k])) return false;
  }
  return true;
}

std::string Mat::str() const {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (int i = 0; i < rows_; ++i) {
    if (i) os << "; ";
    for (int a = 0; a < cols_; ++a) {
      if (a) os << ", ";
      os << (*this)(i, a);
    }
  }
  os << ']';
  return os.str();
}

bool finite(const Point& x) { return std::isfinite(x[0]) && std::isfinite(x[1]); }

double distance(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace pqlab
