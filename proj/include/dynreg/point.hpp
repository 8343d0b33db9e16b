#ifndef DYNREG_POINT_HPP
#define DYNREG_POINT_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dynreg {

/// A point of R^n. Actions, minimizers and gradients all share this type.
using Point = Eigen::VectorXd;
using Index = Eigen::Index;

/// Bad input from the caller: dimension mismatch, invalid parameter, etc.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw UsageError(message);
}

inline void require_same_dimension(const Point& a, const Point& b, const char* where) {
  if (a.size() != b.size()) {
    throw UsageError(std::string(where) + ": dimension mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
}

inline bool all_finite(const Point& p) { return p.allFinite(); }

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

inline double squared_distance(const Point& a, const Point& b) { return (a - b).squaredNorm(); }

inline Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Index>(coords.size()));
  Index i = 0;
  for (double c : coords) p[i++] = c;
  return p;
}

}  // namespace dynreg

#endif  // DYNREG_POINT_HPP
