#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace insfem {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};
struct UnsupportedElement : Error {
  using Error::Error;
};
struct InvertedElement : Error {
  using Error::Error;
};
struct SingularMatrix : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct EvalError : Error {
  using Error::Error;
};
struct TimestepUnderflow : Error {
  using Error::Error;
};

struct ParseError : Error {
  int line = 0;
  int col = 0;
  ParseError(const std::string& msg, int line_, int col_ = 0)
      : Error(msg + " (line " + std::to_string(line_) +
              (col_ > 0 ? ", col " + std::to_string(col_) : "") + ")"),
        line(line_),
        col(col_) {}
};

// Sentinel timestep for steady problems; drops the temporal term in tau.
inline constexpr double kSteadyDt = std::numeric_limits<double>::infinity();

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double& operator[](int i) { return i == 0 ? x : y; }
  double operator[](int i) const { return i == 0 ? x : y; }

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Symmetric 2x2 tensor of second derivatives.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

// 2x2 matrix, rows = components, cols = derivative directions.
struct Mat2 {
  double a[2][2] = {{0, 0}, {0, 0}};
  double* operator[](int i) { return a[i]; }
  const double* operator[](int i) const { return a[i]; }
};

}  // namespace insfem
