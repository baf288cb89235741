#pragma once

// Exact integer linear algebra for lattice isometries.
//
// Everything is templated on the scalar type. Two scalars are used in
// practice: Checked64 (a 64-bit integer that throws OverflowError instead of
// wrapping) and BigInt (arbitrary precision). with_overflow_fallback() runs a
// computation with Checked64 first and repeats it with BigInt on overflow, so
// results are never silently truncated.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "k3dyn/error.hpp"

namespace k3dyn::exact {

using BigInt = boost::multiprecision::cpp_int;

class Checked64 {
 public:
  constexpr Checked64() = default;
  constexpr Checked64(std::int64_t v) : v_(v) {}  // NOLINT(implicit)

  [[nodiscard]] constexpr std::int64_t value() const { return v_; }

  friend Checked64 operator+(Checked64 a, Checked64 b) {
    std::int64_t r;
    if (__builtin_add_overflow(a.v_, b.v_, &r)) throw OverflowError("int64 addition");
    return r;
  }
  friend Checked64 operator-(Checked64 a, Checked64 b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a.v_, b.v_, &r)) throw OverflowError("int64 subtraction");
    return r;
  }
  friend Checked64 operator*(Checked64 a, Checked64 b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a.v_, b.v_, &r)) throw OverflowError("int64 multiplication");
    return r;
  }
  Checked64 operator-() const { return Checked64(0) - *this; }
  Checked64& operator+=(Checked64 o) { return *this = *this + o; }
  Checked64& operator-=(Checked64 o) { return *this = *this - o; }
  Checked64& operator*=(Checked64 o) { return *this = *this * o; }
  friend bool operator==(Checked64 a, Checked64 b) = default;
  friend auto operator<=>(Checked64 a, Checked64 b) = default;

 private:
  std::int64_t v_ = 0;
};

template <class To, class From>
To convert(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else if constexpr (std::is_same_v<To, BigInt>) {
    return BigInt(x.value());
  } else {
    static_assert(std::is_same_v<To, Checked64> && std::is_same_v<From, BigInt>);
    if (x > std::numeric_limits<std::int64_t>::max() ||
        x < std::numeric_limits<std::int64_t>::min())
      throw OverflowError("value does not fit in int64");
    return Checked64(x.template convert_to<std::int64_t>());
  }
}

inline long double to_long_double(const BigInt& x) { return x.convert_to<long double>(); }
inline long double to_long_double(Checked64 x) { return static_cast<long double>(x.value()); }
inline bool is_zero(const BigInt& x) { return x.is_zero(); }
inline bool is_zero(Checked64 x) { return x.value() == 0; }
std::string to_string(const BigInt& x);

// Dense row-major matrix over an exact ring.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, T(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  friend Matrix operator*(const Matrix& x, const Matrix& y) {
    if (x.cols_ != y.rows_) throw DimensionError("matrix product shape mismatch");
    Matrix r(x.rows_, y.cols_);
    for (std::size_t i = 0; i < x.rows_; ++i)
      for (std::size_t k = 0; k < x.cols_; ++k) {
        if (is_zero(x(i, k))) continue;
        for (std::size_t j = 0; j < y.cols_; ++j) r(i, j) += x(i, k) * y(k, j);
      }
    return r;
  }
  friend Matrix operator+(const Matrix& x, const Matrix& y) {
    x.require_same_shape(y);
    Matrix r = x;
    for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] += y.a_[i];
    return r;
  }
  friend Matrix operator-(const Matrix& x, const Matrix& y) {
    x.require_same_shape(y);
    Matrix r = x;
    for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] -= y.a_[i];
    return r;
  }
  Matrix scaled(const T& s) const {
    Matrix r = *this;
    for (auto& v : r.a_) v *= s;
    return r;
  }
  friend bool operator==(const Matrix& x, const Matrix& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
  }

  [[nodiscard]] Matrix transpose() const {
    Matrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  [[nodiscard]] bool is_zero_matrix() const {
    for (const auto& v : a_)
      if (!is_zero(v)) return false;
    return true;
  }

  template <class U>
  [[nodiscard]] Matrix<U> cast() const {
    Matrix<U> r(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(i, j) = convert<U>((*this)(i, j));
    return r;
  }

 private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix shape mismatch");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> a_;
};

using ZMatrix = Matrix<BigInt>;

// Polynomials with ascending coefficients: p[i] multiplies x^i.
template <class T>
using Poly = std::vector<T>;

template <class T>
void trim(Poly<T>& p) {
  while (p.size() > 1 && is_zero(p.back())) p.pop_back();
}

template <class T>
Poly<T> poly_mul(const Poly<T>& a, const Poly<T>& b) {
  if (a.empty() || b.empty()) return {};
  Poly<T> r(a.size() + b.size() - 1, T(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  trim(r);
  return r;
}

// Quotient of p by the monic polynomial d when the division is exact,
// std::nullopt otherwise.
template <class T>
std::optional<Poly<T>> divide_exact_monic(Poly<T> p, const Poly<T>& d) {
  const std::size_t dd = d.size() - 1;
  if (p.size() < d.size()) return std::nullopt;
  Poly<T> q(p.size() - dd, T(0));
  for (std::size_t k = p.size(); k-- > dd;) {
    const T c = p[k];
    q[k - dd] = c;
    if (is_zero(c)) continue;
    for (std::size_t i = 0; i <= dd; ++i) p[k - dd + i] -= c * d[i];
  }
  for (std::size_t i = 0; i < dd; ++i)
    if (!is_zero(p[i])) return std::nullopt;
  return q;
}

// Horner evaluation of p at a square matrix.
template <class T>
Matrix<T> poly_eval(const Poly<T>& p, const Matrix<T>& m) {
  const std::size_t n = m.rows();
  Matrix<T> acc(n, n);
  for (std::size_t k = p.size(); k-- > 0;) {
    acc = acc * m;
    for (std::size_t i = 0; i < n; ++i) acc(i, i) += p[k];
  }
  return acc;
}

// Characteristic polynomial det(x I - m), monic, by the division-free
// Berkowitz algorithm.
template <class T>
Poly<T> charpoly(const Matrix<T>& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw DimensionError("charpoly of a non-square matrix");
  // Descending coefficient vector of the trailing principal submatrix,
  // built from the bottom-right corner outwards.
  std::vector<T> vec{T(1)};
  for (std::size_t r = n; r-- > 0;) {
    const std::size_t k = n - r;  // size of the current submatrix
    const T a = m(r, r);
    // columns C = m(r+1.., r), rows R = m(r, r+1..), sub A = m(r+1.., r+1..)
    std::vector<T> c(k - 1), tmp(k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) c[i] = m(r + 1 + i, r);
    std::vector<T> col(k + 1, T(0));
    col[0] = T(1);
    col[1] = -a;
    for (std::size_t p = 2; p <= k; ++p) {
      T s(0);
      for (std::size_t i = 0; i + 1 < k; ++i) s += m(r, r + 1 + i) * c[i];
      col[p] = -s;
      for (std::size_t i = 0; i + 1 < k; ++i) {
        T t(0);
        for (std::size_t j = 0; j + 1 < k; ++j) t += m(r + 1 + i, r + 1 + j) * c[j];
        tmp[i] = t;
      }
      std::swap(c, tmp);
    }
    // Toeplitz product: next[i] = sum_j col[i-j] * vec[j]
    std::vector<T> next(k + 1, T(0));
    for (std::size_t i = 0; i <= k; ++i)
      for (std::size_t j = 0; j < vec.size() && j <= i; ++j) next[i] += col[i - j] * vec[j];
    vec = std::move(next);
  }
  return Poly<T>(vec.rbegin(), vec.rend());
}

unsigned euler_phi(unsigned n);
// Cyclotomic polynomial Phi_n, ascending coefficients.
Poly<BigInt> cyclotomic(unsigned n);
// All n with phi(n) <= degree, ascending.
std::vector<unsigned> cyclotomic_indices(unsigned degree);

template <class T>
struct Tag {
  using type = T;
};

// f is a generic callable taking Tag<Checked64> or Tag<BigInt>.
template <class F>
auto with_overflow_fallback(F&& f) {
  try {
    return f(Tag<Checked64>{});
  } catch (const OverflowError&) {
    return f(Tag<BigInt>{});
  }
}

ZMatrix to_zmatrix(const std::vector<std::vector<long long>>& rows);
// Exact product with int64 fast path.
ZMatrix multiply(const ZMatrix& a, const ZMatrix& b);

}  // namespace k3dyn::exact
