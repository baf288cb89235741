#include "k3dyn/exact.hpp"

#include <numeric>

namespace k3dyn::exact {

std::string to_string(const BigInt& x) { return x.str(); }

unsigned euler_phi(unsigned n) {
  unsigned result = n;
  for (unsigned p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    while (n % p == 0) n /= p;
    result -= result / p;
  }
  if (n > 1) result -= result / n;
  return result;
}

Poly<BigInt> cyclotomic(unsigned n) {
  if (n == 0) throw DimensionError("cyclotomic index must be positive");
  // x^n - 1 divided by Phi_d for every proper divisor d.
  Poly<BigInt> p(n + 1, BigInt(0));
  p[0] = -1;
  p[n] = 1;
  for (unsigned d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    auto q = divide_exact_monic(p, cyclotomic(d));
    p = std::move(*q);
  }
  return p;
}

std::vector<unsigned> cyclotomic_indices(unsigned degree) {
  // phi(n) >= sqrt(n/2), so n <= 2 degree^2 covers every candidate.
  std::vector<unsigned> out;
  const unsigned bound = 2 * degree * degree + 2;
  for (unsigned n = 1; n <= bound; ++n)
    if (euler_phi(n) <= degree) out.push_back(n);
  return out;
}

ZMatrix to_zmatrix(const std::vector<std::vector<long long>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows[0].size();
  ZMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw DimensionError("ragged integer matrix");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

ZMatrix multiply(const ZMatrix& a, const ZMatrix& b) {
  return with_overflow_fallback([&](auto tag) {
    using T = typename decltype(tag)::type;
    return (a.cast<T>() * b.cast<T>()).template cast<BigInt>();
  });
}

}  // namespace k3dyn::exact
