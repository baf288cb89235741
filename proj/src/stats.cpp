#include "k3dyn/stats.hpp"

#include <algorithm>
#include <cmath>

#include "k3dyn/error.hpp"

namespace k3dyn {

BatchMeans::BatchMeans(std::size_t total, std::size_t batches)
    : total_(std::max<std::size_t>(total, 1)),
      sum_(std::max<std::size_t>(std::min(batches, total_), 1), 0.0),
      n_(sum_.size(), 0) {}

void BatchMeans::add(double x) {
  std::size_t b = count_ * sum_.size() / total_;
  if (b >= sum_.size()) b = sum_.size() - 1;
  sum_[b] += x;
  ++n_[b];
  ++count_;
}

std::vector<double> BatchMeans::batch_means() const {
  std::vector<double> m;
  for (std::size_t b = 0; b < sum_.size(); ++b)
    if (n_[b] > 0) m.push_back(sum_[b] / static_cast<double>(n_[b]));
  return m;
}

double BatchMeans::mean() const {
  double s = 0.0;
  for (double x : sum_) s += x;
  return count_ ? s / static_cast<double>(count_) : 0.0;
}

double BatchMeans::std_error() const { return summarize(batch_means()).std_error; }

SampleSummary summarize(const std::vector<double>& xs) {
  SampleSummary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  s.mean = m;
  if (xs.size() < 2) return s;
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size() - 1);
  s.std_error = std::sqrt(v / static_cast<double>(xs.size()));
  return s;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw NumericError("linear fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericError("linear fit with constant abscissa");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  f.n = x.size();
  return f;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw NumericError("median of an empty sample");
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  if (xs.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(xs.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace k3dyn
