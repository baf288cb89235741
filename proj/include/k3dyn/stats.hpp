#pragma once

// Batch means and least-squares fits.

#include <cstddef>
#include <vector>

namespace k3dyn {

// Splits a stream of known length into contiguous batches and reports the
// standard error of the mean from the spread of the batch means.
class BatchMeans {
 public:
  explicit BatchMeans(std::size_t total, std::size_t batches = 20);

  void add(double x);

  [[nodiscard]] std::size_t count() const { return count_; }
  [[nodiscard]] double mean() const;
  // Zero when fewer than two batches are populated.
  [[nodiscard]] double std_error() const;
  [[nodiscard]] std::vector<double> batch_means() const;

 private:
  std::size_t total_;
  std::vector<double> sum_;
  std::vector<std::size_t> n_;
  std::size_t count_ = 0;
};

struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;  // sd / sqrt(n); zero for n < 2
  std::size_t n = 0;
};
SampleSummary summarize(const std::vector<double>& xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};
// Throws NumericError for fewer than two points or constant x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> xs);

}  // namespace k3dyn
