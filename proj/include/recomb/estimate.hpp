#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "recomb/kernels.hpp"

namespace recomb {

/// Entrywise Monte Carlo estimate of a table: sample mean and standard error.
struct TableEstimate {
  int n = 0;
  std::size_t samples = 0;
  std::vector<double> mean;
  std::vector<double> std_error;
};

/// Per-entry sums of x and x^2, combined across tasks in task order.
class TableAccumulator {
 public:
  explicit TableAccumulator(std::size_t size = 0) : sum_(size), sumsq_(size) {}

  void add(const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum_[i].add(x[i]);
      sumsq_[i].add(x[i] * x[i]);
    }
    ++count_;
  }

  void merge(const TableAccumulator& other) {
    if (sum_.empty()) {
      *this = other;
      return;
    }
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      sum_[i].add(other.sum_[i].value());
      sumsq_[i].add(other.sumsq_[i].value());
    }
    count_ += other.count_;
  }

  std::size_t count() const { return count_; }

  TableEstimate finish(int n) const {
    TableEstimate e;
    e.n = n;
    e.samples = count_;
    e.mean.resize(sum_.size());
    e.std_error.resize(sum_.size());
    const double m = static_cast<double>(count_);
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      const double mean = sum_[i].value() / m;
      const double var =
          count_ > 1 ? std::max(0.0, (sumsq_[i].value() - m * mean * mean) / (m - 1)) : 0.0;
      e.mean[i] = mean;
      e.std_error[i] = std::sqrt(var / m);
    }
    return e;
  }

 private:
  std::vector<kernels::CompensatedSum> sum_;
  std::vector<kernels::CompensatedSum> sumsq_;
  std::size_t count_ = 0;
};

/// Scalar mean and standard error from running sums.
class ScalarAccumulator {
 public:
  void add(double x) {
    sum_.add(x);
    sumsq_.add(x * x);
    ++count_;
  }
  void merge(const ScalarAccumulator& o) {
    sum_.add(o.sum_.value());
    sumsq_.add(o.sumsq_.value());
    count_ += o.count_;
  }
  std::size_t count() const { return count_; }
  double mean() const { return count_ ? sum_.value() / static_cast<double>(count_) : 0.0; }
  double std_error() const {
    if (count_ < 2) return 0.0;
    const double m = static_cast<double>(count_);
    const double mu = mean();
    const double var = std::max(0.0, (sumsq_.value() - m * mu * mu) / (m - 1));
    return std::sqrt(var / m);
  }

 private:
  kernels::CompensatedSum sum_;
  kernels::CompensatedSum sumsq_;
  std::size_t count_ = 0;
};

}  // namespace recomb
