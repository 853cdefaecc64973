#pragma once

#include <cstddef>
#include <vector>

namespace msre {

// pairwise (tree) summation: error O(log N) ulps instead of O(N); keeps the
// 1e-9 energy-identity tolerances honest on larger boxes
inline double pairwise_sum(const double* x, size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size());
}

// incremental accumulator that finishes with a pairwise reduction
class PairwiseAccumulator {
  public:
    void add(double v) { terms_.push_back(v); }
    double total() const { return pairwise_sum(terms_); }
    void reserve(size_t n) { terms_.reserve(n); }

  private:
    std::vector<double> terms_;
};

}  // namespace msre
