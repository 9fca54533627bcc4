#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace ttsa {

// Polynomial step sizes alpha_n = (n+1)^{-alpha}, beta_n = (n+1)^{-beta},
// with 1 > alpha > beta > 0 strictly. Equal exponents are rejected up
// front: without a genuine fast/slow split the finite-time constants are
// all infinite.
struct StepSchedule {
  double alpha = 0.8;
  double beta = 0.5;

  void validate() const;
  double alpha_n(std::uint64_t n) const;
  double beta_n(std::uint64_t n) const;
};

std::pair<double, double> stepsizes(const StepSchedule& s, std::uint64_t n);

// Precomputed (alpha_n, beta_n) for n in [0, n_max); pow() per step is the
// dominant cost of a long run otherwise.
class StepTable {
 public:
  StepTable() = default;
  StepTable(const StepSchedule& s, std::uint64_t n_max);

  bool covers(std::uint64_t horizon) const { return horizon <= a_.size(); }
  double alpha_n(std::uint64_t n) const { return a_[n]; }
  double beta_n(std::uint64_t n) const { return b_[n]; }

 private:
  std::vector<double> a_, b_;
};

}  // namespace ttsa
