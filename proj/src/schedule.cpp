#include "ttsa/schedule.hpp"

#include <cmath>

#include "ttsa/errors.hpp"

namespace ttsa {

void StepSchedule::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0))
    throw ValidationError("step exponents must lie strictly inside (0, 1)");
  if (alpha == beta)
    throw DegenerateTimescales(
        "assumption A2 needs alpha > beta: with alpha == beta the timescales "
        "coincide and the rate constants are undefined");
  if (alpha < beta)
    throw ValidationError("need alpha > beta: theta must be the slow iterate");
}

double StepSchedule::alpha_n(std::uint64_t n) const {
  return std::pow(double(n) + 1.0, -alpha);
}

double StepSchedule::beta_n(std::uint64_t n) const {
  return std::pow(double(n) + 1.0, -beta);
}

std::pair<double, double> stepsizes(const StepSchedule& s, std::uint64_t n) {
  s.validate();
  return {s.alpha_n(n), s.beta_n(n)};
}

StepTable::StepTable(const StepSchedule& s, std::uint64_t n_max) {
  s.validate();
  a_.resize(n_max);
  b_.resize(n_max);
  for (std::uint64_t n = 0; n < n_max; ++n) {
    a_[n] = s.alpha_n(n);
    b_[n] = s.beta_n(n);
  }
}

}  // namespace ttsa
