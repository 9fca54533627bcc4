#include "ttsa/projection.hpp"

#include <algorithm>

#include "ttsa/errors.hpp"

namespace ttsa {

const std::array<std::uint64_t, kNumProjectionIndices>& projection_indices() {
  static const auto table = [] {
    std::array<std::uint64_t, kNumProjectionIndices> t{};
    for (int k = 1; k <= kNumProjectionIndices; ++k) {
      std::uint64_t v = 1;
      for (int i = 0; i < k; ++i) v *= std::uint64_t(k);
      t[k - 1] = v - 1;
    }
    return t;
  }();
  return table;
}

bool is_projection_index(std::uint64_t n) {
  const auto& t = projection_indices();
  return std::binary_search(t.begin(), t.end(), n);
}

Vector ball_project(double r, const Vector& x) {
  if (!(r > 0.0)) throw ValidationError("projection radius must be positive");
  const double nrm = x.norm();
  if (nrm <= r) return x;
  return (r / nrm) * x;
}

Vector sparse_project(std::uint64_t n, double r, const Vector& x) {
  if (!is_projection_index(n)) return x;
  return ball_project(r, x);
}

}  // namespace ttsa
