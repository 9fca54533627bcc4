#pragma once

#include <array>
#include <cstdint>

#include "ttsa/linalg.hpp"

namespace ttsa {

// The ball projection fires only at iterate indices n = k^k - 1. k runs
// from 1 to 15: 15^15 is the largest k^k representable in 64 bits, so the
// schedule (and therefore any horizon) is capped there.
inline constexpr int kNumProjectionIndices = 15;
inline constexpr std::uint64_t kMaxHorizon = 437893890380859375ULL;  // 15^15

const std::array<std::uint64_t, kNumProjectionIndices>& projection_indices();

bool is_projection_index(std::uint64_t n);

// Pi_R: scale back onto the ball of radius r when outside, identity inside.
Vector ball_project(double r, const Vector& x);

// Projection as applied at iterate index n: identity off-schedule.
Vector sparse_project(std::uint64_t n, double r, const Vector& x);

}  // namespace ttsa
