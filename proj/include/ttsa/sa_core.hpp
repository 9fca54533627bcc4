#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ttsa/errors.hpp"
#include "ttsa/linalg.hpp"
#include "ttsa/projection.hpp"
#include "ttsa/schedule.hpp"

namespace ttsa {

// Linear two-timescale recursion
//
//   theta_{n+1} = Pi( theta_n + alpha_n [ h1(theta_n, w_n) + M1_{n+1} ] )
//   w_{n+1}     = Pi( w_n     + beta_n  [ h2(theta_n, w_n) + M2_{n+1} ] )
//
// with h_i(theta, w) = v_i - Gamma_i theta - W_i w. Both updates read the
// pre-update pair (synchronous semantics), and Pi fires only when the new
// index n+1 is of the form k^k - 1. The initial iterate is never projected.

struct MatrixSpec {
  Matrix gamma1, w1, gamma2, w2;
  Vector v1, v2;

  int dim() const { return static_cast<int>(v1.size()); }
  void validate() const;
  Vector h1(const Vector& theta, const Vector& w) const;
  Vector h2(const Vector& theta, const Vector& w) const;
};

struct DerivedSystem {
  MatrixSpec spec;
  Matrix x1;          // Gamma_1 - W_1 W_2^{-1} Gamma_2
  Vector b1;          // v_1 - W_1 W_2^{-1} v_2
  Matrix w2_inv;
  Matrix w1_w2_inv;   // W_1 W_2^{-1}
  Vector theta_star;  // X_1^{-1} b_1
  Vector w_star;      // W_2^{-1} (v_2 - Gamma_2 theta_star)

  int dim() const { return spec.dim(); }
};

struct AssumptionReport {
  double lambda_min_w2_sym = 0.0;  // lambda_min(W2 + W2^T) / 2
  double lambda_min_x1_sym = 0.0;  // lambda_min(X1 + X1^T) / 2
  bool w2_positive = false;
  bool x1_positive = false;
  bool pass() const { return w2_positive && x1_positive; }
};

struct ProjectionConfig {
  bool enabled = false;
  double r_theta = std::numeric_limits<double>::infinity();
  double r_w = std::numeric_limits<double>::infinity();
  void validate() const;
};

struct IterateState {
  std::uint64_t n = 0;
  Vector theta;
  Vector w;
};

struct NoiseRecord {
  Vector m1;
  Vector m2;
};

// Noise must be a pure function of (seed, n, theta, w) and callable from
// several threads at once: the coupling argument and every reproducibility
// guarantee lean on this.
class NoiseModel {
 public:
  virtual ~NoiseModel() = default;
  virtual void sample(std::uint64_t seed, std::uint64_t n, const Vector& theta,
                      const Vector& w, Vector& m1, Vector& m2) const = 0;
};

class ZeroNoise final : public NoiseModel {
 public:
  void sample(std::uint64_t, std::uint64_t, const Vector&, const Vector&,
              Vector& m1, Vector& m2) const override {
    m1.setZero();
    m2.setZero();
  }
};

// Norm exactly c (1 + ||theta|| + ||w||) in a uniformly random direction,
// independent across blocks and steps. The direction does not depend on the
// iterates, so the conditional mean is zero.
class BoundedSphereNoise final : public NoiseModel {
 public:
  explicit BoundedSphereNoise(double c);
  void sample(std::uint64_t seed, std::uint64_t n, const Vector& theta,
              const Vector& w, Vector& m1, Vector& m2) const override;

 private:
  double c_;
};

struct ProjectionEvent {
  std::uint64_t n = 0;
  char which = 't';  // 't' or 'w'
};

struct Trajectory {
  StepSchedule schedule;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  Vector theta0, w0;

  std::vector<std::uint64_t> checkpoints;
  std::vector<IterateState> states;            // one per recorded checkpoint
  std::vector<double> errors_theta, errors_w;  // distances to (theta*, w*)
  std::vector<ProjectionEvent> projections_applied;

  bool has_noise = false;
  std::vector<NoiseRecord> noise;  // noise[n] drives the step n -> n+1

  // On divergence the run stops and the arrays are truncated at the last
  // finite state; first_nonfinite is the offending index.
  bool diverged = false;
  std::uint64_t first_nonfinite = 0;
};

DerivedSystem derive_system(const MatrixSpec& spec);
AssumptionReport check_assumptions(const MatrixSpec& spec);

// ||M_i|| <= m_i (1 + ||theta|| + ||w||), with a 1e-9 relative slack for
// rounding in the caller's own noise computation.
bool validate_noise_bound(const NoiseRecord& rec, const Vector& theta,
                          const Vector& w, double m1, double m2);

// One synchronous update; throws NonFinite if the result is not finite.
IterateState sa_step(const IterateState& s, const MatrixSpec& spec,
                     const StepSchedule& sched, const NoiseRecord& noise,
                     const ProjectionConfig& proj);

struct RunOptions {
  Vector theta0, w0;  // empty means zeros
  bool record_noise = false;
  const StepTable* steps = nullptr;  // optional precomputed schedule
};

Trajectory run_trajectory(const MatrixSpec& spec, const StepSchedule& sched,
                          const ProjectionConfig& proj, const NoiseModel& noise,
                          std::uint64_t horizon, std::uint64_t seed,
                          const std::vector<std::uint64_t>& checkpoints,
                          const RunOptions& opts = {});

// Rounded geometric grid on [lo, hi], deduplicated, endpoints included.
std::vector<std::uint64_t> log_uniform_checkpoints(std::uint64_t lo,
                                                   std::uint64_t hi, int count);

}  // namespace ttsa
