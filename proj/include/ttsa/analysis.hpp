#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "ttsa/errors.hpp"
#include "ttsa/gtd.hpp"
#include "ttsa/linalg.hpp"
#include "ttsa/sa_core.hpp"
#include "ttsa/schedule.hpp"

namespace ttsa {

// ==========================================================================
// Trajectory decomposition
//
// On an unprojected run with a full noise record, the slow error splits as
//
//   theta_{n+1} - theta* = Delta_{n+1} + L_{n+1} + R_{n+1}
//
// and analogously for the fast iterate. All components are built by forward
// recursions and compared against a replay of the trajectory itself, so the
// residuals measure floating-point self-consistency of the identities, not
// any statistical property.
// ==========================================================================

struct Decomposition {
  std::uint64_t n0 = 0;

  // Entry i corresponds to index n0 + i; the t_term sum starts at n0 + 1.
  std::vector<Vector> delta_theta, l_theta, r_theta_term, t_term;
  std::vector<Vector> delta_w, l_w, r_w_term;

  double residual_theta = 0.0;       // max ||(theta_n - theta*) - (D+L+R)||
  double residual_w = 0.0;
  double residual_telescoping = 0.0; // max defect of the R^(theta) identity
  double max_iterate_norm = 0.0;     // scale for the residual tolerances
};

Decomposition decompose(const Trajectory& traj, const DerivedSystem& sys,
                        std::uint64_t n0);

// ==========================================================================
// Monte Carlo sweeps and rate fitting
// ==========================================================================

struct SweepResult {
  std::vector<std::uint64_t> ns;     // checkpoints, strictly increasing
  std::vector<std::uint64_t> seeds;
  // err_*[i][j]: distance to the fixed point for seeds[i] at ns[j]; NaN for
  // checkpoints past a divergence.
  std::vector<std::vector<double>> err_theta, err_w;
  std::vector<char> diverged;        // per seed

  int num_divergent() const;
};

// Seed-parallel sweep with deterministic, seed-indexed storage. num_threads
// <= 0 picks a worker count from TTSA_THREADS / hardware concurrency.
SweepResult run_sweep(const MatrixSpec& spec, const StepSchedule& sched,
                      const ProjectionConfig& proj, const NoiseModel& noise,
                      std::uint64_t horizon,
                      const std::vector<std::uint64_t>& checkpoints,
                      std::uint64_t base_seed, int num_seeds,
                      int num_threads = 0);

struct FitResult {
  double slope = 0.0;
  double std_err = 0.0;
};

// Least-squares slope of log(err) against log(n+1). Needs >= 2 points with
// positive errors; throws DegenerateWindow otherwise.
FitResult fit_loglog(const std::vector<std::uint64_t>& ns,
                     const std::vector<double>& errs);

struct RateReport {
  double slope_theta = 0.0, slope_w = 0.0;
  double stderr_theta = 0.0, stderr_w = 0.0;
  std::uint64_t window_lo = 0, window_hi = 0;
  int num_seeds = 0;       // seeds entering the fit (non-divergent)
  int num_divergent = 0;
  double predicted_theta = 0.0;  // -alpha/2
  double predicted_w = 0.0;      // -beta/2
};

// Fits the across-seed mean error over checkpoints in [window_lo, window_hi].
RateReport fit_rate(const SweepResult& sweep, std::uint64_t window_lo,
                    std::uint64_t window_hi, const StepSchedule& sched);

// ==========================================================================
// Scaled-error tables (lower-bound checks)
// ==========================================================================

struct SweepTable {
  std::vector<std::uint64_t> ns;
  std::vector<double> mean_err_theta, mean_err_w;
  std::vector<double> median_scaled_theta, median_scaled_w;
  std::vector<double> frac_below_c_theta, frac_below_c_w;
  int num_seeds = 0;
  int num_divergent = 0;
  double c = 0.0;
};

// Scales errors by (n+1)^{alpha/2} (theta) and (n+1)^{beta/2} (w). Fractions
// are over all seeds; checkpoints past a divergence hold NaN and never count
// as below c. Means and medians skip those NaN entries.
SweepTable summarize(const SweepResult& sweep, const StepSchedule& sched,
                     double c);

SweepTable lower_bound_mc(const GtdInstance& inst, const StepSchedule& sched,
                          int num_seeds, std::uint64_t base_seed,
                          const std::vector<std::uint64_t>& checkpoints,
                          double c, int num_threads = 0);

// ==========================================================================
// Projected / unprojected coupling
// ==========================================================================

struct CouplingReport {
  // First index n at which the projected and unprojected state streams stop
  // being bit-identical, and the last index at which a projection actually
  // moved an iterate. Either can be absent.
  std::optional<std::uint64_t> first_divergence;
  std::optional<std::uint64_t> last_effective_projection;
};

// Runs the projected and unprojected chains in lockstep on the same seed
// (noise is a pure function of (seed, n, theta, w)) and compares raw state
// bytes after every step.
CouplingReport coupling_check(const MatrixSpec& spec, const StepSchedule& sched,
                              const ProjectionConfig& proj,
                              const NoiseModel& noise, std::uint64_t horizon,
                              std::uint64_t seed);

// ==========================================================================
// Serialization
// ==========================================================================

// Columns: n,mean_err_theta,mean_err_w,median_scaled_theta,median_scaled_w,
// frac_below_c_theta,frac_below_c_w. 17 significant digits throughout.
void write_table_csv(std::ostream& os, const SweepTable& table);

// Per-seed checkpoint errors: seed,n,err_theta,err_w.
void write_runs_csv(std::ostream& os, const SweepResult& sweep);

// Worker count: TTSA_THREADS if set, else hardware concurrency, clamped to
// [1, num_seeds].
int thread_count_from_env(int num_seeds);

}  // namespace ttsa
