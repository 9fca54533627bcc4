#include "ttsa/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <mutex>
#include <thread>

namespace ttsa {

namespace {
constexpr std::uint64_t kMaxStepTable = 4000000;  // 64 MB of cached steps

double median_of(std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

void put17(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}
}  // namespace

// ---- decomposition ---------------------------------------------------------

Decomposition decompose(const Trajectory& traj, const DerivedSystem& sys,
                        std::uint64_t n0) {
  const int d = sys.dim();
  if (!traj.has_noise || traj.noise.size() < traj.horizon)
    throw MissingNoise("decompose needs the full per-step noise record");
  if (traj.diverged)
    throw ValidationError("decompose: trajectory diverged before the horizon");
  if (!traj.projections_applied.empty())
    throw ValidationError("decompose needs an unprojected trajectory");
  if (n0 >= traj.horizon)
    throw ValidationError("decompose: n0 must lie before the horizon");
  if (traj.theta0.size() != d || traj.w0.size() != d)
    throw ValidationError("decompose: trajectory dimension does not match system");

  const MatrixSpec& spec = sys.spec;
  const StepSchedule& sched = traj.schedule;
  sched.validate();

  Vector theta = traj.theta0;
  Vector w = traj.w0;
  Vector h1(d), h2(d), tn(d), wn(d);
  // Same arithmetic as the trajectory runner, so the replay reproduces the
  // recorded run bit for bit.
  auto advance = [&](std::uint64_t n) {
    const double an = sched.alpha_n(n);
    const double bn = sched.beta_n(n);
    h1 = spec.v1;
    h1.noalias() -= spec.gamma1 * theta;
    h1.noalias() -= spec.w1 * w;
    h1 += traj.noise[n].m1;
    h2 = spec.v2;
    h2.noalias() -= spec.gamma2 * theta;
    h2.noalias() -= spec.w2 * w;
    h2 += traj.noise[n].m2;
    tn = theta + an * h1;
    wn = w + bn * h2;
    theta.swap(tn);
    wn.swap(w);
  };
  for (std::uint64_t n = 0; n < n0; ++n) advance(n);

  Decomposition out;
  out.n0 = n0;
  const std::size_t len = static_cast<std::size_t>(traj.horizon - n0) + 1;
  for (auto* seq : {&out.delta_theta, &out.l_theta, &out.r_theta_term,
                    &out.t_term, &out.delta_w, &out.l_w, &out.r_w_term})
    seq->reserve(len);

  Vector dth = theta - sys.theta_star;
  Vector lth = Vector::Zero(d), rth = Vector::Zero(d), tterm = Vector::Zero(d);
  Vector dw = w - sys.w_star;
  Vector lw = Vector::Zero(d), rw = Vector::Zero(d);

  out.delta_theta.push_back(dth);
  out.l_theta.push_back(lth);
  out.r_theta_term.push_back(rth);
  out.t_term.push_back(tterm);
  out.delta_w.push_back(dw);
  out.l_w.push_back(lw);
  out.r_w_term.push_back(rw);
  out.max_iterate_norm = std::max(theta.norm(), w.norm());

  // Telescoped form of R^(theta): the product of (I - alpha_j X1) acting on
  // the initial term is carried as a vector, never as an explicit matrix
  // product.
  Vector pvec = (sched.alpha_n(n0) / sched.beta_n(n0)) *
                (sys.w1_w2_inv * (w - sys.w_star));

  Vector theta_cur(d), w_cur(d), g(d), ag(d), tmp(d), resid(d);
  double prev_ratio = 0.0;
  for (std::uint64_t n = n0; n < traj.horizon; ++n) {
    const double an = sched.alpha_n(n);
    const double bn = sched.beta_n(n);
    const Vector& m1 = traj.noise[n].m1;
    const Vector& m2 = traj.noise[n].m2;
    auto applyA = [&](Vector& x) {
      tmp.noalias() = sys.x1 * x;
      x -= an * tmp;
    };
    auto applyF = [&](Vector& x) {
      tmp.noalias() = spec.w2 * x;
      x -= bn * tmp;
    };

    theta_cur = theta;
    w_cur = w;
    advance(n);  // theta, w now hold the iterates at n + 1

    applyA(dth);
    applyA(lth);
    lth.noalias() += an * (m1 - sys.w1_w2_inv * m2);
    applyA(rth);
    rth.noalias() += (an / bn) * (sys.w1_w2_inv * (w - w_cur));
    if (n > n0) {
      g.noalias() = sys.w1_w2_inv * (w_cur - sys.w_star);
      ag = g;
      applyA(ag);
      applyA(tterm);
      tterm.noalias() += (an / bn) * g;
      tterm.noalias() -= prev_ratio * ag;
      applyA(pvec);
    }

    applyF(dw);
    applyF(lw);
    lw.noalias() += bn * m2;
    applyF(rw);
    rw.noalias() -= bn * (spec.gamma2 * (theta_cur - sys.theta_star));

    resid = theta - sys.theta_star;
    resid -= dth;
    resid -= lth;
    resid -= rth;
    out.residual_theta = std::max(out.residual_theta, resid.norm());

    resid = w - sys.w_star;
    resid -= dw;
    resid -= lw;
    resid -= rw;
    out.residual_w = std::max(out.residual_w, resid.norm());

    resid = (an / bn) * (sys.w1_w2_inv * (w - sys.w_star));
    resid -= pvec;
    resid -= tterm;
    resid -= rth;
    out.residual_telescoping = std::max(out.residual_telescoping, resid.norm());

    out.max_iterate_norm =
        std::max({out.max_iterate_norm, theta.norm(), w.norm()});
    out.delta_theta.push_back(dth);
    out.l_theta.push_back(lth);
    out.r_theta_term.push_back(rth);
    out.t_term.push_back(tterm);
    out.delta_w.push_back(dw);
    out.l_w.push_back(lw);
    out.r_w_term.push_back(rw);
    prev_ratio = an / bn;
  }
  return out;
}

// ---- sweeps ------------------------------------------------------------------

int SweepResult::num_divergent() const {
  int c = 0;
  for (char f : diverged) c += f ? 1 : 0;
  return c;
}

int thread_count_from_env(int num_seeds) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("TTSA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v < n) n = static_cast<int>(v);
  }
  return std::clamp(n, 1, std::max(1, num_seeds));
}

SweepResult run_sweep(const MatrixSpec& spec, const StepSchedule& sched,
                      const ProjectionConfig& proj, const NoiseModel& noise,
                      std::uint64_t horizon,
                      const std::vector<std::uint64_t>& checkpoints,
                      std::uint64_t base_seed, int num_seeds, int num_threads) {
  spec.validate();
  sched.validate();
  proj.validate();
  if (num_seeds < 1) throw ValidationError("run_sweep: need at least one seed");
  if (checkpoints.empty())
    throw ValidationError("run_sweep: need at least one checkpoint");

  SweepResult out;
  out.ns = checkpoints;
  out.seeds.resize(num_seeds);
  for (int i = 0; i < num_seeds; ++i)
    out.seeds[i] = base_seed + static_cast<std::uint64_t>(i);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.err_theta.assign(num_seeds, std::vector<double>(checkpoints.size(), nan));
  out.err_w = out.err_theta;
  out.diverged.assign(num_seeds, 0);

  StepTable table;
  RunOptions opts;
  if (horizon <= kMaxStepTable) {
    table = StepTable(sched, horizon);
    opts.steps = &table;
  }

  const int workers = num_threads > 0 ? std::min(num_threads, num_seeds)
                                      : thread_count_from_env(num_seeds);
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= num_seeds) return;
      try {
        const Trajectory t = run_trajectory(spec, sched, proj, noise, horizon,
                                            out.seeds[i], checkpoints, opts);
        // A divergent run records a prefix of the checkpoints; the rest stay
        // NaN.
        for (std::size_t j = 0; j < t.errors_theta.size(); ++j) {
          out.err_theta[i][j] = t.errors_theta[j];
          out.err_w[i][j] = t.errors_w[j];
        }
        out.diverged[i] = t.diverged ? 1 : 0;
      } catch (...) {
        const std::lock_guard<std::mutex> lk(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int k = 0; k < workers; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

// ---- rate fitting ---------------------------------------------------------------

FitResult fit_loglog(const std::vector<std::uint64_t>& ns,
                     const std::vector<double>& errs) {
  if (ns.size() != errs.size())
    throw ValidationError("fit_loglog: length mismatch");
  std::vector<double> xs, ys;
  xs.reserve(ns.size());
  ys.reserve(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (std::isfinite(errs[i]) && errs[i] > 0.0) {
      xs.push_back(std::log(static_cast<double>(ns[i]) + 1.0));
      ys.push_back(std::log(errs[i]));
    }
  }
  const std::size_t m = xs.size();
  if (m < 2)
    throw DegenerateWindow("need at least two positive errors to fit a rate");
  // Coincident checkpoints must be caught exactly; the sxx > 0 guard below
  // can miss them when rounding in xbar leaves sxx at ~1e-33 instead of 0.
  if (*std::max_element(xs.begin(), xs.end()) <=
      *std::min_element(xs.begin(), xs.end()))
    throw DegenerateWindow("all checkpoints coincide");

  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(m);
  ybar /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) throw DegenerateWindow("all checkpoints coincide");

  FitResult fit;
  fit.slope = sxy / sxx;
  const double intercept = ybar - fit.slope * xbar;
  if (m > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = ys[i] - intercept - fit.slope * xs[i];
      rss += r * r;
    }
    fit.std_err = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  }
  return fit;
}

RateReport fit_rate(const SweepResult& sweep, std::uint64_t window_lo,
                    std::uint64_t window_hi, const StepSchedule& sched) {
  sched.validate();
  if (window_lo >= window_hi)
    throw DegenerateWindow("rate window needs n_lo < n_hi");

  std::vector<int> keep;
  for (std::size_t i = 0; i < sweep.seeds.size(); ++i)
    if (!sweep.diverged[i]) keep.push_back(static_cast<int>(i));
  if (keep.empty()) throw DegenerateWindow("every seed diverged");

  std::vector<std::uint64_t> ns;
  std::vector<double> mean_th, mean_w;
  for (std::size_t j = 0; j < sweep.ns.size(); ++j) {
    const std::uint64_t n = sweep.ns[j];
    if (n < window_lo || n > window_hi) continue;
    double st = 0.0, sw = 0.0;
    for (int i : keep) {
      st += sweep.err_theta[i][j];
      sw += sweep.err_w[i][j];
    }
    ns.push_back(n);
    mean_th.push_back(st / static_cast<double>(keep.size()));
    mean_w.push_back(sw / static_cast<double>(keep.size()));
  }
  if (ns.size() < 2)
    throw DegenerateWindow("fewer than two checkpoints in the fit window");

  const FitResult ft = fit_loglog(ns, mean_th);
  const FitResult fw = fit_loglog(ns, mean_w);

  RateReport rep;
  rep.slope_theta = ft.slope;
  rep.slope_w = fw.slope;
  rep.stderr_theta = ft.std_err;
  rep.stderr_w = fw.std_err;
  rep.window_lo = window_lo;
  rep.window_hi = window_hi;
  rep.num_seeds = static_cast<int>(keep.size());
  rep.num_divergent = sweep.num_divergent();
  rep.predicted_theta = -sched.alpha / 2.0;
  rep.predicted_w = -sched.beta / 2.0;
  if (!std::isfinite(rep.slope_theta) || !std::isfinite(rep.slope_w))
    throw NumericalError("rate fit produced a non-finite slope");
  return rep;
}

// ---- scaled-error tables ----------------------------------------------------------

SweepTable summarize(const SweepResult& sweep, const StepSchedule& sched,
                     double c) {
  sched.validate();
  if (!(c >= 0.0)) throw ValidationError("summarize: c must be nonnegative");

  SweepTable t;
  t.ns = sweep.ns;
  t.num_seeds = static_cast<int>(sweep.seeds.size());
  t.num_divergent = sweep.num_divergent();
  t.c = c;

  std::vector<double> sc_th, sc_w;
  for (std::size_t j = 0; j < sweep.ns.size(); ++j) {
    const double np1 = static_cast<double>(sweep.ns[j]) + 1.0;
    const double scale_th = std::pow(np1, sched.alpha / 2.0);
    const double scale_w = std::pow(np1, sched.beta / 2.0);

    sc_th.clear();
    sc_w.clear();
    double sum_th = 0.0, sum_w = 0.0;
    int below_th = 0, below_w = 0;
    for (std::size_t i = 0; i < sweep.seeds.size(); ++i) {
      const double et = sweep.err_theta[i][j];
      const double ew = sweep.err_w[i][j];
      if (!std::isfinite(et) || !std::isfinite(ew)) continue;
      sum_th += et;
      sum_w += ew;
      sc_th.push_back(scale_th * et);
      sc_w.push_back(scale_w * ew);
      if (scale_th * et < c) ++below_th;
      if (scale_w * ew < c) ++below_w;
    }
    const double m = static_cast<double>(sc_th.size());
    t.mean_err_theta.push_back(m > 0 ? sum_th / m
                                     : std::numeric_limits<double>::quiet_NaN());
    t.mean_err_w.push_back(m > 0 ? sum_w / m
                                 : std::numeric_limits<double>::quiet_NaN());
    t.median_scaled_theta.push_back(median_of(sc_th));
    t.median_scaled_w.push_back(median_of(sc_w));
    // Fractions are over all seeds: a seed that has already diverged is
    // certainly not below the threshold.
    t.frac_below_c_theta.push_back(below_th / double(t.num_seeds));
    t.frac_below_c_w.push_back(below_w / double(t.num_seeds));
  }
  return t;
}

SweepTable lower_bound_mc(const GtdInstance& inst, const StepSchedule& sched,
                          int num_seeds, std::uint64_t base_seed,
                          const std::vector<std::uint64_t>& checkpoints,
                          double c, int num_threads) {
  if (num_seeds < 30)
    throw ValidationError("lower_bound_mc: need at least 30 seeds");
  if (checkpoints.empty())
    throw ValidationError("lower_bound_mc: need at least one checkpoint");
  const GtdNoise noise(inst);
  const ProjectionConfig proj;  // unprojected
  const SweepResult sweep =
      run_sweep(inst.spec, sched, proj, noise, checkpoints.back(), checkpoints,
                base_seed, num_seeds, num_threads);
  return summarize(sweep, sched, c);
}

// ---- coupling -------------------------------------------------------------------

namespace {
// Mirrors the trajectory runner's update arithmetic exactly; before the
// first effective projection the two chains therefore stay bit-identical.
struct LockstepChain {
  const MatrixSpec& spec;
  Vector theta, w, h1, h2, tn, wn, m1, m2;

  LockstepChain(const MatrixSpec& s, int d)
      : spec(s),
        theta(Vector::Zero(d)),
        w(Vector::Zero(d)),
        h1(d), h2(d), tn(d), wn(d), m1(d), m2(d) {}

  // Returns true when a projection moved an iterate at index n + 1.
  bool step(const NoiseModel& noise, std::uint64_t seed, std::uint64_t n,
            double an, double bn, const ProjectionConfig& proj) {
    noise.sample(seed, n, theta, w, m1, m2);
    h1 = spec.v1;
    h1.noalias() -= spec.gamma1 * theta;
    h1.noalias() -= spec.w1 * w;
    h1 += m1;
    h2 = spec.v2;
    h2.noalias() -= spec.gamma2 * theta;
    h2.noalias() -= spec.w2 * w;
    h2 += m2;
    tn = theta + an * h1;
    wn = w + bn * h2;
    bool moved = false;
    if (proj.enabled && is_projection_index(n + 1)) {
      const double tnorm = tn.norm();
      if (tnorm > proj.r_theta) {
        tn *= proj.r_theta / tnorm;
        moved = true;
      }
      const double wnorm = wn.norm();
      if (wnorm > proj.r_w) {
        wn *= proj.r_w / wnorm;
        moved = true;
      }
    }
    theta.swap(tn);
    w.swap(wn);
    return moved;
  }
};
}  // namespace

CouplingReport coupling_check(const MatrixSpec& spec, const StepSchedule& sched,
                              const ProjectionConfig& proj,
                              const NoiseModel& noise, std::uint64_t horizon,
                              std::uint64_t seed) {
  spec.validate();
  sched.validate();
  proj.validate();
  if (horizon > kMaxHorizon)
    throw ValidationError("horizon exceeds the largest supported projection index (15^15)");

  const int d = spec.dim();
  LockstepChain projected(spec, d), plain(spec, d);
  const ProjectionConfig off;

  StepTable table;
  bool use_table = false;
  if (horizon <= kMaxStepTable) {
    table = StepTable(sched, horizon);
    use_table = true;
  }

  CouplingReport rep;
  const std::size_t bytes = sizeof(double) * static_cast<std::size_t>(d);
  for (std::uint64_t n = 0; n < horizon; ++n) {
    const double an = use_table ? table.alpha_n(n) : sched.alpha_n(n);
    const double bn = use_table ? table.beta_n(n) : sched.beta_n(n);
    const bool moved = projected.step(noise, seed, n, an, bn, proj);
    plain.step(noise, seed, n, an, bn, off);
    if (moved) rep.last_effective_projection = n + 1;
    if (!rep.first_divergence &&
        (std::memcmp(projected.theta.data(), plain.theta.data(), bytes) != 0 ||
         std::memcmp(projected.w.data(), plain.w.data(), bytes) != 0))
      rep.first_divergence = n + 1;
  }
  return rep;
}

// ---- serialization ------------------------------------------------------------------

void write_table_csv(std::ostream& os, const SweepTable& t) {
  os << "n,mean_err_theta,mean_err_w,median_scaled_theta,median_scaled_w,"
        "frac_below_c_theta,frac_below_c_w\n";
  for (std::size_t j = 0; j < t.ns.size(); ++j) {
    os << t.ns[j] << ',';
    put17(os, t.mean_err_theta[j]);
    os << ',';
    put17(os, t.mean_err_w[j]);
    os << ',';
    put17(os, t.median_scaled_theta[j]);
    os << ',';
    put17(os, t.median_scaled_w[j]);
    os << ',';
    put17(os, t.frac_below_c_theta[j]);
    os << ',';
    put17(os, t.frac_below_c_w[j]);
    os << '\n';
  }
}

void write_runs_csv(std::ostream& os, const SweepResult& sweep) {
  os << "seed,n,err_theta,err_w\n";
  for (std::size_t i = 0; i < sweep.seeds.size(); ++i) {
    for (std::size_t j = 0; j < sweep.ns.size(); ++j) {
      os << sweep.seeds[i] << ',' << sweep.ns[j] << ',';
      put17(os, sweep.err_theta[i][j]);
      os << ',';
      put17(os, sweep.err_w[i][j]);
      os << '\n';
    }
  }
}

}  // namespace ttsa
