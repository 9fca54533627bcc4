#include "ttsa/sa_core.hpp"

#include <algorithm>
#include <cmath>

#include "ttsa/rng.hpp"

namespace ttsa {

namespace {
constexpr std::uint64_t kSphereNoiseStream = 0x5350484552453031ULL;
}

// ---- specs and derived quantities --------------------------------------

void MatrixSpec::validate() const {
  const int d = dim();
  if (d < 1) throw ValidationError("MatrixSpec: dimension must be at least 1");
  auto square = [&](const Matrix& m, const char* name) {
    if (m.rows() != d || m.cols() != d)
      throw ValidationError(std::string("MatrixSpec: ") + name + " must be " +
                            std::to_string(d) + "x" + std::to_string(d));
    if (!m.allFinite())
      throw ValidationError(std::string("MatrixSpec: ") + name + " has non-finite entries");
  };
  square(gamma1, "Gamma1");
  square(w1, "W1");
  square(gamma2, "Gamma2");
  square(w2, "W2");
  if (v2.size() != d) throw ValidationError("MatrixSpec: v1 and v2 must have equal size");
  if (!v1.allFinite() || !v2.allFinite())
    throw ValidationError("MatrixSpec: v1/v2 have non-finite entries");
}

Vector MatrixSpec::h1(const Vector& theta, const Vector& w) const {
  return v1 - gamma1 * theta - w1 * w;
}

Vector MatrixSpec::h2(const Vector& theta, const Vector& w) const {
  return v2 - gamma2 * theta - w2 * w;
}

DerivedSystem derive_system(const MatrixSpec& spec) {
  spec.validate();
  DerivedSystem sys;
  sys.spec = spec;
  sys.w2_inv = invert(spec.w2, "W2");
  sys.w1_w2_inv = spec.w1 * sys.w2_inv;
  sys.x1 = spec.gamma1 - sys.w1_w2_inv * spec.gamma2;
  sys.b1 = spec.v1 - sys.w1_w2_inv * spec.v2;
  sys.theta_star = solve(sys.x1, sys.b1, "X1");
  sys.w_star = sys.w2_inv * (spec.v2 - spec.gamma2 * sys.theta_star);
  return sys;
}

AssumptionReport check_assumptions(const MatrixSpec& spec) {
  spec.validate();
  AssumptionReport rep;
  rep.lambda_min_w2_sym = lambda_min_sym(spec.w2) / 2.0;
  rep.w2_positive = rep.lambda_min_w2_sym > 0.0;
  try {
    const DerivedSystem sys = derive_system(spec);
    rep.lambda_min_x1_sym = lambda_min_sym(sys.x1) / 2.0;
    rep.x1_positive = rep.lambda_min_x1_sym > 0.0;
  } catch (const SingularMatrix&) {
    rep.lambda_min_x1_sym = std::numeric_limits<double>::quiet_NaN();
    rep.x1_positive = false;
  }
  return rep;
}

// ---- noise --------------------------------------------------------------

BoundedSphereNoise::BoundedSphereNoise(double c) : c_(c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw ValidationError("BoundedSphereNoise: c must be finite and non-negative");
}

void BoundedSphereNoise::sample(std::uint64_t seed, std::uint64_t n,
                                const Vector& theta, const Vector& w,
                                Vector& m1, Vector& m2) const {
  const double scale = c_ * (1.0 + theta.norm() + w.norm());
  StepRng rng(seed, kSphereNoiseStream, n);
  for (Vector* out : {&m1, &m2}) {
    double s2 = 0.0;
    for (Eigen::Index i = 0; i < out->size(); ++i) {
      const double g = rng.next_gaussian();
      (*out)(i) = g;
      s2 += g * g;
    }
    const double nrm = std::sqrt(s2);
    *out *= (nrm > 0.0) ? scale / nrm : 0.0;
  }
}

bool validate_noise_bound(const NoiseRecord& rec, const Vector& theta,
                          const Vector& w, double m1, double m2) {
  const double scale = (1.0 + theta.norm() + w.norm()) * (1.0 + 1e-9);
  return rec.m1.norm() <= m1 * scale && rec.m2.norm() <= m2 * scale;
}

// ---- stepping -----------------------------------------------------------

void ProjectionConfig::validate() const {
  if (!enabled) return;
  if (!(r_theta > 0.0) || !(r_w > 0.0))
    throw ValidationError("projection radii must be positive");
}

IterateState sa_step(const IterateState& s, const MatrixSpec& spec,
                     const StepSchedule& sched, const NoiseRecord& noise,
                     const ProjectionConfig& proj) {
  sched.validate();
  proj.validate();
  if (s.theta.size() != spec.dim() || s.w.size() != spec.dim())
    throw ValidationError("sa_step: state dimension does not match spec");
  if (noise.m1.size() != spec.dim() || noise.m2.size() != spec.dim())
    throw MissingNoise("sa_step: noise record dimension does not match spec");

  const double an = sched.alpha_n(s.n);
  const double bn = sched.beta_n(s.n);

  IterateState out;
  out.n = s.n + 1;
  out.theta = s.theta + an * (spec.h1(s.theta, s.w) + noise.m1);
  out.w = s.w + bn * (spec.h2(s.theta, s.w) + noise.m2);
  if (proj.enabled && is_projection_index(out.n)) {
    out.theta = ball_project(proj.r_theta, out.theta);
    out.w = ball_project(proj.r_w, out.w);
  }
  if (!out.theta.allFinite() || !out.w.allFinite()) throw NonFinite(out.n);
  return out;
}

Trajectory run_trajectory(const MatrixSpec& spec, const StepSchedule& sched,
                          const ProjectionConfig& proj, const NoiseModel& noise,
                          std::uint64_t horizon, std::uint64_t seed,
                          const std::vector<std::uint64_t>& checkpoints,
                          const RunOptions& opts) {
  spec.validate();
  sched.validate();
  proj.validate();
  if (horizon > kMaxHorizon)
    throw ValidationError("horizon exceeds the largest supported projection index (15^15)");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > horizon)
      throw ValidationError("checkpoint beyond horizon");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw ValidationError("checkpoints must be strictly increasing");
  }

  const int d = spec.dim();
  const DerivedSystem sys = derive_system(spec);

  Trajectory out;
  out.schedule = sched;
  out.seed = seed;
  out.horizon = horizon;
  out.checkpoints = checkpoints;
  out.theta0 = opts.theta0.size() ? opts.theta0 : Vector::Zero(d);
  out.w0 = opts.w0.size() ? opts.w0 : Vector::Zero(d);
  if (out.theta0.size() != d || out.w0.size() != d)
    throw ValidationError("initial iterate dimension does not match spec");
  out.has_noise = opts.record_noise;
  if (opts.record_noise) out.noise.reserve(horizon);
  out.states.reserve(checkpoints.size());
  out.errors_theta.reserve(checkpoints.size());
  out.errors_w.reserve(checkpoints.size());

  Vector theta = out.theta0;
  Vector w = out.w0;

  std::size_t ci = 0;
  auto record = [&](std::uint64_t n) {
    if (ci < checkpoints.size() && checkpoints[ci] == n) {
      out.states.push_back({n, theta, w});
      out.errors_theta.push_back((theta - sys.theta_star).norm());
      out.errors_w.push_back((w - sys.w_star).norm());
      ++ci;
    }
  };
  record(0);

  const bool table = opts.steps && opts.steps->covers(horizon);

  Vector h1(d), h2(d), tn(d), wn(d), m1(d), m2(d);
  for (std::uint64_t n = 0; n < horizon; ++n) {
    noise.sample(seed, n, theta, w, m1, m2);
    if (opts.record_noise) out.noise.push_back({m1, m2});

    const double an = table ? opts.steps->alpha_n(n) : sched.alpha_n(n);
    const double bn = table ? opts.steps->beta_n(n) : sched.beta_n(n);

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

    const std::uint64_t idx = n + 1;
    if (proj.enabled && is_projection_index(idx)) {
      const double tnorm = tn.norm();
      if (tnorm > proj.r_theta) {
        tn *= proj.r_theta / tnorm;
        out.projections_applied.push_back({idx, 't'});
      }
      const double wnorm = wn.norm();
      if (wnorm > proj.r_w) {
        wn *= proj.r_w / wnorm;
        out.projections_applied.push_back({idx, 'w'});
      }
    }
    theta.swap(tn);
    w.swap(wn);

    if (!(std::isfinite(theta.squaredNorm()) && std::isfinite(w.squaredNorm()))) {
      out.diverged = true;
      out.first_nonfinite = idx;
      break;
    }
    record(idx);
  }
  return out;
}

std::vector<std::uint64_t> log_uniform_checkpoints(std::uint64_t lo,
                                                   std::uint64_t hi, int count) {
  if (lo < 1 || hi < lo || count < 1)
    throw ValidationError("log_uniform_checkpoints: need 1 <= lo <= hi and count >= 1");
  const double llo = std::log(double(lo));
  const double lhi = std::log(double(hi));
  std::vector<std::uint64_t> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double t = (count == 1) ? lhi : llo + (lhi - llo) * double(i) / double(count - 1);
    auto v = std::uint64_t(std::llround(std::exp(t)));
    v = std::clamp(v, lo, hi);
    if (out.empty() || v > out.back()) out.push_back(v);
  }
  return out;
}

}  // namespace ttsa
