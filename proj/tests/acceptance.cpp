// ============================================================================
// Acceptance suite. Each numbered criterion prints exactly one line,
//
//   [PASS] criterion N: label (T.Ts)
//
// and the process exit code is the number of failed criteria. Run without
// arguments for the whole suite, or pass a single index to run one criterion
// (the per-criterion ctest entries do exactly that).
// ============================================================================

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "ttsa/analysis.hpp"
#include "ttsa/constants.hpp"
#include "ttsa/gtd.hpp"
#include "ttsa/linalg.hpp"
#include "ttsa/rng.hpp"
#include "ttsa/sa_core.hpp"

using namespace ttsa;

namespace {

// Same construction as the unit suites: diagonally dominant Gamma1 and W2,
// so A1 and A2 hold with comfortable margins.
MatrixSpec random_dominant_spec(int d, std::uint64_t seed) {
  StepRng rng(seed, 0x5350454353454544ULL, 0);
  auto fill = [&](Matrix& m) {
    m.resize(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m(r, c) = 2.0 * rng.next_unit() - 1.0;
  };
  MatrixSpec s;
  fill(s.gamma1);
  fill(s.w1);
  fill(s.gamma2);
  fill(s.w2);
  s.gamma1 += 4.0 * double(d) * Matrix::Identity(d, d);
  s.w2 += 4.0 * double(d) * Matrix::Identity(d, d);
  s.v1.resize(d);
  s.v2.resize(d);
  for (int i = 0; i < d; ++i) {
    s.v1(i) = 2.0 * rng.next_unit() - 1.0;
    s.v2(i) = 2.0 * rng.next_unit() - 1.0;
  }
  return s;
}

// Identity-anchored specs with small off-diagonal noise. The ledger's
// deviation envelopes carry factors exponential in q and ||X1||^2, so the
// lemma checks need systems whose constants stay inside double range;
// strongly dominant matrices push them to inf.
MatrixSpec random_moderate_spec(int d, std::uint64_t seed) {
  StepRng rng(seed, 0x4d4f444552415445ULL, 0);
  auto fill = [&](Matrix& m, double amp) {
    m.resize(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m(r, c) = amp * (2.0 * rng.next_unit() - 1.0);
  };
  MatrixSpec s;
  fill(s.gamma1, 0.15);
  fill(s.w1, 0.15);
  fill(s.gamma2, 0.15);
  fill(s.w2, 0.15);
  s.gamma1 += Matrix::Identity(d, d);
  s.w2 += Matrix::Identity(d, d);
  s.v1.resize(d);
  s.v2.resize(d);
  for (int i = 0; i < d; ++i) {
    s.v1(i) = 2.0 * rng.next_unit() - 1.0;
    s.v2(i) = 2.0 * rng.next_unit() - 1.0;
  }
  return s;
}

void note_once(std::string& note, const std::string& msg) {
  if (note.empty()) note = msg;
}

bool fixed_point_ok(const MatrixSpec& spec, const char* tag, std::string& note) {
  const DerivedSystem sys = derive_system(spec);
  const double r1 =
      (spec.v1 - spec.gamma1 * sys.theta_star - spec.w1 * sys.w_star).norm();
  const double r2 =
      (spec.v2 - spec.gamma2 * sys.theta_star - spec.w2 * sys.w_star).norm();
  const bool ok = r1 <= 1e-10 * (1.0 + spec.v1.norm()) &&
                  r2 <= 1e-10 * (1.0 + spec.v2.norm());
  if (!ok)
    note_once(note, std::string(tag) + ": fixed-point residuals " +
                        std::to_string(r1) + ", " + std::to_string(r2));
  return ok;
}

// ---- criterion 1: fixed points of matrix systems and GTD embeddings --------

bool criterion_fixed_points(std::string& note) {
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const int d = 1 + int(seed % 4);
    const MatrixSpec spec = random_dominant_spec(d, seed);
    if (!check_assumptions(spec).pass()) {
      note_once(note, "matrix seed " + std::to_string(seed) + " fails A1/A2");
      ok = false;
      continue;
    }
    ok = fixed_point_ok(spec, ("matrix seed " + std::to_string(seed)).c_str(),
                        note) &&
         ok;
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int S = 2 + int(seed % 9);
    const int d = 1 + int(seed % std::uint64_t(std::min(S, 4)));
    const MdpSpec mdp = random_mdp(S, d, 1000 + seed, true);
    for (GtdVariant v : {GtdVariant::Gtd0, GtdVariant::Gtd2, GtdVariant::Tdc}) {
      const GtdInstance inst = build_gtd(v, mdp);
      const std::string tag = std::string(variant_name(v)) + " mdp seed " +
                              std::to_string(seed);
      ok = fixed_point_ok(inst.spec, tag.c_str(), note) && ok;
    }
  }
  return ok;
}

// ---- criterion 2: sparse projection index predicate -------------------------

bool criterion_projection_indices(std::string& note) {
  std::vector<std::uint64_t> table;
  for (std::uint64_t k = 1;; ++k) {
    std::uint64_t p = 1;
    for (std::uint64_t i = 0; i < k; ++i) p *= k;
    if (p - 1 > 10000000ULL) break;
    table.push_back(p - 1);
  }
  std::size_t next = 0;
  for (std::uint64_t n = 0; n <= 10000000ULL; ++n) {
    const bool expected = next < table.size() && table[next] == n;
    if (expected) ++next;
    if (is_projection_index(n) != expected) {
      note_once(note, "disagreement at n = " + std::to_string(n));
      return false;
    }
  }
  return true;
}

// ---- criterion 3: decomposition identities on sampled GTD2 runs -------------

bool criterion_decomposition(std::string& note) {
  bool ok = true;
  const StepSchedule sched{0.8, 0.5};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const MdpSpec mdp = random_mdp(5, 3, 400 + seed, true);
    const GtdInstance inst = build_gtd(GtdVariant::Gtd2, mdp);
    const DerivedSystem sys = derive_system(inst.spec);
    RunOptions opts;
    opts.record_noise = true;
    const Trajectory traj = run_trajectory(inst.spec, sched, ProjectionConfig{},
                                           GtdNoise{inst}, 1000, seed, {}, opts);
    if (traj.diverged) {
      note_once(note, "seed " + std::to_string(seed) + " diverged");
      ok = false;
      continue;
    }
    const Decomposition dec = decompose(traj, sys, 0);
    const double tol = 1e-8 * dec.max_iterate_norm;
    if (dec.residual_theta > tol || dec.residual_w > tol ||
        dec.residual_telescoping > tol) {
      note_once(note, "seed " + std::to_string(seed) + ": residuals " +
                          std::to_string(dec.residual_theta) + ", " +
                          std::to_string(dec.residual_w) + ", " +
                          std::to_string(dec.residual_telescoping) +
                          " exceed " + std::to_string(tol));
      ok = false;
    }
  }
  return ok;
}

// ---- criterion 4: ledger lemma bounds, pointwise up to 1e5 ------------------

// Log of a ledger entry's value whether or not it fits a double.
double entry_ln(const ConstantsLedger& lg, const char* name) {
  const LedgerEntry& e = lg.entry(name);
  return e.log_space ? e.log10_value * std::log(10.0) : std::log(e.value);
}

// Plain value; false when the entry only exists in log space.
bool entry_plain(const ConstantsLedger& lg, const char* name, double& out) {
  const LedgerEntry& e = lg.entry(name);
  if (e.log_space) return false;
  out = e.value;
  return true;
}

bool lemma_suite_one(const DerivedSystem& sys, const ConstantsLedger& lg,
                     const StepSchedule& sched, std::string& note,
                     const std::string& tag) {
  constexpr std::uint64_t kNMax = 100000;
  constexpr double kSlack = 1.0 + 1e-12;
  bool ok = true;
  auto fail = [&](const std::string& what) {
    note_once(note, tag + ": " + what);
    ok = false;
  };

  // The ladder and epsilon checks below are meaningless on a ledger whose
  // constants overflowed, so insist on finiteness up front.
  if (!std::isfinite(lg.A1(1)) || !std::isfinite(lg.A2()) ||
      !std::isfinite(lg.A3()) || !std::isfinite(lg.eps_theta(1)) ||
      !std::isfinite(lg.eps_w(1))) {
    fail("ledger constants are not finite");
    return false;
  }

  // (a) a_n / b_n envelopes from their thresholds on.
  const std::vector<AnBnPoint> pts = lg.an_bn_prefix(kNMax);
  const auto Ka = std::uint64_t(lg.value("K_anbn_theta"));
  const auto Kb = std::uint64_t(lg.value("K_anbn_w"));
  for (std::uint64_t n = std::max<std::uint64_t>(Ka, 1); n <= kNMax; ++n)
    if (pts[n - 1].a_n > pts[n - 1].bound_theta * kSlack) {
      fail("a_n envelope fails at n = " + std::to_string(n));
      break;
    }
  for (std::uint64_t n = std::max<std::uint64_t>(Kb, 1); n <= kNMax; ++n)
    if (pts[n - 1].b_n > pts[n - 1].bound_w * kSlack) {
      fail("b_n envelope fails at n = " + std::to_string(n));
      break;
    }

  // (b) window products prod ||I - a_k M|| <= C_Dn e^{-q sum a_k}, checked in
  // the log domain from the start and from the small-step threshold, and
  // (e) ||I - a_n M|| <= 1 beyond K_smalleig.
  const int d = sys.dim();
  const Matrix eye = Matrix::Identity(d, d);
  const auto Ksa = std::uint64_t(lg.value("K_smalleig_alpha"));
  const auto Ksb = std::uint64_t(lg.value("K_smalleig_beta"));
  const double lnC_tha = entry_ln(lg, "C_Dn_theta");
  const double lnC_w = entry_ln(lg, "C_Dn_w");
  double lp_a0 = 0.0, lp_am = 0.0, sa0 = 0.0, sam = 0.0;
  double lp_b0 = 0.0, lp_bm = 0.0, sb0 = 0.0, sbm = 0.0;
  for (std::uint64_t k = 0; k < kNMax; ++k) {
    const double an = sched.alpha_n(k);
    const double bn = sched.beta_n(k);
    const double na = spectral_norm(eye - an * sys.x1);
    const double nb = spectral_norm(eye - bn * sys.spec.w2);
    if (k >= Ksa && na > kSlack) {
      fail("||I - a_n X1|| > 1 at n = " + std::to_string(k));
      break;
    }
    if (k >= Ksb && nb > kSlack) {
      fail("||I - b_n W2|| > 1 at n = " + std::to_string(k));
      break;
    }
    lp_a0 += std::log(na);
    sa0 += an;
    lp_b0 += std::log(nb);
    sb0 += bn;
    if (lp_a0 > lnC_tha - lg.q1() * sa0 + 1e-9) {
      fail("theta window product fails at n = " + std::to_string(k + 1));
      break;
    }
    if (lp_b0 > lnC_w - lg.q2() * sb0 + 1e-9) {
      fail("w window product fails at n = " + std::to_string(k + 1));
      break;
    }
    if (k >= Ksa) {
      lp_am += std::log(na);
      sam += an;
      if (lp_am > lnC_tha - lg.q1() * sam + 1e-9) {
        fail("theta suffix product fails at n = " + std::to_string(k + 1));
        break;
      }
    }
    if (k >= Ksb) {
      lp_bm += std::log(nb);
      sbm += bn;
      if (lp_bm > lnC_w - lg.q2() * sbm + 1e-9) {
        fail("w suffix product fails at n = " + std::to_string(k + 1));
        break;
      }
    }
  }

  // (c) epsilon-domination from its threshold on.
  {
    double Ke = 0.0;
    if (entry_plain(lg, "K_epsdom_a", Ke) && Ke <= double(kNMax)) {
      const auto n0 = std::uint64_t(std::ceil(std::max(Ke, 1.0)));
      const double e0t = lg.eps_theta(n0);
      const double e0w = lg.eps_w(n0);
      double asum = 0.0;
      for (std::uint64_t n = n0 + 1; n <= kNMax; ++n) {
        asum += sched.alpha_n(n);
        const double lhs = std::exp(-lg.q_min() * asum);
        if (lhs > (lg.eps_theta(n) / e0t) * kSlack ||
            lhs > (lg.eps_w(n) / e0w) * kSlack) {
          fail("epsilon domination fails at n = " + std::to_string(n));
          break;
        }
      }
    }
  }

  // (d) eps <= R/2 from the constant-epsilon burn-in thresholds.
  {
    struct Side {
      const char* key;
      double radius;
      double (ConstantsLedger::*eps)(std::uint64_t) const;
    };
    const Side sides[] = {
        {"K_consteps_alpha", lg.r_theta(), &ConstantsLedger::eps_theta},
        {"K_consteps_beta", lg.r_w(), &ConstantsLedger::eps_w},
    };
    for (const Side& s : sides) {
      double K = 0.0;
      if (!entry_plain(lg, s.key, K) || !std::isfinite(K) || K > 9e15)
        continue;  // threshold beyond any indexable n

      const auto k0 = std::uint64_t(std::ceil(std::max(K, 1.0)));
      std::vector<std::uint64_t> probe;
      if (k0 <= kNMax) {
        for (std::uint64_t n = k0; n <= kNMax; ++n) probe.push_back(n);
      } else {
        probe = {k0, k0 + 1, 2 * k0, 10 * k0};
      }
      for (std::uint64_t n : probe)
        if ((lg.*s.eps)(n) > 0.5 * s.radius * kSlack) {
          fail(std::string(s.key) + " threshold fails at n = " +
               std::to_string(n));
          break;
        }
    }
  }

  // (f) ladder monotonicity from e^{1/beta} / (4 d^2 / delta)^{1/p}.
  {
    const LedgerConfig& cfg = lg.config();
    const double B2 = std::pow(4.0 * double(d) * double(d) / cfg.delta, 1.0 / cfg.p);
    const auto start = std::uint64_t(
        std::max(1.0, std::ceil(std::exp(1.0 / sched.beta) / B2)));
    for (int ell = 0; ell <= lg.ell_star(); ++ell) {
      double prev = lg.u_ladder(start, ell, 1);
      for (std::uint64_t n = start + 1; n <= kNMax; ++n) {
        const double cur = lg.u_ladder(n, ell, 1);
        if (cur > prev * kSlack) {
          fail("u ladder (ell = " + std::to_string(ell) +
               ") increases at n = " + std::to_string(n));
          break;
        }
        prev = cur;
      }
    }
  }

  // (g) the ladder tail is alpha- and beta-moderate from K_alpha / K_beta.
  {
    const double z = sched.beta / 2.0;
    const struct {
      double K;
      ModerateKind kind;
      const char* label;
    } mods[] = {
        {lg.K_alpha(z), ModerateKind::Alpha, "alpha"},
        {lg.K_beta(z), ModerateKind::Beta, "beta"},
    };
    for (const auto& m : mods) {
      if (!(m.K <= 9e15)) continue;
      const auto k0 = std::uint64_t(std::ceil(std::max(m.K, 1.0)));
      std::vector<double> u;
      u.reserve(2001);
      for (std::uint64_t i = 0; i <= 2000; ++i)
        u.push_back(lg.u_ladder(k0 + i, lg.ell_star(), 1));
      if (!moderateness_check(u, m.kind, k0, sys, sched))
        fail(std::string(m.label) + "-moderateness fails from k0 = " +
             std::to_string(k0));
    }
  }

  return ok;
}

bool criterion_lemma_suite(std::string& note) {
  bool ok = true;
  const StepSchedule sched{0.8, 0.5};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int d = 2 + int(seed % 2);
    const MatrixSpec spec = random_moderate_spec(d, 200 + seed);
    if (!check_assumptions(spec).pass()) {
      note_once(note, "system " + std::to_string(seed) + " fails A1/A2");
      ok = false;
      continue;
    }
    const DerivedSystem sys = derive_system(spec);
    LedgerConfig cfg;
    cfg.schedule = sched;
    try {
      const ConstantsLedger lg(sys, cfg);
      ok = lemma_suite_one(sys, lg, sched, note,
                           "system " + std::to_string(seed)) &&
           ok;
    } catch (const NumericalError& e) {
      note_once(note, "system " + std::to_string(seed) + ": " + e.what());
      ok = false;
    }
  }
  return ok;
}

// ---- criteria 5 and 6: Monte Carlo rate reproduction ------------------------

// The Monte Carlo criteria share one fixed MDP (S = 5, d = 2). This seed was
// picked for a fast-mixing theta timescale (largest lambda_min(X1 + X1^T)
// over a 5000-seed scan), so the fit window [1e4, 1e6] sits on the
// stationary noise floor rather than the initial transient at every step
// exponent used below.
constexpr std::uint64_t kRateMdpSeed = 3271;

RateReport gtd_rate(GtdVariant v, const MdpSpec& mdp, double alpha, double beta,
                    int seeds, std::uint64_t horizon) {
  const GtdInstance inst = build_gtd(v, mdp);
  const StepSchedule sched{alpha, beta};
  const auto cps = log_uniform_checkpoints(10000, horizon, 15);
  const SweepResult sweep = run_sweep(inst.spec, sched, ProjectionConfig{},
                                      GtdNoise{inst}, horizon, cps, 1, seeds, 0);
  return fit_rate(sweep, 10000, horizon, sched);
}

bool criterion_rate_reproduction(std::string& note) {
  const MdpSpec mdp = random_mdp(5, 2, kRateMdpSeed, true);
  const RateReport rep =
      gtd_rate(GtdVariant::Gtd0, mdp, 0.8, 0.5, 100, 1000000);
  const bool ok_theta = rep.slope_theta >= -0.50 && rep.slope_theta <= -0.30;
  const bool ok_w = rep.slope_w >= -0.35 && rep.slope_w <= -0.15;
  if (!ok_theta || !ok_w)
    note_once(note, "slope_theta = " + std::to_string(rep.slope_theta) +
                        " (want [-0.50, -0.30]), slope_w = " +
                        std::to_string(rep.slope_w) + " (want [-0.35, -0.15])");
  if (rep.num_divergent != 0)
    note_once(note,
              std::to_string(rep.num_divergent) + " of 100 seeds diverged");
  return ok_theta && ok_w && rep.num_divergent == 0;
}

bool criterion_decoupling(std::string& note) {
  const MdpSpec mdp = random_mdp(5, 2, kRateMdpSeed, true);
  bool ok = true;

  // Fast slope against the slow exponent with beta fixed.
  {
    double slopes[3];
    const double alphas[3] = {0.7, 0.8, 0.9};
    double mean = 0.0;
    for (int i = 0; i < 3; ++i) {
      slopes[i] =
          gtd_rate(GtdVariant::Gtd0, mdp, alphas[i], 0.5, 100, 1000000).slope_w;
      mean += slopes[i] / 3.0;
    }
    for (int i = 0; i < 3; ++i)
      if (std::abs(slopes[i] - mean) > 0.05) {
        note_once(note, "slope_w at alpha = " + std::to_string(alphas[i]) +
                            " is " + std::to_string(slopes[i]) +
                            ", pooled mean " + std::to_string(mean));
        ok = false;
      }
  }
  // Slow slope against the fast exponent with alpha fixed.
  {
    double slopes[3];
    const double betas[3] = {0.3, 0.4, 0.5};
    double mean = 0.0;
    for (int i = 0; i < 3; ++i) {
      slopes[i] = gtd_rate(GtdVariant::Gtd0, mdp, 0.8, betas[i], 100, 1000000)
                      .slope_theta;
      mean += slopes[i] / 3.0;
    }
    for (int i = 0; i < 3; ++i)
      if (std::abs(slopes[i] - mean) > 0.05) {
        note_once(note, "slope_theta at beta = " + std::to_string(betas[i]) +
                            " is " + std::to_string(slopes[i]) +
                            ", pooled mean " + std::to_string(mean));
        ok = false;
      }
  }
  return ok;
}

// ---- criterion 7: projected and unprojected chains couple -------------------

bool criterion_coupling(std::string& note) {
  const MdpSpec mdp = random_mdp(5, 2, kRateMdpSeed, true);
  const GtdInstance inst = build_gtd(GtdVariant::Gtd0, mdp);
  const DerivedSystem sys = derive_system(inst.spec);
  const double radius =
      10.0 * (1.0 + sys.theta_star.norm() + sys.w_star.norm());
  ProjectionConfig proj;
  proj.enabled = true;
  proj.r_theta = radius;
  proj.r_w = radius;
  const BoundedSphereNoise noise(0.1);
  const StepSchedule sched{0.8, 0.5};

  int identical = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const CouplingReport rep =
        coupling_check(inst.spec, sched, proj, noise, 100000, seed);
    if (!rep.first_divergence) {
      ++identical;
    } else if (!is_projection_index(*rep.first_divergence)) {
      note_once(note, "seed " + std::to_string(seed) +
                          " diverges at non-projection index " +
                          std::to_string(*rep.first_divergence));
      return false;
    }
  }
  if (identical < 95) {
    note_once(note, "only " + std::to_string(identical) +
                        " of 100 seeds stayed bit-identical");
    return false;
  }
  return true;
}

// ---- criterion 8: scaled-error lower bound ----------------------------------

bool criterion_lower_bound(std::string& note) {
  const MdpSpec mdp = random_mdp(5, 2, kRateMdpSeed, true);
  const GtdInstance inst = build_gtd(GtdVariant::Gtd2, mdp);
  const StepSchedule sched{0.8, 0.5};
  const std::vector<std::uint64_t> cps = {10000, 100000, 1000000};
  const SweepTable table = lower_bound_mc(inst, sched, 200, 1, cps, 1e-3, 0);

  bool ok = true;
  for (std::size_t j = 0; j < cps.size(); ++j)
    if (table.frac_below_c_theta[j] > 0.2) {
      note_once(note, "frac below c at n = " + std::to_string(cps[j]) +
                          " is " + std::to_string(table.frac_below_c_theta[j]));
      ok = false;
    }
  const auto [mn, mx] = std::minmax_element(table.median_scaled_theta.begin(),
                                            table.median_scaled_theta.end());
  if (!(*mx < 3.0 * *mn)) {
    note_once(note, "median scaled error spans " + std::to_string(*mn) +
                        " to " + std::to_string(*mx));
    ok = false;
  }
  if (table.num_divergent != 0) {
    note_once(note, std::to_string(table.num_divergent) + " seeds diverged");
    ok = false;
  }
  return ok;
}

// ---- criterion 9: sampled noise is bounded and conditionally centered -------

bool criterion_noise_conditions(std::string& note) {
  const MdpSpec mdp = random_mdp(6, 3, 555, true);
  bool ok = true;
  for (GtdVariant v : {GtdVariant::Gtd0, GtdVariant::Gtd2, GtdVariant::Tdc}) {
    const GtdInstance inst = build_gtd(v, mdp);
    const GtdNoise noise(inst);
    const int d = inst.spec.dim();
    Vector theta = Vector::Constant(d, 0.3);
    Vector w = Vector::Constant(d, -0.2);
    Vector m1(d), m2(d);
    Vector sum1 = Vector::Zero(d), sum2 = Vector::Zero(d);
    Vector sq1 = Vector::Zero(d), sq2 = Vector::Zero(d);
    const int N = 100000;
    for (int n = 0; n < N; ++n) {
      noise.sample(99, std::uint64_t(n), theta, w, m1, m2);
      if (!validate_noise_bound({m1, m2}, theta, w, inst.m1, inst.m2)) {
        note_once(note, std::string(variant_name(v)) +
                            ": bound violated at record " + std::to_string(n));
        ok = false;
        break;
      }
      sum1 += m1;
      sum2 += m2;
      sq1 += m1.cwiseProduct(m1);
      sq2 += m2.cwiseProduct(m2);
    }
    for (int i = 0; i < d; ++i) {
      const double mean1 = sum1(i) / N, mean2 = sum2(i) / N;
      const double var1 = sq1(i) / N - mean1 * mean1;
      const double var2 = sq2(i) / N - mean2 * mean2;
      const double se1 = std::sqrt(std::max(var1, 0.0) / N);
      const double se2 = std::sqrt(std::max(var2, 0.0) / N);
      if (std::abs(mean1) > 4.0 * se1 + 1e-12 ||
          std::abs(mean2) > 4.0 * se2 + 1e-12) {
        note_once(note, std::string(variant_name(v)) + ": coordinate " +
                            std::to_string(i) + " mean off-center");
        ok = false;
      }
    }
  }
  return ok;
}

// ---- criterion 10: golden identities in the emitted report ------------------

bool criterion_golden_constants(std::string& note) {
  const MdpSpec mdp = random_mdp(5, 2, kRateMdpSeed, true);
  const GtdInstance inst = build_gtd(GtdVariant::Gtd2, mdp);
  LedgerConfig cfg;
  cfg.schedule = StepSchedule{0.8, 0.5};
  cfg.m1 = inst.m1;
  cfg.m2 = inst.m2;
  const ConstantsLedger ledger(derive_system(inst.spec), cfg);
  const nlohmann::json j = ledger.to_json();

  auto value_of = [&](const char* name) -> double {
    for (const auto& e : j["entries"])
      if (e["name"] == name) return e["value"].get<double>();
    return std::numeric_limits<double>::quiet_NaN();
  };

  bool ok = true;
  if (value_of("C_R_theta") != 3.0) {
    note_once(note, "C_R_theta != 3");
    ok = false;
  }
  const double r_w = j["config"]["r_w"].get<double>();
  if (value_of("A3") != value_of("C_R_w") * r_w) {
    note_once(note, "A3 != C_R_w * r_w");
    ok = false;
  }
  if (value_of("K_Int_a") != std::pow(2.0, 1.0 / (0.8 - 0.5))) {
    note_once(note, "K_Int_a != 2^{1/(alpha-beta)}");
    ok = false;
  }
  if (value_of("ell_star") != 1.0) {
    note_once(note, "ell_star(0.8, 0.5) != 1");
    ok = false;
  }
  return ok;
}

// ---- runner -----------------------------------------------------------------

struct Criterion {
  int id;
  const char* label;
  double budget_seconds;
  bool (*fn)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "fixed-point residuals", 5.0, criterion_fixed_points},
    {2, "sparse projection indices", 2.0, criterion_projection_indices},
    {3, "decomposition identities", 10.0, criterion_decomposition},
    {4, "ledger lemma bounds", 60.0, criterion_lemma_suite},
    {5, "theorem rate reproduction", 600.0, criterion_rate_reproduction},
    {6, "timescale decoupling", 1800.0, criterion_decoupling},
    {7, "projection coupling", 300.0, criterion_coupling},
    {8, "scaled-error lower bound", 900.0, criterion_lower_bound},
    {9, "noise conditions", 30.0, criterion_noise_conditions},
    {10, "constants golden values", 1.0, criterion_golden_constants},
};

}  // namespace

int main(int argc, char** argv) {
  const int which = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  bool matched = false;

  for (const Criterion& c : kCriteria) {
    if (which != 0 && which != c.id) continue;
    matched = true;

    std::string note;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ok = c.fn(note);
    } catch (const std::exception& e) {
      note_once(note, std::string("exception: ") + e.what());
      ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (ok && secs > c.budget_seconds) {
      note_once(note, "runtime " + std::to_string(secs) + "s over budget " +
                          std::to_string(c.budget_seconds) + "s");
      ok = false;
    }

    std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL",
                c.id, c.label, secs, note.empty() ? "" : ": ",
                note.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }

  if (!matched) {
    std::fprintf(stderr, "unknown criterion index %d (valid: 0-10)\n", which);
    return 2;
  }
  return failures;
}
