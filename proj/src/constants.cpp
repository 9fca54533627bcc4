#include "ttsa/constants.hpp"

#include <algorithm>
#include <cmath>

namespace ttsa {

namespace {
constexpr double kE = 2.71828182845904523536;
constexpr double kLn10 = 2.30258509299404568402;
}  // namespace

// ---- DualScalar -----------------------------------------------------------

DualScalar DualScalar::of(double x) {
  if (std::isnan(x) || x < 0.0)
    throw NumericalError("DualScalar: expected a non-negative value");
  DualScalar s;
  s.v = x;
  s.ln = (x == 0.0) ? -std::numeric_limits<double>::infinity() : std::log(x);
  return s;
}

DualScalar DualScalar::from_ln(double l) {
  DualScalar s;
  s.ln = l;
  s.v = std::exp(l);
  return s;
}

DualScalar operator*(const DualScalar& a, const DualScalar& b) {
  DualScalar s;
  s.v = a.v * b.v;
  s.ln = a.ln + b.ln;
  return s;
}

DualScalar operator/(const DualScalar& a, const DualScalar& b) {
  DualScalar s;
  s.v = a.v / b.v;
  s.ln = a.ln - b.ln;
  return s;
}

DualScalar operator+(const DualScalar& a, const DualScalar& b) {
  DualScalar s;
  s.v = a.v + b.v;
  const double hi = std::max(a.ln, b.ln);
  const double lo = std::min(a.ln, b.ln);
  s.ln = std::isinf(hi) && hi < 0 ? hi : hi + std::log1p(std::exp(lo - hi));
  return s;
}

DualScalar DualScalar::pow(double e) const {
  if (e == 0.0) return of(1.0);
  DualScalar s;
  s.v = std::pow(v, e);
  s.ln = ln * e;
  return s;
}

DualScalar DualScalar::max(const DualScalar& a, const DualScalar& b) {
  return a.ln >= b.ln ? a : b;
}

// ---- small free functions ---------------------------------------------------

QValues q_values(const DerivedSystem& sys) {
  const double lam_x1 = lambda_min_sym(sys.x1);
  const double lam_w2 = lambda_min_sym(sys.spec.w2);
  if (!(lam_x1 > 0.0))
    throw AssumptionViolated(
        "assumption A1 fails on the slow timescale: lambda_min(X1 + X1^T) <= 0");
  if (!(lam_w2 > 0.0))
    throw AssumptionViolated(
        "assumption A1 fails on the fast timescale: lambda_min(W2 + W2^T) <= 0");
  QValues q;
  q.q1 = lam_x1 / 4.0;
  q.q2 = lam_w2 / 4.0;
  q.q_min = std::min(q.q1, q.q2);
  return q;
}

double nu(std::uint64_t n, double gamma_exp, int d, double p, double delta) {
  if (!(d >= 1)) throw ConfigError("nu: dimension must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("nu: delta must lie in (0,1)");
  if (!(gamma_exp >= 0.0)) throw ConfigError("nu: gamma must be non-negative");
  const double np1 = double(n) + 1.0;
  const double arg = std::log(4.0 * double(d) * double(d) / delta) + p * std::log(np1);
  return std::pow(np1, -gamma_exp / 2.0) * std::sqrt(arg);
}

double nu(std::uint64_t n, double gamma_exp, const LedgerConfig& cfg) {
  return nu(n, gamma_exp, cfg.d > 0 ? cfg.d : 1, cfg.p, cfg.delta);
}

int ell_star(const StepSchedule& sched) {
  sched.validate();
  return int(std::ceil(sched.beta / (2.0 * (sched.alpha - sched.beta))));
}

bool moderateness_check(const std::vector<double>& u, ModerateKind kind,
                        std::uint64_t k0, const DerivedSystem& sys,
                        const StepSchedule& sched) {
  sched.validate();
  if (u.size() < 2)
    throw ValidationError("moderateness_check: need at least two sequence values");
  const QValues q = q_values(sys);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const std::uint64_t k = k0 + i;
    const double ratio = (sched.alpha_n(k + 1) / sched.alpha_n(k)) *
                         (sched.beta_n(k) / sched.beta_n(k + 1));
    const double expo = (kind == ModerateKind::Alpha)
                            ? std::exp(0.5 * q.q1 * sched.alpha_n(k + 1))
                            : std::exp(0.5 * q.q2 * sched.beta_n(k + 2));
    if (!(u[i] <= ratio * expo * u[i + 1] * (1.0 + 1e-12))) return false;
  }
  return true;
}

// ---- scan helpers -----------------------------------------------------------

namespace {

struct ScanResult {
  std::uint64_t K = 1;
  double C = 1.0;
};

// Minimal K with e^{-q S(n)} <= n^{-p} for all n >= K, where
// S(n) = sum_{k=1}^{n-1} (k+1)^{-p}, plus C = max_{1<=i<=K} i^p e^{-q S(i)}.
// Scan g(n) = p ln n - q S(n); once g <= 0 and (n+1)^p/n < q/p the
// increments g(n+1)-g(n) <= p/n - q (n+1)^{-p} are negative forever (the
// ratio (n+1)^p/n is decreasing for p < 1), so the scan can stop.
ScanResult scan_K_C(double p_hat, double q_hat, std::uint64_t cap,
                    const std::string& name) {
  ScanResult r;
  double S = 0.0;  // S(1)
  double best = 0.0;
  std::uint64_t last_positive = 0;
  for (std::uint64_t n = 1;; ++n) {
    if (n > cap) throw CapExceeded(name, cap);
    const double g = p_hat * std::log(double(n)) - q_hat * S;
    if (g > 0.0) last_positive = n;
    if (g > best) best = g;
    const double ratio = std::pow(double(n) + 1.0, p_hat) / double(n);
    if (g <= 0.0 && ratio < q_hat / p_hat) break;
    S += std::pow(double(n) + 1.0, -p_hat);
  }
  r.K = std::max<std::uint64_t>(1, last_positive + 1);
  r.C = std::exp(best);
  return r;
}

// Minimal n >= 0 with (n+1)^{-e} <= t.
std::uint64_t first_index_pow_leq(double e, double t) {
  if (!(t > 0.0)) throw AssumptionViolated("threshold must be positive");
  if (t >= 1.0) return 0;
  const double x = std::pow(t, -1.0 / e) - 1.0;
  auto n = std::uint64_t(std::max(0.0, std::ceil(x - 1e-9)));
  while (std::pow(double(n) + 1.0, -e) > t) ++n;
  while (n > 0 && std::pow(double(n), -e) <= t) --n;
  return n;
}

// K(B, e) = [B]^{1/e} [2 ln(2 B (4d^2/delta)^{e/p})]^{1/e}; zero when the
// log argument has dropped below 1 (the guarded quantity is already small).
DualScalar burnin_threshold(const DualScalar& B, double e, double p, int d,
                            double delta) {
  const double tail = (e / p) * (std::log(4.0) + 2.0 * std::log(double(d)) -
                                 std::log(delta));
  const double inner = std::log(2.0) + B.ln + tail;
  if (!(inner > 0.0)) return DualScalar::of(0.0);
  return DualScalar::from_ln((B.ln + std::log(2.0 * inner)) / e);
}

}  // namespace

// ---- ledger construction ----------------------------------------------------

ConstantsLedger::ConstantsLedger(const DerivedSystem& sys, const LedgerConfig& cfg)
    : cfg_(cfg), sched_(cfg.schedule) {
  sched_.validate();
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (!(cfg.p > 1.0)) throw ConfigError("p must exceed 1");
  if (!(cfg.m1 >= 0.0 && cfg.m2 >= 0.0)) throw ConfigError("m1/m2 must be non-negative");
  if (cfg.report_n0 < 1) throw ConfigError("report_n0 must be at least 1");
  if (cfg.d != 0 && cfg.d != sys.dim())
    throw ConfigError("configured dimension disagrees with the system");
  d_ = sys.dim();
  cfg_.d = d_;

  const double al = sched_.alpha;
  const double be = sched_.beta;
  const double gap = al - be;
  const double dd = double(d_);
  const double d3 = dd * dd * dd;
  const double p = cfg_.p;
  const double delta = cfg_.delta;

  const QValues q = q_values(sys);
  q1_ = q.q1;
  q2_ = q.q2;
  qmin_ = q.q_min;

  norm_x1_ = spectral_norm(sys.x1);
  norm_w2_ = spectral_norm(sys.spec.w2);
  norm_gamma2_ = spectral_norm(sys.spec.gamma2);
  norm_w1_ = spectral_norm(sys.spec.w1);
  norm_w2inv_ = spectral_norm(sys.w2_inv);
  norm_w1w2inv_ = spectral_norm(sys.w1_w2_inv);
  theta_star_norm_ = sys.theta_star.norm();
  w_star_norm_ = sys.w_star.norm();

  r_theta_ = cfg_.r_theta > 0.0 ? cfg_.r_theta
                                : 10.0 * (1.0 + theta_star_norm_ + w_star_norm_);
  r_w_ = cfg_.r_w > 0.0 ? cfg_.r_w : 10.0 * (1.0 + theta_star_norm_ + w_star_norm_);
  cfg_.r_theta = r_theta_;
  cfg_.r_w = r_w_;
  dist_theta_ = cfg_.dist_theta >= 0.0 ? cfg_.dist_theta : r_theta_;
  dist_w_ = cfg_.dist_w >= 0.0 ? cfg_.dist_w : r_w_;
  cfg_.dist_theta = dist_theta_;
  cfg_.dist_w = dist_w_;

  // a_n / b_n envelope: C(p,q) e^{q}/q with the scan threshold K.
  const ScanResult sa = scan_K_C(al, q1_, cfg_.scan_cap, "K_anbn_theta");
  const ScanResult sb = scan_K_C(be, q2_, cfg_.scan_cap, "K_anbn_w");
  K_anbn_theta_ = sa.K;
  K_anbn_w_ = sb.K;
  C_anbn_theta_ = sa.C * std::exp(q1_) / q1_;
  C_anbn_w_ = sb.C * std::exp(q2_) / q2_;

  // ||I - alpha_n X1|| <= 1 from K_smalleig on: alpha_n below
  // (lambda_min(X + X^T) - 2q) / lambda_max(X^T X).
  const double lam_x1 = lambda_min_sym(sys.x1);
  const double lam_w2 = lambda_min_sym(sys.spec.w2);
  K_smalleig_alpha_ =
      first_index_pow_leq(al, (lam_x1 - 2.0 * q1_) / (norm_x1_ * norm_x1_));
  K_smalleig_beta_ =
      first_index_pow_leq(be, (lam_w2 - 2.0 * q2_) / (norm_w2_ * norm_w2_));

  // Window-product envelope C_Dn. Each factor in the window product is
  // e^{step * (mu + 2q)}; with a constant-sign exponent the max over
  // windows is either 1 or the full sum up to K_Dn.
  mu1_ = norm_x1_ * norm_x1_ - lam_x1;
  mu2_ = norm_w2_ * norm_w2_ - lam_w2;
  {
    const double k1 = std::ceil(std::pow(norm_x1_ * norm_x1_ / (lam_x1 - 2.0 * q1_), 1.0 / al));
    const double k2 = std::ceil(std::pow(norm_w2_ * norm_w2_ / (lam_w2 - 2.0 * q2_), 1.0 / be));
    if (!(k1 <= double(cfg_.scan_cap))) throw CapExceeded("K_Dn1", cfg_.scan_cap);
    if (!(k2 <= double(cfg_.scan_cap))) throw CapExceeded("K_Dn2", cfg_.scan_cap);
    K_Dn1_ = std::uint64_t(std::max(0.0, k1));
    K_Dn2_ = std::uint64_t(std::max(0.0, k2));
    if (mu1_ + 2.0 * q1_ <= 0.0) {
      C_Dn_theta_ = DualScalar::of(1.0);
    } else {
      double s = 0.0;
      for (std::uint64_t l = 0; l <= K_Dn1_; ++l) s += sched_.alpha_n(l);
      C_Dn_theta_ = DualScalar::from_ln(0.5 * (mu1_ + 2.0 * q1_) * s);
    }
    // The fast recursion steps with beta_l, so the window product is taken
    // with beta_l as well.
    if (mu2_ + 2.0 * q2_ <= 0.0) {
      C_Dn_w_ = DualScalar::of(1.0);
    } else {
      double s = 0.0;
      for (std::uint64_t l = 0; l <= K_Dn2_; ++l) s += sched_.beta_n(l);
      C_Dn_w_ = DualScalar::from_ln(0.5 * (mu2_ + 2.0 * q2_) * s);
    }
  }

  // Radial constants of the projected process.
  crw_ = DualScalar::of(1.5) +
         DualScalar::of(std::exp(q2_) / q2_ * norm_gamma2_) * C_Dn_w_ *
             DualScalar::of(3.0 * (r_theta_ / r_w_));

  // Azuma envelope factors (reconstructed; the defining table is not in the
  // provided text).
  const DualScalar radius_sum =
      DualScalar::of(1.0 + 3.0 * r_theta_ + theta_star_norm_ + w_star_norm_) +
      crw_ * DualScalar::of(r_w_);
  L_theta_ = DualScalar::of(2.0) *
             (C_Dn_theta_ * radius_sum *
              DualScalar::of(cfg_.m2 + cfg_.m1 * norm_w1_ * norm_w2inv_))
                 .pow(2.0);
  L_w_ = DualScalar::of(2.0) *
         (C_Dn_w_ * radius_sum * DualScalar::of(cfg_.m2)).pow(2.0);

  eps_coef_theta_ = (DualScalar::of(d3) * L_theta_ * DualScalar::of(C_anbn_theta_)).pow(0.5);
  eps_coef_w_ = (DualScalar::of(d3) * L_w_ * DualScalar::of(C_anbn_w_)).pow(0.5);

  C_T_ = norm_x1_ + 2.0 * gap * (1.0 + norm_x1_);
  C_Int_ = 2.0 * std::exp(q2_ / 2.0) / q2_;
  K_Int_a_ = std::pow(2.0, 1.0 / gap);
  K_Int_b_ = std::pow(3.0 * al / q2_, 1.0 / (1.0 - be)) - 2.0;

  K_epsdom_a_ = ((L_theta_ * DualScalar::of(C_anbn_theta_)) /
                 (L_w_ * DualScalar::of(C_anbn_w_)))
                    .pow(1.0 / gap);
  K_epsdom_b_ = std::pow(1.0 + al / (2.0 * qmin_), 1.0 / (1.0 - al));

  K_consteps_alpha_ = burnin_threshold(
      DualScalar::of(4.0 * d3 * p / (al * r_theta_ * r_theta_)) * L_theta_ *
          DualScalar::of(C_anbn_theta_),
      al, p, d_, delta);
  K_consteps_beta_ = burnin_threshold(
      DualScalar::of(4.0 * d3 * p / (be * r_w_ * r_w_)) * L_w_ *
          DualScalar::of(C_anbn_w_),
      be, p, d_, delta);

  C_Ra_ = C_Dn_theta_ * DualScalar::of(std::max(norm_w1w2inv_, 1.0));
  C_Rb_ = DualScalar::of(norm_w1w2inv_) *
          (DualScalar::of(1.0) +
           DualScalar::of(2.0 * std::exp(q1_ / 2.0) / q1_ * C_T_) * C_Dn_theta_);

  C_Rntheta_theta_ =
      DualScalar::of(norm_w1_ * norm_w2inv_ * std::exp(q2_) / q2_ * 3.0 * norm_gamma2_) *
      C_Dn_w_;
  C_Rntheta_w_ = DualScalar::of(norm_w1_ * norm_w2inv_) *
                 (DualScalar::of(2.5) +
                  DualScalar::of(2.0 * std::exp(q1_ / 2.0) / q1_ * C_T_) *
                      C_Dn_theta_ * crw_);
  K_largetheta_ = (DualScalar::of(2.0 / 3.0) * C_Rntheta_theta_ +
                   DualScalar::of(2.0 / 3.0 * (r_w_ / r_theta_)) * C_Rntheta_w_)
                      .pow(1.0 / gap);

  ell_star_ = ttsa::ell_star(sched_);

  A2_ = DualScalar::of(std::exp(q1_ + 2.0 * gap) * norm_gamma2_) * C_Dn_w_ *
        C_Rb_ * DualScalar::of(2.0 * std::exp(q2_ / 2.0) / q2_);
  A3_ = crw_.v * r_w_;
  const DualScalar A3d = crw_ * DualScalar::of(r_w_);

  A1pp_ = C_Dn_w_ * DualScalar::of(norm_gamma2_ * C_Int_);

  DualScalar geom = DualScalar::of(0.0);
  for (int i = 0; i < ell_star_; ++i) geom = geom + A2_.pow(double(i));

  A4C0_ = (DualScalar::of(kE) + DualScalar::of(kE * kE) * A1pp_) * geom *
              eps_coef_w_ +
          A3d * A2_.pow(double(ell_star_));
  A5C0_ = (DualScalar::of(4.0 * d3) * L_theta_ * DualScalar::of(C_anbn_theta_)).pow(0.5);

  const DualScalar bracket =
      DualScalar::of(r_theta_) +
      C_Ra_ * DualScalar::of(std::exp(q1_) * (2.0 / qmin_) * (r_theta_ + r_w_));
  A4C1_ = DualScalar::of(d3) * L_w_ * DualScalar::of(C_anbn_w_) *
          (C_Dn_w_ * DualScalar::of(norm_gamma2_) * bracket +
           C_Dn_w_ * DualScalar::of(r_w_)) *
          DualScalar::of(kE) * geom;
  A5C1_ = C_Ra_ * (DualScalar::of(3.0 * r_theta_) + crw_ * DualScalar::of(r_w_));

  A4_prime_ = A4C1_ + DualScalar::of(1.0);
  A5_prime_ = DualScalar::of(4.0) + DualScalar::of(2.0) * A5C1_ +
              DualScalar::of(2.0) * C_Rb_ * A4C1_;

  K_A4A5_a_ = burnin_threshold(DualScalar::of(p / be) / A4C0_.pow(2.0), be, p, d_, delta);
  {
    const DualScalar cb4 = C_Rb_ * A4C0_;
    const DualScalar mn = cb4.ln <= A5C0_.ln ? cb4 : A5C0_;
    K_A4A5_b_ = burnin_threshold(DualScalar::of(p / al) / mn.pow(2.0), al, p, d_, delta);
  }

  // Projection burn-in: K = M^M with M = (A'/r)^{2/exponent}; ln K = M ln M.
  {
    const DualScalar Mw = (A4_prime_ / DualScalar::of(r_w_)).pow(2.0 / be);
    const DualScalar Mt = (A5_prime_ / DualScalar::of(r_theta_)).pow(2.0 / al);
    K_proj_w_ = DualScalar::from_ln(Mw.v * Mw.ln);
    K_proj_theta_ = DualScalar::from_ln(Mt.v * Mt.ln);
  }

  // Threshold chain.
  {
    auto D = [](double x) { return DualScalar::of(std::max(0.0, x)); };
    DualScalar n3 = D(double(K_smalleig_alpha_));
    n3 = DualScalar::max(n3, D(double(K_smalleig_beta_)));
    n3 = DualScalar::max(n3, D(K_alpha(0.0)));
    n3 = DualScalar::max(n3, K_consteps_beta_);
    n3 = DualScalar::max(n3, K_largetheta_);
    n3 = DualScalar::max(n3, D(std::pow(p - 1.0, -1.0 / (p - 1.0))));
    N_thm3_ = n3;

    DualScalar n4 = D(K_alpha(be / 2.0));
    n4 = DualScalar::max(n4, D(K_beta(be / 2.0)));
    n4 = DualScalar::max(
        n4, D(std::exp(1.0 / be) * std::pow(delta / (4.0 * dd * dd), 1.0 / p)));
    n4 = DualScalar::max(n4, D(K_Int_a_));
    n4 = DualScalar::max(n4, D(K_Int_b_));
    n4 = DualScalar::max(n4, K_epsdom_a_);
    n4 = DualScalar::max(n4, D(K_epsdom_b_));
    N_thm4_ = n4 + DualScalar::of(1.0);

    N_thm2_ = DualScalar::max(N_thm3_, N_thm4_);

    DualScalar np = N_thm2_;
    np = DualScalar::max(np, K_A4A5_a_);
    np = DualScalar::max(np, K_A4A5_b_);
    np = DualScalar::max(np, K_proj_w_);
    np = DualScalar::max(np, K_proj_theta_);
    np = DualScalar::max(np, D(std::exp(1.0 / be)));
    np = DualScalar::max(np, D(std::pow(2.0 / be, 2.0 / be)));
    N_prime_ = np;
  }

  // N_final: the first projection index at or past N'.
  {
    bool found = false;
    if (N_prime_.fits_double() && N_prime_.v <= double(kMaxHorizon)) {
      for (const std::uint64_t idx : projection_indices()) {
        if (double(idx) >= N_prime_.v) {
          N_final_ = DualScalar::of(double(idx));
          double k = 1.0;
          for (int j = 0; j < kNumProjectionIndices; ++j)
            if (projection_indices()[j] == idx) k = double(j + 1);
          N_final_k_ = k;
          found = true;
          break;
        }
      }
    }
    if (!found && !std::isfinite(N_prime_.ln)) {
      // A fully decoupled system (W1 = 0 and Gamma2 = 0) drives one of the
      // burn-in constants to 1/0; the final horizon is then past any index.
      N_final_k_ = std::numeric_limits<double>::infinity();
      N_final_ = DualScalar::from_ln(std::numeric_limits<double>::infinity());
      found = true;
    }
    if (!found) {
      // Solve k ln k >= ln N' in the reals, then take the integer ceiling.
      const double T = N_prime_.ln;
      double k = std::max(2.0, T / std::log(std::max(T, 2.0)));
      for (int it = 0; it < 60; ++it) {
        const double f = k * std::log(k) - T;
        k -= f / (std::log(k) + 1.0);
        k = std::max(k, 2.0);
      }
      k = std::ceil(k - 1e-9);
      // Below 2^53 a +-1 adjustment still moves k; past that the Newton
      // solution is already as exact as doubles allow.
      if (k < 9007199254740992.0) {
        while (k * std::log(k) < T) k += 1.0;
        while (k > 2.0 && (k - 1.0) * std::log(k - 1.0) >= T) k -= 1.0;
      }
      N_final_k_ = k;
      N_final_ = DualScalar::from_ln(k * std::log(k));
    }
  }

  // Final rate constants C = A' / nu(N_final).
  {
    auto nu_ln = [&](double g) {
      const double LN = N_final_.fits_double()
                            ? std::log(N_final_.v + 1.0)
                            : N_final_.ln;
      const double arg = std::log(4.0 * dd * dd / delta) + p * LN;
      return -(g / 2.0) * LN + 0.5 * std::log(arg);
    };
    if (!std::isfinite(N_final_.ln)) {
      // nu(infinity) = 0, so the rate constants degenerate with the horizon.
      C_final_theta_ = DualScalar::from_ln(std::numeric_limits<double>::infinity());
      C_final_w_ = C_final_theta_;
    } else if (N_final_.fits_double()) {
      const double np1 = N_final_.v + 1.0;
      const double arg = std::log(4.0 * dd * dd / delta) + p * std::log(np1);
      const double nut = std::pow(np1, -al / 2.0) * std::sqrt(arg);
      const double nuw = std::pow(np1, -be / 2.0) * std::sqrt(arg);
      C_final_theta_ = A5_prime_ / DualScalar::of(nut);
      C_final_w_ = A4_prime_ / DualScalar::of(nuw);
    } else {
      C_final_theta_ = A5_prime_ / DualScalar::from_ln(nu_ln(al));
      C_final_w_ = A4_prime_ / DualScalar::from_ln(nu_ln(be));
    }
  }

  // ---- assemble the report -------------------------------------------------

  const std::uint64_t n0 = cfg_.report_n0;
  const std::string anbn_src = "App. B (a_n/b_n envelope lemma)";
  const std::string dn_src = "App. B (product envelope lemma)";
  const std::string azuma_src = "App. F (Azuma bound)";

  push("q1", q1_, "App. B.3");
  push("q2", q2_, "App. B.3");
  push("q_min", qmin_, "App. B.3");
  push("K_anbn_theta", double(K_anbn_theta_), anbn_src);
  push("C_anbn_theta", C_anbn_theta_, anbn_src);
  push("K_anbn_w", double(K_anbn_w_), anbn_src);
  push("C_anbn_w", C_anbn_w_, anbn_src);
  push("K_smalleig_alpha", double(K_smalleig_alpha_), "App. B (small-step lemma)");
  push("K_smalleig_beta", double(K_smalleig_beta_), "App. B (small-step lemma)");
  push("K_Dn1", double(K_Dn1_), dn_src);
  push("K_Dn2", double(K_Dn2_), dn_src);
  push("mu1", mu1_, dn_src);
  push("mu2", mu2_, dn_src);
  push("C_Dn_theta", C_Dn_theta_, dn_src);
  push("C_Dn_w", C_Dn_w_, dn_src);
  push("C_R_theta", 3.0, "Sec. 4.1");
  push("C_R_w", crw_, "Sec. 4.1");
  push("L_theta", L_theta_, azuma_src, true);
  push("L_w", L_w_, azuma_src, true);
  push("nu(n0,alpha)", nu(n0, sched_.alpha), "Sec. 4");
  push("nu(n0,beta)", nu(n0, sched_.beta), "Sec. 4");
  push("eps_theta(n0)", eps_coef_theta_ * DualScalar::of(nu(n0, sched_.alpha)),
       "Sec. 4", true);
  push("eps_w(n0)", eps_coef_w_ * DualScalar::of(nu(n0, sched_.beta)), "Sec. 4",
       true);
  push("C_T", C_T_, "App. E (T_n lemma)");
  push("C_Int", C_Int_, "App. F (integral comparison lemma)");
  push("K_Int_a", K_Int_a_, "App. F (integral comparison lemma)");
  push("K_Int_b", K_Int_b_, "App. F (integral comparison lemma)");
  push("K_epsdom_a", K_epsdom_a_, "App. G (eps domination lemma)");
  push("K_epsdom_b", K_epsdom_b_, "App. G (eps domination lemma)");
  push("K_alpha(0)", K_alpha(0.0), "App. B (step-ratio lemma)");
  push("K_alpha(beta/2)", K_alpha(be / 2.0), "App. B (step-ratio lemma)");
  push("K_beta(0)", K_beta(0.0), "App. B (step-ratio lemma)");
  push("K_beta(beta/2)", K_beta(be / 2.0), "App. B (step-ratio lemma)");
  push("K_consteps_alpha", K_consteps_alpha_, "App. B (eps plateau lemma)");
  push("K_consteps_beta", K_consteps_beta_, "App. B (eps plateau lemma)");
  push("C_Ra", C_Ra_, "App. D (R_n bounds)");
  push("C_Rb", C_Rb_, "App. D (R_n bounds)");
  push("C_Rc(n0)", C_Rc(n0), "App. D (R_n bounds)");
  push("C_Rntheta_theta", C_Rntheta_theta_, "App. D (R_n theta bound)");
  push("C_Rntheta_w", C_Rntheta_w_, "App. D (R_n theta bound)");
  push("K_largetheta", K_largetheta_, "App. D (R_n theta bound)");
  push("ell_star", double(ell_star_), "Sec. 4.2");
  push("A1(n0)", A1(n0), "Sec. 4.2");
  push("A2", A2_, "Sec. 4.2");
  push("A3", A3_, "App. C");
  push("A4(n0)", A4(n0), "App. C");
  push("A5(n0)", A5(n0), "App. C");
  push("A4C1", A4C1_, "App. C");
  push("A5C1", A5C1_, "App. C");
  push("A4_prime", A4_prime_, "App. C");
  push("A5_prime", A5_prime_, "App. C");
  push("A4C0", A4C0_, "App. C");
  push("A5C0", A5C0_, "App. C");
  push("K_A4A5_a", K_A4A5_a_, "App. C");
  push("K_A4A5_b", K_A4A5_b_, "App. C");
  push("K_proj_w", K_proj_w_, "App. C (projection burn-in)");
  push("K_proj_theta", K_proj_theta_, "App. C (projection burn-in)");
  push("N_thm4", N_thm4_, "Table 1");
  push("N_thm3", N_thm3_, "Table 1");
  push("N_thm2", N_thm2_, "Table 1");
  push("N_prime", N_prime_, "Table 1");
  push("N_final", N_final_, "Table 1");
  push("N_final_k", N_final_k_, "Table 1");
  push("C_final_theta", C_final_theta_, "Table 1");
  push("C_final_w", C_final_w_, "Table 1");
  push("report_n0", double(n0), "Sec. 4.2 (evaluation point for n0 entries)");
}

// ---- evaluators -------------------------------------------------------------

double ConstantsLedger::nu(std::uint64_t n, double gamma_exp) const {
  return ttsa::nu(n, gamma_exp, d_, cfg_.p, cfg_.delta);
}

double ConstantsLedger::eps_theta(std::uint64_t n) const {
  return (eps_coef_theta_ * DualScalar::of(nu(n, sched_.alpha))).v;
}

double ConstantsLedger::eps_w(std::uint64_t n) const {
  return (eps_coef_w_ * DualScalar::of(nu(n, sched_.beta))).v;
}

double ConstantsLedger::K_alpha(double z) const {
  const double gap = sched_.alpha - sched_.beta;
  if (!(z >= 0.0 && z <= 1.0 - gap + 1e-12))
    throw ValidationError("K_alpha: z must lie in [0, 1-(alpha-beta)]");
  const double a = std::ceil(std::pow(q1_ / (2.0 * (gap + z)), 1.0 / sched_.alpha));
  const double b = std::ceil(std::pow(4.0 * (gap + z) / q1_, 1.0 / (1.0 - sched_.alpha)));
  return std::max(a, b);
}

double ConstantsLedger::K_beta(double z) const {
  const double gap = sched_.alpha - sched_.beta;
  if (!(z >= 0.0 && z <= 1.0 - gap + 1e-12))
    throw ValidationError("K_beta: z must lie in [0, 1-(alpha-beta)]");
  const double a = std::ceil(std::pow(q2_ / (gap + z), 1.0 / sched_.beta));
  const double b = std::ceil(std::pow(4.0 * (gap + z) / q2_, 1.0 / (1.0 - sched_.beta)));
  return std::max(a, b);
}

AnBnPoint ConstantsLedger::an_bn(std::uint64_t n) const {
  if (n < 1) throw ValidationError("an_bn: defined for n >= 1");
  double a = 1.0, b = 1.0;  // a_1 = alpha_0^2, b_1 = beta_0^2
  for (std::uint64_t m = 1; m < n; ++m) {
    a = std::exp(-2.0 * q1_ * sched_.alpha_n(m)) * a + std::pow(sched_.alpha_n(m), 2.0);
    b = std::exp(-2.0 * q2_ * sched_.beta_n(m)) * b + std::pow(sched_.beta_n(m), 2.0);
  }
  AnBnPoint out;
  out.a_n = a;
  out.b_n = b;
  out.bound_theta = C_anbn_theta_ * std::pow(double(n), -sched_.alpha);
  out.bound_w = C_anbn_w_ * std::pow(double(n), -sched_.beta);
  return out;
}

std::vector<AnBnPoint> ConstantsLedger::an_bn_prefix(std::uint64_t n_max) const {
  if (n_max < 1) throw ValidationError("an_bn_prefix: need n_max >= 1");
  std::vector<AnBnPoint> out;
  out.reserve(n_max);
  double a = 1.0, b = 1.0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    AnBnPoint pt;
    pt.a_n = a;
    pt.b_n = b;
    pt.bound_theta = C_anbn_theta_ * std::pow(double(n), -sched_.alpha);
    pt.bound_w = C_anbn_w_ * std::pow(double(n), -sched_.beta);
    out.push_back(pt);
    const double an = sched_.alpha_n(n);
    const double bn = sched_.beta_n(n);
    a = std::exp(-2.0 * q1_ * an) * a + an * an;
    b = std::exp(-2.0 * q2_ * bn) * b + bn * bn;
  }
  return out;
}

double ConstantsLedger::C_Rc(std::uint64_t n0) const {
  return C_Rc(n0, dist_theta_, dist_w_);
}

double ConstantsLedger::C_Rc(std::uint64_t n0, double dist_th, double dist_w) const {
  const double b0 = sched_.beta_n(n0);
  const double ratio = sched_.alpha_n(n0) / b0;
  return b0 * dist_th +
         C_Ra_.v * std::exp(q1_) * (2.0 / qmin_) * (dist_th + ratio * dist_w);
}

double ConstantsLedger::A1(std::uint64_t n0) const {
  return A1(n0, dist_theta_, dist_w_);
}

double ConstantsLedger::A1(std::uint64_t n0, double dist_th, double dist_w) const {
  const double epsw = eps_w(n0);
  return kE +
         kE * (C_Dn_w_.v * norm_gamma2_ * C_Rc(n0, dist_th, dist_w) +
               C_Dn_w_.v * dist_w) / epsw +
         kE * kE * C_Dn_w_.v * norm_gamma2_ * C_Int_;
}

double ConstantsLedger::A4(std::uint64_t n0) const {
  return A4(n0, dist_theta_, dist_w_);
}

double ConstantsLedger::A4(std::uint64_t n0, double dist_th, double dist_w) const {
  return A1(n0, dist_th, dist_w) * sum_A2_pows(ell_star_) * eps_coef_w_.v +
         A3_ * std::pow(A2_.v, double(ell_star_));
}

double ConstantsLedger::A5(std::uint64_t n0) const {
  return A5(n0, dist_theta_, dist_w_);
}

double ConstantsLedger::A5(std::uint64_t n0, double dist_th, double dist_w) const {
  if (n0 < 1) throw ValidationError("A5: defined for n0 >= 1");
  const double eps_prev = eps_theta(n0 - 1);
  const double lead =
      2.0 * (C_Ra_.v * (3.0 * r_theta_ + crw_.v * r_w_) / eps_prev + 1.0) *
      std::sqrt(4.0 * double(d_) * double(d_) * double(d_) * L_theta_.v *
                C_anbn_theta_);
  return lead + 2.0 * C_Rb_.v * A4(n0, dist_th, dist_w);
}

double ConstantsLedger::sum_A2_pows(int ell) const {
  double s = 0.0;
  for (int i = 0; i < ell; ++i) s += std::pow(A2_.v, double(i));
  return s;
}

double ConstantsLedger::u_ladder(std::uint64_t n, int ell, std::uint64_t n0) const {
  if (ell < 0 || ell > ell_star_)
    throw ValidationError("u_ladder: need 0 <= ell <= ell_star");
  const double ratio_pow =
      std::pow(double(n) + 1.0, -double(ell) * (sched_.alpha - sched_.beta));
  return A1(n0) * sum_A2_pows(ell) * eps_w(n) +
         A3_ * std::pow(A2_.v, double(ell)) * ratio_pow;
}

// ---- report plumbing ---------------------------------------------------------

void ConstantsLedger::push(const std::string& name, double v,
                           const std::string& src, bool reconstructed) {
  LedgerEntry e;
  e.name = name;
  e.value = v;
  e.log_space = false;
  e.paper_source = src;
  e.reconstructed = reconstructed;
  entries_.push_back(std::move(e));
}

void ConstantsLedger::push(const std::string& name, const DualScalar& v,
                           const std::string& src, bool reconstructed) {
  LedgerEntry e;
  e.name = name;
  e.paper_source = src;
  e.reconstructed = reconstructed;
  if (v.fits_double() && std::isfinite(v.v)) {
    e.value = v.v;
    e.log_space = false;
  } else {
    e.log10_value = v.ln / kLn10;
    e.log_space = true;
  }
  entries_.push_back(std::move(e));
}

bool ConstantsLedger::has(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

const LedgerEntry& ConstantsLedger::entry(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw ValidationError("no ledger entry named " + name);
}

double ConstantsLedger::value(const std::string& name) const {
  const LedgerEntry& e = entry(name);
  if (e.log_space)
    throw NumericalError("ledger entry " + name + " does not fit a double; use log10_value");
  return e.value;
}

nlohmann::json ConstantsLedger::to_json() const {
  nlohmann::json j;
  j["config"] = {
      {"delta", cfg_.delta},       {"p", cfg_.p},
      {"alpha", sched_.alpha},     {"beta", sched_.beta},
      {"m1", cfg_.m1},             {"m2", cfg_.m2},
      {"d", d_},                   {"r_theta", r_theta_},
      {"r_w", r_w_},               {"dist_theta", dist_theta_},
      {"dist_w", dist_w_},         {"report_n0", cfg_.report_n0},
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries_) {
    nlohmann::json je;
    je["name"] = e.name;
    if (e.log_space) {
      je["log10_value"] = e.log10_value;
      je["log_space"] = true;
    } else {
      je["value"] = e.value;
    }
    je["paper_source"] = e.paper_source;
    je["reconstructed"] = e.reconstructed;
    arr.push_back(std::move(je));
  }
  j["entries"] = std::move(arr);
  return j;
}

ConstantsLedger build_ledger(const DerivedSystem& sys, const LedgerConfig& cfg) {
  return ConstantsLedger(sys, cfg);
}

EpsilonSequences epsilon_sequences(const DerivedSystem& sys, const LedgerConfig& cfg) {
  return EpsilonSequences{std::make_shared<const ConstantsLedger>(sys, cfg)};
}

}  // namespace ttsa
