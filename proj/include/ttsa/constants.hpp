#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ttsa/sa_core.hpp"
#include "ttsa/schedule.hpp"

#include "json.hpp"

namespace ttsa {

// Non-negative scalar carried in both plain and natural-log form. The
// projection burn-in thresholds are double exponentials that overflow
// double; tracking ln(value) alongside keeps them honest while everything
// that fits stays an ordinary double computed with ordinary arithmetic.
struct DualScalar {
  double v = 0.0;
  double ln = -std::numeric_limits<double>::infinity();

  static DualScalar of(double x);
  static DualScalar from_ln(double l);

  bool fits_double() const { return ln < 709.0; }
  double log10() const { return ln / 2.30258509299404568402; }

  friend DualScalar operator*(const DualScalar& a, const DualScalar& b);
  friend DualScalar operator/(const DualScalar& a, const DualScalar& b);
  friend DualScalar operator+(const DualScalar& a, const DualScalar& b);
  DualScalar pow(double e) const;
  static DualScalar max(const DualScalar& a, const DualScalar& b);
};

struct LedgerConfig {
  double delta = 0.05;
  double p = 2.0;
  StepSchedule schedule{};
  double m1 = 1.0;
  double m2 = 1.0;
  int d = 0;             // 0 means take the system's dimension
  double r_theta = 0.0;  // <= 0 means default 10 (1 + ||theta*|| + ||w*||)
  double r_w = 0.0;

  // distances ||theta_{n0} - theta*||, ||w_{n0} - w*|| used by the
  // n0-parameterized entries; negative means the conservative (r_theta, r_w)
  double dist_theta = -1.0;
  double dist_w = -1.0;

  std::uint64_t report_n0 = 1;  // n0 at which the JSON report evaluates them
  std::uint64_t scan_cap = 100000000ULL;
};

struct LedgerEntry {
  std::string name;
  double value = std::numeric_limits<double>::quiet_NaN();
  double log10_value = std::numeric_limits<double>::quiet_NaN();
  bool log_space = false;
  std::string paper_source;
  bool reconstructed = false;
};

struct QValues {
  double q1 = 0.0, q2 = 0.0, q_min = 0.0;
};

// q1 = lambda_min(X1 + X1^T)/4, q2 = lambda_min(W2 + W2^T)/4.
QValues q_values(const DerivedSystem& sys);

// nu(n; gamma) = (n+1)^{-gamma/2} sqrt(ln(4 d^2 (n+1)^p / delta)).
double nu(std::uint64_t n, double gamma_exp, int d, double p, double delta);
double nu(std::uint64_t n, double gamma_exp, const LedgerConfig& cfg);

struct AnBnPoint {
  double a_n = 0.0, b_n = 0.0;
  double bound_theta = 0.0, bound_w = 0.0;  // C_anbn * n^{-alpha} / n^{-beta}
};

enum class ModerateKind { Alpha, Beta };

// u[i] holds the sequence value at index k0 + i.
bool moderateness_check(const std::vector<double>& u, ModerateKind kind,
                        std::uint64_t k0, const DerivedSystem& sys,
                        const StepSchedule& sched);

int ell_star(const StepSchedule& sched);

class ConstantsLedger {
 public:
  ConstantsLedger(const DerivedSystem& sys, const LedgerConfig& cfg);

  const LedgerConfig& config() const { return cfg_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  bool has(const std::string& name) const;
  const LedgerEntry& entry(const std::string& name) const;
  double value(const std::string& name) const;  // throws for log-space entries

  double q1() const { return q1_; }
  double q2() const { return q2_; }
  double q_min() const { return qmin_; }
  double r_theta() const { return r_theta_; }
  double r_w() const { return r_w_; }
  double C_R_theta() const { return 3.0; }
  double C_R_w() const { return crw_.v; }
  double L_theta() const { return L_theta_.v; }
  double L_w() const { return L_w_.v; }
  double A2() const { return A2_.v; }
  double A3() const { return A3_; }
  int ell_star() const { return ell_star_; }

  double nu(std::uint64_t n, double gamma_exp) const;
  double eps_theta(std::uint64_t n) const;
  double eps_w(std::uint64_t n) const;

  // z in [0, 1 - (alpha - beta)].
  double K_alpha(double z) const;
  double K_beta(double z) const;

  AnBnPoint an_bn(std::uint64_t n) const;                       // n >= 1
  std::vector<AnBnPoint> an_bn_prefix(std::uint64_t n_max) const;  // n = 1..n_max

  // n0-parameterized constants; the two-argument overloads take
  // (||theta_{n0} - theta*||, ||w_{n0} - w*||) explicitly.
  double C_Rc(std::uint64_t n0) const;
  double C_Rc(std::uint64_t n0, double dist_th, double dist_w) const;
  double A1(std::uint64_t n0) const;
  double A1(std::uint64_t n0, double dist_th, double dist_w) const;
  double A4(std::uint64_t n0) const;
  double A4(std::uint64_t n0, double dist_th, double dist_w) const;
  double A5(std::uint64_t n0) const;  // n0 >= 1
  double A5(std::uint64_t n0, double dist_th, double dist_w) const;

  // u_n(ell) = [A1(n0) sum_{i<ell} A2^i] eps_w(n) + [A3 A2^ell](alpha_n/beta_n)^ell.
  double u_ladder(std::uint64_t n, int ell, std::uint64_t n0) const;

  nlohmann::json to_json() const;

 private:
  void push(const std::string& name, double v, const std::string& src,
            bool reconstructed = false);
  void push(const std::string& name, const DualScalar& v, const std::string& src,
            bool reconstructed = false);
  double sum_A2_pows(int ell) const;  // sum_{i=0}^{ell-1} A2^i

  LedgerConfig cfg_;
  StepSchedule sched_;
  int d_ = 0;
  double q1_ = 0, q2_ = 0, qmin_ = 0;
  double r_theta_ = 0, r_w_ = 0;
  double dist_theta_ = 0, dist_w_ = 0;
  double norm_x1_ = 0, norm_w2_ = 0, norm_gamma2_ = 0, norm_w1_ = 0;
  double norm_w2inv_ = 0, norm_w1w2inv_ = 0;
  double theta_star_norm_ = 0, w_star_norm_ = 0;
  std::uint64_t K_anbn_theta_ = 0, K_anbn_w_ = 0;
  double C_anbn_theta_ = 0, C_anbn_w_ = 0;
  std::uint64_t K_smalleig_alpha_ = 0, K_smalleig_beta_ = 0;
  std::uint64_t K_Dn1_ = 0, K_Dn2_ = 0;
  double mu1_ = 0, mu2_ = 0;
  DualScalar C_Dn_theta_, C_Dn_w_;
  DualScalar crw_;  // C_R^w
  DualScalar L_theta_, L_w_;
  DualScalar eps_coef_theta_, eps_coef_w_;  // sqrt(d^3 L C_anbn)
  double C_T_ = 0, C_Int_ = 0;
  double K_Int_a_ = 0, K_Int_b_ = 0;
  DualScalar K_epsdom_a_;
  double K_epsdom_b_ = 0;
  DualScalar K_consteps_alpha_, K_consteps_beta_;
  DualScalar C_Ra_, C_Rb_;
  DualScalar C_Rntheta_theta_, C_Rntheta_w_, K_largetheta_;
  int ell_star_ = 0;
  DualScalar A2_;
  double A3_ = 0;
  DualScalar A1pp_;  // C_Dn_w ||Gamma2|| C_Int
  DualScalar A4C0_, A5C0_, A4C1_, A5C1_, A4_prime_, A5_prime_;
  DualScalar K_A4A5_a_, K_A4A5_b_;
  DualScalar K_proj_w_, K_proj_theta_;
  DualScalar N_thm3_, N_thm4_, N_thm2_, N_prime_, N_final_;
  double N_final_k_ = 0;
  DualScalar C_final_theta_, C_final_w_;

  std::vector<LedgerEntry> entries_;
};

ConstantsLedger build_ledger(const DerivedSystem& sys, const LedgerConfig& cfg);

struct EpsilonSequences {
  std::shared_ptr<const ConstantsLedger> ledger;
  double theta(std::uint64_t n) const { return ledger->eps_theta(n); }
  double w(std::uint64_t n) const { return ledger->eps_w(n); }
};

EpsilonSequences epsilon_sequences(const DerivedSystem& sys, const LedgerConfig& cfg);

}  // namespace ttsa
