#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ttsa/sa_core.hpp"

#include "json.hpp"

namespace ttsa {

// Markov chain under a fixed policy: transitions P, per-state rewards r,
// discount gamma, features Phi (row s is phi(s)^T).
struct MdpSpec {
  Matrix transitions;  // S x S, row-stochastic
  Vector rewards;      // entries in [-1, 1]
  double gamma = 0.9;  // in [0, 1)
  Matrix features;     // S x d, rows of norm <= 1, full column rank

  int num_states() const { return static_cast<int>(transitions.rows()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
  void validate() const;
};

nlohmann::json mdp_to_json(const MdpSpec& mdp);
MdpSpec mdp_from_json(const nlohmann::json& j);

// Unique stationary distribution of a primitive chain. Primitivity is
// established by checking strict positivity of P^m for m past the Wielandt
// bound (repeated squaring); reducible or periodic chains throw NotErgodic.
Vector stationary_distribution(const Matrix& P);

// A = E[phi (phi - gamma phi')^T], C = E[phi phi^T], b = E[r phi], all under
// the stationary distribution with s' ~ P(s, .).
std::tuple<Matrix, Matrix, Vector> expected_matrices(const MdpSpec& mdp);

enum class GtdVariant { Gtd0, Gtd2, Tdc };

const char* variant_name(GtdVariant v);
GtdVariant variant_from_name(const std::string& s);

struct GtdInstance {
  GtdVariant variant = GtdVariant::Gtd0;
  MdpSpec mdp;
  Matrix A, C;
  Vector b;
  MatrixSpec spec;            // the two-timescale embedding
  double m1 = 0.0, m2 = 0.0;  // noise bound parameters
};

GtdInstance build_gtd(GtdVariant variant, const MdpSpec& mdp);

// i.i.d.-sampling noise: at step n the model draws s ~ pi and s' ~ P(s, .)
// from the counter RNG and returns M_i = (sampled update) - h_i(theta, w),
// which has conditional mean zero by construction.
class GtdNoise final : public NoiseModel {
 public:
  explicit GtdNoise(const GtdInstance& inst);

  void sample(std::uint64_t seed, std::uint64_t n, const Vector& theta,
              const Vector& w, Vector& m1, Vector& m2) const override;

  // The (s, s') pair used at (seed, n); lets callers rebuild the sampled
  // update independently of this class.
  std::pair<int, int> draw_states(std::uint64_t seed, std::uint64_t n) const;

 private:
  GtdVariant variant_;
  double gamma_;
  Matrix features_;
  Vector rewards_;
  MatrixSpec spec_;
  int S_ = 0;
  std::vector<double> pi_cdf_;
  std::vector<double> p_cdf_;  // row-major S x S
};

NoiseRecord sample_noise(const GtdInstance& inst, const Vector& theta,
                         const Vector& w, std::uint64_t seed, std::uint64_t n);

// Seeded generator: transition rows are a 0.01 floor plus a scaled flat
// Dirichlet draw, rewards are uniform on [-1, 1], feature rows are random
// unit vectors. With ensure_assumptions the draw is retried until A is
// invertible and C is well conditioned, so all three variants pass the
// positive-definiteness assumptions.
MdpSpec random_mdp(int S, int d, std::uint64_t seed, bool ensure_assumptions);

// One-step TD error. Diagnostic only; no update rule here consumes it.
double td_error(double reward, double gamma, const Vector& phi_s,
                const Vector& phi_sp, const Vector& theta);

}  // namespace ttsa
