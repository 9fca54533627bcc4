#include "ttsa/gtd.hpp"

#include <algorithm>
#include <cmath>

#include "ttsa/rng.hpp"

namespace ttsa {

namespace {
constexpr std::uint64_t kGtdStream = 0x4754445f53414d50ULL;
constexpr std::uint64_t kMdpStream = 0x4d44505f47454e31ULL;

int draw_from_cdf(const double* cdf, int n, double u) {
  int i = 0;
  while (i + 1 < n && u >= cdf[i]) ++i;
  return i;
}
}  // namespace

// ---- MdpSpec ----------------------------------------------------------------

void MdpSpec::validate() const {
  const int S = num_states();
  const int d = feature_dim();
  if (S < 1) throw ValidationError("MdpSpec: need at least one state");
  if (d < 1) throw ValidationError("MdpSpec: need at least one feature");
  if (transitions.cols() != S)
    throw ValidationError("MdpSpec: transition matrix must be square");
  if (rewards.size() != S) throw ValidationError("MdpSpec: rewards size mismatch");
  if (features.rows() != S) throw ValidationError("MdpSpec: feature rows mismatch");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ValidationError("MdpSpec: gamma must lie in [0, 1)");
  if (!transitions.allFinite() || !rewards.allFinite() || !features.allFinite())
    throw ValidationError("MdpSpec: non-finite entries");
  for (int s = 0; s < S; ++s) {
    if (transitions.row(s).minCoeff() < -1e-12)
      throw ValidationError("MdpSpec: negative transition probability");
    if (std::abs(transitions.row(s).sum() - 1.0) > 1e-9)
      throw ValidationError("MdpSpec: transition row does not sum to 1");
    if (std::abs(rewards(s)) > 1.0 + 1e-12)
      throw ValidationError("MdpSpec: rewards must lie in [-1, 1]");
    if (features.row(s).norm() > 1.0 + 1e-9)
      throw ValidationError("MdpSpec: feature rows must have norm <= 1");
  }
}

nlohmann::json mdp_to_json(const MdpSpec& mdp) {
  nlohmann::json j;
  j["num_states"] = mdp.num_states();
  j["feature_dim"] = mdp.feature_dim();
  j["gamma"] = mdp.gamma;
  auto rows = [](const Matrix& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      arr.push_back(std::move(row));
    }
    return arr;
  };
  j["transitions"] = rows(mdp.transitions);
  j["features"] = rows(mdp.features);
  nlohmann::json rw = nlohmann::json::array();
  for (Eigen::Index s = 0; s < mdp.rewards.size(); ++s) rw.push_back(mdp.rewards(s));
  j["rewards"] = std::move(rw);
  return j;
}

MdpSpec mdp_from_json(const nlohmann::json& j) {
  try {
    const int S = j.at("num_states").get<int>();
    const int d = j.at("feature_dim").get<int>();
    if (S < 1 || d < 1) throw ConfigError("mdp json: bad dimensions");
    MdpSpec mdp;
    mdp.gamma = j.at("gamma").get<double>();
    auto mat = [](const nlohmann::json& arr, int rows, int cols, const char* name) {
      if (!arr.is_array() || int(arr.size()) != rows)
        throw ConfigError(std::string("mdp json: bad row count in ") + name);
      Matrix m(rows, cols);
      for (int r = 0; r < rows; ++r) {
        if (!arr[r].is_array() || int(arr[r].size()) != cols)
          throw ConfigError(std::string("mdp json: bad column count in ") + name);
        for (int c = 0; c < cols; ++c) m(r, c) = arr[r][c].get<double>();
      }
      return m;
    };
    mdp.transitions = mat(j.at("transitions"), S, S, "transitions");
    mdp.features = mat(j.at("features"), S, d, "features");
    const auto& rw = j.at("rewards");
    if (!rw.is_array() || int(rw.size()) != S)
      throw ConfigError("mdp json: bad rewards size");
    mdp.rewards.resize(S);
    for (int s = 0; s < S; ++s) mdp.rewards(s) = rw[s].get<double>();
    mdp.validate();
    return mdp;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mdp json: ") + e.what());
  }
}

// ---- stationary distribution --------------------------------------------------

Vector stationary_distribution(const Matrix& P) {
  const int S = static_cast<int>(P.rows());
  if (S < 1 || P.cols() != S)
    throw ValidationError("stationary_distribution: P must be square");
  for (int s = 0; s < S; ++s) {
    if (P.row(s).minCoeff() < -1e-12 || std::abs(P.row(s).sum() - 1.0) > 1e-9)
      throw ValidationError("stationary_distribution: P is not row-stochastic");
  }
  if (S == 1) {
    Vector pi(1);
    pi(0) = 1.0;
    return pi;
  }

  // Primitivity: P^m must be strictly positive for m past the Wielandt
  // bound (S-1)^2 + 1. Structural zeros survive squaring, so reducible or
  // periodic chains are caught exactly.
  {
    const double bound = double(S - 1) * double(S - 1) + 1.0;
    Matrix Q = P;
    double expo = 1.0;
    while (expo < bound) {
      Q = Q * Q;
      expo *= 2.0;
      // keep rows normalized against drift
      for (int s = 0; s < S; ++s) Q.row(s) /= Q.row(s).sum();
    }
    if (Q.minCoeff() <= 0.0)
      throw NotErgodic("chain is reducible or periodic: P^m has zero entries");
  }

  // Balance equations (P^T - I) pi = 0 with the normalization sum(pi) = 1
  // replacing one row.
  Matrix M = P.transpose() - Matrix::Identity(S, S);
  M.row(S - 1).setOnes();
  Vector rhs = Vector::Zero(S);
  rhs(S - 1) = 1.0;
  Vector pi = solve(M, rhs, "stationary system");

  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  for (int it = 0; it < 100; ++it) {
    Vector next = P.transpose() * pi;
    next /= next.sum();
    const double gap_size = (next - pi).lpNorm<Eigen::Infinity>();
    pi = next;
    if (gap_size < 1e-15) break;
  }
  return pi;
}

// ---- expected matrices ---------------------------------------------------------

std::tuple<Matrix, Matrix, Vector> expected_matrices(const MdpSpec& mdp) {
  mdp.validate();
  const Vector pi = stationary_distribution(mdp.transitions);

  {
    Eigen::JacobiSVD<Matrix> svd(mdp.features);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0))
      throw RankDeficient("feature matrix does not have full column rank");
  }

  const Matrix D = pi.asDiagonal();
  const Matrix expected_next = mdp.transitions * mdp.features;  // row s: E[phi' | s]
  Matrix A = mdp.features.transpose() * D *
             (mdp.features - mdp.gamma * expected_next);
  Matrix C = mdp.features.transpose() * D * mdp.features;
  Vector b = mdp.features.transpose() * (pi.cwiseProduct(mdp.rewards));
  return {A, C, b};
}

// ---- variants -----------------------------------------------------------------

const char* variant_name(GtdVariant v) {
  switch (v) {
    case GtdVariant::Gtd0: return "gtd0";
    case GtdVariant::Gtd2: return "gtd2";
    case GtdVariant::Tdc: return "tdc";
  }
  return "?";
}

GtdVariant variant_from_name(const std::string& s) {
  if (s == "gtd0") return GtdVariant::Gtd0;
  if (s == "gtd2") return GtdVariant::Gtd2;
  if (s == "tdc") return GtdVariant::Tdc;
  throw ConfigError("unknown variant '" + s + "' (expected gtd0, gtd2, or tdc)");
}

GtdInstance build_gtd(GtdVariant variant, const MdpSpec& mdp) {
  GtdInstance inst;
  inst.variant = variant;
  inst.mdp = mdp;
  std::tie(inst.A, inst.C, inst.b) = expected_matrices(mdp);
  const int d = mdp.feature_dim();

  const double na = spectral_norm(inst.A);
  const double nc = spectral_norm(inst.C);
  const double nb = inst.b.norm();

  MatrixSpec& s = inst.spec;
  switch (variant) {
    case GtdVariant::Gtd0:
      s.gamma1 = Matrix::Zero(d, d);
      s.w1 = -inst.A.transpose();
      s.v1 = Vector::Zero(d);
      s.gamma2 = inst.A;
      s.w2 = Matrix::Identity(d, d);
      s.v2 = inst.b;
      inst.m1 = 1.0 + mdp.gamma + na;
      inst.m2 = 1.0 + std::max(nb, mdp.gamma + na);
      break;
    case GtdVariant::Gtd2:
      s.gamma1 = Matrix::Zero(d, d);
      s.w1 = -inst.A.transpose();
      s.v1 = Vector::Zero(d);
      s.gamma2 = inst.A;
      s.w2 = inst.C;
      s.v2 = inst.b;
      inst.m1 = 1.0 + mdp.gamma + na;
      inst.m2 = 1.0 + std::max({nb, mdp.gamma + na, nc});
      break;
    case GtdVariant::Tdc:
      s.gamma1 = inst.A;
      s.w1 = inst.C - inst.A.transpose();
      s.v1 = inst.b;
      s.gamma2 = inst.A;
      s.w2 = inst.C;
      s.v2 = inst.b;
      inst.m1 = 2.0 + mdp.gamma + na + nc;
      inst.m2 = inst.m1;
      break;
  }
  return inst;
}

// ---- sampling noise -------------------------------------------------------------

GtdNoise::GtdNoise(const GtdInstance& inst)
    : variant_(inst.variant),
      gamma_(inst.mdp.gamma),
      features_(inst.mdp.features),
      rewards_(inst.mdp.rewards),
      spec_(inst.spec),
      S_(inst.mdp.num_states()) {
  const Vector pi = stationary_distribution(inst.mdp.transitions);
  pi_cdf_.resize(S_);
  double acc = 0.0;
  for (int s = 0; s < S_; ++s) {
    acc += pi(s);
    pi_cdf_[s] = acc;
  }
  pi_cdf_[S_ - 1] = 1.0;
  p_cdf_.resize(std::size_t(S_) * S_);
  for (int s = 0; s < S_; ++s) {
    acc = 0.0;
    for (int t = 0; t < S_; ++t) {
      acc += inst.mdp.transitions(s, t);
      p_cdf_[std::size_t(s) * S_ + t] = acc;
    }
    p_cdf_[std::size_t(s) * S_ + S_ - 1] = 1.0;
  }
}

std::pair<int, int> GtdNoise::draw_states(std::uint64_t seed, std::uint64_t n) const {
  StepRng rng(seed, kGtdStream, n);
  const int s = draw_from_cdf(pi_cdf_.data(), S_, rng.next_unit());
  const int sp = draw_from_cdf(p_cdf_.data() + std::size_t(s) * S_, S_, rng.next_unit());
  return {s, sp};
}

void GtdNoise::sample(std::uint64_t seed, std::uint64_t n, const Vector& theta,
                      const Vector& w, Vector& m1, Vector& m2) const {
  const auto [s, sp] = draw_states(seed, n);
  const auto phi = features_.row(s).transpose();
  const auto phip = features_.row(sp).transpose();

  const double c = phi.dot(w);
  const double delta = rewards_(s) + gamma_ * phip.dot(theta) - phi.dot(theta);

  switch (variant_) {
    case GtdVariant::Gtd0:
    case GtdVariant::Gtd2:
      m1 = (phi - gamma_ * phip) * c;
      break;
    case GtdVariant::Tdc:
      m1 = delta * phi - (gamma_ * c) * phip;
      break;
  }
  if (variant_ == GtdVariant::Gtd0)
    m2 = delta * phi - w;
  else
    m2 = (delta - c) * phi;

  // M_i = sampled update - h_i, with h_i built from the same embedding
  // matrices the stepper uses.
  m1 -= spec_.v1;
  m1.noalias() += spec_.gamma1 * theta;
  m1.noalias() += spec_.w1 * w;
  m2 -= spec_.v2;
  m2.noalias() += spec_.gamma2 * theta;
  m2.noalias() += spec_.w2 * w;
}

NoiseRecord sample_noise(const GtdInstance& inst, const Vector& theta,
                         const Vector& w, std::uint64_t seed, std::uint64_t n) {
  GtdNoise model(inst);
  NoiseRecord rec;
  rec.m1.resize(inst.mdp.feature_dim());
  rec.m2.resize(inst.mdp.feature_dim());
  model.sample(seed, n, theta, w, rec.m1, rec.m2);
  return rec;
}

// ---- generation -----------------------------------------------------------------

MdpSpec random_mdp(int S, int d, std::uint64_t seed, bool ensure_assumptions) {
  if (S < 1 || d < 1 || d > S)
    throw ValidationError("random_mdp: need 1 <= d <= S");
  if (1.0 - 0.01 * S <= 0.0)
    throw ValidationError("random_mdp: state count too large for the 0.01 transition floor");

  for (int attempt = 0; attempt < 100; ++attempt) {
    StepRng rng(seed, kMdpStream, std::uint64_t(attempt));
    MdpSpec mdp;
    mdp.gamma = 0.9;

    mdp.transitions.resize(S, S);
    for (int s = 0; s < S; ++s) {
      double total = 0.0;
      for (int t = 0; t < S; ++t) {
        const double e = -std::log(std::max(rng.next_unit(), 1e-300));
        mdp.transitions(s, t) = e;
        total += e;
      }
      for (int t = 0; t < S; ++t)
        mdp.transitions(s, t) = 0.01 + (1.0 - 0.01 * S) * mdp.transitions(s, t) / total;
    }

    mdp.rewards.resize(S);
    for (int s = 0; s < S; ++s) mdp.rewards(s) = 2.0 * rng.next_unit() - 1.0;

    mdp.features.resize(S, d);
    for (int s = 0; s < S; ++s) {
      double norm2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double g = rng.next_gaussian();
        mdp.features(s, k) = g;
        norm2 += g * g;
      }
      const double nrm = std::sqrt(norm2);
      if (nrm > 0.0) mdp.features.row(s) /= nrm;
    }

    {
      Eigen::JacobiSVD<Matrix> svd(mdp.features);
      const auto& sv = svd.singularValues();
      if (sv(sv.size() - 1) <= 1e-8 * sv(0)) continue;
    }
    if (!ensure_assumptions) return mdp;

    try {
      auto [A, C, b] = expected_matrices(mdp);
      (void)b;
      Eigen::JacobiSVD<Matrix> svd(A);
      const auto& sv = svd.singularValues();
      if (sv(sv.size() - 1) <= 1e-6) continue;
      if (lambda_min_sym(C) <= 2e-4) continue;  // lambda_min(C) > 1e-4
      return mdp;
    } catch (const NumericalError&) {
      continue;
    }
  }
  throw GenerationFailed("random_mdp: no draw satisfied the assumptions in 100 attempts");
}

double td_error(double reward, double gamma, const Vector& phi_s,
                const Vector& phi_sp, const Vector& theta) {
  return reward + gamma * phi_sp.dot(theta) - phi_s.dot(theta);
}

}  // namespace ttsa
