#include "ttsa/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace ttsa {

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    arr.push_back(std::move(row));
  }
  return arr;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw ConfigError("config field '" + field + "': expected a non-empty 2-d array");
  const int rows = static_cast<int>(j.size());
  if (!j[0].is_array() || j[0].empty())
    throw ConfigError("config field '" + field + "': expected a non-empty 2-d array");
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw ConfigError("config field '" + field + "': ragged rows");
    for (int c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw ConfigError("config field '" + field + "': non-numeric entry");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw ConfigError("config field '" + field + "': expected a non-empty array");
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ConfigError("config field '" + field + "': non-numeric entry");
    v(static_cast<int>(i)) = j[i].get<double>();
  }
  return v;
}

double num_field(const nlohmann::json& j, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number())
    throw ConfigError(std::string("config field '") + key + "': expected a number");
  return j[key].get<double>();
}

std::uint64_t uint_field(const nlohmann::json& j, const char* key,
                         std::uint64_t dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number_unsigned() && !j[key].is_number_integer())
    throw ConfigError(std::string("config field '") + key +
                      "': expected a nonnegative integer");
  const auto v = j[key].get<std::int64_t>();
  if (v < 0)
    throw ConfigError(std::string("config field '") + key +
                      "': expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

std::string str_field(const nlohmann::json& j, const char* key,
                      const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_string())
    throw ConfigError(std::string("config field '") + key + "': expected a string");
  return j[key].get<std::string>();
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(std::string("unknown config field '") + it.key() +
                        "' in " + where);
  }
}

bool mat_eq(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a.data()[i] != b.data()[i]) return false;
  return true;
}

bool vec_eq(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return false;
  return true;
}

const char* noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::Zero: return "zero";
    case NoiseKind::Sphere: return "sphere";
    case NoiseKind::Gtd: return "gtd";
  }
  return "?";
}

NoiseKind noise_from_name(const std::string& s) {
  if (s == "zero") return NoiseKind::Zero;
  if (s == "sphere") return NoiseKind::Sphere;
  if (s == "gtd") return NoiseKind::Gtd;
  throw ConfigError("config field 'noise.kind': unknown kind '" + s + "'");
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Run: return "run";
    case Mode::Constants: return "constants";
    case Mode::Rates: return "rates";
    case Mode::LowerBound: return "lower-bound";
    case Mode::Decompose: return "decompose";
    case Mode::MdpGen: return "mdp-gen";
  }
  return "?";
}

Mode mode_from_name(const std::string& s) {
  if (s == "run") return Mode::Run;
  if (s == "constants") return Mode::Constants;
  if (s == "rates") return Mode::Rates;
  if (s == "lower-bound") return Mode::LowerBound;
  if (s == "decompose") return Mode::Decompose;
  if (s == "mdp-gen") return Mode::MdpGen;
  throw ConfigError("config field 'mode': unknown mode '" + s + "'");
}

nlohmann::json matrix_spec_to_json(const MatrixSpec& spec) {
  nlohmann::json j;
  j["gamma1"] = matrix_to_json(spec.gamma1);
  j["w1"] = matrix_to_json(spec.w1);
  j["gamma2"] = matrix_to_json(spec.gamma2);
  j["w2"] = matrix_to_json(spec.w2);
  j["v1"] = vector_to_json(spec.v1);
  j["v2"] = vector_to_json(spec.v2);
  return j;
}

MatrixSpec matrix_spec_from_json(const nlohmann::json& j) {
  check_keys(j, {"gamma1", "w1", "gamma2", "w2", "v1", "v2"}, "system.matrix");
  for (const char* k : {"gamma1", "w1", "gamma2", "w2", "v1", "v2"})
    if (!j.contains(k))
      throw ConfigError(std::string("config field 'system.matrix.") + k +
                        "': missing");
  MatrixSpec spec;
  spec.gamma1 = matrix_from_json(j["gamma1"], "system.matrix.gamma1");
  spec.w1 = matrix_from_json(j["w1"], "system.matrix.w1");
  spec.gamma2 = matrix_from_json(j["gamma2"], "system.matrix.gamma2");
  spec.w2 = matrix_from_json(j["w2"], "system.matrix.w2");
  spec.v1 = vector_from_json(j["v1"], "system.matrix.v1");
  spec.v2 = vector_from_json(j["v2"], "system.matrix.v2");
  spec.validate();
  return spec;
}

void ExperimentConfig::validate() const {
  if (system_source_count() > 1)
    throw ConfigError("config field 'system': give exactly one system source");
  const bool needs_system = mode == Mode::Run || mode == Mode::Rates ||
                            mode == Mode::Decompose || mode == Mode::LowerBound;
  if (needs_system && system_source_count() == 0)
    throw ConfigError(std::string("config field 'system': mode '") +
                      mode_name(mode) + "' needs a system source");
  if (mode == Mode::LowerBound && has_matrix)
    throw ConfigError(
        "config field 'system': lower-bound needs a gtd or random_mdp source");
  if (has_gtd && mdp_file.empty() == !has_inline_mdp)
    throw ConfigError(
        "config field 'system.gtd': give exactly one of mdp_file and mdp");
  if (has_random_mdp &&
      (mdp_states < 1 || mdp_features < 1 || mdp_features > mdp_states))
    throw ConfigError(
        "config field 'system.random_mdp': need 1 <= feature_dim <= num_states");

  schedule.validate();
  projection.validate();

  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("config field 'ledger.delta': must lie in (0, 1)");
  if (!(p > 1.0)) throw ConfigError("config field 'ledger.p': must exceed 1");
  if (!(m1 >= 0.0) || !(m2 >= 0.0))
    throw ConfigError("config field 'ledger.m1/m2': must be nonnegative");
  if (report_n0 < 1)
    throw ConfigError("config field 'ledger.report_n0': must be at least 1");

  if (horizon < 1) throw ConfigError("config field 'horizon': must be at least 1");
  if (checkpoint_list.empty() && checkpoint_count < 2)
    throw ConfigError("config field 'checkpoints.log_uniform': need at least 2");
  for (std::size_t i = 0; i < checkpoint_list.size(); ++i) {
    if (checkpoint_list[i] > horizon)
      throw ConfigError("config field 'checkpoints.list': beyond the horizon");
    if (i > 0 && checkpoint_list[i] <= checkpoint_list[i - 1])
      throw ConfigError("config field 'checkpoints.list': must be strictly increasing");
  }
  if (seed_count < 1)
    throw ConfigError("config field 'seeds.count': must be at least 1");
  if (!(noise_c >= 0.0))
    throw ConfigError("config field 'noise.c': must be nonnegative");
  if (window_lo != 0 || window_hi != 0) {
    if (window_lo >= window_hi)
      throw ConfigError("config field 'window': needs lo < hi");
  }
  if (!(c >= 0.0)) throw ConfigError("config field 'c': must be nonnegative");
  if (mode == Mode::Decompose && n0 >= horizon)
    throw ConfigError("config field 'n0': must lie before the horizon");
  if (out_dir.empty()) throw ConfigError("config field 'out': must not be empty");
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["mode"] = mode_name(cfg.mode);

  if (cfg.has_matrix) {
    j["system"]["matrix"] = matrix_spec_to_json(cfg.matrix);
  } else if (cfg.has_gtd) {
    nlohmann::json g;
    g["variant"] = variant_name(cfg.variant);
    if (!cfg.mdp_file.empty()) g["mdp_file"] = cfg.mdp_file;
    if (cfg.has_inline_mdp) g["mdp"] = mdp_to_json(cfg.inline_mdp);
    j["system"]["gtd"] = std::move(g);
  } else if (cfg.has_random_mdp) {
    nlohmann::json r;
    r["num_states"] = cfg.mdp_states;
    r["feature_dim"] = cfg.mdp_features;
    r["seed"] = cfg.mdp_seed;
    r["variant"] = variant_name(cfg.variant);
    j["system"]["random_mdp"] = std::move(r);
  }

  j["schedule"]["alpha"] = cfg.schedule.alpha;
  j["schedule"]["beta"] = cfg.schedule.beta;

  j["projection"]["enabled"] = cfg.projection.enabled;
  if (std::isfinite(cfg.projection.r_theta))
    j["projection"]["r_theta"] = cfg.projection.r_theta;
  if (std::isfinite(cfg.projection.r_w))
    j["projection"]["r_w"] = cfg.projection.r_w;

  j["ledger"]["delta"] = cfg.delta;
  j["ledger"]["p"] = cfg.p;
  j["ledger"]["r_theta"] = cfg.ledger_r_theta;
  j["ledger"]["r_w"] = cfg.ledger_r_w;
  j["ledger"]["m1"] = cfg.m1;
  j["ledger"]["m2"] = cfg.m2;
  j["ledger"]["report_n0"] = cfg.report_n0;

  j["horizon"] = cfg.horizon;
  if (!cfg.checkpoint_list.empty())
    j["checkpoints"]["list"] = cfg.checkpoint_list;
  else
    j["checkpoints"]["log_uniform"] = cfg.checkpoint_count;

  j["seeds"]["count"] = cfg.seed_count;
  j["seeds"]["base"] = cfg.base_seed;

  j["noise"]["kind"] = noise_name(cfg.noise);
  j["noise"]["c"] = cfg.noise_c;

  if (cfg.window_lo != 0 || cfg.window_hi != 0) {
    j["window"]["lo"] = cfg.window_lo;
    j["window"]["hi"] = cfg.window_hi;
  }
  j["c"] = cfg.c;
  j["n0"] = cfg.n0;
  j["out"] = cfg.out_dir;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  check_keys(j,
             {"mode", "system", "schedule", "projection", "ledger", "horizon",
              "checkpoints", "seeds", "noise", "window", "c", "n0", "out"},
             "the top level");

  ExperimentConfig cfg;
  cfg.mode = mode_from_name(str_field(j, "mode", "run"));

  if (j.contains("system")) {
    const auto& s = j["system"];
    check_keys(s, {"matrix", "gtd", "random_mdp"}, "'system'");
    if (s.contains("matrix")) {
      cfg.has_matrix = true;
      cfg.matrix = matrix_spec_from_json(s["matrix"]);
    }
    if (s.contains("gtd")) {
      const auto& g = s["gtd"];
      check_keys(g, {"variant", "mdp_file", "mdp"}, "'system.gtd'");
      cfg.has_gtd = true;
      cfg.variant = variant_from_name(str_field(g, "variant", "gtd0"));
      cfg.mdp_file = str_field(g, "mdp_file", "");
      if (g.contains("mdp")) {
        cfg.has_inline_mdp = true;
        cfg.inline_mdp = mdp_from_json(g["mdp"]);
      }
    }
    if (s.contains("random_mdp")) {
      const auto& r = s["random_mdp"];
      check_keys(r, {"num_states", "feature_dim", "seed", "variant"},
                 "'system.random_mdp'");
      cfg.has_random_mdp = true;
      cfg.mdp_states = static_cast<int>(uint_field(r, "num_states", 5));
      cfg.mdp_features = static_cast<int>(uint_field(r, "feature_dim", 2));
      cfg.mdp_seed = uint_field(r, "seed", 1);
      cfg.variant = variant_from_name(str_field(r, "variant", "gtd0"));
    }
  }

  if (j.contains("schedule")) {
    const auto& s = j["schedule"];
    check_keys(s, {"alpha", "beta"}, "'schedule'");
    cfg.schedule.alpha = num_field(s, "alpha", cfg.schedule.alpha);
    cfg.schedule.beta = num_field(s, "beta", cfg.schedule.beta);
  }

  if (j.contains("projection")) {
    const auto& s = j["projection"];
    check_keys(s, {"enabled", "r_theta", "r_w"}, "'projection'");
    if (s.contains("enabled")) {
      if (!s["enabled"].is_boolean())
        throw ConfigError("config field 'projection.enabled': expected a boolean");
      cfg.projection.enabled = s["enabled"].get<bool>();
    }
    cfg.projection.r_theta =
        num_field(s, "r_theta", std::numeric_limits<double>::infinity());
    cfg.projection.r_w =
        num_field(s, "r_w", std::numeric_limits<double>::infinity());
  }

  if (j.contains("ledger")) {
    const auto& s = j["ledger"];
    check_keys(s, {"delta", "p", "r_theta", "r_w", "m1", "m2", "report_n0"},
               "'ledger'");
    cfg.delta = num_field(s, "delta", cfg.delta);
    cfg.p = num_field(s, "p", cfg.p);
    cfg.ledger_r_theta = num_field(s, "r_theta", cfg.ledger_r_theta);
    cfg.ledger_r_w = num_field(s, "r_w", cfg.ledger_r_w);
    cfg.m1 = num_field(s, "m1", cfg.m1);
    cfg.m2 = num_field(s, "m2", cfg.m2);
    cfg.report_n0 = uint_field(s, "report_n0", cfg.report_n0);
  }

  cfg.horizon = uint_field(j, "horizon", cfg.horizon);

  if (j.contains("checkpoints")) {
    const auto& s = j["checkpoints"];
    check_keys(s, {"log_uniform", "list"}, "'checkpoints'");
    if (s.contains("log_uniform") && s.contains("list"))
      throw ConfigError(
          "config field 'checkpoints': give either log_uniform or list");
    if (s.contains("log_uniform"))
      cfg.checkpoint_count = static_cast<int>(uint_field(s, "log_uniform", 40));
    if (s.contains("list")) {
      if (!s["list"].is_array())
        throw ConfigError("config field 'checkpoints.list': expected an array");
      for (const auto& e : s["list"]) {
        if (!e.is_number_integer() && !e.is_number_unsigned())
          throw ConfigError("config field 'checkpoints.list': expected integers");
        cfg.checkpoint_list.push_back(e.get<std::uint64_t>());
      }
    }
  }

  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    check_keys(s, {"count", "base"}, "'seeds'");
    cfg.seed_count = static_cast<int>(uint_field(s, "count", 1));
    cfg.base_seed = uint_field(s, "base", 1);
  }

  if (j.contains("noise")) {
    const auto& s = j["noise"];
    check_keys(s, {"kind", "c"}, "'noise'");
    cfg.noise = noise_from_name(str_field(s, "kind", "gtd"));
    cfg.noise_c = num_field(s, "c", cfg.noise_c);
  } else if (cfg.has_matrix) {
    cfg.noise = NoiseKind::Zero;  // matrix systems carry no sampling model
  }

  if (j.contains("window")) {
    const auto& s = j["window"];
    check_keys(s, {"lo", "hi"}, "'window'");
    cfg.window_lo = uint_field(s, "lo", 0);
    cfg.window_hi = uint_field(s, "hi", 0);
  }

  cfg.c = num_field(j, "c", cfg.c);
  cfg.n0 = uint_field(j, "n0", cfg.n0);
  cfg.out_dir = str_field(j, "out", cfg.out_dir);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  auto spec_eq = [](const MatrixSpec& x, const MatrixSpec& y) {
    return mat_eq(x.gamma1, y.gamma1) && mat_eq(x.w1, y.w1) &&
           mat_eq(x.gamma2, y.gamma2) && mat_eq(x.w2, y.w2) &&
           vec_eq(x.v1, y.v1) && vec_eq(x.v2, y.v2);
  };
  auto mdp_eq = [](const MdpSpec& x, const MdpSpec& y) {
    return mat_eq(x.transitions, y.transitions) && mat_eq(x.features, y.features) &&
           vec_eq(x.rewards, y.rewards) && x.gamma == y.gamma;
  };
  if (a.mode != b.mode) return false;
  if (a.has_matrix != b.has_matrix || a.has_gtd != b.has_gtd ||
      a.has_random_mdp != b.has_random_mdp)
    return false;
  if (a.has_matrix && !spec_eq(a.matrix, b.matrix)) return false;
  if (a.has_gtd) {
    if (a.variant != b.variant || a.mdp_file != b.mdp_file ||
        a.has_inline_mdp != b.has_inline_mdp)
      return false;
    if (a.has_inline_mdp && !mdp_eq(a.inline_mdp, b.inline_mdp)) return false;
  }
  if (a.has_random_mdp &&
      (a.mdp_states != b.mdp_states || a.mdp_features != b.mdp_features ||
       a.mdp_seed != b.mdp_seed || a.variant != b.variant))
    return false;
  return a.schedule.alpha == b.schedule.alpha &&
         a.schedule.beta == b.schedule.beta &&
         a.projection.enabled == b.projection.enabled &&
         a.projection.r_theta == b.projection.r_theta &&
         a.projection.r_w == b.projection.r_w && a.delta == b.delta &&
         a.p == b.p && a.ledger_r_theta == b.ledger_r_theta &&
         a.ledger_r_w == b.ledger_r_w && a.m1 == b.m1 && a.m2 == b.m2 &&
         a.report_n0 == b.report_n0 && a.horizon == b.horizon &&
         a.checkpoint_count == b.checkpoint_count &&
         a.checkpoint_list == b.checkpoint_list &&
         a.seed_count == b.seed_count && a.base_seed == b.base_seed &&
         a.noise == b.noise && a.noise_c == b.noise_c &&
         a.window_lo == b.window_lo && a.window_hi == b.window_hi &&
         a.c == b.c && a.n0 == b.n0 && a.out_dir == b.out_dir;
}

}  // namespace ttsa
