#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "ttsa/constants.hpp"
#include "ttsa/errors.hpp"
#include "ttsa/gtd.hpp"
#include "ttsa/sa_core.hpp"
#include "ttsa/schedule.hpp"

namespace ttsa {

enum class Mode { Run, Constants, Rates, LowerBound, Decompose, MdpGen };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& s);

enum class NoiseKind { Zero, Sphere, Gtd };

// One JSON document describes an experiment end to end. Exactly one system
// source may be given; modes that need a system insist on one (constants
// falls back to the 1-d identity system, mdp-gen to default generator
// parameters).
struct ExperimentConfig {
  Mode mode = Mode::Run;

  // system source
  bool has_matrix = false;
  MatrixSpec matrix;
  bool has_gtd = false;
  GtdVariant variant = GtdVariant::Gtd0;
  std::string mdp_file;  // exactly one of file / inline MDP
  bool has_inline_mdp = false;
  MdpSpec inline_mdp;
  bool has_random_mdp = false;
  int mdp_states = 5;
  int mdp_features = 2;
  std::uint64_t mdp_seed = 1;

  StepSchedule schedule;
  ProjectionConfig projection;

  // Ledger knobs; schedule / dimension / noise bounds are filled in from the
  // resolved system when the ledger is built.
  double delta = 0.05;
  double p = 2.0;
  double ledger_r_theta = 0.0;  // <= 0 means the default radius
  double ledger_r_w = 0.0;
  double m1 = 1.0;  // noise bounds for inline matrix systems
  double m2 = 1.0;
  std::uint64_t report_n0 = 1;

  std::uint64_t horizon = 100000;
  int checkpoint_count = 40;                   // log-uniform in [100, horizon]
  std::vector<std::uint64_t> checkpoint_list;  // explicit list wins when set

  int seed_count = 1;
  std::uint64_t base_seed = 1;

  NoiseKind noise = NoiseKind::Gtd;  // GTD systems sample their own noise
  double noise_c = 0.1;              // bounded-sphere scale

  std::uint64_t window_lo = 0;  // 0,0 = last two decades of the horizon
  std::uint64_t window_hi = 0;
  double c = 1e-3;              // lower-bound threshold
  std::uint64_t n0 = 0;         // decompose start index

  std::string out_dir = ".";

  int system_source_count() const {
    return (has_matrix ? 1 : 0) + (has_gtd ? 1 : 0) + (has_random_mdp ? 1 : 0);
  }
  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
inline bool operator!=(const ExperimentConfig& a, const ExperimentConfig& b) {
  return !(a == b);
}

nlohmann::json matrix_spec_to_json(const MatrixSpec& spec);
MatrixSpec matrix_spec_from_json(const nlohmann::json& j);

}  // namespace ttsa
