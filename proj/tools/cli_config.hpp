#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace jdcli {

struct MapSpec {
  std::string kind = "unicritical";  // unicritical | polynomial | rational
  int degree = 2;
  double c_re = 0.0, c_im = 0.0;
  std::vector<double> coeffs;  // interleaved re,im, ascending degree
  std::vector<double> num, den;

  std::string text() const;  // canonical form, feeds the config hash
};

// One experiment: map, estimator, numeric parameters, output options.
// Field defaults match the documented config schema; delta and big_delta
// start unset (-1) so the delta = Delta/10 default can be filled in
// validate().
struct RunConfig {
  MapSpec map;
  std::string estimator = "tree-plain";
  int depth = 10;            // n, backward depth
  int puzzle_depth = 6;      // N, finest puzzle level
  int puzzle_depth_min = 2;  // family start for convergence runs
  double delta = -1.0;
  double big_delta = -1.0;
  int samples = 2;  // m
  double radius = 0.1;
  double kappa = 1.2;
  double eta = 0.2;
  std::string angles;                 // "" = the default {0, 1/2}
  std::string a_schedule = "linear";  // linear | constant
  double a_value = 0.0;               // constant schedule value
  double t_min = 0.1, t_max = 2.0, t_step = 0.05;
  double tol_t = 1e-6;
  std::uint64_t node_budget = 1ull << 24;
  int threads = 1;
  unsigned seed = 0;
  bool has_base = false;  // explicit base point instead of ray selection
  double base_re = 0.0, base_im = 0.0;
  std::string base_angle = "0";
  std::string out;
  std::string format = "csv";  // csv | json (stdout selection)
  bool plot = false;
  std::string cache_dir;

  // Fills defaults (delta = Delta/10) and rejects inconsistent settings.
  void validate();
  std::vector<double> t_grid() const;
  // Semantic fields only (no output paths, no thread count); identical
  // experiments hash identically.
  std::string canonical() const;
  std::string hash() const;         // 16 hex digits, FNV-1a over canonical()
  std::string puzzle_hash() const;  // puzzle-determining fields only
};

const std::vector<std::string>& estimator_ids();
bool estimator_is_tree(const std::string& id);
bool estimator_is_mcm(const std::string& id);
// mcm-restricted-fuzzy -> restricted-fuzzy, mcm-double -> double-sample, ...
std::string mcm_matrix_mode(const std::string& id);

// Merge the JSON config file into cfg. Keys present in the file overwrite
// the current values; unknown keys are rejected with their path.
void load_config_file(const std::string& path, RunConfig& cfg);

std::string format_double(double v);  // shortest round-trip text
double parse_double(const std::string& text, const std::string& what);
void parse_complex(const std::string& text, double* re, double* im);

// Thread count requested through JULIADIM_THREADS, or 0 when the variable
// is unset or unusable. An explicit --threads flag wins over this.
int env_threads();

}  // namespace jdcli
