#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "capfactor/scaling_laws.hpp"
#include "capfactor/score_data.hpp"
#include "capfactor/types.hpp"

namespace capfactor {

/// Ground-truth population: capabilities = w ln(n) + intercept + noise,
/// propensity = L capabilities + unique noise, accuracy ~ Binomial(q, 3PL)/q.
struct SynthConfig {
  int p = 19;
  int m = 1000;
  int k = 3;
  Matrix true_loadings;         // p x k
  Vector true_weights;          // k
  Vector capability_intercepts;  // k
  Vector capability_noise_sd;   // k
  Eigen::VectorXi question_counts;  // p
  Eigen::VectorXi option_counts;    // p
  std::pair<double, double> log_n_range{18.42, 25.33};
  Vector unique_noise_sd;  // p
  std::pair<double, double> alpha_range{0.5, 3.0};
  std::pair<double, double> beta_range{18.72, 22.72};
  /// Explicit item curves; drawn from the ranges when absent.
  std::optional<Vector> alphas;
  std::optional<Vector> betas;
  std::uint64_t seed = 42;
};

/// Throws DataError when a field is missized or out of range.
void validate(const SynthConfig& cfg);

/// Scale-driven population: simple-structure loadings whose rows sum to 1,
/// unit structural weights, BBH-like option and question counts.
SynthConfig make_default_config(int p, int m, int k, std::uint64_t seed);

struct GroundTruth {
  Vector log_n;               // m
  Matrix capabilities;        // k x m
  Matrix propensity;          // p x m
  Matrix expected_accuracy;   // p x m, 3PL of propensity
  std::vector<ItemParams> items;
  Matrix loadings;
  Vector weights;
};

struct Population {
  Dataset dataset;
  GroundTruth truth;
};

/// Item curves come from substream(seed, 0); model j draws from
/// substream(seed, j + 1), so the result is bit-identical for a fixed config.
Population generate_population(const SynthConfig& cfg);

/// Linear Gaussian factor data: column j is L f_j + e_j with f ~ N(0, Phi),
/// e ~ N(0, diag(uniquenesses)). Column j draws from substream(seed, j).
Matrix generate_factor_data(const Matrix& loadings, const Matrix& factor_cov, const Vector& uniquenesses, int m,
                            std::uint64_t seed);

/// Each row loads `primary` on factor i mod k and zero elsewhere.
Matrix simple_structure(int p, int k, double primary);

/// JSON round trip. Missing keys take make_default_config values for the
/// given p, m, k and seed.
SynthConfig parse_synth_config(const std::string& json_text);
std::string synth_config_to_json(const SynthConfig& cfg);
std::string ground_truth_to_json(const Population& pop);

}  // namespace capfactor
