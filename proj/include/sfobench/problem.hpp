#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfobench/rng.hpp"
#include "sfobench/vec.hpp"

namespace sfo {

struct InvalidBatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { NoisyQuadratic, NoisyRosenbrock, FiniteSumMlp };

std::string to_string(ProblemKind kind);

struct MlpSpec {
  int input_dim = 4;
  int hidden_dim = 8;
  int sample_count = 128;
  double cluster_separation = 1.5;
  double cluster_spread = 0.6;
  std::uint64_t data_seed = 7;
};

enum class SamplingMode { WithReplacement, WithoutReplacement };

// Identifies the randomness consumed by one optimizer step: sample i of a
// minibatch at (seed, step) draws from derive_stream(seed, step, i).
struct GradKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

// A loss problem together with its stochastic first-order oracle. Immutable
// after construction; safe to share across concurrent runs.
class Problem {
 public:
  static Problem noisy_quadratic(int dimension, double sigma2);
  static Problem noisy_quadratic(int dimension, double sigma2,
                                 ParamVector theta_star);
  static Problem noisy_rosenbrock(int dimension, double sigma2);
  static Problem finite_sum_mlp(const MlpSpec& spec);

  ProblemKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  // Exact per-call noise second moment for synthetic kinds; for the
  // finite-sum kind, the exact finite-sum gradient variance at the default
  // initial point (an estimate of the trajectory-wide constant).
  double noise_variance() const { return sigma2_; }
  int sample_count() const { return sample_count_; }
  const std::optional<ParamVector>& reference_point() const {
    return theta_star_;
  }

  double loss(const ParamVector& theta) const;
  ParamVector full_gradient(const ParamVector& theta) const;
  // Gradient of the single training example `index` (finite-sum kind only).
  ParamVector sample_gradient(int index, const ParamVector& theta) const;
  // One oracle call: unbiased, E||G - grad L||^2 <= sigma^2 (equality for
  // synthetic kinds).
  ParamVector stochastic_gradient(const ParamVector& theta,
                                  RandomStream& rng) const;

  ParamVector default_initial_point() const;

 private:
  Problem() = default;
  void check_dimension(const ParamVector& theta) const;
  double sample_loss(int index, const ParamVector& theta) const;

  ProblemKind kind_ = ProblemKind::NoisyQuadratic;
  int dimension_ = 0;
  double sigma2_ = 0.0;
  int sample_count_ = 0;
  std::optional<ParamVector> theta_star_;

  // finite-sum MLP data
  MlpSpec mlp_;
  std::vector<ParamVector> inputs_;
  std::vector<double> targets_;
  ParamVector mlp_init_;

  friend ParamVector minibatch_gradient(const Problem&, const ParamVector&,
                                        int, const GradKey&, SamplingMode);
};

// Average of b oracle calls (synthetic) or of b sampled per-example gradients
// (finite-sum). Noise variance scales as sigma^2 / b.
ParamVector minibatch_gradient(const Problem& problem, const ParamVector& theta,
                               int batch, const GradKey& key,
                               SamplingMode mode = SamplingMode::WithReplacement);

}  // namespace sfo
