#include "sfobench/problem.hpp"

#include <algorithm>
#include <cmath>

namespace sfo {

namespace {

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::NoisyQuadratic: return "noisy-quadratic";
    case ProblemKind::NoisyRosenbrock: return "noisy-rosenbrock";
    case ProblemKind::FiniteSumMlp: return "finite-sum-mlp";
  }
  return "unknown";
}

Problem Problem::noisy_quadratic(int dimension, double sigma2) {
  return noisy_quadratic(dimension, sigma2, ParamVector(dimension, 0.0));
}

Problem Problem::noisy_quadratic(int dimension, double sigma2,
                                 ParamVector theta_star) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (sigma2 < 0) throw std::invalid_argument("sigma2 must be >= 0");
  if (static_cast<int>(theta_star.size()) != dimension)
    throw std::invalid_argument("theta_star dimension mismatch");
  Problem p;
  p.kind_ = ProblemKind::NoisyQuadratic;
  p.dimension_ = dimension;
  p.sigma2_ = sigma2;
  p.theta_star_ = std::move(theta_star);
  return p;
}

Problem Problem::noisy_rosenbrock(int dimension, double sigma2) {
  if (dimension < 2)
    throw std::invalid_argument("rosenbrock needs dimension >= 2");
  if (sigma2 < 0) throw std::invalid_argument("sigma2 must be >= 0");
  Problem p;
  p.kind_ = ProblemKind::NoisyRosenbrock;
  p.dimension_ = dimension;
  p.sigma2_ = sigma2;
  p.theta_star_ = ParamVector(dimension, 1.0);
  return p;
}

Problem Problem::finite_sum_mlp(const MlpSpec& spec) {
  if (spec.input_dim < 1 || spec.hidden_dim < 1)
    throw std::invalid_argument("mlp dims must be >= 1");
  if (spec.sample_count < 1)
    throw std::invalid_argument("sample_count must be >= 1");
  Problem p;
  p.kind_ = ProblemKind::FiniteSumMlp;
  p.mlp_ = spec;
  p.sample_count_ = spec.sample_count;
  p.dimension_ =
      spec.hidden_dim * spec.input_dim + spec.hidden_dim + spec.hidden_dim + 1;
  if (p.dimension_ > 500)
    throw std::invalid_argument("mlp parameter count exceeds 500");

  // Two Gaussian clusters at +/- separation/sqrt(in), targets +/- 1.
  const double mu = spec.cluster_separation / std::sqrt(double(spec.input_dim));
  p.inputs_.resize(spec.sample_count);
  p.targets_.resize(spec.sample_count);
  for (int i = 0; i < spec.sample_count; ++i) {
    const int cluster = i % 2;
    RandomStream rs = derive_stream(spec.data_seed, 0, std::uint64_t(i));
    ParamVector x(spec.input_dim);
    const double center = cluster == 0 ? mu : -mu;
    for (int j = 0; j < spec.input_dim; ++j)
      x[j] = center + spec.cluster_spread * rs.next_gaussian();
    p.inputs_[i] = std::move(x);
    p.targets_[i] = cluster == 0 ? 1.0 : -1.0;
  }
  p.mlp_init_.resize(p.dimension_);
  RandomStream init = derive_stream(spec.data_seed, 1, 0);
  for (int i = 0; i < p.dimension_; ++i)
    p.mlp_init_[i] = 0.5 * init.next_gaussian();

  // Nominal sigma^2: exact E_i ||grad l_i - grad L||^2 at the initial point.
  const ParamVector g = p.full_gradient(p.mlp_init_);
  double s2 = 0.0;
  for (int i = 0; i < spec.sample_count; ++i) {
    ParamVector gi = p.sample_gradient(i, p.mlp_init_);
    for (int j = 0; j < p.dimension_; ++j) {
      const double d = gi[j] - g[j];
      s2 += d * d;
    }
  }
  p.sigma2_ = s2 / spec.sample_count;
  return p;
}

void Problem::check_dimension(const ParamVector& theta) const {
  if (static_cast<int>(theta.size()) != dimension_)
    throw std::invalid_argument("theta dimension mismatch: expected " +
                                std::to_string(dimension_) + ", got " +
                                std::to_string(theta.size()));
}

double Problem::sample_loss(int index, const ParamVector& theta) const {
  const int in = mlp_.input_dim, hid = mlp_.hidden_dim;
  const double* w1 = theta.data();               // hid x in, row-major
  const double* b1 = w1 + hid * in;              // hid
  const double* w2 = b1 + hid;                   // hid
  const double b2 = *(w2 + hid);
  const ParamVector& x = inputs_[index];
  double out = b2;
  for (int h = 0; h < hid; ++h) {
    double z = b1[h];
    for (int j = 0; j < in; ++j) z += w1[h * in + j] * x[j];
    out += w2[h] * softplus(z);
  }
  const double r = out - targets_[index];
  return 0.5 * r * r;
}

double Problem::loss(const ParamVector& theta) const {
  check_dimension(theta);
  switch (kind_) {
    case ProblemKind::NoisyQuadratic: {
      const ParamVector& c = *theta_star_;
      double s = 0.0;
      for (int i = 0; i < dimension_; ++i) {
        const double d = theta[i] - c[i];
        s += d * d;
      }
      return 0.5 * s;
    }
    case ProblemKind::NoisyRosenbrock: {
      double s = 0.0;
      for (int i = 0; i + 1 < dimension_; ++i) {
        const double a = theta[i + 1] - theta[i] * theta[i];
        const double b = 1.0 - theta[i];
        s += 100.0 * a * a + b * b;
      }
      return s;
    }
    case ProblemKind::FiniteSumMlp: {
      double s = 0.0;
      for (int i = 0; i < sample_count_; ++i) s += sample_loss(i, theta);
      return s / sample_count_;
    }
  }
  return 0.0;
}

ParamVector Problem::full_gradient(const ParamVector& theta) const {
  check_dimension(theta);
  switch (kind_) {
    case ProblemKind::NoisyQuadratic: {
      const ParamVector& c = *theta_star_;
      ParamVector g(dimension_);
      for (int i = 0; i < dimension_; ++i) g[i] = theta[i] - c[i];
      return g;
    }
    case ProblemKind::NoisyRosenbrock: {
      ParamVector g(dimension_, 0.0);
      for (int i = 0; i + 1 < dimension_; ++i) {
        const double a = theta[i + 1] - theta[i] * theta[i];
        g[i] += -400.0 * theta[i] * a - 2.0 * (1.0 - theta[i]);
        g[i + 1] += 200.0 * a;
      }
      return g;
    }
    case ProblemKind::FiniteSumMlp: {
      // Same accumulation order as the b = n without-replacement batch so
      // that the two agree bit-for-bit.
      ParamVector acc(dimension_, 0.0);
      for (int i = 0; i < sample_count_; ++i) {
        ParamVector gi = sample_gradient(i, theta);
        for (int j = 0; j < dimension_; ++j) acc[j] += gi[j];
      }
      const double inv = 1.0 / sample_count_;
      for (double& v : acc) v *= inv;
      return acc;
    }
  }
  return {};
}

ParamVector Problem::sample_gradient(int index, const ParamVector& theta) const {
  if (kind_ != ProblemKind::FiniteSumMlp)
    throw std::invalid_argument("sample_gradient is finite-sum only");
  check_dimension(theta);
  if (index < 0 || index >= sample_count_)
    throw std::invalid_argument("sample index out of range");
  const int in = mlp_.input_dim, hid = mlp_.hidden_dim;
  const double* w1 = theta.data();
  const double* b1 = w1 + hid * in;
  const double* w2 = b1 + hid;
  const double b2 = *(w2 + hid);
  const ParamVector& x = inputs_[index];

  std::vector<double> z(hid), a(hid);
  double out = b2;
  for (int h = 0; h < hid; ++h) {
    double zh = b1[h];
    for (int j = 0; j < in; ++j) zh += w1[h * in + j] * x[j];
    z[h] = zh;
    a[h] = softplus(zh);
    out += w2[h] * a[h];
  }
  const double dout = out - targets_[index];

  ParamVector g(dimension_);
  double* gw1 = g.data();
  double* gb1 = gw1 + hid * in;
  double* gw2 = gb1 + hid;
  double* gb2 = gw2 + hid;
  for (int h = 0; h < hid; ++h) {
    const double dz = dout * w2[h] * sigmoid(z[h]);
    for (int j = 0; j < in; ++j) gw1[h * in + j] = dz * x[j];
    gb1[h] = dz;
    gw2[h] = dout * a[h];
  }
  *gb2 = dout;
  return g;
}

ParamVector Problem::stochastic_gradient(const ParamVector& theta,
                                         RandomStream& rng) const {
  check_dimension(theta);
  if (kind_ == ProblemKind::FiniteSumMlp) {
    const int idx = static_cast<int>(rng.next_below(sample_count_));
    return sample_gradient(idx, theta);
  }
  ParamVector g = full_gradient(theta);
  if (sigma2_ > 0.0) {
    // Isotropic Gaussian, total per-call variance exactly sigma^2.
    const double coord_sd = std::sqrt(sigma2_ / dimension_);
    for (int i = 0; i < dimension_; ++i) g[i] += coord_sd * rng.next_gaussian();
  }
  return g;
}

ParamVector Problem::default_initial_point() const {
  if (kind_ == ProblemKind::FiniteSumMlp) return mlp_init_;
  return ParamVector(dimension_, 1.0);
}

ParamVector minibatch_gradient(const Problem& problem, const ParamVector& theta,
                               int batch, const GradKey& key,
                               SamplingMode mode) {
  problem.check_dimension(theta);
  if (batch < 1) throw std::invalid_argument("batch must be >= 1");
  const int n = problem.sample_count_;
  if (problem.kind_ == ProblemKind::FiniteSumMlp) {
    if (batch > n)
      throw InvalidBatchError("batch " + std::to_string(batch) +
                              " exceeds sample count " + std::to_string(n));
    std::vector<int> indices;
    indices.reserve(batch);
    if (mode == SamplingMode::WithReplacement) {
      for (int i = 0; i < batch; ++i) {
        RandomStream rs = derive_stream(key.seed, key.step, std::uint64_t(i));
        indices.push_back(static_cast<int>(rs.next_below(n)));
      }
    } else {
      // Partial Fisher-Yates, then ascending order so that b = n reproduces
      // the full gradient bit-for-bit.
      std::vector<int> pool(n);
      for (int i = 0; i < n; ++i) pool[i] = i;
      RandomStream rs = derive_stream(key.seed, key.step, 0x5a5a5a5aULL);
      for (int i = 0; i < batch; ++i) {
        const int j = i + static_cast<int>(rs.next_below(n - i));
        std::swap(pool[i], pool[j]);
      }
      indices.assign(pool.begin(), pool.begin() + batch);
      std::sort(indices.begin(), indices.end());
    }
    ParamVector acc(problem.dimension_, 0.0);
    for (int idx : indices) {
      ParamVector gi = problem.sample_gradient(idx, theta);
      for (int j = 0; j < problem.dimension_; ++j) acc[j] += gi[j];
    }
    const double inv = 1.0 / batch;
    for (double& v : acc) v *= inv;
    return acc;
  }

  ParamVector acc(problem.dimension_, 0.0);
  for (int i = 0; i < batch; ++i) {
    RandomStream rs = derive_stream(key.seed, key.step, std::uint64_t(i));
    ParamVector gi = problem.stochastic_gradient(theta, rs);
    for (int j = 0; j < problem.dimension_; ++j) acc[j] += gi[j];
  }
  const double inv = 1.0 / batch;
  for (double& v : acc) v *= inv;
  return acc;
}

}  // namespace sfo
