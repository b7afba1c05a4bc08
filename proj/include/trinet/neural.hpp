#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trinet/distribution.hpp"

namespace trinet {

struct OracleConfig {
  std::size_t layers = 3;    // hidden layers per party network
  std::size_t neurons = 16;  // width of every hidden layer
  std::size_t batch = 10'000;
  double learning_rate = 1e-3;
  std::size_t max_epochs = 2000;
  std::size_t patience = 200;     // epochs without a KL improvement on the evaluation batch
  std::size_t eval_interval = 10;
  std::size_t final_eval_batch = 100'000;  // latent samples behind the reported KL and MSE
  double min_kl = 1e-10;          // stop once the evaluation KL falls below this
  std::uint64_t seed = 0;
};

// The 8 ensemble members: layers {3,4,5,6} x neurons {16,32}, seeds derived from base.seed.
std::vector<OracleConfig> ensemble_configs(const OracleConfig& base);

// Fully connected network: 2 inputs, rectifier hidden layers, normalized-exponential output of width 4.
class Mlp {
 public:
  Mlp(std::size_t hidden_layers, std::size_t neurons, std::uint64_t seed);
  Mlp(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases);

  std::size_t parameter_count() const;
  // Columns of the result are probability vectors, one per input column.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;

  const std::vector<Eigen::MatrixXd>& weights() const noexcept { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const noexcept { return biases_; }
  std::vector<Eigen::MatrixXd>& weights() noexcept { return weights_; }
  std::vector<Eigen::VectorXd>& biases() noexcept { return biases_; }

 private:
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

// Networks for A, B, C; A reads (l_AB, l_AC), B reads (l_AB, l_BC), C reads (l_AC, l_BC).
struct TriangleOracle {
  std::array<Mlp, 3> nets;

  static TriangleOracle random(std::size_t hidden_layers, std::size_t neurons, std::uint64_t seed);
  static TriangleOracle constant(const std::array<std::array<double, 4>, 3>& outputs);

  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> theta);
};

// Latent triples (l_AB, l_AC, l_BC), one per column.
Eigen::MatrixXd sample_latents(std::size_t n, std::uint64_t seed);

std::vector<double> approximate_table(const TriangleOracle& oracle, const Eigen::MatrixXd& latents);
OutcomeDistribution approximate_distribution(const TriangleOracle& oracle, std::size_t n_batch, std::uint64_t seed);

double kl_divergence(std::span<const double> p, std::span<const double> q);
double mean_square_error(std::span<const double> p, std::span<const double> q);

// KL(target || approximation over the given latents) and its gradient in parameters() order.
double kl_and_gradient(const TriangleOracle& oracle, std::span<const double> target, const Eigen::MatrixXd& latents,
                       std::vector<double>* gradient);

struct TrainResult {
  TriangleOracle oracle;
  double kl = 0.0;   // of the returned weights, on final_eval_batch latents
  double mse = 0.0;
  double initial_kl = 0.0;
  double initial_mse = 0.0;
  std::size_t epochs = 0;
};

// Adam on a fresh latent batch each epoch; the weights with the lowest KL on a fixed evaluation
// batch are kept, falling back to the initial weights if they would report a larger MSE.
TrainResult train(const OutcomeDistribution& target, const OracleConfig& config);

struct SweepResult {
  std::vector<double> grid;
  std::vector<OracleConfig> configs;
  std::vector<std::vector<double>> mse;  // [grid point][architecture]
  std::vector<std::vector<double>> kl;
  std::vector<double> ensemble_min;
  std::vector<std::size_t> best_architecture;
  std::optional<double> knee;

  void write_csv(std::ostream& os) const;
};

// First grid point above `baseline_limit` whose value exceeds factor x the median over points <= baseline_limit.
std::optional<double> find_knee(std::span<const double> grid, std::span<const double> values,
                                double baseline_limit = 0.5, double factor = 3.0);

// Trains every configuration on mix_with_uniform(p, v) for each v; threads > 1 trains members concurrently.
SweepResult visibility_sweep(const OutcomeDistribution& p, std::span<const double> grid,
                             std::span<const OracleConfig> configs, std::size_t threads = 1);

std::string to_json(const TriangleOracle& oracle);

}  // namespace trinet
