#include "trinet/neural.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

#include "json.hpp"
#include "trinet/error.hpp"
#include "trinet/random.hpp"

namespace trinet {

namespace {

constexpr std::array<std::array<int, 2>, 3> kInputs{{{0, 1}, {0, 2}, {1, 2}}};

struct Trace {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  Eigen::MatrixXd probs;
};

void softmax_columns(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    auto col = z.col(i);
    col.array() -= col.maxCoeff();
    col = col.array().exp();
    col /= col.sum();
  }
}

Trace forward_trace(const Mlp& net, const Eigen::MatrixXd& input) {
  Trace t;
  const auto& w = net.weights();
  const auto& b = net.biases();
  t.inputs.reserve(w.size());
  t.inputs.push_back(input);
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    Eigen::MatrixXd z = w[l] * t.inputs.back();
    z.colwise() += b[l];
    t.inputs.push_back(z.cwiseMax(0.0));
  }
  t.probs = w.back() * t.inputs.back();
  t.probs.colwise() += b.back();
  softmax_columns(t.probs);
  return t;
}

// Writes dLoss/dparams of one network into out (weights then bias, layer by layer, column-major).
void backward(const Mlp& net, const Trace& t, const Eigen::MatrixXd& d_probs, double* out) {
  const auto& w = net.weights();
  const Eigen::RowVectorXd inner = (t.probs.array() * d_probs.array()).colwise().sum();
  Eigen::MatrixXd dz = t.probs.array() * (d_probs.rowwise() - inner).array();
  std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> grads(w.size());
  for (std::size_t l = w.size(); l-- > 0;) {
    grads[l].first = dz * t.inputs[l].transpose();
    grads[l].second = dz.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd da = w[l].transpose() * dz;
    dz = (t.inputs[l].array() > 0.0).select(da.array(), 0.0).matrix();
  }
  for (const auto& [gw, gb] : grads) {
    out = std::copy(gw.data(), gw.data() + gw.size(), out);
    out = std::copy(gb.data(), gb.data() + gb.size(), out);
  }
}

Eigen::MatrixXd party_input(const Eigen::MatrixXd& latents, std::size_t party) {
  Eigen::MatrixXd in(2, latents.cols());
  in.row(0) = latents.row(kInputs[party][0]);
  in.row(1) = latents.row(kInputs[party][1]);
  return in;
}

// pair(x * 4 + y, i) = u(x, i) * v(y, i)
Eigen::MatrixXd pair_products(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
  Eigen::MatrixXd out(16, u.cols());
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) out.row(x * 4 + y) = u.row(x).cwiseProduct(v.row(y));
  return out;
}

std::vector<double> table_from(const Eigen::MatrixXd& a, const Eigen::MatrixXd& bc) {
  const Eigen::MatrixXd t = a * bc.transpose() / static_cast<double>(a.cols());
  std::vector<double> out(64);
  for (int x = 0; x < 4; ++x)
    for (int yz = 0; yz < 16; ++yz) out[x * 16 + yz] = t(x, yz);
  return out;
}

void check_target(std::span<const double> p) {
  if (p.size() != 64) throw DomainError("neural oracle targets are 4x4x4 tables");
}

}  // namespace

std::vector<OracleConfig> ensemble_configs(const OracleConfig& base) {
  std::vector<OracleConfig> out;
  std::uint64_t k = 0;
  for (std::size_t layers : {3, 4, 5, 6})
    for (std::size_t neurons : {16, 32}) {
      auto c = base;
      c.layers = layers;
      c.neurons = neurons;
      c.seed = derive_seed(base.seed, k++);
      out.push_back(c);
    }
  return out;
}

Mlp::Mlp(std::size_t hidden_layers, std::size_t neurons, std::uint64_t seed) {
  if (hidden_layers == 0 || neurons == 0) throw DomainError("network needs at least one hidden neuron");
  Rng rng(seed);
  std::normal_distribution<double> n;
  std::size_t fan_in = 2;
  for (std::size_t l = 0; l <= hidden_layers; ++l) {
    const std::size_t out = l == hidden_layers ? 4 : neurons;
    const double scale = std::sqrt((l == hidden_layers ? 1.0 : 2.0) / static_cast<double>(fan_in));
    Eigen::MatrixXd w(out, fan_in);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = scale * n(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out)));
    fan_in = out;
  }
}

Mlp::Mlp(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.empty() || weights_.size() != biases_.size()) throw DomainError("malformed network layers");
  Eigen::Index fan_in = 2;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].cols() != fan_in || biases_[l].size() != weights_[l].rows())
      throw DomainError("network layer shapes do not chain");
    fan_in = weights_[l].rows();
  }
  if (fan_in != 4) throw DomainError("network output width must be 4");
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const { return forward_trace(*this, input).probs; }

TriangleOracle TriangleOracle::random(std::size_t hidden_layers, std::size_t neurons, std::uint64_t seed) {
  return {{Mlp(hidden_layers, neurons, derive_seed(seed, 1)), Mlp(hidden_layers, neurons, derive_seed(seed, 2)),
           Mlp(hidden_layers, neurons, derive_seed(seed, 3))}};
}

TriangleOracle TriangleOracle::constant(const std::array<std::array<double, 4>, 3>& outputs) {
  auto make = [](const std::array<double, 4>& q) {
    Eigen::VectorXd bias(4);
    for (int k = 0; k < 4; ++k) {
      if (!(q[k] > 0.0)) throw DomainError("constant outputs must be strictly positive");
      bias(k) = std::log(q[k]);
    }
    return Mlp({Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(4, 1)}, {Eigen::VectorXd::Zero(1), bias});
  };
  return {{make(outputs[0]), make(outputs[1]), make(outputs[2])}};
}

std::size_t TriangleOracle::parameter_count() const {
  return nets[0].parameter_count() + nets[1].parameter_count() + nets[2].parameter_count();
}

std::vector<double> TriangleOracle::parameters() const {
  std::vector<double> theta;
  theta.reserve(parameter_count());
  for (const auto& net : nets)
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
      const auto& w = net.weights()[l];
      const auto& b = net.biases()[l];
      theta.insert(theta.end(), w.data(), w.data() + w.size());
      theta.insert(theta.end(), b.data(), b.data() + b.size());
    }
  return theta;
}

void TriangleOracle::set_parameters(std::span<const double> theta) {
  if (theta.size() != parameter_count()) throw DomainError("parameter vector has the wrong length");
  const double* p = theta.data();
  for (auto& net : nets)
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
      auto& w = net.weights()[l];
      auto& b = net.biases()[l];
      std::copy(p, p + w.size(), w.data());
      p += w.size();
      std::copy(p, p + b.size(), b.data());
      p += b.size();
    }
}

Eigen::MatrixXd sample_latents(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd out(3, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.cols(); ++i)
    for (int k = 0; k < 3; ++k) out(k, i) = u(rng);
  return out;
}

std::vector<double> approximate_table(const TriangleOracle& oracle, const Eigen::MatrixXd& latents) {
  if (latents.rows() != 3 || latents.cols() == 0) throw DomainError("latents must be a nonempty 3 x N matrix");
  const auto a = oracle.nets[0].forward(party_input(latents, 0));
  const auto b = oracle.nets[1].forward(party_input(latents, 1));
  const auto c = oracle.nets[2].forward(party_input(latents, 2));
  return table_from(a, pair_products(b, c));
}

OutcomeDistribution approximate_distribution(const TriangleOracle& oracle, std::size_t n_batch, std::uint64_t seed) {
  return OutcomeDistribution(triangle_variables(), approximate_table(oracle, sample_latents(n_batch, seed)),
                             kEmpiricalTolerance);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("KL divergence needs equal-length tables");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(kl, 0.0);
}

double mean_square_error(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) throw DomainError("mean square error needs equal-length tables");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
  return s / static_cast<double>(p.size());
}

double kl_and_gradient(const TriangleOracle& oracle, std::span<const double> target, const Eigen::MatrixXd& latents,
                       std::vector<double>* gradient) {
  check_target(target);
  std::array<Trace, 3> t;
  for (std::size_t k = 0; k < 3; ++k) t[k] = forward_trace(oracle.nets[k], party_input(latents, k));
  const auto& a = t[0].probs;
  const auto& b = t[1].probs;
  const auto& c = t[2].probs;
  const auto bc = pair_products(b, c);
  const auto q = table_from(a, bc);
  double kl = 0.0;
  for (std::size_t i = 0; i < 64; ++i)
    if (target[i] > 0.0) kl += target[i] * std::log(target[i] / q[i]);
  if (!gradient) return kl;

  // g = dKL/dq, laid out three ways so each party's derivative is one product.
  const double inv_n = 1.0 / static_cast<double>(latents.cols());
  Eigen::MatrixXd ga(4, 16), gb(4, 16), gc(4, 16);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 4; ++z) {
        const std::size_t i = static_cast<std::size_t>(x * 16 + y * 4 + z);
        const double g = target[i] > 0.0 ? -target[i] / q[i] * inv_n : 0.0;
        ga(x, y * 4 + z) = g;
        gb(y, x * 4 + z) = g;
        gc(z, x * 4 + y) = g;
      }
  const Eigen::MatrixXd da = ga * bc;
  const Eigen::MatrixXd db = gb * pair_products(a, c);
  const Eigen::MatrixXd dc = gc * pair_products(a, b);

  gradient->assign(oracle.parameter_count(), 0.0);
  double* out = gradient->data();
  backward(oracle.nets[0], t[0], da, out);
  out += oracle.nets[0].parameter_count();
  backward(oracle.nets[1], t[1], db, out);
  out += oracle.nets[1].parameter_count();
  backward(oracle.nets[2], t[2], dc, out);
  return kl;
}

TrainResult train(const OutcomeDistribution& target, const OracleConfig& config) {
  const auto p = target.probabilities();
  check_target(p);
  if (config.batch == 0 || config.eval_interval == 0 || config.final_eval_batch == 0)
    throw DomainError("batch sizes and evaluation interval must be positive");

  const auto initial = TriangleOracle::random(config.layers, config.neurons, config.seed);
  auto oracle = initial;
  auto best = initial;
  auto theta = oracle.parameters();
  std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0), grad;
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  const auto eval_latents = sample_latents(config.batch, derive_seed(config.seed, 0xe7a1));
  auto eval_kl = [&](const TriangleOracle& o) { return kl_divergence(p, approximate_table(o, eval_latents)); };

  double best_kl = eval_kl(oracle);
  std::size_t last_improvement = 0, epochs = 0;
  double b1 = 1.0, b2 = 1.0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs && best_kl >= config.min_kl; ++epoch) {
    const auto latents = sample_latents(config.batch, derive_seed(config.seed, epoch));
    const double loss = kl_and_gradient(oracle, p, latents, &grad);
    if (!std::isfinite(loss) || !std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); }))
      throw NumericalError("non-finite loss or gradient at epoch " + std::to_string(epoch) + " (layers " +
                           std::to_string(config.layers) + ", neurons " + std::to_string(config.neurons) + ")");
    b1 *= beta1;
    b2 *= beta2;
    const double step = config.learning_rate * std::sqrt(1.0 - b2) / (1.0 - b1);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
      theta[k] -= step * m[k] / (std::sqrt(v[k]) + eps);
    }
    oracle.set_parameters(theta);
    epochs = epoch;

    if (epoch % config.eval_interval != 0) continue;
    const double kl = eval_kl(oracle);
    if (kl < best_kl) {
      best = oracle;
      best_kl = kl;
      last_improvement = epoch;
    }
    if (epoch - last_improvement >= config.patience) break;
  }

  const auto final_latents = sample_latents(config.final_eval_batch, derive_seed(config.seed, 0xf1a1));
  const auto q0 = approximate_table(initial, final_latents);
  const auto q = approximate_table(best, final_latents);
  TrainResult r{best, kl_divergence(p, q), mean_square_error(p, q), kl_divergence(p, q0), mean_square_error(p, q0),
                epochs};
  if (r.mse > r.initial_mse) {
    r.oracle = initial;
    r.kl = r.initial_kl;
    r.mse = r.initial_mse;
  }
  return r;
}

std::optional<double> find_knee(std::span<const double> grid, std::span<const double> values, double baseline_limit,
                                double factor) {
  if (grid.size() != values.size()) throw DomainError("grid and values differ in length");
  std::vector<double> base;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] <= baseline_limit) base.push_back(values[i]);
  if (base.empty()) return std::nullopt;
  std::sort(base.begin(), base.end());
  const std::size_t n = base.size();
  const double median = n % 2 ? base[n / 2] : 0.5 * (base[n / 2 - 1] + base[n / 2]);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] > baseline_limit && values[i] > factor * median) return grid[i];
  return std::nullopt;
}

SweepResult visibility_sweep(const OutcomeDistribution& p, std::span<const double> grid,
                             std::span<const OracleConfig> configs, std::size_t threads) {
  for (double v : grid)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("visibility grid must lie in [0,1]");
  if (configs.empty()) throw DomainError("at least one oracle configuration is required");
  SweepResult r;
  r.grid.assign(grid.begin(), grid.end());
  r.configs.assign(configs.begin(), configs.end());
  r.mse.assign(grid.size(), std::vector<double>(configs.size()));
  r.kl = r.mse;
  std::vector<OutcomeDistribution> targets;
  for (double v : grid) targets.push_back(mix_with_uniform(p, v));

  const std::size_t tasks = grid.size() * configs.size();
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(tasks);
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t g = t / configs.size(), k = t % configs.size();
      try {
        const auto res = train(targets[g], configs[k]);
        r.mse[g][k] = res.mse;
        r.kl[g][k] = res.kl;
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < std::max<std::size_t>(threads, 1); ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (const auto& row : r.mse) {
    const auto it = std::min_element(row.begin(), row.end());
    r.ensemble_min.push_back(*it);
    r.best_architecture.push_back(static_cast<std::size_t>(it - row.begin()));
  }
  r.knee = find_knee(r.grid, r.ensemble_min);
  return r;
}

void SweepResult::write_csv(std::ostream& os) const {
  os << "v,arch_id,layers,neurons,final_mse,final_kl\n" << std::setprecision(17);
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t k = 0; k < configs.size(); ++k)
      os << grid[g] << ',' << k << ',' << configs[k].layers << ',' << configs[k].neurons << ',' << mse[g][k] << ','
         << kl[g][k] << '\n';
}

std::string to_json(const TriangleOracle& oracle) {
  nlohmann::json j;
  j["nets"] = nlohmann::json::array();
  for (const auto& net : oracle.nets) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
      const auto& w = net.weights()[l];
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(w.cols()));
        for (Eigen::Index k = 0; k < w.cols(); ++k) row[static_cast<std::size_t>(k)] = w(i, k);
        rows.push_back(row);
      }
      const auto& b = net.biases()[l];
      layers.push_back({{"weights", rows}, {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
    }
    j["nets"].push_back({{"layers", layers}});
  }
  return j.dump();
}

}  // namespace trinet
