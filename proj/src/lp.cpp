#include "trinet/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "trinet/error.hpp"
#include "trinet/random.hpp"

namespace trinet {

SparseColumns::SparseColumns(const SparseMatrix& a) : rows_(a.rows()) {
  if (a.rows() > std::numeric_limits<std::uint32_t>::max()) throw CapacityError("too many rows for column storage");
  std::vector<std::uint64_t> count(a.cols() + 1, 0);
  for (const auto& e : a.entries()) ++count[e.col + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  start_ = count;
  row_.resize(a.nnz());
  value_.resize(a.nnz());
  auto fill = start_;
  for (const auto& e : a.entries()) {
    const auto k = fill[e.col]++;
    row_[k] = static_cast<std::uint32_t>(e.row);
    value_[k] = e.value;
  }
}

void SparseColumns::column(std::uint64_t j, ColumnEntries& out) const {
  out.clear();
  for (auto k = start_[j]; k < start_[j + 1]; ++k) out.emplace_back(row_[k], value_[k]);
}

void SparseColumns::price(std::span<const double> y, std::span<double> out) const {
  for (std::uint64_t j = 0; j + 1 < start_.size(); ++j) {
    double s = 0.0;
    for (auto k = start_[j]; k < start_[j + 1]; ++k) s += y[row_[k]] * value_[k];
    out[j] = s;
  }
}

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Feasible: return "feasible";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Ambiguous: return "numerically-ambiguous";
  }
  return "unknown";
}

namespace {

// Simplex variables: x_j (cost 0, column A_j), s_j (cost 1, column -A_j) and the residuals
// r+_i, r-_i (cost K, columns +-e_i) that keep the start basis feasible for any v.
enum class Kind : std::uint8_t { X, S, RPlus, RMinus };

struct Var {
  Kind kind;
  std::uint64_t index;  // column for X/S, row for residuals
  friend bool operator==(const Var&, const Var&) = default;
};

class Simplex {
 public:
  Simplex(const ColumnSource& a, std::span<const double> v, const LpOptions& opt)
      : a_(a), v0_(v.begin(), v.end()), v_(v.begin(), v.end()), opt_(opt), m_(a.rows()) {
    if (v.size() != m_) throw DomainError("target length does not match the row count");
    double vmax = 0.0;
    for (double x : v0_) {
      if (!std::isfinite(x)) throw DomainError("target vector is not finite");
      vmax = std::max(vmax, std::abs(x));
    }
    // Work with max|v| = 1; the dual optimum is unchanged and the primal scales linearly.
    scale_ = vmax > 0.0 ? 1.0 / vmax : 1.0;
    for (auto& x : v0_) x *= scale_;
    v_ = v0_;
    // Random right-hand-side perturbation against degenerate stalling; removed before the end.
    Rng rng(0x5eed'1e55ULL);
    std::uniform_real_distribution<double> unif(1.0, 2.0);
    for (auto& x : v_) x += (x >= 0.0 ? 1.0 : -1.0) * 1e-7 * unif(rng);

    penalty_ = opt.residual_penalty;
    per_round_ = opt.columns_per_round ? opt.columns_per_round : std::max<std::size_t>(64, m_ / 2);
    ws_limit_ = opt.working_set_limit ? opt.working_set_limit : std::max<std::size_t>(4 * per_round_, 6 * m_);
    basis_.resize(m_);
    xb_.resize(m_);
    resid_weight_.assign(2 * m_, 1.0);
    resid_basic_.assign(2 * m_, 0);
    for (std::size_t i = 0; i < m_; ++i) {
      basis_[i] = {v_[i] >= 0.0 ? Kind::RPlus : Kind::RMinus, i};
      resid_basic_[2 * i + (v_[i] >= 0.0 ? 0 : 1)] = 1;
    }
    const auto n = a.cols();
    if (n <= std::max<std::uint64_t>(ws_limit_, 4096)) {
      all_in_ws_ = true;
      for (std::uint64_t j = 0; j < n; ++j) add_to_working_set(j, false);
    }
  }

  LpResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    LpResult res;
    refactor();
    std::vector<double> q(all_in_ws_ ? 0 : a_.cols());
    for (int phase = 0; phase < 2; ++phase) {
      if (phase == 1) {
        perturbed_ = false;
        v_ = v0_;
        refactor();
      }
      while (true) {
        dual_cleanup();
        optimize_working_set();
        if (primal_infeasibility() < -kFeasTol) continue;
        ++res.pricing_rounds;
        if (all_in_ws_) break;
        a_.price(w_, q);
        if (!add_entering_columns(q)) break;
      }
    }
    compute_duals();

    const double primal_obj = objective() / scale_;
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < m_; ++i) dual_obj += w_[i] * v0_[i] / scale_;
    if (dual_obj > primal_obj + 1e-7 * (1.0 + std::abs(primal_obj)))
      throw StateError("weak duality violated: dual bound exceeds the primal objective");

    res.dual.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) res.dual[i] = -w_[i];
    res.objective = -primal_obj;

    std::vector<double> ax(m_, 0.0);
    ColumnSource::ColumnEntries col;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i].kind != Kind::X || xb_[i] <= 0.0) continue;
      const double xi = xb_[i] / scale_;
      res.primal.emplace_back(basis_[i].index, xi);
      a_.column(basis_[i].index, col);
      for (auto [r, val] : col) ax[r] += val * xi;
    }
    std::sort(res.primal.begin(), res.primal.end());
    for (std::size_t i = 0; i < m_; ++i)
      res.primal_residual = std::max(res.primal_residual, std::abs(ax[i] - v0_[i] / scale_));

    q.resize(a_.cols());
    a_.price(res.dual, q);
    if (!q.empty()) {
      const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
      res.min_reduced = *lo;
      res.max_reduced = *hi;
    }
    res.iterations = iterations_;
    res.refactorizations = refactorizations_;
    res.elapsed = std::chrono::steady_clock::now() - t0;
    return res;
  }

 private:
  struct Eta {
    std::size_t r;
    double pivot;
    std::vector<std::pair<std::uint32_t, double>> rest;  // alpha_i for i != r
  };

  double cost(const Var& x) const {
    switch (x.kind) {
      case Kind::X: return 0.0;
      case Kind::S: return 1.0;
      default: return penalty_;
    }
  }

  double objective() const {
    double obj = 0.0;
    for (std::size_t i = 0; i < m_; ++i) obj += cost(basis_[i]) * xb_[i];
    return obj;
  }

  static std::uint64_t column_hash(const ColumnSource::ColumnEntries& col) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto [r, val] : col) {
      const auto q = static_cast<std::int64_t>(std::llround(val * 1e10));
      h = mix_seed(h ^ (static_cast<std::uint64_t>(r) * 0x100000001b3ULL) ^ static_cast<std::uint64_t>(q));
    }
    return h;
  }

  bool same_column(std::size_t k, const ColumnSource::ColumnEntries& col) const {
    if (ws_start_[k + 1] - ws_start_[k] != col.size()) return false;
    for (std::size_t t = 0; t < col.size(); ++t) {
      const auto pos = ws_start_[k] + t;
      if (ws_row_[pos] != col[t].first || std::abs(ws_val_[pos] - col[t].second) > 1e-12) return false;
    }
    return true;
  }

  // Adds column j unless an identical column is already present; returns whether it was added.
  bool add_to_working_set(std::uint64_t j, bool dedupe) {
    if (local_.count(j)) return false;
    a_.column(j, scratch_);
    std::sort(scratch_.begin(), scratch_.end());
    const auto h = column_hash(scratch_);
    if (dedupe) {
      const auto [lo, hi] = signature_.equal_range(h);
      for (auto it = lo; it != hi; ++it)
        if (same_column(it->second, scratch_)) return false;
    }
    const auto k = static_cast<std::uint32_t>(ws_.size());
    local_.emplace(j, k);
    signature_.emplace(h, k);
    ws_.push_back(j);
    for (auto [r, val] : scratch_) {
      ws_row_.push_back(r);
      ws_val_.push_back(val);
    }
    ws_start_.push_back(ws_row_.size());
    ws_weight_.push_back({1.0, 1.0});
    ws_basic_.push_back({0, 0});
    return true;
  }

  void rebuild_working_set(const std::vector<std::uint64_t>& keep) {
    ws_.clear();
    local_.clear();
    signature_.clear();
    ws_row_.clear();
    ws_val_.clear();
    ws_start_.assign(1, 0);
    ws_weight_.clear();
    ws_basic_.clear();
    for (auto j : keep) add_to_working_set(j, false);
    for (const auto& b : basis_) set_basic(b, 1);
  }

  void set_basic(const Var& x, char flag) {
    switch (x.kind) {
      case Kind::RPlus: resid_basic_[2 * x.index] = flag; return;
      case Kind::RMinus: resid_basic_[2 * x.index + 1] = flag; return;
      default: break;
    }
    const auto it = local_.find(x.index);
    if (it != local_.end()) ws_basic_[it->second][x.kind == Kind::X ? 0 : 1] = flag;
  }

  double& weight(const Var& x) {
    switch (x.kind) {
      case Kind::RPlus: return resid_weight_[2 * x.index];
      case Kind::RMinus: return resid_weight_[2 * x.index + 1];
      default: break;
    }
    const auto it = local_.find(x.index);
    if (it == local_.end()) {
      dummy_weight_ = 1.0;
      return dummy_weight_;
    }
    return ws_weight_[it->second][x.kind == Kind::X ? 0 : 1];
  }

  void var_column(const Var& x, ColumnSource::ColumnEntries& out) const {
    out.clear();
    switch (x.kind) {
      case Kind::RPlus: out.emplace_back(static_cast<std::uint32_t>(x.index), 1.0); return;
      case Kind::RMinus: out.emplace_back(static_cast<std::uint32_t>(x.index), -1.0); return;
      default: break;
    }
    const double sign = x.kind == Kind::X ? 1.0 : -1.0;
    const auto it = local_.find(x.index);
    if (it != local_.end()) {
      for (auto k = ws_start_[it->second]; k < ws_start_[it->second + 1]; ++k)
        out.emplace_back(ws_row_[k], sign * ws_val_[k]);
    } else {
      a_.column(x.index, out);
      for (auto& e : out) e.second *= sign;
    }
  }

  void refactor() {
    Eigen::SparseMatrix<double> b(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    std::vector<Eigen::Triplet<double>> trip;
    ColumnSource::ColumnEntries col;
    for (std::size_t i = 0; i < m_; ++i) {
      var_column(basis_[i], col);
      for (auto [r, val] : col) trip.emplace_back(static_cast<int>(r), static_cast<int>(i), val);
    }
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    lu_.analyzePattern(b);
    lu_.factorize(b);
    if (lu_.info() != Eigen::Success) throw StateError("simplex basis became singular: " + lu_.lastErrorMessage());
    etas_.clear();
    ++refactorizations_;
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(v_.data(), static_cast<Eigen::Index>(m_));
    const Eigen::VectorXd x = lu_.solve(rhs);
    for (std::size_t i = 0; i < m_; ++i) {
      const double xi = x[static_cast<Eigen::Index>(i)];
      if (xi < 0.0 && perturbed_) {
        // Absorb the drift into the working right-hand side while it is still perturbed.
        var_column(basis_[i], col);
        for (auto [r, val] : col) v_[r] -= val * xi;
        xb_[i] = 0.0;
      } else {
        xb_[i] = xi;
      }
    }
    compute_duals();
  }

  Eigen::VectorXd ftran(const ColumnSource::ColumnEntries& col) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (auto [r, val] : col) rhs[r] += val;
    Eigen::VectorXd z = lu_.solve(rhs);
    for (const auto& e : etas_) {
      const double zr = z[static_cast<Eigen::Index>(e.r)] / e.pivot;
      z[static_cast<Eigen::Index>(e.r)] = zr;
      if (zr != 0.0)
        for (auto [i, a] : e.rest) z[i] -= a * zr;
    }
    return z;
  }

  Eigen::VectorXd btran(Eigen::VectorXd c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c[static_cast<Eigen::Index>(it->r)];
      for (auto [i, a] : it->rest) s -= a * c[i];
      c[static_cast<Eigen::Index>(it->r)] = s / it->pivot;
    }
    return lu_.transpose().solve(c);
  }

  void compute_duals() {
    Eigen::VectorXd c(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) c[static_cast<Eigen::Index>(i)] = cost(basis_[i]);
    const auto y = btran(std::move(c));
    w_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) w_[i] = y[static_cast<Eigen::Index>(i)];
  }

  Eigen::VectorXd unit_row(std::size_t r) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    e[static_cast<Eigen::Index>(r)] = 1.0;
    return btran(std::move(e));
  }

  double ws_dot(std::size_t k, const double* y) const {
    double s = 0.0;
    for (auto t = ws_start_[k]; t < ws_start_[k + 1]; ++t) s += y[ws_row_[t]] * ws_val_[t];
    return s;
  }

  struct Candidate {
    double d = 0.0;
    Var var{Kind::X, 0};
    bool found = false;
  };

  // Devex pricing: the entering variable maximizes d_j^2 / weight_j among d_j < 0.
  Candidate price_working_set(bool bland) const {
    Candidate best;
    double best_score = 0.0;
    std::uint64_t best_order = std::numeric_limits<std::uint64_t>::max();
    const double tol = opt_.optimality_tolerance;
    auto consider = [&](double d, double wt, char basic, Var x) {
      if (basic || d >= -tol) return;
      if (bland) {
        const auto order = x.index * 4 + static_cast<std::uint64_t>(x.kind);
        if (order < best_order) {
          best_order = order;
          best = {d, x, true};
        }
        return;
      }
      const double score = d * d / wt;
      if (score > best_score) {
        best_score = score;
        best = {d, x, true};
      }
    };
    for (std::size_t i = 0; i < m_; ++i) {
      consider(penalty_ - w_[i], resid_weight_[2 * i], resid_basic_[2 * i], {Kind::RPlus, i});
      consider(penalty_ + w_[i], resid_weight_[2 * i + 1], resid_basic_[2 * i + 1], {Kind::RMinus, i});
    }
    for (std::size_t k = 0; k < ws_.size(); ++k) {
      const double qj = ws_dot(k, w_.data());
      consider(-qj, ws_weight_[k][0], ws_basic_[k][0], {Kind::X, ws_[k]});
      consider(1.0 + qj, ws_weight_[k][1], ws_basic_[k][1], {Kind::S, ws_[k]});
    }
    return best;
  }

  // Pivot on row r with entering column alpha; d_q is the entering reduced cost.
  void pivot(const Var& entering, const Eigen::VectorXd& alpha, std::size_t r, double theta, double d_q,
             bool update_weights) {
    const double arq = alpha[static_cast<Eigen::Index>(r)];
    const Eigen::VectorXd rho = unit_row(r);
    if (update_weights) {
      const double wq = std::max(weight(entering), 1.0);
      double max_weight = 0.0;
      auto update = [&](double& wt, double arj) {
        const double ratio = arj / arq;
        wt = std::max(wt, ratio * ratio * wq);
        max_weight = std::max(max_weight, wt);
      };
      for (std::size_t i = 0; i < m_; ++i) {
        const double ri = rho[static_cast<Eigen::Index>(i)];
        if (ri == 0.0) continue;
        if (!resid_basic_[2 * i]) update(resid_weight_[2 * i], ri);
        if (!resid_basic_[2 * i + 1]) update(resid_weight_[2 * i + 1], -ri);
      }
      for (std::size_t k = 0; k < ws_.size(); ++k) {
        const double arj = ws_dot(k, rho.data());
        if (arj == 0.0) continue;
        if (!ws_basic_[k][0]) update(ws_weight_[k][0], arj);
        if (!ws_basic_[k][1]) update(ws_weight_[k][1], -arj);
      }
      const Var leaving = basis_[r];
      weight(leaving) = std::max(wq / (arq * arq), 1.0);
      if (max_weight > 1e6) reset_weights();
    }

    for (std::size_t i = 0; i < m_; ++i) {
      xb_[i] -= theta * alpha[static_cast<Eigen::Index>(i)];
      if (xb_[i] < 0.0 && xb_[i] > -1e-13) xb_[i] = 0.0;
    }
    xb_[r] = theta;
    set_basic(basis_[r], 0);
    basis_[r] = entering;
    set_basic(entering, 1);

    const double step = d_q / arq;
    for (std::size_t i = 0; i < m_; ++i) w_[i] += step * rho[static_cast<Eigen::Index>(i)];

    Eta eta{r, arq, {}};
    for (std::size_t i = 0; i < m_; ++i) {
      const double ai = alpha[static_cast<Eigen::Index>(i)];
      if (i != r && std::abs(ai) > 1e-14) eta.rest.emplace_back(static_cast<std::uint32_t>(i), ai);
    }
    etas_.push_back(std::move(eta));
    ++iterations_;
    if (etas_.size() >= opt_.refactor_interval) refactor();
  }

  void reset_weights() {
    std::fill(resid_weight_.begin(), resid_weight_.end(), 1.0);
    for (auto& wt : ws_weight_) wt = {1.0, 1.0};
  }

  void optimize_working_set() {
    ColumnSource::ColumnEntries col;
    std::size_t stall = 0;
    while (true) {
      if (iterations_ >= opt_.max_iterations) throw StateError("simplex iteration limit reached");
      const bool bland = stall > 200;
      auto cand = price_working_set(bland);
      if (!cand.found) {
        // Confirm against freshly computed duals before declaring optimality.
        compute_duals();
        cand = price_working_set(bland);
        if (!cand.found) return;
      }

      var_column(cand.var, col);
      const Eigen::VectorXd alpha = ftran(col);
      const double amax = alpha.cwiseAbs().maxCoeff();
      const double ptol = std::max(opt_.pivot_tolerance, 1e-9 * amax);

      // Harris two-pass ratio test.
      const double delta = 1e-9;
      double theta_max = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double ai = alpha[static_cast<Eigen::Index>(i)];
        if (ai > ptol) theta_max = std::min(theta_max, (std::max(xb_[i], 0.0) + delta) / ai);
      }
      if (!std::isfinite(theta_max)) throw StateError("simplex ray found in a bounded problem");
      std::size_t r = m_;
      double best_alpha = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double ai = alpha[static_cast<Eigen::Index>(i)];
        if (ai > ptol && std::max(xb_[i], 0.0) / ai <= theta_max) {
          const bool better = bland ? (r == m_ || order(basis_[i]) < order(basis_[r])) : ai > best_alpha;
          if (better) {
            r = i;
            best_alpha = ai;
          }
        }
      }
      const double theta = std::max(0.0, xb_[r] / alpha[static_cast<Eigen::Index>(r)]);
      if (theta * std::abs(cand.d) <= 1e-14) ++stall;
      else stall = 0;
      pivot(cand.var, alpha, r, theta, cand.d, !bland);

      if (opt_.verbose && iterations_ % 5000 == 0)
        std::cerr << "simplex: iteration " << iterations_ << " objective " << objective() << " working set "
                  << ws_.size() << '\n';
    }
  }

  double primal_infeasibility() const { return *std::min_element(xb_.begin(), xb_.end()); }

  static std::uint64_t order(const Var& x) { return x.index * 4 + static_cast<std::uint64_t>(x.kind); }

  // Dual simplex passes restoring x_B >= 0 after the perturbation is removed; reduced costs stay
  // nonnegative throughout.
  void dual_cleanup() {
    ColumnSource::ColumnEntries col;
    while (true) {
      if (iterations_ >= opt_.max_iterations) throw StateError("simplex iteration limit reached");
      std::size_t r = m_;
      double worst = -kFeasTol;
      for (std::size_t i = 0; i < m_; ++i)
        if (xb_[i] < worst) {
          worst = xb_[i];
          r = i;
        }
      if (r == m_) break;
      const Eigen::VectorXd rho = unit_row(r);

      double best_ratio = std::numeric_limits<double>::infinity(), best_abs = 0.0, best_d = 0.0;
      Var entering{Kind::X, 0};
      bool found = false;
      auto consider = [&](double d, double arj, char basic, Var x) {
        if (basic || arj >= -opt_.pivot_tolerance) return;
        const double ratio = std::max(d, 0.0) / -arj;
        if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && -arj > best_abs)) {
          best_ratio = ratio;
          best_abs = -arj;
          best_d = d;
          entering = x;
          found = true;
        }
      };
      for (std::size_t i = 0; i < m_; ++i) {
        const double ri = rho[static_cast<Eigen::Index>(i)];
        consider(penalty_ - w_[i], ri, resid_basic_[2 * i], {Kind::RPlus, i});
        consider(penalty_ + w_[i], -ri, resid_basic_[2 * i + 1], {Kind::RMinus, i});
      }
      for (std::size_t k = 0; k < ws_.size(); ++k) {
        const double qj = ws_dot(k, w_.data());
        const double aj = ws_dot(k, rho.data());
        consider(-qj, aj, ws_basic_[k][0], {Kind::X, ws_[k]});
        consider(1.0 + qj, -aj, ws_basic_[k][1], {Kind::S, ws_[k]});
      }
      if (!found) throw StateError("dual simplex found no entering variable");
      var_column(entering, col);
      const Eigen::VectorXd alpha = ftran(col);
      pivot(entering, alpha, r, xb_[r] / alpha[static_cast<Eigen::Index>(r)], best_d, false);
    }
  }

  bool add_entering_columns(const std::vector<double>& q) {
    std::vector<std::pair<double, std::uint64_t>> cand;
    for (std::uint64_t j = 0; j < q.size(); ++j) {
      const double d = std::min(-q[j], 1.0 + q[j]);
      if (d < -opt_.optimality_tolerance && !local_.count(j)) cand.emplace_back(d, j);
    }
    if (cand.empty()) return false;
    std::sort(cand.begin(), cand.end());
    if (ws_.size() + per_round_ > ws_limit_) prune_working_set(q);
    std::size_t added = 0;
    for (const auto& c : cand) {
      if (added >= per_round_) break;
      if (add_to_working_set(c.second, true)) ++added;
    }
    if (opt_.verbose)
      std::cerr << "simplex: pricing added " << added << " of " << cand.size() << " candidates (working set "
                << ws_.size() << ", objective " << objective() << ")\n";
    return added > 0;
  }

  void prune_working_set(const std::vector<double>& q) {
    std::vector<std::uint64_t> basic;
    for (const auto& b : basis_)
      if (b.kind == Kind::X || b.kind == Kind::S) basic.push_back(b.index);
    std::sort(basic.begin(), basic.end());
    basic.erase(std::unique(basic.begin(), basic.end()), basic.end());
    std::vector<std::pair<double, std::uint64_t>> rest;
    for (auto j : ws_)
      if (!std::binary_search(basic.begin(), basic.end(), j)) rest.emplace_back(std::min(-q[j], 1.0 + q[j]), j);
    const std::size_t target = ws_limit_ / 2;
    const std::size_t room = target > basic.size() ? target - basic.size() : 0;
    if (rest.size() > room) {
      std::nth_element(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(room), rest.end());
      rest.resize(room);
    }
    for (const auto& k : rest) basic.push_back(k.second);
    rebuild_working_set(basic);
  }

  static constexpr double kFeasTol = 1e-11;

  const ColumnSource& a_;
  double scale_ = 1.0;
  bool perturbed_ = true;
  std::vector<double> v0_;
  std::vector<double> v_;
  LpOptions opt_;
  std::size_t m_;
  double penalty_ = 1e3;
  std::size_t per_round_ = 0;
  std::size_t ws_limit_ = 0;
  bool all_in_ws_ = false;

  std::vector<std::uint64_t> ws_;
  std::unordered_map<std::uint64_t, std::uint32_t> local_;
  std::unordered_multimap<std::uint64_t, std::uint32_t> signature_;
  std::vector<std::uint64_t> ws_start_{0};
  std::vector<std::uint32_t> ws_row_;
  std::vector<double> ws_val_;
  std::vector<std::array<double, 2>> ws_weight_;
  std::vector<std::array<char, 2>> ws_basic_;
  std::vector<double> resid_weight_;
  std::vector<char> resid_basic_;
  double dummy_weight_ = 1.0;
  ColumnSource::ColumnEntries scratch_;

  std::vector<Var> basis_;
  std::vector<double> xb_;
  std::vector<double> w_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  std::size_t iterations_ = 0;
  std::size_t refactorizations_ = 0;
};

void classify(LpResult& res, const LpOptions& opt) {
  if (res.objective >= -opt.feasibility_tolerance)
    res.status = res.primal_residual <= 1e-8 ? LpStatus::Feasible : LpStatus::Ambiguous;
  else if (res.objective < -opt.infeasibility_threshold)
    res.status = LpStatus::Infeasible;
  else
    res.status = LpStatus::Ambiguous;
}

}  // namespace

LpResult solve_feasibility(const ColumnSource& a, std::span<const double> v, const LpOptions& options) {
  auto res = Simplex(a, v, options).run();
  classify(res, options);
  if (res.status == LpStatus::Ambiguous && options.rescale_ambiguous) {
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    if (vmax > 0.0) {
      std::vector<double> scaled(v.begin(), v.end());
      for (auto& x : scaled) x /= vmax;
      auto tight = options;
      tight.refactor_interval = std::max<std::size_t>(1, options.refactor_interval / 4);
      tight.optimality_tolerance = options.optimality_tolerance * 1e-2;
      tight.pivot_tolerance = options.pivot_tolerance * 1e-1;
      auto again = Simplex(a, scaled, tight).run();
      again.objective *= vmax;
      for (auto& p : again.primal) p.second *= vmax;
      again.primal_residual *= vmax;
      again.iterations += res.iterations;
      again.refactorizations += res.refactorizations;
      again.pricing_rounds += res.pricing_rounds;
      again.elapsed += res.elapsed;
      again.rescaled = true;
      classify(again, options);
      return again;
    }
  }
  return res;
}

LpResult solve_feasibility(const SparseMatrix& a, std::span<const double> v, const LpOptions& options) {
  return solve_feasibility(SparseColumns(a), v, options);
}

FarkasCertificate extract_certificate(const ColumnSource& a, std::span<const double> v, const LpResult& result) {
  if (result.status != LpStatus::Infeasible) throw StateError("certificate requested for a solve that is not infeasible");
  if (result.dual.size() != a.rows() || v.size() != a.rows()) throw DomainError("certificate dimensions do not match");
  FarkasCertificate cert;
  cert.y = result.dual;
  std::vector<double> q(a.cols());
  auto min_slack = [&] {
    a.price(cert.y, q);
    return q.empty() ? 0.0 : *std::min_element(q.begin(), q.end());
  };
  cert.min_slack = min_slack();
  if (const auto u = a.unit_direction()) {
    for (int attempt = 0; attempt < 4 && cert.min_slack < 0.0; ++attempt) {
      const double t = -cert.min_slack * (1.0 + 1e-6) + 1e-15;
      for (std::size_t i = 0; i < cert.y.size(); ++i) cert.y[i] += t * (*u)[i];
      cert.min_slack = min_slack();
    }
  }
  double yv = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) yv += cert.y[i] * v[i];
  cert.margin = -yv;
  if (!(cert.margin > 0.0)) throw StateError("certificate has no separating margin");
  return cert;
}

FarkasCertificate extract_certificate(const SparseMatrix& a, std::span<const double> v, const LpOptions& options) {
  const SparseColumns cols(a);
  const auto res = solve_feasibility(cols, v, options);
  return extract_certificate(cols, v, res);
}

bool verify_certificate(std::span<const double> y, const SparseMatrix& a, std::span<const double> v, double tol) {
  if (y.size() != a.rows() || v.size() != a.rows()) return false;
  const auto q = a.left_multiply(y);
  for (double x : q)
    if (!(x >= -tol)) return false;
  double yv = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) yv += y[i] * v[i];
  return yv < 0.0;
}

}  // namespace trinet
