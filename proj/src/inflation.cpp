#include "trinet/inflation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "trinet/error.hpp"

namespace trinet {

namespace {

std::uint64_t ipow(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / base) throw CapacityError("index space overflows 64 bits");
    r *= base;
  }
  return r;
}

SlotPermutation compose(const SlotPermutation& g, const SlotPermutation& h) {
  SlotPermutation out{};
  for (std::size_t k = 0; k < kInflationSlots; ++k) out[k] = g[h[k]];
  return out;
}

SlotPermutation invert(const SlotPermutation& g) {
  SlotPermutation out{};
  for (std::size_t k = 0; k < kInflationSlots; ++k) out[g[k]] = static_cast<std::uint8_t>(k);
  return out;
}

SlotPermutation identity_slots() {
  SlotPermutation id{};
  std::iota(id.begin(), id.end(), std::uint8_t{0});
  return id;
}

// For element g, the slot whose value lands on marginal position i.
std::array<std::uint8_t, 6> marginal_sources(const SlotPermutation& g) {
  const auto inv = invert(g);
  std::array<std::uint8_t, 6> src{};
  for (std::size_t i = 0; i < 6; ++i) src[i] = inv[kMarginalSlots[i]];
  return src;
}

struct UnionFind {
  std::vector<std::uint64_t> parent;
  explicit UnionFind(std::uint64_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::uint64_t{0}); }
  std::uint64_t find(std::uint64_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint64_t a, std::uint64_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
  std::vector<std::uint64_t> labels() {
    std::vector<std::uint64_t> out(parent.size());
    for (std::uint64_t i = 0; i < parent.size(); ++i) out[i] = find(i);
    return out;
  }
};

void check_capacity(std::uint64_t joint_size, std::uint64_t capacity, std::string_view what) {
  if (joint_size > capacity) {
    std::ostringstream os;
    os << what << ": joint space of " << joint_size << " assignments exceeds the capacity limit of " << capacity
       << " (raise the limit explicitly to proceed)";
    throw CapacityError(os.str());
  }
}

}  // namespace

const std::array<InflationSlot, kInflationSlots>& inflation_slots() {
  // Copy k of party X reads the source copies listed here, in sources_of(X) order.
  static const std::array<InflationSlot, kInflationSlots> slots = [] {
    const std::array<std::array<std::uint8_t, 2>, 4> a_copies{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};
    const std::array<std::array<std::uint8_t, 2>, 4> b_copies{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
    const std::array<std::array<std::uint8_t, 2>, 4> c_copies{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};
    std::array<InflationSlot, kInflationSlots> s{};
    for (std::size_t k = 0; k < 4; ++k) {
      s[3 * k + 0] = {Party::A, a_copies[k]};
      s[3 * k + 1] = {Party::B, b_copies[k]};
      s[3 * k + 2] = {Party::C, c_copies[k]};
    }
    return s;
  }();
  return slots;
}

std::string slot_name(std::size_t slot) {
  static constexpr char letters[3] = {'a', 'b', 'c'};
  return std::string(1, letters[slot % 3]) + std::to_string(slot / 3 + 1);
}

InflationProblem::InflationProblem(std::uint32_t d) : d_(d) {
  if (d < 2) throw DomainError("outcome cardinality must be at least 2");
  joint_size_ = ipow(d, kInflationSlots);
  const auto m = ipow(d, 6);
  if (m > std::numeric_limits<std::uint32_t>::max()) throw CapacityError("marginal index space exceeds 32 bits");
  marginal_size_ = static_cast<std::uint32_t>(m);
  for (std::size_t k = 0; k < kInflationSlots; ++k) place_[k] = ipow(d, static_cast<unsigned>(kInflationSlots - 1 - k));

  const auto gens = generators();
  for (unsigned mask = 0; mask < 8; ++mask) {
    auto g = identity_slots();
    for (unsigned b = 0; b < 3; ++b)
      if (mask >> b & 1u) g = compose(gens[b], g);
    InflationSymmetry sym{g, std::nullopt};
    std::array<std::uint8_t, 6> h{};
    bool stabilizes = true;
    for (std::size_t i = 0; i < 6 && stabilizes; ++i) {
      const auto it = std::find(kMarginalSlots.begin(), kMarginalSlots.end(), g[kMarginalSlots[i]]);
      if (it == kMarginalSlots.end()) stabilizes = false;
      else h[i] = static_cast<std::uint8_t>(it - kMarginalSlots.begin());
    }
    if (stabilizes) sym.marginal = h;
    group_.push_back(sym);
  }
}

std::array<SlotPermutation, 3> InflationProblem::generators() {
  const auto& slots = inflation_slots();
  std::array<SlotPermutation, 3> gens{};
  for (auto s : kSources) {
    SlotPermutation g{};
    for (std::size_t k = 0; k < kInflationSlots; ++k) {
      auto target = slots[k];
      const auto srcs = sources_of(target.party);
      for (std::size_t t = 0; t < 2; ++t)
        if (srcs[t] == s) target.copies[t] ^= 1u;
      for (std::size_t k2 = 0; k2 < kInflationSlots; ++k2)
        if (slots[k2].party == target.party && slots[k2].copies == target.copies) g[k] = static_cast<std::uint8_t>(k2);
    }
    gens[index(s)] = g;
  }
  return gens;
}

std::uint64_t InflationProblem::apply(const SlotPermutation& g, std::uint64_t joint) const {
  std::uint64_t out = 0;
  for (std::size_t k = kInflationSlots; k-- > 0;) {
    out += (joint % d_) * place_[g[k]];
    joint /= d_;
  }
  return out;
}

std::uint32_t InflationProblem::apply_marginal(const std::array<std::uint8_t, 6>& h, std::uint32_t row) const {
  std::uint32_t out = 0;
  for (std::size_t i = 6; i-- > 0;) {
    out += (row % d_) * static_cast<std::uint32_t>(place_[6 + h[i]]);
    row /= d_;
  }
  return out;
}

std::uint32_t InflationProblem::marginal_row(std::uint64_t joint) const {
  std::array<std::uint32_t, kInflationSlots> x{};
  for (std::size_t k = kInflationSlots; k-- > 0;) {
    x[k] = static_cast<std::uint32_t>(joint % d_);
    joint /= d_;
  }
  std::uint32_t row = 0;
  for (auto s : kMarginalSlots) row = row * d_ + x[s];
  return row;
}

SparseMatrix build_marginalization_matrix(std::uint32_t d, std::uint64_t capacity) {
  const InflationProblem problem(d);
  check_capacity(problem.joint_size(), capacity, "marginalization matrix");
  std::vector<SparseMatrix::Entry> entries;
  entries.reserve(problem.joint_size());
  for (std::uint64_t j = 0; j < problem.joint_size(); ++j) entries.push_back({problem.marginal_row(j), j, 1.0});
  return SparseMatrix(problem.marginal_size(), problem.joint_size(), std::move(entries));
}

std::vector<SymmetryPair> build_symmetry_group(std::uint32_t d, std::uint64_t capacity) {
  const InflationProblem problem(d);
  check_capacity(problem.joint_size(), capacity, "symmetry group");
  std::vector<SymmetryPair> out;
  for (const auto& g : problem.group()) {
    std::vector<std::uint64_t> image(problem.joint_size());
    for (std::uint64_t j = 0; j < problem.joint_size(); ++j) image[j] = problem.apply(g.slots, j);
    std::optional<IndexPermutation> marginal;
    if (g.marginal) {
      std::vector<std::uint64_t> rows(problem.marginal_size());
      for (std::uint32_t r = 0; r < problem.marginal_size(); ++r) rows[r] = problem.apply_marginal(*g.marginal, r);
      marginal = IndexPermutation(std::move(rows));
    }
    out.push_back({IndexPermutation(std::move(image)), std::move(marginal)});
  }
  return out;
}

Partition Partition::from_labels(std::span<const std::uint64_t> labels) {
  Partition p;
  p.class_of.resize(labels.size());
  std::unordered_map<std::uint64_t, std::uint32_t> id;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = id.try_emplace(labels[i], static_cast<std::uint32_t>(p.sizes.size()));
    if (inserted) p.sizes.push_back(0);
    p.class_of[i] = it->second;
    ++p.sizes[it->second];
  }
  return p;
}

Partition orbit_partition(std::span<const IndexPermutation> perms, std::uint64_t n) {
  UnionFind uf(n);
  for (const auto& g : perms) {
    if (g.size() != n) throw DomainError("permutation does not act on the partitioned space");
    for (std::uint64_t i = 0; i < n; ++i) uf.unite(i, g(i));
  }
  const auto labels = uf.labels();
  return Partition::from_labels(labels);
}

namespace {

std::pair<Partition, Partition> row_col_orbits(const SparseMatrix& m, std::span<const SymmetryPair> group) {
  std::vector<IndexPermutation> rows, cols;
  for (const auto& g : group) {
    cols.push_back(g.joint);
    if (g.marginal) rows.push_back(*g.marginal);
  }
  return {orbit_partition(rows, m.rows()), orbit_partition(cols, m.cols())};
}

}  // namespace

SparseMatrix twirl(const SparseMatrix& m, std::span<const SymmetryPair> group) {
  const auto [rp, cp] = row_col_orbits(m, group);
  std::vector<SparseMatrix::Entry> out;
  out.reserve(m.nnz());
  for (const auto& e : m.entries()) {
    const auto r = rp.class_of[e.row], c = cp.class_of[e.col];
    out.push_back({r, c, e.value / (static_cast<double>(rp.sizes[r]) * cp.sizes[c])});
  }
  return SparseMatrix(rp.count(), cp.count(), std::move(out));
}

SparseMatrix symmetrize(const SparseMatrix& m, std::span<const SymmetryPair> group) {
  std::vector<const SymmetryPair*> paired;
  for (const auto& g : group)
    if (g.marginal) paired.push_back(&g);
  if (paired.empty()) throw DomainError("group has no element with a marginal action");
  std::vector<SparseMatrix::Entry> out;
  out.reserve(m.nnz() * paired.size());
  const double w = 1.0 / static_cast<double>(paired.size());
  for (const auto& e : m.entries())
    for (const auto* g : paired) out.push_back({(*g->marginal)(e.row), g->joint(e.col), e.value * w});
  return SparseMatrix(m.rows(), m.cols(), std::move(out));
}

SparseMatrix symmetrize_columns(const SparseMatrix& m, std::span<const SymmetryPair> group) {
  std::vector<SparseMatrix::Entry> out;
  out.reserve(m.nnz() * group.size());
  const double w = 1.0 / static_cast<double>(group.size());
  for (const auto& e : m.entries())
    for (const auto& g : group) out.push_back({e.row, g.joint(e.col), e.value * w});
  return SparseMatrix(m.rows(), m.cols(), std::move(out));
}

ColumnOrbits::ColumnOrbits(const InflationProblem& problem, bool keep_joint_map) {
  const auto d = problem.d();
  const auto n = problem.joint_size();
  if (n > std::numeric_limits<std::uint32_t>::max() * std::uint64_t{8})
    throw CapacityError("orbit enumeration exceeds 32-bit orbit indexing");
  const auto& group = problem.group();
  const std::size_t ng = group.size();

  std::array<std::uint64_t, kInflationSlots> place{};
  for (std::size_t k = 0; k < kInflationSlots; ++k) place[k] = ipow(d, static_cast<unsigned>(kInflationSlots - 1 - k));

  // Image of j under g is sum_k x_k * place[g[k]]; when the odometer bumps digit k and clears
  // the digits after it, every image moves by delta[g][k].
  std::vector<std::array<std::int64_t, kInflationSlots>> delta(ng);
  std::vector<std::array<std::uint8_t, 6>> msrc(ng);
  for (std::size_t e = 0; e < ng; ++e) {
    const auto& g = group[e].slots;
    for (std::size_t k = 0; k < kInflationSlots; ++k) {
      std::int64_t dl = static_cast<std::int64_t>(place[g[k]]);
      for (std::size_t l = k + 1; l < kInflationSlots; ++l) dl -= static_cast<std::int64_t>((d - 1) * place[g[l]]);
      delta[e][k] = dl;
    }
    msrc[e] = marginal_sources(g);
  }

  representative_.reserve(n / ng + n / 64 + 16);
  offset_.reserve(n / ng + n / 64 + 17);
  member_row_.reserve(n + n / 16);
  offset_.push_back(0);
  if (keep_joint_map) orbit_of_.resize(n);

  std::array<std::uint32_t, kInflationSlots> x{};
  std::vector<std::uint64_t> img(ng, 0);
  std::array<std::pair<std::uint64_t, std::uint32_t>, 8> members{};
  for (std::uint64_t j = 0; j < n; ++j) {
    std::size_t smaller = ng;
    for (std::size_t e = 1; e < ng; ++e)
      if (img[e] < j) {
        smaller = e;
        break;
      }
    if (smaller == ng) {
      std::size_t cnt = 0;
      for (std::size_t e = 0; e < ng; ++e) {
        std::uint32_t row = 0;
        for (auto s : msrc[e]) row = row * d + x[s];
        members[cnt++] = {img[e], row};
      }
      std::sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(cnt));
      const auto end = std::unique(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(cnt),
                                   [](const auto& a, const auto& b) { return a.first == b.first; });
      for (auto it = members.begin(); it != end; ++it) member_row_.push_back(it->second);
      if (keep_joint_map) orbit_of_[j] = static_cast<std::uint32_t>(representative_.size());
      representative_.push_back(j);
      offset_.push_back(static_cast<std::uint32_t>(member_row_.size()));
    } else if (keep_joint_map) {
      orbit_of_[j] = orbit_of_[img[smaller]];
    }
    if (j + 1 == n) break;
    std::size_t k = kInflationSlots - 1;
    while (x[k] == d - 1) {
      x[k] = 0;
      --k;
    }
    ++x[k];
    for (std::size_t e = 0; e < ng; ++e) img[e] = static_cast<std::uint64_t>(static_cast<std::int64_t>(img[e]) + delta[e][k]);
  }
  representative_.shrink_to_fit();
  offset_.shrink_to_fit();
  member_row_.shrink_to_fit();
}

std::uint32_t apply(const RowSymmetry& h, std::uint32_t row, std::uint32_t d) {
  std::array<std::uint32_t, 6> x{};
  for (std::size_t i = 6; i-- > 0;) {
    x[i] = row % d;
    row /= d;
  }
  std::uint32_t out = 0;
  for (std::size_t i = 0; i < 6; ++i) out = out * d + h.relabel[i * d + x[h.source[i]]];
  return out;
}

namespace {

std::vector<std::uint8_t> identity_relabel(std::uint32_t d) {
  std::vector<std::uint8_t> r(6 * d);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::uint32_t x = 0; x < d; ++x) r[i * d + x] = static_cast<std::uint8_t>(x);
  return r;
}

}  // namespace

std::vector<RowSymmetry> identity_row_group(std::uint32_t d) {
  return {RowSymmetry{{0, 1, 2, 3, 4, 5}, identity_relabel(d)}};
}

std::vector<RowSymmetry> inflation_row_group(std::uint32_t d) {
  return {RowSymmetry{{0, 1, 2, 3, 4, 5}, identity_relabel(d)}, RowSymmetry{{3, 4, 5, 0, 1, 2}, identity_relabel(d)}};
}

std::vector<RowSymmetry> extended_row_group(std::uint32_t d) {
  if (d > 255) throw CapacityError("outcome cardinality too large for relabelling tables");
  std::vector<std::vector<std::uint8_t>> relabels;
  std::vector<std::uint8_t> perm(d);
  std::iota(perm.begin(), perm.end(), std::uint8_t{0});
  if (d <= 4) {
    do relabels.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    relabels.push_back(perm);
  }

  std::vector<RowSymmetry> out;
  std::array<std::uint8_t, 3> rho{0, 1, 2};
  for (unsigned swap = 0; swap < 2; ++swap) {
    std::sort(rho.begin(), rho.end());
    do {
      std::array<std::uint8_t, 3> rho_inv{};
      for (std::uint8_t p = 0; p < 3; ++p) rho_inv[rho[p]] = p;
      for (const auto& ta : relabels)
        for (const auto& tb : relabels)
          for (const auto& tc : relabels) {
            const std::array<const std::vector<std::uint8_t>*, 3> tau{&ta, &tb, &tc};
            RowSymmetry h{{}, std::vector<std::uint8_t>(6 * d)};
            for (std::size_t i = 0; i < 6; ++i) {
              const std::size_t copy = i / 3, party = i % 3;
              const std::size_t src_party = rho_inv[party];
              h.source[i] = static_cast<std::uint8_t>(3 * (copy ^ swap) + src_party);
              for (std::uint32_t x = 0; x < d; ++x) h.relabel[i * d + x] = (*tau[src_party])[x];
            }
            out.push_back(std::move(h));
          }
    } while (std::next_permutation(rho.begin(), rho.end()));
  }
  return out;
}

CoefficientClasses coefficient_classes(std::span<const double> seed, double tolerance,
                                       std::span<const RowSymmetry> group, std::uint32_t d) {
  if (!(tolerance >= 0.0)) throw DomainError("coefficient class tolerance must be nonnegative");
  const std::uint32_t n = static_cast<std::uint32_t>(ipow(d, 6));
  if (seed.size() != n) throw DomainError("seed vector length must be d^6");

  std::vector<std::array<std::uint8_t, 6>> digits(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    std::uint32_t t = r;
    for (std::size_t i = 6; i-- > 0;) {
      digits[r][i] = static_cast<std::uint8_t>(t % d);
      t /= d;
    }
  }
  std::array<std::uint32_t, 6> place{};
  for (std::size_t i = 0; i < 6; ++i) place[i] = static_cast<std::uint32_t>(ipow(d, static_cast<unsigned>(5 - i)));

  UnionFind uf(n);
  std::vector<std::uint32_t> image(n);
  std::size_t stabilizer = 0;
  for (const auto& h : group) {
    if (h.relabel.size() != 6u * d) throw DomainError("row symmetry does not match the outcome cardinality");
    bool fixes = true;
    for (std::uint32_t r = 0; r < n && fixes; ++r) {
      std::uint32_t out = 0;
      for (std::size_t i = 0; i < 6; ++i) out += h.relabel[i * d + digits[r][h.source[i]]] * place[i];
      image[r] = out;
      fixes = std::abs(seed[out] - seed[r]) <= tolerance;
    }
    if (!fixes) continue;
    ++stabilizer;
    for (std::uint32_t r = 0; r < n; ++r) uf.unite(r, image[r]);
  }

  // With a positive tolerance, chains of near-equal values can drift; split such classes so
  // every class spans at most `tolerance`.
  auto labels = uf.labels();
  if (tolerance > 0.0) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return labels[a] != labels[b] ? labels[a] < labels[b] : (seed[a] != seed[b] ? seed[a] < seed[b] : a < b);
    });
    std::uint64_t next = n;
    double base = 0.0;
    std::uint64_t current_label = std::numeric_limits<std::uint64_t>::max(), current_sub = 0;
    std::vector<std::uint64_t> refined(n);
    for (auto r : order) {
      if (labels[r] != current_label || seed[r] - base > tolerance) {
        current_label = labels[r];
        base = seed[r];
        current_sub = next++;
      }
      refined[r] = current_sub;
    }
    labels = std::move(refined);
  }
  return {Partition::from_labels(labels), tolerance, stabilizer};
}

std::string_view to_string(LpMode m) {
  switch (m) {
    case LpMode::Full: return "full";
    case LpMode::Twirled: return "twirled";
    case LpMode::Adapted: return "adapted";
  }
  return "unknown";
}

LpMode lp_mode_from_string(std::string_view s) {
  if (s == "full") return LpMode::Full;
  if (s == "twirled") return LpMode::Twirled;
  if (s == "adapted") return LpMode::Adapted;
  throw DomainError("unknown LP mode '" + std::string(s) + "'");
}

InflationLp::InflationLp(LpMode mode, std::uint32_t d, Partition rows, std::vector<double> marginal_target,
                         std::shared_ptr<const ColumnOrbits> orbits, bool per_joint_columns)
    : mode_(mode),
      d_(d),
      rows_(std::move(rows)),
      marginal_target_(std::move(marginal_target)),
      orbits_(std::move(orbits)),
      per_joint_columns_(per_joint_columns) {
  if (rows_.class_of.size() != marginal_target_.size()) throw DomainError("row partition does not match the target");
  if (per_joint_columns_ && !orbits_->has_joint_map()) throw DomainError("full mode needs the joint-to-orbit map");
  target_.assign(rows_.count(), 0.0);
  for (std::size_t r = 0; r < marginal_target_.size(); ++r) target_[rows_.class_of[r]] += marginal_target_[r];
  for (std::size_t c = 0; c < target_.size(); ++c) target_[c] /= rows_.sizes[c];
}

std::uint64_t InflationLp::cols() const {
  if (per_joint_columns_) return orbits_->has_joint_map() ? ipow(d_, kInflationSlots) : 0;
  return orbits_->count();
}

void InflationLp::column(std::uint64_t j, ColumnEntries& out) const {
  out.clear();
  const std::size_t k = per_joint_columns_ ? orbits_->orbit_of(j) : j;
  const auto rows = orbits_->member_rows(k);
  const double w = 1.0 / static_cast<double>(rows.size());
  for (auto r : rows) {
    const auto c = rows_.class_of[r];
    const double v = w / rows_.sizes[c];
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == c; });
    if (it == out.end()) out.emplace_back(c, v);
    else it->second += v;
  }
  std::sort(out.begin(), out.end());
}

void InflationLp::price(std::span<const double> y, std::span<double> out) const {
  std::vector<double> w(rows_.class_of.size());
  for (std::size_t r = 0; r < w.size(); ++r) w[r] = y[rows_.class_of[r]] / rows_.sizes[rows_.class_of[r]];
  const std::size_t norb = orbits_->count();
  std::vector<double> orbit_value(per_joint_columns_ ? norb : 0);
  std::span<double> dest = per_joint_columns_ ? std::span<double>(orbit_value) : out;
  for (std::size_t k = 0; k < norb; ++k) {
    const auto rows = orbits_->member_rows(k);
    double s = 0.0;
    for (auto r : rows) s += w[r];
    dest[k] = s / static_cast<double>(rows.size());
  }
  if (per_joint_columns_)
    for (std::uint64_t j = 0; j < out.size(); ++j) out[j] = orbit_value[orbits_->orbit_of(j)];
}

std::optional<std::vector<double>> InflationLp::unit_direction() const {
  std::vector<double> u(rows_.count());
  for (std::size_t c = 0; c < u.size(); ++c) u[c] = rows_.sizes[c];
  return u;
}

SparseMatrix InflationLp::materialize(std::uint64_t capacity) const {
  check_capacity(cols(), capacity, "materialized LP matrix");
  std::vector<SparseMatrix::Entry> entries;
  ColumnEntries col;
  for (std::uint64_t j = 0; j < cols(); ++j) {
    column(j, col);
    for (auto [r, v] : col) entries.push_back({r, j, v});
  }
  return SparseMatrix(rows(), cols(), std::move(entries));
}

std::vector<double> InflationLp::detwirl(std::span<const double> z) const {
  if (z.size() != rows()) throw DomainError("class coefficient vector has the wrong length");
  std::vector<double> y(rows_.class_of.size());
  for (std::size_t r = 0; r < y.size(); ++r) y[r] = z[rows_.class_of[r]] / rows_.sizes[rows_.class_of[r]];
  return y;
}

std::vector<double> marginal_target(const OutcomeDistribution& p, std::uint32_t d) {
  const auto& vars = p.variables();
  if (vars.size() != 3 || std::any_of(vars.begin(), vars.end(), [&](const Variable& v) { return v.cardinality != d; }))
    throw DomainError("distribution must have three variables of cardinality " + std::to_string(d));
  const std::size_t n = p.size();
  std::vector<double> v(n * n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) v[x * n + y] = p[x] * p[y];
  return v;
}

InflationLp assemble_lp(const InflationProblem& problem, const OutcomeDistribution& p, LpMode mode,
                        const AssembleOptions& options) {
  if (mode == LpMode::Full && !options.allow_large)
    check_capacity(problem.joint_size(), kDefaultJointCapacity, "full-mode LP");
  auto orbits = std::make_shared<const ColumnOrbits>(problem, mode == LpMode::Full);
  return assemble_lp(problem, std::move(orbits), p, mode, options);
}

InflationLp assemble_lp(const InflationProblem& problem, std::shared_ptr<const ColumnOrbits> orbits,
                        const OutcomeDistribution& p, LpMode mode, const AssembleOptions& options) {
  const auto d = problem.d();
  auto v = marginal_target(p, d);
  if (mode == LpMode::Full && !options.allow_large)
    check_capacity(problem.joint_size(), kDefaultJointCapacity, "full-mode LP");
  Partition rows;
  switch (mode) {
    case LpMode::Full: {
      std::vector<std::uint64_t> labels(v.size());
      std::iota(labels.begin(), labels.end(), std::uint64_t{0});
      rows = Partition::from_labels(labels);
      break;
    }
    case LpMode::Twirled: {
      const auto g = inflation_row_group(d);
      std::vector<double> zero(v.size(), 0.0);
      rows = coefficient_classes(zero, 0.0, g, d).classes;
      break;
    }
    case LpMode::Adapted: {
      const auto& seed = options.seed ? *options.seed : v;
      const auto g = extended_row_group(d);
      rows = coefficient_classes(seed, options.tolerance, g, d).classes;
      break;
    }
  }
  return InflationLp(mode, d, std::move(rows), std::move(v), std::move(orbits), mode == LpMode::Full);
}

double min_inflation_slack(std::span<const double> y, std::uint32_t d) {
  const InflationProblem problem(d);
  if (y.size() != problem.marginal_size()) throw DomainError("coefficient vector must have length d^6");
  std::vector<std::array<std::uint8_t, 6>> src;
  for (const auto& g : problem.group()) src.push_back(marginal_sources(g.slots));
  const double w = 1.0 / static_cast<double>(src.size());
  std::array<std::uint32_t, kInflationSlots> x{};
  double min_slack = std::numeric_limits<double>::infinity();
  const auto n = problem.joint_size();
  for (std::uint64_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (const auto& m : src) {
      std::uint32_t row = 0;
      for (auto k : m) row = row * d + x[k];
      s += y[row];
    }
    min_slack = std::min(min_slack, s * w);
    if (j + 1 == n) break;
    std::size_t k = kInflationSlots - 1;
    while (x[k] == d - 1) x[k--] = 0;
    ++x[k];
  }
  return min_slack;
}

}  // namespace trinet
