#include "wproj/measures.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_map>

#include "wproj/rng.hpp"

namespace wproj {

namespace {

// Canonical 64-bit pattern of a finite double: -0.0 folds to +0.0 so the two
// representations of zero land in the same atom.
std::uint64_t canonical_bits(double x) {
  if (x == 0.0) x = 0.0;
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof(b));
  return b;
}

struct CoordKey {
  std::vector<std::uint64_t> bits;
  bool operator==(const CoordKey& o) const { return bits == o.bits; }
};

struct CoordKeyHash {
  std::size_t operator()(const CoordKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint64_t b : k.bits) {
      h ^= b;
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

CoordKey key_of(std::span<const double> coords) {
  CoordKey k;
  k.bits.reserve(coords.size());
  for (double c : coords) k.bits.push_back(canonical_bits(c));
  return k;
}

}  // namespace

void MetricSpec::validate() const {
  if (!(p >= 1.0) && !std::isinf(p)) {
    throw InputError("MetricSpec: exponent p must satisfy p >= 1 or p = inf");
  }
  if (std::isnan(p)) throw InputError("MetricSpec: p is NaN");
  if (block_dims.empty()) throw InputError("MetricSpec: block_dims is empty");
  for (int d : block_dims) {
    if (d < 1) throw InputError("MetricSpec: every block dimension must be >= 1");
  }
}

int MetricSpec::total_dim() const {
  int t = 0;
  for (int d : block_dims) t += d;
  return t;
}

int MetricSpec::block_offset(int i) const {
  if (i < 0 || i >= blocks()) throw InputError("MetricSpec: block index out of range");
  int off = 0;
  for (int k = 0; k < i; ++k) off += block_dims[static_cast<std::size_t>(k)];
  return off;
}

double ground_distance(std::span<const double> x, std::span<const double> y,
                       const MetricSpec& spec) {
  if (x.size() != y.size() ||
      x.size() != static_cast<std::size_t>(spec.total_dim())) {
    throw InputError("ground_distance: dimension mismatch");
  }
  if (spec.is_inf()) {
    double m = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      m = std::max(m, std::abs(x[c] - y[c]));
    }
    return m;
  }
  if (spec.p == 1.0) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += std::abs(x[c] - y[c]);
    return s;
  }
  if (spec.p == 2.0) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      double d = x[c] - y[c];
      s += d * d;
    }
    return std::sqrt(s);
  }
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    s += std::pow(std::abs(x[c] - y[c]), spec.p);
  }
  return std::pow(s, 1.0 / spec.p);
}

double ground_cost(std::span<const double> x, std::span<const double> y,
                   const MetricSpec& spec) {
  if (x.size() != y.size() ||
      x.size() != static_cast<std::size_t>(spec.total_dim())) {
    throw InputError("ground_cost: dimension mismatch");
  }
  if (spec.is_inf()) return ground_distance(x, y, spec);
  if (spec.p == 1.0) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += std::abs(x[c] - y[c]);
    return s;
  }
  if (spec.p == 2.0) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      double d = x[c] - y[c];
      s += d * d;
    }
    return s;
  }
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    s += std::pow(std::abs(x[c] - y[c]), spec.p);
  }
  return s;
}

DiscreteMeasure DiscreteMeasure::from_flat(int dim, std::vector<double> coords,
                                           std::vector<double> weights) {
  if (dim < 1) throw InputError("DiscreteMeasure: dimension must be >= 1");
  if (weights.empty()) throw InputError("DiscreteMeasure: no atoms");
  if (coords.size() != weights.size() * static_cast<std::size_t>(dim)) {
    throw InputError("DiscreteMeasure: coords/weights size mismatch");
  }
  for (double c : coords) {
    if (!std::isfinite(c)) throw InputError("DiscreteMeasure: non-finite coordinate");
  }

  // Merge duplicates (exact canonical-bit equality), keeping first-seen order.
  std::unordered_map<CoordKey, std::size_t, CoordKeyHash> seen;
  seen.reserve(weights.size() * 2);
  DiscreteMeasure out;
  out.dim_ = dim;
  std::vector<CompensatedSum> sums;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw InputError("DiscreteMeasure: weights must be strictly positive");
    }
    std::span<const double> a{coords.data() + i * static_cast<std::size_t>(dim),
                              static_cast<std::size_t>(dim)};
    CoordKey key = key_of(a);
    auto [it, inserted] = seen.emplace(std::move(key), sums.size());
    if (inserted) {
      for (double c : a) out.coords_.push_back(c == 0.0 ? 0.0 : c);
      sums.emplace_back();
    }
    sums[it->second].add(weights[i]);
  }
  out.weights_.resize(sums.size());
  CompensatedSum total;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    out.weights_[i] = sums[i].value();
    total.add(out.weights_[i]);
  }
  double mass = total.value();
  if (std::abs(mass - 1.0) > 1e-12) {
    throw InputError("DiscreteMeasure: weights sum to " + std::to_string(mass) +
                     ", not 1 within 1e-12");
  }
  if (mass != 1.0) {
    for (double& w : out.weights_) w /= mass;
  }
  return out;
}

DiscreteMeasure::DiscreteMeasure(const std::vector<Point>& atoms,
                                 std::vector<double> weights) {
  if (atoms.empty()) throw InputError("DiscreteMeasure: no atoms");
  if (atoms.size() != weights.size()) {
    throw InputError("DiscreteMeasure: atom/weight count mismatch");
  }
  int dim = static_cast<int>(atoms[0].size());
  std::vector<double> flat;
  flat.reserve(atoms.size() * static_cast<std::size_t>(dim));
  for (const Point& a : atoms) {
    if (static_cast<int>(a.size()) != dim) {
      throw InputError("DiscreteMeasure: atoms have mixed dimensions");
    }
    flat.insert(flat.end(), a.begin(), a.end());
  }
  *this = from_flat(dim, std::move(flat), std::move(weights));
}

DiscreteMeasure::DiscreteMeasure(const std::vector<Point>& atoms)
    : DiscreteMeasure(atoms, std::vector<double>(atoms.size(),
                                                 1.0 / static_cast<double>(atoms.size()))) {}

std::pair<Point, Point> DiscreteMeasure::bounding_box() const {
  Point lo(static_cast<std::size_t>(dim_), kInf);
  Point hi(static_cast<std::size_t>(dim_), -kInf);
  for (std::size_t i = 0; i < size(); ++i) {
    auto a = atom(i);
    for (int c = 0; c < dim_; ++c) {
      lo[static_cast<std::size_t>(c)] = std::min(lo[static_cast<std::size_t>(c)], a[static_cast<std::size_t>(c)]);
      hi[static_cast<std::size_t>(c)] = std::max(hi[static_cast<std::size_t>(c)], a[static_cast<std::size_t>(c)]);
    }
  }
  return {lo, hi};
}

std::ptrdiff_t DiscreteMeasure::find_atom(std::span<const double> coords) const {
  if (static_cast<int>(coords.size()) != dim_) return -1;
  for (std::size_t i = 0; i < size(); ++i) {
    auto a = atom(i);
    bool same = true;
    for (int c = 0; c < dim_; ++c) {
      if (canonical_bits(a[static_cast<std::size_t>(c)]) !=
          canonical_bits(coords[static_cast<std::size_t>(c)])) {
        same = false;
        break;
      }
    }
    if (same) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

bool DiscreteMeasure::approx_equal(const DiscreteMeasure& other, double tol) const {
  if (dim_ != other.dim_ || size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    std::ptrdiff_t j = other.find_atom(atom(i));
    if (j < 0) return false;
    if (std::abs(weights_[i] - other.weights_[static_cast<std::size_t>(j)]) > tol) return false;
  }
  return true;
}

ProductMeasure::ProductMeasure(DiscreteMeasure m, MetricSpec s)
    : base(std::move(m)), spec(std::move(s)) {
  spec.validate();
  if (base.dim() != spec.total_dim()) {
    throw InputError("ProductMeasure: atom dimension does not match block dims");
  }
}

std::pair<DiscreteMeasure, std::vector<std::size_t>> marginal_with_index(
    const ProductMeasure& m, int i) {
  if (i < 0 || i >= m.spec.blocks()) {
    throw InputError("marginal: block index out of range");
  }
  int off = m.spec.block_offset(i);
  int d = m.spec.block_dims[static_cast<std::size_t>(i)];

  std::unordered_map<CoordKey, std::size_t, CoordKeyHash> seen;
  std::vector<double> coords;
  std::vector<CompensatedSum> sums;
  std::vector<std::size_t> index_of(m.base.size());
  for (std::size_t a = 0; a < m.base.size(); ++a) {
    auto block = m.base.atom(a).subspan(static_cast<std::size_t>(off),
                                        static_cast<std::size_t>(d));
    CoordKey key = key_of(block);
    auto [it, inserted] = seen.emplace(std::move(key), sums.size());
    if (inserted) {
      coords.insert(coords.end(), block.begin(), block.end());
      sums.emplace_back();
    }
    sums[it->second].add(m.base.weight(a));
    index_of[a] = it->second;
  }
  std::vector<double> weights(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k) weights[k] = sums[k].value();
  return {DiscreteMeasure::from_flat(d, std::move(coords), std::move(weights)),
          std::move(index_of)};
}

DiscreteMeasure marginal(const ProductMeasure& m, int i) {
  return marginal_with_index(m, i).first;
}

MarginalVector marginals_of(const ProductMeasure& m) {
  MarginalVector v;
  v.components.reserve(static_cast<std::size_t>(m.spec.blocks()));
  for (int i = 0; i < m.spec.blocks(); ++i) v.components.push_back(marginal(m, i));
  return v;
}

namespace {

std::vector<double> empirical_weights(const std::vector<double>& weights,
                                      std::size_t n, std::uint64_t seed,
                                      std::vector<std::size_t>* draw_counts) {
  SplitMix64 rng(seed);
  std::vector<double> cum(weights.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc.add(weights[i]);
    cum[i] = acc.value();
  }
  draw_counts->assign(weights.size(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    double u = rng.next_double() * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::size_t idx = static_cast<std::size_t>(std::distance(cum.begin(), it));
    if (idx >= weights.size()) idx = weights.size() - 1;
    ++(*draw_counts)[idx];
  }
  std::vector<double> out;
  out.reserve(weights.size());
  for (std::size_t c : *draw_counts) {
    out.push_back(static_cast<double>(c) / static_cast<double>(n));
  }
  return out;
}

}  // namespace

DiscreteMeasure sample_empirical(const DiscreteMeasure& m, std::size_t n,
                                 std::uint64_t seed) {
  if (n == 0) throw InputError("sample_empirical: n must be >= 1");
  std::vector<std::size_t> counts;
  std::vector<double> w = empirical_weights(m.weights(), n, seed, &counts);
  std::vector<double> coords;
  std::vector<double> weights;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    auto a = m.atom(i);
    coords.insert(coords.end(), a.begin(), a.end());
    weights.push_back(w[i]);
  }
  return DiscreteMeasure::from_flat(m.dim(), std::move(coords), std::move(weights));
}

ProductMeasure sample_empirical(const ProductMeasure& m, std::size_t n,
                                std::uint64_t seed) {
  return ProductMeasure(sample_empirical(m.base, n, seed), m.spec);
}

DiscreteMeasure translate(const DiscreteMeasure& m, std::span<const double> offset) {
  if (static_cast<int>(offset.size()) != m.dim()) {
    throw InputError("translate: offset dimension mismatch");
  }
  std::vector<double> coords = m.coords();
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (int c = 0; c < m.dim(); ++c) {
      coords[i * static_cast<std::size_t>(m.dim()) + static_cast<std::size_t>(c)] +=
          offset[static_cast<std::size_t>(c)];
    }
  }
  return DiscreteMeasure::from_flat(m.dim(), std::move(coords), m.weights());
}

DiscreteMeasure grid_measure_1d(double lo, double hi, int n,
                                std::vector<double> weights) {
  if (n < 1) throw InputError("grid_measure_1d: n must be >= 1");
  std::vector<double> coords(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    coords[static_cast<std::size_t>(i)] =
        n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  if (weights.empty()) {
    weights.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
  }
  return DiscreteMeasure::from_flat(1, std::move(coords), std::move(weights));
}

ProductMeasure product_grid(const MetricSpec& spec,
                            const std::vector<std::vector<double>>& axes,
                            const std::vector<std::vector<double>>& axis_weights) {
  if (static_cast<int>(axes.size()) != spec.blocks()) {
    throw InputError("product_grid: axis count must equal K");
  }
  for (int d : spec.block_dims) {
    if (d != 1) throw InputError("product_grid: blocks must be 1-D");
  }
  std::size_t total = 1;
  for (const auto& ax : axes) {
    if (ax.empty()) throw InputError("product_grid: empty axis");
    total *= ax.size();
  }
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(total * axes.size());
  weights.reserve(total);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double w = 1.0;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      idx[k] = rem % axes[k].size();
      rem /= axes[k].size();
      coords.push_back(axes[k][idx[k]]);
      if (!axis_weights.empty()) {
        w *= axis_weights[k][idx[k]];
      }
    }
    weights.push_back(axis_weights.empty()
                          ? 1.0 / static_cast<double>(total)
                          : w);
  }
  return ProductMeasure(
      DiscreteMeasure::from_flat(spec.total_dim(), std::move(coords), std::move(weights)),
      spec);
}

}  // namespace wproj
