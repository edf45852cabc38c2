#include "lyaplab/cocycle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lyaplab/errors.hpp"
#include "lyaplab/random.hpp"

namespace lyaplab {

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

MatrixCocycle::MatrixCocycle(int dimension, Generator generator, Locality locality, double holder_alpha,
                             std::optional<double> holder_c2, std::string label)
    : dimension_(dimension),
      generator_(std::move(generator)),
      locality_(std::move(locality)),
      holder_alpha_(holder_alpha),
      holder_c2_(holder_c2),
      label_(std::move(label)) {
  if (dimension_ < 1 || dimension_ > kMaxInducedDimension)
    throw DimensionError("cocycle dimension " + std::to_string(dimension_) + " out of range");
  if (!generator_) throw Error("cocycle needs a generator");
  if (!(holder_alpha_ > 0.0)) throw Error("Hölder exponent must be positive");
}

Matrix MatrixCocycle::evaluate(const SymbolicPoint& x) const {
  Matrix m = generator_(x);
  if (m.rows() != dimension_ || m.cols() != dimension_)
    throw DimensionError("generator returned a " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " matrix for a dimension " + std::to_string(dimension_) + " cocycle");
  return m;
}

MatrixCocycle MatrixCocycle::with_holder(double alpha, std::optional<double> c2) const {
  return MatrixCocycle(dimension_, generator_, locality_, alpha, c2, label_);
}

MatrixCocycle MatrixCocycle::scaled(double c) const {
  auto g = generator_;
  std::optional<double> c2;
  if (holder_c2_) c2 = std::abs(c) * *holder_c2_;
  return MatrixCocycle(
      dimension_, [g, c](const SymbolicPoint& x) -> Matrix { return c * g(x); }, locality_, holder_alpha_, c2,
      label_.empty() ? std::string{} : label_ + "*scaled");
}

namespace {

void check_base_dimension(Eigen::Index d) {
  if (d < 1 || d > kMaxDimension)
    throw DimensionError("matrix dimension " + std::to_string(d) + " outside 1.." + std::to_string(kMaxDimension));
}

}  // namespace

MatrixCocycle constant_cocycle(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("constant cocycle needs a square matrix");
  check_base_dimension(m.rows());
  return MatrixCocycle(
      static_cast<int>(m.rows()), [m](const SymbolicPoint&) { return m; }, WindowLocality{0}, 1.0, 0.0, "constant");
}

MatrixCocycle locally_constant_cocycle(int alphabet_size, int window, std::vector<Matrix> table) {
  if (alphabet_size < 2) throw Error("locally constant cocycle: alphabet size must be >= 2");
  if (window < 0) throw Error("locally constant cocycle: window must be >= 0");
  const double expected = std::pow(static_cast<double>(alphabet_size), 2 * window + 1);
  if (expected > 1e6) throw Error("locally constant cocycle: table too large");
  if (table.size() != static_cast<std::size_t>(expected))
    throw Error("locally constant cocycle: table needs k^(2r+1) = " + std::to_string(static_cast<long>(expected)) +
                " entries, got " + std::to_string(table.size()));
  const auto d = table.front().rows();
  check_base_dimension(d);
  double variation = 0.0;
  for (const auto& m : table) {
    if (m.rows() != d || m.cols() != d) throw DimensionError("locally constant cocycle: inconsistent matrix sizes");
    for (const auto& other : table) variation = std::max(variation, operator_norm(m - other));
  }
  // points that differ inside the window are at distance >= theta^window; the
  // exponent-1 constant is reported relative to theta = 1/2 by default and
  // re-derived by the harness for the configured theta
  auto shared = std::make_shared<const std::vector<Matrix>>(std::move(table));
  const int k = alphabet_size;
  auto gen = [shared, k, window](const SymbolicPoint& x) -> Matrix {
    std::size_t code = 0;
    for (int i = -window; i <= window; ++i) {
      const Symbol s = x.at(i);
      if (s < 0 || s >= k) throw Error("symbol out of the cocycle alphabet");
      code = code * static_cast<std::size_t>(k) + static_cast<std::size_t>(s);
    }
    return (*shared)[code];
  };
  return MatrixCocycle(static_cast<int>(d), gen, WindowLocality{window}, 1.0, std::nullopt,
                       "locally_constant(window=" + std::to_string(window) + ")");
}

MatrixCocycle random_locally_constant_cocycle(int alphabet_size, int dimension, int window, double low, double high,
                                              std::uint64_t seed) {
  check_base_dimension(dimension);
  if (!(high >= low)) throw Error("random cocycle: need low <= high");
  const auto count = static_cast<std::size_t>(std::llround(std::pow(alphabet_size, 2 * window + 1)));
  CounterStream stream(seed);
  std::vector<Matrix> table;
  table.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    Matrix m(dimension, dimension);
    for (int i = 0; i < dimension; ++i)
      for (int j = 0; j < dimension; ++j) m(i, j) = stream.uniform(low, high);
    table.push_back(std::move(m));
  }
  return locally_constant_cocycle(alphabet_size, window, std::move(table));
}

// ---------------------------------------------------------------------------

SymbolicPoint PaperExampleCocycle::q() { return SymbolicPoint::eventually_periodic({1}, {0}, {1}, -1); }

void PaperExampleCocycle::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) throw Error("paper_example: theta must lie in (0,1)");
  if (!(a > 1.0)) throw Error("paper_example: a must exceed 1");
  if (!(a * theta > 1.0)) throw Error("paper_example: a*theta must exceed 1");
  if (dimension() > kMaxDimension) throw DimensionError("paper_example: too many extra diagonal entries");
}

double PaperExampleCocycle::scalar_at(const SymbolicPoint& x) const {
  static const SymbolicPoint center = q();
  const auto n = agreement_radius(x, center);
  if (!n) return 0.0;
  const double d = std::pow(theta, static_cast<double>(*n));
  // d <= theta^3 exactly when N >= 3
  if (*n >= 3) return (a / (theta * theta * theta)) * d;
  return a;
}

MatrixCocycle PaperExampleCocycle::cocycle() const {
  validate();
  const PaperExampleCocycle self = *this;
  const int d = dimension();
  auto gen = [self, d](const SymbolicPoint& x) -> Matrix {
    Matrix m = Matrix::Zero(d, d);
    m(0, 0) = self.scalar_at(x);
    for (int i = 1; i < d; ++i) m(i, i) = self.extra_diagonal[static_cast<std::size_t>(i - 1)];
    return m;
  };
  std::ostringstream label;
  label << "paper_example(theta=" << theta << ",a=" << a << ")";
  return MatrixCocycle(d, gen, MetricLocality{q()}, 1.0, a / (theta * theta * theta), label.str());
}

MatrixCocycle block_diagonal(const std::vector<MatrixCocycle>& entries) {
  if (entries.empty()) throw Error("block_diagonal: need at least one entry");
  check_base_dimension(static_cast<Eigen::Index>(entries.size()));
  for (const auto& e : entries)
    if (e.dimension() != 1) throw DimensionError("block_diagonal: entries must be scalar cocycles");
  if (entries.size() == 1) return entries.front();

  Locality locality = WindowLocality{0};
  bool window = true;
  int radius = 0;
  for (const auto& e : entries) {
    if (const auto* m = std::get_if<MetricLocality>(&e.locality())) {
      if (window) locality = *m;
      window = false;
    } else if (window) {
      radius = std::max(radius, std::get<WindowLocality>(e.locality()).radius);
      locality = WindowLocality{radius};
    }
  }
  double alpha = entries.front().holder_alpha();
  std::optional<double> c2 = 0.0;
  for (const auto& e : entries) {
    if (e.holder_alpha() != alpha || !e.holder_c2()) c2.reset();
    alpha = std::min(alpha, e.holder_alpha());
    if (c2) c2 = std::max(*c2, *e.holder_c2());
  }
  const auto parts = entries;
  const auto d = static_cast<int>(entries.size());
  auto gen = [parts, d](const SymbolicPoint& x) -> Matrix {
    Matrix m = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = parts[static_cast<std::size_t>(i)].evaluate(x)(0, 0);
    return m;
  };
  std::string label = "block_diagonal[";
  for (std::size_t i = 0; i < entries.size(); ++i) label += (i ? "," : "") + entries[i].label();
  label += "]";
  return MatrixCocycle(d, gen, locality, alpha, c2, label);
}

// ---------------------------------------------------------------------------
// products

ProductResult product(const MatrixCocycle& a, const SymbolicPoint& x, std::int64_t n) {
  if (n < 0) throw Error("product: n must be non-negative");
  ProductResult out{Matrix::Identity(a.dimension(), a.dimension()), false};
  SymbolicPoint y = x;
  for (std::int64_t k = 0; k < n; ++k) {
    out.value = a.evaluate(y) * out.value;
    y = y.shifted(1);
    const double nrm = out.value.norm();
    if (!std::isfinite(nrm) || (nrm != 0.0 && (nrm < 1e-300 || nrm > 1e300))) out.overflow_risk = true;
  }
  return out;
}

bool ScaledProduct::annihilated() const noexcept {
  return std::isinf(log_scale) && log_scale < 0.0;
}

double ScaledProduct::log_norm() const {
  if (annihilated()) return -std::numeric_limits<double>::infinity();
  return log_scale + std::log(operator_norm(unit_part));
}

Matrix ScaledProduct::reconstruct() const {
  if (annihilated()) return Matrix::Zero(unit_part.rows(), unit_part.cols());
  return unit_part * std::exp(log_scale);
}

ScaledProduct product_scaled(const MatrixCocycle& a, const SymbolicPoint& x, std::int64_t n) {
  if (n < 0) throw Error("product_scaled: n must be non-negative");
  const int d = a.dimension();
  ScaledProduct out{Matrix::Identity(d, d), 0.0, n};
  SymbolicPoint y = x;
  for (std::int64_t k = 0; k < n; ++k) {
    out.unit_part = a.evaluate(y) * out.unit_part;
    y = y.shifted(1);
    if ((out.unit_part.array() == 0.0).all()) {
      out.unit_part.setZero();
      out.log_scale = -std::numeric_limits<double>::infinity();
      return out;
    }
    // ||M||_2 <= ||M||_F and ||M||_2 >= max column norm: skip the SVD when
    // those bounds already certify the band
    const double frob = out.unit_part.norm();
    const double max_col = out.unit_part.colwise().norm().maxCoeff();
    if (frob <= 2.0 && max_col >= 0.5) continue;
    const double s = operator_norm(out.unit_part);
    out.unit_part /= s;
    out.log_scale += std::log(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hölder constant

namespace {

struct PairBuilder {
  const Subshift& space;
  CounterStream& rng;
  Word tail;
  static constexpr std::int64_t kRadius = 16;

  Symbol random_successor(Symbol s) {
    std::vector<Symbol> options;
    for (Symbol b = 0; b < space.alphabet_size(); ++b)
      if (space.allowed(s, b)) options.push_back(b);
    return options[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(options.size())))];
  }
  Symbol random_predecessor(Symbol s) {
    std::vector<Symbol> options;
    for (Symbol b = 0; b < space.alphabet_size(); ++b)
      if (space.allowed(b, s)) options.push_back(b);
    return options[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(options.size())))];
  }

  Word random_core() {
    Word core(2 * kRadius + 1);
    core[0] = static_cast<Symbol>(rng.below(space.alphabet_size()));
    for (std::size_t t = 1; t < core.size(); ++t) core[t] = random_successor(core[t - 1]);
    return core;
  }

  // Copy of `core` agreeing on |i| < n, with a different symbol at +n or -n
  // and a fresh random continuation beyond it.
  std::optional<Word> perturb(const Word& core, std::int64_t n) {
    Word out = core;
    const bool right = n == 0 || rng.below(2) == 0;
    const std::int64_t pos = kRadius + (right ? n : -n);
    std::vector<Symbol> options;
    for (Symbol b = 0; b < space.alphabet_size(); ++b) {
      if (b == core[static_cast<std::size_t>(pos)]) continue;
      if (right && pos > 0 && !space.allowed(out[static_cast<std::size_t>(pos - 1)], b)) continue;
      if (!right && pos + 1 < static_cast<std::int64_t>(out.size()) && !space.allowed(b, out[static_cast<std::size_t>(pos + 1)]))
        continue;
      options.push_back(b);
    }
    if (options.empty()) return std::nullopt;
    out[static_cast<std::size_t>(pos)] = options[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(options.size())))];
    if (right) {
      for (std::size_t t = static_cast<std::size_t>(pos) + 1; t < out.size(); ++t) out[t] = random_successor(out[t - 1]);
      if (n == 0)
        for (std::int64_t t = pos - 1; t >= 0; --t)
          out[static_cast<std::size_t>(t)] = random_predecessor(out[static_cast<std::size_t>(t) + 1]);
    } else {
      for (std::int64_t t = pos - 1; t >= 0; --t)
        out[static_cast<std::size_t>(t)] = random_predecessor(out[static_cast<std::size_t>(t) + 1]);
    }
    return out;
  }

  std::optional<SymbolicPoint> embed(const Word& core) {
    SymbolicPoint p = SymbolicPoint::eventually_periodic(tail, core, tail, -kRadius);
    if (!space.admissible(p.block(-kRadius - static_cast<std::int64_t>(tail.size()) - 1,
                                  2 * kRadius + 2 * static_cast<std::int64_t>(tail.size()) + 3)))
      return std::nullopt;
    return p;
  }
};

}  // namespace

HolderEstimate holder_estimate(const MatrixCocycle& a, const Subshift& space, int sample_pairs, std::uint64_t seed) {
  if (sample_pairs <= 0) throw DegenerateSample("holder_estimate: no pairs requested");
  CounterStream rng(seed);
  const auto cycles = enumerate_periodic_orbits(space, 4);
  PairBuilder builder{space, rng, cycles.front().word()};
  const auto* metric = std::get_if<MetricLocality>(&a.locality());
  const double alpha = a.holder_alpha();

  HolderEstimate best{0.0, SymbolicPoint::constant(0), SymbolicPoint::constant(0), 1.0, 0.0, 0};
  bool any_distinct = false;
  for (int s = 0; s < sample_pairs; ++s) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const bool anchored = metric && (s % 2 == 0);
      Word core = anchored ? metric->center.block(-PairBuilder::kRadius, 2 * PairBuilder::kRadius + 1)
                           : builder.random_core();
      const std::int64_t n = rng.below(PairBuilder::kRadius);
      auto other = builder.perturb(core, n);
      if (!other) continue;
      std::optional<SymbolicPoint> x = anchored ? std::optional<SymbolicPoint>(metric->center) : builder.embed(core);
      auto y = builder.embed(*other);
      if (!x || !y) continue;
      const double d = cylinder_distance(*x, *y, space);
      const double diff = operator_norm(a.evaluate(*x) - a.evaluate(*y));
      ++best.pairs;
      if (d == 0.0) break;
      any_distinct = true;
      const double ratio = diff / std::pow(d, alpha);
      if (ratio > best.c2_hat || best.pairs == 1) {
        best.c2_hat = std::max(best.c2_hat, ratio);
        best.witness_x = *x;
        best.witness_y = *y;
        best.witness_distance = d;
        best.witness_difference = diff;
      }
      break;
    }
  }
  if (!any_distinct) throw DegenerateSample("holder_estimate: every sampled pair coincides");
  return best;
}

}  // namespace lyaplab
