#include "lyaplab/symbolic_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <sstream>

#include <Eigen/Dense>

#include "lyaplab/errors.hpp"
#include "lyaplab/random.hpp"

namespace lyaplab {

Word parse_word(const std::string& text) {
  Word w;
  w.reserve(text.size());
  for (char c : text) {
    if (c >= '0' && c <= '9') {
      w.push_back(c - '0');
    } else if (c >= 'a' && c <= 'z') {
      w.push_back(10 + (c - 'a'));
    } else {
      throw Error("invalid symbol '" + std::string(1, c) + "' in word \"" + text + "\"");
    }
  }
  return w;
}

std::string format_word(std::span<const Symbol> w) {
  std::string s;
  s.reserve(w.size());
  for (Symbol c : w) s.push_back(c < 10 ? static_cast<char>('0' + c) : static_cast<char>('a' + c - 10));
  return s;
}

// ---------------------------------------------------------------------------
// SymbolLaw

namespace {

void check_distribution(const std::vector<double>& p, const char* what) {
  if (p.size() < 2) throw Error(std::string(what) + ": need at least two symbols");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(std::string(what) + ": probabilities must be finite and >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(std::string(what) + ": probabilities must sum to 1");
}

Symbol sample_symbol(const std::vector<double>& p, double u) {
  double acc = 0.0;
  const auto k = static_cast<Symbol>(p.size());
  for (Symbol s = 0; s < k; ++s) {
    acc += p[s];
    if (u < acc) return s;
  }
  // round-off at the top end: last symbol with positive mass
  for (Symbol s = k - 1; s >= 0; --s)
    if (p[s] > 0.0) return s;
  return k - 1;
}

}  // namespace

SymbolLaw SymbolLaw::bernoulli(std::vector<double> probabilities) {
  check_distribution(probabilities, "bernoulli law");
  SymbolLaw law;
  law.markov_ = false;
  law.stationary_ = probabilities;
  law.transition_.assign(probabilities.size(), probabilities);
  law.reversed_ = law.transition_;
  return law;
}

SymbolLaw SymbolLaw::markov(std::vector<std::vector<double>> transition) {
  const auto k = transition.size();
  if (k < 2) throw Error("markov law: need at least two symbols");
  for (const auto& row : transition) {
    if (row.size() != k) throw Error("markov law: transition matrix must be square");
    check_distribution(row, "markov law row");
  }
  // stationary vector: (P^T - I) pi = 0 with sum(pi) = 1
  Eigen::MatrixXd system(k + 1, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) system(i, j) = transition[j][i] - (i == j ? 1.0 : 0.0);
  system.row(k).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs(k) = 1.0;
  Eigen::VectorXd pi = system.colPivHouseholderQr().solve(rhs);
  if ((system * pi - rhs).norm() > 1e-9) throw Error("markov law: no unique stationary distribution");
  SymbolLaw law;
  law.markov_ = true;
  law.stationary_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (pi(i) < -1e-12) throw Error("markov law: stationary distribution is not non-negative");
    law.stationary_[i] = std::max(0.0, pi(i));
  }
  law.transition_ = std::move(transition);
  law.reversed_.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t b = 0; b < k; ++b) {
    if (law.stationary_[b] <= 0.0) {
      law.reversed_[b] = law.stationary_;
      continue;
    }
    for (std::size_t a = 0; a < k; ++a)
      law.reversed_[b][a] = law.stationary_[a] * law.transition_[a][b] / law.stationary_[b];
  }
  return law;
}

double SymbolLaw::cylinder_measure(std::span<const Symbol> w) const {
  if (w.empty()) return 1.0;
  double m = stationary_.at(w[0]);
  for (std::size_t t = 1; t < w.size(); ++t) m *= transition_[w[t - 1]][w[t]];
  return m;
}

// ---------------------------------------------------------------------------
// Subshift

Subshift Subshift::full(int alphabet_size, double theta) {
  return Subshift(alphabet_size,
                  std::vector<std::vector<bool>>(alphabet_size, std::vector<bool>(alphabet_size, true)), theta);
}

Subshift::Subshift(int alphabet_size, std::vector<std::vector<bool>> allowed, double theta)
    : k_(alphabet_size), allowed_(std::move(allowed)), theta_(theta), full_(true) {
  if (k_ < 2) throw Error("subshift: alphabet size must be at least 2");
  if (!(theta_ > 0.0 && theta_ < 1.0)) throw Error("subshift: theta must lie in (0,1)");
  if (allowed_.size() != static_cast<std::size_t>(k_)) throw Error("subshift: transition table must be k x k");
  std::vector<bool> has_pred(k_, false);
  for (int a = 0; a < k_; ++a) {
    if (allowed_[a].size() != static_cast<std::size_t>(k_)) throw Error("subshift: transition table must be k x k");
    bool has_succ = false;
    for (int b = 0; b < k_; ++b) {
      if (allowed_[a][b]) {
        has_succ = true;
        has_pred[b] = true;
      } else {
        full_ = false;
      }
    }
    if (!has_succ) throw Error("subshift: symbol " + std::to_string(a) + " has no allowed successor");
  }
  for (int b = 0; b < k_; ++b)
    if (!has_pred[b]) throw Error("subshift: symbol " + std::to_string(b) + " has no allowed predecessor");
}

bool Subshift::allowed(Symbol a, Symbol b) const {
  if (a < 0 || b < 0 || a >= k_ || b >= k_) return false;
  return allowed_[a][b];
}

bool Subshift::admissible(std::span<const Symbol> w) const {
  for (Symbol s : w)
    if (s < 0 || s >= k_) return false;
  for (std::size_t t = 1; t < w.size(); ++t)
    if (!allowed_[w[t - 1]][w[t]]) return false;
  return true;
}

bool Subshift::cyclically_admissible(std::span<const Symbol> w) const {
  return !w.empty() && admissible(w) && allowed_[w.back()][w.front()];
}

void Subshift::check_law(const SymbolLaw& law) const {
  if (law.alphabet_size() != k_) throw IncompatibleLaw("law alphabet size differs from the subshift");
  for (int a = 0; a < k_; ++a) {
    if (law.stationary()[a] <= 0.0) continue;
    for (int b = 0; b < k_; ++b)
      if (!allowed_[a][b] && law.transition()[a][b] > 0.0)
        throw IncompatibleLaw("law charges forbidden transition " + std::to_string(a) + "->" + std::to_string(b));
  }
}

// ---------------------------------------------------------------------------
// SymbolicPoint

namespace detail {

// Symbol at index i is a pure function of (seed, i). Markov chains are
// realised by walking outward from index 0 with counter-based uniforms; the
// walk is memoised in a tape that only ever grows.
struct SeededSource {
  SeededSource(std::uint64_t s, SymbolLaw l) : seed(s), law(std::move(l)) {}

  std::uint64_t seed;
  SymbolLaw law;

  mutable std::shared_mutex mutex;
  mutable std::vector<Symbol> forward;   // indices 0, 1, 2, ...
  mutable std::vector<Symbol> backward;  // indices -1, -2, ...

  Symbol at(std::int64_t i) const {
    if (!law.is_markov()) return sample_symbol(law.stationary(), counter_uniform(seed, i));
    {
      std::shared_lock lock(mutex);
      if (i >= 0 && static_cast<std::size_t>(i) < forward.size()) return forward[static_cast<std::size_t>(i)];
      if (i < 0 && static_cast<std::size_t>(-i - 1) < backward.size()) return backward[static_cast<std::size_t>(-i - 1)];
    }
    std::unique_lock lock(mutex);
    constexpr std::size_t kChunk = 4096;
    if (forward.empty()) forward.push_back(sample_symbol(law.stationary(), counter_uniform(seed, 0)));
    if (i >= 0) {
      const auto want = static_cast<std::size_t>(i) + 1;
      const auto target = ((want + kChunk - 1) / kChunk) * kChunk;
      while (forward.size() < target) {
        const auto idx = static_cast<std::int64_t>(forward.size());
        forward.push_back(sample_symbol(law.transition()[forward.back()], counter_uniform(seed, idx)));
      }
      return forward[static_cast<std::size_t>(i)];
    }
    const auto want = static_cast<std::size_t>(-i);
    const auto target = ((want + kChunk - 1) / kChunk) * kChunk;
    while (backward.size() < target) {
      const Symbol next = backward.empty() ? forward.front() : backward.back();
      const auto idx = -static_cast<std::int64_t>(backward.size()) - 1;
      backward.push_back(sample_symbol(law.reversed()[next], counter_uniform(seed, idx)));
    }
    return backward[static_cast<std::size_t>(-i - 1)];
  }
};

}  // namespace detail

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

SymbolicPoint SymbolicPoint::periodic(Word word, std::int64_t phase) {
  if (word.empty()) throw Error("periodic point needs a non-empty word");
  const auto n = static_cast<std::int64_t>(word.size());
  return SymbolicPoint(Periodic{std::make_shared<const Word>(std::move(word)), floor_mod(phase, n)});
}

SymbolicPoint SymbolicPoint::eventually_periodic(Word left, Word core, Word right, std::int64_t offset) {
  if (left.empty() || right.empty()) throw Error("eventually periodic point needs non-empty tail words");
  return SymbolicPoint(EventuallyPeriodic{std::make_shared<const Word>(std::move(left)),
                                          std::make_shared<const Word>(std::move(core)),
                                          std::make_shared<const Word>(std::move(right)), offset});
}

SymbolicPoint SymbolicPoint::seeded(std::uint64_t seed, const SymbolLaw& law) {
  return SymbolicPoint(Seeded{std::make_shared<const detail::SeededSource>(seed, law), 0});
}

Symbol SymbolicPoint::at(std::int64_t i) const {
  return std::visit(
      [i](const auto& k) -> Symbol {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Periodic>) {
          const auto n = static_cast<std::int64_t>(k.word->size());
          return (*k.word)[static_cast<std::size_t>(floor_mod(i + k.phase, n))];
        } else if constexpr (std::is_same_v<T, EventuallyPeriodic>) {
          const auto core_len = static_cast<std::int64_t>(k.core->size());
          if (i < k.offset) {
            const auto l = static_cast<std::int64_t>(k.left->size());
            return (*k.left)[static_cast<std::size_t>(floor_mod(i - k.offset, l))];
          }
          if (i < k.offset + core_len) return (*k.core)[static_cast<std::size_t>(i - k.offset)];
          const auto r = static_cast<std::int64_t>(k.right->size());
          return (*k.right)[static_cast<std::size_t>(floor_mod(i - k.offset - core_len, r))];
        } else {
          return k.source->at(i + k.shift);
        }
      },
      kind_);
}

SymbolicPoint SymbolicPoint::shifted(std::int64_t m) const {
  return std::visit(
      [m](const auto& k) -> SymbolicPoint {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Periodic>) {
          const auto n = static_cast<std::int64_t>(k.word->size());
          return SymbolicPoint(Periodic{k.word, floor_mod(k.phase + m, n)});
        } else if constexpr (std::is_same_v<T, EventuallyPeriodic>) {
          return SymbolicPoint(EventuallyPeriodic{k.left, k.core, k.right, k.offset - m});
        } else {
          return SymbolicPoint(Seeded{k.source, k.shift + m});
        }
      },
      kind_);
}

Word SymbolicPoint::block(std::int64_t from, std::int64_t length) const {
  Word w(static_cast<std::size_t>(std::max<std::int64_t>(length, 0)));
  for (std::int64_t t = 0; t < length; ++t) w[static_cast<std::size_t>(t)] = at(from + t);
  return w;
}

std::string SymbolicPoint::describe() const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Periodic>) {
          os << "periodic(" << format_word(*k.word) << ";phase=" << k.phase << ")";
        } else if constexpr (std::is_same_v<T, EventuallyPeriodic>) {
          os << "eventually_periodic(left=" << format_word(*k.left) << ";core=" << format_word(*k.core)
             << ";right=" << format_word(*k.right) << ";offset=" << k.offset << ")";
        } else {
          os << "seeded(seed=" << k.source->seed << ";shift=" << k.shift << ")";
        }
      },
      kind_);
  return os.str();
}

// ---------------------------------------------------------------------------
// distances

namespace {

// Tail structure of a finitely described point: periodic with period
// right_period on [right_start, inf) and with left_period on (-inf, left_end].
struct TailStructure {
  std::int64_t right_start, right_period, left_end, left_period;
};

TailStructure tails(const SymbolicPoint& x) {
  if (const auto* p = std::get_if<SymbolicPoint::Periodic>(&x.kind())) {
    const auto n = static_cast<std::int64_t>(p->word->size());
    return {0, n, 0, n};
  }
  const auto& e = std::get<SymbolicPoint::EventuallyPeriodic>(x.kind());
  return {e.offset + static_cast<std::int64_t>(e.core->size()), static_cast<std::int64_t>(e.right->size()),
          e.offset - 1, static_cast<std::int64_t>(e.left->size())};
}

std::int64_t capped_lcm(std::int64_t a, std::int64_t b, std::int64_t cap) {
  const std::int64_t g = std::gcd(a, b);
  const std::int64_t q = a / g;
  if (q > cap / std::max<std::int64_t>(b, 1)) return cap + 1;
  return q * b;
}

// Radius R such that agreement on [-R, R] proves equality.
std::int64_t decision_radius(const SymbolicPoint& x, const SymbolicPoint& y, std::int64_t cap) {
  const TailStructure tx = tails(x), ty = tails(y);
  const std::int64_t right = std::max(tx.right_start, ty.right_start);
  const std::int64_t left = std::min(tx.left_end, ty.left_end);
  const std::int64_t lr = capped_lcm(tx.right_period, ty.right_period, cap);
  const std::int64_t ll = capped_lcm(tx.left_period, ty.left_period, cap);
  const std::int64_t r1 = std::abs(right) + lr;
  const std::int64_t r2 = std::abs(left) + ll;
  return std::min(std::max(r1, r2), cap + 1);
}

bool structurally_equal_seeded(const SymbolicPoint& x, const SymbolicPoint& y) {
  const auto* a = std::get_if<SymbolicPoint::Seeded>(&x.kind());
  const auto* b = std::get_if<SymbolicPoint::Seeded>(&y.kind());
  return a && b && a->source == b->source && a->shift == b->shift;
}

}  // namespace

std::optional<std::int64_t> agreement_radius(const SymbolicPoint& x, const SymbolicPoint& y, std::int64_t scan_cap) {
  if (structurally_equal_seeded(x, y)) return std::nullopt;
  const bool decidable = x.finitely_described() && y.finitely_described();
  const std::int64_t limit = decidable ? std::min(decision_radius(x, y, scan_cap), scan_cap) : scan_cap;
  for (std::int64_t r = 0; r <= limit; ++r) {
    if (x.at(r) != y.at(r) || x.at(-r) != y.at(-r)) return r;
  }
  if (decidable && decision_radius(x, y, scan_cap) <= scan_cap) return std::nullopt;
  throw ScanCapExceeded("points agree on |i| <= " + std::to_string(limit) + " and equality cannot be decided: " +
                        x.describe() + " vs " + y.describe());
}

double cylinder_distance(const SymbolicPoint& x, const SymbolicPoint& y, const Subshift& space,
                         std::int64_t scan_cap) {
  const auto n = agreement_radius(x, y, scan_cap);
  if (!n) return 0.0;
  return std::pow(space.theta(), static_cast<double>(*n));
}

// ---------------------------------------------------------------------------
// words and orbits

std::size_t least_rotation(std::span<const Symbol> w) {
  // Booth's algorithm on the doubled word.
  const std::size_t n = w.size();
  if (n == 0) return 0;
  std::vector<std::ptrdiff_t> f(2 * n, -1);
  std::size_t k = 0;
  auto s = [&](std::size_t i) { return w[i % n]; };
  for (std::size_t j = 1; j < 2 * n; ++j) {
    std::ptrdiff_t i = f[j - k - 1];
    while (i != -1 && s(j) != s(k + static_cast<std::size_t>(i) + 1)) {
      if (s(j) < s(k + static_cast<std::size_t>(i) + 1)) k = j - static_cast<std::size_t>(i) - 1;
      i = f[static_cast<std::size_t>(i)];
    }
    if (s(j) != s(k + static_cast<std::size_t>(i) + 1)) {  // i == -1
      if (s(j) < s(k)) k = j;
      f[j - k] = -1;
    } else {
      f[j - k] = i + 1;
    }
  }
  return k % n;
}

std::size_t least_period(std::span<const Symbol> w) {
  const std::size_t n = w.size();
  if (n == 0) return 0;
  std::vector<std::size_t> pi(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t k = pi[i - 1];
    while (k > 0 && w[i] != w[k]) k = pi[k - 1];
    if (w[i] == w[k]) ++k;
    pi[i] = k;
  }
  const std::size_t p = n - pi[n - 1];
  return n % p == 0 ? p : n;
}

PeriodicOrbit::PeriodicOrbit(Word word) {
  if (word.empty()) throw Error("periodic orbit needs a non-empty word");
  word.resize(least_period(word));
  word_ = std::move(word);
}

Word PeriodicOrbit::canonical_word() const {
  const std::size_t r = least_rotation(word_);
  Word c(word_.size());
  for (std::size_t t = 0; t < word_.size(); ++t) c[t] = word_[(r + t) % word_.size()];
  return c;
}

PeriodicOrbit periodize(const SymbolicPoint& x, std::int64_t n, const Subshift& space) {
  if (n <= 0) throw Error("periodize: n must be positive");
  Word w = x.block(0, n);
  if (!space.admissible(w)) throw InadmissibleWrap("periodize: word " + format_word(w) + " is not admissible");
  if (!space.allowed(w.back(), w.front()))
    throw InadmissibleWrap("periodize: wrap transition " + std::to_string(w.back()) + "->" +
                           std::to_string(w.front()) + " is forbidden");
  return PeriodicOrbit(std::move(w));
}

double ClosingCertificate::bound(std::int64_t j) const {
  const std::int64_t n = recurrence_time;
  const auto m = static_cast<double>(std::min(j, n - j));
  return c1 * std::exp(-theta_close * m) * return_distance;
}

bool ClosingCertificate::holds() const { return worst_margin() >= 0.0; }

double ClosingCertificate::worst_margin() const {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < distances.size(); ++j) {
    const double b = bound(static_cast<std::int64_t>(j));
    // relative round-off allowance for the floating evaluation of the bound
    const double margin = b * (1.0 + 1e-12) - distances[j];
    worst = std::min(worst, margin);
  }
  return worst;
}

ClosingCertificate anosov_close(const SymbolicPoint& x, std::int64_t n, const Subshift& space) {
  if (n <= 0) throw Error("anosov_close: n must be positive");
  if (x.at(n) != x.at(0))
    throw NotRecurrent("anosov_close: x_" + std::to_string(n) + " != x_0, so d(f^n x, x) = 1");
  ClosingCertificate cert{x, n, periodize(x, n, space), std::nullopt, 0.0, {}, {}, 1.0,
                          std::log(1.0 / space.theta())};
  cert.return_agreement = agreement_radius(x.shifted(n), x);
  cert.return_distance =
      cert.return_agreement ? std::pow(space.theta(), static_cast<double>(*cert.return_agreement)) : 0.0;
  cert.agreements.reserve(static_cast<std::size_t>(n) + 1);
  cert.distances.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t j = 0; j <= n; ++j) {
    const auto a = agreement_radius(x.shifted(j), cert.orbit.point(j));
    cert.agreements.push_back(a);
    cert.distances.push_back(a ? std::pow(space.theta(), static_cast<double>(*a)) : 0.0);
  }
  return cert;
}

std::vector<PeriodicOrbit> enumerate_periodic_orbits(const Subshift& space, int max_period, std::uint64_t budget) {
  if (max_period < 1) return {};
  const int k = space.alphabet_size();
  double words = std::pow(static_cast<double>(k), max_period);
  if (words > static_cast<double>(budget))
    throw BudgetExceeded("enumerate_periodic_orbits: " + std::to_string(k) + "^" + std::to_string(max_period) +
                         " exceeds the enumeration budget " + std::to_string(budget));
  // Lyndon words of length <= max_period in lexicographic order (Duval).
  std::vector<std::vector<Word>> by_length(static_cast<std::size_t>(max_period) + 1);
  Word w{-1};
  while (!w.empty()) {
    ++w.back();
    if (space.cyclically_admissible(w)) by_length[w.size()].push_back(w);
    const std::size_t m = w.size();
    while (w.size() < static_cast<std::size_t>(max_period)) w.push_back(w[w.size() - m]);
    while (!w.empty() && w.back() == k - 1) w.pop_back();
  }
  std::vector<PeriodicOrbit> out;
  for (auto& group : by_length)
    for (auto& word : group) out.emplace_back(std::move(word));
  return out;
}

namespace {

// Smallest K with theta^K < rho (rho <= 1).
std::int64_t agreement_needed(double rho, double theta) {
  std::int64_t k = 0;
  double t = 1.0;
  while (t >= rho) {
    t *= theta;
    ++k;
    if (k > 4096) throw Error("recurrence radius rho is too small");
  }
  return k;
}

}  // namespace

std::vector<std::int64_t> recurrence_times(const SymbolicPoint& x, double rho, std::int64_t max_n,
                                           const Subshift& space) {
  if (!(rho > 0.0)) throw Error("recurrence_times: rho must be positive");
  std::vector<std::int64_t> out;
  if (rho > 1.0) {
    for (std::int64_t n = 1; n <= max_n; ++n) out.push_back(n);
    return out;
  }
  const std::int64_t need = agreement_needed(rho, space.theta());
  const std::int64_t lo = -(need - 1);
  const Word tape = x.block(lo, max_n + 2 * need);
  auto sym = [&](std::int64_t i) { return tape[static_cast<std::size_t>(i - lo)]; };
  for (std::int64_t n = 1; n <= max_n; ++n) {
    bool ok = true;
    for (std::int64_t i = -(need - 1); i <= need - 1 && ok; ++i) ok = sym(n + i) == sym(i);
    if (ok) out.push_back(n);
  }
  return out;
}

std::optional<std::int64_t> first_recurrence(const SymbolicPoint& x, double rho, std::int64_t max_n,
                                             const Subshift& space, std::int64_t min_n) {
  if (!(rho > 0.0)) throw Error("first_recurrence: rho must be positive");
  if (rho > 1.0) return min_n <= max_n ? std::optional<std::int64_t>(std::max<std::int64_t>(min_n, 1)) : std::nullopt;
  const std::int64_t need = agreement_needed(rho, space.theta());
  const std::int64_t lo = -(need - 1);
  // the tape grows geometrically; recurrences usually come long before max_n
  Word tape;
  std::int64_t have = 0;
  auto sym = [&](std::int64_t i) { return tape[static_cast<std::size_t>(i - lo)]; };
  for (std::int64_t n = std::max<std::int64_t>(min_n, 1); n <= max_n; ++n) {
    if (n + need > lo + have) {
      const std::int64_t want = std::min(max_n + 2 * need, std::max<std::int64_t>(2 * (n + 2 * need), 4096));
      const Word more = x.block(lo + have, want - have);
      tape.insert(tape.end(), more.begin(), more.end());
      have = want;
    }
    bool ok = true;
    for (std::int64_t i = -(need - 1); i <= need - 1 && ok; ++i) ok = sym(n + i) == sym(i);
    if (ok) return n;
  }
  return std::nullopt;
}

double weakstar_discrepancy(const PeriodicOrbit& orbit, const SymbolLaw& law, int word_length) {
  if (word_length < 1) throw Error("weakstar_discrepancy: word length must be >= 1");
  const int k = law.alphabet_size();
  const Word& w = orbit.word();
  const auto n = w.size();
  double worst = 0.0;
  for (int len = 1; len <= word_length; ++len) {
    std::map<std::uint64_t, std::uint64_t> counts;
    for (std::size_t j = 0; j < n; ++j) {
      std::uint64_t code = 0;
      for (int t = 0; t < len; ++t) code = code * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(w[(j + static_cast<std::size_t>(t)) % n]);
      ++counts[code];
    }
    const auto total = static_cast<std::uint64_t>(std::llround(std::pow(k, len)));
    Word cyl(static_cast<std::size_t>(len));
    for (std::uint64_t code = 0; code < total; ++code) {
      std::uint64_t c = code;
      for (int t = len - 1; t >= 0; --t) {
        cyl[static_cast<std::size_t>(t)] = static_cast<Symbol>(c % static_cast<std::uint64_t>(k));
        c /= static_cast<std::uint64_t>(k);
      }
      const auto it = counts.find(code);
      const double freq = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
      worst = std::max(worst, std::abs(freq - law.cylinder_measure(cyl)));
    }
  }
  return worst;
}

Word de_bruijn_word(int alphabet_size, int order) {
  if (alphabet_size < 2 || order < 1) throw Error("de_bruijn_word: need k >= 2 and order >= 1");
  Word out;
  Word w{-1};
  while (!w.empty()) {
    ++w.back();
    if (order % static_cast<int>(w.size()) == 0) out.insert(out.end(), w.begin(), w.end());
    const std::size_t m = w.size();
    while (w.size() < static_cast<std::size_t>(order)) w.push_back(w[w.size() - m]);
    while (!w.empty() && w.back() == alphabet_size - 1) w.pop_back();
  }
  return out;
}

}  // namespace lyaplab
