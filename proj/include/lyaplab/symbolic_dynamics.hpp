#pragma once

// Shift spaces over a finite alphabet: subshifts of finite type with the
// cylinder ultrametric, finitely described two-sided points, periodic orbits,
// recurrence, closing of recurrent segments and word-frequency discrepancy.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lyaplab {

using Symbol = int;
using Word = std::vector<Symbol>;

/// Default number of coordinates scanned on each side before a distance
/// computation gives up.
inline constexpr std::int64_t kDefaultScanCap = std::int64_t{1} << 20;

/// Default bound on k^max_period for orbit enumeration (2^16, i.e. period 16
/// on two symbols).
inline constexpr std::uint64_t kDefaultEnumerationBudget = std::uint64_t{1} << 16;

Word parse_word(const std::string& text);
std::string format_word(std::span<const Symbol> w);

/// Shift-invariant law on symbol sequences: i.i.d. (Bernoulli) or a
/// stationary first-order Markov chain.
class SymbolLaw {
 public:
  static SymbolLaw bernoulli(std::vector<double> probabilities);
  static SymbolLaw markov(std::vector<std::vector<double>> transition);

  bool is_markov() const noexcept { return markov_; }
  int alphabet_size() const noexcept { return static_cast<int>(stationary_.size()); }
  const std::vector<double>& stationary() const noexcept { return stationary_; }
  /// Row-stochastic matrix. For Bernoulli every row equals the marginal.
  const std::vector<std::vector<double>>& transition() const noexcept { return transition_; }
  /// Transition matrix of the time-reversed chain.
  const std::vector<std::vector<double>>& reversed() const noexcept { return reversed_; }

  /// mu([w]) for the cylinder fixed by w at indices 0..|w|-1.
  double cylinder_measure(std::span<const Symbol> w) const;

 private:
  SymbolLaw() = default;
  bool markov_ = false;
  std::vector<double> stationary_;
  std::vector<std::vector<double>> transition_;
  std::vector<std::vector<double>> reversed_;
};

/// Subshift of finite type given by a k x k transition table (full shift when
/// every transition is allowed) together with the metric base theta.
class Subshift {
 public:
  static Subshift full(int alphabet_size, double theta);
  Subshift(int alphabet_size, std::vector<std::vector<bool>> allowed, double theta);

  int alphabet_size() const noexcept { return k_; }
  double theta() const noexcept { return theta_; }
  bool is_full() const noexcept { return full_; }
  bool allowed(Symbol a, Symbol b) const;
  const std::vector<std::vector<bool>>& transitions() const noexcept { return allowed_; }

  bool admissible(std::span<const Symbol> w) const;
  /// Admissible including the wrap transition w.back() -> w.front().
  bool cyclically_admissible(std::span<const Symbol> w) const;

  /// Throws IncompatibleLaw when the law charges a forbidden transition.
  void check_law(const SymbolLaw& law) const;

 private:
  int k_;
  std::vector<std::vector<bool>> allowed_;
  double theta_;
  bool full_;
};

namespace detail {
struct SeededSource;
}

/// A finitely described point of the two-sided shift space, evaluated
/// lazily coordinate by coordinate. Copies are cheap; the value is immutable.
class SymbolicPoint {
 public:
  struct Periodic {
    std::shared_ptr<const Word> word;
    std::int64_t phase;
  };
  /// ... left left left | core | right right right ...
  /// core[0] sits at index `offset`; the left word repeats towards -infinity
  /// ending at offset-1, the right word repeats towards +infinity.
  struct EventuallyPeriodic {
    std::shared_ptr<const Word> left;
    std::shared_ptr<const Word> core;
    std::shared_ptr<const Word> right;
    std::int64_t offset;
  };
  struct Seeded {
    std::shared_ptr<const detail::SeededSource> source;
    std::int64_t shift;
  };
  using Kind = std::variant<Periodic, EventuallyPeriodic, Seeded>;

  static SymbolicPoint periodic(Word word, std::int64_t phase = 0);
  static SymbolicPoint eventually_periodic(Word left, Word core, Word right, std::int64_t offset);
  static SymbolicPoint seeded(std::uint64_t seed, const SymbolLaw& law);
  /// The fixed point s s s ...
  static SymbolicPoint constant(Symbol s) { return periodic(Word{s}); }

  Symbol at(std::int64_t i) const;
  SymbolicPoint shifted(std::int64_t m) const;
  /// Symbols at indices from..from+length-1.
  Word block(std::int64_t from, std::int64_t length) const;

  const Kind& kind() const noexcept { return kind_; }
  bool is_periodic() const noexcept { return std::holds_alternative<Periodic>(kind_); }
  bool is_seeded() const noexcept { return std::holds_alternative<Seeded>(kind_); }
  bool finitely_described() const noexcept { return !is_seeded(); }

  std::string describe() const;

 private:
  explicit SymbolicPoint(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// x_{i+m} as a point: (shift(x, m))_i = x_{i+m}.
inline SymbolicPoint shift(const SymbolicPoint& x, std::int64_t m) { return x.shifted(m); }

/// N(x, y) = max{N >= 0 : x_n = y_n for all |n| < N}; nullopt when the points
/// are provably equal. Throws ScanCapExceeded when agreement reaches the cap
/// and equality cannot be decided from the descriptions.
std::optional<std::int64_t> agreement_radius(const SymbolicPoint& x, const SymbolicPoint& y,
                                             std::int64_t scan_cap = kDefaultScanCap);

/// d(x, y) = theta^N(x, y), 0 for equal points.
double cylinder_distance(const SymbolicPoint& x, const SymbolicPoint& y, const Subshift& space,
                         std::int64_t scan_cap = kDefaultScanCap);

/// Starting index of the lexicographically least rotation (Booth).
std::size_t least_rotation(std::span<const Symbol> w);

/// Smallest m dividing |w| with w m-periodic.
std::size_t least_period(std::span<const Symbol> w);

class PeriodicOrbit {
 public:
  /// Orbit of Periodic(word, 0); the word is reduced to its least period.
  explicit PeriodicOrbit(Word word);

  std::int64_t period() const noexcept { return static_cast<std::int64_t>(word_.size()); }
  const Word& word() const noexcept { return word_; }
  SymbolicPoint representative() const { return SymbolicPoint::periodic(word_, 0); }
  SymbolicPoint point(std::int64_t phase) const { return SymbolicPoint::periodic(word_, phase); }
  /// Least rotation; identical for every point of the orbit.
  Word canonical_word() const;
  bool same_orbit(const PeriodicOrbit& other) const { return canonical_word() == other.canonical_word(); }

 private:
  Word word_;
};

/// Periodic point copying x_0..x_{n-1}. Throws InadmissibleWrap when the word
/// or its wrap transition is forbidden.
PeriodicOrbit periodize(const SymbolicPoint& x, std::int64_t n, const Subshift& space);

struct ClosingCertificate {
  SymbolicPoint source;
  std::int64_t recurrence_time = 0;
  PeriodicOrbit orbit;
  /// N(f^n x, x); nullopt when f^n x = x.
  std::optional<std::int64_t> return_agreement;
  double return_distance = 0.0;
  /// N(f^j x, f^j p) for j = 0..n; nullopt entries are exact coincidences.
  std::vector<std::optional<std::int64_t>> agreements;
  std::vector<double> distances;
  double c1 = 1.0;
  double theta_close = 0.0;

  double bound(std::int64_t j) const;
  bool holds() const;
  /// min_j (bound_j - d_j); non-negative iff the certificate holds.
  double worst_margin() const;
};

/// Shadow the recurrent segment x_0..x_{n-1} by a periodic orbit and record
/// d(f^j x, f^j p) for j = 0..n. Constants: C1 = 1, theta_close = log(1/theta).
/// Throws NotRecurrent when x_n != x_0.
ClosingCertificate anosov_close(const SymbolicPoint& x, std::int64_t n, const Subshift& space);

/// One representative per cyclic class of admissible words of least period
/// 1..max_period, ordered by period and then lexicographically (each word is
/// its own least rotation).
std::vector<PeriodicOrbit> enumerate_periodic_orbits(const Subshift& space, int max_period,
                                                     std::uint64_t budget = kDefaultEnumerationBudget);

/// All n in 1..max_n with d(f^n x, x) < rho, ascending.
std::vector<std::int64_t> recurrence_times(const SymbolicPoint& x, double rho, std::int64_t max_n,
                                           const Subshift& space);

/// Smallest n in min_n..max_n with d(f^n x, x) < rho.
std::optional<std::int64_t> first_recurrence(const SymbolicPoint& x, double rho, std::int64_t max_n,
                                             const Subshift& space, std::int64_t min_n = 1);

/// max over words w with 1 <= |w| <= L of |cyclic frequency of w in the orbit - mu([w])|.
double weakstar_discrepancy(const PeriodicOrbit& orbit, const SymbolLaw& law, int word_length);

/// De Bruijn word of order L over k symbols (concatenation of Lyndon words
/// whose length divides L, in lexicographic order).
Word de_bruijn_word(int alphabet_size, int order);

}  // namespace lyaplab
