#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "lyaplab/config.hpp"
#include "lyaplab/errors.hpp"
#include "lyaplab/exterior.hpp"
#include "lyaplab/random.hpp"
#include "lyaplab/spectrum.hpp"
#include "oracles.hpp"

using namespace lyaplab;

namespace {

const Subshift kFull2 = Subshift::full(2, 0.5);
const SymbolLaw kFair = SymbolLaw::bernoulli({0.5, 0.5});

Matrix diag(std::initializer_list<double> v) {
  Vector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

bool same_pattern(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (is_neg_inf(a[i]) != is_neg_inf(b[i])) return false;
  return true;
}

double max_finite_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!is_neg_inf(a[i]) && !is_neg_inf(b[i])) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Cocycle with a mix of invertible, upper-triangular and nilpotent entries.
MatrixCocycle mixed_cocycle(int d, std::uint64_t seed) {
  auto table_cocycle = random_locally_constant_cocycle(2, d, 0, -1.0, 1.0, seed);
  if (seed % 4 != 0) return table_cocycle;
  std::vector<Matrix> table;
  for (Symbol s = 0; s < 2; ++s) {
    Matrix m = table_cocycle.evaluate(SymbolicPoint::constant(s)).triangularView<Eigen::StrictlyUpper>();
    if (s == 1) m.diagonal().setConstant(1.5);
    table.push_back(m);
  }
  return locally_constant_cocycle(2, 0, table);
}

}  // namespace

TEST(SpectrumType, SortsAndGroups) {
  const LyapunovSpectrum s({kNegInf, 1.0, 0.5, 1.0});
  EXPECT_EQ(s.values(), (std::vector<double>{1.0, 1.0, 0.5, kNegInf}));
  const auto g = s.groups();
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].multiplicity, 2);
  EXPECT_EQ(g[1].value, 0.5);
  EXPECT_TRUE(is_neg_inf(g[2].value));
  int total = 0;
  for (const auto& e : g) total += e.multiplicity;
  EXPECT_EQ(total, 4);
}

TEST(PeriodicSpectrum, Examples) {
  const auto s = periodic_spectrum(constant_cocycle(diag({2.0, 0.5})), PeriodicOrbit(Word{0}));
  EXPECT_NEAR(s[0], std::log(2.0), 1e-15);
  EXPECT_NEAR(s[1], -std::log(2.0), 1e-15);

  const auto z = periodic_spectrum(constant_cocycle(diag({2.0, 0.0})), PeriodicOrbit(Word{1}));
  EXPECT_NEAR(z[0], std::log(2.0), 1e-15);
  EXPECT_TRUE(is_neg_inf(z[1]));

  const auto ex = periodic_spectrum(PaperExampleCocycle{}.cocycle(), PeriodicOrbit(Word{1}));
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_NEAR(ex[0], std::log(3.0), 1e-15);
}

TEST(PeriodicSpectrum, MatchesClosedFormEigenvalues) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto a = random_locally_constant_cocycle(2, 2, 0, -1.0, 1.0, 500 + s);
    const PeriodicOrbit p(parse_word("0111"));
    const Eigen::Matrix2d prod = product(a, p.representative(), 4).value;
    const auto [m1, m2] = oracle::eigen_moduli_2x2(prod);
    const auto spec = periodic_spectrum(a, p);
    EXPECT_NEAR(spec[0], std::log(m1) / 4.0, 1e-9);
    if (m2 > 1e-6 * m1) {
      EXPECT_NEAR(spec[1], std::log(m2) / 4.0, 1e-7);
    }
  }
}

TEST(PeriodicSpectrum, BasePointInvariance) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = random_locally_constant_cocycle(2, 3, 1, -1.0, 1.0, 600 + s);
    const Word w = parse_word("0010111");
    const auto base = periodic_spectrum(a, PeriodicOrbit(w));
    for (std::size_t r = 1; r < w.size(); ++r) {
      const auto other = periodic_spectrum(a, PeriodicOrbit(oracle::rotate(w, r)));
      ASSERT_TRUE(same_pattern(base.values(), other.values()));
      EXPECT_LE(max_finite_gap(base.values(), other.values()), 1e-12);
    }
  }
}

TEST(PeriodicSpectrum, ScalingCovariance) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = mixed_cocycle(3, 700 + s);
    const PeriodicOrbit p(parse_word("011"));
    const auto base = periodic_spectrum(a, p);
    const auto scaled = periodic_spectrum(a.scaled(5.0), p);
    ASSERT_TRUE(same_pattern(base.values(), scaled.values()));
    for (std::size_t i = 0; i < base.size(); ++i)
      if (!is_neg_inf(base[i])) {
        EXPECT_NEAR(scaled[i], base[i] + std::log(5.0), 1e-9);
      }
  }
}

TEST(FiniteTime, DiagonalAndIdentity) {
  const auto v = finite_time_spectrum(constant_cocycle(diag({2.0, 0.5})), SymbolicPoint::seeded(1, kFair), 50);
  EXPECT_NEAR(v[0], std::log(2.0), 1e-12);
  EXPECT_NEAR(v[1], -std::log(2.0), 1e-12);
  for (std::int64_t n : {1, 7, 100}) {
    const auto id = finite_time_spectrum(constant_cocycle(Matrix::Identity(3, 3)), SymbolicPoint::constant(0), n);
    for (double g : id) EXPECT_NEAR(g, 0.0, 1e-15);
  }
  const auto z = finite_time_spectrum(constant_cocycle(diag({2.0, 0.0})), SymbolicPoint::constant(0), 10);
  EXPECT_NEAR(z[0], std::log(2.0), 1e-12);
  EXPECT_TRUE(is_neg_inf(z[1]));
}

TEST(FiniteTime, AgreesWithPeriodicOracle) {
  int compared = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const int d = 2 + static_cast<int>(s % 2);
    const auto a = mixed_cocycle(d, 800 + s);
    for (const auto& p : enumerate_periodic_orbits(kFull2, 5)) {
      const auto exact = periodic_spectrum(a, p);
      const auto ft = finite_time_spectrum(a, p.representative(), 200 * p.period());
      ASSERT_TRUE(same_pattern(exact.values(), ft)) << "cocycle " << s << " orbit " << format_word(p.word());
      EXPECT_LE(max_finite_gap(exact.values(), ft), 5e-3) << "cocycle " << s << " orbit " << format_word(p.word());
      ++compared;
    }
  }
  EXPECT_GE(compared, 200);
}

TEST(Exterior, SpectrumExamples) {
  const auto s = full_spectrum_via_exterior(constant_cocycle(diag({2.0, 0.5})), PeriodicOrbit(Word{0}));
  EXPECT_NEAR(s[0], std::log(2.0), 1e-12);
  EXPECT_NEAR(s[1], -std::log(2.0), 1e-12);
  const auto z = full_spectrum_via_exterior(constant_cocycle(diag({2.0, 0.0})), PeriodicOrbit(Word{0}));
  EXPECT_TRUE(is_neg_inf(z[1]));
}

TEST(Exterior, MatchesPeriodicOracle) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto a = mixed_cocycle(3, 900 + s);
    for (const auto& p : enumerate_periodic_orbits(kFull2, 6)) {
      const auto exact = periodic_spectrum(a, p);
      const auto ext = full_spectrum_via_exterior(a, p);
      ASSERT_TRUE(same_pattern(exact.values(), ext.values()))
          << "cocycle " << s << " orbit " << format_word(p.word());
      EXPECT_LE(max_finite_gap(exact.values(), ext.values()), 1e-9)
          << "cocycle " << s << " orbit " << format_word(p.word());
    }
  }
}

TEST(Exterior, InvertibleThreeByThreePeriodSix) {
  const auto a = random_locally_constant_cocycle(2, 3, 0, 0.5, 1.5, 42);
  const PeriodicOrbit p(parse_word("001011"));
  EXPECT_LE(max_finite_gap(periodic_spectrum(a, p).values(), full_spectrum_via_exterior(a, p).values()), 1e-9);
}

TEST(GrowthRate, Subadditivity) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto a = random_locally_constant_cocycle(2, 3, 1, -1.0, 1.0, 1000 + s);
    const auto x = SymbolicPoint::seeded(s, kFair);
    CounterStream rng(derive_seed(3, s));
    const std::int64_t m = 1 + rng.below(50);
    const std::int64_t n = 1 + rng.below(50);
    const double lhs = static_cast<double>(m + n) * log_norm_growth(a, x, m + n);
    const double rhs = static_cast<double>(m) * log_norm_growth(a, x, m) +
                       static_cast<double>(n) * log_norm_growth(a, x.shifted(m), n);
    if (is_neg_inf(rhs)) {
      EXPECT_TRUE(is_neg_inf(lhs));
      continue;
    }
    EXPECT_LE(lhs, rhs + 1e-10);
  }
}

TEST(Kingman, ConstantDiagonal) {
  const auto a = constant_cocycle(diag({2.0, 0.5}));
  for (std::int64_t n : {1, 10, 50}) {
    const auto k = kingman_upper(a, kFull2, kFair, n, 1.0, 8, 3);
    EXPECT_NEAR(k.value, std::log(2.0), 1e-12);
    EXPECT_EQ(k.annihilated, 0);
  }
  EXPECT_THROW(kingman_upper(a, kFull2, kFair, 10, 0.0, 8, 3), Error);
}

TEST(Kingman, NilpotentPairBound) {
  const auto b = nilpotent_pair_cocycle();
  const double m = 30.0;
  const auto k = kingman_upper(b, kFull2, kFair, 50, m, 64, 9);
  const double fraction = static_cast<double>(k.annihilated) / k.samples;
  // non-annihilated samples have phi_n <= log 2
  EXPECT_LE(k.value, -m * fraction + (1.0 - fraction) * std::log(2.0) + 1e-12);
  EXPECT_GT(fraction, 0.9);
}

TEST(Kingman, DecreasesAlongNWithGrowingTruncation) {
  const auto b = nilpotent_pair_cocycle();
  double previous = 0.0;
  for (std::int64_t n : {10, 20, 50}) {
    const auto k = kingman_upper(b, kFull2, kFair, n, static_cast<double>(n), 64, 9);
    if (n > 10) {
      EXPECT_LE(k.value, previous - 1.0) << "n=" << n;
    }
    previous = k.value;
  }
}

TEST(Kingman, FixedTruncationSaturates) {
  // once every sample annihilates, max(phi_n, -m) is pinned at -m
  const auto b = nilpotent_pair_cocycle();
  const auto k20 = kingman_upper(b, kFull2, kFair, 20, 50.0, 64, 9);
  const auto k50 = kingman_upper(b, kFull2, kFair, 50, 50.0, 64, 9);
  EXPECT_EQ(k50.annihilated, 64);
  EXPECT_EQ(k50.value, -50.0);
  EXPECT_GE(k50.value, k20.value);
}

TEST(Kingman, MonotoneInTruncation) {
  const auto b = nilpotent_pair_cocycle();
  double previous = 1e300;
  for (double m : {1.0, 2.0, 5.0, 10.0, 40.0}) {
    const double v = kingman_upper(b, kFull2, kFair, 20, m, 32, 4).value;
    EXPECT_LE(v, previous);
    previous = v;
  }
}

TEST(Kingman, LargeTruncationRecoversTheMean) {
  const auto a = random_locally_constant_cocycle(2, 2, 0, 0.5, 1.5, 77);
  const int samples = 16;
  const auto k = kingman_upper(a, kFull2, kFair, 30, 1e6, samples, 21);
  ASSERT_EQ(k.annihilated, 0);
  double mean = 0.0;
  for (int i = 0; i < samples; ++i)
    mean += log_norm_growth(a, SymbolicPoint::seeded(derive_seed(21, static_cast<std::uint64_t>(i)), kFair), 30);
  EXPECT_NEAR(k.value, mean / samples, 1e-12);
}

TEST(Ergodic, ConstantDiagonalHasNoDispersion) {
  const auto est = ergodic_spectrum_estimate(constant_cocycle(diag({2.0, 0.5})), kFull2, kFair, 200, 6, 5);
  EXPECT_NEAR(est.values[0], std::log(2.0), 1e-12);
  EXPECT_NEAR(est.values[1], -std::log(2.0), 1e-12);
  EXPECT_NEAR(est.standard_errors[0], 0.0, 1e-12);
  EXPECT_NEAR(est.standard_errors[1], 0.0, 1e-12);
  EXPECT_EQ(est.n_samples, 6);
  EXPECT_EQ(est.n_steps, 200);
}

TEST(Ergodic, NilpotentPairAnnihilates) {
  // two-step identity: B(0) diag(2^k) B(0) = 0
  Matrix b0(2, 2);
  b0 << 0, 1, 0, 0;
  for (int k = 0; k < 5; ++k)
    EXPECT_EQ(b0 * (std::pow(2.0, k) * Matrix::Identity(2, 2)) * b0, Matrix::Zero(2, 2));
  const auto est = ergodic_spectrum_estimate(nilpotent_pair_cocycle(), kFull2, kFair, 200, 10, 2);
  EXPECT_TRUE(is_neg_inf(est.values[0]));
  EXPECT_TRUE(is_neg_inf(est.values[1]));
  EXPECT_EQ(est.standard_errors[0], 0.0);
}

TEST(Ergodic, BlockDiagonalConstantBlockIsExact) {
  const auto a = block_diagonal({PaperExampleCocycle{}.cocycle(), constant_cocycle(Matrix::Constant(1, 1, 2.0))});
  const auto est = ergodic_spectrum_estimate(a, kFull2, kFair, 100000, 20, 31, 4);
  EXPECT_NEAR(est.values[1], std::log(2.0), 1e-12);
  EXPECT_LT(est.standard_errors[0], 0.02);
}

TEST(Ergodic, DeterministicAcrossWorkerCounts) {
  const auto a = random_locally_constant_cocycle(2, 3, 1, -1.0, 1.0, 55);
  const auto one = ergodic_spectrum_estimate(a, kFull2, kFair, 500, 12, 8, 1);
  const auto four = ergodic_spectrum_estimate(a, kFull2, kFair, 500, 12, 8, 4);
  EXPECT_EQ(one.values, four.values);
  EXPECT_EQ(one.standard_errors, four.standard_errors);
}

TEST(Ergodic, ExteriorEstimateAgrees) {
  const auto a = random_locally_constant_cocycle(2, 2, 0, 0.5, 1.5, 61);
  const auto direct = ergodic_spectrum_estimate(a, kFull2, kFair, 5000, 8, 4);
  const auto ext = full_spectrum_via_exterior(a, kFull2, kFair, 5000, 8, 4);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(direct.values[i], ext.values[i], 0.05);
}

TEST(Ergodic, MarkovLawOutsideSubshiftIsRejected) {
  const Subshift golden(2, {{true, true}, {true, false}}, 0.5);
  const auto bad = SymbolLaw::markov({{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_THROW(ergodic_spectrum_estimate(constant_cocycle(Matrix::Identity(1, 1)), golden, bad, 10, 2, 1),
               IncompatibleLaw);
}

TEST(Parallel, CoversEveryIndexOnce) {
  std::vector<int> hits(100, 0);
  parallel_for(100, 7, [&](int i) { ++hits[static_cast<std::size_t>(i)]; });
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}
