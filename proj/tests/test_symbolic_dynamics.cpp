#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "lyaplab/errors.hpp"
#include "lyaplab/random.hpp"
#include "lyaplab/symbolic_dynamics.hpp"
#include "oracles.hpp"

using namespace lyaplab;

namespace {

const Subshift kFull2 = Subshift::full(2, 0.5);
const SymbolLaw kFair = SymbolLaw::bernoulli({0.5, 0.5});

Subshift golden_mean() { return Subshift(2, {{true, true}, {true, false}}, 0.5); }

SymbolicPoint paper_q() { return SymbolicPoint::eventually_periodic({1}, {0}, {1}, -1); }

// A finitely described point with random symbols on [-20, 30] and constant tails.
SymbolicPoint random_finite_point(std::uint64_t seed, Word* core_out = nullptr) {
  CounterStream rng(seed);
  Word core(51);
  for (auto& s : core) s = static_cast<Symbol>(rng.below(2));
  if (core_out) *core_out = core;
  return SymbolicPoint::eventually_periodic({static_cast<Symbol>(rng.below(2))}, core,
                                            {static_cast<Symbol>(rng.below(2))}, -20);
}

}  // namespace

TEST(Words, ParseAndFormatRoundTrip) {
  EXPECT_EQ(parse_word("0110"), (Word{0, 1, 1, 0}));
  EXPECT_EQ(format_word(Word{0, 1, 1, 0}), "0110");
  EXPECT_EQ(parse_word("a2"), (Word{10, 2}));
  EXPECT_THROW(parse_word("0-1"), Error);
}

TEST(Subshift, FullAndGoldenMeanAdmissibility) {
  EXPECT_TRUE(kFull2.is_full());
  const auto gm = golden_mean();
  EXPECT_FALSE(gm.is_full());
  EXPECT_TRUE(gm.admissible(Word{0, 1, 0, 0, 1}));
  EXPECT_FALSE(gm.admissible(Word{0, 1, 1}));
  EXPECT_TRUE(gm.cyclically_admissible(Word{1, 0}));
  EXPECT_FALSE(gm.cyclically_admissible(Word{1, 0, 1}));
  EXPECT_FALSE(gm.cyclically_admissible(Word{1}));
}

TEST(Subshift, RejectsDeadEndsAndBadTheta) {
  EXPECT_THROW(Subshift(2, {{true, false}, {false, false}}, 0.5), Error);
  EXPECT_THROW(Subshift(2, {{false, true}, {false, true}}, 0.5), Error);
  EXPECT_THROW(Subshift::full(2, 1.0), Error);
  EXPECT_THROW(Subshift::full(1, 0.5), Error);
}

TEST(Subshift, MarkovLawOnForbiddenTransitionIsIncompatible) {
  const auto gm = golden_mean();
  EXPECT_NO_THROW(gm.check_law(SymbolLaw::markov({{0.5, 0.5}, {1.0, 0.0}})));
  EXPECT_THROW(gm.check_law(SymbolLaw::markov({{0.5, 0.5}, {0.5, 0.5}})), IncompatibleLaw);
  EXPECT_THROW(gm.check_law(kFair), IncompatibleLaw);
}

TEST(CylinderDistance, IdenticalPeriodicPointsAreAtZero) {
  const auto x = SymbolicPoint::periodic(parse_word("01"));
  const auto y = SymbolicPoint::periodic(parse_word("0101"), 2);
  EXPECT_EQ(cylinder_distance(x, y, kFull2), 0.0);
}

TEST(CylinderDistance, PointQAgainstAllOnes) {
  // q and 111... first differ at index -1
  const auto q = paper_q();
  const auto ones = SymbolicPoint::constant(1);
  EXPECT_EQ(oracle::agreement(q, ones, 100), 1);
  EXPECT_EQ(*agreement_radius(q, ones), 1);
  EXPECT_DOUBLE_EQ(cylinder_distance(q, ones, kFull2), 0.5);
}

TEST(CylinderDistance, AgreementOnBallOfRadiusFour) {
  Word core;
  const auto x = random_finite_point(3, &core);
  Word changed = core;
  changed[20 + 5] ^= 1;  // index 5
  const auto y = SymbolicPoint::eventually_periodic({x.at(-100)}, changed, {x.at(100)}, -20);
  EXPECT_DOUBLE_EQ(cylinder_distance(x, y, kFull2), 0.03125);
}

TEST(CylinderDistance, MatchesCoordinateScanOnRandomPairs) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    Word core;
    const auto x = random_finite_point(2 * s, &core);
    CounterStream rng(s + 1000);
    Word other = core;
    const auto flips = rng.below(3);
    for (int f = 0; f < flips; ++f) other[static_cast<std::size_t>(rng.below(51))] ^= 1;
    const auto y = SymbolicPoint::eventually_periodic({x.at(-100)}, other, {x.at(100)}, -20);
    const auto expected = oracle::agreement(x, y, 200);
    const auto got = agreement_radius(x, y);
    if (expected < 0) {
      EXPECT_FALSE(got.has_value());
    } else {
      ASSERT_TRUE(got.has_value());
      EXPECT_EQ(*got, expected);
    }
  }
}

TEST(CylinderDistance, UltrametricInequality) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    Word core;
    const auto x = random_finite_point(s, &core);
    CounterStream rng(s + 7);
    auto perturb = [&]() {
      Word w = core;
      w[static_cast<std::size_t>(rng.below(51))] ^= 1;
      return SymbolicPoint::eventually_periodic({x.at(-100)}, w, {x.at(100)}, -20);
    };
    const auto y = perturb();
    const auto z = perturb();
    const double dxz = cylinder_distance(x, z, kFull2);
    EXPECT_LE(dxz, std::max(cylinder_distance(x, y, kFull2), cylinder_distance(y, z, kFull2)));
  }
}

TEST(CylinderDistance, ScanCapExceededForUndecidableAgreement) {
  const auto x = SymbolicPoint::seeded(42, kFair);
  const auto y = SymbolicPoint::eventually_periodic({0}, x.block(-20, 41), {0}, -20);
  EXPECT_THROW(agreement_radius(x, y, 8), ScanCapExceeded);
  EXPECT_EQ(*agreement_radius(x, y), oracle::agreement(x, y, 1000));
}

TEST(CylinderDistance, ExpansivityOfTheShift) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto x = SymbolicPoint::seeded(s, kFair);
    const auto y = SymbolicPoint::seeded(s + 500, kFair);
    const auto n = *agreement_radius(x, y);
    bool separated = false;
    for (std::int64_t j = -n; j <= n; ++j) separated = separated || cylinder_distance(x.shifted(j), y.shifted(j), kFull2) == 1.0;
    EXPECT_TRUE(separated);
  }
}

TEST(Shift, PeriodicPhaseAndComposition) {
  const auto p = SymbolicPoint::periodic(parse_word("01"), 0);
  const auto s = shift(p, 1);
  const auto expected = SymbolicPoint::periodic(parse_word("01"), 1);
  for (std::int64_t i = -2; i <= 2; ++i) {
    EXPECT_EQ(s.at(i), expected.at(i));
    EXPECT_NE(s.at(i), p.at(i));
  }
  EXPECT_EQ(cylinder_distance(shift(p, 2), p, kFull2), 0.0);
  const auto x = SymbolicPoint::seeded(9, kFair);
  EXPECT_EQ(x.shifted(0).block(-50, 100), x.block(-50, 100));
  EXPECT_EQ(x.shifted(3).shifted(-8).block(-40, 80), x.shifted(-5).block(-40, 80));
  for (std::int64_t i = -30; i < 30; ++i) EXPECT_EQ(x.shifted(7).at(i), x.at(i + 7));
}

TEST(SeededPoints, PureFunctionOfSeedAndIndex) {
  const auto a = SymbolicPoint::seeded(77, kFair);
  const auto b = SymbolicPoint::seeded(77, kFair);
  for (std::int64_t i : {-100000, -3, -1, 0, 1, 5, 99999}) EXPECT_EQ(a.at(i), b.at(i));
  const auto c = SymbolicPoint::seeded(78, kFair);
  EXPECT_NE(a.block(0, 64), c.block(0, 64));
}

TEST(SeededPoints, MarkovPathsRespectTheSubshift) {
  const auto gm = golden_mean();
  const auto law = SymbolLaw::markov({{0.4, 0.6}, {1.0, 0.0}});
  const auto x = SymbolicPoint::seeded(5, law);
  EXPECT_TRUE(gm.admissible(x.block(-5000, 10000)));
  const auto y = SymbolicPoint::seeded(5, law);
  EXPECT_EQ(y.at(-4321), x.at(-4321));
}

TEST(SymbolLaw, CylinderMeasures) {
  const auto law = SymbolLaw::markov({{0.4, 0.6}, {1.0, 0.0}});
  // stationary: pi_0 = 1 / 1.6
  const double pi0 = 1.0 / 1.6;
  EXPECT_NEAR(law.stationary()[0], pi0, 1e-12);
  EXPECT_NEAR(law.cylinder_measure(Word{0, 1, 0}), pi0 * 0.6 * 1.0, 1e-12);
  EXPECT_EQ(law.cylinder_measure(Word{1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(kFair.cylinder_measure(Word{1, 0, 1}), 0.125);
}

TEST(Periodize, CopiesTheBlockAndReducesThePeriod) {
  const auto x = SymbolicPoint::eventually_periodic({0}, parse_word("0110"), {1}, 0);
  const auto orbit = periodize(x, 4, kFull2);
  EXPECT_EQ(orbit.word(), parse_word("0110"));
  EXPECT_EQ(orbit.period(), 4);
  const auto p = SymbolicPoint::periodic(parse_word("01"));
  const auto same = periodize(p, 4, kFull2);
  EXPECT_EQ(same.period(), 2);
  EXPECT_TRUE(same.same_orbit(PeriodicOrbit(parse_word("10"))));
}

TEST(Periodize, ForbiddenWordsAndWraps) {
  const auto gm = golden_mean();
  const auto bad_word = SymbolicPoint::eventually_periodic({0}, parse_word("011"), {0}, 0);
  EXPECT_THROW(periodize(bad_word, 3, gm), Error);
  const auto bad_wrap = SymbolicPoint::eventually_periodic({0}, parse_word("101"), {0}, 0);
  EXPECT_THROW(periodize(bad_wrap, 3, gm), InadmissibleWrap);
}

TEST(Closing, PeriodicInputShadowsItselfExactly) {
  const PeriodicOrbit orbit(parse_word("00101"));
  const auto cert = anosov_close(orbit.point(2), 5, kFull2);
  EXPECT_EQ(cert.distances.size(), 6u);
  for (double d : cert.distances) EXPECT_EQ(d, 0.0);
  EXPECT_TRUE(cert.holds());
  EXPECT_TRUE(cert.orbit.same_orbit(orbit));
}

TEST(Closing, ReturnAgreementThreeAtTimeTen) {
  // x_{10+i} = x_i for |i| <= 2 and x_13 != x_3, so N(f^10 x, x) = 3
  CounterStream rng(2024);
  Word core(60);
  for (auto& s : core) s = static_cast<Symbol>(rng.below(2));
  auto at = [&](int i) -> Symbol& { return core[static_cast<std::size_t>(i + 20)]; };
  for (int i = -2; i <= 2; ++i) at(10 + i) = at(i);
  at(13) = 1 - at(3);
  const auto x = SymbolicPoint::eventually_periodic({0}, core, {1}, -20);
  const auto cert = anosov_close(x, 10, kFull2);
  ASSERT_TRUE(cert.return_agreement.has_value());
  EXPECT_EQ(*cert.return_agreement, 3);
  EXPECT_EQ(oracle::agreement(x.shifted(10), x, 100), 3);
  ASSERT_EQ(cert.distances.size(), 11u);
  for (std::int64_t j = 0; j <= 10; ++j) {
    const auto n = oracle::agreement(x.shifted(j), cert.orbit.point(j), 200);
    ASSERT_GE(n, 0);
    const double d = std::pow(0.5, static_cast<double>(n));
    const double bound = std::pow(0.5, static_cast<double>(std::min<std::int64_t>(j, 10 - j))) * std::pow(0.5, 3.0);
    EXPECT_LE(d, bound) << "j = " << j;
    EXPECT_EQ(cert.distances[static_cast<std::size_t>(j)], d);
  }
  EXPECT_TRUE(cert.holds());
}

TEST(Closing, NotRecurrentWhenTheSymbolDiffers) {
  const auto x = SymbolicPoint::eventually_periodic({0}, parse_word("011"), {0}, 0);
  EXPECT_THROW(anosov_close(x, 1, kFull2), NotRecurrent);
}

TEST(Closing, ThousandSeededFirstRecurrencesAgainstCoordinateScan) {
  int held = 0;
  for (int s = 0; s < 1000; ++s) {
    const auto x = SymbolicPoint::seeded(derive_seed(99, static_cast<std::uint64_t>(s)), kFair);
    const int level = 1 + s % 4;
    const auto n = first_recurrence(x, std::pow(0.5, level), 1 << 20, kFull2);
    ASSERT_TRUE(n.has_value());
    const auto cert = anosov_close(x, *n, kFull2);
    const auto ret = oracle::agreement(x.shifted(*n), x, 1 << 12);
    bool ok = true;
    for (std::int64_t j = 0; j <= *n; ++j) {
      const auto a = oracle::agreement(x.shifted(j), cert.orbit.point(j), 1 << 12);
      const double d = std::pow(0.5, static_cast<double>(a));
      const double bound = std::pow(0.5, static_cast<double>(std::min<std::int64_t>(j, *n - j) + ret));
      ok = ok && d <= bound;
    }
    held += ok && cert.holds();
  }
  EXPECT_EQ(held, 1000);
}

TEST(Closing, ShiftedInputGivesTheSameOrbit) {
  for (int s = 0; s < 100; ++s) {
    const auto x = SymbolicPoint::seeded(derive_seed(5, static_cast<std::uint64_t>(s)), kFair);
    const auto n = *first_recurrence(x, 0.5, 1 << 20, kFull2);  // N >= 2, so x_{n+1} = x_1
    const auto a = anosov_close(x, n, kFull2).orbit;
    const auto b = anosov_close(shift(x, 1), n, kFull2).orbit;
    EXPECT_TRUE(a.same_orbit(b));
  }
}

TEST(Enumeration, SmallCases) {
  const auto one = enumerate_periodic_orbits(kFull2, 1);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0].word(), Word{0});
  EXPECT_EQ(one[1].word(), Word{1});
  const auto four = enumerate_periodic_orbits(kFull2, 4);
  std::map<std::int64_t, int> by_period;
  for (const auto& o : four) ++by_period[o.period()];
  EXPECT_EQ(by_period[2], 1);
  EXPECT_EQ(by_period[4], 3);
}

TEST(Enumeration, CountsMatchBruteForceNecklaces) {
  for (int k : {2, 3}) {
    const int max_period = k == 2 ? 8 : 5;
    const auto orbits = enumerate_periodic_orbits(Subshift::full(k, 0.5), max_period);
    std::map<std::int64_t, std::size_t> counts;
    std::set<Word> seen;
    for (const auto& o : orbits) {
      ++counts[o.period()];
      EXPECT_EQ(o.word(), oracle::min_rotation(o.word()));
      EXPECT_TRUE(seen.insert(o.word()).second);
    }
    for (int n = 1; n <= max_period; ++n) {
      EXPECT_EQ(counts[n], oracle::orbits_of_period(k, n)) << "k=" << k << " n=" << n;
      // sum over d | n of d * (orbits of least period d) = k^n
      std::size_t total = 0;
      for (int d = 1; d <= n; ++d)
        if (n % d == 0) total += static_cast<std::size_t>(d) * counts[d];
      EXPECT_EQ(total, static_cast<std::size_t>(std::llround(std::pow(k, n))));
    }
  }
}

TEST(Enumeration, GoldenMeanKeepsOnlyCyclicallyAdmissibleClasses) {
  const auto gm = golden_mean();
  const auto orbits = enumerate_periodic_orbits(gm, 8);
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& o : orbits) ++counts[o.period()];
  for (int n = 1; n <= 8; ++n) {
    std::set<Word> classes;
    for (const auto& w : oracle::all_words(2, n))
      if (oracle::least_period(w) == static_cast<std::size_t>(n) && gm.cyclically_admissible(w))
        classes.insert(oracle::min_rotation(w));
    EXPECT_EQ(counts[n], classes.size()) << "n=" << n;
  }
}

TEST(Enumeration, BudgetExceeded) {
  EXPECT_THROW(enumerate_periodic_orbits(kFull2, 17), BudgetExceeded);
  EXPECT_NO_THROW(enumerate_periodic_orbits(kFull2, 16));
}

TEST(Words, LeastRotationAndPeriodAgainstBruteForce) {
  CounterStream rng(31);
  for (int t = 0; t < 500; ++t) {
    const auto len = 1 + rng.below(12);
    Word w(static_cast<std::size_t>(len));
    for (auto& s : w) s = static_cast<Symbol>(rng.below(3));
    EXPECT_EQ(oracle::rotate(w, least_rotation(w)), oracle::min_rotation(w));
    EXPECT_EQ(least_period(w), oracle::least_period(w));
    EXPECT_EQ(PeriodicOrbit(w).canonical_word(), oracle::min_rotation(Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(oracle::least_period(w)))));
  }
}

TEST(Recurrence, PeriodicPointsReturnAtMultiples) {
  const auto p = SymbolicPoint::periodic(parse_word("001"));
  const auto times = recurrence_times(p, 1e-6, 30, kFull2);
  EXPECT_EQ(times, (std::vector<std::int64_t>{3, 6, 9, 12, 15, 18, 21, 24, 27, 30}));
  const auto all = recurrence_times(SymbolicPoint::seeded(1, kFair), 1.5, 20, kFull2);
  EXPECT_EQ(all.size(), 20u);
}

TEST(Recurrence, SeededPointMatchesDirectScanAndDensity) {
  const auto x = SymbolicPoint::seeded(123, kFair);
  const std::int64_t max_n = 10000;
  const auto times = recurrence_times(x, 0.125, max_n, kFull2);
  // d < theta^3 means agreement on |i| <= 3
  std::vector<std::int64_t> expected;
  for (std::int64_t n = 1; n <= max_n; ++n)
    if (oracle::agreement(x.shifted(n), x, 64) >= 4) expected.push_back(n);
  EXPECT_EQ(times, expected);
  const double p = std::pow(2.0, -7.0);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(max_n));
  EXPECT_NEAR(static_cast<double>(times.size()) / static_cast<double>(max_n), p, 3.0 * se);
  ASSERT_FALSE(times.empty());
  EXPECT_EQ(*first_recurrence(x, 0.125, max_n, kFull2), times.front());
  if (times.size() > 2) {
    EXPECT_EQ(*first_recurrence(x, 0.125, max_n, kFull2, times[1]), times[1]);
  }
  EXPECT_FALSE(first_recurrence(x, 0.125, times.front() - 1, kFull2).has_value());
}

TEST(Discrepancy, ExactCases) {
  EXPECT_EQ(weakstar_discrepancy(PeriodicOrbit(parse_word("01")), kFair, 1), 0.0);
  EXPECT_EQ(weakstar_discrepancy(PeriodicOrbit(parse_word("0")), kFair, 1), 0.5);
  EXPECT_EQ(weakstar_discrepancy(PeriodicOrbit(de_bruijn_word(2, 4)), kFair, 4), 0.0);
}

TEST(Discrepancy, MatchesDirectFrequencyCount) {
  const auto law = SymbolLaw::markov({{0.3, 0.7}, {0.6, 0.4}});
  CounterStream rng(8);
  for (int t = 0; t < 50; ++t) {
    Word w(static_cast<std::size_t>(3 + rng.below(20)));
    for (auto& s : w) s = static_cast<Symbol>(rng.below(2));
    const PeriodicOrbit orbit(w);
    const Word& pw = orbit.word();
    double worst = 0.0;
    for (int len = 1; len <= 3; ++len)
      for (const auto& cyl : oracle::all_words(2, len)) {
        int count = 0;
        for (std::size_t j = 0; j < pw.size(); ++j) {
          bool match = true;
          for (int i = 0; i < len; ++i) match = match && pw[(j + static_cast<std::size_t>(i)) % pw.size()] == cyl[static_cast<std::size_t>(i)];
          count += match;
        }
        double mu = law.stationary()[static_cast<std::size_t>(cyl[0])];
        for (int i = 1; i < len; ++i) mu *= law.transition()[static_cast<std::size_t>(cyl[i - 1])][static_cast<std::size_t>(cyl[i])];
        worst = std::max(worst, std::abs(count / static_cast<double>(pw.size()) - mu));
      }
    EXPECT_NEAR(weakstar_discrepancy(orbit, law, 3), worst, 1e-12);
  }
}

TEST(DeBruijn, EveryWordOnceCyclically) {
  for (int k : {2, 3}) {
    for (int order = 1; order <= (k == 2 ? 7 : 4); ++order) {
      const auto w = de_bruijn_word(k, order);
      ASSERT_EQ(w.size(), static_cast<std::size_t>(std::llround(std::pow(k, order))));
      std::set<Word> seen;
      for (std::size_t j = 0; j < w.size(); ++j) {
        Word sub;
        for (int i = 0; i < order; ++i) sub.push_back(w[(j + static_cast<std::size_t>(i)) % w.size()]);
        seen.insert(sub);
      }
      EXPECT_EQ(seen.size(), w.size());
    }
  }
  EXPECT_EQ(de_bruijn_word(2, 2), parse_word("0011"));
}
