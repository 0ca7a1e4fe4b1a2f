#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "starris/access.hpp"
#include "starris/errors.hpp"
#include "starris/random.hpp"

using namespace starris;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(DecodingOrder, Examples) {
  EXPECT_EQ(decoding_order(std::vector<double>{3.0, 1.0, 2.0}), (DecodingOrder{1, 3, 2}));
  EXPECT_EQ(decoding_order(std::vector<double>{0.7}), (DecodingOrder{1}));
  EXPECT_EQ(decoding_order(std::vector<double>{1.0, 1.0}), (DecodingOrder{1, 2}));
}

TEST(DecodingOrder, IsPermutation) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 7;
    std::vector<double> g(n);
    for (auto& x : g) x = std::floor(uniform(rng, 0, 4));  // ties on purpose
    auto r = decoding_order(g);
    std::vector<int> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) EXPECT_EQ(sorted[i], i + 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (g[i] > g[j] || (g[i] == g[j] && i < j)) {
          EXPECT_LT(r[i], r[j]);
        }
  }
}

TEST(Noma, SingleUeUnitSnr) {
  const auto r = noma_cluster_rates(std::vector<double>{2.0}, std::vector<double>{0.5}, 1.0, 1,
                                    1.0);
  EXPECT_DOUBLE_EQ(r[0], 1.0);
}

TEST(Noma, TwoUeHandComputation) {
  const double s2 = 1e-9;
  const std::vector<double> g{3.0 * s2, 1.0 * s2};
  const std::vector<double> p{1.0, 1.0};
  const double tf = 0.6;
  const int I = 2;
  const auto r = noma_cluster_rates(g, p, tf, I, s2);
  EXPECT_NEAR(r[0], tf / I * std::log2(1.0 + 3.0 / 2.0), 1e-14);
  EXPECT_NEAR(r[1], tf / I * std::log2(2.0), 1e-14);
}

TEST(Noma, TelescopingIdentity) {
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + t % 6;
    std::vector<double> g(n), p(n);
    for (auto& x : g) x = std::exp(uniform(rng, -25, -15));
    for (auto& x : p) x = uniform(rng, 0, 1);
    const double s2 = 1e-9;
    double rx = 0.0;
    for (int k = 0; k < n; ++k) rx += p[k] * g[k];
    const double expect = std::log2(1.0 + rx / s2);
    const double got = sum(noma_cluster_rates(g, p, 1.0, 1, s2));
    EXPECT_NEAR(got, expect, 1e-9 * std::max(1.0, expect));
  }
}

TEST(Noma, FirstDecodedMonotoneInOwnPower) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> g{uniform(rng, 2, 3), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    std::vector<double> p{uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    const auto r0 = noma_cluster_rates(g, p, 1.0, 1, 0.1);
    for (double x : r0) EXPECT_GE(x, 0.0);
    p[0] += 0.1;
    const auto r1 = noma_cluster_rates(g, p, 1.0, 1, 0.1);
    EXPECT_GE(r1[0], r0[0]);
  }
}

TEST(Noma, ShapeMismatch) {
  EXPECT_THROW(noma_cluster_rates(std::vector<double>{1, 2}, std::vector<double>{1}, 1, 1, 1),
               ShapeError);
}

TEST(Oma, SingleUeEqualsNoma) {
  const std::vector<double> g{4e-9}, p{0.3};
  EXPECT_DOUBLE_EQ(oma_cluster_rates(g, p, 0.7, 3, 1e-9)[0],
                   noma_cluster_rates(g, p, 0.7, 3, 1e-9)[0]);
}

TEST(Oma, TwoEqualUes) {
  const std::vector<double> g{1.0, 1.0}, p{1.0, 1.0};
  const auto r = oma_cluster_rates(g, p, 0.8, 2, 1.0);
  for (double x : r) EXPECT_NEAR(x, 0.8 / 4.0 * std::log2(3.0), 1e-14);
}

TEST(Oma, NeverBeatsNomaSumRate) {
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + t % 5;
    std::vector<double> g(n), p(n);
    for (auto& x : g) x = std::exp(uniform(rng, -4, 4));
    for (auto& x : p) x = uniform(rng, 0, 1);
    EXPECT_LE(sum(oma_cluster_rates(g, p, 1.0, 2, 1.0)),
              sum(noma_cluster_rates(g, p, 1.0, 2, 1.0)) + 1e-12);
  }
}

TEST(TimeSplit, SumsToSlot) {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const double slot = uniform(rng, 0.1, 3.0);
    const TimeSplit s(uniform(rng, 0, 1), slot);
    EXPECT_DOUBLE_EQ(s.tau_left() + s.tau_right(), slot);
    EXPECT_GE(s.tau_right(), 0.0);
  }
  EXPECT_THROW(TimeSplit(1.2, 1.0), ValidationError);
  EXPECT_THROW(TimeSplit(-0.1, 1.0), ValidationError);
}

TEST(SlotEnergy, Examples) {
  Association a;
  a.serving_ris = {0, 0};
  a.side = {Side::kLeft, Side::kRight};
  a.left_sets = {{0}};
  a.right_sets = {{1}};
  std::vector<TimeSplit> half{TimeSplit(0.5, 1.0)};
  auto e = slot_energy(std::vector<double>{1.0, 0.0}, half, a);
  EXPECT_DOUBLE_EQ(e[0], 0.5);
  EXPECT_DOUBLE_EQ(e[1], 0.0);
  std::vector<TimeSplit> all_left{TimeSplit(1.0, 1.0)};
  e = slot_energy(std::vector<double>{0.4, 0.9}, all_left, a);
  EXPECT_DOUBLE_EQ(e[0], 0.4);
  EXPECT_DOUBLE_EQ(e[1], 0.0);
  EXPECT_THROW(slot_energy(std::vector<double>{1.0}, half, a), ShapeError);
}
