#include <gtest/gtest.h>

#include "chani/analysis.hpp"
#include "chani/datasets.hpp"

using namespace chani;

namespace {

std::vector<FeatureSet> singletons(std::size_t n) {
  std::vector<FeatureSet> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(FeatureSet::singleton(i));
  return v;
}

std::vector<FeatureSet> shapes_pairs() {
  const double th[1] = {0.1};
  return bar_layers(shapes_profiles(0.5, ShapesTask::task1), 6, th)[1];
}

}  // namespace

TEST(Rho, ObjectAndMean) {
  const auto natures = shapes_profiles(0.5, ShapesTask::task1);
  const auto cb = FeatureSet::of({kCircle, kBlue});
  EXPECT_DOUBLE_EQ(rho_object(cb, natures[0]), 0.25);
  EXPECT_DOUBLE_EQ(rho_object(cb, natures[1]), 0.0);
  EXPECT_DOUBLE_EQ(rho_object(FeatureSet{}, natures[1]), 1.0);
  EXPECT_DOUBLE_EQ(rho_mean(cb, natures), 0.25 / 9.0);
  EXPECT_DOUBLE_EQ(rho_mean(FeatureSet::singleton(kCircle), natures), 0.5 / 3.0);
}

TEST(Rho, EmpiricalMatchesExact) {
  const auto natures = shapes_profiles(0.5, ShapesTask::task1);
  const auto block = simulate_input(natures[0], 20000, RngStream(4));
  EXPECT_NEAR(empirical_rho(block, FeatureSet::of({kCircle, kBlue})), 0.25, 0.02);
  EXPECT_EQ(empirical_rho(block, FeatureSet::of({kSquare, kBlue})), 0.0);
}

TEST(BarLayers, ShapesPairsAndEmptyAboveThreshold) {
  const auto natures = shapes_profiles(0.5, ShapesTask::task1);
  const auto pairs = shapes_pairs();
  ASSERT_EQ(pairs.size(), 9u);
  for (const auto& s : pairs) {
    EXPECT_EQ(s.size(), 2u);
    EXPECT_LT(*s.elements().begin(), 3u);  // one shape and one colour
    EXPECT_GE(s.elements().back(), 3u);
  }
  const double high[1] = {0.13};  // 2 * 0.13 > 0.25
  EXPECT_TRUE(bar_layers(natures, 6, high)[1].empty());
  const double two[2] = {0.1, 0.01};
  EXPECT_TRUE(bar_layers(natures, 6, two)[2].empty());  // no nature has four features
}

TEST(IdealGamma, Values) {
  EXPECT_DOUBLE_EQ(ideal_gamma(0), 1.0);
  EXPECT_DOUBLE_EQ(ideal_gamma(1), 0.5);
  EXPECT_DOUBLE_EQ(ideal_gamma(2), 0.125);
  EXPECT_DOUBLE_EQ(ideal_gamma(1, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(ideal_gamma(3), std::pow(0.5, 7));
}

TEST(LimitRate, BelowHalfBiasAddsSingleFeatureTerm) {
  const auto natures = shapes_profiles(0.5, ShapesTask::task1);
  const auto cb = FeatureSet::of({kCircle, kBlue});
  EXPECT_DOUBLE_EQ(limit_rate(cb, 1, natures[0], 0.5), 0.125);
  // blue square: only blue fires, intensity 1/2 - nu with probability 1/2
  EXPECT_DOUBLE_EQ(limit_rate(cb, 1, natures[1], 0.25), 0.5 * 0.25);
  EXPECT_DOUBLE_EQ(limit_rate(cb, 1, natures[0], 0.25), 0.25 * 0.75 + 0.5 * 0.25);
  EXPECT_THROW(limit_rate(FeatureSet::of({0, 1, 2, 3}), 2, natures[0], 0.25), InputError);
}

TEST(LimitOutput, Task1DepthZero) {
  const auto natures = shapes_profiles(0.5, ShapesTask::task1);
  const auto lim = limit_output_weights(singletons(6), natures, 2);
  EXPECT_EQ(lim.argmax[0], (std::vector<std::size_t>{kCircle}));
  EXPECT_EQ(lim.argmax[1], (std::vector<std::size_t>{kSquare, kTriangle}));
  EXPECT_DOUBLE_EQ(lim.disc[0][kCircle], 0.5);
  EXPECT_DOUBLE_EQ(lim.disc[1][kSquare], 0.25);
  EXPECT_NEAR(lim.disc[0][kBlue], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(lim.weights[1][kSquare], 0.5);
  EXPECT_NEAR(lim.delta[0], 0.5, 1e-15);
}

TEST(Discrepancy, SymmetricClassesAndErrors) {
  const std::vector<std::vector<double>> R = {{0.2, 0.7}, {0.2, 0.7}};
  const std::vector<int> labels = {0, 1};
  for (const auto& row : feature_discrepancy(R, labels, 2)) {
    for (double d : row) EXPECT_DOUBLE_EQ(d, 0.0);
  }
  EXPECT_THROW(feature_discrepancy(R, std::vector<int>{0, 0}, 1), InputError);
  EXPECT_THROW(feature_discrepancy(R, std::vector<int>{0, 0}, 2), InputError);  // empty class
  const std::vector<std::vector<double>> q = {{0.3, 0.7}, {0.3, 0.7}};
  for (double d : class_discrepancy(activities(q, R), labels, 2)) EXPECT_DOUBLE_EQ(d, 0.0);
}

TEST(Discrepancy, MaxIdealIsAttainedAtVertices) {
  RngStream rng(17);
  const std::size_t J = 4, K = 3, O = 7;
  std::vector<std::vector<double>> rho(O, std::vector<double>(J));
  std::vector<int> labels(O);
  for (std::size_t o = 0; o < O; ++o) {
    labels[o] = static_cast<int>(o % K);
    for (std::size_t j = 0; j < J; ++j) rho[o][j] = rng.child(o).uniform(j);
  }
  double best = -INFINITY;
  for (std::size_t code = 0; code < 64; ++code) {  // J^K vertex combinations
    std::vector<std::vector<double>> q(K, std::vector<double>(J, 0.0));
    std::size_t c = code;
    for (std::size_t k = 0; k < K; ++k, c /= J) q[k][c % J] = 1.0;
    best = std::max(best, ideal_discrepancy(q, rho, labels, K));
  }
  EXPECT_NEAR(max_ideal_discrepancy(rho, labels, K), best, 1e-12);
  for (std::uint64_t t = 0; t < 200; ++t) {
    std::vector<std::vector<double>> q(K, std::vector<double>(J));
    for (std::size_t k = 0; k < K; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < J; ++j) s += q[k][j] = rng.child(100 + t).uniform(k * J + j);
      for (auto& v : q[k]) v /= s;
    }
    EXPECT_LE(ideal_discrepancy(q, rho, labels, K), best + 1e-12);
  }
}

TEST(Decomposition, Task2NeedsOneHiddenLayer) {
  const auto natures = shapes_profiles(0.5, ShapesTask::task2);
  const auto labels = labels_of(natures);
  const auto rho1 = rho_table(shapes_pairs(), natures);
  const auto d1 = check_class_decomposition(rho1, labels, 2);
  EXPECT_TRUE(d1.success);
  EXPECT_EQ(d1.E[0].size(), 5u);
  EXPECT_EQ(d1.E[1].size(), 4u);
  EXPECT_TRUE(strong_feasible_exists(rho1, labels, 2));

  const auto rho0 = rho_table(singletons(6), natures);
  const auto d0 = check_class_decomposition(rho0, labels, 2);
  EXPECT_FALSE(d0.success);
  ASSERT_TRUE(d0.failing_class.has_value());
  EXPECT_EQ(*d0.failing_class, 0u);
  EXPECT_FALSE(strong_feasible_exists(rho0, labels, 2));
}

TEST(Decomposition, AgreesWithStrongFeasibilityOnAllLabellings) {
  const auto pairs = shapes_pairs();
  const auto single = singletons(6);
  for (std::uint32_t code = 1; code + 1 < (1u << 9); ++code) {
    std::vector<int> labels(9);
    for (std::size_t o = 0; o < 9; ++o) labels[o] = static_cast<int>(code >> o & 1u);
    const auto natures = shapes_profiles_labelled(0.5, labels);
    for (const auto* layer : {&single, &pairs}) {
      const auto rho = rho_table(*layer, natures);
      const auto d = check_class_decomposition(rho, labels, 2);
      ASSERT_EQ(d.success, strong_feasible_exists(rho, labels, 2)) << "labelling " << code;
      if (!d.success) continue;
      std::vector<std::vector<double>> q(2, std::vector<double>(layer->size(), 0.0));
      for (std::size_t k = 0; k < 2; ++k) {
        for (auto j : d.E[k]) q[k][j] = 1.0 / static_cast<double>(d.E[k].size());
      }
      EXPECT_TRUE(is_strong_feasible(q, rho, labels));
    }
  }
}

TEST(BinaryCorrelations, ShapesHoldDigitsLikeDoNot) {
  const auto natures = shapes_profiles(0.5, ShapesTask::task1);
  const auto a = audit_binary_correlations(rho_table(shapes_pairs(), natures));
  EXPECT_TRUE(a.holds);
  EXPECT_DOUBLE_EQ(a.p, 0.25);
  const std::vector<std::vector<double>> mixed = {{0.25, 0.0}, {0.5, 0.25}};
  EXPECT_FALSE(audit_binary_correlations(mixed).holds);
  const std::vector<std::vector<double>> sizes = {{0.25, 0.25}, {0.25, 0.0}};
  EXPECT_FALSE(audit_binary_correlations(sizes).holds);
}

TEST(Vc, SmallFamilies) {
  const std::vector<FeatureSet> two = {FeatureSet::of({0, 1}), FeatureSet::of({2, 3})};
  EXPECT_EQ(vc_shatter(two, 4), 2u);
  EXPECT_EQ(vc_shatter({}, 4), 0u);
  EXPECT_EQ(vc_shatter(shapes_pairs(), 6), 9u);
  EXPECT_EQ(vc_shatter(singletons(5), 5), 5u);
  // nested sets: any point activating {0,1} also activates {0}
  const std::vector<FeatureSet> nested = {FeatureSet::of({0}), FeatureSet::of({0, 1})};
  EXPECT_EQ(vc_shatter(nested, 2), 1u);
  EXPECT_THROW(vc_shatter(two, 17), InputError);
}

TEST(Vc, WitnessIsShattered) {
  const auto fam = shapes_pairs();
  std::vector<std::uint32_t> masks;
  for (const auto& s : fam) masks.push_back(static_cast<std::uint32_t>(vc_witness(std::vector<FeatureSet>{s})[0]));
  const auto pts = vc_witness(fam);
  EXPECT_TRUE(shattered_by_private_neurons(pts, masks));
  EXPECT_TRUE(shattered_by_enumeration(pts, masks));
}

TEST(Vc, CriteriaAgreeOnRandomInstances) {
  RngStream rng(23);
  for (std::uint64_t t = 0; t < 300; ++t) {
    const auto r = rng.child(t);
    std::vector<std::uint32_t> fam, pts;
    const std::size_t nf = 2 + static_cast<std::size_t>(r.uniform(0) * 6);
    const std::size_t np = 1 + static_cast<std::size_t>(r.uniform(1) * 5);
    for (std::size_t j = 0; j < nf; ++j) fam.push_back(1 + static_cast<std::uint32_t>(r.uniform(10 + j) * 63));
    for (std::size_t i = 0; i < np; ++i) pts.push_back(static_cast<std::uint32_t>(r.uniform(100 + i) * 64));
    EXPECT_EQ(shattered_by_enumeration(pts, fam), shattered_by_private_neurons(pts, fam)) << "instance " << t;
  }
}

TEST(Vc, SearchMatchesBruteForceOnFourFeatures) {
  // brute force: largest subset of the 16 points that is shattered
  RngStream rng(29);
  for (std::uint64_t t = 0; t < 25; ++t) {
    std::vector<FeatureSet> family;
    std::vector<std::uint32_t> masks;
    for (std::size_t j = 0; j < 4; ++j) {
      const auto m = 1 + static_cast<std::uint32_t>(rng.child(t).uniform(j) * 15);
      FeatureSet s;
      for (std::size_t i = 0; i < 4; ++i) {
        if (m >> i & 1u) s.insert(i);
      }
      family.push_back(s);
      masks.push_back(m);
    }
    std::size_t best = 0;
    for (std::uint32_t sub = 1; sub < (1u << 16); ++sub) {
      const auto size = static_cast<std::size_t>(std::popcount(sub));
      if (size <= best || size > 4) continue;
      std::vector<std::uint32_t> pts;
      for (std::uint32_t x = 0; x < 16; ++x) {
        if (sub >> x & 1u) pts.push_back(x);
      }
      if (shattered_by_private_neurons(pts, masks)) best = size;
    }
    EXPECT_EQ(vc_shatter(family, 4), best) << "family " << t;
  }
}

TEST(NuCounterexample, BiasBelowHalfMisclassifiesBlueSquare) {
  for (double nu : {0.0, 0.25, 0.4, 0.49}) {
    const auto r = nu_counterexample(nu, 0.5);
    EXPECT_EQ(r.layer.size(), 9u);
    EXPECT_TRUE(r.blue_square_misclassified) << "nu = " << nu;
  }
  const auto ok = nu_counterexample(0.5, 0.5);
  EXPECT_FALSE(ok.blue_square_misclassified);
  for (std::size_t o = 0; o < 9; ++o) EXPECT_FALSE(ok.tie[o]);
  EXPECT_THROW(nu_counterexample(1.0, 0.5), InputError);
}

TEST(Audits, ShapesPassAndDenseDataFails) {
  const auto natures = shapes_profiles(0.5, ShapesTask::task2);
  const double th[1] = {0.1};
  EXPECT_TRUE(audit_decreasing_correlation(natures, 6).pass);
  EXPECT_TRUE(audit_sparse_features(natures, 6, th).pass);
  EXPECT_TRUE(audit_binary_correlations(shapes_pairs(), natures).pass);

  // a feature that is always on does not lower the correlation when added
  std::vector<FiringProfile> dense = {{"a", {1.0, 0.5, 0.0}, 0}, {"b", {1.0, 0.0, 0.5}, 1}};
  EXPECT_FALSE(audit_decreasing_correlation(dense, 3).pass);
  EXPECT_FALSE(audit_sparse_features(dense, 3, th).pass);
}
