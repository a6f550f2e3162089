#include <gtest/gtest.h>

#include "chani/topology.hpp"

using namespace chani;

namespace {
std::vector<FeatureSet> singletons(std::size_t n) {
  std::vector<FeatureSet> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(FeatureSet::singleton(i));
  return v;
}
}  // namespace

TEST(Topology, SixSingletonsGiveFifteenPairs) {
  const auto cat = build_candidates(singletons(6), 1);
  EXPECT_EQ(cat.candidates.size(), 15u);
  for (const auto& c : cat.candidates) {
    EXPECT_EQ(c.set.size(), 2u);
    EXPECT_EQ(cat.prev[c.parent1] | cat.prev[c.parent2], c.set);
  }
  EXPECT_TRUE(std::is_sorted(cat.candidates.begin(), cat.candidates.end(),
                             [](const Candidate& a, const Candidate& b) { return a.set < b.set; }));
}

TEST(Topology, SingleSetHasNoCandidates) { EXPECT_TRUE(build_candidates(singletons(1)).candidates.empty()); }

TEST(Topology, DuplicateUnionsCollapseToCanonicalPair) {
  // {a,b},{c,d},{a,c},{b,d}: {a,b,c,d} arises twice
  std::vector<FeatureSet> prev = {FeatureSet::of({1, 3}), FeatureSet::of({0, 1}), FeatureSet::of({2, 3}),
                                  FeatureSet::of({0, 2})};
  const auto cat = build_candidates(prev, 2);
  ASSERT_EQ(cat.candidates.size(), 1u);
  const auto& c = cat.candidates[0];
  EXPECT_EQ(c.set, FeatureSet::of({0, 1, 2, 3}));
  // prev is sorted: {0,1} {0,2} {1,3} {2,3}; the first disjoint pair is ({0,1},{2,3})
  EXPECT_EQ(cat.prev[c.parent1], FeatureSet::of({0, 1}));
  EXPECT_EQ(cat.prev[c.parent2], FeatureSet::of({2, 3}));
}

TEST(Topology, CandidatesIndependentOfInputOrder) {
  auto a = singletons(5);
  auto b = a;
  std::reverse(b.begin(), b.end());
  const auto ca = build_candidates(a), cb = build_candidates(b);
  ASSERT_EQ(ca.candidates.size(), cb.candidates.size());
  for (std::size_t i = 0; i < ca.candidates.size(); ++i) {
    EXPECT_EQ(ca.candidates[i].set, cb.candidates[i].set);
    EXPECT_EQ(ca.candidates[i].parent1, cb.candidates[i].parent1);
  }
}

TEST(Topology, BuildRejectsBadInput) {
  EXPECT_THROW(build_candidates({}), InputError);
  EXPECT_THROW(build_candidates({FeatureSet::of({0}), FeatureSet::of({1, 2})}), InputError);
}

TEST(Topology, ThresholdSelection) {
  const RateTable rates = {{0.05, 0.2, 0.0}, {0.15, 0.01, 0.0}};
  EXPECT_EQ(select_threshold(rates, 3, 0.1), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(select_threshold(rates, 3, 0.16), (std::vector<std::size_t>{1}));
  EXPECT_EQ(select_threshold(rates, 3, 1e-9), (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(select_threshold(rates, 3, 0.5, 1), SelectionEmpty);
  try {
    select_threshold(rates, 3, 0.5, 2);
  } catch (const SelectionEmpty& e) {
    EXPECT_EQ(e.depth(), 2u);
  }
}

TEST(Topology, ThresholdIsAntitone) {
  RateTable rates(4, std::vector<double>(20));
  for (std::size_t o = 0; o < 4; ++o) {
    for (std::size_t c = 0; c < 20; ++c) rates[o][c] = static_cast<double>((o * 7 + c * 13) % 17) / 17.0;
  }
  auto prev = select_threshold(rates, 20, 0.05);
  for (double s = 0.1; s < 0.95; s += 0.05) {
    const auto cur = select_threshold(rates, 20, s);
    EXPECT_TRUE(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
    prev = cur;
  }
}

TEST(Topology, TopNSelection) {
  const RateTable rates = {{0.3, 0.1, 0.3, 0.2}};
  EXPECT_EQ(select_top_n(rates, 4, 1), (std::vector<std::size_t>{0}));  // tie with 2 goes to the smaller set
  EXPECT_EQ(select_top_n(rates, 4, 3), (std::vector<std::size_t>{0, 2, 3}));
  std::string warning;
  EXPECT_EQ(select_top_n(rates, 4, 9, &warning).size(), 4u);
  EXPECT_FALSE(warning.empty());
  EXPECT_THROW(select_top_n(rates, 4, 0), InputError);
}

TEST(Topology, UnionChain) {
  std::vector<std::vector<FeatureSet>> ok = {singletons(4), {FeatureSet::of({0, 1}), FeatureSet::of({2, 3})},
                                             {FeatureSet::of({0, 1, 2, 3})}};
  EXPECT_TRUE(valid_union_chain(ok));
  auto bad = ok;
  bad[2] = {FeatureSet::of({0, 1, 2, 4})};
  EXPECT_FALSE(valid_union_chain(bad));
}
