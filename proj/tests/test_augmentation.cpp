#include "dipa/augmentation.hpp"
#include "dipa/corpus.hpp"
#include "oracles.hpp"

#include "held.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace dipa;

namespace {

// Reachable aug states predicted from finite runs alone: each feasible run
// of length <= len ends in (q, lt, eq) with lt / eq read off the dependency
// graph through last assignments.
std::size_t states_from_runs(const DipAutomaton& a, int len) {
    const int nv = static_cast<int>(a.num_vars());
    std::set<std::tuple<int, std::vector<char>, std::vector<char>>> seen;
    for_each_run(a, len, true, [&](const dipa::Run& r) {
        const int n = static_cast<int>(r.size());
        const int q = r.empty() ? a.init : a.transitions[r.back()].trg;
        auto reach = build_dependency_graph(a, r).reachability();
        std::vector<char> lt(nv * nv, 0), eq(nv * nv, 0);
        for (int i = 0; i < nv; ++i)
            for (int j = 0; j < nv; ++j) {
                auto li = lastassign(a, r, i, n), lj = lastassign(a, r, j, n);
                lt[i * nv + j] = li && lj && reach[*li][*lj];
                eq[i * nv + j] = i == j || (li && lj && *li == *lj);
            }
        seen.emplace(q, lt, eq);
    });
    return seen.size();
}

}  // namespace

TEST(AugStep, FirstAssignmentsCreateNoOrder) {
    auto a = corpus::m_range(1);
    auto s0 = aug_init(a);
    auto s1 = aug_step(a, s0, 0);
    ASSERT_TRUE(s1.has_value());
    EXPECT_EQ(s1->q, 1);
    EXPECT_TRUE(s1->lt.empty());
    EXPECT_EQ(s1->eq, BitMatrix::identity(2));
    auto s2 = aug_step(a, *s1, 1);
    ASSERT_TRUE(s2.has_value());
    EXPECT_EQ(s2->q, 2);
    EXPECT_TRUE(s2->lt.empty());
    EXPECT_EQ(s2->eq, BitMatrix::identity(2));
}

TEST(AugStep, ContradictoryGuardIsUndefined) {
    auto a = Builder{}
                 .vars({"r1", "r2"})
                 .input("q", 1, 0)
                 .init("q")
                 .trans("q", "q", "x >= r2 && x < r1", "@a")
                 .build();
    AugState s{0, BitMatrix(2), BitMatrix::identity(2)};
    s.lt.set(0, 1);
    EXPECT_FALSE(aug_step(a, s, 0).has_value());
    s.lt.reset(0, 1);
    s.lt.set(1, 0);
    EXPECT_TRUE(aug_step(a, s, 0).has_value());
}

TEST(BuildAugmentation, RangeStateCount) {
    auto a = corpus::m_range(1);
    auto g = build_augmentation(a);
    // l1 and h1 each appear once with no order. From c1 the loop keeps
    // low <= x < high, so c1 is reached with and without low < high, and the
    // exits reach done in both variants as well. The run scan over feasible
    // runs of length <= 8 finds the same set.
    EXPECT_EQ(states_from_runs(a, 8), 6u);
    EXPECT_EQ(g.states.size(), 6u);
}

TEST(BuildAugmentation, NoVariablesIsIsomorphicToBase) {
    auto a = Builder{}
                 .input("p", 1, 0)
                 .input("q", 1, 0)
                 .init("p")
                 .trans("p", "q", "true", "@a")
                 .trans("q", "p", "true", "@b")
                 .trans("q", "q", "true", "insample")
                 .build();
    auto g = build_augmentation(a);
    EXPECT_EQ(g.states.size(), a.states.size());
    EXPECT_EQ(g.transitions.size(), a.transitions.size());
}

TEST(BuildAugmentation, ResourceCapIsReported) {
    try {
        (void)build_augmentation(held(corpus::m_range(10)), 10);
        FAIL();
    } catch (const ResourceLimit& e) {
        EXPECT_EQ(e.cap(), 10u);
    }
}

TEST(Project, EmptyRun) {
    auto g = build_augmentation(held(corpus::nwf()));
    EXPECT_TRUE(project(g, {}).empty());
}

TEST(Project, LiftInvertsProjection) {
    auto a = corpus::two_range_1();
    auto g = build_augmentation(a);
    for_each_run(a, 6, true, [&](const dipa::Run& r) {
        auto up = lift(g, r);
        ASSERT_TRUE(up.has_value());
        EXPECT_EQ(project(g, *up), r);
    });
}

TEST(AugmentationProperties, NwfAndSmallCorpus) {
    for (const auto& name : corpus_names()) {
        auto a = gen(name);
        if (a.num_vars() > 3) continue;
        auto g = build_augmentation(a);
        auto res = oracle::check_augmentation(a, g, 6);
        EXPECT_EQ(res.failures, 0) << name << ": " << res.first_failure;
        EXPECT_GT(res.aug_runs, 1) << name;
    }
}
