#include "dipa/corpus.hpp"
#include "dipa/weight.hpp"
#include "dipa/wellformedness.hpp"
#include "oracles.hpp"

#include "held.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dipa;

namespace {

// First aug transition lifting base transition t.
int aug_of(const AugAutomaton& g, int t) {
    for (std::size_t at = 0; at < g.transitions.size(); ++at)
        if (g.transitions[at].base == t) return static_cast<int>(at);
    return -1;
}

Rational max_run_weight(const DipAutomaton& a, const AugAutomaton& g, int len) {
    Rational best = 0;
    oracle::for_each_aug_run(g, len, [&](const std::vector<int>& ar) {
        best = std::max(best, oracle::run_weight(a, g, ar));
    });
    return best;
}

}  // namespace

TEST(VarUsedBeforeReassign, Examples) {
    auto svt = corpus::svt();
    auto g = build_augmentation(svt);
    // After t0 the loop guard reads the threshold.
    EXPECT_TRUE(var_used_before_reassign(g, g.transitions[aug_of(g, 0)].trg, 0));

    auto b = Builder{}
                 .vars({"v"})
                 .noninput("q0", 1, 0)
                 .noninput("q1", 1, 0)
                 .input("q2", 1, 0)
                 .input("q3", 1, 0)
                 .init("q0")
                 .trans("q0", "q1", "true", "@a", {"v"})
                 .trans("q1", "q2", "true", "@a", {"v"})
                 .trans("q2", "q3", "x >= v", "@a")
                 .build();
    auto gb = build_augmentation(b);
    EXPECT_FALSE(var_used_before_reassign(gb, gb.transitions[aug_of(gb, 0)].trg, 0));
    // q3 has no outgoing transitions.
    EXPECT_FALSE(var_used_before_reassign(gb, gb.transitions[aug_of(gb, 2)].trg, 0));
}

TEST(EdgeWeight, SvtAndNumSparse) {
    auto svt = corpus::svt();
    auto g = build_augmentation(svt);
    EXPECT_EQ(edge_weight(g, aug_of(g, 0)), Rational(1, 4));
    EXPECT_EQ(edge_weight(g, aug_of(g, 1)), Rational(0));

    auto ns = corpus::num_sparse();
    auto gn = build_augmentation(ns);
    EXPECT_EQ(edge_weight(gn, aug_of(gn, 2)), Rational(3, 2));
}

TEST(ComputeWeight, BenchmarkWeights) {
    auto w = [](const DipAutomaton& a) { return compute_weight(build_augmentation(a)); };
    EXPECT_EQ(w(corpus::svt()), Rational(5, 4));
    EXPECT_EQ(w(corpus::num_sparse()), Rational(7, 4));
    EXPECT_EQ(w(corpus::num_range_2()), Rational(5, 4));
    EXPECT_EQ(w(corpus::two_range_2()), Rational(2));
    for (int k : {2, 10, 20, 100, 200}) EXPECT_EQ(w(corpus::k_min_max(k)), Rational(1)) << k;
    for (int m : {1, 2, 10}) EXPECT_EQ(w(corpus::m_range(m)), Rational(1)) << m;
}

TEST(ComputeWeight, UnrefinedIsNeverTighter) {
    for (const char* n : {"svt", "num-sparse", "num-range-2", "two-range-2", "range"}) {
        auto g = build_augmentation(held(gen(n)));
        EXPECT_LE(compute_weight(g, true), compute_weight(g, false)) << n;
    }
    auto g = build_augmentation(held(corpus::m_range(10)));
    EXPECT_EQ(compute_weight(g, false), Rational(6));
}

TEST(ComputeWeight, RejectsLeakingCycle) {
    EXPECT_THROW((void)compute_weight(build_augmentation(held(corpus::lc_example()))), PreconditionError);
}

TEST(ComputeWeight, BoundsEveryRunWeight) {
    // Run weights from the definition, over all aug runs up to a length that
    // traverses every cycle at least twice.
    for (const char* n : {"svt", "num-sparse", "num-range-2", "two-range-2", "range"}) {
        auto a = gen(n);
        auto g = build_augmentation(a);
        const Rational d = compute_weight(g);
        const Rational best = max_run_weight(a, g, 9);
        EXPECT_LE(best, d) << n;
        EXPECT_GT(best, 0) << n;
    }
    auto a = corpus::k_min_max(2);
    auto g = build_augmentation(a);
    EXPECT_LE(max_run_weight(a, g, 8), compute_weight(g));
}

TEST(ComputeWeight, BoundsRunWeightOnRandomWellFormedAutomata) {
    std::mt19937_64 rng(777);
    int checked = 0;
    for (int i = 0; i < 300 && checked < 60; ++i) {
        auto a = random_automaton(rng);
        auto g = build_augmentation(a);
        if (check_well_formed(g).has_value()) continue;
        ++checked;
        EXPECT_LE(max_run_weight(a, g, 7), compute_weight(g)) << i;
    }
    EXPECT_GE(checked, 20);
}
