#include "dipa/corpus.hpp"
#include "dipa/simulator.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dipa;

namespace {

constexpr long long million = 1000000;

DipAutomaton one_step(bool input_state) {
    Builder b;
    if (input_state) b.input("q", 1, 0);
    else b.noninput("q", 1, 0);
    return b.input("end", 1, 0).init("q").trans("q", "end", "true", "insample").build();
}

InputSequence ins(std::initializer_list<std::optional<Rational>> xs) { return InputSequence(xs); }
const InputItem tau = std::nullopt;

void expect_within(const Estimate& e, double truth, double sigmas = 3) {
    EXPECT_LE(std::abs(e.point - truth), sigmas * e.std_error + 1e-12)
        << "estimate " << e.point << " se " << e.std_error << " truth " << truth;
}

}  // namespace

TEST(Laplace, MeanOfLap13) {
    const int n = million;
    double s = 0, above = 0;
    for (int i = 0; i < n; ++i) {
        PhiloxStream rng(11, static_cast<std::uint64_t>(i));
        const double x = sample_laplace(1, 3, rng);
        s += x;
        above += x > 3;
    }
    const double sigma = std::sqrt(2.0 / n);  // Var = 2 / k^2
    EXPECT_NEAR(s / n, 3, 3 * sigma);
    EXPECT_NEAR(above / n, 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(Laplace, VarianceOfLap20) {
    const int n = million;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        PhiloxStream rng(12, static_cast<std::uint64_t>(i));
        const double x = sample_laplace(2, 0, rng);
        s += x;
        s2 += x * x;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    // Fourth central moment of Laplace is 24 / k^4, so Var(sample variance)
    // is about (24 - 4) / k^4 / n.
    const double sigma = std::sqrt(20.0 / 16.0 / n);
    EXPECT_NEAR(var, 0.5, 3 * sigma);
}

TEST(Laplace, RejectsNonPositiveScale) {
    PhiloxStream rng(1, 0);
    EXPECT_THROW((void)sample_laplace(0, 0, rng), InvalidInput);
    EXPECT_THROW((void)sample_laplace(-1, 0, rng), InvalidInput);
}

TEST(Laplace, ClosedFormsAgreeWithQuadrature) {
    for (double x : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
        EXPECT_NEAR(laplace_cdf(1.5, 0.2, x), oracle::lap_cdf(1.5, 0.2, x), 1e-15);
        const double mass = oracle::integrate([&](double y) { return y < x ? oracle::lap_pdf(1.5, 0.2, y) : 0.0; }, x);
        EXPECT_NEAR(laplace_cdf(1.5, 0.2, x), mass, 1e-9);
    }
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
    PhiloxStream a(5, 7), b(5, 7), c(5, 8), d(5, 7, 1);
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
    EXPECT_NE(x, d.uniform());
    EXPECT_GT(x, 0);
    EXPECT_LT(x, 1);
}

TEST(SimulateTrial, RangeTakesTheTwoSetupSteps) {
    auto a = corpus::m_range(1);
    for (int i = 0; i < 200; ++i) {
        PhiloxStream rng(3, static_cast<std::uint64_t>(i));
        auto out = simulate_trial(a, ins({tau, tau, Rational(5)}), 1.0, {}, rng);
        ASSERT_GE(out.run.size(), 2u);
        EXPECT_EQ(out.run[0], 0);
        EXPECT_EQ(out.run[1], 1);
        if (!out.terminated_early) {
            EXPECT_EQ(out.run.size(), 3u);
        }
    }
}

TEST(SimulateTrial, EmptyInputGivesEmptyOutcome) {
    PhiloxStream rng(1, 0);
    auto out = simulate_trial(corpus::svt(), {}, 1.0, {}, rng);
    EXPECT_TRUE(out.run.empty());
    EXPECT_TRUE(out.outputs.empty());
}

TEST(SimulateTrial, KindMismatchIsRejected) {
    PhiloxStream rng(1, 0);
    EXPECT_THROW((void)simulate_trial(corpus::svt(), ins({Rational(0)}), 1.0, {}, rng), InvalidInput);
}

TEST(SimulateTrial, SvtAtHighEpsilonStaysBelow) {
    auto a = corpus::svt();
    int bot = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        PhiloxStream rng(9, static_cast<std::uint64_t>(i));
        auto out = simulate_trial(a, ins({tau, Rational(-10)}), 8.0, {}, rng);
        bot += out.outputs.size() == 2 && std::get<std::string>(out.outputs[1]) == "bot";
    }
    // x ~ Lap(4, -10) below T ~ Lap(2, 0).
    const double truth =
        oracle::integrate([](double t) { return oracle::lap_pdf(2, 0, t) * oracle::lap_cdf(4, -10, t); });
    EXPECT_GT(truth, 0.99);
    EXPECT_GT(static_cast<double>(bot) / n, 0.99);
}

TEST(EstimateProb, SingleStepSymmetry) {
    for (bool input : {false, true}) {
        auto a = one_step(input);
        InputSequence in{input ? InputItem(Rational(0)) : tau};
        for (double eps : {0.5, 2.0}) {
            auto half = estimate_prob(a, in, {Interval{Rational(0), std::nullopt}}, eps, million, 21);
            expect_within(half, 0.5);
            auto all = estimate_prob(a, in, {Interval{}}, eps, 10000, 21);
            EXPECT_EQ(all.point, 1.0);
        }
    }
}

TEST(EstimateProb, SingleStepInterval) {
    auto a = one_step(true);
    const double eps = 1.5;
    auto e = estimate_prob(a, ins({Rational(1, 2)}), {Interval{Rational(-1, 4), Rational(2)}}, eps, million, 5);
    expect_within(e, oracle::lap_cdf(eps, 0.5, 2) - oracle::lap_cdf(eps, 0.5, -0.25));
}

TEST(EstimateProb, SvtTwoAndThreeStepsMatchQuadrature) {
    auto a = corpus::svt();
    const double eps = 1.0;
    // T ~ Lap(eps/4, 0); every query x_i ~ Lap(eps/2, input_i).
    auto below = [&](double mu) { return [=](double t) { return oracle::lap_cdf(eps / 2, mu, t); }; };
    const double kT = eps / 4;

    auto two = estimate_prob(a, ins({tau, Rational(0)}), {"bot", "bot"}, eps, million, 31);
    expect_within(two, oracle::integrate([&](double t) { return oracle::lap_pdf(kT, 0, t) * below(0)(t); }));

    auto bbb = estimate_prob(a, ins({tau, Rational(0), Rational(0)}), {"bot", "bot", "bot"}, eps, million, 32);
    expect_within(bbb, oracle::integrate([&](double t) {
                      const double f = below(0)(t);
                      return oracle::lap_pdf(kT, 0, t) * f * f;
                  }));

    auto bbt = estimate_prob(a, ins({tau, Rational(1, 2), Rational(-1, 2)}), {"bot", "bot", "top"}, eps, million, 33);
    expect_within(bbt, oracle::integrate([&](double t) {
                      return oracle::lap_pdf(kT, 0, t) * below(0.5)(t) * (1 - below(-0.5)(t));
                  }));
}

TEST(EstimateProb, NumSparseFreshSample) {
    auto a = corpus::num_sparse();
    const double eps = 1.0;
    auto e = estimate_prob(a, ins({tau, Rational(0)}), {"bot", Interval{Rational(1, 2), std::nullopt}}, eps, million, 41);
    // P[x >= T] = 1/2 by symmetry; x' ~ Lap(eps/2, 0) is independent of it.
    expect_within(e, 0.5 * (1 - oracle::lap_cdf(eps / 2, 0, 0.5)));
}

TEST(EstimateProb, GuidedAgreesWithPlain) {
    auto a = corpus::svt();
    const OutputEvent ev{"bot", "bot", "bot", "top"};
    const auto in = ins({tau, Rational(1, 4), Rational(-1, 2), Rational(1)});
    auto plain = estimate_prob(a, in, ev, 1.0, million, 51);
    auto guided = estimate_prob_guided(a, in, ev, 1.0, 200000, 52);
    const double se = std::hypot(plain.std_error, guided.std_error);
    EXPECT_LE(std::abs(plain.point - guided.point), 3 * se);
    EXPECT_LT(guided.std_error, plain.std_error * 2);
}

TEST(EstimateProb, ResultDoesNotDependOnThreadCount) {
    auto a = corpus::svt();
    const auto in = ins({tau, Rational(0), Rational(0)});
    const OutputEvent ev{"bot", "bot", "top"};
    SimOptions one, many;
    one.threads = 1;
    many.threads = 4;
    auto x = estimate_prob(a, in, ev, 1.0, 50000, 61, one);
    auto y = estimate_prob(a, in, ev, 1.0, 50000, 61, many);
    EXPECT_EQ(x.point, y.point);
    EXPECT_EQ(x.std_error, y.std_error);
    auto gx = estimate_prob_guided(a, in, ev, 1.0, 50000, 61, one);
    auto gy = estimate_prob_guided(a, in, ev, 1.0, 50000, 61, many);
    EXPECT_EQ(gx.point, gy.point);
}

TEST(EstimateProb, RejectsBadArguments) {
    auto a = corpus::svt();
    EXPECT_THROW((void)estimate_prob(a, ins({tau}), {"bot"}, 1.0, 0, 1), InvalidInput);
    EXPECT_THROW((void)estimate_prob(a, ins({tau}), {"bot"}, 0.0, 10, 1), InvalidInput);
    EXPECT_THROW((void)estimate_prob(a, ins({tau, tau}), {"bot", "bot"}, 1.0, 10, 1), InvalidInput);
}

TEST(EstimateRatio, EqualInputsGiveOne) {
    auto a = corpus::svt();
    const auto in = ins({tau, Rational(0), Rational(0)});
    auto r = estimate_ratio(a, in, in, {"bot", "bot", "top"}, 1.0, million, 71);
    EXPECT_LE(r.ci_low, 1.0);
    EXPECT_GE(r.ci_high, 1.0);
}

TEST(EstimateRatio, SvtAdjacentPairStaysUnderTheBound) {
    auto a = corpus::svt();
    const auto alpha = ins({tau, Rational(0), Rational(0), Rational(0)});
    const auto beta = ins({tau, Rational(1), Rational(1), Rational(-1)});
    for (const OutputEvent& ev : {OutputEvent{"bot", "bot", "bot", "top"}, OutputEvent{"bot", "top"}}) {
        InputSequence a1(alpha.begin(), alpha.begin() + static_cast<long>(ev.size()));
        InputSequence b1(beta.begin(), beta.begin() + static_cast<long>(ev.size()));
        for (const auto& [x, y] : {std::pair{a1, b1}, std::pair{b1, a1}}) {
            auto r = estimate_ratio(a, x, y, ev, 1.0, million, 72);
            EXPECT_LE(r.ratio, std::exp(1.25) + 3 * r.std_error);
        }
    }
}

TEST(EstimateRatio, RejectsNonAdjacentInputs) {
    auto a = corpus::svt();
    EXPECT_THROW((void)estimate_ratio(a, ins({tau, Rational(0)}), ins({tau, Rational(2)}), {"bot", "bot"}, 1.0, 10, 1),
                 InvalidInput);
}
