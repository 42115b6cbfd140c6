#pragma once

#include "dipa/error.hpp"
#include "dipa/model.hpp"
#include "dipa/rational.hpp"
#include "dipa/violation.hpp"

#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace dipa {

namespace corpus {

// Threshold algorithms: a non-input state samples the threshold and an input
// state compares every query against it.
inline DipAutomaton svt() {
    return Builder()
        .vars({"threshold"})
        .noninput("q0", Rational(1, 4), 0)
        .input("q1", Rational(1, 2), 0)
        .input("q2", Rational(1, 2), 0)
        .init("q0")
        .trans("q0", "q1", "true", "@bot", {"threshold"})
        .trans("q1", "q1", "x < threshold", "@bot")
        .trans("q1", "q2", "x >= threshold", "@top")
        .build();
}

inline DipAutomaton num_sparse() {
    return Builder()
        .vars({"threshold"})
        .noninput("q0", Rational(1, 4), 0)
        .input("q1", Rational(1, 2), 0, Rational(1, 2), 0)
        .input("q2", Rational(1, 2), 0)
        .init("q0")
        .trans("q0", "q1", "true", "@bot", {"threshold"})
        .trans("q1", "q1", "x < threshold", "@bot")
        .trans("q1", "q2", "x >= threshold", "insample'")
        .build();
}

// The second branch is an else-if on x < x2; under x < x2 the first branch's
// x > x2 already fails, so the guard is just x < x2.
inline DipAutomaton lc_example() {
    return Builder()
        .vars({"x1", "x2"})
        .noninput("q0", Rational(1, 2), 0)
        .noninput("q1", Rational(1, 2), 1)
        .input("q2", Rational(1, 2), 0)
        .init("q0")
        .trans("q0", "q1", "true", "@bot", {"x1"})
        .trans("q1", "q2", "true", "@bot", {"x2"})
        .trans("q2", "q2", "x < x1 && x >= x2", "@top")
        .trans("q2", "q2", "x < x2", "@bot", {"x2"})
        .build();
}

namespace detail {

// low/high thresholds, then one input state with an in-range loop and two
// exits.  Outputs are (loop, above-both exit, below-both exit).
inline DipAutomaton range_variant(std::string_view loop_out, std::string_view above_out, std::string_view below_out,
                                  Rational above_dp = 0) {
    return Builder()
        .vars({"low", "high"})
        .noninput("q0", Rational(1, 4), 0)
        .noninput("q1", Rational(1, 4), 1)
        .input("q2", Rational(1, 4), 0, above_dp, 0)
        .input("q3", Rational(1, 4), 0)
        .init("q0")
        .trans("q0", "q1", "true", "@bot", {"low"})
        .trans("q1", "q2", "true", "@bot", {"high"})
        .trans("q2", "q2", "x >= low && x < high", loop_out)
        .trans("q2", "q3", "x >= low && x >= high", above_out)
        .trans("q2", "q3", "x < low && x < high", below_out)
        .build();
}

// Three thresholds u < v < w (means 0, 1, 2); phase one keeps x in [u, v),
// phase two keeps it in [v, w).  With `resample`, v is sampled again between
// the phases.
inline DipAutomaton two_range(bool resample) {
    Builder b;
    b.vars({"u", "v", "w"})
        .noninput("q0", Rational(1, 4), 0)
        .noninput("q1", Rational(1, 4), 1)
        .noninput("q2", Rational(1, 4), 2)
        .input("p1", Rational(1, 4), 0);
    if (resample) b.noninput("r", Rational(1, 4), 1);
    b.input("p2", Rational(1, 4), 0)
        .input("done", Rational(1, 4), 0)
        .init("q0")
        .trans("q0", "q1", "true", "@bot", {"u"})
        .trans("q1", "q2", "true", "@bot", {"v"})
        .trans("q2", "p1", "true", "@bot", {"w"})
        .trans("p1", "p1", "x >= u && x < v", "@cont")
        .trans("p1", "done", "x < u", "@bot")
        .trans("p1", resample ? "r" : "p2", "x >= u && x >= v && x < w", "@top");
    if (resample) b.trans("r", "p2", "true", "@bot", {"v"});
    b.trans("p2", "p2", "x >= v && x < w", "@cont")
        .trans("p2", "done", "x < v", "@bot")
        .trans("p2", "done", "x >= v && x >= w", "@top");
    return b.build();
}

}  // namespace detail

inline DipAutomaton dc_example() { return detail::range_variant("insample", "@top", "@bot"); }
inline DipAutomaton num_range_1() { return detail::range_variant("@bot", "insample", "@top"); }
inline DipAutomaton num_range_2() { return detail::range_variant("@bot", "insample'", "@top", Rational(1, 4)); }
inline DipAutomaton two_range_1() { return detail::two_range(false); }
inline DipAutomaton two_range_2() { return detail::two_range(true); }

// k+2 states, 3k+1 transitions.  Phase one reads k queries at d = 1/(4k),
// keeping the running min and max; every branch outputs "read".  Phase two
// continues while queries stay in [min, max).
inline DipAutomaton k_min_max(int k) {
    if (k < 2) throw InvalidInput("k-min-max needs k >= 2");
    const Rational d1(1, 4 * k);
    Builder b;
    b.vars({"min", "max"});
    for (int i = 1; i <= k; ++i) b.input("q" + std::to_string(i), d1, 0);
    const std::string scan = "q" + std::to_string(k + 1);
    b.input(scan, Rational(1, 4), 0).input("done", Rational(1, 4), 0).init("q1");
    b.trans("q1", "q2", "true", "@read", {"min", "max"});
    for (int i = 2; i <= k; ++i) {
        const std::string s = "q" + std::to_string(i), t = "q" + std::to_string(i + 1);
        b.trans(s, t, "x >= max && x >= min", "@read", {"max"});
        b.trans(s, t, "x < min && x < max", "@read", {"min"});
        b.trans(s, t, "x >= min && x < max", "@read");
    }
    b.trans(scan, scan, "x >= min && x < max", "@bot");
    b.trans(scan, "done", "x >= min && x >= max", "@top1");
    b.trans(scan, "done", "x < min && x < max", "@top2");
    return b.build();
}

// 3m+1 states, 5m transitions, 2m variables.  The 2m thresholds are sampled
// at d = 1/(4m) (lower ones with mean 0, upper ones with mean 1); the point
// coordinates are read cyclically by m input states.  m = 1 is the range
// query automaton.
inline DipAutomaton m_range(int m) {
    if (m < 1) throw InvalidInput("m-range needs m >= 1");
    const Rational dt(1, 4 * m);
    std::vector<std::string> vars;
    for (int j = 1; j <= m; ++j) {
        vars.push_back("low" + std::to_string(j));
        vars.push_back("high" + std::to_string(j));
    }
    Builder b;
    b.vars(vars);
    for (int j = 1; j <= m; ++j) {
        b.noninput("l" + std::to_string(j), dt, 0);
        b.noninput("h" + std::to_string(j), dt, 1);
    }
    for (int j = 1; j <= m; ++j) b.input("c" + std::to_string(j), Rational(1, 4), 0);
    b.input("done", Rational(1, 4), 0).init("l1");
    for (int j = 1; j <= m; ++j) {
        const std::string l = "l" + std::to_string(j), h = "h" + std::to_string(j);
        b.trans(l, h, "true", "@bot", {"low" + std::to_string(j)});
        b.trans(h, j < m ? "l" + std::to_string(j + 1) : "c1", "true", "@bot", {"high" + std::to_string(j)});
    }
    for (int j = 1; j <= m; ++j) {
        const std::string c = "c" + std::to_string(j), lo = "low" + std::to_string(j),
                          hi = "high" + std::to_string(j);
        b.trans(c, "c" + std::to_string(j % m + 1), "x >= " + lo + " && x < " + hi, "@bot");
        b.trans(c, "done", "x >= " + lo + " && x >= " + hi, "@top1");
        b.trans(c, "done", "x < " + lo + " && x < " + hi, "@top2");
    }
    return b.build();
}

// Not well-formed (leaking cycle q0 -> q1 -> q0) yet private, since every
// transition outputs the same symbol.
inline DipAutomaton nwf() {
    return Builder()
        .vars({"r"})
        .noninput("q0", Rational(1, 4), 0)
        .input("q1", Rational(1, 4), 1)
        .init("q0")
        .trans("q0", "q1", "true", "@top", {"r"})
        .trans("q1", "q0", "x >= r", "@top")
        .trans("q1", "q1", "x < r", "@top")
        .build();
}

// Two cycles on q2 and q3 forming a leaking pair once q3 is left.
inline DipAutomaton leakp() {
    return Builder()
        .vars({"r1", "r2"})
        .noninput("q0", Rational(1, 4), 1)
        .noninput("q1", Rational(1, 4), 0)
        .input("q2", Rational(1, 4), 0)
        .input("q3", Rational(1, 4), 0)
        .input("q4", Rational(1, 4), 0)
        .init("q0")
        .trans("q0", "q1", "true", "@bot", {"r1"})
        .trans("q1", "q2", "true", "@bot", {"r2"})
        .trans("q2", "q2", "x >= r1", "@top")
        .trans("q2", "q3", "x < r1", "@bot")
        .trans("q3", "q3", "x < r2", "@top")
        .trans("q3", "q4", "x < r1 && x >= r2", "@bot")
        .build();
}

}  // namespace corpus

// Names accepted by gen().  Parametric families take k (k-min-max) or m
// (m-range); "range" is m-range with m = 1.
inline const std::vector<std::string>& corpus_names() {
    static const std::vector<std::string> names{"svt",         "num-sparse",  "lc-example", "dc-example",
                                                "num-range-1", "num-range-2", "two-range-1", "two-range-2",
                                                "k-min-max",   "m-range",     "range",       "nwf",
                                                "leakp"};
    return names;
}

[[nodiscard]] inline DipAutomaton gen(std::string_view name, std::optional<int> param = std::nullopt) {
    if (name == "svt") return corpus::svt();
    if (name == "num-sparse") return corpus::num_sparse();
    if (name == "lc-example") return corpus::lc_example();
    if (name == "dc-example") return corpus::dc_example();
    if (name == "num-range-1") return corpus::num_range_1();
    if (name == "num-range-2") return corpus::num_range_2();
    if (name == "two-range-1") return corpus::two_range_1();
    if (name == "two-range-2") return corpus::two_range_2();
    if (name == "k-min-max") return corpus::k_min_max(param.value_or(2));
    if (name == "m-range") return corpus::m_range(param.value_or(1));
    if (name == "range") return corpus::m_range(1);
    if (name == "nwf") return corpus::nwf();
    if (name == "leakp") return corpus::leakp();
    throw InvalidInput("unknown corpus automaton '" + std::string(name) + "'");
}

// One row of the benchmark table.  `vars`, `states` and `transitions` are
// the table's columns, which the generated automaton may not match for the
// hand-drawn examples (see README).
struct BenchmarkSpec {
    std::string label;
    std::string name;
    std::optional<int> param;
    int vars = 0;
    int states = 0;
    int transitions = 0;
    std::optional<ViolationKind> violation;  // nullopt: private
    std::optional<Rational> weight;
};

[[nodiscard]] inline const std::vector<BenchmarkSpec>& benchmark_table() {
    using VK = ViolationKind;
    static const std::vector<BenchmarkSpec> rows{
        {"SVT", "svt", {}, 1, 3, 3, {}, Rational(5, 4)},
        {"Num-Sparse", "num-sparse", {}, 1, 3, 3, {}, Rational(7, 4)},
        {"DC-Example", "dc-example", {}, 2, 4, 5, VK::disclosing_cycle, {}},
        {"Num-Range-1", "num-range-1", {}, 2, 4, 4, VK::privacy_violating_path, {}},
        {"Num-Range-2", "num-range-2", {}, 2, 4, 4, {}, Rational(5, 4)},
        {"LC-Example", "lc-example", {}, 2, 4, 4, VK::leaking_cycle, {}},
        {"Two-Range-1", "two-range-1", {}, 3, 6, 10, VK::leaking_pair, {}},
        {"Two-Range-2", "two-range-2", {}, 3, 7, 11, {}, Rational(2)},
        {"2-Min-Max", "k-min-max", 2, 2, 4, 7, {}, Rational(1)},
        {"10-Min-Max", "k-min-max", 10, 2, 12, 31, {}, Rational(1)},
        {"20-Min-Max", "k-min-max", 20, 2, 22, 61, {}, Rational(1)},
        {"100-Min-Max", "k-min-max", 100, 2, 102, 301, {}, Rational(1)},
        {"200-Min-Max", "k-min-max", 200, 2, 202, 601, {}, Rational(1)},
        {"1-Range", "m-range", 1, 2, 4, 5, {}, Rational(1)},
        {"10-Range", "m-range", 10, 20, 31, 50, {}, Rational(1)},
        {"20-Range", "m-range", 20, 40, 61, 100, {}, Rational(1)},
        {"40-Range", "m-range", 40, 80, 121, 200, {}, Rational(1)},
        {"80-Range", "m-range", 80, 160, 241, 400, {}, Rational(1)},
    };
    return rows;
}

struct RandomLimits {
    int max_states = 4;
    int max_vars = 2;
    int max_transitions = 6;
};

// A random valid, initialized automaton.  The initial states form a chain of
// non-input states whose true-guarded transitions assign every variable
// before any guard can read one.
[[nodiscard]] inline DipAutomaton random_automaton(std::mt19937_64& rng, const RandomLimits& lim = {}) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const Rational ds[] = {Rational(1, 4), Rational(1, 2), Rational(1)};
    const std::string symbols[] = {"a", "b", "c"};

    const int n = pick(1, std::max(1, lim.max_states));
    const int nv = n == 1 && lim.max_vars > 0 ? pick(0, 1) : pick(0, std::max(0, lim.max_vars));
    DipAutomaton a;
    for (int v = 0; v < nv; ++v) a.variables.push_back("r" + std::to_string(v + 1));

    const int prefix = nv == 0 ? 0 : std::min(n, pick(1, nv));
    for (int q = 0; q < n; ++q) {
        bool noninput = q < prefix || pick(0, 3) == 0;
        StateParams p{ds[pick(0, 2)], pick(0, 2), ds[pick(0, 2)], pick(0, 1)};
        a.states.push_back({"q" + std::to_string(q), noninput ? StateKind::noninput : StateKind::input, p});
    }
    a.init = 0;

    auto random_output = [&] {
        int r = pick(0, 5);
        if (r == 4) return Output::sample();
        if (r == 5) return Output::fresh_sample();
        return Output::sym(symbols[pick(0, 2)]);
    };
    auto random_assign = [&] {
        std::vector<bool> as(nv);
        for (int v = 0; v < nv; ++v) as[v] = pick(0, 2) == 0;
        return as;
    };

    // Chain: transition i assigns a share of the variables, the last one
    // assigns whatever is left.
    std::vector<bool> done(nv, false);
    for (int i = 0; i < prefix; ++i) {
        Transition t;
        t.src = i;
        t.trg = i + 1 < prefix ? i + 1 : pick(0, n - 1);
        t.output = random_output();
        t.assign = random_assign();
        if (i + 1 == prefix)
            for (int v = 0; v < nv; ++v) t.assign[v] = t.assign[v] || !done[v];
        for (int v = 0; v < nv; ++v) done[v] = done[v] || t.assign[v];
        a.transitions.push_back(std::move(t));
    }

    std::vector<std::vector<Guard>> guards(n);
    const int budget = std::max(0, lim.max_transitions - prefix);
    const int extra = budget == 0 || n == prefix ? 0 : pick(0, budget);
    for (int k = 0; k < extra; ++k) {
        const int src = pick(prefix, n - 1);
        Transition t;
        t.src = src;
        t.trg = pick(0, n - 1);
        t.output = random_output();
        t.assign = random_assign();
        if (a.states[src].kind == StateKind::noninput) {
            if (!guards[src].empty()) continue;
        } else {
            for (int v = 0; v < nv; ++v) {
                int r = pick(0, 2);
                if (r == 1) t.guard.atoms.push_back({v, Rel::ge});
                if (r == 2) t.guard.atoms.push_back({v, Rel::lt});
            }
            bool clash = false;
            for (const auto& g : guards[src]) clash = clash || !guards_contradictory(g, t.guard);
            if (clash) continue;
        }
        guards[src].push_back(t.guard);
        a.transitions.push_back(std::move(t));
    }

    std::vector<std::string> alpha;
    for (const auto& t : a.transitions)
        if (t.output.kind == Output::Kind::symbol) alpha.push_back(t.output.symbol);
    std::sort(alpha.begin(), alpha.end());
    alpha.erase(std::unique(alpha.begin(), alpha.end()), alpha.end());
    a.alphabet = std::move(alpha);
    return a;
}

}  // namespace dipa
