#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance suite.  Each works from definitions on explicit runs rather
// than through the graph algorithms it is used to check.

#include "dipa/augmentation.hpp"
#include "dipa/dependency.hpp"
#include "dipa/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using dipa::AugAutomaton;
using dipa::DipAutomaton;
using dipa::Rational;
using dipa::Run;

// Every aug run from init of length <= max_len (as aug transition ids).
inline void for_each_aug_run(const AugAutomaton& g, int max_len, const std::function<void(const std::vector<int>&)>& f) {
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int s) {
        f(cur);
        if (static_cast<int>(cur.size()) >= max_len) return;
        for (int at : g.out[s]) {
            cur.push_back(at);
            rec(g.transitions[at].trg);
            cur.pop_back();
        }
    };
    if (!g.states.empty()) rec(g.init());
}

struct AugCheck {
    long long aug_runs = 0;
    long long failures = 0;
    std::string first_failure;
};

// Checks, for every aug run of length <= max_len:
//  * its projection is a feasible base run,
//  * at every prefix end, lt / eq of the reached aug state agree with paths
//    between last assignments in the prefix's dependency graph,
// and that projection is a bijection onto the feasible base runs of length
// <= max_len.
inline AugCheck check_augmentation(const DipAutomaton& a, const AugAutomaton& g, int max_len) {
    AugCheck out;
    const int nv = static_cast<int>(a.num_vars());
    std::set<Run> projected;
    auto fail = [&](const std::string& what) {
        if (out.failures++ == 0) out.first_failure = what;
    };
    for_each_aug_run(g, max_len, [&](const std::vector<int>& ar) {
        ++out.aug_runs;
        const Run r = dipa::project(g, ar);
        if (!projected.insert(r).second) fail("two aug runs share a projection");
        if (!dipa::is_feasible(a, r)) fail("projection is infeasible");
        if (ar.empty()) return;
        const auto& st = g.states[g.transitions[ar.back()].trg];
        const auto dep = dipa::build_dependency_graph(a, r);
        const auto reach = dep.reachability();
        const int n = static_cast<int>(r.size());
        for (int v1 = 0; v1 < nv; ++v1)
            for (int v2 = 0; v2 < nv; ++v2) {
                auto l1 = dipa::lastassign(a, r, v1, n), l2 = dipa::lastassign(a, r, v2, n);
                const bool lt = l1 && l2 && reach[*l1][*l2];
                const bool eq = v1 == v2 || (l1 && l2 && *l1 == *l2);
                if (st.lt.test(v1, v2) != lt) fail("lt mismatch");
                if (st.eq.test(v1, v2) != eq) fail("eq mismatch");
            }
        if (st.q != a.transitions[r.back()].trg) fail("base state mismatch");
    });
    std::set<Run> feasible;
    dipa::for_each_run(a, max_len, true, [&](const Run& r) { feasible.insert(r); });
    if (feasible != projected) fail("projection is not onto the feasible runs");
    return out;
}

// Run weight from the definition on one explicit aug run: quasi-cycle
// transitions, gcycle/lcycle nodes and the f(a+b)d + c d' sum.
inline Rational run_weight(const DipAutomaton& a, const AugAutomaton& g, const std::vector<int>& ar) {
    const Run r = dipa::project(g, ar);
    const int n = static_cast<int>(r.size());
    if (n == 0) return 0;
    const int nv = static_cast<int>(a.num_vars());
    const auto dep = dipa::build_dependency_graph(a, r);
    const auto reach = dep.reachability();
    auto reaches = [&](int u, int v) { return u == v || reach[u][v]; };
    std::vector<char> cyc(n);
    for (int j = 0; j < n; ++j) cyc[j] = g.is_cycle_transition(ar[j]);

    // gcycle: a path from j whose last edge (u, v) has u < v into a cycle
    // transition; lcycle: a path into j whose first edge (u, v) has v < u out
    // of a cycle transition.
    std::vector<char> gcycle(n, 0), lcycle(n, 0);
    for (auto [u, v] : dep.edges) {
        for (int j = 0; j < n; ++j) {
            if (u < v && cyc[v] && reaches(j, u)) gcycle[j] = 1;
            if (v < u && cyc[u] && reaches(v, j)) lcycle[j] = 1;
        }
    }
    // usedv of each suffix.
    std::vector<std::vector<char>> used(n + 1, std::vector<char>(nv, 0));
    for (int j = n - 1; j >= 0; --j) {
        const auto& t = a.transitions[r[j]];
        for (int v = 0; v < nv; ++v) used[j][v] = !t.assign[v] && used[j + 1][v];
        for (const auto& at : t.guard.atoms) used[j][at.var] = 1;
    }
    Rational total = 0;
    for (int j = 0; j < n; ++j) {
        const auto& t = a.transitions[r[j]];
        const auto& p = a.states[t.src].params;
        const bool input = a.is_input(t.src);
        bool quasi = t.output.kind != dipa::Output::Kind::real_sample;
        for (int v = 0; v < nv && quasi; ++v)
            if (t.assign[v] && used[j + 1][v]) quasi = false;
        for (const auto& at : t.guard.atoms) {
            if (!quasi) break;
            auto la = dipa::lastassign(a, r, at.var, j);
            if (!la) continue;
            if (at.rel == dipa::Rel::ge && !gcycle[*la]) quasi = false;
            if (at.rel == dipa::Rel::lt && !lcycle[*la]) quasi = false;
        }
        const int f = quasi ? 0 : 1;
        const int aj = gcycle[j] || lcycle[j] ? 1 : 0;
        const int bj = input ? 1 : 0;
        const int cj = input && t.output.kind == dipa::Output::Kind::real_fresh_sample ? 1 : 0;
        total += Rational(f * (aj + bj)) * p.d + Rational(cj) * p.d_prime;
    }
    return total;
}

// Laplace with density k/2 exp(-k |x - mu|).
inline double lap_pdf(double k, double mu, double x) { return 0.5 * k * std::exp(-k * std::abs(x - mu)); }
inline double lap_cdf(double k, double mu, double x) {
    return x < mu ? 0.5 * std::exp(k * (x - mu)) : 1.0 - 0.5 * std::exp(-k * (x - mu));
}

// Integral of f over the real line, split at `at` where the integrand has a
// kink, by adaptive Gauss-Kronrod on each half-line.
inline double integrate(const std::function<double(double)>& f, double at = 0) {
    using boost::math::quadrature::gauss_kronrod;
    constexpr double inf = std::numeric_limits<double>::infinity();
    auto lo = gauss_kronrod<double, 61>::integrate([&](double x) { return f(x); }, -inf, at, 15, 1e-13);
    auto hi = gauss_kronrod<double, 61>::integrate([&](double x) { return f(x); }, at, inf, 15, 1e-13);
    return lo + hi;
}

}  // namespace oracle
