#pragma once

#include "dipa/dependency.hpp"
#include "dipa/error.hpp"
#include "dipa/model.hpp"
#include "dipa/rational.hpp"
#include "dipa/violation.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

namespace dipa {

enum class PsiMode { lower, upper };

struct PsiAssignment {
    std::vector<Rational> psi;  // per position
    Rational delta{0};
    Rational z{0};
};

// Target values for the samples of a run.  Positions in `designated` (the
// non-input positions whose own mean is kept) get their mean; in lower mode
// every other position gets z at a source and otherwise the largest
// weight of a maximal path ending there, i.e. max over predecessors plus
// delta.  Upper mode mirrors this with sinks, successors and minus delta.
// `z_means` are the means that fix z (min - 1/2, or max + 1/2).
[[nodiscard]] inline PsiAssignment psi_assignment(const DipAutomaton& a, const Run& run, PsiMode mode,
                                                  const std::vector<char>& designated,
                                                  const std::vector<Rational>& z_means) {
    const int n = static_cast<int>(run.size());
    auto g = build_dependency_graph(a, run);
    if (!is_acyclic(g)) throw PreconditionError("psi_assignment: dependency graph is cyclic");

    auto mu = [&](int u) { return a.params_of(run[u]).mu; };
    auto noninput = [&](int u) { return !a.is_input_transition(run[u]); };

    PsiAssignment res;
    Rational gap(1, 2);
    for (int u = 0; u < n; ++u)
        for (int w = 0; w < n; ++w)
            if (noninput(u) && noninput(w) && mu(u) != mu(w)) gap = std::min(gap, abs(mu(u) - mu(w)));
    res.delta = n > 0 ? gap / n : gap;
    if (mode == PsiMode::lower)
        res.z = z_means.empty() ? Rational(-1, 2) : *std::min_element(z_means.begin(), z_means.end()) - Rational(1, 2);
    else
        res.z = z_means.empty() ? Rational(1, 2) : *std::max_element(z_means.begin(), z_means.end()) + Rational(1, 2);

    std::vector<std::vector<int>> pred(n);
    std::vector<int> indeg(n, 0);
    for (auto [i, j] : g.edges) {
        pred[j].push_back(i);
        ++indeg[j];
    }
    // Kahn's order, smallest position first.
    std::vector<int> order;
    std::vector<int> ready;
    for (int u = n - 1; u >= 0; --u)
        if (!indeg[u]) ready.push_back(u);
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), std::greater<>());
        int u = ready.back();
        ready.pop_back();
        order.push_back(u);
        for (int w : g.succ[u])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    if (mode == PsiMode::upper) std::reverse(order.begin(), order.end());

    res.psi.assign(n, Rational(0));
    for (int u : order) {
        const bool fixed = u < static_cast<int>(designated.size()) && designated[u];
        if (fixed) {
            res.psi[u] = mu(u);
            continue;
        }
        const auto& nb = mode == PsiMode::lower ? pred[u] : g.succ[u];
        if (nb.empty()) {
            res.psi[u] = res.z;
            continue;
        }
        Rational best = res.psi[nb[0]];
        for (int w : nb) best = mode == PsiMode::lower ? std::max(best, res.psi[w]) : std::min(best, res.psi[w]);
        res.psi[u] = mode == PsiMode::lower ? best + res.delta : best - res.delta;
    }
    return res;
}

// No designated positions and no means for z.
[[nodiscard]] inline PsiAssignment psi_assignment(const DipAutomaton& a, const Run& run, PsiMode mode) {
    return psi_assignment(a, run, mode, {}, {});
}

struct Band {
    int position = 0;
    Rational lo{0};
    Rational hi{0};
    friend bool operator==(const Band&, const Band&) = default;
};

struct WitnessPair {
    ViolationKind kind = ViolationKind::leaking_cycle;
    Run run;  // the violation run with its cycle(s) unrolled
    InputSequence alpha;
    InputSequence beta;
    OutputEvent event;
    int ell = 1;
    std::vector<Band> bands;
    std::vector<int> shifted;    // positions where beta differs from alpha
    std::vector<Rational> means; // sample mean per position under alpha
    std::optional<PsiMode> mode; // LC/LP only
    Rational delta{0};
};

namespace detail {

// r with each span repeated `times` times.  orig/iter map every new position
// back to its position in r and its iteration (-1 outside the spans).
struct Unrolled {
    Run run;
    std::vector<int> orig;
    std::vector<int> iter;

    [[nodiscard]] int copy(int orig_pos, int k) const {
        for (std::size_t p = 0; p < orig.size(); ++p)
            if (orig[p] == orig_pos && (iter[p] == k || iter[p] < 0)) return static_cast<int>(p);
        throw PreconditionError("unrolled copy not found");
    }
};

inline Unrolled unroll(const Run& r, std::vector<Span> spans, int times) {
    std::sort(spans.begin(), spans.end(), [](Span x, Span y) { return x.begin < y.begin; });
    Unrolled u;
    int p = 0;
    for (const Span& s : spans) {
        for (; p < s.begin; ++p) {
            u.run.push_back(r[p]);
            u.orig.push_back(p);
            u.iter.push_back(-1);
        }
        for (int k = 0; k < times; ++k)
            for (int i = s.begin; i < s.end; ++i) {
                u.run.push_back(r[i]);
                u.orig.push_back(i);
                u.iter.push_back(k);
            }
        p = s.end;
    }
    for (; p < static_cast<int>(r.size()); ++p) {
        u.run.push_back(r[p]);
        u.orig.push_back(p);
        u.iter.push_back(-1);
    }
    return u;
}

inline OutputEvent verbatim_event(const DipAutomaton& a, const Run& run) {
    OutputEvent ev;
    for (int t : run) {
        const auto& o = a.transitions[t].output;
        if (o.kind == Output::Kind::symbol) ev.emplace_back(o.symbol);
        else ev.emplace_back(Interval{});
    }
    return ev;
}

// alpha from target means: input positions read target - mu so that the
// sample's mean is the target.
inline void inputs_from_targets(const DipAutomaton& a, WitnessPair& w, const std::vector<Rational>& target) {
    w.alpha.clear();
    w.means.clear();
    for (std::size_t u = 0; u < w.run.size(); ++u) {
        const auto& p = a.params_of(w.run[u]);
        if (a.is_input_transition(w.run[u])) {
            w.alpha.emplace_back(target[u] - p.mu);
            w.means.push_back(target[u]);
        } else {
            w.alpha.emplace_back(std::nullopt);
            w.means.push_back(p.mu);
        }
    }
    w.beta = w.alpha;
}

inline void shift(WitnessPair& w, int pos, const Rational& by) {
    if (!w.alpha[pos]) throw PreconditionError("witness shift on a non-input position");
    w.beta[pos] = *w.alpha[pos] + by;
    w.shifted.push_back(pos);
}

inline void add_bands(const DipAutomaton& a, WitnessPair& w, const PsiAssignment& psi,
                      const std::vector<char>& designated) {
    for (std::size_t u = 0; u < w.run.size(); ++u)
        if (!a.is_input_transition(w.run[u]) && !designated[u])
            w.bands.push_back({static_cast<int>(u), psi.psi[u] - psi.delta / 2, psi.psi[u] + psi.delta / 2});
}

inline WitnessPair leaking_cycle_witness(const DipAutomaton& a, const Violation& v, int ell) {
    const Span c1 = v.cycles.at(0);
    const int m = c1.begin;
    // eta = rho with C' doubled; C = C'C' has length n.
    const Unrolled eta = unroll(v.run, {c1}, 2);
    const int n = 2 * c1.length();

    struct Triple {
        int u, w, var;
        Rel rel;
    };
    std::vector<Triple> triples;
    for (int w = m; w < m + n; ++w)
        for (const auto& at : a.transitions[eta.run[w]].guard.atoms) {
            auto u = lastassign(a, eta.run, at.var, w);
            if (u && *u >= m) triples.push_back({*u, w, at.var, at.rel});
        }
    if (triples.empty()) throw PreconditionError("leaking cycle witness: no assign/refer pair on the cycle");

    const bool lower = std::any_of(triples.begin(), triples.end(), [](const Triple& t) { return t.rel == Rel::ge; });
    const Rel want = lower ? Rel::ge : Rel::lt;
    std::optional<Triple> pick;
    for (const auto& t : triples) {
        if (t.rel != want || a.is_input_transition(eta.run[t.u])) continue;
        const Rational mu = a.params_of(eta.run[t.u]).mu;
        if (!pick) {
            pick = t;
            continue;
        }
        const Rational best = a.params_of(eta.run[pick->u]).mu;
        if (lower ? mu > best : mu < best) pick = t;
    }
    if (!pick)
        for (const auto& t : triples)
            if (t.rel == want) {
                pick = t;
                break;
            }

    const Unrolled full = unroll(eta.run, {{m, m + n}}, ell);
    WitnessPair w;
    w.kind = ViolationKind::leaking_cycle;
    w.ell = ell;
    w.run = full.run;
    const int len = static_cast<int>(w.run.size());

    std::vector<char> designated(len, 0);
    for (int u = m; u < m + n * ell; ++u) designated[u] = !a.is_input_transition(w.run[u]);
    std::vector<Rational> z_means;
    for (int u = m; u < m + n; ++u)
        if (!a.is_input_transition(w.run[u])) z_means.push_back(a.params_of(w.run[u]).mu);

    w.mode = lower ? PsiMode::lower : PsiMode::upper;
    auto psi = psi_assignment(a, w.run, *w.mode, designated, z_means);
    w.delta = psi.delta;
    inputs_from_targets(a, w, psi.psi);
    for (int k = 0; k < ell; ++k) shift(w, pick->w + n * k, lower ? Rational(-1) : Rational(1));
    add_bands(a, w, psi, designated);
    w.event = verbatim_event(a, w.run);
    return w;
}

inline WitnessPair leaking_pair_witness(const DipAutomaton& a, const Violation& v, int ell) {
    const Span c1 = v.cycles.at(0), c2 = v.cycles.at(1);
    const int k1 = v.positions.at(0), km = v.positions.at(1);
    const Unrolled full = unroll(v.run, {c1, c2}, ell);
    WitnessPair w;
    w.kind = ViolationKind::leaking_pair;
    w.ell = ell;
    w.run = full.run;
    const int len = static_cast<int>(w.run.size());

    // Non-input positions in all but the last iteration of either cycle keep
    // their mean.
    std::vector<char> designated(len, 0);
    for (int p = 0; p < len; ++p)
        designated[p] = full.iter[p] >= 0 && full.iter[p] < ell - 1 && !a.is_input_transition(w.run[p]);
    std::vector<Rational> z_means;
    for (Span s : {c1, c2})
        for (int u = s.begin; u < s.end; ++u)
            if (!a.is_input_transition(v.run[u])) z_means.push_back(a.params_of(v.run[u]).mu);

    w.mode = PsiMode::lower;
    auto psi = psi_assignment(a, w.run, PsiMode::lower, designated, z_means);
    w.delta = psi.delta;
    inputs_from_targets(a, w, psi.psi);
    (void)k1;
    for (int k = 0; k + 1 < ell; ++k) shift(w, full.copy(km, k), Rational(-1));
    add_bands(a, w, psi, designated);
    w.event = verbatim_event(a, w.run);
    return w;
}

// Inputs -mu everywhere so every input sample has mean 0.
inline void centered_inputs(const DipAutomaton& a, WitnessPair& w) {
    std::vector<Rational> zero(w.run.size(), Rational(0));
    inputs_from_targets(a, w, zero);
}

inline WitnessPair disclosing_cycle_witness(const DipAutomaton& a, const Violation& v, int ell) {
    const Span c = v.cycles.at(0);
    const int r = v.positions.at(0);
    const Unrolled full = unroll(v.run, {c}, ell);
    WitnessPair w;
    w.kind = ViolationKind::disclosing_cycle;
    w.ell = ell;
    w.run = full.run;
    centered_inputs(a, w);
    w.event = verbatim_event(a, w.run);
    for (int k = 0; k < ell; ++k) {
        const int p = full.copy(r, k);
        shift(w, p, Rational(-1));
        w.event[p] = Interval{Rational(0), std::nullopt};
    }
    return w;
}

// Case 'b': k1 on C reads x < r, km outputs x; shift k1's copies up and ask
// for a non-positive output.  Case 'a' mirrors it: k1 outputs x, km on C
// reads x >= r; shift km's copies down and ask for a positive output.
inline WitnessPair privacy_violating_path_witness(const DipAutomaton& a, const Violation& v, int ell) {
    const Span c = v.cycles.at(0);
    const int k1 = v.positions.at(0), km = v.positions.at(1);
    const Unrolled full = unroll(v.run, {c}, ell);
    WitnessPair w;
    w.kind = ViolationKind::privacy_violating_path;
    w.ell = ell;
    w.run = full.run;
    centered_inputs(a, w);
    w.event = verbatim_event(a, w.run);
    const bool case_b = v.pv_case != 'a';
    const int on_cycle = case_b ? k1 : km;
    const int output = case_b ? km : k1;
    for (int k = 0; k < ell; ++k) shift(w, full.copy(on_cycle, k), case_b ? Rational(1) : Rational(-1));
    const int out_pos = c.contains(output) ? full.copy(output, ell - 1) : full.copy(output, -1);
    w.event[out_pos] = case_b ? Interval{std::nullopt, Rational(0)} : Interval{Rational(0), std::nullopt};
    return w;
}

}  // namespace detail

// Adjacent inputs (alpha, beta) and an output event on which the violation
// makes the probability ratio grow with ell.
[[nodiscard]] inline WitnessPair gen_witness(const DipAutomaton& a, const Violation& v, int ell) {
    if (ell < 1) throw PreconditionError("gen_witness: ell must be at least 1");
    WitnessPair w;
    switch (v.kind) {
        case ViolationKind::leaking_cycle: w = detail::leaking_cycle_witness(a, v, ell); break;
        case ViolationKind::leaking_pair: w = detail::leaking_pair_witness(a, v, ell); break;
        case ViolationKind::disclosing_cycle: w = detail::disclosing_cycle_witness(a, v, ell); break;
        case ViolationKind::privacy_violating_path: w = detail::privacy_violating_path_witness(a, v, ell); break;
    }
    std::sort(w.shifted.begin(), w.shifted.end());
    return w;
}

}  // namespace dipa
