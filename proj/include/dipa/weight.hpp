#pragma once

#include "dipa/augmentation.hpp"
#include "dipa/error.hpp"
#include "dipa/scc.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

namespace dipa {

// True iff some run from `from_state` uses v before any transition assigns
// it.  A transition that both uses and assigns v counts as a use (the guard
// is evaluated first).
[[nodiscard]] inline bool var_used_before_reassign(const AugAutomaton& g, int from_state, int v) {
    std::vector<char> seen(g.states.size(), 0);
    std::deque<int> q{from_state};
    seen[from_state] = 1;
    while (!q.empty()) {
        int s = q.front();
        q.pop_front();
        for (int at : g.out[s]) {
            const auto& ts = g.sets_of(at);
            if (ts.used.test(v)) return true;
            if (ts.assign.test(v)) continue;
            int w = g.transitions[at].trg;
            if (!seen[w]) {
                seen[w] = 1;
                q.push_back(w);
            }
        }
    }
    return false;
}

// Coarsest partition of the aug states that refines "same base state" and
// is stable under every base transition label.
[[nodiscard]] inline std::vector<int> bisimulation_blocks(const AugAutomaton& g) {
    const std::size_t n = g.states.size();
    std::vector<int> block(n);
    for (std::size_t s = 0; s < n; ++s) block[s] = g.states[s].q;
    std::size_t count = 0;
    {
        std::vector<int> ids = block;
        std::sort(ids.begin(), ids.end());
        count = static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
    }
    for (;;) {
        std::map<std::vector<int>, int> sig_ids;
        std::vector<int> next(n);
        for (std::size_t s = 0; s < n; ++s) {
            std::vector<int> sig{block[s]};
            for (int at : g.out[s]) {
                sig.push_back(g.transitions[at].base);
                sig.push_back(block[g.transitions[at].trg]);
            }
            auto [it, fresh] = sig_ids.try_emplace(std::move(sig), static_cast<int>(sig_ids.size()));
            next[s] = it->second;
        }
        block = std::move(next);
        if (sig_ids.size() == count) break;
        count = sig_ids.size();
    }
    return block;
}

// The graph whose condensation yields the weight: either the augmentation
// itself or its bisimulation quotient.
struct WeightedAugGraph {
    struct Edge {
        int src = 0;
        int trg = 0;
        int base = 0;      // base transition
        int aug = 0;       // a representative aug transition
        Rational weight{0};
        bool cycle = false;
    };
    int nodes = 0;
    int init = 0;
    std::vector<Edge> edges;
    SccResult scc;
    std::vector<Rational> component_weight;
};

// Weight e*w1 + w2 of one edge: e = 2 for input transitions, 1 otherwise;
// w1 = d unless the edge stays inside an SCC and none of its assigned
// variables is read again before being reassigned; w2 = d' when x' is
// output.
[[nodiscard]] inline Rational edge_weight(const AugAutomaton& g, int aug_transition, bool cycle) {
    const auto& a = *g.base;
    const int t = g.transitions[aug_transition].base;
    const auto& tr = a.transitions[t];
    const auto& p = a.states[tr.src].params;
    const Rational e = a.is_input(tr.src) ? 2 : 1;
    bool charge = !cycle;
    if (!charge) {
        g.sets_of(aug_transition).assign.for_each([&](std::size_t v) {
            if (!charge && var_used_before_reassign(g, g.transitions[aug_transition].trg, static_cast<int>(v)))
                charge = true;
        });
    }
    Rational w1 = charge ? p.d : Rational(0);
    Rational w2 = tr.output.kind == Output::Kind::real_fresh_sample ? p.d_prime : Rational(0);
    return e * w1 + w2;
}

// Same, with "cycle" read off the augmentation's own SCCs.
[[nodiscard]] inline Rational edge_weight(const AugAutomaton& g, int aug_transition) {
    return edge_weight(g, aug_transition, g.is_cycle_transition(aug_transition));
}

[[nodiscard]] inline WeightedAugGraph build_weighted_graph(const AugAutomaton& g, bool quotient = true) {
    WeightedAugGraph w;
    if (g.states.empty()) return w;
    std::vector<int> block;
    if (quotient) {
        block = bisimulation_blocks(g);
    } else {
        block.resize(g.states.size());
        std::iota(block.begin(), block.end(), 0);
    }
    w.nodes = *std::max_element(block.begin(), block.end()) + 1;
    w.init = block[g.init()];

    std::map<std::tuple<int, int, int>, int> seen;
    for (std::size_t at = 0; at < g.transitions.size(); ++at) {
        const auto& t = g.transitions[at];
        auto key = std::make_tuple(block[t.src], t.base, block[t.trg]);
        if (!seen.try_emplace(key, static_cast<int>(w.edges.size())).second) continue;
        w.edges.push_back({block[t.src], block[t.trg], t.base, static_cast<int>(at), 0, false});
    }
    std::vector<std::vector<int>> succ(w.nodes);
    for (const auto& e : w.edges) succ[e.src].push_back(e.trg);
    w.scc = tarjan_scc(w.nodes, {w.init}, [&](int v, auto&& f) {
        for (int x : succ[v]) f(x);
    });
    w.component_weight.assign(w.scc.count, Rational(0));
    for (auto& e : w.edges) {
        e.cycle = w.scc.comp[e.src] == w.scc.comp[e.trg];
        e.weight = edge_weight(g, e.aug, e.cycle);
        if (e.cycle) w.component_weight[w.scc.comp[e.src]] += e.weight;
    }
    return w;
}

// Longest path over the condensation from the initial component, counting
// the weights of the visited components and of the edges between them.
[[nodiscard]] inline Rational longest_path_weight(const WeightedAugGraph& w) {
    if (w.nodes == 0) return 0;
    // Tarjan ids are a reverse topological order, so ascending id visits
    // every successor component first.
    std::vector<std::vector<const WeightedAugGraph::Edge*>> exits(w.scc.count);
    for (const auto& e : w.edges)
        if (!e.cycle) exits[w.scc.comp[e.src]].push_back(&e);
    std::vector<Rational> best(w.scc.count, Rational(0));
    for (int c = 0; c < w.scc.count; ++c) {
        Rational tail = 0;
        for (const auto* e : exits[c]) tail = std::max(tail, e->weight + best[w.scc.comp[e->trg]]);
        best[c] = w.component_weight[c] + tail;
    }
    return best[w.scc.comp[w.init]];
}

// The weight D.  `quotient` selects the bisimulation quotient of the
// augmentation (the tighter bound); without it the augmentation's own SCCs
// are used.  The automaton must be well-formed; the cheap part of that is
// re-checked here (no variable assigned and used inside one SCC).
[[nodiscard]] inline Rational compute_weight(const AugAutomaton& g, bool quotient = true) {
    for (std::size_t at = 0; at < g.transitions.size(); ++at) {
        if (!g.is_cycle_transition(static_cast<int>(at))) continue;
        const auto& ts = g.sets_of(static_cast<int>(at));
        for (std::size_t bt = 0; bt < g.transitions.size(); ++bt)
            if (g.is_cycle_transition(static_cast<int>(bt)) &&
                g.scc.comp[g.transitions[bt].src] == g.scc.comp[g.transitions[at].src] &&
                g.sets_of(static_cast<int>(bt)).used.intersects(ts.assign))
                throw PreconditionError("compute_weight: automaton has a leaking cycle");
    }
    return longest_path_weight(build_weighted_graph(g, quotient));
}

}  // namespace dipa
