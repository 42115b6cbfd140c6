#pragma once

#include "dipa/augmentation.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <vector>

namespace dipa {

// A feasible run on which two non-input samples are ordered by the guards
// against the order of their means.
struct StrongFeasibilityWarning {
    Run run;
    int below = 0;  // variable holding (a descendant of) the smaller sample
    int above = 0;
};

// Explores the augmentation together with, per variable, the largest mean
// of a non-input sample forced below the variable's value ("up") and the
// smallest mean of one forced above it ("down").  A dependency path from a
// non-input position u to a non-input position w exists exactly when some
// new order i < j joins u (folded into up[i]) to w (folded into down[j]), so
// a violation is flagged when up[i] >= down[j].  Means are compared through
// their rank among the automaton's non-input means.
[[nodiscard]] inline std::optional<StrongFeasibilityWarning> check_strong_feasibility(
    const DipAutomaton& a, const AugAutomaton& aug, std::size_t cap = default_aug_cap) {
    if (aug.states.empty()) return std::nullopt;
    const int nv = static_cast<int>(a.num_vars());

    std::vector<Rational> means;
    for (const auto& s : a.states)
        if (s.kind == StateKind::noninput) means.push_back(s.params.mu);
    std::sort(means.begin(), means.end());
    means.erase(std::unique(means.begin(), means.end()), means.end());
    auto rank = [&](const Rational& m) {
        return static_cast<signed char>(std::lower_bound(means.begin(), means.end(), m) - means.begin());
    };
    constexpr signed char none = -1;

    struct Node {
        int aug;
        std::vector<signed char> up, down;
        bool operator==(const Node&) const = default;
    };
    struct NodeHash {
        std::size_t operator()(const Node& n) const {
            std::size_t h = static_cast<std::size_t>(n.aug) * 1315423911u;
            for (auto x : n.up) h = h * 31 + static_cast<unsigned char>(x);
            for (auto x : n.down) h = h * 37 + static_cast<unsigned char>(x);
            return h;
        }
    };

    std::vector<Node> nodes;
    std::vector<std::pair<int, int>> parent;  // (node, aug transition)
    std::unordered_map<Node, int, NodeHash> index;
    nodes.push_back({aug.init(), std::vector<signed char>(nv, none), std::vector<signed char>(nv, none)});
    parent.emplace_back(-1, -1);
    index.emplace(nodes[0], 0);

    auto witness = [&](int node, int at, int i, int j) {
        Run r{aug.transitions[at].base};
        for (int k = node; parent[k].first >= 0; k = parent[k].first) r.push_back(aug.transitions[parent[k].second].base);
        std::reverse(r.begin(), r.end());
        return StrongFeasibilityWarning{std::move(r), i, j};
    };

    for (std::size_t cur = 0; cur < nodes.size(); ++cur) {
        const int s = nodes[cur].aug;
        for (int at : aug.out[s]) {
            const auto& ts = aug.sets_of(at);
            GuardBounds b = guard_bounds(aug.states[s], ts);
            const Node& n = nodes[cur];

            signed char up_x = none, down_x = none;
            b.sm.for_each([&](std::size_t i) { up_x = std::max(up_x, n.up[i]); });
            b.lg.for_each([&](std::size_t j) {
                if (n.down[j] != none) down_x = down_x == none ? n.down[j] : std::min(down_x, n.down[j]);
            });
            if (up_x != none && down_x != none && up_x >= down_x) {
                int bi = -1, bj = -1;
                b.sm.for_each([&](std::size_t i) {
                    if (n.up[i] == up_x && bi < 0) bi = static_cast<int>(i);
                });
                b.lg.for_each([&](std::size_t j) {
                    if (n.down[j] == down_x && bj < 0) bj = static_cast<int>(j);
                });
                return witness(static_cast<int>(cur), at, bi, bj);
            }

            Node next{aug.transitions[at].trg, n.up, n.down};
            b.lg.for_each([&](std::size_t w) { next.up[w] = std::max(next.up[w], up_x); });
            b.sm.for_each([&](std::size_t u) {
                if (down_x != none) next.down[u] = next.down[u] == none ? down_x : std::min(next.down[u], down_x);
            });
            const bool noninput = !a.is_input(a.transitions[aug.transitions[at].base].src);
            const signed char own = noninput ? rank(a.params_of(aug.transitions[at].base).mu) : none;
            ts.assign.for_each([&](std::size_t v) {
                next.up[v] = noninput ? own : up_x;
                next.down[v] = noninput ? own : down_x;
            });

            auto [it, fresh] = index.try_emplace(next, static_cast<int>(nodes.size()));
            if (fresh) {
                if (nodes.size() >= cap) throw ResourceLimit("strong-feasibility search", cap);
                nodes.push_back(std::move(next));
                parent.emplace_back(static_cast<int>(cur), at);
            }
        }
    }
    return std::nullopt;
}

}  // namespace dipa
