#pragma once

#include "dipa/bits.hpp"
#include "dipa/dependency.hpp"
#include "dipa/error.hpp"
#include "dipa/model.hpp"
#include "dipa/scc.hpp"

#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

namespace dipa {

// (q, lt, eq): lt is a strict partial order and eq an equivalence over the
// storage variables, lt and eq disjoint and lt | eq transitive.
struct AugState {
    int q = 0;
    BitMatrix lt;
    BitMatrix eq;
    friend bool operator==(const AugState&, const AugState&) = default;
};

struct AugStateHash {
    std::size_t operator()(const AugState& s) const {
        return s.eq.hash(s.lt.hash(static_cast<std::size_t>(s.q) * 0x9e3779b97f4a7c15ULL));
    }
};

// Variable sets of one base transition, computed once.
struct TransitionSets {
    VarSet ge;      // smallv: x >= r
    VarSet lt;      // largev: x < r
    VarSet used;    // usedv
    VarSet assign;  // assignv
    VarSet keep;    // nonassignv
};

[[nodiscard]] inline TransitionSets transition_sets(const DipAutomaton& a, const Transition& t) {
    return {smallv(a, t), largev(a, t), usedv(a, t), assignv(a, t), nonassignv(a, t)};
}

// sm = variables known to be <= x after the guard holds, lg = variables
// known to be > x.  Both are taken with respect to lt | eq of the source.
struct GuardBounds {
    VarSet sm;
    VarSet lg;
};

[[nodiscard]] inline GuardBounds guard_bounds(const AugState& s, const TransitionSets& ts) {
    const std::size_t n = s.lt.size();
    GuardBounds b{VarSet(n), VarSet(n)};
    for (std::size_t i = 0; i < n; ++i)
        if (s.lt.row_intersects(i, ts.ge) || s.eq.row_intersects(i, ts.ge)) b.sm.set(i);
    ts.lt.for_each([&](std::size_t j) {
        b.lg |= s.lt.row(j);
        b.lg |= s.eq.row(j);
    });
    return b;
}

namespace detail {

// Closes lt relative to eq.  Returns false if the closure forces some
// variable below itself (which includes lt meeting eq).
inline bool close_order(BitMatrix& lt, const BitMatrix& eq) {
    BitMatrix t = lt;
    t |= eq;
    t.transitive_closure();
    const std::size_t n = lt.size();
    for (std::size_t i = 0; i < n; ++i) {
        VarSet row = lt.row(i);
        bool bad = false;
        row.for_each([&](std::size_t j) {
            if (t.test(j, i)) bad = true;
        });
        if (bad) return false;
    }
    t.subtract(eq);
    lt = std::move(t);
    return true;
}

}  // namespace detail

[[nodiscard]] inline std::optional<AugState> aug_step(const AugState& s, const TransitionSets& ts, int trg) {
    const std::size_t n = s.lt.size();
    GuardBounds b = guard_bounds(s, ts);

    BitMatrix before = s.lt;
    b.sm.for_each([&](std::size_t i) { before.or_row(i, b.lg); });
    if (!detail::close_order(before, s.eq)) return std::nullopt;

    AugState out{trg, BitMatrix(n), BitMatrix(n)};
    VarSet sm_keep = b.sm & ts.keep;
    VarSet lg_keep = b.lg & ts.keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (ts.keep.test(i)) {
            VarSet r = before.row(i) & ts.keep;
            if (sm_keep.test(i)) r |= ts.assign;
            out.lt.or_row(i, r);
            out.eq.or_row(i, s.eq.row(i) & ts.keep);
        } else {
            out.lt.or_row(i, lg_keep);
            out.eq.or_row(i, ts.assign);
        }
    }
    if (!detail::close_order(out.lt, out.eq)) return std::nullopt;
    return out;
}

[[nodiscard]] inline std::optional<AugState> aug_step(const DipAutomaton& a, const AugState& s, int t) {
    if (a.transitions[t].src != s.q) throw PreconditionError("aug_step: transition does not leave the state");
    return aug_step(s, transition_sets(a, a.transitions[t]), a.transitions[t].trg);
}

[[nodiscard]] inline AugState aug_init(const DipAutomaton& a) {
    return {a.init, BitMatrix(a.num_vars()), BitMatrix::identity(a.num_vars())};
}

struct AugTransition {
    int src = 0;
    int trg = 0;
    int base = 0;  // index of the originating base transition
};

inline constexpr std::size_t default_aug_cap = std::size_t{1} << 22;

struct AugAutomaton {
    const DipAutomaton* base = nullptr;  // not owned; must outlive the augmentation
    std::vector<AugState> states;  // states[0] is the initial state
    std::vector<AugTransition> transitions;
    std::vector<std::vector<int>> out;  // outgoing aug transition ids, in base order
    std::vector<TransitionSets> sets;   // per base transition
    SccResult scc;

    [[nodiscard]] int init() const { return 0; }
    [[nodiscard]] bool same_scc(int u, int v) const { return scc.comp[u] == scc.comp[v]; }
    // Both endpoints in one SCC (a self-loop counts).
    [[nodiscard]] bool is_cycle_transition(int at) const {
        return same_scc(transitions[at].src, transitions[at].trg);
    }
    [[nodiscard]] const TransitionSets& sets_of(int at) const { return sets[transitions[at].base]; }
};

[[nodiscard]] inline AugAutomaton build_augmentation(const DipAutomaton& a, std::size_t cap = default_aug_cap) {
    AugAutomaton g;
    g.base = &a;
    for (const auto& t : a.transitions) g.sets.push_back(transition_sets(a, t));
    if (a.states.empty()) {
        g.scc = tarjan_scc(0, {}, [](int, auto&&) {});
        return g;
    }
    auto base_out = a.outgoing();
    std::unordered_map<AugState, int, AugStateHash> index;
    g.states.push_back(aug_init(a));
    index.emplace(g.states[0], 0);
    g.out.emplace_back();
    for (std::size_t cur = 0; cur < g.states.size(); ++cur) {
        for (int t : base_out[g.states[cur].q]) {
            auto next = aug_step(g.states[cur], g.sets[t], a.transitions[t].trg);
            if (!next) continue;
            auto [it, fresh] = index.try_emplace(*next, static_cast<int>(g.states.size()));
            if (fresh) {
                if (g.states.size() >= cap) throw ResourceLimit("augmentation", cap);
                g.states.push_back(std::move(*next));
                g.out.emplace_back();
            }
            g.out[cur].push_back(static_cast<int>(g.transitions.size()));
            g.transitions.push_back({static_cast<int>(cur), it->second, t});
        }
    }
    g.scc = tarjan_scc(static_cast<int>(g.states.size()), {0}, [&](int v, auto&& f) {
        for (int at : g.out[v]) f(g.transitions[at].trg);
    });
    return g;
}

// The augmentation points into its automaton, so a temporary would dangle.
AugAutomaton build_augmentation(DipAutomaton&&, std::size_t = default_aug_cap) = delete;

// Aug runs are sequences of aug transition ids.
[[nodiscard]] inline Run project(const AugAutomaton& g, const std::vector<int>& aug_run) {
    Run r;
    r.reserve(aug_run.size());
    for (int at : aug_run) r.push_back(g.transitions[at].base);
    return r;
}

// The unique aug run from init projecting onto `r`, if r is feasible.
[[nodiscard]] inline std::optional<std::vector<int>> lift(const AugAutomaton& g, const Run& r) {
    std::vector<int> out;
    int s = g.init();
    if (g.states.empty()) return r.empty() ? std::optional(out) : std::nullopt;
    for (int t : r) {
        int hit = -1;
        for (int at : g.out[s])
            if (g.transitions[at].base == t) hit = at;
        if (hit < 0) return std::nullopt;
        out.push_back(hit);
        s = g.transitions[hit].trg;
    }
    return out;
}

// Shortest aug path between two states (BFS, ties by transition order),
// optionally restricted to one SCC.
[[nodiscard]] inline std::optional<std::vector<int>> aug_path(const AugAutomaton& g, int from, int to,
                                                              bool within_scc = false) {
    std::vector<int> parent(g.states.size(), -2);
    parent[from] = -1;
    std::deque<int> q{from};
    while (!q.empty() && parent[to] == -2) {
        int s = q.front();
        q.pop_front();
        for (int at : g.out[s]) {
            int w = g.transitions[at].trg;
            if (parent[w] != -2) continue;
            if (within_scc && !g.same_scc(w, from)) continue;
            parent[w] = at;
            q.push_back(w);
        }
    }
    if (parent[to] == -2) return std::nullopt;
    std::vector<int> path;
    for (int s = to; parent[s] >= 0; s = g.transitions[parent[s]].src) path.push_back(parent[s]);
    std::reverse(path.begin(), path.end());
    return path;
}

[[nodiscard]] inline std::string describe(const DipAutomaton& a, const AugState& s) {
    std::string out = "(" + a.states[s.q].name + ", {";
    bool first = true;
    const std::size_t n = s.lt.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (s.lt.test(i, j)) {
                out += (first ? "" : ",") + a.variables[i] + "<" + a.variables[j];
                first = false;
            }
    out += "}, {";
    first = true;
    std::vector<bool> done(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) continue;
        out += first ? "{" : ",{";
        first = false;
        bool f2 = true;
        for (std::size_t j = 0; j < n; ++j)
            if (s.eq.test(i, j)) {
                out += (f2 ? "" : ",") + a.variables[j];
                f2 = false;
                done[j] = true;
            }
        out += "}";
    }
    return out + "})";
}

// One line per aug transition: src guard trg output assigns.
inline void dump_augmentation(const AugAutomaton& g, std::ostream& os) {
    const auto& a = *g.base;
    for (const auto& at : g.transitions) {
        const auto& t = a.transitions[at.base];
        os << describe(a, g.states[at.src]) << " [" << guard_to_string(a, t.guard) << "] "
           << describe(a, g.states[at.trg]) << " " << output_to_string(t.output) << " {";
        bool first = true;
        for (std::size_t v = 0; v < a.num_vars(); ++v)
            if (t.assign[v]) {
                os << (first ? "" : ",") << a.variables[v];
                first = false;
            }
        os << "}\n";
    }
}

}  // namespace dipa
