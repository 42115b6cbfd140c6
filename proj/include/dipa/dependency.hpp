#pragma once

#include "dipa/model.hpp"
#include "dipa/violation.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <type_traits>
#include <utility>
#include <vector>

namespace dipa {

[[nodiscard]] inline bool is_contiguous(const DipAutomaton& a, const Run& r) {
    for (std::size_t i = 1; i < r.size(); ++i)
        if (a.transitions[r[i - 1]].trg != a.transitions[r[i]].src) return false;
    return true;
}

[[nodiscard]] inline bool starts_at_init(const DipAutomaton& a, const Run& r) {
    return r.empty() || a.transitions[r.front()].src == a.init;
}

// max { i < j : v assigned by r[i] }, or nullopt.
[[nodiscard]] inline std::optional<int> lastassign(const DipAutomaton& a, const Run& r, int v, int j) {
    for (int i = std::min<int>(j, static_cast<int>(r.size())) - 1; i >= 0; --i)
        if (a.transitions[r[i]].assign[v]) return i;
    return std::nullopt;
}

struct DependencyGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // sorted, unique
    std::vector<std::vector<int>> succ;

    [[nodiscard]] bool has_edge(int i, int j) const {
        return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
    }

    // reach[i][j] is true iff there is a path of length >= 1 from i to j.
    [[nodiscard]] std::vector<std::vector<bool>> reachability() const {
        std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
        for (int s = 0; s < n; ++s) {
            std::vector<int> stack(succ[s].begin(), succ[s].end());
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                if (reach[s][u]) continue;
                reach[s][u] = true;
                for (int w : succ[u])
                    if (!reach[s][w]) stack.push_back(w);
            }
        }
        return reach;
    }
};

[[nodiscard]] inline DependencyGraph build_dependency_graph(const DipAutomaton& a, const Run& r) {
    DependencyGraph g;
    g.n = static_cast<int>(r.size());
    g.succ.resize(r.size());
    const int nv = static_cast<int>(a.num_vars());
    // last[v] tracks lastassign(v, j) while scanning j forward.
    std::vector<int> last(nv, -1);
    for (int j = 0; j < g.n; ++j) {
        const auto& t = a.transitions[r[j]];
        for (const auto& at : t.guard.atoms) {
            int la = last[at.var];
            if (la < 0) continue;
            if (at.rel == Rel::lt)
                g.edges.emplace_back(j, la);
            else
                g.edges.emplace_back(la, j);
        }
        for (int v = 0; v < nv; ++v)
            if (t.assign[v]) last[v] = j;
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    for (auto [i, j] : g.edges) g.succ[i].push_back(j);
    return g;
}

[[nodiscard]] inline bool is_acyclic(const DependencyGraph& g) {
    std::vector<int> indeg(g.n, 0);
    for (auto [i, j] : g.edges) ++indeg[j];
    std::vector<int> ready;
    for (int i = 0; i < g.n; ++i)
        if (!indeg[i]) ready.push_back(i);
    int seen = 0;
    while (!ready.empty()) {
        int u = ready.back();
        ready.pop_back();
        ++seen;
        for (int w : g.succ[u])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    return seen == g.n;
}

[[nodiscard]] inline bool is_feasible(const DipAutomaton& a, const Run& r) {
    return is_acyclic(build_dependency_graph(a, r));
}

// Visits every run from init of length <= max_len in lexicographic order of
// transition indices (a prefix precedes its extensions).  The callback may
// return false to stop.  With feasible_only, infeasible runs and all their
// extensions are skipped (extensions of an infeasible run stay infeasible).
template <class F>
void for_each_run(const DipAutomaton& a, int max_len, bool feasible_only, F&& visit) {
    if (a.states.empty()) {
        visit(Run{});
        return;
    }
    auto out = a.outgoing();
    Run cur;
    bool stop = false;
    std::function<void()> rec = [&] {
        if constexpr (std::is_same_v<std::invoke_result_t<F, const Run&>, bool>) {
            if (!visit(static_cast<const Run&>(cur))) {
                stop = true;
                return;
            }
        } else {
            visit(static_cast<const Run&>(cur));
        }
        if (static_cast<int>(cur.size()) >= max_len) return;
        int q = cur.empty() ? a.init : a.transitions[cur.back()].trg;
        for (int t : out[q]) {
            cur.push_back(t);
            if (!feasible_only || is_feasible(a, cur)) rec();
            cur.pop_back();
            if (stop) return;
        }
    };
    rec();
}

[[nodiscard]] inline std::vector<Run> enumerate_runs(const DipAutomaton& a, int max_len, bool feasible_only) {
    std::vector<Run> runs;
    for_each_run(a, max_len, feasible_only, [&](const Run& r) { runs.push_back(r); });
    return runs;
}

// ---------------------------------------------------------------------------
// Definitional checks on explicit runs.

[[nodiscard]] inline bool is_cycle(const DipAutomaton& a, const Run& r, Span s) {
    if (s.begin < 0 || s.end > static_cast<int>(r.size()) || s.begin >= s.end) return false;
    return a.transitions[r[s.begin]].src == a.transitions[r[s.end - 1]].trg;
}

[[nodiscard]] inline Run slice(const Run& r, Span s) { return Run(r.begin() + s.begin, r.begin() + s.end); }

// C is a cycle and no variable used anywhere in C^2 has a lastassign inside
// C^2.
[[nodiscard]] inline bool is_non_leaking_cycle(const DipAutomaton& a, const Run& c) {
    if (c.empty()) return false;
    if (a.transitions[c.front()].src != a.transitions[c.back()].trg) return false;
    Run c2 = c;
    c2.insert(c2.end(), c.begin(), c.end());
    for (int i = 0; i < static_cast<int>(c2.size()); ++i)
        for (const auto& at : a.transitions[c2[i]].guard.atoms)
            if (lastassign(a, c2, at.var, i)) return false;
    return true;
}

[[nodiscard]] inline Run repeat_cycle(const Run& r, Span c, int times) {
    Run out(r.begin(), r.begin() + c.end);
    for (int m = 0; m < times; ++m) out.insert(out.end(), r.begin() + c.begin, r.begin() + c.end);
    out.insert(out.end(), r.begin() + c.end, r.end());
    return out;
}

[[nodiscard]] inline int default_repeat_bound(const DipAutomaton& a) {
    return 2 * static_cast<int>(a.num_vars()) + 2;
}

namespace detail {

// All four definitions applied literally to one feasible run from init.
// Appends at most one witness per kind.
inline void brute_force_run(const DipAutomaton& a, const Run& r, int repeat_bound, std::vector<Violation>& out) {
    const int n = static_cast<int>(r.size());
    if (n == 0) return;
    auto g = build_dependency_graph(a, r);
    auto reach = g.reachability();
    auto reaches = [&](int u, int w) { return u == w || reach[u][w]; };

    std::vector<Span> nl_spans;  // non-leaking cycle spans
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j <= n; ++j)
            if (is_cycle(a, r, {i, j}) && is_non_leaking_cycle(a, slice(r, {i, j}))) nl_spans.push_back({i, j});

    // Leaking cycle: suffix C = r[j:], some variable assigned and used in C,
    // r C^m feasible for m <= repeat_bound.
    for (int j = 0; j < n; ++j) {
        Span c{j, n};
        if (!is_cycle(a, r, c)) continue;
        std::optional<std::pair<int, int>> pos;
        int var = -1;
        for (int i1 = j; i1 < n && !pos; ++i1)
            for (int i2 = j; i2 < n && !pos; ++i2)
                for (const auto& at : a.transitions[r[i2]].guard.atoms)
                    if (a.transitions[r[i1]].assign[at.var]) {
                        pos = {i1, i2};
                        var = at.var;
                        break;
                    }
        if (!pos) continue;
        bool repeatable = true;
        for (int m = 1; m <= repeat_bound && repeatable; ++m) repeatable = is_feasible(a, repeat_cycle(r, c, m));
        if (!repeatable) continue;
        out.push_back({ViolationKind::leaking_cycle, r, {c}, {pos->first, pos->second}, {var}, 0});
        break;
    }

    // Disclosing cycle: non-leaking suffix cycle containing an input
    // transition that outputs a real value.
    for (int j = 0; j < n; ++j) {
        Span c{j, n};
        if (!is_cycle(a, r, c) || !is_non_leaking_cycle(a, slice(r, c))) continue;
        int hit = -1;
        for (int i = j; i < n && hit < 0; ++i)
            if (a.is_input_transition(r[i]) && a.transitions[r[i]].output.is_real()) hit = i;
        if (hit < 0) continue;
        out.push_back({ViolationKind::disclosing_cycle, r, {c}, {hit}, {}, 0});
        break;
    }

    auto var_of_edge = [&](int from, int to) {
        // The variable justifying dependency edge (from, to).
        if (from > to) {
            for (const auto& at : a.transitions[r[from]].guard.atoms)
                if (at.rel == Rel::lt && lastassign(a, r, at.var, from) == to) return at.var;
        } else {
            for (const auto& at : a.transitions[r[to]].guard.atoms)
                if (at.rel == Rel::ge && lastassign(a, r, at.var, to) == from) return at.var;
        }
        return -1;
    };

    // Leaking pair: edges (k1, k2) with k2 < k1 and (p, km) with p < km,
    // k2 reaches p, k1 and km on disjoint non-leaking cycles.
    bool found = false;
    for (auto [k1, k2] : g.edges) {
        if (k2 >= k1 || found) continue;
        for (auto [p, km] : g.edges) {
            if (p >= km || !reaches(k2, p) || found) continue;
            for (const auto& s1 : nl_spans) {
                if (!s1.contains(k1) || found) continue;
                for (const auto& s2 : nl_spans) {
                    if (!s2.contains(km)) continue;
                    if (!(s1.end <= s2.begin || s2.end <= s1.begin)) continue;
                    out.push_back({ViolationKind::leaking_pair, r, {s1, s2}, {k1, km},
                                   {var_of_edge(k1, k2), var_of_edge(p, km)}, 0});
                    found = true;
                    break;
                }
            }
        }
    }

    // Privacy violating path.
    found = false;
    for (auto [p, km] : g.edges) {  // case (a)
        if (p >= km || found) continue;
        for (const auto& s : nl_spans) {
            if (!s.contains(km) || found) continue;
            for (int k1 = 0; k1 < n; ++k1)
                if (a.transitions[r[k1]].output.kind == Output::Kind::real_sample && reaches(k1, p)) {
                    out.push_back({ViolationKind::privacy_violating_path, r, {s}, {k1, km}, {var_of_edge(p, km)}, 'a'});
                    found = true;
                    break;
                }
        }
    }
    for (auto [k1, k2] : g.edges) {  // case (b)
        if (k2 >= k1 || found) continue;
        for (const auto& s : nl_spans) {
            if (!s.contains(k1) || found) continue;
            for (int km = 0; km < n; ++km)
                if (a.transitions[r[km]].output.kind == Output::Kind::real_sample && reaches(k2, km)) {
                    out.push_back({ViolationKind::privacy_violating_path, r, {s}, {k1, km}, {var_of_edge(k1, k2)}, 'b'});
                    found = true;
                    break;
                }
        }
    }
}

}  // namespace detail

// Literal, bounded check of the four violation definitions over every
// feasible run from init of length <= run_bound.  Used as a test oracle for
// the efficient checks.
[[nodiscard]] inline std::vector<Violation> brute_force_wellformedness(const DipAutomaton& a, int run_bound,
                                                                       int repeat_bound) {
    if (run_bound < 1 || repeat_bound < 1) throw PreconditionError("bounds must be >= 1");
    std::vector<Violation> out;
    for_each_run(a, run_bound, true, [&](const Run& r) { detail::brute_force_run(a, r, repeat_bound, out); });
    return out;
}

[[nodiscard]] inline std::vector<Violation> brute_force_wellformedness(const DipAutomaton& a, int run_bound) {
    return brute_force_wellformedness(a, run_bound, default_repeat_bound(a));
}

}  // namespace dipa
