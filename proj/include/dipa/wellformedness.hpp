#pragma once

#include "dipa/augmentation.hpp"
#include "dipa/error.hpp"
#include "dipa/scc.hpp"
#include "dipa/violation.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

namespace dipa {

inline constexpr std::size_t default_search_cap = std::size_t{1} << 23;

namespace detail {

// Shortest aug path from init to `state`.
inline std::vector<int> prefix_to(const AugAutomaton& g, int state) {
    auto p = aug_path(g, g.init(), state);
    if (!p) throw PreconditionError("aug state unreachable from init");
    return *p;
}

// Closed walk inside one SCC starting with transition `first` and passing
// through `through` (which may equal `first`).
inline std::vector<int> close_cycle(const AugAutomaton& g, int first, int through) {
    std::vector<int> c{first};
    const int start = g.transitions[first].src;
    if (through != first) {
        auto p = aug_path(g, g.transitions[first].trg, g.transitions[through].src, true);
        c.insert(c.end(), p->begin(), p->end());
        c.push_back(through);
    }
    auto back = aug_path(g, g.transitions[c.back()].trg, start, true);
    c.insert(c.end(), back->begin(), back->end());
    return c;
}

}  // namespace detail

[[nodiscard]] inline std::optional<Violation> find_leaking_cycle(const AugAutomaton& g) {
    const auto& a = *g.base;
    const std::size_t nv = a.num_vars();
    for (std::size_t v = 0; v < nv; ++v) {
        // First intra-SCC assigning and using transitions, per SCC.
        std::vector<int> assigner(g.scc.count, -1), user(g.scc.count, -1);
        for (std::size_t at = 0; at < g.transitions.size(); ++at) {
            if (!g.is_cycle_transition(static_cast<int>(at))) continue;
            int c = g.scc.comp[g.transitions[at].src];
            const auto& ts = g.sets_of(static_cast<int>(at));
            if (ts.assign.test(v) && assigner[c] < 0) assigner[c] = static_cast<int>(at);
            if (ts.used.test(v) && user[c] < 0) user[c] = static_cast<int>(at);
        }
        for (std::size_t at = 0; at < g.transitions.size(); ++at) {
            if (!g.is_cycle_transition(static_cast<int>(at))) continue;
            int c = g.scc.comp[g.transitions[at].src];
            if (assigner[c] != static_cast<int>(at) || user[c] < 0) continue;
            int ta = assigner[c], tu = user[c];
            auto run = detail::prefix_to(g, g.transitions[ta].src);
            const int begin = static_cast<int>(run.size());
            auto cyc = detail::close_cycle(g, ta, tu);
            int use_pos = begin;
            if (tu != ta)
                for (std::size_t i = 0; i < cyc.size(); ++i)
                    if (cyc[i] == tu) {
                        use_pos = begin + static_cast<int>(i);
                        break;
                    }
            run.insert(run.end(), cyc.begin(), cyc.end());
            Violation w;
            w.kind = ViolationKind::leaking_cycle;
            w.run = project(g, run);
            w.cycles = {{begin, static_cast<int>(run.size())}};
            w.positions = {begin, use_pos};
            w.variables = {static_cast<int>(v)};
            return w;
        }
    }
    return std::nullopt;
}

[[nodiscard]] inline std::optional<Violation> find_disclosing_cycle(const AugAutomaton& g) {
    const auto& a = *g.base;
    for (std::size_t at = 0; at < g.transitions.size(); ++at) {
        const auto& tr = a.transitions[g.transitions[at].base];
        if (!a.is_input(tr.src) || !tr.output.is_real() || !g.is_cycle_transition(static_cast<int>(at))) continue;
        auto run = detail::prefix_to(g, g.transitions[at].src);
        const int begin = static_cast<int>(run.size());
        auto cyc = detail::close_cycle(g, static_cast<int>(at), static_cast<int>(at));
        run.insert(run.end(), cyc.begin(), cyc.end());
        Violation w;
        w.kind = ViolationKind::disclosing_cycle;
        w.run = project(g, run);
        w.cycles = {{begin, static_cast<int>(run.size())}};
        w.positions = {begin};
        return w;
    }
    return std::nullopt;
}

namespace detail {

// Search over the augmentation extended with two write-once virtual
// variables ("slots").  A slot is set by one of two events:
//
//   copy   at a node x, for a cycle transition t of the current layer's
//          subgraph (x and t's successor in one SCC), the slot takes the
//          value of some r in largev(t) or smallv(t).  The witness then runs
//          t and returns to x before continuing, so t lies on a repeatable
//          cycle and the slot's value was assigned before that cycle.
//   output a transition that outputs x stores x into the slot.
//
// Slots never take part in guards; they only follow the order relations
// the base automaton induces on them.  A node is
//   (aug state, slot0, slot1, order between the slots, event flags),
// and nodes are grouped into layers by their flags.  Layers are processed
// in flag order so that SCCs of a layer are complete before copy events
// leave it.  Acceptance: both events done and slot0 < slot1 or slot0 = slot1.
class SlotSearch {
public:
    enum class Event : std::uint8_t { copy_large, copy_small, output };

    struct Result {
        std::vector<int> aug_run;
        std::array<Span, 2> cycle{};     // cycle span of a copy event (unused for output)
        std::array<int, 2> position{};   // cycle transition position, or output position
        std::array<int, 2> variable{-1, -1};
    };

    SlotSearch(const AugAutomaton& g, std::array<Event, 2> ev, std::size_t cap) : g_(g), ev_(ev), cap_(cap) {
        const std::size_t nat = g.transitions.size();
        sm_.reserve(nat);
        lg_.reserve(nat);
        for (std::size_t at = 0; at < nat; ++at) {
            auto b = guard_bounds(g.states[g.transitions[at].src], g.sets_of(static_cast<int>(at)));
            sm_.push_back(std::move(b.sm));
            lg_.push_back(std::move(b.lg));
        }
    }

    [[nodiscard]] std::optional<Result> run() {
        if (g_.states.empty()) return std::nullopt;
        Key k0{g_.init(), unset, unset, rel_none, 0};
        if (auto hit = add(k0, {-1, -1, Parent::init, -1, -1})) return witness(*hit);
        for (int layer = 0; layer < 4; ++layer) {
            if (auto hit = explore(layer)) return witness(*hit);
            if (layer == 3) break;
            if (auto hit = copy_events(layer)) return witness(*hit);
        }
        return std::nullopt;
    }

    [[nodiscard]] std::size_t explored() const { return nodes_.size(); }

private:
    static constexpr int unset = -1;
    static constexpr std::uint8_t rel_none = 0, rel_01 = 1, rel_10 = 2, rel_eq = 3;

    // Slot encoding: -1 unset, >= 0 alias of that variable's eq class
    // (always its smallest member), <= -2 detached with bounds index -(s+2).
    struct Key {
        int base;
        int s0;
        int s1;
        std::uint8_t rel;
        std::uint8_t flags;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = static_cast<std::uint32_t>(k.base);
            h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(k.s0);
            h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(k.s1);
            h = h * 0x9e3779b97f4a7c15ULL + (static_cast<std::uint64_t>(k.rel) << 8 | k.flags);
            return static_cast<std::size_t>(h ^ (h >> 29));
        }
    };
    struct Parent {
        enum Kind : std::uint8_t { init, step, output, copy };
        int prev;
        int at;
        Kind kind;
        std::int8_t slot;
        int var;
    };
    struct Bounds {
        VarSet lo, hi;  // variables strictly below / above the slot
        friend bool operator==(const Bounds&, const Bounds&) = default;
    };
    struct BoundsHash {
        std::size_t operator()(const Bounds& b) const { return b.lo.hash() * 31 + b.hi.hash(); }
    };

    const AugAutomaton& g_;
    std::array<Event, 2> ev_;
    std::size_t cap_;
    std::vector<VarSet> sm_, lg_;

    std::vector<Key> nodes_;
    std::vector<Parent> parent_;
    // Intra-layer edges (aug transition, successor) of non-final layers; a
    // node's edges are contiguous in edges_ since it is expanded at once.
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::pair<int, int>> adj_;  // [begin, end) into edges_
    std::vector<int> comp_;                              // layer-local SCC id, -1 if none
    std::array<std::vector<int>, 4> layer_;
    std::unordered_map<Key, int, KeyHash> index_;
    std::vector<Bounds> bounds_;
    std::unordered_map<Bounds, int, BoundsHash> bounds_index_;

    static bool accepting(std::uint8_t rel) { return rel == rel_01 || rel == rel_eq; }

    int intern_bounds(Bounds b) {
        auto [it, fresh] = bounds_index_.try_emplace(b, static_cast<int>(bounds_.size()));
        if (fresh) bounds_.push_back(std::move(b));
        return it->second;
    }

    // (slot <= some x >= r guard, slot > x)
    std::pair<bool, bool> membership(int slot, int at) const {
        if (slot == unset) return {false, false};
        if (slot >= 0) return {sm_[at].test(slot), lg_[at].test(slot)};
        const Bounds& b = bounds_[-(slot + 2)];
        return {b.hi.intersects(sm_[at]), b.lo.intersects(lg_[at])};
    }

    int step_slot(int slot, int at) {
        if (slot == unset) return slot;
        const auto& ts = g_.sets_of(at);
        const AugState& src = g_.states[g_.transitions[at].src];
        auto [in_sm, in_lg] = membership(slot, at);
        Bounds b;
        if (slot >= 0) {
            if (!ts.assign.test(slot)) return slot;
            VarSet cls = src.eq.row(slot) - ts.assign;
            if (cls.any()) return static_cast<int>(cls.first());
            b = {src.lt.col(slot), src.lt.row(slot)};
        } else {
            b = bounds_[-(slot + 2)];
            if (!ts.assign.any() && !in_sm && !in_lg) return slot;
        }
        if (in_sm) b.hi |= lg_[at];
        if (in_lg) b.lo |= sm_[at];
        b.hi.subtract(ts.assign);
        b.lo.subtract(ts.assign);
        if (in_sm) b.hi |= ts.assign;
        if (in_lg) b.lo |= ts.assign;
        return -(intern_bounds(std::move(b)) + 2);
    }

    // Successor of k along aug transition `at`; if `fresh_slot` >= 0 that
    // slot stores the transition's sample.
    Key step(const Key& k, int at, int fresh_slot) {
        Key n{g_.transitions[at].trg, k.s0, k.s1, k.rel, k.flags};
        auto m0 = membership(k.s0, at);
        auto m1 = membership(k.s1, at);
        if (n.rel == rel_none && k.s0 != unset && k.s1 != unset) {
            if (m0.first && m1.second)
                n.rel = rel_01;
            else if (m1.first && m0.second)
                n.rel = rel_10;
        }
        n.s0 = step_slot(k.s0, at);
        n.s1 = step_slot(k.s1, at);
        if (fresh_slot >= 0) {
            const auto& ts = g_.sets_of(at);
            int fresh;
            if (ts.assign.any())
                fresh = static_cast<int>(ts.assign.first());
            else
                fresh = -(intern_bounds({sm_[at], lg_[at]}) + 2);
            const auto& other = fresh_slot == 0 ? m1 : m0;
            const int other_slot = fresh_slot == 0 ? k.s1 : k.s0;
            if (other_slot != unset) {
                // other in sm: other < fresh; other in lg: fresh < other.
                if (other.first) n.rel = fresh_slot == 1 ? rel_01 : rel_10;
                if (other.second) n.rel = fresh_slot == 1 ? rel_10 : rel_01;
            }
            (fresh_slot == 0 ? n.s0 : n.s1) = fresh;
            n.flags |= static_cast<std::uint8_t>(1u << fresh_slot);
        }
        return n;
    }

    Key copy(const Key& k, int slot, int var) {
        const AugState& s = g_.states[k.base];
        Key n = k;
        const int alias = static_cast<int>(s.eq.row(var).first());
        const int other = slot == 0 ? k.s1 : k.s0;
        // rel between other (o) and the copy (c)
        bool o_lt_c = false, c_lt_o = false, same = false;
        if (other >= 0) {
            same = s.eq.test(other, var);
            o_lt_c = s.lt.test(other, var);
            c_lt_o = s.lt.test(var, other);
        } else if (other != unset) {
            const Bounds& b = bounds_[-(other + 2)];
            o_lt_c = b.hi.test(var);
            c_lt_o = b.lo.test(var);
        }
        if (same)
            n.rel = rel_eq;
        else if (o_lt_c)
            n.rel = slot == 1 ? rel_01 : rel_10;
        else if (c_lt_o)
            n.rel = slot == 1 ? rel_10 : rel_01;
        (slot == 0 ? n.s0 : n.s1) = alias;
        n.flags |= static_cast<std::uint8_t>(1u << slot);
        return n;
    }

    // Interns k; returns its id if it is accepting.
    std::optional<int> add(const Key& k, Parent p, int* id_out = nullptr) {
        if (k.flags == 3 && k.rel == rel_10) return std::nullopt;  // order is final
        auto [it, fresh] = index_.try_emplace(k, static_cast<int>(nodes_.size()));
        if (id_out) *id_out = it->second;
        if (!fresh) return std::nullopt;
        if (nodes_.size() >= cap_) throw ResourceLimit("slot search", cap_);
        nodes_.push_back(k);
        parent_.push_back(p);
        adj_.emplace_back(0, 0);
        comp_.push_back(-1);
        layer_[k.flags].push_back(it->second);
        if (k.flags == 3 && accepting(k.rel)) return it->second;
        return std::nullopt;
    }

    std::optional<int> explore(int layer) {
        auto& L = layer_[layer];
        for (std::size_t i = 0; i < L.size(); ++i) {
            const int x = L[i];
            const Key k = nodes_[x];
            adj_[x].first = adj_[x].second = static_cast<int>(edges_.size());
            for (int at : g_.out[k.base]) {
                int y = -1;
                if (auto hit = add(step(k, at, -1), {x, at, Parent::step, -1, -1}, &y)) return hit;
                if (layer != 3 && y >= 0 && nodes_[y].flags == layer) {
                    edges_.emplace_back(at, y);
                    adj_[x].second = static_cast<int>(edges_.size());
                }
                if (g_.base->transitions[g_.transitions[at].base].output.kind != Output::Kind::real_sample) continue;
                for (int s = 0; s < 2; ++s) {
                    if (ev_[s] != Event::output || (k.flags >> s) & 1) continue;
                    if (auto hit = add(step(k, at, s), {x, at, Parent::output, static_cast<std::int8_t>(s), -1}))
                        return hit;
                }
            }
        }
        return std::nullopt;
    }

    std::optional<int> copy_events(int layer) {
        const auto& L = layer_[layer];
        if (L.empty()) return std::nullopt;
        std::unordered_map<int, int> local;
        local.reserve(L.size() * 2);
        std::vector<int> roots(L.size());
        for (std::size_t i = 0; i < L.size(); ++i) {
            local.emplace(L[i], static_cast<int>(i));
            roots[i] = static_cast<int>(i);
        }
        auto scc = tarjan_scc(static_cast<int>(L.size()), roots, [&](int v, auto&& f) {
            for (int e = adj_[L[v]].first; e < adj_[L[v]].second; ++e) f(local.at(edges_[e].second));
        });
        for (std::size_t i = 0; i < L.size(); ++i) comp_[L[i]] = scc.comp[i];

        for (std::size_t i = 0; i < L.size(); ++i) {
            const int x = L[i];
            const Key k = nodes_[x];
            for (int e = adj_[x].first; e < adj_[x].second; ++e) {
                auto [at, y] = edges_[e];
                if (comp_[y] != comp_[x]) continue;
                const auto& ts = g_.sets_of(at);
                for (int s = 0; s < 2; ++s) {
                    if (ev_[s] == Event::output || (k.flags >> s) & 1) continue;
                    const VarSet& vars = ev_[s] == Event::copy_large ? ts.lt : ts.ge;
                    std::optional<int> hit;
                    vars.for_each([&](std::size_t r) {
                        if (hit) return;
                        hit = add(copy(k, s, static_cast<int>(r)),
                                  {x, at, Parent::copy, static_cast<std::int8_t>(s), static_cast<int>(r)});
                    });
                    if (hit) return hit;
                }
            }
        }
        return std::nullopt;
    }

    // Shortest path y -> x inside x's layer SCC.
    std::vector<int> intra_path(int y, int x) const {
        std::unordered_map<int, std::pair<int, int>> par;  // node -> (prev, at)
        std::deque<int> q{y};
        par[y] = {-1, -1};
        while (!q.empty() && !par.count(x)) {
            int u = q.front();
            q.pop_front();
            for (int e = adj_[u].first; e < adj_[u].second; ++e) {
                auto [at, w] = edges_[e];
                if (comp_[w] != comp_[x] || par.count(w)) continue;
                par[w] = {u, at};
                q.push_back(w);
            }
        }
        std::vector<int> path;
        for (int u = x; par.at(u).first >= 0; u = par.at(u).first) path.push_back(par.at(u).second);
        std::reverse(path.begin(), path.end());
        return path;
    }

    Result witness(int z) const {
        std::vector<int> chain;
        for (int u = z; parent_[u].kind != Parent::init; u = parent_[u].prev) chain.push_back(u);
        std::reverse(chain.begin(), chain.end());
        Result r;
        for (int u : chain) {
            const Parent& p = parent_[u];
            if (p.kind == Parent::copy) {
                const int begin = static_cast<int>(r.aug_run.size());
                r.aug_run.push_back(p.at);
                int y = -1;
                for (int e = adj_[p.prev].first; e < adj_[p.prev].second; ++e)
                    if (edges_[e].first == p.at) y = edges_[e].second;
                auto back = intra_path(y, p.prev);
                r.aug_run.insert(r.aug_run.end(), back.begin(), back.end());
                r.cycle[p.slot] = {begin, static_cast<int>(r.aug_run.size())};
                r.position[p.slot] = begin;
                r.variable[p.slot] = p.var;
            } else {
                if (p.kind == Parent::output) r.position[p.slot] = static_cast<int>(r.aug_run.size());
                r.aug_run.push_back(p.at);
            }
        }
        return r;
    }
};

}  // namespace detail

[[nodiscard]] inline std::optional<Violation> find_leaking_pair(const AugAutomaton& g,
                                                                std::size_t cap = default_search_cap) {
    using E = detail::SlotSearch::Event;
    detail::SlotSearch search(g, {E::copy_large, E::copy_small}, cap);
    auto r = search.run();
    if (!r) return std::nullopt;
    Violation w;
    w.kind = ViolationKind::leaking_pair;
    w.run = project(g, r->aug_run);
    w.cycles = {r->cycle[0], r->cycle[1]};
    w.positions = {r->position[0], r->position[1]};
    w.variables = {r->variable[0], r->variable[1]};
    return w;
}

[[nodiscard]] inline std::optional<Violation> find_privacy_violating_path(const AugAutomaton& g,
                                                                          std::size_t cap = default_search_cap) {
    using E = detail::SlotSearch::Event;
    {
        // (a): x output at k1 lies below a value tested with x >= r on a cycle.
        detail::SlotSearch search(g, {E::output, E::copy_small}, cap);
        if (auto r = search.run()) {
            Violation w;
            w.kind = ViolationKind::privacy_violating_path;
            w.pv_case = 'a';
            w.run = project(g, r->aug_run);
            w.cycles = {r->cycle[1]};
            w.positions = {r->position[0], r->position[1]};
            w.variables = {r->variable[1]};
            return w;
        }
    }
    // (b): a value tested with x < r on a cycle lies below the x output at km.
    detail::SlotSearch search(g, {E::copy_large, E::output}, cap);
    if (auto r = search.run()) {
        Violation w;
        w.kind = ViolationKind::privacy_violating_path;
        w.pv_case = 'b';
        w.run = project(g, r->aug_run);
        w.cycles = {r->cycle[0]};
        w.positions = {r->position[0], r->position[1]};
        w.variables = {r->variable[0]};
        return w;
    }
    return std::nullopt;
}

struct CheckCaps {
    std::size_t aug = default_aug_cap;
    std::size_t search = default_search_cap;
};

// Leaking cycle, disclosing cycle, leaking pair, privacy violating path, in
// that order; nullopt means well-formed.  The later checks rely on the
// earlier ones having found nothing (their cycles are then non-leaking).
[[nodiscard]] inline std::optional<Violation> check_well_formed(const AugAutomaton& g,
                                                                std::size_t search_cap = default_search_cap) {
    if (auto v = find_leaking_cycle(g)) return v;
    if (auto v = find_disclosing_cycle(g)) return v;
    if (auto v = find_leaking_pair(g, search_cap)) return v;
    return find_privacy_violating_path(g, search_cap);
}

[[nodiscard]] inline std::optional<Violation> check_well_formed(const DipAutomaton& a, CheckCaps caps = {}) {
    auto g = build_augmentation(a, caps.aug);
    return check_well_formed(g, caps.search);
}

}  // namespace dipa
