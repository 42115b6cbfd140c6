#pragma once

#include "dipa/bits.hpp"
#include "dipa/error.hpp"
#include "dipa/rational.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace dipa {

enum class StateKind { input, noninput };

struct StateParams {
    Rational d{0};
    Rational mu{0};
    Rational d_prime{0};
    Rational mu_prime{0};
    friend bool operator==(const StateParams&, const StateParams&) = default;
};

struct State {
    std::string name;
    StateKind kind = StateKind::input;
    StateParams params;
    friend bool operator==(const State&, const State&) = default;
};

// GE encodes x >= var, LT encodes x < var.
enum class Rel { ge, lt };

struct GuardAtom {
    int var = 0;
    Rel rel = Rel::ge;
    friend bool operator==(const GuardAtom&, const GuardAtom&) = default;
    friend auto operator<=>(const GuardAtom& a, const GuardAtom& b) {
        if (a.var != b.var) return a.var <=> b.var;
        return static_cast<int>(a.rel) <=> static_cast<int>(b.rel);
    }
};

// Conjunction of atoms, kept sorted by variable.  No atoms means true.
struct Guard {
    std::vector<GuardAtom> atoms;
    [[nodiscard]] bool is_true() const { return atoms.empty(); }
    friend bool operator==(const Guard&, const Guard&) = default;
};

struct Output {
    enum class Kind { symbol, real_sample, real_fresh_sample };
    Kind kind = Kind::symbol;
    std::string symbol;

    static Output sym(std::string s) { return {Kind::symbol, std::move(s)}; }
    static Output sample() { return {Kind::real_sample, {}}; }
    static Output fresh_sample() { return {Kind::real_fresh_sample, {}}; }

    [[nodiscard]] bool is_real() const { return kind != Kind::symbol; }
    friend bool operator==(const Output&, const Output&) = default;
};

struct Transition {
    int src = 0;
    int trg = 0;
    Guard guard;
    Output output;
    std::vector<bool> assign;
    friend bool operator==(const Transition&, const Transition&) = default;
};

struct DipAutomaton {
    std::vector<State> states;
    std::vector<std::string> variables;
    std::vector<std::string> alphabet;  // sorted, unique
    int init = 0;
    std::vector<Transition> transitions;

    [[nodiscard]] std::size_t num_vars() const { return variables.size(); }
    [[nodiscard]] bool is_input(int q) const { return states[q].kind == StateKind::input; }
    [[nodiscard]] bool is_input_transition(int t) const { return is_input(transitions[t].src); }
    [[nodiscard]] const StateParams& params_of(int t) const { return states[transitions[t].src].params; }

    [[nodiscard]] std::optional<int> state_index(std::string_view name) const {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i].name == name) return static_cast<int>(i);
        return std::nullopt;
    }
    [[nodiscard]] std::optional<int> var_index(std::string_view name) const {
        for (std::size_t i = 0; i < variables.size(); ++i)
            if (variables[i] == name) return static_cast<int>(i);
        return std::nullopt;
    }

    // Outgoing transition indices per state, in transition order.
    [[nodiscard]] std::vector<std::vector<int>> outgoing() const {
        std::vector<std::vector<int>> out(states.size());
        for (std::size_t t = 0; t < transitions.size(); ++t) {
            int s = transitions[t].src;
            if (s >= 0 && static_cast<std::size_t>(s) < states.size()) out[s].push_back(static_cast<int>(t));
        }
        return out;
    }

    friend bool operator==(const DipAutomaton&, const DipAutomaton&) = default;
};

// ---------------------------------------------------------------------------
// Derived variable sets of a transition.

[[nodiscard]] inline VarSet smallv(const DipAutomaton& a, const Transition& t) {
    VarSet s(a.num_vars());
    for (const auto& at : t.guard.atoms)
        if (at.rel == Rel::ge) s.set(at.var);
    return s;
}
[[nodiscard]] inline VarSet largev(const DipAutomaton& a, const Transition& t) {
    VarSet s(a.num_vars());
    for (const auto& at : t.guard.atoms)
        if (at.rel == Rel::lt) s.set(at.var);
    return s;
}
[[nodiscard]] inline VarSet usedv(const DipAutomaton& a, const Transition& t) {
    VarSet s(a.num_vars());
    for (const auto& at : t.guard.atoms) s.set(at.var);
    return s;
}
[[nodiscard]] inline VarSet assignv(const DipAutomaton& a, const Transition& t) {
    VarSet s(a.num_vars());
    for (std::size_t i = 0; i < t.assign.size() && i < a.num_vars(); ++i)
        if (t.assign[i]) s.set(i);
    return s;
}
[[nodiscard]] inline VarSet nonassignv(const DipAutomaton& a, const Transition& t) {
    VarSet s(a.num_vars());
    s.fill();
    return s.subtract(assignv(a, t));
}

// ---------------------------------------------------------------------------
// Text forms shared by the builder and the file format.

[[nodiscard]] inline std::string guard_to_string(const DipAutomaton& a, const Guard& g) {
    if (g.is_true()) return "true";
    std::string s;
    for (std::size_t i = 0; i < g.atoms.size(); ++i) {
        if (i) s += " && ";
        s += g.atoms[i].rel == Rel::ge ? "x >= " : "x < ";
        s += a.variables[g.atoms[i].var];
    }
    return s;
}

[[nodiscard]] inline std::string output_to_string(const Output& o) {
    switch (o.kind) {
        case Output::Kind::real_sample: return "insample";
        case Output::Kind::real_fresh_sample: return "insample'";
        case Output::Kind::symbol: break;
    }
    return "@" + o.symbol;
}

namespace detail {
inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}
inline bool is_ident(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '[' || c == ']' || c == '.';
    });
}
}  // namespace detail

// Parses "true" or "x >= r1 && x < r2".  Throws InvalidInput naming the
// offending piece.
[[nodiscard]] inline Guard parse_guard(std::string_view text, const std::vector<std::string>& vars) {
    Guard g;
    text = detail::trim(text);
    if (text.empty() || text == "true") return g;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t amp = text.find("&&", pos);
        std::string_view atom = detail::trim(text.substr(pos, amp == std::string_view::npos ? amp : amp - pos));
        if (atom.size() < 2 || atom[0] != 'x')
            throw InvalidInput("malformed guard atom '" + std::string(atom) + "'");
        std::string_view rest = detail::trim(atom.substr(1));
        Rel rel;
        if (rest.substr(0, 2) == ">=") {
            rel = Rel::ge;
            rest.remove_prefix(2);
        } else if (rest.substr(0, 1) == "<" && rest.substr(0, 2) != "<=") {
            rel = Rel::lt;
            rest.remove_prefix(1);
        } else {
            throw InvalidInput("malformed guard atom '" + std::string(atom) + "' (only >= and < are supported)");
        }
        rest = detail::trim(rest);
        auto it = std::find(vars.begin(), vars.end(), rest);
        if (it == vars.end()) throw InvalidInput("unknown variable '" + std::string(rest) + "' in guard");
        g.atoms.push_back({static_cast<int>(it - vars.begin()), rel});
        if (amp == std::string_view::npos) break;
        pos = amp + 2;
    }
    std::sort(g.atoms.begin(), g.atoms.end());
    return g;
}

[[nodiscard]] inline Output parse_output(std::string_view text) {
    text = detail::trim(text);
    if (text == "insample") return Output::sample();
    if (text == "insample'") return Output::fresh_sample();
    if (text.size() >= 2 && text[0] == '@' && detail::is_ident(text.substr(1)))
        return Output::sym(std::string(text.substr(1)));
    throw InvalidInput("malformed output '" + std::string(text) + "'");
}

// Incremental construction by name; used by the corpus and by tests.
class Builder {
public:
    Builder& vars(std::vector<std::string> names) {
        a_.variables = std::move(names);
        return *this;
    }
    Builder& state(std::string name, StateKind kind, Rational d, Rational mu, Rational dp = 0, Rational mup = 0) {
        a_.states.push_back({std::move(name), kind, {d, mu, dp, mup}});
        return *this;
    }
    Builder& input(std::string name, Rational d, Rational mu, Rational dp = 0, Rational mup = 0) {
        return state(std::move(name), StateKind::input, d, mu, dp, mup);
    }
    Builder& noninput(std::string name, Rational d, Rational mu, Rational dp = 0, Rational mup = 0) {
        return state(std::move(name), StateKind::noninput, d, mu, dp, mup);
    }
    Builder& init(std::string_view name) {
        init_name_ = std::string(name);
        return *this;
    }
    Builder& trans(std::string_view src, std::string_view trg, std::string_view guard, std::string_view out,
                   const std::vector<std::string>& assigns = {}) {
        pending_.push_back({std::string(src), std::string(trg), std::string(guard), std::string(out), assigns});
        return *this;
    }

    [[nodiscard]] DipAutomaton build() const {
        DipAutomaton a = a_;
        auto idx = [&](const std::string& n) {
            auto i = a.state_index(n);
            if (!i) throw InvalidInput("unknown state '" + n + "'");
            return *i;
        };
        std::set<std::string> alpha;
        for (const auto& p : pending_) {
            Transition t;
            t.src = idx(p.src);
            t.trg = idx(p.trg);
            t.guard = parse_guard(p.guard, a.variables);
            t.output = parse_output(p.out);
            if (t.output.kind == Output::Kind::symbol) alpha.insert(t.output.symbol);
            t.assign.assign(a.variables.size(), false);
            for (const auto& v : p.assigns) {
                auto vi = a.var_index(v);
                if (!vi) throw InvalidInput("unknown variable '" + v + "' in assignment");
                t.assign[*vi] = true;
            }
            a.transitions.push_back(std::move(t));
        }
        a.alphabet.assign(alpha.begin(), alpha.end());
        a.init = init_name_.empty() ? 0 : idx(init_name_);
        return a;
    }

private:
    struct Pending {
        std::string src, trg, guard, out;
        std::vector<std::string> assigns;
    };
    DipAutomaton a_;
    std::string init_name_;
    std::vector<Pending> pending_;
};

// ---------------------------------------------------------------------------
// Structural validation.

struct StructuralError {
    std::string rule;
    std::string message;
    friend bool operator==(const StructuralError&, const StructuralError&) = default;
};

[[nodiscard]] inline bool guards_contradictory(const Guard& g1, const Guard& g2) {
    for (const auto& x : g1.atoms)
        for (const auto& y : g2.atoms)
            if (x.var == y.var && x.rel != y.rel) return true;
    return false;
}

[[nodiscard]] inline std::vector<StructuralError> validate(const DipAutomaton& a) {
    std::vector<StructuralError> errs;
    const auto ns = static_cast<int>(a.states.size());
    const auto nv = static_cast<int>(a.num_vars());
    auto tname = [&](std::size_t t) {
        const auto& tr = a.transitions[t];
        auto nm = [&](int q) { return q >= 0 && q < ns ? a.states[q].name : std::string("?"); };
        return "transition " + std::to_string(t) + " (" + nm(tr.src) + " -> " + nm(tr.trg) + ")";
    };

    if (ns > 0 && (a.init < 0 || a.init >= ns)) errs.push_back({"reference", "init state out of range"});
    if (ns == 0 && !a.transitions.empty()) errs.push_back({"reference", "transitions without states"});

    std::set<std::string> names;
    for (const auto& s : a.states) {
        if (!names.insert(s.name).second) errs.push_back({"reference", "duplicate state '" + s.name + "'"});
        if (s.params.d < 0) errs.push_back({"params", "state '" + s.name + "' has negative d"});
        if (s.params.d_prime < 0) errs.push_back({"params", "state '" + s.name + "' has negative d'"});
    }
    std::set<std::string> vnames;
    for (const auto& v : a.variables)
        if (!vnames.insert(v).second) errs.push_back({"reference", "duplicate variable '" + v + "'"});

    bool refs_ok = true;
    for (std::size_t t = 0; t < a.transitions.size(); ++t) {
        const auto& tr = a.transitions[t];
        if (tr.src < 0 || tr.src >= ns || tr.trg < 0 || tr.trg >= ns) {
            errs.push_back({"reference", tname(t) + " references an unknown state"});
            refs_ok = false;
            continue;
        }
        if (static_cast<int>(tr.assign.size()) != nv)
            errs.push_back({"reference", tname(t) + " assignment vector has wrong arity"});
        std::vector<int> seen(static_cast<std::size_t>(nv), 0);
        for (const auto& at : tr.guard.atoms) {
            if (at.var < 0 || at.var >= nv) {
                errs.push_back({"reference", tname(t) + " guard references an unknown variable"});
                continue;
            }
            if (seen[at.var]++) errs.push_back({"guard", tname(t) + " has two atoms on variable '" + a.variables[at.var] + "'"});
        }
        if (tr.output.kind == Output::Kind::symbol &&
            !std::binary_search(a.alphabet.begin(), a.alphabet.end(), tr.output.symbol))
            errs.push_back({"reference", tname(t) + " outputs symbol '" + tr.output.symbol + "' outside the alphabet"});
    }
    if (!refs_ok) return errs;

    auto out = a.outgoing();
    for (int q = 0; q < ns; ++q) {
        const auto& ts = out[q];
        if (a.states[q].kind == StateKind::noninput) {
            if (ts.size() > 1)
                errs.push_back({"non-input", "non-input state '" + a.states[q].name + "' has " +
                                                 std::to_string(ts.size()) + " outgoing transitions"});
            for (int t : ts)
                if (!a.transitions[t].guard.is_true())
                    errs.push_back({"non-input", tname(t) + " leaves a non-input state with a non-true guard"});
        }
        for (std::size_t i = 0; i < ts.size(); ++i)
            for (std::size_t j = i + 1; j < ts.size(); ++j)
                if (!guards_contradictory(a.transitions[ts[i]].guard, a.transitions[ts[j]].guard))
                    errs.push_back({"determinism", "state '" + a.states[q].name + "': " + tname(ts[i]) + " and " +
                                                       tname(ts[j]) + " can be enabled together"});
    }
    return errs;
}

// A run from init on which `var` is used by the last transition without a
// prior assignment.
struct UninitializedUse {
    std::vector<int> run;
    int var = 0;
};

// Forward must-assign dataflow; on failure returns a shortest witness.
[[nodiscard]] inline std::optional<UninitializedUse> check_initialized(const DipAutomaton& a) {
    const std::size_t ns = a.states.size();
    const std::size_t nv = a.num_vars();
    if (ns == 0 || nv == 0) return std::nullopt;
    auto out = a.outgoing();

    // must[q] = variables assigned on every run reaching q; unreached states
    // start at the full set (the meet identity).
    std::vector<VarSet> must(ns, VarSet(nv));
    std::vector<bool> reached(ns, false);
    for (auto& m : must) m.fill();
    must[a.init].clear();
    reached[a.init] = true;
    std::deque<int> work{a.init};
    std::vector<bool> queued(ns, false);
    queued[a.init] = true;
    while (!work.empty()) {
        int q = work.front();
        work.pop_front();
        queued[q] = false;
        for (int t : out[q]) {
            const auto& tr = a.transitions[t];
            VarSet flow = must[q] | assignv(a, tr);
            VarSet next = reached[tr.trg] ? (must[tr.trg] & flow) : flow;
            if (!reached[tr.trg] || !(next == must[tr.trg])) {
                reached[tr.trg] = true;
                must[tr.trg] = std::move(next);
                if (!queued[tr.trg]) {
                    queued[tr.trg] = true;
                    work.push_back(tr.trg);
                }
            }
        }
    }

    bool bad = false;
    for (std::size_t t = 0; t < a.transitions.size() && !bad; ++t) {
        const auto& tr = a.transitions[t];
        if (reached[tr.src] && !usedv(a, tr).subset_of(must[tr.src])) bad = true;
    }
    if (!bad) return std::nullopt;

    // Shortest witness: per variable, BFS over transitions that do not assign
    // it, stopping at the first transition that uses it.
    std::optional<UninitializedUse> best;
    for (std::size_t v = 0; v < nv; ++v) {
        std::vector<int> parent(ns, -2);
        parent[a.init] = -1;
        std::deque<int> q{a.init};
        std::optional<std::pair<int, int>> hit;  // (state, transition)
        while (!q.empty() && !hit) {
            int s = q.front();
            q.pop_front();
            for (int t : out[s]) {
                const auto& tr = a.transitions[t];
                if (usedv(a, tr).test(v)) {
                    hit = {s, t};
                    break;
                }
                if (tr.assign[v] || parent[tr.trg] != -2) continue;
                parent[tr.trg] = t;
                q.push_back(tr.trg);
            }
        }
        if (!hit) continue;
        std::vector<int> run{hit->second};
        for (int s = hit->first; parent[s] >= 0; s = a.transitions[parent[s]].src) run.push_back(parent[s]);
        std::reverse(run.begin(), run.end());
        if (!best || run.size() < best->run.size()) best = UninitializedUse{std::move(run), static_cast<int>(v)};
    }
    return best;
}

[[nodiscard]] inline bool check_output_distinct(const DipAutomaton& a) {
    auto out = a.outgoing();
    for (const auto& ts : out) {
        int reals = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto& oi = a.transitions[ts[i]].output;
            if (oi.is_real()) ++reals;
            for (std::size_t j = i + 1; j < ts.size(); ++j)
                if (oi == a.transitions[ts[j]].output) return false;
        }
        if (reals > 1) return false;
    }
    return true;
}

// Transition indices t0 ... t(n-1) of one automaton.
using Run = std::vector<int>;

// ---------------------------------------------------------------------------
// Input sequences and output events.

using InputItem = std::optional<Rational>;  // nullopt is tau
using InputSequence = std::vector<InputItem>;

struct Interval {
    std::optional<Rational> lo;  // nullopt is -infinity
    std::optional<Rational> hi;  // nullopt is +infinity
    friend bool operator==(const Interval&, const Interval&) = default;
};

using EventItem = std::variant<std::string, Interval>;
using OutputEvent = std::vector<EventItem>;

[[nodiscard]] inline bool adjacent(const InputSequence& s1, const InputSequence& s2) {
    if (s1.size() != s2.size()) return false;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        if (s1[i].has_value() != s2[i].has_value()) return false;
        if (s1[i]) {
            Rational gap = *s1[i] - *s2[i];
            if (gap < 0) gap = -gap;
            if (gap > 1) return false;
        }
    }
    return true;
}

}  // namespace dipa
