#pragma once

#include "dipa/error.hpp"
#include "dipa/model.hpp"
#include "dipa/rational.hpp"
#include "dipa/violation.hpp"
#include "dipa/witness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace dipa {

// ---------------------------------------------------------------------------
// Automaton files.
//
//   var r1 r2;
//   state q0 noninput d=1/4 mu=0 dp=1/4 mup=0;
//   state q2 input d=1/4 mu=0;
//   init q0;
//   trans q2 -> q3 guard "x >= r1 && x < r2" out "@top1" assign {};
//
// '#' starts a comment.  dp and mup default to 0, a missing guard is true
// and a missing assign list is empty.  The same automaton is also accepted
// as a JSON object (see to_json).

struct Diagnostic {
    int line = 0;
    int column = 0;
    std::string message;
    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

class ParseError : public InvalidInput {
public:
    explicit ParseError(std::vector<Diagnostic> diags) : InvalidInput(render(diags)), diags_(std::move(diags)) {}
    [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    static std::string render(const std::vector<Diagnostic>& diags) {
        std::string s;
        for (const auto& d : diags) {
            if (!s.empty()) s += "\n";
            s += std::to_string(d.line) + ":" + std::to_string(d.column) + ": " + d.message;
        }
        return s;
    }
    std::vector<Diagnostic> diags_;
};

namespace detail {

struct Token {
    enum Kind { word, string, punct, end } kind = end;
    std::string text;
    int line = 1;
    int column = 1;
};

inline std::vector<Token> tokenize(std::string_view src, std::vector<Diagnostic>& diags) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k && i < src.size(); ++j, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '/' || c == '.' || c == '-' ||
               c == '+' || c == '[' || c == ']' || c == '\'';
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
        } else if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
        } else if (c == '"') {
            Token t{Token::string, {}, line, col};
            advance(1);
            while (i < src.size() && src[i] != '"' && src[i] != '\n') {
                t.text += src[i];
                advance(1);
            }
            if (i < src.size() && src[i] == '"') advance(1);
            else diags.push_back({t.line, t.column, "unterminated string"});
            out.push_back(std::move(t));
        } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
            out.push_back({Token::punct, "->", line, col});
            advance(2);
        } else if (c == ';' || c == '{' || c == '}' || c == ',' || c == '=') {
            out.push_back({Token::punct, std::string(1, c), line, col});
            advance(1);
        } else if (word_char(c)) {
            Token t{Token::word, {}, line, col};
            while (i < src.size() && word_char(src[i]) && !(src[i] == '-' && i + 1 < src.size() && src[i + 1] == '>')) {
                t.text += src[i];
                advance(1);
            }
            out.push_back(std::move(t));
        } else {
            diags.push_back({line, col, std::string("unexpected character '") + c + "'"});
            advance(1);
        }
    }
    out.push_back({Token::end, {}, line, col});
    return out;
}

inline DipAutomaton parse_text(std::string_view src) {
    std::vector<Diagnostic> diags;
    auto toks = tokenize(src, diags);
    std::size_t p = 0;
    auto err = [&](const Token& t, std::string msg) { diags.push_back({t.line, t.column, std::move(msg)}); };
    auto is = [&](std::string_view s) { return toks[p].kind != Token::end && toks[p].kind != Token::string && toks[p].text == s; };
    auto skip_statement = [&] {
        while (toks[p].kind != Token::end && !(toks[p].kind == Token::punct && toks[p].text == ";")) ++p;
        if (toks[p].kind != Token::end) ++p;
    };
    auto expect_semi = [&] {
        if (is(";")) {
            ++p;
            return;
        }
        err(toks[p], "expected ';'");
        skip_statement();
    };

    struct PendingTrans {
        Token src, trg;
        std::optional<Token> guard;
        std::optional<Token> out;
        std::vector<Token> assign;
    };
    DipAutomaton a;
    std::vector<PendingTrans> trans;
    std::optional<Token> init;

    while (toks[p].kind != Token::end) {
        const Token kw = toks[p];
        if (kw.kind != Token::word) {
            err(kw, "expected a statement keyword");
            skip_statement();
            continue;
        }
        ++p;
        if (kw.text == "var") {
            while (toks[p].kind == Token::word) {
                const auto& t = toks[p++];
                if (!is_ident(t.text)) err(t, "invalid variable name '" + t.text + "'");
                else if (a.var_index(t.text)) err(t, "duplicate variable '" + t.text + "'");
                else a.variables.push_back(t.text);
                if (is(",")) ++p;
            }
            expect_semi();
        } else if (kw.text == "state") {
            if (toks[p].kind != Token::word) {
                err(toks[p], "expected a state name");
                skip_statement();
                continue;
            }
            const Token name = toks[p++];
            State s;
            s.name = name.text;
            if (!is_ident(name.text)) err(name, "invalid state name '" + name.text + "'");
            if (a.state_index(name.text)) err(name, "duplicate state '" + name.text + "'");
            if (is("input")) s.kind = StateKind::input;
            else if (is("noninput")) s.kind = StateKind::noninput;
            else err(toks[p], "expected 'input' or 'noninput'");
            if (toks[p].kind == Token::word) ++p;
            bool have_d = false, have_mu = false;
            while (toks[p].kind == Token::word) {
                const Token key = toks[p++];
                if (!is("=")) {
                    err(toks[p], "expected '=' after '" + key.text + "'");
                    break;
                }
                ++p;
                const Token val = toks[p];
                if (val.kind != Token::word) {
                    err(val, "expected a rational value");
                    break;
                }
                ++p;
                auto r = parse_rational(val.text);
                if (!r) {
                    err(val, "malformed rational '" + val.text + "'");
                    continue;
                }
                if (key.text == "d") {
                    s.params.d = *r;
                    have_d = true;
                } else if (key.text == "mu") {
                    s.params.mu = *r;
                    have_mu = true;
                } else if (key.text == "dp") {
                    s.params.d_prime = *r;
                } else if (key.text == "mup") {
                    s.params.mu_prime = *r;
                } else {
                    err(key, "unknown state parameter '" + key.text + "'");
                    continue;
                }
                if ((key.text == "d" || key.text == "dp") && *r < 0)
                    err(val, key.text + " must be non-negative, got " + val.text);
            }
            if (!have_d) err(name, "state '" + name.text + "' is missing d");
            if (!have_mu) err(name, "state '" + name.text + "' is missing mu");
            a.states.push_back(std::move(s));
            expect_semi();
        } else if (kw.text == "init") {
            if (toks[p].kind != Token::word) {
                err(toks[p], "expected a state name");
                skip_statement();
                continue;
            }
            if (init) err(toks[p], "init given twice");
            init = toks[p++];
            expect_semi();
        } else if (kw.text == "trans") {
            PendingTrans t;
            if (toks[p].kind != Token::word) {
                err(toks[p], "expected a source state");
                skip_statement();
                continue;
            }
            t.src = toks[p++];
            if (!is("->")) {
                err(toks[p], "expected '->'");
                skip_statement();
                continue;
            }
            ++p;
            if (toks[p].kind != Token::word) {
                err(toks[p], "expected a target state");
                skip_statement();
                continue;
            }
            t.trg = toks[p++];
            bool bad = false;
            while (!bad && toks[p].kind == Token::word) {
                const Token key = toks[p++];
                if (key.text == "guard" || key.text == "out") {
                    if (toks[p].kind != Token::string) {
                        err(toks[p], "expected a quoted " + key.text);
                        bad = true;
                        break;
                    }
                    (key.text == "guard" ? t.guard : t.out) = toks[p++];
                } else if (key.text == "assign") {
                    if (!is("{")) {
                        err(toks[p], "expected '{'");
                        bad = true;
                        break;
                    }
                    ++p;
                    while (toks[p].kind == Token::word) {
                        t.assign.push_back(toks[p++]);
                        if (is(",")) ++p;
                    }
                    if (!is("}")) {
                        err(toks[p], "expected '}'");
                        bad = true;
                        break;
                    }
                    ++p;
                } else {
                    err(key, "unknown transition field '" + key.text + "'");
                    bad = true;
                }
            }
            if (bad) {
                skip_statement();
                continue;
            }
            if (!t.out) err(t.src, "transition is missing out");
            trans.push_back(std::move(t));
            expect_semi();
        } else {
            err(kw, "unknown statement '" + kw.text + "'");
            skip_statement();
        }
    }

    std::set<std::string> alpha;
    for (const auto& pt : trans) {
        Transition t;
        auto s = a.state_index(pt.src.text);
        auto d = a.state_index(pt.trg.text);
        if (!s) err(pt.src, "unknown state '" + pt.src.text + "'");
        if (!d) err(pt.trg, "unknown state '" + pt.trg.text + "'");
        try {
            if (pt.guard) t.guard = parse_guard(pt.guard->text, a.variables);
        } catch (const InvalidInput& e) {
            err(*pt.guard, e.what());
        }
        try {
            if (pt.out) t.output = parse_output(pt.out->text);
        } catch (const InvalidInput& e) {
            err(*pt.out, e.what());
        }
        t.assign.assign(a.num_vars(), false);
        for (const auto& v : pt.assign) {
            auto vi = a.var_index(v.text);
            if (!vi) err(v, "unknown variable '" + v.text + "' in assignment");
            else t.assign[*vi] = true;
        }
        if (!s || !d) continue;
        t.src = *s;
        t.trg = *d;
        if (t.output.kind == Output::Kind::symbol) alpha.insert(t.output.symbol);
        a.transitions.push_back(std::move(t));
    }
    a.alphabet.assign(alpha.begin(), alpha.end());
    if (init) {
        if (auto q = a.state_index(init->text)) a.init = *q;
        else err(*init, "unknown state '" + init->text + "'");
    } else if (!a.states.empty()) {
        diags.push_back({toks.back().line, toks.back().column, "missing init statement"});
    }
    if (!diags.empty()) {
        std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& x, const Diagnostic& y) {
            return std::tie(x.line, x.column) < std::tie(y.line, y.column);
        });
        throw ParseError(std::move(diags));
    }
    return a;
}

inline Rational json_rational(const nlohmann::json& j, const std::string& what) {
    if (j.is_string()) {
        if (auto r = parse_rational(j.get<std::string>())) return *r;
    } else if (j.is_number_integer()) {
        return Rational(j.get<std::int64_t>());
    }
    throw InvalidInput("malformed rational in " + what);
}

}  // namespace detail

[[nodiscard]] inline nlohmann::json to_json(const DipAutomaton& a) {
    nlohmann::json j;
    j["variables"] = a.variables;
    j["states"] = nlohmann::json::array();
    for (const auto& s : a.states)
        j["states"].push_back({{"name", s.name},
                               {"kind", s.kind == StateKind::input ? "input" : "noninput"},
                               {"d", to_string(s.params.d)},
                               {"mu", to_string(s.params.mu)},
                               {"dp", to_string(s.params.d_prime)},
                               {"mup", to_string(s.params.mu_prime)}});
    j["init"] = a.states.empty() ? "" : a.states[a.init].name;
    j["transitions"] = nlohmann::json::array();
    for (const auto& t : a.transitions) {
        std::vector<std::string> as;
        for (std::size_t v = 0; v < t.assign.size(); ++v)
            if (t.assign[v]) as.push_back(a.variables[v]);
        j["transitions"].push_back({{"src", a.states[t.src].name},
                                    {"trg", a.states[t.trg].name},
                                    {"guard", guard_to_string(a, t.guard)},
                                    {"out", output_to_string(t.output)},
                                    {"assign", as}});
    }
    return j;
}

[[nodiscard]] inline DipAutomaton from_json(const nlohmann::json& j) {
    try {
        Builder b;
        b.vars(j.value("variables", std::vector<std::string>{}));
        for (const auto& s : j.at("states")) {
            const std::string kind = s.at("kind").get<std::string>();
            if (kind != "input" && kind != "noninput") throw InvalidInput("state kind must be input or noninput");
            const std::string name = s.at("name").get<std::string>();
            Rational d = detail::json_rational(s.at("d"), "d of " + name);
            Rational dp = s.contains("dp") ? detail::json_rational(s["dp"], "dp of " + name) : Rational(0);
            if (d < 0 || dp < 0) throw InvalidInput("state '" + name + "': d and dp must be non-negative");
            b.state(name, kind == "input" ? StateKind::input : StateKind::noninput, d,
                    detail::json_rational(s.at("mu"), "mu of " + name), dp,
                    s.contains("mup") ? detail::json_rational(s["mup"], "mup of " + name) : Rational(0));
        }
        b.init(j.at("init").get<std::string>());
        for (const auto& t : j.value("transitions", nlohmann::json::array()))
            b.trans(t.at("src").get<std::string>(), t.at("trg").get<std::string>(), t.value("guard", "true"),
                    t.at("out").get<std::string>(), t.value("assign", std::vector<std::string>{}));
        auto a = b.build();
        std::set<std::string> names;
        for (const auto& s : a.states)
            if (!names.insert(s.name).second) throw InvalidInput("duplicate state '" + s.name + "'");
        std::set<std::string> vars(a.variables.begin(), a.variables.end());
        if (vars.size() != a.variables.size()) throw InvalidInput("duplicate variable");
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed automaton JSON: ") + e.what());
    }
}

// Text or JSON, decided by the first non-blank character.
[[nodiscard]] inline DipAutomaton parse(std::string_view text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw InvalidInput(std::string("malformed JSON: ") + e.what());
        }
        return from_json(j);
    }
    return detail::parse_text(text);
}

[[nodiscard]] inline std::string to_text(const DipAutomaton& a) {
    std::ostringstream os;
    os << "var";
    for (const auto& v : a.variables) os << " " << v;
    os << ";\n";
    for (const auto& s : a.states)
        os << "state " << s.name << (s.kind == StateKind::input ? " input" : " noninput")
           << " d=" << to_short_string(s.params.d) << " mu=" << to_short_string(s.params.mu)
           << " dp=" << to_short_string(s.params.d_prime) << " mup=" << to_short_string(s.params.mu_prime) << ";\n";
    if (!a.states.empty()) os << "init " << a.states[a.init].name << ";\n";
    for (const auto& t : a.transitions) {
        os << "trans " << a.states[t.src].name << " -> " << a.states[t.trg].name << " guard \""
           << guard_to_string(a, t.guard) << "\" out \"" << output_to_string(t.output) << "\" assign {";
        bool first = true;
        for (std::size_t v = 0; v < t.assign.size(); ++v)
            if (t.assign[v]) {
                os << (first ? "" : ", ") << a.variables[v];
                first = false;
            }
        os << "};\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Inputs and events on the command line: comma separated, "tau" or a
// rational for inputs; "@sym" or "lo..hi" (with "inf"/"-inf", or "*" for
// the whole line) for event items.

[[nodiscard]] inline InputSequence parse_inputs_csv(std::string_view s) {
    InputSequence out;
    if (detail::trim(s).empty()) return out;
    std::size_t pos = 0;
    for (;;) {
        auto comma = s.find(',', pos);
        auto item = detail::trim(s.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
        if (item == "tau" || item == "t") {
            out.emplace_back(std::nullopt);
        } else if (auto r = parse_rational(item)) {
            out.emplace_back(*r);
        } else {
            throw InvalidInput("malformed input item '" + std::string(item) + "'");
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

[[nodiscard]] inline OutputEvent parse_event_csv(std::string_view s) {
    OutputEvent out;
    if (detail::trim(s).empty()) return out;
    std::size_t pos = 0;
    auto bound = [](std::string_view b) -> std::optional<Rational> {
        if (b == "inf" || b == "+inf" || b == "-inf") return std::nullopt;
        if (auto r = parse_rational(b)) return *r;
        throw InvalidInput("malformed interval bound '" + std::string(b) + "'");
    };
    for (;;) {
        auto comma = s.find(',', pos);
        auto item = detail::trim(s.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
        if (!item.empty() && item[0] == '@') {
            out.emplace_back(std::string(item.substr(1)));
        } else if (item == "*") {
            out.emplace_back(Interval{});
        } else if (auto dots = item.find(".."); dots != std::string_view::npos) {
            auto lo = detail::trim(item.substr(0, dots)), hi = detail::trim(item.substr(dots + 2));
            if (lo == "inf" || lo == "+inf") throw InvalidInput("interval lower bound cannot be +inf");
            if (hi == "-inf") throw InvalidInput("interval upper bound cannot be -inf");
            Interval iv{bound(lo), bound(hi)};
            if (iv.lo && iv.hi && !(*iv.lo < *iv.hi)) throw InvalidInput("empty event interval '" + std::string(item) + "'");
            out.emplace_back(iv);
        } else {
            throw InvalidInput("malformed event item '" + std::string(item) + "'");
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

[[nodiscard]] inline std::string inputs_to_csv(const InputSequence& in) {
    std::string s;
    for (std::size_t i = 0; i < in.size(); ++i) s += (i ? "," : "") + (in[i] ? to_short_string(*in[i]) : std::string("tau"));
    return s;
}

[[nodiscard]] inline std::string event_to_csv(const OutputEvent& ev) {
    std::string s;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (i) s += ",";
        if (const auto* sym = std::get_if<std::string>(&ev[i])) {
            s += "@" + *sym;
        } else {
            const auto& iv = std::get<Interval>(ev[i]);
            if (!iv.lo && !iv.hi) s += "*";
            else s += (iv.lo ? to_short_string(*iv.lo) : "-inf") + ".." + (iv.hi ? to_short_string(*iv.hi) : "inf");
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Reports.

enum class Verdict { dp, not_dp, not_well_formed_inconclusive, invalid };

[[nodiscard]] inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::dp: return "dp";
        case Verdict::not_dp: return "not_dp";
        case Verdict::not_well_formed_inconclusive: return "not_well_formed_inconclusive";
        case Verdict::invalid: return "invalid";
    }
    return "?";
}

[[nodiscard]] inline Verdict verdict_from_name(std::string_view s) {
    if (s == "dp") return Verdict::dp;
    if (s == "not_dp") return Verdict::not_dp;
    if (s == "not_well_formed_inconclusive") return Verdict::not_well_formed_inconclusive;
    if (s == "invalid") return Verdict::invalid;
    throw InvalidInput("unknown verdict '" + std::string(s) + "'");
}

struct VerdictReport {
    Verdict verdict = Verdict::invalid;
    std::optional<Rational> weight;        // dp only
    std::optional<Violation> violation;    // not_dp / inconclusive
    std::vector<std::string> violation_variables;  // names of violation->variables
    bool output_distinct = false;
    std::vector<std::string> errors;       // invalid only
    std::vector<std::string> warnings;
    std::optional<WitnessPair> witness;
    std::map<std::string, long long> counts;
    std::map<std::string, double> timings;  // milliseconds; empty unless requested
};

namespace detail {

inline nlohmann::json input_json(const InputSequence& in) {
    auto j = nlohmann::json::array();
    for (const auto& x : in) j.push_back(x ? nlohmann::json(to_string(*x)) : nlohmann::json("tau"));
    return j;
}

inline InputSequence input_from_json(const nlohmann::json& j) {
    InputSequence in;
    for (const auto& x : j) {
        if (x.get<std::string>() == "tau") in.emplace_back(std::nullopt);
        else in.emplace_back(json_rational(x, "input"));
    }
    return in;
}

inline nlohmann::json opt_rational(const std::optional<Rational>& r) {
    return r ? nlohmann::json(to_string(*r)) : nlohmann::json(nullptr);
}

inline std::optional<Rational> opt_rational_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return json_rational(j, "interval bound");
}

inline nlohmann::json event_json(const OutputEvent& ev) {
    auto j = nlohmann::json::array();
    for (const auto& e : ev) {
        if (const auto* s = std::get_if<std::string>(&e)) j.push_back({{"symbol", *s}});
        else {
            const auto& iv = std::get<Interval>(e);
            j.push_back({{"lo", opt_rational(iv.lo)}, {"hi", opt_rational(iv.hi)}});
        }
    }
    return j;
}

inline OutputEvent event_from_json(const nlohmann::json& j) {
    OutputEvent ev;
    for (const auto& e : j) {
        if (e.contains("symbol")) ev.emplace_back(e["symbol"].get<std::string>());
        else ev.emplace_back(Interval{opt_rational_from(e.at("lo")), opt_rational_from(e.at("hi"))});
    }
    return ev;
}

inline ViolationKind kind_from_short(std::string_view s) {
    if (s == "LC") return ViolationKind::leaking_cycle;
    if (s == "LP") return ViolationKind::leaking_pair;
    if (s == "DC") return ViolationKind::disclosing_cycle;
    if (s == "PV") return ViolationKind::privacy_violating_path;
    throw InvalidInput("unknown violation kind '" + std::string(s) + "'");
}

}  // namespace detail

[[nodiscard]] inline nlohmann::json witness_to_json(const WitnessPair& w) {
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& b : w.bands) bands.push_back({{"position", b.position}, {"lo", to_string(b.lo)}, {"hi", to_string(b.hi)}});
    nlohmann::json means = nlohmann::json::array();
    for (const auto& m : w.means) means.push_back(to_string(m));
    return {{"kind", short_name(w.kind)},
            {"ell", w.ell},
            {"run", w.run},
            {"alpha", detail::input_json(w.alpha)},
            {"beta", detail::input_json(w.beta)},
            {"event", detail::event_json(w.event)},
            {"bands", bands},
            {"shifted", w.shifted},
            {"means", means},
            {"mode", w.mode ? nlohmann::json(*w.mode == PsiMode::lower ? "lower" : "upper") : nlohmann::json(nullptr)},
            {"delta", to_string(w.delta)}};
}

[[nodiscard]] inline WitnessPair witness_from_json(const nlohmann::json& j) {
    WitnessPair w;
    w.kind = detail::kind_from_short(j.at("kind").get<std::string>());
    w.ell = j.at("ell").get<int>();
    w.run = j.at("run").get<Run>();
    w.alpha = detail::input_from_json(j.at("alpha"));
    w.beta = detail::input_from_json(j.at("beta"));
    w.event = detail::event_from_json(j.at("event"));
    for (const auto& b : j.at("bands"))
        w.bands.push_back({b.at("position").get<int>(), detail::json_rational(b.at("lo"), "band"),
                           detail::json_rational(b.at("hi"), "band")});
    w.shifted = j.at("shifted").get<std::vector<int>>();
    for (const auto& m : j.at("means")) w.means.push_back(detail::json_rational(m, "mean"));
    if (!j.at("mode").is_null()) w.mode = j["mode"].get<std::string>() == "lower" ? PsiMode::lower : PsiMode::upper;
    w.delta = detail::json_rational(j.at("delta"), "delta");
    return w;
}

[[nodiscard]] inline nlohmann::json report_to_json(const VerdictReport& r) {
    nlohmann::json j;
    j["verdict"] = verdict_name(r.verdict);
    j["weight"] = detail::opt_rational(r.weight);
    if (r.violation) {
        const auto& v = *r.violation;
        nlohmann::json cycles = nlohmann::json::array();
        for (const auto& c : v.cycles) cycles.push_back({c.begin, c.end});
        j["violation"] = {{"kind", short_name(v.kind)},
                          {"run", v.run},
                          {"cycles", cycles},
                          {"positions", v.positions},
                          {"variables", v.variables},
                          {"variable_names", r.violation_variables},
                          {"pv_case", v.pv_case ? nlohmann::json(std::string(1, v.pv_case)) : nlohmann::json(nullptr)}};
    } else {
        j["violation"] = nullptr;
    }
    j["output_distinct"] = r.output_distinct;
    j["errors"] = r.errors;
    j["warnings"] = r.warnings;
    j["witness"] = r.witness ? witness_to_json(*r.witness) : nlohmann::json(nullptr);
    j["counts"] = r.counts;
    j["timings"] = r.timings;
    return j;
}

[[nodiscard]] inline VerdictReport report_from_json(const nlohmann::json& j) {
    VerdictReport r;
    r.verdict = verdict_from_name(j.at("verdict").get<std::string>());
    if (!j.at("weight").is_null()) r.weight = detail::json_rational(j["weight"], "weight");
    if (!j.at("violation").is_null()) {
        const auto& jv = j["violation"];
        Violation v;
        v.kind = detail::kind_from_short(jv.at("kind").get<std::string>());
        v.run = jv.at("run").get<std::vector<int>>();
        for (const auto& c : jv.at("cycles")) v.cycles.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
        v.positions = jv.at("positions").get<std::vector<int>>();
        v.variables = jv.at("variables").get<std::vector<int>>();
        if (!jv.at("pv_case").is_null()) v.pv_case = jv["pv_case"].get<std::string>().at(0);
        r.violation = std::move(v);
        r.violation_variables = jv.at("variable_names").get<std::vector<std::string>>();
    }
    r.output_distinct = j.at("output_distinct").get<bool>();
    r.errors = j.at("errors").get<std::vector<std::string>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (!j.at("witness").is_null()) r.witness = witness_from_json(j["witness"]);
    r.counts = j.at("counts").get<std::map<std::string, long long>>();
    r.timings = j.at("timings").get<std::map<std::string, double>>();
    return r;
}

// Human-readable form of the same report value.
[[nodiscard]] inline std::string report_to_text(const VerdictReport& r) {
    std::ostringstream os;
    os << "verdict: " << verdict_name(r.verdict) << "\n";
    if (r.weight) os << "weight: " << to_string(*r.weight) << "\n";
    if (r.violation) {
        const auto& v = *r.violation;
        os << "violation: " << short_name(v.kind);
        if (v.pv_case) os << " (case " << v.pv_case << ")";
        os << "\n  run:";
        for (int t : v.run) os << " " << t;
        os << "\n  cycles:";
        for (const auto& c : v.cycles) os << " [" << c.begin << "," << c.end << ")";
        os << "\n  positions:";
        for (int p : v.positions) os << " " << p;
        if (!r.violation_variables.empty()) {
            os << "\n  variables:";
            for (const auto& n : r.violation_variables) os << " " << n;
        }
        os << "\n";
    }
    os << "output_distinct: " << (r.output_distinct ? "true" : "false") << "\n";
    for (const auto& e : r.errors) os << "error: " << e << "\n";
    for (const auto& w : r.warnings) os << "warning: " << w << "\n";
    if (r.witness) {
        os << "witness (ell=" << r.witness->ell << "):\n"
           << "  alpha: " << inputs_to_csv(r.witness->alpha) << "\n"
           << "  beta:  " << inputs_to_csv(r.witness->beta) << "\n"
           << "  event: " << event_to_csv(r.witness->event) << "\n";
    }
    for (const auto& [k, v] : r.counts) os << k << ": " << v << "\n";
    for (const auto& [k, v] : r.timings) os << "time." << k << "_ms: " << v << "\n";
    return os.str();
}

}  // namespace dipa
