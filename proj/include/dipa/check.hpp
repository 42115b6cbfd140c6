#pragma once

#include "dipa/augmentation.hpp"
#include "dipa/format.hpp"
#include "dipa/strong_feasibility.hpp"
#include "dipa/weight.hpp"
#include "dipa/wellformedness.hpp"
#include "dipa/witness.hpp"

#include <chrono>
#include <string>

namespace dipa {

struct CheckOptions {
    CheckCaps caps;
    bool timings = false;     // wall times change run to run, so they are opt-in
    int witness_ell = 1;      // 0 disables witness generation
};

// validate -> initialization -> augmentation -> well-formedness -> weight or
// witness.  Throws ResourceLimit when a cap is hit; everything else ends up
// in the report.
[[nodiscard]] inline VerdictReport check_automaton(const DipAutomaton& a, const CheckOptions& opt = {}) {
    using clock = std::chrono::steady_clock;
    VerdictReport r;
    auto t0 = clock::now();
    auto lap = [&](const char* phase) {
        auto t1 = clock::now();
        if (opt.timings) r.timings[phase] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        t0 = t1;
    };

    r.counts["variables"] = static_cast<long long>(a.num_vars());
    r.counts["states"] = static_cast<long long>(a.states.size());
    r.counts["transitions"] = static_cast<long long>(a.transitions.size());

    for (const auto& e : validate(a)) r.errors.push_back(e.rule + ": " + e.message);
    if (r.errors.empty()) {
        if (auto u = check_initialized(a)) {
            std::string run;
            for (int t : u->run) run += (run.empty() ? "" : " ") + std::to_string(t);
            r.errors.push_back("initialization: variable '" + a.variables[u->var] + "' may be used before assignment (run " +
                               run + ")");
        }
    }
    lap("validate");
    if (!r.errors.empty()) {
        r.verdict = Verdict::invalid;
        return r;
    }

    r.output_distinct = check_output_distinct(a);
    const auto aug = build_augmentation(a, opt.caps.aug);
    r.counts["aug_states"] = static_cast<long long>(aug.states.size());
    r.counts["aug_transitions"] = static_cast<long long>(aug.transitions.size());
    lap("augmentation");

    auto v = check_well_formed(aug, opt.caps.search);
    lap("well_formedness");

    if (!v) {
        r.verdict = Verdict::dp;
        r.weight = compute_weight(aug);
        lap("weight");
        if (auto w = check_strong_feasibility(a, aug, opt.caps.aug)) {
            std::string run;
            for (int t : w->run) run += (run.empty() ? "" : " ") + std::to_string(t);
            r.warnings.push_back("strong feasibility: run " + run + " orders a sample stored in '" +
                                 a.variables[w->below] + "' below one stored in '" + a.variables[w->above] +
                                 "' against the order of their means");
        }
        lap("strong_feasibility");
        return r;
    }

    r.verdict = r.output_distinct ? Verdict::not_dp : Verdict::not_well_formed_inconclusive;
    for (int x : v->variables) r.violation_variables.push_back(a.variables[x]);
    if (opt.witness_ell > 0) {
        try {
            r.witness = gen_witness(a, *v, opt.witness_ell);
        } catch (const PreconditionError& e) {
            r.warnings.push_back(std::string("witness: ") + e.what());
        }
        lap("witness");
    }
    r.violation = std::move(v);
    return r;
}

[[nodiscard]] inline int exit_code(Verdict v) {
    switch (v) {
        case Verdict::dp: return 0;
        case Verdict::not_dp: return 1;
        case Verdict::not_well_formed_inconclusive: return 2;
        case Verdict::invalid: return 3;
    }
    return 3;
}

inline constexpr int exit_resource_limit = 4;

}  // namespace dipa
