#include "dipa/check.hpp"
#include "dipa/corpus.hpp"
#include "dipa/format.hpp"
#include "dipa/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

struct Globals {
    std::string format = "json";
    std::size_t aug_cap = dipa::default_aug_cap;
    std::size_t search_cap = dipa::default_search_cap;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw dipa::InvalidInput("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

dipa::DipAutomaton load(const std::string& path) { return dipa::parse(read_file(path)); }

void emit(const Globals& g, const json& j, const std::string& text) {
    if (g.format == "json") std::cout << j.dump(2) << "\n";
    else std::cout << text;
}

dipa::VerdictReport invalid_report(const dipa::InvalidInput& e) {
    dipa::VerdictReport r;
    r.verdict = dipa::Verdict::invalid;
    if (const auto* pe = dynamic_cast<const dipa::ParseError*>(&e)) {
        for (const auto& d : pe->diagnostics())
            r.errors.push_back(std::to_string(d.line) + ":" + std::to_string(d.column) + ": " + d.message);
    } else {
        r.errors.push_back(e.what());
    }
    return r;
}

int run_check(const Globals& g, const std::string& file, bool timings, int ell) {
    dipa::VerdictReport r;
    try {
        dipa::CheckOptions opt;
        opt.caps = {g.aug_cap, g.search_cap};
        opt.timings = timings;
        opt.witness_ell = ell;
        r = dipa::check_automaton(load(file), opt);
    } catch (const dipa::InvalidInput& e) {
        r = invalid_report(e);
    }
    emit(g, dipa::report_to_json(r), dipa::report_to_text(r));
    return dipa::exit_code(r.verdict);
}

int run_weight(const Globals& g, const std::string& file, bool unrefined) {
    dipa::VerdictReport r;
    try {
        dipa::CheckOptions opt;
        opt.caps = {g.aug_cap, g.search_cap};
        opt.witness_ell = 0;
        auto a = load(file);
        r = dipa::check_automaton(a, opt);
        if (r.verdict == dipa::Verdict::dp && unrefined)
            r.weight = dipa::compute_weight(dipa::build_augmentation(a, g.aug_cap), false);
    } catch (const dipa::InvalidInput& e) {
        r = invalid_report(e);
    }
    json j{{"verdict", dipa::verdict_name(r.verdict)}, {"weight", r.weight ? json(dipa::to_string(*r.weight)) : json()}};
    std::string text = std::string("verdict: ") + dipa::verdict_name(r.verdict) + "\n";
    if (r.weight) text += "weight: " + dipa::to_string(*r.weight) + "\n";
    emit(g, j, text);
    return dipa::exit_code(r.verdict);
}

int run_simulate(const Globals& g, const std::string& file, double eps, long long trials, std::uint64_t seed,
                 const std::string& inputs_csv, const std::string& event_csv, bool guided, unsigned threads) {
    auto a = load(file);
    auto inputs = dipa::parse_inputs_csv(inputs_csv);
    auto event = dipa::parse_event_csv(event_csv);
    dipa::SimOptions opt;
    opt.threads = threads;
    auto e = guided ? dipa::estimate_prob_guided(a, inputs, event, eps, trials, seed, opt)
                    : dipa::estimate_prob(a, inputs, event, eps, trials, seed, opt);
    json j{{"epsilon", eps},
           {"seed", seed},
           {"inputs", dipa::inputs_to_csv(inputs)},
           {"event", dipa::event_to_csv(event)},
           {"guided", guided},
           {"estimate",
            {{"point", e.point}, {"trials", e.trials}, {"std_error", e.std_error}, {"ci_halfwidth", e.ci_halfwidth}}}};
    std::ostringstream os;
    os.precision(17);
    os << "probability: " << e.point << "\nstd_error: " << e.std_error << "\nci95: [" << e.point - e.ci_halfwidth
       << ", " << e.point + e.ci_halfwidth << "]\ntrials: " << e.trials << "\n";
    emit(g, j, os.str());
    return 0;
}

int run_witness(const Globals& g, const std::string& file, int ell) {
    if (ell < 1) throw dipa::InvalidInput("--ell must be at least 1");
    return run_check(g, file, false, ell);
}

int run_gen(const std::string& name, std::optional<int> param, const std::string& out, bool as_json) {
    auto a = dipa::gen(name, param);
    std::string body = as_json ? dipa::to_json(a).dump(2) + "\n" : dipa::to_text(a);
    if (out.empty() || out == "-") {
        std::cout << body;
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw dipa::InvalidInput("cannot write '" + out + "'");
        f << body;
    }
    return 0;
}

std::string expected_verdict(const dipa::BenchmarkSpec& row) {
    return row.violation ? std::string("x") + dipa::short_name(*row.violation) : std::string("ok");
}

int run_bench(const Globals& g) {
    json rows = json::array();
    std::ostringstream text;
    bool all = true;
    text << "label          verdict  expected  weight  expected  match  ms\n";
    for (const auto& row : dipa::benchmark_table()) {
        auto a = dipa::gen(row.name, row.param);
        dipa::CheckOptions opt;
        opt.caps = {g.aug_cap, g.search_cap};
        opt.witness_ell = 0;
        auto t0 = std::chrono::steady_clock::now();
        auto r = dipa::check_automaton(a, opt);
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        std::string got = r.violation ? std::string("x") + dipa::short_name(r.violation->kind)
                                      : (r.verdict == dipa::Verdict::dp ? "ok" : dipa::verdict_name(r.verdict));
        std::string want = expected_verdict(row);
        std::string w = r.weight ? dipa::to_string(*r.weight) : "-";
        std::string ww = row.weight ? dipa::to_string(*row.weight) : "-";
        bool match = got == want && w == ww;
        all = all && match;
        rows.push_back({{"label", row.label},
                        {"verdict", got},
                        {"expected_verdict", want},
                        {"weight", w},
                        {"expected_weight", ww},
                        {"match", match},
                        {"counts", r.counts},
                        {"table_counts", {{"variables", row.vars}, {"states", row.states}, {"transitions", row.transitions}}},
                        {"ms", ms}});
        char line[160];
        std::snprintf(line, sizeof line, "%-14s %-8s %-9s %-7s %-9s %-6s %.1f\n", row.label.c_str(), got.c_str(),
                      want.c_str(), w.c_str(), ww.c_str(), match ? "yes" : "NO", ms);
        text << line;
    }
    emit(g, json{{"rows", rows}, {"all_match", all}}, text.str());
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DiPA differential privacy checker"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    app.add_option("--aug-cap", g.aug_cap, "Maximum number of augmentation states");
    app.add_option("--search-cap", g.search_cap, "Maximum number of states per violation search");

    std::string file;
    bool timings = false;
    int ell = 1;
    auto* check = app.add_subcommand("check", "Decide differential privacy and report a weight or violation");
    check->add_option("FILE", file)->required();
    check->add_flag("--timings", timings, "Include per-phase wall times");
    check->add_option("--ell", ell, "Unrolling depth of the included witness (0: none)");

    bool unrefined = false;
    auto* weight = app.add_subcommand("weight", "Compute the privacy weight of a well-formed automaton");
    weight->add_option("FILE", file)->required();
    weight->add_flag("--unrefined", unrefined, "Use the augmentation's own SCCs instead of its quotient");

    double eps = 1.0;
    long long trials = 100000;
    std::uint64_t seed = dipa::default_seed();
    std::string inputs_csv, event_csv;
    bool guided = false;
    unsigned threads = 0;
    auto* sim = app.add_subcommand("simulate", "Estimate the probability of an output event");
    sim->add_option("FILE", file)->required();
    sim->add_option("--epsilon", eps)->check(CLI::PositiveNumber);
    sim->add_option("--trials", trials)->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "Defaults to DIPA_SEED");
    sim->add_option("--inputs", inputs_csv, "Comma separated: tau or a rational")->required();
    sim->add_option("--event", event_csv, "Comma separated: @sym, lo..hi or *")->required();
    sim->add_flag("--guided", guided, "Importance-sampled estimator");
    sim->add_option("--threads", threads, "Worker threads (0: all cores)");

    auto* wit = app.add_subcommand("witness", "Generate a counterexample input pair");
    wit->add_option("FILE", file)->required();
    wit->add_option("--ell", ell)->required();

    std::string name, out;
    std::optional<int> param;
    bool as_json = false;
    auto* gen = app.add_subcommand("gen", "Write a corpus automaton");
    gen->add_option("NAME", name)->required()->check(CLI::IsMember(dipa::corpus_names()));
    gen->add_option("--param", param);
    gen->add_option("-o,--output", out, "Output file (default stdout)");
    gen->add_flag("--json", as_json, "Write the JSON form");

    auto* bench = app.add_subcommand("bench", "Run the benchmark table and compare with expectations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 3;
    }

    try {
        if (*check) return run_check(g, file, timings, ell);
        if (*weight) return run_weight(g, file, unrefined);
        if (*sim) return run_simulate(g, file, eps, trials, seed, inputs_csv, event_csv, guided, threads);
        if (*wit) return run_witness(g, file, ell);
        if (*gen) return run_gen(name, param, out, as_json);
        if (*bench) return run_bench(g);
    } catch (const dipa::ResourceLimit& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return dipa::exit_resource_limit;
    } catch (const dipa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
