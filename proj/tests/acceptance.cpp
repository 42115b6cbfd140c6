// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.  Tolerances are fixed here and not configurable.

#include "dipa/check.hpp"
#include "dipa/corpus.hpp"
#include "dipa/simulator.hpp"
#include "dipa/witness.hpp"
#include "oracles.hpp"

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace dipa;

namespace {

// Tolerances.
constexpr double bench_row_limit_s = 60;
constexpr double kminmax_min_r2 = 0.9;
constexpr double mrange_total_limit_s = 300;
constexpr double mrange_max_degree = 4;
constexpr double ratio_sigmas = 3;
constexpr long long ratio_trials = 1000000;
constexpr int ratio_pairs = 100;
constexpr int ratio_max_len = 6;
constexpr long long min_denominator_hits = 100;
constexpr double necessity_eps = 2;
constexpr long long necessity_trials = 200000;
constexpr double monotone_sigmas = 3;
constexpr double calibration_sigmas = 3;
constexpr long long calibration_trials = 1000000;

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  [" << id << "] " << title << ": " << detail << std::endl;
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int prec = 3) {
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

// Least-squares line through (x, y); returns {slope, r2}.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
    const double slope = cov / vx;
    return {slope, vy > 0 ? cov * cov / (vx * vy) : 1.0};
}

// Median wall time of `reps` runs of f.
template <class F>
double median_time(int reps, F&& f) {
    std::vector<double> ts;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        ts.push_back(seconds_since(t0));
    }
    std::sort(ts.begin(), ts.end());
    return ts[ts.size() / 2];
}

bool verdict_matches(const VerdictReport& r, const BenchmarkSpec& row) {
    if (row.violation) return r.violation && r.violation->kind == *row.violation && r.verdict != Verdict::dp;
    return r.verdict == Verdict::dp && r.weight == row.weight;
}

void criterion_table() {
    int ok = 0;
    double worst = 0;
    std::string bad;
    for (const auto& row : benchmark_table()) {
        auto t0 = std::chrono::steady_clock::now();
        auto r = check_automaton(gen(row.name, row.param));
        const double s = seconds_since(t0);
        worst = std::max(worst, s);
        if (verdict_matches(r, row) && s < bench_row_limit_s) ++ok;
        else bad += " " + row.label;
    }
    const int n = static_cast<int>(benchmark_table().size());
    report(1, "Benchmark table reproduction", ok == n,
           std::to_string(ok) + "/" + std::to_string(n) + " rows match, slowest " + fmt(worst) + " s" +
               (bad.empty() ? "" : ", mismatched:" + bad));
}

void criterion_scaling() {
    std::vector<double> ks, kt;
    bool verified = true;
    for (int k : {2, 10, 20, 100, 200}) {
        auto a = corpus::k_min_max(k);
        VerdictReport r;
        kt.push_back(median_time(5, [&] { r = check_automaton(a); }));
        ks.push_back(k);
        verified = verified && r.verdict == Verdict::dp && r.weight == Rational(1);
    }
    const auto [kslope, r2] = linear_fit(ks, kt);
    report(2, "k-Min-Max linear scaling", verified && r2 >= kminmax_min_r2,
           "R^2 = " + fmt(r2) + " (need >= " + fmt(kminmax_min_r2) + "), " + fmt(kt.back() * 1000) +
               " ms at k = 200, all verified: " + (verified ? "yes" : "no"));

    std::vector<double> lm, lt;
    double total = 0;
    verified = true;
    for (int m : {1, 2, 5, 10, 15, 20}) {
        auto a = corpus::m_range(m);
        auto t0 = std::chrono::steady_clock::now();
        auto r = check_automaton(a);
        const double s = seconds_since(t0);
        total += s;
        verified = verified && r.verdict == Verdict::dp && r.weight == Rational(1);
        if (m >= 5) {
            lm.push_back(std::log(m));
            lt.push_back(std::log(std::max(s, 1e-6)));
        }
    }
    const double degree = linear_fit(lm, lt).first;
    report(2, "m-Range polynomial scaling",
           verified && total < mrange_total_limit_s && degree <= mrange_max_degree,
           "total " + fmt(total) + " s for m <= 20 (limit " + fmt(mrange_total_limit_s) +
               "), log-log slope " + fmt(degree) + " (limit " + fmt(mrange_max_degree) +
               "), all verified: " + (verified ? "yes" : "no"));
}

void criterion_oracle() {
    std::mt19937_64 rng(4242);
    int disagreements = 0, violations = 0;
    for (int i = 0; i < 200; ++i) {
        auto a = random_automaton(rng);
        const bool oracle_found = !brute_force_wellformedness(a, 8, 6).empty();
        const bool checker_found = check_well_formed(a).has_value();
        violations += checker_found;
        if (oracle_found && !checker_found) ++disagreements;
    }
    report(3, "Oracle equivalence", disagreements == 0,
           std::to_string(disagreements) + " disagreements over 200 automata (" + std::to_string(violations) +
               " not well-formed)");
}

void criterion_augmentation() {
    long long runs = 0, bad = 0;
    int automata = 0;
    std::string first;
    for (const auto& n : corpus_names()) {
        auto a = gen(n);
        if (a.num_vars() > 3) continue;
        ++automata;
        auto res = oracle::check_augmentation(a, build_augmentation(a), 6);
        runs += res.aug_runs;
        bad += res.failures;
        if (res.failures && first.empty()) first = n + ": " + res.first_failure;
    }
    report(4, "Augmentation properties", bad == 0,
           std::to_string(runs - bad) + "/" + std::to_string(runs) + " aug runs over " + std::to_string(automata) +
               " automata" + (first.empty() ? "" : ", first failure " + first));
}

// Whether position i is read by an input state, provided every run agrees.
std::vector<bool> position_kinds(const DipAutomaton& a, int len) {
    std::vector<bool> kinds;
    std::set<int> layer{a.init};
    for (int i = 0; i < len && !layer.empty(); ++i) {
        std::set<bool> k;
        std::set<int> next;
        for (int q : layer) {
            bool has_out = false;
            for (const auto& t : a.transitions)
                if (t.src == q) {
                    has_out = true;
                    next.insert(t.trg);
                }
            if (has_out) k.insert(a.is_input(q));
        }
        if (k.size() != 1) break;
        kinds.push_back(*k.begin());
        layer = std::move(next);
    }
    return kinds;
}

Rational random_value(std::mt19937_64& rng, int lo_quarters, int hi_quarters) {
    return Rational(std::uniform_int_distribution<int>(lo_quarters, hi_quarters)(rng), 4);
}

// Event item for one observed output: the symbol, or an interval holding the
// observed real (or the whole line).
EventItem event_item(const OutputValue& o, std::mt19937_64& rng) {
    if (const auto* s = std::get_if<std::string>(&o)) return *s;
    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) return Interval{};
    const Rational centre(static_cast<std::int64_t>(std::llround(std::get<double>(o) * 4)), 4);
    const Rational w = random_value(rng, 2, 8);
    return Interval{centre - w, centre + w};
}

void criterion_sufficiency() {
    const std::vector<std::string> names{"svt", "num-sparse", "range", "k-min-max"};
    long long cases = 0, exceed = 0, redraws = 0;
    double worst_margin = -1e300;
    std::string worst;
    for (const auto& n : names) {
        auto a = gen(n, n == "k-min-max" ? std::optional<int>(2) : std::nullopt);
        const double bound_d = boost::rational_cast<double>(compute_weight(build_augmentation(a)));
        const auto kinds = position_kinds(a, ratio_max_len);
        for (double eps : {0.5, 1.0, 2.0}) {
            std::mt19937_64 rng(std::hash<std::string>{}(n) ^ static_cast<std::uint64_t>(eps * 1000));
            const double bound = std::exp(bound_d * eps);
            for (int p = 0; p < ratio_pairs; ++p) {
                RatioEstimate r;
                for (int attempt = 0;; ++attempt) {
                    const int len = std::uniform_int_distribution<int>(1, static_cast<int>(kinds.size()))(rng);
                    InputSequence alpha, beta;
                    for (int i = 0; i < len; ++i) {
                        if (!kinds[i]) {
                            alpha.emplace_back(std::nullopt);
                            beta.emplace_back(std::nullopt);
                        } else {
                            alpha.emplace_back(random_value(rng, -12, 12));
                            beta.emplace_back(*alpha.back() + random_value(rng, -4, 4));
                        }
                    }
                    // The event is an outcome observed on beta, so the
                    // denominator is rarely negligible.
                    PhiloxStream trial_rng(rng(), 0, 99);
                    auto seen = simulate_trial(a, beta, eps, {}, trial_rng);
                    const std::size_t m = seen.outputs.size();
                    if (m == 0) continue;
                    alpha.resize(m);
                    beta.resize(m);
                    OutputEvent ev;
                    for (const auto& o : seen.outputs) ev.push_back(event_item(o, rng));
                    r = estimate_ratio(a, alpha, beta, ev, eps, ratio_trials, rng());
                    if (r.denominator.point * ratio_trials >= min_denominator_hits || attempt >= 50) break;
                    ++redraws;
                }
                ++cases;
                const double margin = r.ratio - (bound + ratio_sigmas * r.std_error);
                if (!(margin <= 0)) ++exceed;
                if (margin > worst_margin) {
                    worst_margin = margin;
                    worst = n + " eps=" + fmt(eps) + " ratio " + fmt(r.ratio, 5) + " +- " + fmt(r.std_error, 3) +
                            " vs e^(D eps) = " + fmt(bound, 5);
                }
            }
        }
    }
    report(5, "Statistical sufficiency", exceed == 0,
           std::to_string(cases - exceed) + "/" + std::to_string(cases) + " pairs within e^(D eps) + 3 se (" +
               std::to_string(redraws) + " events redrawn for < " + std::to_string(min_denominator_hits) +
               " denominator hits); closest: " + worst);
}

void criterion_necessity() {
    bool monotone = true, exceeds = true;
    std::string detail;
    for (const char* n : {"lc-example", "dc-example", "num-range-1", "two-range-1"}) {
        auto a = gen(n);
        auto v = check_well_formed(a);
        if (!v) {
            monotone = false;
            detail += std::string(n) + " reported well-formed; ";
            continue;
        }
        double prev = -std::numeric_limits<double>::infinity(), prev_se = 0;
        detail += std::string(n) + ":";
        for (int ell : {1, 2, 4, 8}) {
            auto w = gen_witness(a, *v, ell);
            auto r = estimate_ratio(a, w.alpha, w.beta, w.event, necessity_eps, necessity_trials, default_seed(), {},
                                    true);
            detail += " " + fmt(r.log_ratio, 5) + "+-" + fmt(r.log_se, 2);
            if (std::isfinite(prev) && !(r.log_ratio - prev >= -monotone_sigmas * std::hypot(r.log_se, prev_se)))
                monotone = false;
            prev = r.log_ratio;
            prev_se = r.log_se;
            const bool required = std::string(n) == "dc-example" || std::string(n) == "num-range-1";
            if (ell == 8 && required && !(r.log_ratio > 2 * necessity_eps)) exceeds = false;
        }
        detail += "; ";
    }
    report(6, "Statistical necessity", monotone && exceeds,
           std::string("monotone: ") + (monotone ? "yes" : "no") + ", DC and NR1 exceed 2 eps = " +
               fmt(2 * necessity_eps) + " at ell = 8: " + (exceeds ? "yes" : "no") + "; log-ratios " + detail);
}

DipAutomaton one_step() {
    return Builder{}.input("q", 1, 0).input("end", 1, 0).init("q").trans("q", "end", "true", "insample").build();
}

void criterion_calibration() {
    int checks = 0, ok = 0;
    double worst = 0;
    auto check = [&](const Estimate& e, double truth) {
        ++checks;
        const double z = std::abs(e.point - truth) / e.std_error;
        worst = std::max(worst, z);
        ok += z <= calibration_sigmas;
    };

    // Laplace moments: mean, median and variance of Lap(k = 2, mu = 1).
    {
        const long long n = calibration_trials;
        double s = 0, s2 = 0, below = 0;
        for (long long i = 0; i < n; ++i) {
            PhiloxStream rng(31, static_cast<std::uint64_t>(i), 7);
            const double x = sample_laplace(2, 1, rng);
            s += x;
            s2 += (x - 1) * (x - 1);
            below += x < 1;
        }
        auto est = [&](double point, double var) {
            return Estimate{point, n, std::sqrt(var / static_cast<double>(n)), 0};
        };
        check(est(s / n, 0.5), 1);                      // Var X = 2 / k^2
        check(est(below / n, 0.25), 0.5);               // median at mu
        check(est(s2 / n, 24.0 / 16 - 0.25), 0.5);      // Var (X - mu)^2 = 24 / k^4 - (2 / k^2)^2
    }

    // Single-step events.
    auto a = one_step();
    for (double eps : {0.5, 2.0}) {
        check(estimate_prob(a, {Rational(0)}, {Interval{Rational(0), std::nullopt}}, eps, calibration_trials, 41), 0.5);
        check(estimate_prob(a, {Rational(1, 2)}, {Interval{Rational(-1, 4), Rational(2)}}, eps, calibration_trials, 42),
              oracle::lap_cdf(eps, 0.5, 2) - oracle::lap_cdf(eps, 0.5, -0.25));
    }

    // Two- and three-step SVT events against quadrature.
    auto svt = corpus::svt();
    const double eps = 1, kT = eps / 4, kq = eps / 2;
    const InputItem tau = std::nullopt;
    check(estimate_prob(svt, {tau, Rational(0)}, {"bot", "bot"}, eps, calibration_trials, 43),
          oracle::integrate([&](double t) { return oracle::lap_pdf(kT, 0, t) * oracle::lap_cdf(kq, 0, t); }));
    check(estimate_prob(svt, {tau, Rational(0), Rational(0)}, {"bot", "bot", "top"}, eps, calibration_trials, 44),
          oracle::integrate([&](double t) {
              const double f = oracle::lap_cdf(kq, 0, t);
              return oracle::lap_pdf(kT, 0, t) * f * (1 - f);
          }));
    auto ns = corpus::num_sparse();
    check(estimate_prob(ns, {tau, Rational(0)}, {"bot", Interval{Rational(1, 2), std::nullopt}}, eps,
                        calibration_trials, 45),
          0.5 * (1 - oracle::lap_cdf(kq, 0, 0.5)));

    report(7, "Simulator calibration", ok == checks,
           std::to_string(ok) + "/" + std::to_string(checks) + " within " + fmt(calibration_sigmas) +
               " sigma, worst " + fmt(worst) + " sigma");
}

std::pair<int, std::string> run_cli(const std::string& args) {
    const std::string cmd = std::string(DIPA_CLI_PATH) + " " + args + " 2>/dev/null";
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, out};
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

void criterion_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("dipa_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    int checks = 0, identical = 0;
    auto same = [&](const std::string& args) {
        auto a = run_cli(args), b = run_cli(args);
        ++checks;
        identical += a == b && !a.second.empty();
    };
    for (const char* n : {"svt", "num-sparse", "dc-example", "num-range-1", "lc-example", "two-range-1", "nwf",
                          "leakp", "range"}) {
        const auto path = (dir / (std::string(n) + ".dipa")).string();
        run_cli(std::string("gen ") + n + " -o " + path);
        same("check " + path);
        same("check --ell 2 " + path);
    }
    const auto svt = (dir / "svt.dipa").string();
    same("simulate " + svt + " --epsilon 1 --trials 100000 --seed 5 --inputs=tau,0,1,-1 --event=@bot,@bot,@bot,@top");
    same("simulate " + svt + " --epsilon 1 --trials 100000 --seed 5 --guided --inputs=tau,0,1,-1 "
                             "--event=@bot,@bot,@bot,@top");
    const auto ns = (dir / "num-sparse.dipa").string();
    same("simulate " + ns + " --epsilon 2 --trials 100000 --seed 6 --inputs=tau,0,1/2 --event=@bot,@bot,0..inf");
    fs::remove_all(dir);
    report(8, "Determinism", identical == checks,
           std::to_string(identical) + "/" + std::to_string(checks) + " repeated invocations byte-identical");
}

}  // namespace

int main() {
    std::cout << std::unitbuf;
    const auto t0 = std::chrono::steady_clock::now();
    criterion_table();
    criterion_scaling();
    criterion_oracle();
    criterion_augmentation();
    criterion_sufficiency();
    criterion_necessity();
    criterion_calibration();
    criterion_determinism();
    std::cout << (failures ? "FAILED" : "ALL PASSED") << " (" << failures << " failing, " << fmt(seconds_since(t0))
              << " s)" << std::endl;
    return failures ? 1 : 0;
}
