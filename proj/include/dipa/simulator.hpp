#pragma once

#include "dipa/error.hpp"
#include "dipa/model.hpp"
#include "dipa/rational.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace dipa {

// ---------------------------------------------------------------------------
// Philox4x32-10 (Salmon et al., SC'11).  Trial i of a run with seed s reads
// the counter block (block, stream, i) under key s, so every trial has its
// own substream independent of scheduling.

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{m0} * c[0];
        const std::uint64_t p1 = std::uint64_t{m1} * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        k[0] += w0;
        k[1] += w1;
    }
    return c;
}

}  // namespace detail

class PhiloxStream {
public:
    using result_type = std::uint32_t;

    PhiloxStream(std::uint64_t seed, std::uint64_t trial, std::uint32_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          trial_(trial),
          stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (used_ == 4) {
            buf_ = detail::philox4x32_10(
                {block_++, stream_, static_cast<std::uint32_t>(trial_), static_cast<std::uint32_t>(trial_ >> 32)},
                key_);
            used_ = 0;
        }
        return buf_[used_++];
    }

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() {
        const std::uint64_t hi = (*this)() >> 5;  // 27 bits
        const std::uint64_t lo = (*this)() >> 6;  // 26 bits
        return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t trial_;
    std::uint32_t stream_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
};

// ---------------------------------------------------------------------------
// Laplace with density (k/2) exp(-k |x - mu|); k is the inverse scale.

inline void require_positive_scale(double k) {
    if (!(k > 0) || !std::isfinite(k)) throw InvalidInput("Laplace scale factor must be positive, got " + std::to_string(k));
}

[[nodiscard]] inline double laplace_cdf(double k, double mu, double x) {
    const double t = x - mu;
    return t < 0 ? 0.5 * std::exp(k * t) : 1 - 0.5 * std::exp(-k * t);
}

// P[X > x], computed without cancellation in the upper tail.
[[nodiscard]] inline double laplace_sf(double k, double mu, double x) {
    const double t = x - mu;
    return t >= 0 ? 0.5 * std::exp(-k * t) : 1 - 0.5 * std::exp(k * t);
}

// P[lo <= X < hi]; infinities allowed.
[[nodiscard]] inline double laplace_mass(double k, double mu, double lo, double hi) {
    if (!(lo < hi)) return 0;
    if (lo >= mu) return laplace_sf(k, mu, lo) - laplace_sf(k, mu, hi);
    if (hi <= mu) return laplace_cdf(k, mu, hi) - laplace_cdf(k, mu, lo);
    return 1 - laplace_cdf(k, mu, lo) - laplace_sf(k, mu, hi);
}

[[nodiscard]] inline double sample_laplace(double k, double mu, PhiloxStream& rng) {
    require_positive_scale(k);
    const double v = rng.uniform() - 0.5;
    const double m = std::log1p(-2 * std::abs(v)) / k;
    return v < 0 ? mu + m : mu - m;
}

// X conditioned on lo <= X < hi, by inverting the branch of the CDF that
// stays accurate on the interval.
[[nodiscard]] inline double sample_laplace_truncated(double k, double mu, double lo, double hi, PhiloxStream& rng) {
    const double u = rng.uniform();
    double x;
    if (lo >= mu) {
        const double s = laplace_sf(k, mu, lo) - u * (laplace_sf(k, mu, lo) - laplace_sf(k, mu, hi));
        x = mu - std::log(2 * s) / k;
    } else if (hi <= mu) {
        const double f = laplace_cdf(k, mu, lo) + u * (laplace_cdf(k, mu, hi) - laplace_cdf(k, mu, lo));
        x = mu + std::log(2 * f) / k;
    } else {
        const double f = laplace_cdf(k, mu, lo) + u * laplace_mass(k, mu, lo, hi);
        x = f < 0.5 ? mu + std::log(2 * f) / k : mu - std::log(2 * (1 - f)) / k;
    }
    return std::clamp(x, lo, std::nextafter(hi, lo));
}

// ---------------------------------------------------------------------------
// Trials.

using OutputValue = std::variant<std::string, double>;

struct TrialOutcome {
    Run run;
    std::vector<OutputValue> outputs;
    bool terminated_early = false;
};

namespace detail {

// The automaton flattened for the inner loop, with epsilon folded in.
struct SimModel {
    struct Trans {
        int trg = 0;
        std::vector<GuardAtom> atoms;
        Output::Kind out = Output::Kind::symbol;
        int symbol = -1;  // index into the automaton's alphabet
        std::vector<int> assign;
    };
    struct St {
        bool input = false;
        double k = 0, mu = 0, kp = 0, mup = 0;
        std::vector<int> out;  // transition ids
    };
    std::vector<St> states;
    std::vector<Trans> trans;
    int init = 0;
    std::size_t vars = 0;

    SimModel(const DipAutomaton& a, double epsilon) : init(a.init), vars(a.num_vars()) {
        if (!(epsilon > 0)) throw InvalidInput("epsilon must be positive");
        for (const auto& s : a.states)
            states.push_back({s.kind == StateKind::input, to_double(s.params.d) * epsilon, to_double(s.params.mu),
                              to_double(s.params.d_prime) * epsilon, to_double(s.params.mu_prime), {}});
        for (std::size_t t = 0; t < a.transitions.size(); ++t) {
            const auto& tr = a.transitions[t];
            Trans x{tr.trg, tr.guard.atoms, tr.output.kind, -1, {}};
            if (tr.output.kind == Output::Kind::symbol) {
                auto it = std::lower_bound(a.alphabet.begin(), a.alphabet.end(), tr.output.symbol);
                x.symbol = it != a.alphabet.end() && *it == tr.output.symbol ? static_cast<int>(it - a.alphabet.begin())
                                                                              : -1;
            }
            for (std::size_t v = 0; v < tr.assign.size(); ++v)
                if (tr.assign[v]) x.assign.push_back(static_cast<int>(v));
            trans.push_back(std::move(x));
            states[tr.src].out.push_back(static_cast<int>(t));
        }
    }

    [[nodiscard]] bool enabled(const Trans& t, double x, const std::vector<double>& store) const {
        for (const auto& g : t.atoms)
            if (g.rel == Rel::ge ? !(x >= store[g.var]) : !(x < store[g.var])) return false;
        return true;
    }
};

// Event item compiled against the alphabet: symbol id, or an interval.
struct SimEvent {
    bool real = false;
    int symbol = -1;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

inline std::vector<SimEvent> compile_event(const DipAutomaton& a, const OutputEvent& ev) {
    std::vector<SimEvent> out;
    for (const auto& item : ev) {
        SimEvent e;
        if (const auto* s = std::get_if<std::string>(&item)) {
            auto it = std::lower_bound(a.alphabet.begin(), a.alphabet.end(), *s);
            e.symbol = it != a.alphabet.end() && *it == *s ? static_cast<int>(it - a.alphabet.begin()) : -2;
        } else {
            const auto& iv = std::get<Interval>(item);
            e.real = true;
            if (iv.lo) e.lo = to_double(*iv.lo);
            if (iv.hi) e.hi = to_double(*iv.hi);
        }
        out.push_back(e);
    }
    return out;
}

// Real outputs match open intervals (lo, hi); the endpoints carry
// probability zero.
inline bool in_interval(const SimEvent& e, double v) { return e.lo < v && v < e.hi; }

inline std::vector<double> input_values(const InputSequence& in) {
    std::vector<double> v;
    for (const auto& i : in) v.push_back(i ? to_double(*i) : 0.0);
    return v;
}

inline void check_kind(const SimModel& m, int q, const InputItem& item, std::size_t pos) {
    if (m.states[q].input != item.has_value())
        throw InvalidInput("input position " + std::to_string(pos) + (item ? " is a real but the state is non-input"
                                                                              : " is tau but the state reads input"));
}

// One forward trial; returns whether the outputs matched `ev` (when given).
// With `out` null and an event, stops at the first mismatch.
inline bool run_trial(const SimModel& m, const InputSequence& in, const std::vector<double>& vals,
                      const std::vector<SimEvent>* ev, std::vector<double>& store, PhiloxStream& rng,
                      TrialOutcome* out) {
    int q = m.init;
    bool match = ev == nullptr || ev->size() == in.size();
    if (!match && out == nullptr) return false;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto& st = m.states[q];
        check_kind(m, q, in[i], i);
        const double shift = in[i] ? vals[i] : 0.0;
        const double x = sample_laplace(st.k, st.mu + shift, rng);
        int hit = -1;
        for (int t : st.out)
            if (m.enabled(m.trans[t], x, store)) {
                hit = t;
                break;
            }
        if (hit < 0) {
            if (out) out->terminated_early = true;
            return false;
        }
        const auto& tr = m.trans[hit];
        double value = 0;
        if (tr.out == Output::Kind::real_sample) value = x;
        if (tr.out == Output::Kind::real_fresh_sample) value = sample_laplace(st.kp, st.mup + shift, rng);
        if (match && ev) {
            const auto& e = (*ev)[i];
            if (tr.out == Output::Kind::symbol) match = !e.real && e.symbol == tr.symbol;
            else match = e.real && in_interval(e, value);
            if (!match && out == nullptr) return false;
        }
        if (out) {
            out->run.push_back(hit);
            if (tr.out == Output::Kind::symbol) out->outputs.emplace_back(std::string());
            else out->outputs.emplace_back(value);
        }
        for (int v : tr.assign) store[v] = x;
        q = tr.trg;
    }
    return match;
}

}  // namespace detail

// One execution on `inputs`.  `eta` is the initial store (zeros when
// empty).  Throws InvalidInput when a tau meets an input state or a real
// meets a non-input state.
[[nodiscard]] inline TrialOutcome simulate_trial(const DipAutomaton& a, const InputSequence& inputs, double epsilon,
                                                 const std::vector<double>& eta, PhiloxStream& rng) {
    detail::SimModel m(a, epsilon);
    std::vector<double> store = eta;
    store.resize(a.num_vars(), 0.0);
    TrialOutcome out;
    auto vals = detail::input_values(inputs);
    (void)detail::run_trial(m, inputs, vals, nullptr, store, rng, &out);
    for (std::size_t i = 0; i < out.run.size(); ++i)
        if (const auto& t = a.transitions[out.run[i]]; t.output.kind == Output::Kind::symbol)
            out.outputs[i] = t.output.symbol;
    return out;
}

// ---------------------------------------------------------------------------
// Estimates.

struct Estimate {
    double point = 0;
    long long trials = 0;
    double std_error = 0;
    double ci_halfwidth = 0;  // z * std_error
};

struct SimOptions {
    unsigned threads = 0;  // 0: hardware concurrency
    double z = 1.96;
    std::uint32_t stream = 0;
};

namespace detail {

inline constexpr long long chunk_trials = 4096;

// Sums f(trial) into per-chunk (sum, sum of squares) and adds the chunks in
// index order, so the result does not depend on the number of workers.
template <class F>
std::pair<double, double> parallel_moments(long long trials, unsigned threads, F&& f) {
    const long long chunks = (trials + chunk_trials - 1) / chunk_trials;
    std::vector<std::pair<double, double>> part(static_cast<std::size_t>(chunks));
    auto work = [&](long long c0, long long step) {
        for (long long c = c0; c < chunks; c += step) {
            double s = 0, s2 = 0;
            const long long hi = std::min(trials, (c + 1) * chunk_trials);
            for (long long i = c * chunk_trials; i < hi; ++i) {
                const double w = f(i);
                s += w;
                s2 += w * w;
            }
            part[static_cast<std::size_t>(c)] = {s, s2};
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<long long>(threads, std::max<long long>(1, chunks)));
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        for (auto& th : pool) th.join();
    }
    double s = 0, s2 = 0;
    for (const auto& [a, b] : part) {
        s += a;
        s2 += b;
    }
    return {s, s2};
}

inline Estimate make_estimate(double s, double s2, long long n, double z) {
    Estimate e;
    e.trials = n;
    e.point = s / static_cast<double>(n);
    const double var = std::max(0.0, s2 / static_cast<double>(n) - e.point * e.point);
    e.std_error = std::sqrt(var / static_cast<double>(n));
    e.ci_halfwidth = z * e.std_error;
    return e;
}

}  // namespace detail

// Frequency of trials whose outputs match `event`: symbols exactly, reals
// inside the event interval.
[[nodiscard]] inline Estimate estimate_prob(const DipAutomaton& a, const InputSequence& inputs,
                                            const OutputEvent& event, double epsilon, long long trials,
                                            std::uint64_t seed, const SimOptions& opt = {}) {
    if (trials < 1) throw InvalidInput("trials must be at least 1");
    detail::SimModel m(a, epsilon);
    const auto ev = detail::compile_event(a, event);
    const auto vals = detail::input_values(inputs);
    if (!inputs.empty()) detail::check_kind(m, m.init, inputs[0], 0);
    auto [s, s2] = detail::parallel_moments(trials, opt.threads, [&](long long i) {
        PhiloxStream rng(seed, static_cast<std::uint64_t>(i), opt.stream);
        std::vector<double> store(m.vars, 0.0);
        return detail::run_trial(m, inputs, vals, &ev, store, rng, nullptr) ? 1.0 : 0.0;
    });
    return detail::make_estimate(s, s2, trials, opt.z);
}

namespace detail {

// One sequential-importance-sampling trial along the transitions the event
// allows: at each step the sample is drawn conditioned on landing in one of
// the matching transitions' regions, and the weight collects the
// probability of that region set.  The expected weight is the event
// probability.
inline double guided_trial(const SimModel& m, const InputSequence& in, const std::vector<double>& vals,
                           const std::vector<SimEvent>& ev, std::vector<double>& store, PhiloxStream& rng) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (ev.size() != in.size()) return 0;
    int q = m.init;
    double w = 1;
    struct Cand {
        int t;
        double lo, hi, mass;
    };
    std::vector<Cand> cand;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto& st = m.states[q];
        check_kind(m, q, in[i], i);
        const double shift = in[i] ? vals[i] : 0.0;
        const double mu = st.mu + shift;
        const auto& e = ev[i];
        cand.clear();
        double total = 0;
        for (int t : st.out) {
            const auto& tr = m.trans[t];
            const bool real = tr.out != Output::Kind::symbol;
            if (real != e.real || (!real && tr.symbol != e.symbol)) continue;
            double lo = -inf, hi = inf;
            for (const auto& g : tr.atoms) {
                if (g.rel == Rel::ge) lo = std::max(lo, store[g.var]);
                else hi = std::min(hi, store[g.var]);
            }
            double extra = 1;
            if (tr.out == Output::Kind::real_sample) {
                // Open event interval; the boundary has probability zero.
                lo = std::max(lo, e.lo);
                hi = std::min(hi, e.hi);
            } else if (tr.out == Output::Kind::real_fresh_sample) {
                require_positive_scale(st.kp);
                extra = laplace_mass(st.kp, st.mup + shift, e.lo, e.hi);
            }
            require_positive_scale(st.k);
            const double mass = laplace_mass(st.k, mu, lo, hi) * extra;
            if (mass > 0) {
                cand.push_back({t, lo, hi, mass});
                total += mass;
            }
        }
        if (cand.empty() || !(total > 0)) return 0;
        w *= total;
        std::size_t pick = 0;
        if (cand.size() > 1) {
            double u = rng.uniform() * total;
            while (pick + 1 < cand.size() && u >= cand[pick].mass) u -= cand[pick++].mass;
        }
        const auto& c = cand[pick];
        const double x = sample_laplace_truncated(st.k, mu, c.lo, c.hi, rng);
        for (int v : m.trans[c.t].assign) store[v] = x;
        q = m.trans[c.t].trg;
    }
    return w;
}

}  // namespace detail

// Unbiased estimate of the same probability as estimate_prob with far lower
// variance on rare events; used where the target probability is below what
// plain counting can resolve.
[[nodiscard]] inline Estimate estimate_prob_guided(const DipAutomaton& a, const InputSequence& inputs,
                                                   const OutputEvent& event, double epsilon, long long trials,
                                                   std::uint64_t seed, const SimOptions& opt = {}) {
    if (trials < 1) throw InvalidInput("trials must be at least 1");
    detail::SimModel m(a, epsilon);
    const auto ev = detail::compile_event(a, event);
    const auto vals = detail::input_values(inputs);
    auto [s, s2] = detail::parallel_moments(trials, opt.threads, [&](long long i) {
        PhiloxStream rng(seed, static_cast<std::uint64_t>(i), opt.stream);
        std::vector<double> store(m.vars, 0.0);
        return detail::guided_trial(m, inputs, vals, ev, store, rng);
    });
    return detail::make_estimate(s, s2, trials, opt.z);
}

struct RatioEstimate {
    Estimate numerator;
    Estimate denominator;
    double ratio = 0;       // numerator / denominator (inf if the denominator is 0)
    double log_ratio = 0;
    double log_se = 0;      // delta-method standard error of log_ratio
    double std_error = 0;   // ratio * log_se
    double ci_low = 0;      // ratio * exp(-z * log_se)
    double ci_high = 0;
    bool denominator_ci_includes_zero = false;
};

// P[alpha -> event] / P[beta -> event].  The two sides use different
// substreams of the same seed.
[[nodiscard]] inline RatioEstimate estimate_ratio(const DipAutomaton& a, const InputSequence& alpha,
                                                  const InputSequence& beta, const OutputEvent& event,
                                                  double epsilon, long long trials, std::uint64_t seed,
                                                  const SimOptions& opt = {}, bool guided = false) {
    if (!adjacent(alpha, beta)) throw InvalidInput("estimate_ratio: input sequences are not adjacent");
    SimOptions oa = opt, ob = opt;
    oa.stream = 2 * opt.stream;
    ob.stream = 2 * opt.stream + 1;
    RatioEstimate r;
    r.numerator = guided ? estimate_prob_guided(a, alpha, event, epsilon, trials, seed, oa)
                         : estimate_prob(a, alpha, event, epsilon, trials, seed, oa);
    r.denominator = guided ? estimate_prob_guided(a, beta, event, epsilon, trials, seed, ob)
                           : estimate_prob(a, beta, event, epsilon, trials, seed, ob);
    const double p = r.numerator.point, q = r.denominator.point;
    r.denominator_ci_includes_zero = q - r.denominator.ci_halfwidth <= 0;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (q > 0 && p > 0) {
        r.ratio = p / q;
        r.log_ratio = std::log(r.ratio);
        const double rp = r.numerator.std_error / p, rq = r.denominator.std_error / q;
        r.log_se = std::sqrt(rp * rp + rq * rq);
    } else if (q > 0) {
        r.ratio = 0;
        r.log_ratio = -inf;
        r.log_se = inf;
    } else {
        r.ratio = p > 0 ? inf : std::numeric_limits<double>::quiet_NaN();
        r.log_ratio = p > 0 ? inf : std::numeric_limits<double>::quiet_NaN();
        r.log_se = inf;
    }
    r.std_error = std::isfinite(r.ratio) && std::isfinite(r.log_se) ? r.ratio * r.log_se : inf;
    r.ci_low = std::isfinite(r.log_se) ? r.ratio * std::exp(-opt.z * r.log_se) : 0;
    r.ci_high = std::isfinite(r.log_se) ? r.ratio * std::exp(opt.z * r.log_se) : inf;
    return r;
}

// Default simulation seed: DIPA_SEED when set and numeric.
[[nodiscard]] inline std::uint64_t default_seed() {
    if (const char* s = std::getenv("DIPA_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s, &end, 0);
        if (end && *end == '\0' && end != s) return v;
    }
    return 20240601;
}

}  // namespace dipa
