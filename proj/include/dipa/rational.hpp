#pragma once

#include <boost/rational.hpp>

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dipa {

using Rational = boost::rational<std::int64_t>;

// Canonical "p/q" text; integers are still written with a denominator so the
// form is uniform in reports.
[[nodiscard]] inline std::string to_string(const Rational& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Shorter form for human-facing text ("2" rather than "2/1").
[[nodiscard]] inline std::string to_short_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return to_string(r);
}

[[nodiscard]] inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

namespace detail {

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace detail

// Accepts "p", "p/q" and finite decimals such as "-0.25".  Decimals are
// converted exactly.
[[nodiscard]] inline std::optional<Rational> parse_rational(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;

    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto p = detail::parse_int(s.substr(0, slash));
        auto q = detail::parse_int(s.substr(slash + 1));
        if (!p || !q || *q == 0) return std::nullopt;
        return Rational(*p, *q);
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        std::string_view ip = s.substr(0, dot);
        std::string_view fp = s.substr(dot + 1);
        if (fp.empty() || fp.size() > 15) return std::nullopt;
        for (char c : fp)
            if (c < '0' || c > '9') return std::nullopt;
        bool neg = !ip.empty() && ip.front() == '-';
        if (neg) ip.remove_prefix(1);
        std::int64_t whole = 0;
        if (!ip.empty()) {
            auto w = detail::parse_int(ip);
            if (!w || *w < 0) return std::nullopt;
            whole = *w;
        }
        std::int64_t den = 1;
        for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
        auto frac = detail::parse_int(fp);
        if (!frac) return std::nullopt;
        Rational r(whole * den + *frac, den);
        return neg ? -r : r;
    }
    auto p = detail::parse_int(s);
    if (!p) return std::nullopt;
    return Rational(*p);
}

}  // namespace dipa
