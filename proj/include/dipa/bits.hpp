#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace dipa {

namespace detail {
inline constexpr std::size_t words_for(std::size_t n) { return (n + 63) / 64; }

inline std::size_t hash_words(const std::uint64_t* w, std::size_t n, std::size_t seed) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t x = w[i] + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        seed ^= static_cast<std::size_t>(x);
    }
    return seed;
}
}  // namespace detail

// Fixed-universe bitset over variable indices.  The universe size is set at
// construction; all binary operations assume equal universes.
class VarSet {
public:
    VarSet() = default;
    explicit VarSet(std::size_t n) : n_(n), w_(detail::words_for(n), 0) {}

    [[nodiscard]] std::size_t universe() const { return n_; }
    [[nodiscard]] std::size_t words() const { return w_.size(); }
    [[nodiscard]] const std::uint64_t* data() const { return w_.data(); }
    [[nodiscard]] std::uint64_t* data() { return w_.data(); }

    void set(std::size_t i) { w_[i >> 6] |= (1ULL << (i & 63)); }
    void reset(std::size_t i) { w_[i >> 6] &= ~(1ULL << (i & 63)); }
    [[nodiscard]] bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1ULL; }

    [[nodiscard]] bool any() const {
        for (auto x : w_)
            if (x) return true;
        return false;
    }
    [[nodiscard]] bool none() const { return !any(); }
    [[nodiscard]] std::size_t count() const {
        std::size_t c = 0;
        for (auto x : w_) c += static_cast<std::size_t>(std::popcount(x));
        return c;
    }

    // Smallest member, or universe() when empty.
    [[nodiscard]] std::size_t first() const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(w_[k]));
        return n_;
    }

    [[nodiscard]] bool intersects(const VarSet& o) const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k] & o.w_[k]) return true;
        return false;
    }
    [[nodiscard]] bool subset_of(const VarSet& o) const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k] & ~o.w_[k]) return false;
        return true;
    }

    VarSet& operator|=(const VarSet& o) {
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] |= o.w_[k];
        return *this;
    }
    VarSet& operator&=(const VarSet& o) {
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= o.w_[k];
        return *this;
    }
    VarSet& subtract(const VarSet& o) {
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= ~o.w_[k];
        return *this;
    }
    void clear() {
        for (auto& x : w_) x = 0;
    }
    void fill() {
        for (std::size_t i = 0; i < n_; ++i) set(i);
    }

    friend VarSet operator|(VarSet a, const VarSet& b) { return a |= b; }
    friend VarSet operator&(VarSet a, const VarSet& b) { return a &= b; }
    friend VarSet operator-(VarSet a, const VarSet& b) { return a.subtract(b); }
    friend bool operator==(const VarSet&, const VarSet&) = default;

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t k = 0; k < w_.size(); ++k) {
            std::uint64_t x = w_[k];
            while (x) {
                f(k * 64 + static_cast<std::size_t>(std::countr_zero(x)));
                x &= x - 1;
            }
        }
    }

    [[nodiscard]] std::vector<int> members() const {
        std::vector<int> out;
        for_each([&](std::size_t i) { out.push_back(static_cast<int>(i)); });
        return out;
    }

    [[nodiscard]] std::size_t hash() const { return detail::hash_words(w_.data(), w_.size(), n_); }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

// Square boolean matrix over variable indices, stored row-major with
// ceil(n/64) words per row.  Row i holds { j : (i, j) in R }.
class BitMatrix {
public:
    BitMatrix() = default;
    explicit BitMatrix(std::size_t n) : n_(n), wpr_(detail::words_for(n)), d_(n * detail::words_for(n), 0) {}

    static BitMatrix identity(std::size_t n) {
        BitMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i);
        return m;
    }

    [[nodiscard]] std::size_t size() const { return n_; }

    [[nodiscard]] bool test(std::size_t i, std::size_t j) const {
        return (d_[i * wpr_ + (j >> 6)] >> (j & 63)) & 1ULL;
    }
    void set(std::size_t i, std::size_t j) { d_[i * wpr_ + (j >> 6)] |= (1ULL << (j & 63)); }
    void reset(std::size_t i, std::size_t j) { d_[i * wpr_ + (j >> 6)] &= ~(1ULL << (j & 63)); }

    [[nodiscard]] VarSet row(std::size_t i) const {
        VarSet s(n_);
        for (std::size_t k = 0; k < wpr_; ++k) s.data()[k] = d_[i * wpr_ + k];
        return s;
    }
    [[nodiscard]] VarSet col(std::size_t j) const {
        VarSet s(n_);
        for (std::size_t i = 0; i < n_; ++i)
            if (test(i, j)) s.set(i);
        return s;
    }
    void or_row(std::size_t i, const VarSet& s) {
        for (std::size_t k = 0; k < wpr_; ++k) d_[i * wpr_ + k] |= s.data()[k];
    }
    void and_row(std::size_t i, const VarSet& s) {
        for (std::size_t k = 0; k < wpr_; ++k) d_[i * wpr_ + k] &= s.data()[k];
    }
    void clear_row(std::size_t i) {
        for (std::size_t k = 0; k < wpr_; ++k) d_[i * wpr_ + k] = 0;
    }
    [[nodiscard]] bool row_intersects(std::size_t i, const VarSet& s) const {
        for (std::size_t k = 0; k < wpr_; ++k)
            if (d_[i * wpr_ + k] & s.data()[k]) return true;
        return false;
    }
    [[nodiscard]] bool row_any(std::size_t i) const {
        for (std::size_t k = 0; k < wpr_; ++k)
            if (d_[i * wpr_ + k]) return true;
        return false;
    }

    [[nodiscard]] bool empty() const {
        for (auto x : d_)
            if (x) return false;
        return true;
    }
    [[nodiscard]] bool intersects(const BitMatrix& o) const {
        for (std::size_t k = 0; k < d_.size(); ++k)
            if (d_[k] & o.d_[k]) return true;
        return false;
    }
    BitMatrix& operator|=(const BitMatrix& o) {
        for (std::size_t k = 0; k < d_.size(); ++k) d_[k] |= o.d_[k];
        return *this;
    }
    BitMatrix& subtract(const BitMatrix& o) {
        for (std::size_t k = 0; k < d_.size(); ++k) d_[k] &= ~o.d_[k];
        return *this;
    }
    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

    // Warshall closure, in place: afterwards R = R^+.
    void transitive_closure() {
        for (std::size_t k = 0; k < n_; ++k) {
            const std::uint64_t* rk = &d_[k * wpr_];
            for (std::size_t i = 0; i < n_; ++i) {
                if (!test(i, k)) continue;
                std::uint64_t* ri = &d_[i * wpr_];
                for (std::size_t w = 0; w < wpr_; ++w) ri[w] |= rk[w];
            }
        }
    }

    [[nodiscard]] std::size_t hash(std::size_t seed = 0) const {
        return detail::hash_words(d_.data(), d_.size(), seed ^ n_);
    }

private:
    std::size_t n_ = 0;
    std::size_t wpr_ = 0;
    std::vector<std::uint64_t> d_;
};

}  // namespace dipa
