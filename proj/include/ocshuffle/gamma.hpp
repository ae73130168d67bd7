#pragma once

#include "chain.hpp"

#include <algorithm>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <utility>

namespace ocshuffle {

inline constexpr double pi = std::numbers::pi;

/// Distance from x to the nearest integer, in [0, 1/2].
inline double norm_dist(double x) { return std::abs(std::remainder(x, 1.0)); }

/// The representative of x modulo 2 lying in the half-open interval (-1, 1].
/// The boundary maps to +1: cmod2(1.0) == 1.0, cmod2(-1.0) == 1.0.
inline double cmod2(double x) { return x - 2.0 * std::ceil((x - 1.0) / 2.0); }

namespace detail {

/// Representative of v mod (2n) in (-n, n], computed purely in integers.
inline std::int64_t centered_mod_2n(std::int64_t v, std::int64_t n) {
    const std::int64_t two_n = 2 * n;
    std::int64_t r = v % two_n;
    if (r < 0) r += two_n;  // now in [0, 2n)
    if (r > n) r -= two_n;  // now in (-n, n]
    return r;
}

}  // namespace detail

/// One term of the analytic gap functional at index m.
/// value = pi^2 (k m^2 + r^2) / (2 n^3) where r is m(n-k) reduced mod 2n
/// into (-n, n]. `quad` carries the exact integer k m^2 + r^2; only the
/// final division is floating, so no norm cancellation occurs even at
/// n around 10^6.
struct GammaTerm {
    std::int64_t m;
    std::int64_t r;
    std::int64_t quad;
    double value;
};

inline GammaTerm gamma_term(const ShuffleParams& p, std::int64_t m) {
    if (m == 0) throw std::domain_error("gamma_term: index m must be nonzero");
    const std::int64_t two_n = 2 * p.n;
    std::int64_t mm = m % two_n;
    if (mm < 0) mm += two_n;
    const std::int64_t r = detail::centered_mod_2n(mm * (p.n - p.k), p.n);
    const __int128 quad_wide =
        static_cast<__int128>(p.k) * m * m + static_cast<__int128>(r) * r;
    if (quad_wide > static_cast<__int128>(INT64_MAX))
        throw std::overflow_error("gamma_term: k m^2 + r^2 exceeds 64-bit range");
    const std::int64_t quad = static_cast<std::int64_t>(quad_wide);
    const double dn = static_cast<double>(p.n);
    const double value = pi * pi * static_cast<double>(quad) / (2.0 * dn * dn * dn);
    return {m, r, quad, value};
}

/// Search bound for the exhaustive minimization: M = max(4, ceil(4 sqrt(n) /
/// k^(1/4))). Any global minimizer m~ satisfies k m~^2 <= 4 n sqrt(k)
/// (Dirichlet pigeonhole applied to (n-k)/(2n)), i.e. |m~| <= 2 sqrt(n) /
/// k^(1/4); the factor 4 is a safety margin of 2 on top of that.
inline std::int64_t gamma_search_bound(const ShuffleParams& p) {
    const double b = 4.0 * std::sqrt(static_cast<double>(p.n)) /
                     std::pow(static_cast<double>(p.k), 0.25);
    return std::max<std::int64_t>(4, static_cast<std::int64_t>(std::ceil(b)));
}

/// Minimum of gamma_term over nonzero m. By symmetry in m -> -m only
/// positive m are scanned; ties resolve to the smallest m.
struct GammaMin {
    std::int64_t m_star;
    std::int64_t r;
    std::int64_t quad;
    double value;
    std::int64_t search_bound;
};

inline GammaMin gamma_min(const ShuffleParams& p) {
    const std::int64_t bound = gamma_search_bound(p);
    GammaTerm best = gamma_term(p, 1);
    for (std::int64_t m = 2; m <= bound; ++m) {
        const GammaTerm t = gamma_term(p, m);
        if (t.quad < best.quad) best = t;
    }
    return {best.m, best.r, best.quad, best.value, bound};
}

/// Continued fraction expansion of a rational x = num/den in [0, 1), with
/// the full convergent table.
struct CFApprox {
    std::int64_t num = 0, den = 1;                                // reduced input
    std::vector<std::int64_t> quotients;                          // [a0; a1, ...]
    std::vector<std::pair<std::int64_t, std::int64_t>> convergents;  // (p_j, q_j)
};

inline CFApprox cf_expand(std::int64_t num, std::int64_t den) {
    if (den < 1 || num < 0 || num >= den)
        throw std::domain_error("cf_expand: need a rational in [0, 1)");
    const std::int64_t g = std::gcd(num, den);
    CFApprox cf;
    cf.num = num / g;
    cf.den = den / g;
    cf.quotients.push_back(0);
    cf.convergents.emplace_back(0, 1);
    // Euclid on the tail; standard recurrence p_j = a_j p_{j-1} + p_{j-2}.
    std::int64_t a = cf.num, b = cf.den;
    std::int64_t p_prev = 1, p_cur = 0, q_prev = 0, q_cur = 1;
    while (a != 0) {
        const std::int64_t quot = b / a;
        cf.quotients.push_back(quot);
        const std::int64_t p_next = quot * p_cur + p_prev;
        const std::int64_t q_next = quot * q_cur + q_prev;
        cf.convergents.emplace_back(p_next, q_next);
        p_prev = p_cur; p_cur = p_next;
        q_prev = q_cur; q_cur = q_next;
        const std::int64_t rem = b % a;
        b = a; a = rem;
    }
    return cf;
}

/// Same minimum as gamma_min but found through the continued fraction of
/// x = (n-k)/(2n): candidate m are the convergent denominators, their
/// doubles, and {1, 2}, capped at the search bound. Any m admits a
/// convergent denominator q_j <= m with ||q_j x|| <= ||m x|| (best
/// approximation), so both terms of gamma can only improve; the candidate
/// set therefore contains a global minimizer.
inline GammaMin gamma_min_cf(const ShuffleParams& p) {
    const std::int64_t bound = gamma_search_bound(p);
    const CFApprox cf = cf_expand(p.n - p.k, 2 * p.n);
    std::vector<std::int64_t> cand = {1, 2};
    for (const auto& [pj, qj] : cf.convergents) {
        (void)pj;
        if (qj <= bound) cand.push_back(qj);
        if (2 * qj <= bound) cand.push_back(2 * qj);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    GammaTerm best = gamma_term(p, cand.front());
    for (std::size_t i = 1; i < cand.size(); ++i) {
        const GammaTerm t = gamma_term(p, cand[i]);
        if (t.quad < best.quad) best = t;
    }
    return {best.m, best.r, best.quad, best.value, bound};
}

}  // namespace ocshuffle
