#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace ocshuffle {

using cplx = std::complex<double>;

/// One instance of the overlapping-cycles shuffle: a deck of n cards is mixed
/// by moving, with probability 1/2 each, the card at position n or the card
/// at position n-k to the top. Positions are 1-based throughout.
struct ShuffleParams {
    std::int64_t n;  ///< deck size, n >= 2
    std::int64_t k;  ///< overlap parameter, 1 <= k <= n-1

    ShuffleParams(std::int64_t n_, std::int64_t k_) : n(n_), k(k_) {
        if (n < 2)
            throw std::domain_error("ShuffleParams: deck size n must be >= 2");
        if (k < 1 || k >= n)
            throw std::domain_error("ShuffleParams: need 1 <= k <= n-1");
    }
};

/// Distribution of a single card's position. probs[i-1] is the mass at
/// position i.
struct DistVector {
    std::vector<double> probs;

    double at(std::int64_t position) const {
        return probs.at(static_cast<std::size_t>(position - 1));
    }
};

inline DistVector point_mass(std::int64_t n, std::int64_t position) {
    if (n < 1 || position < 1 || position > n)
        throw std::domain_error("point_mass: position out of range");
    DistVector d;
    d.probs.assign(static_cast<std::size_t>(n), 0.0);
    d.probs[static_cast<std::size_t>(position - 1)] = 1.0;
    return d;
}

inline DistVector uniform_dist(std::int64_t n) {
    if (n < 1) throw std::domain_error("uniform_dist: n must be >= 1");
    DistVector d;
    d.probs.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    return d;
}

/// Entries nonnegative and summing to 1 within 1e-12.
inline bool is_valid_distribution(const DistVector& d) {
    double s = 0.0;
    for (double v : d.probs) {
        if (v < 0.0) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= 1e-12;
}

/// Law of the next position of the card currently at position i:
///   i in [1, n-k-1]  -> i+1 surely (both cycles shift it down)
///   i = n-k          -> 1 or n-k+1, probability 1/2 each
///   i in [n-k+1, n-1]-> i or i+1, probability 1/2 each
///   i = n            -> 1 or n, probability 1/2 each
inline std::map<std::int64_t, double> transition_distribution(const ShuffleParams& p,
                                                              std::int64_t i) {
    if (i < 1 || i > p.n)
        throw std::domain_error("transition_distribution: position out of range");
    const std::int64_t cut = p.n - p.k;
    std::map<std::int64_t, double> law;
    if (i < cut) {
        law[i + 1] = 1.0;
    } else if (i == cut) {
        law[1] = 0.5;
        law[cut + 1] = 0.5;
    } else if (i < p.n) {
        law[i] = 0.5;
        law[i + 1] = 0.5;
    } else {
        law[1] = 0.5;
        law[p.n] = 0.5;
    }
    return law;
}

/// Row-stochastic single-card transition matrix, at(i,j) = Pr(i -> j).
/// Average of two cycle permutation matrices, hence doubly stochastic with
/// trace k/2 for k <= n-2 (positions n-k+1..n-1 and n each hold mass 1/2).
/// At k = n-1 the short cycle is the identity and position 1 adds one more
/// 1/2, giving trace (k+1)/2.
struct TransitionMatrix {
    std::int64_t n = 0;
    std::vector<double> p;  // row-major, n*n

    double at(std::int64_t i, std::int64_t j) const {
        if (i < 1 || i > n || j < 1 || j > n)
            throw std::domain_error("TransitionMatrix::at: index out of range");
        return p[static_cast<std::size_t>((i - 1) * n + (j - 1))];
    }
};

inline TransitionMatrix build_matrix(const ShuffleParams& params) {
    TransitionMatrix mat;
    mat.n = params.n;
    mat.p.assign(static_cast<std::size_t>(params.n * params.n), 0.0);
    for (std::int64_t i = 1; i <= params.n; ++i)
        for (const auto& [j, pr] : transition_distribution(params, i))
            mat.p[static_cast<std::size_t>((i - 1) * params.n + (j - 1))] = pr;
    return mat;
}

/// Push a distribution forward `steps` shuffles. Uses the O(n)-per-step
/// update (the two preimage cycles), equivalent to multiplying by the dense
/// matrix:
///   new[1] = (d[n] + d[n-k]) / 2
///   new[j] = d[j-1]                      for 2 <= j <= n-k
///   new[j] = (d[j-1] + d[j]) / 2         for n-k+1 <= j <= n
inline DistVector evolve(const ShuffleParams& p, const DistVector& d, std::int64_t steps) {
    if (steps < 0) throw std::domain_error("evolve: steps must be >= 0");
    if (static_cast<std::int64_t>(d.probs.size()) != p.n)
        throw std::domain_error("evolve: distribution size does not match n");
    const std::size_t n = static_cast<std::size_t>(p.n);
    const std::size_t cut = static_cast<std::size_t>(p.n - p.k);
    std::vector<double> cur = d.probs, next(n);
    for (std::int64_t t = 0; t < steps; ++t) {
        next[0] = 0.5 * (cur[n - 1] + cur[cut - 1]);
        for (std::size_t j = 2; j <= cut; ++j) next[j - 1] = cur[j - 2];
        for (std::size_t j = cut + 1; j <= n; ++j) next[j - 1] = 0.5 * (cur[j - 2] + cur[j - 1]);
        cur.swap(next);
    }
    DistVector out;
    out.probs = std::move(cur);
    return out;
}

namespace detail {

/// z^p for integer p >= 0, evaluated as exp(p log z) so that huge exponents
/// neither lose accuracy to repeated rounding nor walk through denormals.
/// Real inputs are special-cased to keep the result exactly real.
inline cplx pow_int(cplx z, std::int64_t p) {
    if (p == 0) return {1.0, 0.0};
    if (z.imag() == 0.0) {
        double r = std::pow(std::abs(z.real()), static_cast<double>(p));
        if (z.real() < 0.0 && (p & 1)) r = -r;
        return {r, 0.0};
    }
    return std::exp(static_cast<double>(p) * std::log(z));
}

}  // namespace detail

/// Scaled characteristic function of the single-card chain,
///   g(l) = (2 l^{n-k} - 1)(2 l - 1)^k - 1,
/// i.e. 2^{k+1} times the characteristic polynomial. Eigenvalues are exactly
/// the roots of g; g(1) = 0 always.
inline cplx char_fn(const ShuffleParams& p, cplx lambda) {
    const cplx A = 2.0 * detail::pow_int(lambda, p.n - p.k) - 1.0;
    const cplx B = detail::pow_int(2.0 * lambda - 1.0, p.k);
    return A * B - 1.0;
}

/// Derivative of char_fn:
///   g'(l) = 2(n-k) l^{n-k-1} (2l-1)^k + 2k (2 l^{n-k} - 1)(2l-1)^{k-1}.
/// At l = 1 this equals 2n, so the unit eigenvalue is always simple.
inline cplx char_fn_deriv(const ShuffleParams& p, cplx lambda) {
    const cplx A = 2.0 * detail::pow_int(lambda, p.n - p.k) - 1.0;
    const cplx t1 = 2.0 * static_cast<double>(p.n - p.k) *
                    detail::pow_int(lambda, p.n - p.k - 1) *
                    detail::pow_int(2.0 * lambda - 1.0, p.k);
    const cplx t2 = 2.0 * static_cast<double>(p.k) * A *
                    detail::pow_int(2.0 * lambda - 1.0, p.k - 1);
    return t1 + t2;
}

}  // namespace ocshuffle
