#pragma once

#include "gamma.hpp"

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ocshuffle {

/// Which seed produced an eigenvalue. near_one carries the frequency index m
/// (m = 0 is the unit eigenvalue itself), the circle families carry the
/// root index j, oracle marks values recovered by the simultaneous solver.
enum class SeedKind { near_one, inner_circle, outer_circle, oracle };

struct SeedFamily {
    SeedKind kind = SeedKind::oracle;
    std::int64_t index = 0;
};

inline std::string to_string(const SeedFamily& f) {
    switch (f.kind) {
        case SeedKind::near_one: return "near_one(" + std::to_string(f.index) + ")";
        case SeedKind::inner_circle: return "inner_circle(" + std::to_string(f.index) + ")";
        case SeedKind::outer_circle: return "outer_circle(" + std::to_string(f.index) + ")";
        default: return "oracle";
    }
}

/// Eigenvalue in polar-exponential coordinates lambda = exp(-eps + i pi a),
/// -1 < a <= 1, together with b in (-1, 1] such that
/// lambda^{n-k} = exp(-(n-k) eps + i pi b); b is (n-k) a reduced mod 2.
struct PolarEigen {
    cplx lambda;
    double eps = 0.0;       ///< -ln|lambda|
    double a = 0.0;         ///< arg(lambda)/pi
    double b = 0.0;         ///< cmod2((n-k) a)
    double residual = 0.0;  ///< size of the last accepted Newton correction
    SeedFamily family;
};

inline PolarEigen make_polar_eigen(const ShuffleParams& p, cplx lambda, double residual,
                                   SeedFamily family) {
    PolarEigen e;
    e.lambda = lambda;
    e.eps = -std::log(std::abs(lambda)) + 0.0;  // +0.0 turns -0 into 0
    e.a = std::arg(lambda) / pi;
    e.b = cmod2(static_cast<double>(p.n - p.k) * e.a);
    e.residual = residual;
    e.family = family;
    return e;
}

/// Eigenvalue collection. eigs.size() may fall short of n_expected when only
/// seeded Newton ran (n above the oracle limit) and some seeds failed or
/// collided.
struct Spectrum {
    std::vector<PolarEigen> eigs;
    std::int64_t n_expected = 0;
    std::int64_t newton_failures = 0;
    bool oracle_used = false;
};

namespace detail {

/// Newton correction g/g' for the scaled characteristic function
///   g(l) = (2 l^{n-k} - 1)(2l - 1)^k - 1.
/// Evaluated with (2l-1)^k divided out,
///   g/g' = (A - B^{-1}) / (A' + 2k A/(2l-1)),   A = 2 l^{n-k} - 1,
/// which stays bounded where the plain form overflows for k in the hundreds.
/// Real inputs keep a real correction. May return non-finite values (l = 1/2,
/// vanishing derivative); callers must check.
inline cplx newton_correction(const ShuffleParams& p, cplx l) {
    const std::int64_t c = p.n - p.k;
    const cplx A = 2.0 * pow_int(l, c) - 1.0;
    const cplx Ad = 2.0 * static_cast<double>(c) * pow_int(l, c - 1);
    const cplx t = 2.0 * l - 1.0;
    cplx Binv;
    if (l.imag() == 0.0) {
        double r = std::pow(std::abs(t.real()), -static_cast<double>(p.k));
        if (t.real() < 0.0 && (p.k & 1)) r = -r;
        Binv = {r, 0.0};
    } else {
        Binv = std::exp(-static_cast<double>(p.k) * std::log(t));
    }
    return (A - Binv) / (Ad + 2.0 * static_cast<double>(p.k) * A / t);
}

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace detail

/// Newton iteration on the characteristic function from the given seed.
/// Convergence is measured by the correction size |g/g'|; |g| itself scales
/// like 2^k and means nothing across k. Stops when the correction drops
/// below 1e-13 max(1, |l|), gives up after 50 iterations or on a non-finite
/// step (vanishing derivative). Callers count failures; none are dropped
/// silently.
inline std::optional<PolarEigen> newton_refine(const ShuffleParams& p, cplx seed,
                                               SeedFamily family = {SeedKind::near_one, 0}) {
    cplx l = seed;
    for (int it = 0; it < 50; ++it) {
        const cplx step = detail::newton_correction(p, l);
        if (!detail::finite(step)) return std::nullopt;
        l -= step;
        // all eigenvalues lie in the closed unit disk; an iterate thrown far
        // outside (near-zero derivative) is lost, and past |l| ~ 2 the
        // correction itself can overflow into a bogus zero step
        if (std::abs(l) > 2.0) return std::nullopt;
        if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(l))) {
            if (std::abs(l) > 1.0 + 1e-6) return std::nullopt;
            return make_polar_eigen(p, l, std::abs(step), family);
        }
    }
    return std::nullopt;
}

/// A starting point for newton_refine together with its provenance tag.
struct SeedPoint {
    cplx z;
    SeedFamily family;
};

/// Seeds for the eigenvalues adjacent to 1: exp(i pi m/n - gamma(n,k,m)) for
/// 0 < |m| <= m_max, emitted in the order m, -m for increasing m. The -m seed
/// is the conjugate of the +m seed.
inline std::vector<SeedPoint> seeds_near_one(const ShuffleParams& p, std::int64_t m_max) {
    if (m_max < 1) throw std::domain_error("seeds_near_one: m_max must be >= 1");
    std::vector<SeedPoint> seeds;
    seeds.reserve(static_cast<std::size_t>(2 * m_max));
    for (std::int64_t m = 1; m <= m_max; ++m) {
        const double g = gamma_term(p, m).value;
        const cplx z = std::exp(cplx{-g, pi * static_cast<double>(m) / static_cast<double>(p.n)});
        seeds.push_back({z, {SeedKind::near_one, m}});
        seeds.push_back({std::conj(z), {SeedKind::near_one, -m}});
    }
    return seeds;
}

/// Seeds for the bulk of the spectrum: the inner family (1 + e^{i pi (2j+1)/k})/2,
/// j = 0..k-1, on the circle of radius 1/2 centered at 1/2, and the outer
/// family 2^{-1/(n-k)} e^{2 pi i j/(n-k)}, j = 0..n-k-1, just inside the unit
/// circle. Seeds in the angular sector owned by seeds_near_one (within
/// pi (M + 1/2)/n of +1, M the gamma search bound) are skipped; the modulus
/// guard keeps the inner seeds near 0, whose tiny angle is accidental.
inline std::vector<SeedPoint> seeds_circles(const ShuffleParams& p) {
    const std::int64_t c = p.n - p.k;
    const double excl =
        pi * (static_cast<double>(gamma_search_bound(p)) + 0.5) / static_cast<double>(p.n);
    std::vector<SeedPoint> seeds;
    seeds.reserve(static_cast<std::size_t>(p.n));
    for (std::int64_t j = 0; j < p.k; ++j) {
        const cplx z =
            0.5 * (1.0 + std::polar(1.0, pi * static_cast<double>(2 * j + 1) /
                                             static_cast<double>(p.k)));
        if (std::abs(std::arg(z)) < excl && std::abs(z) > 0.75) continue;
        seeds.push_back({z, {SeedKind::inner_circle, j}});
    }
    const double rho = std::pow(2.0, -1.0 / static_cast<double>(c));
    for (std::int64_t j = 0; j < c; ++j) {
        const cplx z =
            std::polar(rho, 2.0 * pi * static_cast<double>(j) / static_cast<double>(c));
        if (std::abs(std::arg(z)) < excl && std::abs(z) > 0.75) continue;
        seeds.push_back({z, {SeedKind::outer_circle, j}});
    }
    return seeds;
}

namespace detail {

/// Canonical ordering for spectra and witness lists: angle descending, then
/// closer to the unit circle first. Deterministic for CSV diffing.
inline void sort_polar(std::vector<PolarEigen>& eigs) {
    std::sort(eigs.begin(), eigs.end(), [](const PolarEigen& x, const PolarEigen& y) {
        if (x.a != y.a) return x.a > y.a;
        return x.eps < y.eps;
    });
}

/// Keep-first dedup at radius 1e-8 max(1, |l|). Quadratic; fine at oracle
/// scale and for the near-one lists.
inline std::vector<PolarEigen> dedup(const std::vector<PolarEigen>& eigs) {
    std::vector<PolarEigen> out;
    for (const PolarEigen& e : eigs) {
        bool dup = false;
        for (const PolarEigen& kept : out)
            if (std::abs(e.lambda - kept.lambda) <
                1e-8 * std::max(1.0, std::abs(kept.lambda))) {
                dup = true;
                break;
            }
        if (!dup) out.push_back(e);
    }
    return out;
}

}  // namespace detail

inline constexpr std::int64_t oracle_n_limit = 512;

/// Full spectrum by simultaneous root iteration on the characteristic
/// function: all n iterates advance together, each by the Newton step
/// deflated against the other iterates, w_i = N_i / (1 - N_i S_i) with
/// S_i = sum_{j != i} 1/(l_i - l_j). Sweeps update in place. Starts on the
/// circle of radius 0.9 with equi-spaced angles offset by an irrational
/// rotation so no iterate begins on a symmetry axis. The root nearest 1 is
/// pinned to exactly 1 (always an eigenvalue, always simple).
inline Spectrum full_spectrum_oracle(const ShuffleParams& p) {
    if (p.n > oracle_n_limit)
        throw std::domain_error("full_spectrum_oracle: n exceeds the oracle limit 512");
    const std::size_t n = static_cast<std::size_t>(p.n);
    std::vector<cplx> z(n);
    const double rot = 0.30901699437494745;
    for (std::size_t j = 0; j < n; ++j)
        z[j] = std::polar(0.9, 2.0 * pi * (static_cast<double>(j) + rot) /
                                   static_cast<double>(n));

    bool converged = false;
    int sweeps = 0;
    while (sweeps < 400 && !converged) {
        ++sweeps;
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx N = detail::newton_correction(p, z[i]);
            cplx S = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) S += 1.0 / (z[i] - z[j]);
            if (!detail::finite(N) || !detail::finite(S)) {
                // derivative zero or iterate collision; restart this iterate
                // on the initial circle at a rotated angle
                z[i] = std::polar(0.9, std::arg(z[i]) + 0.4721);
                worst = 1.0;
                continue;
            }
            cplx w = N / (1.0 - N * S);
            if (!detail::finite(w)) w = N;
            z[i] -= w;
            // every eigenvalue lies in the closed unit disk; an iterate that
            // strays far outside would overflow z^{n-k}, so rein it in
            const double az = std::abs(z[i]);
            if (az > 1.5) z[i] *= 1.5 / az;
            worst = std::max(worst, std::abs(w) / std::max(1.0, std::abs(z[i])));
        }
        converged = worst < 1e-13;
    }
    if (!converged)
        throw std::runtime_error("full_spectrum_oracle: no convergence after " +
                                 std::to_string(sweeps) + " sweeps at n=" +
                                 std::to_string(p.n) + " k=" + std::to_string(p.k));

    std::size_t unit = n;
    double best = 1e30;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(z[i] - 1.0);
        if (d < best) {
            best = d;
            unit = i;
        }
    }
    if (best > 1e-10)
        throw std::runtime_error("full_spectrum_oracle: unit eigenvalue missing");
    z[unit] = 1.0;

    Spectrum spec;
    spec.n_expected = p.n;
    spec.oracle_used = true;
    spec.eigs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx N = detail::newton_correction(p, z[i]);
        const double res = detail::finite(N) ? std::abs(N) : 0.0;
        spec.eigs.push_back(make_polar_eigen(p, z[i], res, {SeedKind::oracle, 0}));
    }
    detail::sort_polar(spec.eigs);
    return spec;
}

/// Spectrum from seeded Newton alone: the unit eigenvalue (seed 1, converges
/// in place), the near-one family up to the gamma search bound, and both
/// circle families. Collisions dedup keep-first, so a circle seed landing on
/// an already-found root is absorbed.
inline Spectrum newton_spectrum(const ShuffleParams& p) {
    std::vector<SeedPoint> seeds;
    seeds.push_back({cplx{1.0, 0.0}, {SeedKind::near_one, 0}});
    for (const SeedPoint& s : seeds_near_one(p, gamma_search_bound(p))) seeds.push_back(s);
    for (const SeedPoint& s : seeds_circles(p)) seeds.push_back(s);

    Spectrum spec;
    spec.n_expected = p.n;
    std::vector<PolarEigen> found;
    found.reserve(seeds.size());
    for (const SeedPoint& s : seeds) {
        if (auto e = newton_refine(p, s.z, s.family))
            found.push_back(*e);
        else
            ++spec.newton_failures;
    }
    spec.eigs = detail::dedup(found);
    detail::sort_polar(spec.eigs);
    return spec;
}

/// Best-effort full spectrum. Seeded Newton everywhere; under the oracle
/// limit the simultaneous solver supplies any roots the seeds missed (tagged
/// oracle) and confirms the count is exactly n.
inline Spectrum compute_spectrum(const ShuffleParams& p) {
    Spectrum spec = newton_spectrum(p);
    if (p.n > oracle_n_limit) return spec;

    const Spectrum oracle = full_spectrum_oracle(p);
    std::vector<PolarEigen> merged;
    merged.reserve(oracle.eigs.size());
    for (const PolarEigen& o : oracle.eigs) {
        const PolarEigen* match = nullptr;
        for (const PolarEigen& e : spec.eigs)
            if (std::abs(e.lambda - o.lambda) < 1e-8 * std::max(1.0, std::abs(o.lambda))) {
                match = &e;
                break;
            }
        merged.push_back(match ? *match : o);
    }
    spec.eigs = std::move(merged);
    spec.oracle_used = true;
    detail::sort_polar(spec.eigs);
    return spec;
}

/// Numeric spectral gap with its witness eigenvalue(s).
struct GapResult {
    double gap = 0.0;
    PolarEigen witness;                 ///< largest-modulus non-unit eigenvalue
    std::vector<PolarEigen> witnesses;  ///< all within 1e-12 of the max modulus
    std::int64_t m_max = 0;
    std::int64_t newton_failures = 0;
    bool oracle_reconciled = false;
};

namespace detail {

/// gap = 1 - max modulus over non-unit eigenvalues. The unit eigenvalue is
/// identified (|l - 1| < 1e-10, required unique), never dropped by a modulus
/// tolerance.
inline GapResult gap_from_eigens(const std::vector<PolarEigen>& eigs) {
    GapResult res;
    std::size_t units = 0;
    std::vector<PolarEigen> rest;
    rest.reserve(eigs.size());
    for (const PolarEigen& e : eigs) {
        if (std::abs(e.lambda - 1.0) < 1e-10)
            ++units;
        else
            rest.push_back(e);
    }
    if (units != 1)
        throw std::runtime_error("gap_from_eigens: unit eigenvalue count " +
                                 std::to_string(units) + ", expected exactly 1");
    if (rest.empty())
        throw std::runtime_error("gap_from_eigens: no non-unit eigenvalue found");
    double maxmod = 0.0;
    for (const PolarEigen& e : rest) maxmod = std::max(maxmod, std::abs(e.lambda));
    for (const PolarEigen& e : rest)
        if (std::abs(e.lambda) >= maxmod - 1e-12) res.witnesses.push_back(e);
    sort_polar(res.witnesses);
    res.witness = res.witnesses.front();
    res.gap = 1.0 - maxmod;
    return res;
}

}  // namespace detail

/// Gap from the near-one Newton family alone (the only route above the
/// oracle limit). The unit eigenvalue is seeded explicitly.
inline GapResult spectral_gap_newton(const ShuffleParams& p, std::int64_t m_max) {
    std::vector<PolarEigen> found;
    std::int64_t failures = 0;
    if (auto unit = newton_refine(p, cplx{1.0, 0.0}, {SeedKind::near_one, 0}))
        found.push_back(*unit);
    else
        ++failures;
    for (const SeedPoint& s : seeds_near_one(p, m_max)) {
        if (auto e = newton_refine(p, s.z, s.family))
            found.push_back(*e);
        else
            ++failures;
    }
    GapResult res = detail::gap_from_eigens(detail::dedup(found));
    res.m_max = m_max;
    res.newton_failures = failures;
    return res;
}

/// Gap from the full simultaneous-solver spectrum (n <= 512).
inline GapResult spectral_gap_oracle(const ShuffleParams& p) {
    return detail::gap_from_eigens(full_spectrum_oracle(p).eigs);
}

/// Numeric spectral gap. Near-one seeds up to the gamma search bound carry
/// the result; under the oracle limit the full spectrum cross-checks it, and
/// if the two routes disagree beyond 1e-8 the oracle value wins and the
/// result is flagged oracle_reconciled.
inline GapResult spectral_gap(const ShuffleParams& p) {
    GapResult res = spectral_gap_newton(p, gamma_search_bound(p));
    if (p.n <= oracle_n_limit) {
        GapResult oracle = spectral_gap_oracle(p);
        if (std::abs(oracle.gap - res.gap) > 1e-8) {
            oracle.m_max = res.m_max;
            oracle.newton_failures = res.newton_failures;
            oracle.oracle_reconciled = true;
            return oracle;
        }
    }
    return res;
}

/// CSV emitter for a spectrum, one row per eigenvalue:
///   re,im,modulus,eps,a,b,residual,seed_family
/// Doubles print as %.17g so reruns diff byte-identically.
inline void write_spectrum_csv(std::ostream& os, const Spectrum& spec) {
    os << "re,im,modulus,eps,a,b,residual,seed_family\n";
    char buf[256];
    for (const PolarEigen& e : spec.eigs) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,",
                      e.lambda.real(), e.lambda.imag(), std::abs(e.lambda), e.eps, e.a,
                      e.b, e.residual);
        os << buf << to_string(e.family) << "\n";
    }
}

}  // namespace ocshuffle
