#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <ocshuffle/format.hpp>
#include <ocshuffle/gamma.hpp>
#include <ocshuffle/spectra.hpp>

namespace ocshuffle {

/** Rational k/n ~ p/q in lowest terms, with the parity factor A that enters
 *  the gap asymptotics: A = 1 when p and q have equal parity, else A = 2. */
struct RationalPoint {
    std::int64_t p;
    std::int64_t q;
    std::int64_t A;
};

inline RationalPoint make_rational_point(std::int64_t p, std::int64_t q) {
    if (q < 1) throw std::domain_error("make_rational_point: q must be >= 1");
    if (p < 0 || p > q)
        throw std::domain_error("make_rational_point: need 0 <= p/q <= 1");
    if (std::gcd(p, q) != 1)
        throw std::domain_error("make_rational_point: p and q must be coprime");
    const std::int64_t A = ((p - q) % 2 == 0) ? 1 : 2;
    return RationalPoint{p, q, A};
}

/** Offset coordinate around a rational point: k = (p/q) n + c n^{3/4}. */
struct BellParams {
    RationalPoint point;
    double c;
};

inline BellParams make_bell_params(const RationalPoint& point, std::int64_t n,
                                   std::int64_t k) {
    if (n < 2) throw std::domain_error("make_bell_params: n must be >= 2");
    const double center = double(point.p) * double(n) / double(point.q);
    const double c = (double(k) - center) / std::pow(double(n), 0.75);
    return BellParams{point, c};
}

/** Leading-order gap at an interior rational point: pi^2 p q A^2 / (2 n^2). */
inline double predict_thm1(const RationalPoint& point, std::int64_t n) {
    if (n < 2) throw std::domain_error("predict_thm1: n must be >= 2");
    if (point.p == 0 || point.p == point.q)
        throw std::domain_error("predict_thm1: requires 0 < p/q < 1");
    const double dn = double(n);
    return pi * pi * double(point.p) * double(point.q) *
           double(point.A * point.A) / (2.0 * dn * dn);
}

/** Half-width of the offset window in which the second-order prediction is
 *  claimed valid: |c| <= (4k/n)^{1/4} / (A q). */
inline double bell_window(const RationalPoint& point, std::int64_t n,
                          std::int64_t k) {
    return std::pow(4.0 * double(k) / double(n), 0.25) /
           double(point.A * point.q);
}

/** Second-order gap prediction near a rational point.  For p > 0 returns
 *  pi^2 p q A^2/(2n^2) * (1 + (q/p)(k - (p/q)n)^2 / n), valid only inside the
 *  offset window; for p = 0 returns 2 pi^2 (k + k^2)/n^3, valid for
 *  k <= (n/2)^{2/3}. */
inline double predict_thm3(const BellParams& bell, std::int64_t n,
                           std::int64_t k) {
    if (n < 2) throw std::domain_error("predict_thm3: n must be >= 2");
    if (k < 1 || k >= n)
        throw std::domain_error("predict_thm3: need 1 <= k < n");
    const RationalPoint& pt = bell.point;
    const double dn = double(n);
    if (pt.p == 0) {
        const double kmax = std::pow(dn / 2.0, 2.0 / 3.0);
        if (double(k) > kmax)
            throw std::domain_error(
                "predict_thm3: p = 0 requires k <= (n/2)^(2/3) = " +
                std::to_string(kmax));
        const double dk = double(k);
        return 2.0 * pi * pi * (dk + dk * dk) / (dn * dn * dn);
    }
    const double window = bell_window(pt, n, k);
    if (std::abs(bell.c) > window)
        throw std::domain_error(
            "predict_thm3: |c| = " + std::to_string(std::abs(bell.c)) +
            " exceeds the validity window (4k/n)^(1/4)/(Aq) = " +
            std::to_string(window));
    const double d = double(k) - double(pt.p) * dn / double(pt.q);
    const double base = pi * pi * double(pt.p) * double(pt.q) *
                        double(pt.A * pt.A) / (2.0 * dn * dn);
    return base * (1.0 + (double(pt.q) / double(pt.p)) * d * d / dn);
}

/** Closest integer to p n / q, rounding halves up. */
inline std::int64_t round_fraction(std::int64_t p, std::int64_t q,
                                   std::int64_t n) {
    if (q < 1 || p < 0 || n < 0) throw std::domain_error("round_fraction: bad input");
    return (2 * p * n + q) / (2 * q);
}

/** One k of a bell sweep around a rational point. */
struct BellRecord {
    std::int64_t k;
    double gamma;
    double prediction;
    double ratio;  // prediction / gamma
};

/** Sweeps k over [round(pn/q) - halfwidth, round(pn/q) + halfwidth] and
 *  compares the second-order prediction against the exact minimum.  Throws
 *  if any k in the sweep leaves [1, n-1] or the validity window. */
inline std::vector<BellRecord> bell_scan(const RationalPoint& point,
                                         std::int64_t n,
                                         std::int64_t halfwidth) {
    if (halfwidth < 0) throw std::domain_error("bell_scan: halfwidth must be >= 0");
    const std::int64_t center = round_fraction(point.p, point.q, n);
    std::vector<BellRecord> out;
    out.reserve(std::size_t(2 * halfwidth + 1));
    for (std::int64_t k = center - halfwidth; k <= center + halfwidth; ++k) {
        const double pred = predict_thm3(make_bell_params(point, n, k), n, k);
        const double g = gamma_min(ShuffleParams(n, k)).value;
        out.push_back(BellRecord{k, g, pred, pred / g});
    }
    return out;
}

struct Thm2DeltaCount {
    double delta;
    std::int64_t count;  // #{k : gamma < (pi^2/2) delta n^{-3/2}}
    double cap;          // 4 delta^{2/3} n
    bool ok;
};

struct Thm2Report {
    std::int64_t n;
    std::vector<std::int64_t> upper_violations;  // gamma > 2 pi^2 sqrt(k)/n^2
    std::vector<std::int64_t> lower_violations;  // gamma < 4 pi^2 / n^3
    bool lower_attained_at_k1;                   // equality at k = 1
    std::vector<Thm2DeltaCount> delta_counts;
    bool ok;
};

/** Exhaustive k-sweep of the two-sided gap bounds.  The bound comparisons are
 *  done on the integer quadratic form (quad = k m^2 + r^2, gamma =
 *  pi^2 quad / (2 n^3)): the upper bound is quad^2 <= 16 n^2 k and the lower
 *  bound is quad >= 8, so boundary cases are decided exactly. */
inline Thm2Report check_thm2_bounds(std::int64_t n,
                                    const std::vector<double>& deltas = {0.01}) {
    if (n < 11) throw std::domain_error("check_thm2_bounds: n must be >= 11");
    Thm2Report rep;
    rep.n = n;
    rep.lower_attained_at_k1 = false;
    std::vector<std::int64_t> quads(std::size_t(n), 0);
    for (std::int64_t k = 1; k < n; ++k) {
        const std::int64_t quad = gamma_min(ShuffleParams(n, k)).quad;
        quads[std::size_t(k)] = quad;
        const __int128 lhs = __int128(quad) * quad;
        const __int128 rhs = __int128(16) * n * n * k;
        if (lhs > rhs) rep.upper_violations.push_back(k);
        if (quad < 8) rep.lower_violations.push_back(k);
        if (k == 1 && quad == 8) rep.lower_attained_at_k1 = true;
    }
    const double n32 = std::pow(double(n), 1.5);
    for (const double delta : deltas) {
        Thm2DeltaCount dc;
        dc.delta = delta;
        dc.count = 0;
        for (std::int64_t k = 1; k < n; ++k)
            if (double(quads[std::size_t(k)]) < delta * n32) ++dc.count;
        dc.cap = 4.0 * std::pow(delta, 2.0 / 3.0) * double(n);
        dc.ok = double(dc.count) <= dc.cap;
        rep.delta_counts.push_back(dc);
    }
    rep.ok = rep.upper_violations.empty() && rep.lower_violations.empty() &&
             std::all_of(rep.delta_counts.begin(), rep.delta_counts.end(),
                         [](const Thm2DeltaCount& d) { return d.ok; });
    return rep;
}

struct Thm5Row {
    std::int64_t q;
    std::int64_t n;  // ceil(5 q^4 alpha / 4)
    std::int64_t k;  // round(alpha n)
    std::int64_t m_star;
    double product;  // gamma(n,k) * n^{3/2}
    bool ok;         // product < bound * 1.15
};

struct Thm5Report {
    std::int64_t alpha_num;
    std::int64_t alpha_den;
    double bound;  // 2 pi^2 sqrt(alpha) / sqrt(5)
    std::vector<Thm5Row> rows;
    bool ok;
};

/** For each q in the list that satisfies q^2 >= 1/alpha and
 *  ||q(1-alpha)/2|| < 1/(sqrt5 q), evaluates gamma at the matched scale
 *  n = ceil(5 q^4 alpha / 4), k = round(alpha n) and reports
 *  gamma(n,k) n^{3/2} against 2 pi^2 sqrt(alpha)/sqrt5.  The approximation
 *  quality test is exact: with t the representative of q(den-num) mod 2 den
 *  in (-den, den], the condition reads sqrt5 q |t| < 2 den. */
inline Thm5Report thm5_sequence(std::int64_t alpha_num, std::int64_t alpha_den,
                                const std::vector<std::int64_t>& q_list) {
    if (alpha_den < 1 || alpha_num < 1 || alpha_num >= alpha_den)
        throw std::domain_error("thm5_sequence: alpha must lie in (0, 1)");
    const std::int64_t g = std::gcd(alpha_num, alpha_den);
    const std::int64_t num = alpha_num / g, den = alpha_den / g;
    Thm5Report rep;
    rep.alpha_num = num;
    rep.alpha_den = den;
    const double alpha = double(num) / double(den);
    rep.bound = 2.0 * pi * pi * std::sqrt(alpha) / std::sqrt(5.0);
    rep.ok = true;
    for (const std::int64_t q : q_list) {
        if (q < 1) throw std::domain_error("thm5_sequence: q must be >= 1");
        if (q * q * num < den) continue;
        const std::int64_t t = detail::centered_mod_2n(q * (den - num), den);
        const std::int64_t abs_t = t < 0 ? -t : t;
        if (std::sqrt(5.0) * double(q) * double(abs_t) >= 2.0 * double(den))
            continue;
        const __int128 q2 = __int128(q) * q;
        const __int128 nn =
            (q2 * q2 * 5 * num + 4 * den - 1) / (__int128(4) * den);
        const std::int64_t n = std::int64_t(nn);
        const std::int64_t k =
            std::int64_t((__int128(2) * num * n + den) / (__int128(2) * den));
        // Tiny q with alpha near 0 or 1 can round k onto the boundary; the
        // matched scale is meaningless there, so such q are not counted.
        if (k < 1 || k >= n) continue;
        const GammaMin gm = gamma_min(ShuffleParams(n, k));
        Thm5Row row;
        row.q = q;
        row.n = n;
        row.k = k;
        row.m_star = gm.m_star;
        row.product = gm.value * std::pow(double(n), 1.5);
        row.ok = row.product < rep.bound * 1.15;
        rep.rows.push_back(row);
        rep.ok = rep.ok && row.ok;
    }
    return rep;
}

struct EnvelopeRow {
    std::int64_t k;
    double relaxation;  // 1 / gamma
    double envelope;    // sqrt3 n^2 / (2 pi^2 sqrt(k))
};

struct EnvelopeReport {
    std::int64_t n;
    double max_ratio;  // max over k of gamma n^2 / sqrt(k)
    std::int64_t argmax_k;
    double conjectured_bound;  // 2 pi^2 / sqrt3
    std::vector<EnvelopeRow> rows;
};

/** Measures how close gamma n^2 / sqrt(k) comes to the conjectured constant
 *  2 pi^2 / sqrt3.  Report only: the inequality is an open question, so no
 *  assertion is attached to the result. */
inline EnvelopeReport envelope_report(std::int64_t n) {
    if (n < 2) throw std::domain_error("envelope_report: n must be >= 2");
    EnvelopeReport rep;
    rep.n = n;
    rep.conjectured_bound = 2.0 * pi * pi / std::sqrt(3.0);
    rep.max_ratio = 0.0;
    rep.argmax_k = 0;
    rep.rows.reserve(std::size_t(n - 1));
    const double dn = double(n);
    for (std::int64_t k = 1; k < n; ++k) {
        const double g = gamma_min(ShuffleParams(n, k)).value;
        const double sk = std::sqrt(double(k));
        const double ratio = g * dn * dn / sk;
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.argmax_k = k;
        }
        rep.rows.push_back(EnvelopeRow{
            k, 1.0 / g, std::sqrt(3.0) * dn * dn / (2.0 * pi * pi * sk)});
    }
    return rep;
}

/** One k of a relaxation-time sweep. */
struct ScanRecord {
    std::int64_t n;
    std::int64_t k;
    std::int64_t m_star;
    double gamma;
    double relaxation;                 // 1 / gamma
    std::optional<double> gap_numeric;
    std::optional<double> ratio;       // gap_numeric / gamma
};

/** Computes gamma and the relaxation time for every k in [1, n-1].  When
 *  with_numeric is set, also computes the numeric spectral gap for every k
 *  divisible by sample_stride. */
inline std::vector<ScanRecord> scan_k(std::int64_t n, bool with_numeric = false,
                                      std::int64_t sample_stride = 1) {
    if (n < 2) throw std::domain_error("scan_k: n must be >= 2");
    if (sample_stride < 1)
        throw std::domain_error("scan_k: sample_stride must be >= 1");
    std::vector<ScanRecord> out;
    out.reserve(std::size_t(n - 1));
    for (std::int64_t k = 1; k < n; ++k) {
        const ShuffleParams params(n, k);
        const GammaMin gm = gamma_min(params);
        ScanRecord rec;
        rec.n = n;
        rec.k = k;
        rec.m_star = gm.m_star;
        rec.gamma = gm.value;
        rec.relaxation = 1.0 / gm.value;
        if (with_numeric && k % sample_stride == 0) {
            const GapResult gr = spectral_gap(params);
            rec.gap_numeric = gr.gap;
            rec.ratio = gr.gap / gm.value;
        }
        out.push_back(rec);
    }
    return out;
}

inline void write_scan_csv(std::ostream& os,
                           const std::vector<ScanRecord>& records) {
    os << "n,k,m_star,gamma,relaxation,gap_numeric,ratio\n";
    for (const ScanRecord& r : records) {
        os << r.n << ',' << r.k << ',' << r.m_star << ',' << detail::g17(r.gamma)
           << ',' << detail::g17(r.relaxation) << ',';
        if (r.gap_numeric) os << detail::g17(*r.gap_numeric);
        os << ',';
        if (r.ratio) os << detail::g17(*r.ratio);
        os << '\n';
    }
}

inline void write_bell_csv(std::ostream& os,
                           const std::vector<BellRecord>& records) {
    os << "k,gamma,prediction,ratio\n";
    for (const BellRecord& r : records)
        os << r.k << ',' << detail::g17(r.gamma) << ','
           << detail::g17(r.prediction) << ',' << detail::g17(r.ratio) << '\n';
}

inline void write_envelope_csv(std::ostream& os, const EnvelopeReport& report) {
    os << "k,relaxation,envelope\n";
    for (const EnvelopeRow& r : report.rows)
        os << r.k << ',' << detail::g17(r.relaxation) << ','
           << detail::g17(r.envelope) << '\n';
}

}  // namespace ocshuffle
