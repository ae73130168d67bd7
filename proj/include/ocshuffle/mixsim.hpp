#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <ocshuffle/chain.hpp>
#include <ocshuffle/format.hpp>

namespace ocshuffle {

/** SplitMix64 (Steele, Lea & Flood): a 64-bit Weyl sequence passed through an
 *  avalanche mix.  Chosen for trivially seedable, platform-independent,
 *  reproducible streams; statistical quality is ample for coin flips. */
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Fair coin from the top bit.
    bool coin() { return (next() >> 63) != 0; }
};

/** Seed of per-trial stream `index`: the index-th output of the master
 *  SplitMix64 sequence, computed in O(1) by jumping the Weyl state.  Trials
 *  may therefore run in any order or concurrently. */
inline std::uint64_t split_stream(std::uint64_t master, std::uint64_t index) {
    return SplitMix64(master + index * 0x9E3779B97F4A7C15ULL).next();
}

struct SimConfig {
    ShuffleParams params;
    std::int64_t start;     // card position in [1, n]; deck runs start at identity
    std::int64_t trials;
    std::int64_t steps;
    std::uint64_t rng_seed;
};

namespace detail {

inline void validate_config(const SimConfig& cfg) {
    if (cfg.trials < 1) throw std::domain_error("SimConfig: trials must be >= 1");
    if (cfg.steps < 0) throw std::domain_error("SimConfig: steps must be >= 0");
    if (cfg.start < 1 || cfg.start > cfg.params.n)
        throw std::domain_error("SimConfig: start must lie in [1, n]");
}

/// Checkpoints must be strictly increasing within [0, steps].
inline void validate_checkpoints(const SimConfig& cfg,
                                 const std::vector<std::int64_t>& checkpoints) {
    if (checkpoints.empty())
        throw std::domain_error("simulate: need at least one checkpoint");
    std::int64_t prev = -1;
    for (const std::int64_t t : checkpoints) {
        if (t <= prev || t > cfg.steps)
            throw std::domain_error(
                "simulate: checkpoints must be strictly increasing in [0, steps]");
        prev = t;
    }
}

inline double tv_from_uniform(const std::vector<double>& probs) {
    const double u = 1.0 / double(probs.size());
    double s = 0.0;
    for (const double p : probs) s += std::abs(p - u);
    return 0.5 * s;
}

}  // namespace detail

/** Total-variation distance from uniform at each time t = 0..steps. */
struct TVSeries {
    std::vector<double> values;
};

/** Exact TV decay of the single-card chain from a point mass. */
inline TVSeries tv_exact(const ShuffleParams& params, std::int64_t start,
                         std::int64_t steps) {
    if (steps < 0) throw std::domain_error("tv_exact: steps must be >= 0");
    DistVector d = point_mass(params.n, start);
    TVSeries series;
    series.values.reserve(std::size_t(steps + 1));
    series.values.push_back(detail::tv_from_uniform(d.probs));
    for (std::int64_t t = 1; t <= steps; ++t) {
        d = evolve(params, d, 1);
        series.values.push_back(detail::tv_from_uniform(d.probs));
    }
    return series;
}

/** One step of the single-card chain.  Randomness is consumed only at the
 *  branching positions; a true coin selects the short cycle (the move that
 *  brings position n-k to the top), false the long one. */
inline std::int64_t step_position(const ShuffleParams& p, std::int64_t i,
                                  SplitMix64& rng) {
    const std::int64_t cut = p.n - p.k;
    if (i < cut) return i + 1;
    if (i == cut) return rng.coin() ? 1 : cut + 1;
    if (i < p.n) return rng.coin() ? i : i + 1;
    return rng.coin() ? p.n : 1;
}

/** Occupancy counts over trials, one histogram per checkpoint. */
struct CardCounts {
    std::vector<std::int64_t> checkpoints;
    std::vector<std::vector<std::int64_t>> counts;  // [checkpoint][position-1]
};

/** Monte Carlo trajectories of the single-card chain.  Trial i uses the
 *  stream split_stream(rng_seed, i), so results are reproducible and
 *  order-independent. */
inline CardCounts simulate_card(const SimConfig& cfg,
                                const std::vector<std::int64_t>& checkpoints) {
    detail::validate_config(cfg);
    detail::validate_checkpoints(cfg, checkpoints);
    CardCounts out;
    out.checkpoints = checkpoints;
    out.counts.assign(checkpoints.size(),
                      std::vector<std::int64_t>(std::size_t(cfg.params.n), 0));
    const std::int64_t horizon = checkpoints.back();
    for (std::int64_t trial = 0; trial < cfg.trials; ++trial) {
        SplitMix64 rng(split_stream(cfg.rng_seed, std::uint64_t(trial)));
        std::int64_t pos = cfg.start;
        std::size_t next_cp = 0;
        if (checkpoints[0] == 0) {
            ++out.counts[0][std::size_t(pos - 1)];
            next_cp = 1;
        }
        for (std::int64_t t = 1; t <= horizon; ++t) {
            pos = step_position(cfg.params, pos, rng);
            if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
                ++out.counts[next_cp][std::size_t(pos - 1)];
                ++next_cp;
            }
        }
    }
    return out;
}

/** Empirical TV from uniform of one checkpoint histogram. */
inline double tv_empirical(const std::vector<std::int64_t>& counts,
                           std::int64_t trials) {
    if (trials < 1) throw std::domain_error("tv_empirical: trials must be >= 1");
    const double u = 1.0 / double(counts.size());
    double s = 0.0;
    for (const std::int64_t c : counts) s += std::abs(double(c) / double(trials) - u);
    return 0.5 * s;
}

/** Empirical relaxation rate from a TV series: the least-squares slope of
 *  |ln TV(t)| over [t_begin, t_end].  With envelope_width > 1 the fit runs on
 *  the upper envelope of |ln TV| over sliding sub-windows of that width
 *  (leftmost peak per sub-window, deduplicated), which damps the oscillation
 *  that complex eigenvalue phases put into the raw series.  Since
 *  |ln TV| = -ln TV on the admissible range, the result is minus the slope
 *  of ln TV. */
inline double fit_relaxation(const TVSeries& series, std::int64_t t_begin,
                             std::int64_t t_end,
                             std::int64_t envelope_width = 1) {
    const std::int64_t size = std::int64_t(series.values.size());
    if (t_begin < 0 || t_end >= size || t_begin >= t_end)
        throw std::domain_error("fit_relaxation: window out of range");
    if (envelope_width < 1 || envelope_width > t_end - t_begin + 1)
        throw std::domain_error("fit_relaxation: bad envelope width");
    for (std::int64_t t = t_begin; t <= t_end; ++t) {
        const double v = series.values[std::size_t(t)];
        if (!(v >= 1e-9 && v <= 0.2))
            throw std::domain_error(
                "fit_relaxation: TV at t = " + std::to_string(t) +
                " lies outside [1e-9, 0.2]; the fit would be unreliable");
    }
    std::vector<double> xs, ys;
    std::int64_t last_x = -1;
    for (std::int64_t t0 = t_begin; t0 + envelope_width - 1 <= t_end; ++t0) {
        double best = -1.0;
        std::int64_t bx = t0;
        for (std::int64_t s = t0; s < t0 + envelope_width; ++s) {
            const double y = std::abs(std::log(series.values[std::size_t(s)]));
            if (y > best) {
                best = y;
                bx = s;
            }
        }
        if (bx != last_x) {
            xs.push_back(double(bx));
            ys.push_back(best);
            last_x = bx;
        }
    }
    if (xs.size() < 2)
        throw std::domain_error("fit_relaxation: not enough envelope points");
    const double npts = double(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
}

/** Applies one of the two cycle moves to a deck (deck[0] is the top card):
 *  the card at position n-k (short cycle) or n (long cycle) moves to the
 *  top, everything above it shifting down one place. */
inline void apply_deck_move(std::vector<std::int32_t>& deck,
                            const ShuffleParams& p, bool short_cycle) {
    const std::int64_t j = short_cycle ? p.n - p.k : p.n;
    std::rotate(deck.begin(), deck.begin() + (j - 1), deck.begin() + j);
}

namespace detail {

/// Rank of a permutation of {1..n} in lexicographic order, n <= 20.
inline std::int64_t lehmer_rank(const std::vector<std::int32_t>& perm) {
    const std::size_t n = perm.size();
    std::int64_t rank = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t smaller = 0;
        for (std::size_t j = i + 1; j < n; ++j)
            if (perm[j] < perm[i]) ++smaller;
        rank = rank * std::int64_t(n - i) + smaller;
    }
    return rank;
}

inline std::vector<std::int32_t> lehmer_unrank(std::int64_t rank, std::int64_t n) {
    std::vector<std::int32_t> pool(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) pool[std::size_t(i)] = std::int32_t(i + 1);
    std::vector<std::int64_t> digits(std::size_t(n), 0);
    for (std::int64_t i = n - 1, f = 1; i >= 0; --i) {
        digits[std::size_t(i)] = (rank / f) % (n - i);
        f *= n - i;
    }
    std::vector<std::int32_t> perm;
    perm.reserve(std::size_t(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const auto it = pool.begin() + digits[std::size_t(i)];
        perm.push_back(*it);
        pool.erase(it);
    }
    return perm;
}

inline std::int64_t factorial(std::int64_t n) {
    std::int64_t f = 1;
    for (std::int64_t i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace detail

/** Exact TV decay of the whole-deck chain on S_n from the identity, by dense
 *  evolution over all n! deck orders.  Limited to n <= 8. */
inline TVSeries deck_tv_exact(const ShuffleParams& params, std::int64_t steps) {
    if (params.n > 8)
        throw std::domain_error("deck_tv_exact: exact deck TV needs n <= 8");
    if (steps < 0) throw std::domain_error("deck_tv_exact: steps must be >= 0");
    const std::int64_t nf = detail::factorial(params.n);
    std::vector<std::int64_t> succ_short(static_cast<std::size_t>(nf));
    std::vector<std::int64_t> succ_long(static_cast<std::size_t>(nf));
    for (std::int64_t r = 0; r < nf; ++r) {
        std::vector<std::int32_t> deck = detail::lehmer_unrank(r, params.n);
        std::vector<std::int32_t> other = deck;
        apply_deck_move(deck, params, true);
        apply_deck_move(other, params, false);
        succ_short[std::size_t(r)] = detail::lehmer_rank(deck);
        succ_long[std::size_t(r)] = detail::lehmer_rank(other);
    }
    std::vector<double> cur(std::size_t(nf), 0.0);
    std::vector<double> next(static_cast<std::size_t>(nf));
    cur[0] = 1.0;  // identity has rank 0
    TVSeries series;
    series.values.reserve(std::size_t(steps + 1));
    series.values.push_back(detail::tv_from_uniform(cur));
    for (std::int64_t t = 1; t <= steps; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::int64_t r = 0; r < nf; ++r) {
            const double mass = 0.5 * cur[std::size_t(r)];
            next[std::size_t(succ_short[std::size_t(r)])] += mass;
            next[std::size_t(succ_long[std::size_t(r)])] += mass;
        }
        cur.swap(next);
        series.values.push_back(detail::tv_from_uniform(cur));
    }
    return series;
}

/** Whole-deck trajectory statistics per checkpoint; exact TV attached only
 *  where the n! state space is enumerable (n <= 8), and flagged as such. */
struct DeckStats {
    std::vector<std::int64_t> checkpoints;
    std::vector<double> mean_fixed_points;
    std::vector<double> mean_cycles;
    std::vector<double> tv_exact;  // filled only when has_exact_tv
    bool has_exact_tv;
};

/** Monte Carlo over deck orders, starting from the identity.  Per-step coin
 *  convention matches step_position: true picks the short cycle. */
inline DeckStats simulate_deck(const SimConfig& cfg,
                               const std::vector<std::int64_t>& checkpoints) {
    detail::validate_config(cfg);
    detail::validate_checkpoints(cfg, checkpoints);
    DeckStats out;
    out.checkpoints = checkpoints;
    out.mean_fixed_points.assign(checkpoints.size(), 0.0);
    out.mean_cycles.assign(checkpoints.size(), 0.0);
    out.has_exact_tv = cfg.params.n <= 8;
    const std::size_t n = std::size_t(cfg.params.n);
    const std::int64_t horizon = checkpoints.back();
    std::vector<std::int32_t> deck(n);
    std::vector<bool> seen(n);
    for (std::int64_t trial = 0; trial < cfg.trials; ++trial) {
        SplitMix64 rng(split_stream(cfg.rng_seed, std::uint64_t(trial)));
        for (std::size_t i = 0; i < n; ++i) deck[i] = std::int32_t(i + 1);
        std::size_t next_cp = 0;
        for (std::int64_t t = 0; t <= horizon; ++t) {
            if (t > 0) apply_deck_move(deck, cfg.params, rng.coin());
            if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
                std::int64_t fixed = 0, cycles = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (deck[i] == std::int32_t(i + 1)) ++fixed;
                    seen[i] = false;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    if (seen[i]) continue;
                    ++cycles;
                    for (std::size_t j = i; !seen[j];
                         j = std::size_t(deck[j] - 1))
                        seen[j] = true;
                }
                out.mean_fixed_points[next_cp] += double(fixed);
                out.mean_cycles[next_cp] += double(cycles);
                ++next_cp;
            }
        }
    }
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        out.mean_fixed_points[c] /= double(cfg.trials);
        out.mean_cycles[c] /= double(cfg.trials);
    }
    if (out.has_exact_tv) {
        const TVSeries series = deck_tv_exact(cfg.params, horizon);
        out.tv_exact.reserve(checkpoints.size());
        for (const std::int64_t t : checkpoints)
            out.tv_exact.push_back(series.values[std::size_t(t)]);
    }
    return out;
}

/** CSV with '#'-prefixed metadata comment lines (trials, seed, mode) ahead of
 *  the header row. */
inline void write_sim_csv(std::ostream& os,
                          const std::vector<std::string>& comments,
                          const std::string& value_label,
                          const std::vector<std::pair<std::int64_t, double>>& rows) {
    for (const std::string& c : comments) os << "# " << c << '\n';
    os << "t," << value_label << '\n';
    for (const auto& [t, v] : rows) os << t << ',' << detail::g17(v) << '\n';
}

}  // namespace ocshuffle
