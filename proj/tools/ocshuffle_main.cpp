#include <CLI11.hpp>
#include <json.hpp>

#include <ocshuffle/analysis.hpp>
#include <ocshuffle/mixsim.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace ocshuffle;

/// Stdout by default, a file when --out is given.
class OutTarget {
  public:
    bool open(const std::string& path) {
        if (path.empty()) return true;
        file_.open(path);
        if (!file_) {
            std::cerr << "error: cannot open output file '" << path << "'\n";
            return false;
        }
        os_ = &file_;
        return true;
    }
    std::ostream& stream() { return *os_; }

  private:
    std::ofstream file_;
    std::ostream* os_ = &std::cout;
};

struct GapFlags {
    std::int64_t n = 0, k = 0;
    std::string method = "analytic";
    std::string out;
};

int run_gap(const GapFlags& f) {
    const ShuffleParams params(f.n, f.k);
    const GammaMin gm = gamma_min(params);
    nlohmann::json j;
    j["n"] = f.n;
    j["k"] = f.k;
    j["method"] = f.method;
    j["gamma"] = gm.value;
    j["m_star"] = gm.m_star;
    j["relaxation"] = 1.0 / gm.value;
    if (f.method == "newton" || f.method == "all") {
        const GapResult gr = spectral_gap_newton(params, gm.search_bound);
        j["newton"] = {{"gap", gr.gap}, {"ratio", gr.gap / gm.value}};
    }
    if (f.method == "oracle" || f.method == "all") {
        if (params.n > 512)
            throw std::domain_error("method 'oracle' requires n <= 512");
        const GapResult gr = spectral_gap_oracle(params);
        j["oracle"] = {{"gap", gr.gap}, {"ratio", gr.gap / gm.value}};
    }
    OutTarget out;
    if (!out.open(f.out)) return 1;
    out.stream() << j.dump(2) << '\n';
    return 0;
}

struct ScanFlags {
    std::int64_t n = 0;
    bool with_numeric = false;
    std::int64_t stride = 1;
    std::string out;
};

int run_scan(const ScanFlags& f) {
    const std::vector<ScanRecord> records = scan_k(f.n, f.with_numeric, f.stride);
    OutTarget out;
    if (!out.open(f.out)) return 1;
    write_scan_csv(out.stream(), records);
    return 0;
}

struct EigsFlags {
    std::int64_t n = 0, k = 0;
    std::string out;
};

int run_eigs(const EigsFlags& f) {
    const Spectrum spec = compute_spectrum(ShuffleParams(f.n, f.k));
    OutTarget out;
    if (!out.open(f.out)) return 1;
    write_spectrum_csv(out.stream(), spec);
    return 0;
}

struct BellsFlags {
    std::int64_t n = 0, p = 0, q = 0, halfwidth = 40;
    std::string out;
};

int run_bells(const BellsFlags& f) {
    const RationalPoint point = make_rational_point(f.p, f.q);
    const std::vector<BellRecord> records = bell_scan(point, f.n, f.halfwidth);
    OutTarget out;
    if (!out.open(f.out)) return 1;
    write_bell_csv(out.stream(), records);
    return 0;
}

struct EnvelopeFlags {
    std::int64_t n = 0;
    std::string out;
};

int run_envelope(const EnvelopeFlags& f) {
    const EnvelopeReport rep = envelope_report(f.n);
    OutTarget out;
    if (!out.open(f.out)) return 1;
    write_envelope_csv(out.stream(), rep);
    std::cerr << "envelope: max gamma n^2/sqrt(k) = " << detail::g17(rep.max_ratio)
              << " at k = " << rep.argmax_k << " (conjectured bound "
              << detail::g17(rep.conjectured_bound) << ", not asserted)\n";
    return 0;
}

struct Thm2Flags {
    std::int64_t n = 0;
    std::vector<double> deltas;
    std::string out;
};

int run_thm2(const Thm2Flags& f) {
    const std::vector<double> deltas = f.deltas.empty()
                                           ? std::vector<double>{0.01}
                                           : f.deltas;
    const Thm2Report rep = check_thm2_bounds(f.n, deltas);
    OutTarget out;
    if (!out.open(f.out)) return 1;
    std::ostream& os = out.stream();
    os << "n,upper_violations,lower_violations,equality_at_k1,delta,count,cap,ok\n";
    for (const Thm2DeltaCount& dc : rep.delta_counts)
        os << rep.n << ',' << rep.upper_violations.size() << ','
           << rep.lower_violations.size() << ',' << (rep.lower_attained_at_k1 ? 1 : 0)
           << ',' << detail::g17(dc.delta) << ',' << dc.count << ','
           << detail::g17(dc.cap) << ',' << (dc.ok ? 1 : 0) << '\n';
    if (!rep.ok) {
        std::cerr << "thm2: bound violations at n = " << rep.n << ";";
        for (std::size_t i = 0; i < rep.upper_violations.size() && i < 8; ++i)
            std::cerr << " upper k=" << rep.upper_violations[i];
        for (std::size_t i = 0; i < rep.lower_violations.size() && i < 8; ++i)
            std::cerr << " lower k=" << rep.lower_violations[i];
        std::cerr << '\n';
        return 2;
    }
    return 0;
}

struct Thm5Flags {
    std::int64_t alpha_num = 0, alpha_den = 0;
    std::vector<std::int64_t> qs;
    std::string out;
};

int run_thm5(const Thm5Flags& f) {
    const std::vector<std::int64_t> qs =
        f.qs.empty() ? std::vector<std::int64_t>{1, 2, 3, 5, 8, 13, 21, 34, 55, 89}
                     : f.qs;
    const Thm5Report rep = thm5_sequence(f.alpha_num, f.alpha_den, qs);
    OutTarget out;
    if (!out.open(f.out)) return 1;
    std::ostream& os = out.stream();
    os << "q,n,k,m_star,product,bound,ok\n";
    for (const Thm5Row& row : rep.rows)
        os << row.q << ',' << row.n << ',' << row.k << ',' << row.m_star << ','
           << detail::g17(row.product) << ',' << detail::g17(rep.bound) << ','
           << (row.ok ? 1 : 0) << '\n';
    if (!rep.ok) {
        std::cerr << "thm5: product exceeded bound*1.15 for some q\n";
        return 2;
    }
    return 0;
}

struct SimFlags {
    std::int64_t n = 0, k = 0;
    std::int64_t start = 1, trials = 10000, steps = 1000;
    std::uint64_t seed = 1;
    std::string mode = "exact";
    std::string stat = "fixed_points";
    std::vector<std::int64_t> checkpoints;
    std::string out;
};

int run_simulate(const SimFlags& f) {
    const ShuffleParams params(f.n, f.k);
    const SimConfig cfg{params, f.start, f.trials, f.steps, f.seed};
    std::vector<std::int64_t> checkpoints =
        f.checkpoints.empty() ? std::vector<std::int64_t>{f.steps} : f.checkpoints;

    std::vector<std::string> comments = {
        "mode=" + f.mode,
        "n=" + std::to_string(f.n),
        "k=" + std::to_string(f.k),
        "start=" + std::to_string(f.start),
        "trials=" + std::to_string(f.trials),
        "steps=" + std::to_string(f.steps),
        "rng_seed=" + std::to_string(f.seed),
        "algorithm=splitmix64"};

    std::string label = "tv";
    std::vector<std::pair<std::int64_t, double>> rows;
    if (f.mode == "exact") {
        const TVSeries tv = tv_exact(params, f.start, f.steps);
        for (std::int64_t t = 0; t <= f.steps; ++t)
            rows.emplace_back(t, tv.values[std::size_t(t)]);
    } else if (f.mode == "card") {
        const CardCounts cc = simulate_card(cfg, checkpoints);
        for (std::size_t i = 0; i < cc.checkpoints.size(); ++i)
            rows.emplace_back(cc.checkpoints[i],
                              tv_empirical(cc.counts[i], f.trials));
    } else {  // deck
        comments.push_back("stat=" + f.stat);
        if (f.stat == "tv") {
            detail::validate_config(cfg);
            detail::validate_checkpoints(cfg, checkpoints);
            const TVSeries tv = deck_tv_exact(params, checkpoints.back());
            for (const std::int64_t t : checkpoints)
                rows.emplace_back(t, tv.values[std::size_t(t)]);
        } else {
            const DeckStats ds = simulate_deck(cfg, checkpoints);
            const std::vector<double>& vals =
                f.stat == "cycles" ? ds.mean_cycles : ds.mean_fixed_points;
            for (std::size_t i = 0; i < ds.checkpoints.size(); ++i)
                rows.emplace_back(ds.checkpoints[i], vals[i]);
            label = f.stat == "cycles" ? "mean_cycles" : "mean_fixed_points";
        }
    }

    OutTarget out;
    if (!out.open(f.out)) return 1;
    write_sim_csv(out.stream(), comments, label, rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectrum, gap functional, and mixing toolkit for the "
                 "overlapping-cycles shuffle"};
    app.require_subcommand(1);

    GapFlags gap_flags;
    CLI::App* gap = app.add_subcommand(
        "gap", "Analytic gap functional and numeric spectral gap as JSON");
    gap->add_option("--n", gap_flags.n, "deck size")->required();
    gap->add_option("--k", gap_flags.k, "cycle offset, 1 <= k < n")->required();
    gap->add_option("--method", gap_flags.method, "gap computation to run")
        ->check(CLI::IsMember({"analytic", "newton", "oracle", "all"}));
    gap->add_option("--out", gap_flags.out, "output path (default stdout)");

    ScanFlags scan_flags;
    CLI::App* scan = app.add_subcommand(
        "scan", "Relaxation-time sweep over every k as CSV");
    scan->add_option("--n", scan_flags.n, "deck size")->required();
    scan->add_flag("--with-numeric", scan_flags.with_numeric,
                   "also compute numeric gaps");
    scan->add_option("--stride", scan_flags.stride,
                     "numeric sampling stride (with --with-numeric)")
        ->check(CLI::PositiveNumber);
    scan->add_option("--out", scan_flags.out, "output path (default stdout)");

    EigsFlags eigs_flags;
    CLI::App* eigs = app.add_subcommand(
        "eigs", "Full single-card spectrum in polar form as CSV");
    eigs->add_option("--n", eigs_flags.n, "deck size")->required();
    eigs->add_option("--k", eigs_flags.k, "cycle offset")->required();
    eigs->add_option("--out", eigs_flags.out, "output path (default stdout)");

    BellsFlags bells_flags;
    CLI::App* bells = app.add_subcommand(
        "bells", "Prediction vs gamma around a rational point as CSV");
    bells->add_option("--n", bells_flags.n, "deck size")->required();
    bells->add_option("--p", bells_flags.p, "rational point numerator")->required();
    bells->add_option("--q", bells_flags.q, "rational point denominator")->required();
    bells->add_option("--halfwidth", bells_flags.halfwidth,
                      "half-width of the k sweep (default 40)");
    bells->add_option("--out", bells_flags.out, "output path (default stdout)");

    EnvelopeFlags env_flags;
    CLI::App* envelope = app.add_subcommand(
        "envelope", "Relaxation lower-envelope data as CSV (report only)");
    envelope->add_option("--n", env_flags.n, "deck size")->required();
    envelope->add_option("--out", env_flags.out, "output path (default stdout)");

    Thm2Flags thm2_flags;
    CLI::App* thm2 = app.add_subcommand(
        "thm2", "Exhaustive two-sided gap bound check as CSV");
    thm2->add_option("--n", thm2_flags.n, "deck size")->required();
    thm2->add_option("--delta", thm2_flags.deltas,
                     "small-gamma thresholds (repeatable, default 0.01)");
    thm2->add_option("--out", thm2_flags.out, "output path (default stdout)");

    Thm5Flags thm5_flags;
    CLI::App* thm5 = app.add_subcommand(
        "thm5", "Matched-scale gamma products along approximation "
                "denominators as CSV");
    thm5->add_option("--alpha-num", thm5_flags.alpha_num,
                     "numerator of alpha in (0,1)")->required();
    thm5->add_option("--alpha-den", thm5_flags.alpha_den,
                     "denominator of alpha")->required();
    thm5->add_option("--q", thm5_flags.qs,
                     "denominators to test (repeatable, default Fibonacci "
                     "up to 89)");
    thm5->add_option("--out", thm5_flags.out, "output path (default stdout)");

    SimFlags sim_flags;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Exact or Monte Carlo mixing measurements as CSV");
    simulate->add_option("--n", sim_flags.n, "deck size")->required();
    simulate->add_option("--k", sim_flags.k, "cycle offset")->required();
    simulate->add_option("--mode", sim_flags.mode,
                         "exact | card | deck (default exact)")
        ->check(CLI::IsMember({"exact", "card", "deck"}));
    simulate->add_option("--start", sim_flags.start,
                         "starting card position (default 1)");
    simulate->add_option("--trials", sim_flags.trials,
                         "Monte Carlo trajectories (default 10000)");
    simulate->add_option("--steps", sim_flags.steps,
                         "time horizon (default 1000)");
    simulate->add_option("--seed", sim_flags.seed, "master RNG seed (default 1)");
    simulate->add_option("--checkpoint", sim_flags.checkpoints,
                         "measurement times (repeatable, default = steps)");
    simulate->add_option("--stat", sim_flags.stat,
                         "deck statistic: fixed_points | cycles | tv")
        ->check(CLI::IsMember({"fixed_points", "cycles", "tv"}));
    simulate->add_option("--out", sim_flags.out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(gap)) return run_gap(gap_flags);
        if (app.got_subcommand(scan)) return run_scan(scan_flags);
        if (app.got_subcommand(eigs)) return run_eigs(eigs_flags);
        if (app.got_subcommand(bells)) return run_bells(bells_flags);
        if (app.got_subcommand(envelope)) return run_envelope(env_flags);
        if (app.got_subcommand(thm2)) return run_thm2(thm2_flags);
        if (app.got_subcommand(thm5)) return run_thm5(thm5_flags);
        if (app.got_subcommand(simulate)) return run_simulate(sim_flags);
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
