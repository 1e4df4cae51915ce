// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "otfs/detector.hpp"
#include "otfs/estimator.hpp"
#include "otfs/metrics.hpp"
#include "otfs/training.hpp"

namespace otfs {

enum class CsiMode { estimated, perfect, aliased_only };

inline CsiMode csi_mode_from(const std::string& s) {
    if (s == "estimated") return CsiMode::estimated;
    if (s == "perfect") return CsiMode::perfect;
    if (s == "aliased-only" || s == "aliased_only") return CsiMode::aliased_only;
    throw std::invalid_argument("unknown csi_mode: " + s);
}

// One experiment description; parsed from a JSON config file. Threshold
// defaults follow the reference parameter set; experiment presets may
// override any of them.
struct ExperimentConfig {
    FrameGeometry geometry{512, 128, 15e3};
    ChannelProfile profile = ChannelProfile::channel_a();
    int n_paths = 9;
    int l_max = 2400;

    double snr_c_db = 23.0;
    double snr_p_db = 30.0;                  // pilot SNR for BER/census runs
    std::vector<double> snr_p_sweep_db = {15, 20, 25, 30, 35};
    std::vector<double> snr_d_sweep_db = {10, 11, 12, 13, 14, 15, 16};
    double noise_var = 1.0;

    int trials = 200;            // per sweep point (nmse) / census
    int max_frames = 100;        // per BER point
    int min_frames = 1;          // frames before the error target may stop a point
    int target_bit_errors = 200; // BER early stop
    std::uint64_t seed = 1;

    // estimator thresholds; gamma_pilot < 0 means "use linear SNR_p"
    double alpha = 4.0;
    double delta = 30.0;
    double alpha_prime = 2.0;
    double gamma_pilot = -1.0;
    double gamma_corr = 500.0;
    double gamma_mse = 2.0;
    double eps1 = 0.6;

    // detector
    int n_iter = 5;
    double delta_bar = 1.0;
    int qam_order = 4;

    CsiMode csi = CsiMode::estimated;
    NmseMode nmse_mode = NmseMode::union_delays;

    bool fractional = false;   // fractional-delay tap model for the channel
    double fractional_eps = 0.02;

    EstimatorConfig estimator_config(double snr_p_db_pt) const {
        EstimatorConfig c;
        c.alpha = alpha;
        c.delta = delta;
        c.alpha_prime = alpha_prime;
        c.gamma_pilot = gamma_pilot > 0.0 ? gamma_pilot : std::pow(10.0, snr_p_db_pt / 10.0);
        c.gamma_corr = gamma_corr;
        c.gamma_mse = gamma_mse;
        c.eps1 = eps1;
        c.noise_var = noise_var;
        c.l_max = l_max;
        return c;
    }
};

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("M") || j.contains("N") || j.contains("delta_f"))
        c.geometry = FrameGeometry(j.value("M", 512), j.value("N", 128), j.value("delta_f", 15e3));
    if (j.contains("channel")) c.profile = profile_by_name(j["channel"].get<std::string>());
    if (j.contains("k_max")) c.profile.k_max = j["k_max"].get<int>();
    if (j.contains("speed_kmh")) c.profile.speed_kmh = j["speed_kmh"].get<double>();
    if (j.contains("min_underspread")) c.profile.min_underspread = j["min_underspread"].get<int>();
    if (j.contains("gain_model"))
        c.profile.gains = j["gain_model"].get<std::string>() == "rayleigh"
                              ? GainModel::rayleigh
                              : GainModel::profile_magnitude;
    c.n_paths = j.value("L", c.n_paths);
    c.l_max = j.value("l_max", c.l_max);
    c.snr_c_db = j.value("snr_c_db", c.snr_c_db);
    c.snr_p_db = j.value("snr_p_db", c.snr_p_db);
    if (j.contains("snr_p_sweep_db")) c.snr_p_sweep_db = j["snr_p_sweep_db"].get<std::vector<double>>();
    if (j.contains("snr_d_sweep_db")) c.snr_d_sweep_db = j["snr_d_sweep_db"].get<std::vector<double>>();
    c.noise_var = j.value("noise_var", c.noise_var);
    c.trials = j.value("trials", c.trials);
    c.max_frames = j.value("max_frames", c.max_frames);
    c.min_frames = j.value("min_frames", c.min_frames);
    c.target_bit_errors = j.value("target_bit_errors", c.target_bit_errors);
    c.seed = j.value("seed", c.seed);
    c.alpha = j.value("alpha", c.alpha);
    c.delta = j.value("delta", c.delta);
    c.alpha_prime = j.value("alpha_prime", c.alpha_prime);
    c.gamma_pilot = j.value("gamma_pilot", c.gamma_pilot);
    c.gamma_corr = j.value("gamma_corr", c.gamma_corr);
    c.gamma_mse = j.value("gamma_mse", c.gamma_mse);
    c.eps1 = j.value("eps1", c.eps1);
    c.n_iter = j.value("n_iter", c.n_iter);
    c.delta_bar = j.value("delta_bar", c.delta_bar);
    c.qam_order = j.value("qam_order", c.qam_order);
    if (j.contains("csi_mode")) c.csi = csi_mode_from(j["csi_mode"].get<std::string>());
    if (j.contains("nmse_mode"))
        c.nmse_mode = j["nmse_mode"].get<std::string>() == "paper" ? NmseMode::truth_delays
                                                                   : NmseMode::union_delays;
    c.fractional = j.value("fractional", c.fractional);
    c.fractional_eps = j.value("fractional_eps", c.fractional_eps);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    f >> j;
    return parse_config(j);
}

// One CSV output row. Header is fixed: sweep_db,metric,value,trials,errors,seed
struct MetricsRow {
    double sweep_db = 0.0;
    std::string metric;
    double value = 0.0;
    long trials = 0;
    long errors = 0;
    std::uint64_t seed = 0;
};

inline std::string csv_header() { return "sweep_db,metric,value,trials,errors,seed"; }

inline std::string to_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream os;
    os << csv_header() << "\n";
    os.precision(12);
    for (const auto& r : rows)
        os << r.sweep_db << ',' << r.metric << ',' << r.value << ',' << r.trials << ','
           << r.errors << ',' << r.seed << "\n";
    return os.str();
}

namespace detail {

// stream tags for per-trial seed derivation
enum : std::uint64_t { kStreamChannel = 1, kStreamNoise = 2, kStreamData = 3, kStreamDataNoise = 4 };

struct TrialSetup {
    ChannelRealization chan;
    FractionalTapChannel frac;
    TrainingFrame training;
    TimeSignal received;
    EstimatorConfig est_cfg;
};

inline TrialSetup make_trial(const ExperimentConfig& cfg, double snr_p_db_pt,
                             std::uint64_t point_tag, int trial) {
    TrialSetup t;
    const std::uint64_t chan_seed =
        derive_seed(cfg.seed, kStreamChannel ^ point_tag, static_cast<std::uint64_t>(trial));
    const std::uint64_t noise_seed =
        derive_seed(cfg.seed, kStreamNoise ^ point_tag, static_cast<std::uint64_t>(trial));

    t.chan = generate_channel(cfg.profile, cfg.geometry, cfg.l_max, cfg.n_paths, chan_seed);
    t.est_cfg = cfg.estimator_config(snr_p_db_pt);
    const cplx xp = pilot_from_snr_db(snr_p_db_pt, cfg.noise_var, cfg.geometry);
    const ChirpParams chirp = ChirpParams::from_snr_db(cfg.snr_c_db, cfg.noise_var);
    t.training = build_training(xp, chirp, cfg.geometry, t.est_cfg.delta);

    if (cfg.fractional) {
        std::vector<FractionalPath> fpaths;
        Rng frng(derive_seed(cfg.seed, 77 ^ point_tag, static_cast<std::uint64_t>(trial)));
        for (const auto& p : t.chan.paths) {
            double d = p.delay + frng.uniform(-0.5, 0.5);
            d = std::min(std::max(d, 0.0), static_cast<double>(cfg.l_max));
            fpaths.push_back({p.gain, d, p.doppler});
        }
        t.frac = fractional_taps(fpaths, cfg.fractional_eps, cfg.geometry);
        t.received = apply_fractional(t.training.time_signal, t.frac, cfg.noise_var, noise_seed);
    } else {
        t.received = apply_channel(t.training.time_signal, t.chan, cfg.noise_var, noise_seed);
    }
    return t;
}

}  // namespace detail

// NMSE for the fractional-delay tap model: the true delay-time vector of tap
// p is the time-varying response h[nM+m, p]; estimates are integer paths.
inline double nmse_fractional(const FractionalTapChannel& frac,
                              const std::vector<PathEstimate>& est, const FrameGeometry& g,
                              NmseMode mode = NmseMode::union_delays) {
    std::map<int, std::vector<ChannelPath>> est_by_delay;
    for (const auto& p : est) est_by_delay[p.delay].push_back({p.gain, p.delay, p.doppler});

    std::set<int> taps(frac.taps.begin(), frac.taps.end());
    if (mode == NmseMode::union_delays)
        for (const auto& [d, _] : est_by_delay) taps.insert(d);

    double num = 0.0, den = 0.0;
    for (int p : taps) {
        const bool is_true_tap =
            std::find(frac.taps.begin(), frac.taps.end(), p) != frac.taps.end();
        auto ei = est_by_delay.find(p);
        for (int m = 0; m < g.M; ++m) {
            for (int n = 0; n < g.N; ++n) {
                const cplx vt = is_true_tap ? frac.response(n * g.M + m, p) : cplx{0.0, 0.0};
                cplx ve{0.0, 0.0};
                if (ei != est_by_delay.end())
                    for (const auto& q : ei->second) {
                        const int ks = signed_doppler(q.doppler, g.N);
                        ve += q.gain *
                              cis_cycles(static_cast<double>(ks) * (n * g.M + m - p) / g.size());
                    }
                num += std::norm(ve - vt);
                den += std::norm(vt);
            }
        }
    }
    if (den == 0.0) throw std::invalid_argument("nmse_fractional: zero-energy truth");
    return num / den;
}

// --- NMSE vs pilot SNR -------------------------------------------------------

inline std::vector<MetricsRow> run_nmse_sweep(const ExperimentConfig& cfg) {
    std::vector<MetricsRow> rows;
    for (std::size_t pt = 0; pt < cfg.snr_p_sweep_db.size(); ++pt) {
        const double snr_p = cfg.snr_p_sweep_db[pt];
        const std::uint64_t point_tag = splitmix64(0x10 + pt);
        double acc = 0.0;
        for (int trial = 0; trial < cfg.trials; ++trial) {
            auto t = detail::make_trial(cfg, snr_p, point_tag, trial);
            EstimateResult est = cfg.csi == CsiMode::aliased_only
                                     ? estimate_aliased_only(t.received, t.training, t.est_cfg)
                                     : estimate(t.received, t.training, t.est_cfg);
            acc += cfg.fractional
                       ? nmse_fractional(t.frac, est.paths, cfg.geometry, cfg.nmse_mode)
                       : nmse(t.chan, est.paths, cfg.geometry, cfg.nmse_mode);
        }
        MetricsRow r;
        r.sweep_db = snr_p;
        r.metric = cfg.csi == CsiMode::aliased_only ? "nmse_aliased" : "nmse";
        r.value = acc / cfg.trials;
        r.trials = cfg.trials;
        r.errors = 0;
        r.seed = derive_seed(cfg.seed, detail::kStreamChannel ^ point_tag, 0);
        rows.push_back(r);
    }
    return rows;
}

// --- BER vs data SNR ----------------------------------------------------------

inline std::vector<MetricsRow> run_ber_sweep(const ExperimentConfig& cfg) {
    std::vector<MetricsRow> rows;
    const int bits_per_frame =
        cfg.geometry.size() * QamConstellation(cfg.qam_order, 1.0).bits_per_symbol();
    for (std::size_t pt = 0; pt < cfg.snr_d_sweep_db.size(); ++pt) {
        const double snr_d = cfg.snr_d_sweep_db[pt];
        const std::uint64_t point_tag = splitmix64(0x20 + pt);
        const double es = cfg.noise_var * std::pow(10.0, snr_d / 10.0);
        const QamConstellation qam(cfg.qam_order, es);
        DetectorConfig det;
        det.n_iter = cfg.n_iter;
        det.delta_bar = cfg.delta_bar;

        long errors = 0;
        long bits_total = 0;
        int frames = 0;
        for (; frames < cfg.max_frames &&
               (errors < cfg.target_bit_errors || frames < cfg.min_frames);
             ++frames) {
            auto t = detail::make_trial(cfg, cfg.snr_p_db, point_tag, frames);

            std::vector<ChannelPath> csi;
            switch (cfg.csi) {
                case CsiMode::perfect:
                    csi = t.chan.paths;
                    break;
                case CsiMode::aliased_only:
                    csi = to_channel_paths(
                        estimate_aliased_only(t.received, t.training, t.est_cfg).paths);
                    break;
                default:
                    csi = to_channel_paths(estimate(t.received, t.training, t.est_cfg).paths);
            }
            if (csi.empty()) {  // nothing detected: count the whole frame as garbage
                errors += bits_per_frame / 2;
                bits_total += bits_per_frame;
                continue;
            }

            // independent data frame through the same realization
            Rng drng(derive_seed(cfg.seed, detail::kStreamData ^ point_tag,
                                 static_cast<std::uint64_t>(frames)));
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(bits_per_frame));
            for (auto& b : bits) b = static_cast<std::uint8_t>(drng.uniform_index(2));
            DDGrid x(cfg.geometry);
            x.values = qam.map(bits);
            const TimeSignal s = idzt(x);
            const std::uint64_t dnoise = derive_seed(cfg.seed, detail::kStreamDataNoise ^ point_tag,
                                                     static_cast<std::uint64_t>(frames));
            const TimeSignal r = cfg.fractional
                                     ? apply_fractional(s, t.frac, cfg.noise_var, dnoise)
                                     : apply_channel(s, t.chan, cfg.noise_var, dnoise);

            const DetectResult det_res = mrc_detect(r, csi, qam, det);
            for (int b = 0; b < bits_per_frame; ++b)
                if (det_res.bits[b] != bits[b]) ++errors;
            bits_total += bits_per_frame;
        }

        MetricsRow r;
        r.sweep_db = snr_d;
        r.metric = "ber";
        r.value = bits_total > 0 ? static_cast<double>(errors) / bits_total : 0.0;
        r.trials = frames;
        r.errors = errors;
        r.seed = derive_seed(cfg.seed, detail::kStreamChannel ^ point_tag, 0);
        rows.push_back(r);
    }
    return rows;
}

// --- refinement invocation census ----------------------------------------------

struct CensusResult {
    int trials = 0;
    int refine1 = 0;
    int refine2 = 0;
};

inline CensusResult run_refinement_census(const ExperimentConfig& cfg) {
    CensusResult out;
    const std::uint64_t point_tag = splitmix64(0x30);
    out.trials = cfg.trials;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        auto t = detail::make_trial(cfg, cfg.snr_p_db, point_tag, trial);
        const EstimateResult est = estimate(t.received, t.training, t.est_cfg);
        if (est.diag.refine1_invoked) ++out.refine1;
        if (est.diag.refine2_invoked) ++out.refine2;
    }
    return out;
}

inline std::vector<MetricsRow> census_rows(const ExperimentConfig& cfg, const CensusResult& c) {
    MetricsRow r1{cfg.snr_p_db, "refine1_pct", 100.0 * c.refine1 / c.trials, c.trials, c.refine1,
                  cfg.seed};
    MetricsRow r2{cfg.snr_p_db, "refine2_pct", 100.0 * c.refine2 / c.trials, c.trials, c.refine2,
                  cfg.seed};
    return {r1, r2};
}

}  // namespace otfs
