// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/training.hpp"
#include "otfs/zak.hpp"

namespace otfs {

// Thresholds for the two-stage estimator. All scales are dimensionless and
// multiply noise_var where a power is compared.
struct EstimatorConfig {
    double alpha = 4.0;          // Doppler bin scale vs per-row average power
    double delta = 30.0;         // delay-row detection scale vs (2A^2/N + sigma^2)
    double alpha_prime = 2.0;    // residual-power test scale: T' = alpha' sigma^2
    double gamma_pilot = 1000.0; // pilot-removal scale: zero samples above gamma_pilot*sigma^2
    double gamma_corr = 500.0;   // correlation magnitude threshold on |R[q]|
    double gamma_mse = 2.0;      // reconstruction-MSE gate scale
    double eps1 = 0.6;           // refinement closeness ratio, in (0, 1)
    double noise_var = 1.0;      // sigma_w^2, assumed known at the receiver
    int l_max = 0;               // known delay bound
};

enum class PathSource { stage1, stage2, refine2 };

inline const char* to_string(PathSource s) {
    switch (s) {
        case PathSource::stage1: return "stage1";
        case PathSource::stage2: return "stage2";
        default: return "refine2";
    }
}

struct PathEstimate {
    int delay = 0;
    int doppler = 0;  // grid index in [0, N)
    cplx gain{0.0, 0.0};
    PathSource source = PathSource::stage1;
};

inline std::vector<ChannelPath> to_channel_paths(const std::vector<PathEstimate>& est) {
    std::vector<ChannelPath> out;
    out.reserve(est.size());
    for (const auto& p : est) out.push_back({p.gain, p.delay, p.doppler});
    return out;
}

// Result of the embedded-pilot stage.
struct Stage1Result {
    std::vector<PathEstimate> paths;             // resolved underspread paths, b = 0
    std::vector<int> detected_rows;              // set A
    std::map<int, std::vector<int>> doppler_sets;  // K_l for every detected row
    std::vector<int> aliased_rows;               // set J, rows deferred to stage 2
    std::vector<int> dropped_rows;               // detected rows with empty K_l
    std::vector<double> row_power;               // P(l), all rows
};

// Per-row correlation table built in stage 2.
struct CorrelationTable {
    int aliased = 0;                     // the row this table belongs to
    std::vector<int> candidate_delays;   // aliased + b*M for b in B (filtered to l_max)
    std::vector<int> dopplers;           // K_l, ascending grid indices
    std::vector<std::vector<cplx>> corr; // corr[beta][lambda]
    std::vector<int> winner;             // per-beta argmax_lambda |corr|
    std::vector<int> selected;           // index set I into candidate_delays, ascending
};

struct EstimatorDiagnostics {
    std::vector<double> mse_trace;
    bool stage2_ran = false;
    bool stage2_aborted = false;   // empty B with nonempty J
    bool under_resolved = false;   // fewer block candidates than Dopplers at some row
    bool refine1_invoked = false;
    bool refine1_changed = false;
    bool refine2_invoked = false;
    bool refine2_added = false;
    std::vector<int> block_set;    // B
    std::vector<CorrelationTable> tables;
    OpCounter ops;
    std::string note;
};

struct EstimateResult {
    std::vector<PathEstimate> paths;  // sorted ascending by delay
    EstimatorDiagnostics diag;
};

// ---------------------------------------------------------------------------
// Stage 1: embedded-pilot detection with adaptive thresholds
// ---------------------------------------------------------------------------

inline Stage1Result stage1(const DDGrid& y_t, cplx effective_pilot, double chirp_amplitude,
                           const EstimatorConfig& cfg, OpCounter* ops = nullptr) {
    const int M = y_t.geometry.M;
    const int N = y_t.geometry.N;
    Stage1Result out;
    out.row_power.resize(M, 0.0);

    const double row_gate =
        cfg.delta * (2.0 * chirp_amplitude * chirp_amplitude / N + cfg.noise_var);

    for (int l = 0; l < M; ++l) {
        double p = 0.0;
        for (int k = 0; k < N; ++k) p += std::norm(y_t.at(l, k));
        p /= N;
        out.row_power[l] = p;
        if (ops) ops->detection += static_cast<std::uint64_t>(N);

        if (p < row_gate) continue;

        std::vector<int> ks;
        const double bin_gate = cfg.alpha * p;
        for (int k = 0; k < N; ++k)
            if (std::norm(y_t.at(l, k)) > bin_gate) ks.push_back(k);

        if (ks.empty()) {
            out.dropped_rows.push_back(l);  // detected row without a Doppler peak
            continue;
        }
        out.detected_rows.push_back(l);
        out.doppler_sets[l] = ks;

        // average power at this row excluding the detected pilot bins
        double peak_power = 0.0;
        for (int k : ks) peak_power += std::norm(y_t.at(l, k));
        const double residual =
            (static_cast<int>(ks.size()) >= N)
                ? 0.0
                : (N * p - peak_power) / static_cast<double>(N - static_cast<int>(ks.size()));

        if (residual <= cfg.alpha_prime * cfg.noise_var) {
            for (int k : ks)
                out.paths.push_back({l, k, y_t.at(l, k) / effective_pilot, PathSource::stage1});
        } else {
            out.aliased_rows.push_back(l);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stage 2: dual-chirp correlation
// ---------------------------------------------------------------------------

// Zeroes samples whose instantaneous power exceeds gamma_pilot * sigma^2.
inline TimeSignal isolate_chirp(const TimeSignal& r_t, const EstimatorConfig& cfg) {
    TimeSignal out = r_t;
    const double gate = cfg.gamma_pilot * cfg.noise_var;
    for (auto& v : out.samples)
        if (std::norm(v) > gate) v = {0.0, 0.0};
    return out;
}

// Cross-correlation of the pilot-stripped capture against a chirp template
// anchored at lag q. The template has support [0, M-1], so the sum is short.
inline cplx chirp_correlation_at(const TimeSignal& rc, const TimeSignal& tmpl, int lag,
                                 OpCounter* ops = nullptr) {
    const int MN = rc.geometry.size();
    const int M = rc.geometry.M;
    const int hi = std::min(M - 1, MN - 1 - lag);
    cplx acc{0.0, 0.0};
    for (int u = 0; u <= hi; ++u) acc += rc.samples[lag + u] * std::conj(tmpl.samples[u]);
    if (ops) ops->correlation += static_cast<std::uint64_t>(hi + 1);
    return acc;
}

struct BlockCandidates {
    std::vector<cplx> corr;       // R[q] over q in [0, l_max]
    std::vector<int> above;       // Q: sample lags with |R[q]| >= gamma_corr
    std::vector<int> blocks;      // B: unique floor(q/M), ascending
};

inline BlockCandidates block_candidates(const TimeSignal& rc, const TimeSignal& tmpl,
                                        const EstimatorConfig& cfg, OpCounter* ops = nullptr) {
    BlockCandidates out;
    out.corr.resize(static_cast<std::size_t>(cfg.l_max) + 1);
    std::set<int> blocks;
    for (int q = 0; q <= cfg.l_max; ++q) {
        out.corr[q] = chirp_correlation_at(rc, tmpl, q, ops);
        if (std::abs(out.corr[q]) >= cfg.gamma_corr) {
            out.above.push_back(q);
            blocks.insert(q / rc.geometry.M);
        }
    }
    out.blocks.assign(blocks.begin(), blocks.end());
    return out;
}

// Time-domain gain with interference cancellation: paths already in the list
// with smaller delay are subtracted from the received sample at this delay.
// `sorted` must be ascending in delay with gains valid for every entry whose
// delay is below `delay`.
inline cplx gain_td(const TimeSignal& r_t, const TimeSignal& s_t,
                    const std::vector<PathEstimate>& sorted, int delay, OpCounter* ops = nullptr) {
    const int MN = r_t.geometry.size();
    const int N = r_t.geometry.N;
    cplx num = r_t.samples[delay];
    for (const auto& p : sorted) {
        if (p.delay >= delay) break;
        const int off = delay - p.delay;
        if (off >= MN) continue;
        const cplx s = s_t.samples[off];
        if (s == cplx{0.0, 0.0}) continue;
        const int ks = signed_doppler(p.doppler, N);
        num -= p.gain * cis_cycles(static_cast<double>(ks) * off / MN) * s;
        if (ops) ops->reconstruction += 2;
    }
    return num / s_t.samples[0];
}

// Training-frame reconstruction from a path list (noiseless synthesis).
inline TimeSignal reconstruct_training(const std::vector<PathEstimate>& paths,
                                       const TimeSignal& s_t, OpCounter* ops = nullptr) {
    ChannelRealization chan;
    chan.l_max = s_t.geometry.size() - 1;
    chan.paths = to_channel_paths(paths);
    std::sort(chan.paths.begin(), chan.paths.end(),
              [](const ChannelPath& a, const ChannelPath& b) { return a.delay < b.delay; });
    return apply_channel(s_t, chan, 0.0, 0, ops);
}

inline double reconstruction_mse(const TimeSignal& r_t, const std::vector<PathEstimate>& paths,
                                 const TimeSignal& s_t, OpCounter* ops = nullptr) {
    const TimeSignal rhat = reconstruct_training(paths, s_t, ops);
    double e = 0.0;
    for (std::size_t q = 0; q < r_t.size(); ++q) e += std::norm(r_t.samples[q] - rhat.samples[q]);
    if (ops) ops->reconstruction += r_t.size();
    return e / static_cast<double>(r_t.size());
}

// Gain polish: cyclic re-estimation of every gain against the full-frame
// residual. Eq-style single-sample cancellation leaves each gain with the
// noise of one sample; correlating the residual with the path's whole
// signature (pilot comb plus chirp span) converges to the least-squares
// gains in a couple of sweeps and is exact on noiseless frames.
inline void polish_gains(const TimeSignal& r_t, const TimeSignal& s_t,
                         std::vector<PathEstimate>& paths, int sweeps = 2,
                         OpCounter* ops = nullptr) {
    if (paths.empty()) return;
    const int MN = r_t.geometry.size();
    const int M = r_t.geometry.M;
    const int N = r_t.geometry.N;

    TimeSignal resid = r_t;
    {
        const TimeSignal rhat = reconstruct_training(paths, s_t, ops);
        for (int q = 0; q < MN; ++q) resid.samples[q] -= rhat.samples[q];
    }

    // per-path signature support: the chirp span [l, l+M) plus the pilot
    // comb l + jM for j >= 1
    auto for_support = [&](const PathEstimate& p, auto&& fn) {
        const int ks = signed_doppler(p.doppler, N);
        const double cyc = static_cast<double>(ks) / MN;
        for (int off = 0; off < M && p.delay + off < MN; ++off)
            fn(p.delay + off, cis_cycles(cyc * off) * s_t.samples[off]);
        for (int off = M; p.delay + off < MN; off += M)
            fn(p.delay + off, cis_cycles(cyc * off) * s_t.samples[off]);
    };

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (auto& p : paths) {
            cplx num{0.0, 0.0};
            double den = 0.0;
            for_support(p, [&](int q, cplx sig) {
                num += resid.samples[q] * std::conj(sig);
                den += std::norm(sig);
            });
            if (den == 0.0) continue;
            const cplx dh = num / den;
            p.gain += dh;
            for_support(p, [&](int q, cplx sig) { resid.samples[q] -= dh * sig; });
            if (ops) ops->reconstruction += static_cast<std::uint64_t>(3 * (M + N));
        }
    }
}

namespace detail {

inline void insert_sorted(std::vector<PathEstimate>& paths, const PathEstimate& p) {
    auto it = std::lower_bound(paths.begin(), paths.end(), p,
                               [](const PathEstimate& a, const PathEstimate& b) {
                                   return a.delay < b.delay;
                               });
    paths.insert(it, p);
}

inline std::vector<PathEstimate>::iterator find_delay(std::vector<PathEstimate>& paths, int delay) {
    return std::find_if(paths.begin(), paths.end(),
                        [delay](const PathEstimate& p) { return p.delay == delay; });
}

}  // namespace detail

// Correlation source used for the stage-2 table. Tests may substitute a
// synthetic table; production code correlates against Doppler-matched
// dual-chirp templates.
using CorrelationSource = std::function<cplx(int lag, int doppler_grid)>;

inline CorrelationSource chirp_correlation_source(const TimeSignal& rc, const ChirpParams& params,
                                                  OpCounter* ops = nullptr) {
    // templates are cached per Doppler; a row set K_l reuses them across blocks
    auto cache = std::make_shared<std::map<int, TimeSignal>>();
    const FrameGeometry g = rc.geometry;
    return [&rc, params, g, cache, ops](int lag, int doppler_grid) {
        auto it = cache->find(doppler_grid);
        if (it == cache->end()) {
            const int ks = signed_doppler(doppler_grid, g.N);
            it = cache->emplace(doppler_grid, dual_chirp(0, ks, params, g)).first;
        }
        return chirp_correlation_at(rc, it->second, lag, ops);
    };
}

// ---------------------------------------------------------------------------
// Refinements
// ---------------------------------------------------------------------------

// Doppler rectification: when a winning correlation is nearly tied with a
// losing Doppler at the same candidate delay, try every pairing of the row's
// Dopplers with the selected delays and keep the one with the least MSE.
inline bool refine1(double& mse, const TimeSignal& r_t, const TimeSignal& s_t,
                    const CorrelationTable& table, std::vector<PathEstimate>& paths,
                    const EstimatorConfig& cfg, OpCounter* ops = nullptr) {
    const std::size_t n_dop = table.dopplers.size();
    if (n_dop < 2 || table.selected.empty()) return false;

    bool near_tie = false;
    for (int beta : table.selected) {
        const cplx best = table.corr[beta][table.winner[beta]];
        for (std::size_t lam = 0; lam < n_dop; ++lam) {
            if (static_cast<int>(lam) == table.winner[beta]) continue;
            if (std::abs(best - table.corr[beta][lam]) <= cfg.eps1 * std::abs(best)) {
                near_tie = true;
                break;
            }
        }
        if (near_tie) break;
    }
    if (!near_tie) return false;

    std::vector<int> selected_delays;
    for (int beta : table.selected) selected_delays.push_back(table.candidate_delays[beta]);
    std::sort(selected_delays.begin(), selected_delays.end());

    std::vector<int> perm = table.dopplers;  // ascending = first permutation
    std::vector<PathEstimate> best_paths = paths;
    double best_mse = mse;
    bool changed = false;
    do {
        std::vector<PathEstimate> trial = paths;
        for (std::size_t i = 0; i < selected_delays.size(); ++i) {
            auto it = detail::find_delay(trial, selected_delays[i]);
            if (it == trial.end()) continue;
            it->doppler = perm[i % perm.size()];
        }
        for (int d : selected_delays) {
            auto it = detail::find_delay(trial, d);
            if (it != trial.end()) it->gain = gain_td(r_t, s_t, trial, d, ops);
        }
        const double m = reconstruction_mse(r_t, trial, s_t, ops);
        if (m < best_mse) {
            best_mse = m;
            best_paths = trial;
            changed = true;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    if (changed) {
        paths = std::move(best_paths);
        mse = best_mse;
    }
    return changed;
}

// Delay recovery: a non-selected block candidate whose correlation is close
// to the selected same-Doppler winner is tentatively added; the addition is
// kept only when the reconstruction MSE strictly decreases.
inline bool refine2(double& mse, const TimeSignal& r_t, const TimeSignal& s_t,
                    const CorrelationTable& table, std::vector<PathEstimate>& paths,
                    const EstimatorConfig& cfg, OpCounter* ops = nullptr) {
    bool added = false;
    const std::size_t n_beta = table.candidate_delays.size();
    for (std::size_t beta = 0; beta < n_beta; ++beta) {
        if (std::find(table.selected.begin(), table.selected.end(), static_cast<int>(beta)) !=
            table.selected.end())
            continue;
        const int lam = table.winner[beta];
        const int k_cand = table.dopplers[lam];

        // the selected candidate that won with the same Doppler
        int beta_star = -1;
        for (int b : table.selected)
            if (table.winner[b] == lam) {
                beta_star = b;
                break;
            }
        if (beta_star < 0) continue;

        const cplx ref = table.corr[beta_star][table.winner[beta_star]];
        if (std::abs(ref - table.corr[beta][lam]) > cfg.eps1 * std::abs(ref)) continue;

        const int l_cand = table.candidate_delays[beta];
        if (detail::find_delay(paths, l_cand) != paths.end()) continue;

        // previously selected path carrying this Doppler (current state),
        // falling back to the same-Doppler winner's delay
        auto prev = std::find_if(paths.begin(), paths.end(), [&](const PathEstimate& p) {
            return p.delay % r_t.geometry.M == table.aliased && p.doppler == k_cand;
        });
        if (prev == paths.end()) prev = detail::find_delay(paths, table.candidate_delays[beta_star]);
        if (prev == paths.end()) continue;
        const int prev_delay = prev->delay;
        const cplx prev_gain = prev->gain;

        std::vector<PathEstimate> trial = paths;
        detail::insert_sorted(trial, {l_cand, k_cand, {0.0, 0.0}, PathSource::refine2});
        // recompute the affected pair in ascending delay order
        const int lo = std::min(prev_delay, l_cand), hi = std::max(prev_delay, l_cand);
        for (int d : {lo, hi}) {
            auto it = detail::find_delay(trial, d);
            if (it != trial.end()) it->gain = gain_td(r_t, s_t, trial, d, ops);
        }
        const double m = reconstruction_mse(r_t, trial, s_t, ops);
        if (m < mse) {
            paths = std::move(trial);
            mse = m;
            added = true;
        } else {
            auto it = detail::find_delay(paths, prev_delay);
            if (it != paths.end()) it->gain = prev_gain;  // restore
        }
    }
    return added;
}

// ---------------------------------------------------------------------------
// Stage-2 driver (dual-chirp correlation, gains, MSE gate, refinements)
// ---------------------------------------------------------------------------

inline void stage2_chirpcorr(const TimeSignal& r_t, const TrainingFrame& training,
                             const Stage1Result& s1, const EstimatorConfig& cfg,
                             std::vector<PathEstimate>& paths, EstimatorDiagnostics& diag,
                             const CorrelationSource* corr_override = nullptr) {
    const FrameGeometry g = r_t.geometry;
    const TimeSignal& s_t = training.time_signal;
    diag.stage2_ran = true;

    const TimeSignal rc = isolate_chirp(r_t, cfg);
    const TimeSignal tmpl0 = dual_chirp(0, 0, training.chirp, g);
    const BlockCandidates bc = block_candidates(rc, tmpl0, cfg, &diag.ops);
    diag.block_set = bc.blocks;

    if (bc.blocks.empty()) {
        diag.stage2_aborted = true;
        diag.note = "correlation threshold too high: no block candidates for aliased rows";
        diag.mse_trace.push_back(reconstruction_mse(r_t, paths, s_t, &diag.ops));
        return;
    }

    CorrelationSource source = chirp_correlation_source(rc, training.chirp, &diag.ops);
    if (corr_override) source = *corr_override;

    // correlation tables and delay/Doppler selection, row by row
    for (int aliased : s1.aliased_rows) {
        CorrelationTable table;
        table.aliased = aliased;
        table.dopplers = s1.doppler_sets.at(aliased);
        for (int b : bc.blocks) {
            const int cand = aliased + b * g.M;
            if (cand <= cfg.l_max && cand < g.size()) table.candidate_delays.push_back(cand);
        }
        if (table.candidate_delays.empty()) continue;

        table.corr.resize(table.candidate_delays.size());
        table.winner.resize(table.candidate_delays.size());
        for (std::size_t beta = 0; beta < table.candidate_delays.size(); ++beta) {
            table.corr[beta].resize(table.dopplers.size());
            int best = 0;
            for (std::size_t lam = 0; lam < table.dopplers.size(); ++lam) {
                table.corr[beta][lam] =
                    source(table.candidate_delays[beta], table.dopplers[lam]);
                if (std::abs(table.corr[beta][lam]) > std::abs(table.corr[beta][best]))
                    best = static_cast<int>(lam);
            }
            table.winner[beta] = best;
        }

        // the |K| strongest per-block winners become path candidates
        const std::size_t want = table.dopplers.size();
        if (table.candidate_delays.size() < want) diag.under_resolved = true;
        std::vector<int> order(table.candidate_delays.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(table.corr[a][table.winner[a]]) >
                   std::abs(table.corr[b][table.winner[b]]);
        });
        order.resize(std::min(want, order.size()));
        std::sort(order.begin(), order.end());
        table.selected = order;

        for (int beta : table.selected) {
            const PathEstimate p{table.candidate_delays[beta],
                                 table.dopplers[table.winner[beta]],
                                 {0.0, 0.0},
                                 PathSource::stage2};
            if (detail::find_delay(paths, p.delay) == paths.end())
                detail::insert_sorted(paths, p);
        }
        diag.tables.push_back(std::move(table));
    }

    // Gains for the complete list in ascending delay order; stage-1 gains are
    // re-derived in the time domain as well, which removes the chirp bias the
    // grid-domain divisor cannot see.
    for (auto& p : paths) p.gain = gain_td(r_t, s_t, paths, p.delay, &diag.ops);

    double mse = reconstruction_mse(r_t, paths, s_t, &diag.ops);
    diag.mse_trace.push_back(mse);

    const double gate = cfg.gamma_mse * cfg.noise_var;
    if (mse >= gate) {
        for (const auto& table : diag.tables) {
            if (table.dopplers.size() < 2) continue;
            diag.refine1_invoked = true;
            if (refine1(mse, r_t, s_t, table, paths, cfg, &diag.ops)) {
                diag.refine1_changed = true;
                diag.mse_trace.push_back(mse);
            }
        }
    }
    if (mse >= gate) {
        diag.refine2_invoked = true;
        for (const auto& table : diag.tables) {
            if (refine2(mse, r_t, s_t, table, paths, cfg, &diag.ops)) {
                diag.refine2_added = true;
                diag.mse_trace.push_back(mse);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Top-level estimate
// ---------------------------------------------------------------------------

inline EstimateResult estimate(const TimeSignal& r_t, const TrainingFrame& training,
                               const EstimatorConfig& cfg,
                               const CorrelationSource* corr_override = nullptr) {
    if (!(r_t.geometry == training.geometry))
        throw std::invalid_argument("estimate: capture and training geometry mismatch");

    EstimateResult out;
    const DDGrid y_t = dzt(r_t, &out.diag.ops);
    const Stage1Result s1 = stage1(y_t, training.effective_pilot(),
                                   training.chirp.amplitude, cfg, &out.diag.ops);
    out.paths = s1.paths;

    if (!s1.aliased_rows.empty()) {
        stage2_chirpcorr(r_t, training, s1, cfg, out.paths, out.diag, corr_override);
    } else {
        out.diag.mse_trace.push_back(
            reconstruction_mse(r_t, out.paths, training.time_signal, &out.diag.ops));
    }
    if (!out.paths.empty()) {
        polish_gains(r_t, training.time_signal, out.paths, 2, &out.diag.ops);
        out.diag.mse_trace.push_back(
            reconstruction_mse(r_t, out.paths, training.time_signal, &out.diag.ops));
    }
    if (!s1.dropped_rows.empty() && out.diag.note.empty()) {
        std::ostringstream os;
        os << "dropped rows without Doppler peaks:";
        for (int l : s1.dropped_rows) os << ' ' << l;
        out.diag.note = os.str();
    }
    return out;
}

// Embedded-pilot baseline: every detected (row, Doppler) pair is taken at
// face value as an underspread path. This is the scheme overspread channels
// defeat; it exists for the comparison sweeps.
inline EstimateResult estimate_aliased_only(const TimeSignal& r_t, const TrainingFrame& training,
                                            const EstimatorConfig& cfg) {
    EstimateResult out;
    const DDGrid y_t = dzt(r_t, &out.diag.ops);
    const Stage1Result s1 = stage1(y_t, training.effective_pilot(),
                                   training.chirp.amplitude, cfg, &out.diag.ops);
    out.paths = s1.paths;
    for (int l : s1.aliased_rows)
        for (int k : s1.doppler_sets.at(l))
            detail::insert_sorted(out.paths,
                                  {l, k, y_t.at(l, k) / training.effective_pilot(),
                                   PathSource::stage1});
    out.diag.mse_trace.push_back(
        reconstruction_mse(r_t, out.paths, training.time_signal, &out.diag.ops));
    return out;
}

// ---------------------------------------------------------------------------
// Text serialization of a path list plus diagnostics
// ---------------------------------------------------------------------------

inline void write_paths(const EstimateResult& res, std::ostream& os) {
    os << "# otfs path estimates v1\n";
    os << "# l k re(h) im(h) source\n";
    os.precision(17);
    for (const auto& p : res.paths)
        os << p.delay << ' ' << p.doppler << ' ' << p.gain.real() << ' ' << p.gain.imag() << ' '
           << to_string(p.source) << '\n';
    os << "# diagnostics\n";
    os << "# mse_trace:";
    for (double m : res.diag.mse_trace) os << ' ' << m;
    os << '\n';
    os << "# refine1: invoked=" << res.diag.refine1_invoked
       << " changed=" << res.diag.refine1_changed << '\n';
    os << "# refine2: invoked=" << res.diag.refine2_invoked
       << " added=" << res.diag.refine2_added << '\n';
    os << "# stage2: ran=" << res.diag.stage2_ran << " aborted=" << res.diag.stage2_aborted
       << " under_resolved=" << res.diag.under_resolved << '\n';
    os << "# ops: total=" << res.diag.ops.total() << '\n';
    if (!res.diag.note.empty()) os << "# note: " << res.diag.note << '\n';
}

inline std::vector<PathEstimate> read_paths(std::istream& is) {
    std::vector<PathEstimate> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        PathEstimate p;
        double re, im;
        std::string src;
        if (!(ls >> p.delay >> p.doppler >> re >> im >> src)) continue;
        p.gain = {re, im};
        p.source = src == "stage1" ? PathSource::stage1
                                   : (src == "refine2" ? PathSource::refine2 : PathSource::stage2);
        out.push_back(p);
    }
    return out;
}

}  // namespace otfs
