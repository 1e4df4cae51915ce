// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the OTFS overspread-channel toolkit: Monte-Carlo
// NMSE/BER sweeps, refinement census, single-capture estimation, and channel
// generation.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "otfs/harness.hpp"
#include "otfs/svg.hpp"

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << content;
}

void emit(const std::vector<otfs::MetricsRow>& rows, const std::string& out_csv) {
    const std::string csv = otfs::to_csv(rows);
    if (out_csv.empty())
        std::cout << csv;
    else
        write_text(out_csv, csv);
}

otfs::SvgCurve curve_from(const std::vector<otfs::MetricsRow>& rows, const std::string& label,
                          const std::string& color) {
    otfs::SvgCurve c;
    c.label = label;
    c.color = color;
    for (const auto& r : rows) {
        c.x.push_back(r.sweep_db);
        c.y.push_back(r.value);
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OTFS link simulator for overspread delay channels"};
    app.require_subcommand(1);

    std::string config_path, out_csv, out_svg, channel_file, capture_file;
    std::uint64_t seed_override = 0;
    bool have_seed = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON experiment config")->required();
        cmd->add_option("--out", out_csv, "output CSV path (default: stdout)");
        cmd->add_option("--seed", seed_override, "master seed override")
            ->each([&](const std::string&) { have_seed = true; });
    };

    auto* nmse_cmd = app.add_subcommand("nmse-sweep", "NMSE vs pilot SNR");
    add_common(nmse_cmd);
    nmse_cmd->add_option("--svg", out_svg, "also render the curve to this SVG file");
    bool with_baseline = false;
    nmse_cmd->add_flag("--baseline", with_baseline,
                       "also run the aliased-only embedded-pilot baseline");

    auto* ber_cmd = app.add_subcommand("ber-sweep", "BER vs data SNR");
    add_common(ber_cmd);
    ber_cmd->add_option("--svg", out_svg, "also render the curve to this SVG file");

    auto* census_cmd = app.add_subcommand("refine-census", "refinement invocation rates");
    add_common(census_cmd);

    auto* est_cmd = app.add_subcommand("estimate-file", "estimate paths from a capture file");
    est_cmd->add_option("--config", config_path, "JSON experiment config")->required();
    est_cmd->add_option("--capture", capture_file, "binary time-signal capture")->required();
    est_cmd->add_option("--out", out_csv, "output path list file (default: stdout)");

    auto* gen_cmd = app.add_subcommand("gen-channel", "generate a channel realization");
    gen_cmd->add_option("--config", config_path, "JSON experiment config")->required();
    gen_cmd->add_option("--out", channel_file, "output channel text file")->required();
    gen_cmd->add_option("--seed", seed_override, "master seed override")
        ->each([&](const std::string&) { have_seed = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        otfs::ExperimentConfig cfg = otfs::load_config(config_path);
        if (have_seed) cfg.seed = seed_override;

        if (app.got_subcommand(nmse_cmd)) {
            auto rows = otfs::run_nmse_sweep(cfg);
            std::vector<otfs::SvgCurve> curves{curve_from(rows, "two-stage", "#c0392b")};
            if (with_baseline) {
                otfs::ExperimentConfig base = cfg;
                base.csi = otfs::CsiMode::aliased_only;
                auto brows = otfs::run_nmse_sweep(base);
                curves.push_back(curve_from(brows, "aliased-only", "#2980b9"));
                rows.insert(rows.end(), brows.begin(), brows.end());
            }
            emit(rows, out_csv);
            if (!out_svg.empty()) otfs::write_svg(curves, "pilot SNR [dB]", "NMSE", out_svg);
        } else if (app.got_subcommand(ber_cmd)) {
            auto rows = otfs::run_ber_sweep(cfg);
            emit(rows, out_csv);
            if (!out_svg.empty())
                otfs::write_svg({curve_from(rows, "ber", "#c0392b")}, "data SNR [dB]", "BER",
                                out_svg);
        } else if (app.got_subcommand(census_cmd)) {
            emit(otfs::census_rows(cfg, otfs::run_refinement_census(cfg)), out_csv);
        } else if (app.got_subcommand(est_cmd)) {
            const otfs::TimeSignal r =
                otfs::read_time_signal(capture_file, cfg.geometry.delta_f);
            const otfs::EstimatorConfig est_cfg = cfg.estimator_config(cfg.snr_p_db);
            const otfs::cplx xp =
                otfs::pilot_from_snr_db(cfg.snr_p_db, cfg.noise_var, r.geometry);
            const otfs::ChirpParams chirp =
                otfs::ChirpParams::from_snr_db(cfg.snr_c_db, cfg.noise_var);
            const otfs::TrainingFrame tf =
                otfs::build_training(xp, chirp, r.geometry, est_cfg.delta);
            const otfs::EstimateResult res = otfs::estimate(r, tf, est_cfg);
            if (out_csv.empty()) {
                otfs::write_paths(res, std::cout);
            } else {
                std::ofstream f(out_csv);
                otfs::write_paths(res, f);
            }
        } else if (app.got_subcommand(gen_cmd)) {
            const otfs::ChannelRealization chan = otfs::generate_channel(
                cfg.profile, cfg.geometry, cfg.l_max, cfg.n_paths, cfg.seed);
            otfs::write_channel_file(chan, channel_file);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
