// isac_cli: command-line driver over the C API.
//
// exit codes: 0 success, 1 usage, 2 runtime failure

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isac/isac_c.h"

namespace {

struct Failure {
    std::string what;
};

void check(isac_status s, const std::string& ctx) {
    if (s != ISAC_OK) throw Failure{ctx + ": " + isac_status_name(s) + ": " + isac_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    T* get() const { return p; }
};
using Scenario = Handle<isac_scenario, isac_scenario_free>;
using Beams = Handle<isac_beams, isac_beams_free>;
using Frame = Handle<isac_frame, isac_frame_free>;
using Maps = Handle<isac_maps, isac_maps_free>;
using Dets = Handle<isac_detections, isac_detections_free>;

std::string take(char* s) {
    std::string out = s ? s : "";
    isac_string_free(s);
    return out;
}

std::vector<double> parse_offsets(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw CLI::ValidationError("--dcf", "bad offset '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("--dcf", "empty offset list");
    return out;
}

void load_scenario(Scenario& sc, const std::string& path) {
    if (path.empty())
        check(isac_scenario_default(sc.out()), "default scenario");
    else
        check(isac_scenario_load(path.c_str(), sc.out()), "scenario " + path);
}

void print_detections(const isac_detections* d) {
    const size_t n = isac_detections_count(d);
    std::printf("%zu detection(s)\n", n);
    for (size_t i = 0; i < n; ++i) {
        isac_detection det;
        check(isac_detections_get(d, i, &det), "detection");
        std::printf("  range %9.3f m  vel %8.3f m/s  cell (%d,%d)  stat %.4g\n", det.range_m, det.vel_mps,
                    det.range_bin, det.doppler_bin, det.stat);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OFDM ISAC toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(isac_version()));

    std::uint64_t seed = 1;
    bool seed_given = false;
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; }, "random seed");
    };

    // simulate
    auto* sim = app.add_subcommand("simulate", "synthesize a received frame from a scenario");
    std::string sim_cfg, sim_out = "frame.bin";
    bool no_noise = false;
    sim->add_option("--config", sim_cfg, "scenario JSON (desk defaults when omitted)");
    sim->add_option("--out", sim_out, "frame container")->capture_default_str();
    sim->add_flag("--no-noise", no_noise, "noiseless frame");
    add_seed(sim);

    // rvmap
    auto* rv = app.add_subcommand("rvmap", "range-velocity maps through a DCF bank");
    std::string rv_in, rv_out, rv_dcf;
    rv->add_option("frame", rv_in, "frame container")->required();
    rv->add_option("--dcf", rv_dcf, "comma-separated DCF offsets (default bank when omitted)");
    rv->add_option("--out", rv_out, "maps container (default <frame>.maps.bin)");
    add_seed(rv);

    // beamform
    auto* bf = app.add_subcommand("beamform", "design transmit and receive beamformers");
    std::string bf_cfg, bf_out;
    bf->add_option("--config", bf_cfg, "scenario JSON");
    bf->add_option("--out", bf_out, "report JSON (stdout when omitted)");
    add_seed(bf);

    // detect
    auto* det = app.add_subcommand("detect", "detect targets in a frame");
    std::string det_in, det_method = "cfar", det_conf, det_out;
    double pfa = 1e-3, delta = 0.5, det_dcf = 0.0;
    int pmax = 10, n_targets = 1, guard_cells = 2, train = 8;
    det->add_option("frame", det_in, "frame container")->required();
    det->add_option("--method", det_method, "cfar | ml | lr")
        ->check(CLI::IsMember({"cfar", "ml", "lr"}))
        ->capture_default_str();
    det->add_option("--pfa", pfa, "CFAR false-alarm probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    det->add_option("--conf", det_conf, "confidence map container (lr)");
    det->add_option("--delta", delta, "confidence threshold (lr)")->capture_default_str();
    det->add_option("--pmax", pmax, "most cells refined (lr)")->capture_default_str();
    det->add_option("--targets", n_targets, "cancellation rounds (ml)")->capture_default_str();
    det->add_option("--dcf", det_dcf, "DCF offset applied before CFAR")->capture_default_str();
    det->add_option("--guard", guard_cells, "CFAR guard cells")->capture_default_str();
    det->add_option("--train", train, "CFAR training cells")->capture_default_str();
    det->add_option("--out", det_out, "detections CSV");
    add_seed(det);

    // export-dataset
    auto* ex = app.add_subcommand("export-dataset", "write a training dataset");
    std::string ex_cfg, ex_out = "dataset", ex_dcf;
    int ex_n = 1;
    ex->add_option("--config", ex_cfg, "scenario JSON");
    ex->add_option("--n", ex_n, "sample count")->check(CLI::PositiveNumber)->capture_default_str();
    ex->add_option("--out", ex_out, "output directory")->capture_default_str();
    ex->add_option("--dcf", ex_dcf, "comma-separated DCF offsets (default bank when omitted)");
    add_seed(ex);

    // eval
    auto* ev = app.add_subcommand("eval", "ROC over a dataset or RMSE of detections");
    std::string roc_dir, conf_dir, ev_frame, ev_dets, ev_out;
    bool do_rmse = false;
    size_t channel = 1;
    auto* roc_opt = ev->add_option("--roc", roc_dir, "exported dataset directory");
    auto* rmse_opt = ev->add_flag("--rmse", do_rmse, "range/velocity RMSE of --dets against --frame");
    roc_opt->excludes(rmse_opt);
    ev->add_option("--conf-dir", conf_dir, "confidence maps <frame_id>.bin (ROC by threshold)")->needs(roc_opt);
    ev->add_option("--channel", channel, "map channel for the CFAR ROC")->capture_default_str();
    ev->add_option("--frame", ev_frame, "frame container with truth")->needs(rmse_opt);
    ev->add_option("--dets", ev_dets, "detections CSV")->needs(rmse_opt);
    ev->add_option("--out", ev_out, "CSV output");
    add_seed(ev);

    // plot
    auto* pl = app.add_subcommand("plot", "map to 8-bit PNG and CSV grid");
    std::string pl_in, pl_png = "map.png", pl_csv = "map.csv";
    size_t pl_ch = 0;
    double db_floor = -40.0;
    pl->add_option("maps", pl_in, "maps container")->required();
    pl->add_option("--channel", pl_ch, "map index")->capture_default_str();
    pl->add_option("--png", pl_png, "PNG output")->capture_default_str();
    pl->add_option("--csv", pl_csv, "CSV grid output")->capture_default_str();
    pl->add_option("--dbfloor", db_floor, "dB floor")->check(CLI::Range(-400.0, -1e-9))->capture_default_str();
    add_seed(pl);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*sim) {
            Scenario sc;
            load_scenario(sc, sim_cfg);
            if (seed_given) check(isac_scenario_set_seed(sc.get(), seed), "seed");
            else
                check(isac_scenario_seed(sc.get(), &seed), "seed");
            Frame f;
            check(isac_simulate(sc.get(), nullptr, seed, no_noise ? 0 : 1, f.out()), "simulate");
            check(isac_frame_write(f.get(), sim_out.c_str()), "write " + sim_out);
            std::printf("wrote %s (%zu target(s), seed %llu)\n", sim_out.c_str(), isac_frame_target_count(f.get()),
                        static_cast<unsigned long long>(seed));
        } else if (*rv) {
            Frame f;
            check(isac_frame_read(rv_in.c_str(), f.out()), "read " + rv_in);
            Maps m;
            if (rv_dcf.empty()) {
                check(isac_rvmap_default(f.get(), m.out()), "rvmap");
            } else {
                const auto off = parse_offsets(rv_dcf);
                check(isac_rvmap(f.get(), off.data(), off.size(), m.out()), "rvmap");
            }
            if (rv_out.empty()) {
                rv_out = rv_in;
                if (rv_out.size() > 4 && rv_out.compare(rv_out.size() - 4, 4, ".bin") == 0)
                    rv_out.resize(rv_out.size() - 4);
                rv_out += ".maps.bin";
            }
            check(isac_maps_write(m.get(), rv_out.c_str()), "write " + rv_out);
            std::printf("wrote %s (%zu map(s))\n", rv_out.c_str(), isac_maps_count(m.get()));
        } else if (*bf) {
            Scenario sc;
            load_scenario(sc, bf_cfg);
            if (seed_given) check(isac_scenario_set_seed(sc.get(), seed), "seed");
            Beams b;
            check(isac_beams_design(sc.get(), b.out()), "beamform");
            char* rep = nullptr;
            check(isac_beams_report(b.get(), &rep), "report");
            const std::string text = take(rep) + "\n";
            if (bf_out.empty()) {
                std::fputs(text.c_str(), stdout);
            } else {
                std::FILE* fp = std::fopen(bf_out.c_str(), "wb");
                if (!fp || std::fputs(text.c_str(), fp) < 0) throw Failure{"cannot write " + bf_out};
                std::fclose(fp);
                std::printf("wrote %s\n", bf_out.c_str());
            }
        } else if (*det) {
            Frame f;
            check(isac_frame_read(det_in.c_str(), f.out()), "read " + det_in);
            Dets d;
            if (det_method == "cfar") {
                check(isac_detect_cfar(f.get(), det_dcf, guard_cells, train, pfa, d.out()), "cfar");
            } else if (det_method == "ml") {
                check(isac_detect_ml(f.get(), n_targets, d.out()), "ml");
            } else {
                if (det_conf.empty())
                    std::fprintf(stderr, "warning: no --conf given, seeding local refinement from CA-CFAR (pfa %g)\n",
                                 pfa);
                check(isac_detect_lr(f.get(), det_conf.empty() ? nullptr : det_conf.c_str(), delta, pmax, pfa,
                                     d.out()),
                      "lr");
            }
            print_detections(d.get());
            if (isac_frame_target_count(f.get()) > 0) {
                isac_score s;
                check(isac_eval_score(d.get(), f.get(), 1, &s), "score");
                std::printf("pd %.4f  pfa %.3g  (%d/%d targets, %d false)\n", s.pd, s.pfa, s.true_pos, s.targets,
                            s.false_pos);
            }
            if (!det_out.empty()) check(isac_detections_write_csv(d.get(), det_out.c_str()), "write " + det_out);
        } else if (*ex) {
            Scenario sc;
            load_scenario(sc, ex_cfg);
            std::vector<double> off;
            if (!ex_dcf.empty()) off = parse_offsets(ex_dcf);
            check(isac_export_dataset(sc.get(), ex_n, seed, off.data(), off.size(), ex_out.c_str()), "export");
            std::printf("wrote %d sample(s) to %s\n", ex_n, ex_out.c_str());
        } else if (*ev) {
            if (!roc_dir.empty()) {
                if (ev_out.empty()) ev_out = "roc.csv";
                check(isac_eval_roc(roc_dir.c_str(), conf_dir.empty() ? nullptr : conf_dir.c_str(), channel,
                                    ev_out.c_str()),
                      "roc");
                std::printf("wrote %s\n", ev_out.c_str());
            } else if (do_rmse) {
                if (ev_frame.empty() || ev_dets.empty()) {
                    std::fprintf(stderr, "eval --rmse needs --frame and --dets\n%s", ev->help().c_str());
                    return 1;
                }
                Frame f;
                check(isac_frame_read(ev_frame.c_str(), f.out()), "read " + ev_frame);
                isac_config cfg;
                check(isac_frame_config(f.get(), &cfg), "config");
                Dets d;
                check(isac_detections_read_csv(ev_dets.c_str(), &cfg, d.out()), "read " + ev_dets);
                isac_rmse r;
                check(isac_eval_rmse(d.get(), f.get(), &r), "rmse");
                char line[256];
                std::snprintf(line, sizeof line, "%.12g,%.12g,%d,%d\n", r.range_rmse, r.vel_rmse, r.matched, r.missed);
                const std::string table = std::string("range_rmse_m,vel_rmse_mps,matched,missed\n") + line;
                if (ev_out.empty()) {
                    std::fputs(table.c_str(), stdout);
                } else {
                    std::FILE* fp = std::fopen(ev_out.c_str(), "wb");
                    if (!fp || std::fputs(table.c_str(), fp) < 0) throw Failure{"cannot write " + ev_out};
                    std::fclose(fp);
                }
            } else {
                std::fprintf(stderr, "eval needs --roc or --rmse\n%s", ev->help().c_str());
                return 1;
            }
        } else if (*pl) {
            Maps m;
            check(isac_maps_read(pl_in.c_str(), m.out()), "read " + pl_in);
            check(isac_maps_write_png(m.get(), pl_ch, pl_png.c_str(), db_floor), "png");
            check(isac_maps_write_csv(m.get(), pl_ch, pl_csv.c_str()), "csv");
            std::printf("wrote %s and %s\n", pl_png.c_str(), pl_csv.c_str());
        }
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.what.c_str());
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }
    return 0;
}
