#include "isac/isac_c.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "isac/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

struct isac_scenario {
    isac::Scenario sc;
};

struct isac_beams {
    isac::Scenario sc;
    isac::BeamDesign design;
};

struct isac_frame {
    isac::SystemConfig cfg;
    isac::CMat y;
    isac::CMat s_ref;
    std::vector<isac::NormalizedPath> targets;
    json meta;
};

struct isac_maps {
    isac::SystemConfig cfg;
    std::vector<isac::RVMap> maps;
    json meta;
};

struct isac_detections {
    isac::SystemConfig cfg;
    std::vector<isac::RefinedDetection> items;
};

namespace {

thread_local std::string g_error;

template <class F>
isac_status guard(F&& f) {
    g_error.clear();
    try {
        f();
        return ISAC_OK;
    } catch (const isac::Error& e) {
        g_error = e.what();
        return static_cast<isac_status>(e.code());
    } catch (const std::bad_alloc&) {
        g_error = "out of memory";
    } catch (const std::exception& e) {
        g_error = e.what();
    } catch (...) {
        g_error = "unknown exception";
    }
    return ISAC_E_INTERNAL;
}

void need(const void* p, const char* what) {
    if (!p) throw isac::Error(isac::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void to_c(const isac::SystemConfig& c, isac_config* o) {
    *o = isac_config{c.n_tx,         c.n_rx,          c.n_subcarriers,      c.n_symbols,       c.carrier_freq,
                     c.bandwidth,    c.cp_fraction,   c.noise_var,          c.power_budget,    c.sensing_gain_req,
                     c.antenna_sep,  c.subgrid_range, c.subgrid_doppler,    c.subcarrier_spacing, c.symbol_time,
                     c.total_time,   c.alpha,         c.range_res,          c.v_max,           c.unambiguous_range,
                     c.velocity_res};
}

isac::SystemConfig from_c(const isac_config& o) {
    isac::SystemConfig c;
    c.n_tx = o.n_tx;
    c.n_rx = o.n_rx;
    c.n_subcarriers = o.n_subcarriers;
    c.n_symbols = o.n_symbols;
    c.carrier_freq = o.carrier_freq;
    c.bandwidth = o.bandwidth;
    c.cp_fraction = o.cp_fraction;
    c.noise_var = o.noise_var;
    c.power_budget = o.power_budget;
    c.sensing_gain_req = o.sensing_gain_req;
    c.antenna_sep = o.antenna_sep;
    c.subgrid_range = o.subgrid_range;
    c.subgrid_doppler = o.subgrid_doppler;
    return isac::derive_config(c);
}

isac::SystemConfig config_from_json(const json& j) {
    return isac::parse_scenario_text(json{{"config", j}}.dump(), "sidecar config").cfg;
}

json targets_json(const std::vector<isac::NormalizedPath>& ts, const isac::SystemConfig& cfg) {
    json out = json::array();
    for (const auto& t : ts) {
        const isac::Cell c = isac::cell_of(t, cfg);
        out.push_back({{"range_m", t.source.range_m},
                       {"velocity_mps", t.source.velocity_mps},
                       {"tau_bar", t.tau_bar},
                       {"fd_bar", t.fd_bar},
                       {"amp_re", t.amp.real()},
                       {"amp_im", t.amp.imag()},
                       {"range_bin", c.range_bin},
                       {"doppler_bin", c.doppler_bin}});
    }
    return out;
}

std::vector<isac::NormalizedPath> targets_from_json(const json& j) {
    std::vector<isac::NormalizedPath> out;
    if (!j.is_array()) return out;
    for (const auto& t : j) {
        isac::NormalizedPath p;
        p.tau_bar = t.at("tau_bar").get<double>();
        p.fd_bar = t.at("fd_bar").get<double>();
        p.amp = {t.at("amp_re").get<double>(), t.at("amp_im").get<double>()};
        p.source.range_m = t.at("range_m").get<double>();
        p.source.velocity_mps = t.at("velocity_mps").get<double>();
        out.push_back(p);
    }
    return out;
}

isac::RxFrame bare_frame(const isac_frame* f) {
    isac::RxFrame fr;
    fr.y = f->y;
    return fr;
}

isac::RVMap map_at(const isac_frame* f, double offset) {
    isac::RVMap m = isac::radar_fft(isac::apply_dcf(bare_frame(f), offset, f->cfg), f->s_ref);
    m.filter_offset = offset;
    return m;
}

// Coarse detections as refined records at their cell centres.
std::vector<isac::RefinedDetection> from_cells(const isac::DetectionSet& ds, const isac::RVMap& m,
                                               const isac::SystemConfig& cfg) {
    const double scale = std::sqrt(static_cast<double>(cfg.n_subcarriers) * cfg.n_symbols);
    std::vector<isac::RefinedDetection> out;
    for (const auto& d : ds.items) {
        isac::RefinedDetection r;
        r.cell = d.cell;
        r.tau_bar = isac::cell_tau_bar(d.cell, cfg);
        r.fd_bar = isac::cell_fd_bar(d.cell, cfg);
        r.amp = m.image(d.cell.range_bin, d.cell.doppler_bin) / scale;
        r.stat = d.score;
        out.push_back(r);
    }
    return out;
}

isac::DetectionSet to_set(const isac_detections* d) {
    isac::DetectionSet ds;
    ds.rows = d->cfg.n_subcarriers;
    ds.cols = d->cfg.n_symbols;
    for (const auto& r : d->items) {
        isac::NormalizedPath p;
        p.tau_bar = r.tau_bar - std::floor(r.tau_bar);
        p.fd_bar = r.fd_bar;
        isac::Detection det;
        det.cell = isac::cell_of(p, d->cfg);
        det.score = r.stat;
        ds.items.push_back(det);
    }
    return ds;
}

void write_text(const char* path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw isac::Error(isac::ErrorCode::Io, std::string("cannot write ") + path);
    os << text;
    if (!os) throw isac::Error(isac::ErrorCode::Io, std::string("write failed: ") + path);
}

const isac::RVMap& map_index(const isac_maps* m, size_t i) {
    need(m, "maps");
    if (i >= m->maps.size())
        throw isac::Error(isac::ErrorCode::OutOfRange, "map index " + std::to_string(i) + " out of range");
    return m->maps[i];
}

}  // namespace

extern "C" {

const char* isac_version(void) { return "0.1.0"; }

const char* isac_last_error(void) { return g_error.c_str(); }

const char* isac_status_name(isac_status s) {
    switch (s) {
        case ISAC_OK: return "ok";
        case ISAC_E_INVALID_ARGUMENT: return "invalid argument";
        case ISAC_E_CONFIG: return "configuration error";
        case ISAC_E_OUT_OF_RANGE: return "out of range";
        case ISAC_E_DIMENSION: return "dimension mismatch";
        case ISAC_E_DEGENERATE_SYMBOLS: return "degenerate symbols";
        case ISAC_E_SINGULAR: return "singular system";
        case ISAC_E_INFEASIBLE: return "infeasible";
        case ISAC_E_PARSE: return "parse error";
        case ISAC_E_VALIDATION: return "validation error";
        case ISAC_E_IO: return "I/O error";
        case ISAC_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void isac_string_free(char* s) { std::free(s); }

// ---- config ----

isac_status isac_config_reference(isac_config* out) {
    return guard([&] {
        need(out, "out");
        to_c(isac::derive_config(isac::reference_raw()), out);
    });
}

isac_status isac_config_derive(isac_config* cfg) {
    return guard([&] {
        need(cfg, "cfg");
        to_c(from_c(*cfg), cfg);
    });
}

// ---- scenario ----

isac_status isac_scenario_default(isac_scenario** out) {
    return guard([&] {
        need(out, "out");
        *out = new isac_scenario{isac::desk_scenario()};
    });
}

isac_status isac_scenario_load(const char* path, isac_scenario** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new isac_scenario{isac::parse_scenario(path)};
    });
}

isac_status isac_scenario_parse(const char* text, isac_scenario** out) {
    return guard([&] {
        need(text, "json_text");
        need(out, "out");
        *out = new isac_scenario{isac::parse_scenario_text(text)};
    });
}

void isac_scenario_free(isac_scenario* sc) { delete sc; }

isac_status isac_scenario_config(const isac_scenario* sc, isac_config* out) {
    return guard([&] {
        need(sc, "scenario");
        need(out, "out");
        to_c(sc->sc.cfg, out);
    });
}

isac_status isac_scenario_seed(const isac_scenario* sc, uint64_t* out) {
    return guard([&] {
        need(sc, "scenario");
        need(out, "out");
        *out = sc->sc.seed;
    });
}

isac_status isac_scenario_set_seed(isac_scenario* sc, uint64_t seed) {
    return guard([&] {
        need(sc, "scenario");
        sc->sc.seed = seed;
    });
}

isac_status isac_scenario_json(const isac_scenario* sc, char** out) {
    return guard([&] {
        need(sc, "scenario");
        need(out, "out");
        *out = dup(isac::scenario_to_json(sc->sc).dump(2));
    });
}

// ---- beams ----

isac_status isac_beams_design(const isac_scenario* sc, isac_beams** out) {
    return guard([&] {
        need(sc, "scenario");
        need(out, "out");
        *out = new isac_beams{sc->sc, isac::design_beams(sc->sc)};
    });
}

void isac_beams_free(isac_beams* b) { delete b; }

isac_status isac_beams_report(const isac_beams* b, char** out) {
    return guard([&] {
        need(b, "beams");
        need(out, "out");
        const isac::SystemConfig& cfg = b->sc.cfg;
        const isac::TxSolution& tx = b->design.tx;
        const isac::CommChannelSet ch = isac::gen_channels(cfg, b->sc.users);
        json subs = json::array();
        double total_rate = 0.0;
        for (int n = 0; n < cfg.n_subcarriers; ++n) {
            const isac::SubcarrierProblem sp = isac::make_subproblem(ch, n, b->sc.focal_rad, cfg);
            const isac::CMat& v = tx.v[static_cast<size_t>(n)];
            const double rate = isac::sum_rate(sp, v);
            total_rate += rate;
            json gains = json::array();
            for (const auto& a : sp.focal) gains.push_back(isac::beampattern_gain(v, a, sp.n_c));
            json mu = json::array();
            if (static_cast<size_t>(n) < tx.mult.size())
                for (Eigen::Index l = 0; l < tx.mult[n].mu.size(); ++l) mu.push_back(tx.mult[n].mu[l]);
            subs.push_back({{"n", n},
                            {"sum_rate_bps_hz", rate / std::log(2.0)},
                            {"power_w", v.squaredNorm()},
                            {"gain_w", gains},
                            {"lambda", static_cast<size_t>(n) < tx.mult.size() ? tx.mult[n].lambda : 0.0},
                            {"mu", mu}});
        }
        json rx_gain = json::array();
        for (Eigen::Index l = 0; l < b->design.rx.gain.size(); ++l) rx_gain.push_back(b->design.rx.gain[l]);
        json trace = json::array();
        for (double t : tx.total_trace) trace.push_back(t / std::log(2.0));
        json rep{{"mode", b->sc.beams == isac::BeamMode::Sensing ? "sensing" : "optimized"},
                 {"users", ch.users()},
                 {"subcarriers", cfg.n_subcarriers},
                 {"power_budget_w", cfg.power_budget / cfg.n_subcarriers},
                 {"gain_req_w", cfg.sensing_gain_req / cfg.n_subcarriers},
                 {"mean_sum_rate_bps_hz", total_rate / std::log(2.0) / cfg.n_subcarriers},
                 {"iterations", tx.iterations},
                 {"safeguard_hits", tx.safeguard_hits},
                 {"sum_rate_trace_bps_hz", trace},
                 {"rx", {{"eigenvalue", b->design.rx.eigenvalue},
                         {"gain", rx_gain},
                         {"degenerate", b->design.rx.degenerate}}},
                 {"per_subcarrier", subs}};
        *out = dup(rep.dump(2));
    });
}

// ---- frames ----

isac_status isac_simulate(const isac_scenario* sc, const isac_beams* beams, uint64_t seed, int noise_on,
                          isac_frame** out) {
    return guard([&] {
        need(sc, "scenario");
        need(out, "out");
        const isac::BeamformerSet set = beams ? beams->design.set : isac::design_beams(sc->sc).set;
        const isac::Simulation sim = isac::simulate(sc->sc, set, seed, noise_on != 0);
        auto f = std::make_unique<isac_frame>();
        f->cfg = sc->sc.cfg;
        f->y = sim.frame.y;
        f->s_ref = sim.s_ref;
        f->targets = sim.targets;
        f->meta = {{"frame_id", "frame_" + std::to_string(seed)},
                   {"seed", seed},
                   {"noise", noise_on != 0},
                   {"config", isac::config_to_json(f->cfg)},
                   {"targets", targets_json(f->targets, f->cfg)},
                   {"scenario", isac::scenario_to_json(sc->sc)},
                   {"channels", {"y", "s_ref"}}};
        *out = f.release();
    });
}

void isac_frame_free(isac_frame* f) { delete f; }

isac_status isac_frame_write(const isac_frame* f, const char* path) {
    return guard([&] {
        need(f, "frame");
        need(path, "path");
        isac::FrameContainer fc = isac::container_from_complex({f->y, f->s_ref});
        fc.sidecar = f->meta;
        isac::write_container(path, fc);
    });
}

isac_status isac_frame_read(const char* path, isac_frame** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        const isac::FrameContainer fc = isac::read_container(path);
        if (fc.dtype != isac::DType::Complex64 || fc.channels != 2)
            throw isac::Error(isac::ErrorCode::Validation,
                              std::string(path) + ": a frame holds two complex64 channels (y, s_ref)");
        if (!fc.sidecar.is_object() || !fc.sidecar.contains("config"))
            throw isac::Error(isac::ErrorCode::Validation, std::string(path) + ": frame sidecar with config missing");
        auto f = std::make_unique<isac_frame>();
        f->cfg = config_from_json(fc.sidecar["config"]);
        if (static_cast<int>(fc.rows) != f->cfg.n_subcarriers || static_cast<int>(fc.cols) != f->cfg.n_symbols)
            throw isac::Error(isac::ErrorCode::DimensionMismatch, std::string(path) + ": shape disagrees with config");
        f->y = isac::container_complex(fc, 0);
        f->s_ref = isac::container_complex(fc, 1);
        f->targets = targets_from_json(fc.sidecar.value("targets", json::array()));
        f->meta = fc.sidecar;
        *out = f.release();
    });
}

isac_status isac_frame_config(const isac_frame* f, isac_config* out) {
    return guard([&] {
        need(f, "frame");
        need(out, "out");
        to_c(f->cfg, out);
    });
}

size_t isac_frame_target_count(const isac_frame* f) { return f ? f->targets.size() : 0; }

// ---- maps ----

isac_status isac_rvmap(const isac_frame* f, const double* offsets, size_t n_offsets, isac_maps** out) {
    return guard([&] {
        need(f, "frame");
        need(out, "out");
        if (n_offsets == 0) throw isac::Error(isac::ErrorCode::InvalidArgument, "empty DCF bank");
        need(offsets, "offsets");
        isac::DcfBank bank{std::vector<double>(offsets, offsets + n_offsets)};
        bank.validate();
        auto m = std::make_unique<isac_maps>();
        m->cfg = f->cfg;
        isac::RxFrame fr = bare_frame(f);
        m->maps = isac::pipeline(fr, bank, f->s_ref, f->cfg);
        json off = json::array();
        for (double o : bank.offsets) off.push_back(o);
        m->meta = {{"frame_id", f->meta.value("frame_id", std::string())},
                   {"config", isac::config_to_json(f->cfg)},
                   {"bank", off},
                   {"targets", targets_json(f->targets, f->cfg)}};
        *out = m.release();
    });
}

isac_status isac_rvmap_default(const isac_frame* f, isac_maps** out) {
    if (!f) return guard([] { need(nullptr, "frame"); });
    const auto bank = isac::DcfBank::default_bank(f->cfg);
    return isac_rvmap(f, bank.offsets.data(), bank.offsets.size(), out);
}

void isac_maps_free(isac_maps* m) { delete m; }

size_t isac_maps_count(const isac_maps* m) { return m ? m->maps.size() : 0; }

isac_status isac_maps_shape(const isac_maps* m, int* rows, int* cols) {
    return guard([&] {
        const auto& mp = map_index(m, 0);
        if (rows) *rows = static_cast<int>(mp.mag.rows());
        if (cols) *cols = static_cast<int>(mp.mag.cols());
    });
}

isac_status isac_maps_offset(const isac_maps* m, size_t index, double* offset) {
    return guard([&] {
        need(offset, "offset");
        *offset = map_index(m, index).filter_offset;
    });
}

isac_status isac_maps_copy(const isac_maps* m, size_t index, double* buf, size_t len) {
    return guard([&] {
        const auto& mag = map_index(m, index).mag;
        need(buf, "buf");
        if (len < static_cast<size_t>(mag.size()))
            throw isac::Error(isac::ErrorCode::DimensionMismatch, "buffer too small for map");
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(buf, mag.rows(),
                                                                                           mag.cols()) = mag;
    });
}

isac_status isac_maps_write(const isac_maps* m, const char* path) {
    return guard([&] {
        need(m, "maps");
        need(path, "path");
        std::vector<isac::RMat> ch;
        for (const auto& mp : m->maps) ch.push_back(mp.mag);
        isac::FrameContainer fc = isac::container_from_real(ch);
        fc.sidecar = m->meta;
        isac::write_container(path, fc);
    });
}

isac_status isac_maps_read(const char* path, isac_maps** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        const isac::FrameContainer fc = isac::read_container(path);
        if (fc.dtype != isac::DType::Float32)
            throw isac::Error(isac::ErrorCode::Validation, std::string(path) + ": maps are float32 channels");
        auto m = std::make_unique<isac_maps>();
        m->meta = fc.sidecar.is_object() ? fc.sidecar : json::object();
        if (m->meta.contains("config")) m->cfg = config_from_json(m->meta["config"]);
        const json bank = m->meta.value("bank", json::array());
        for (std::uint32_t c = 0; c < fc.channels; ++c) {
            isac::RVMap mp;
            mp.mag = isac::container_real(fc, c);
            if (c < bank.size() && bank[c].is_number()) mp.filter_offset = bank[c].get<double>();
            mp.frame_id = m->meta.value("frame_id", std::string());
            m->maps.push_back(std::move(mp));
        }
        *out = m.release();
    });
}

isac_status isac_maps_write_png(const isac_maps* m, size_t index, const char* path, double db_floor) {
    return guard([&] {
        need(path, "path");
        isac::write_png(path, map_index(m, index).mag, db_floor);
    });
}

isac_status isac_maps_write_csv(const isac_maps* m, size_t index, const char* path) {
    return guard([&] {
        need(path, "path");
        std::ostringstream os;
        isac::write_grid_csv(os, map_index(m, index).mag);
        write_text(path, os.str());
    });
}

// ---- detection ----

isac_status isac_detect_cfar(const isac_frame* f, double dcf_offset, int guard_cells, int train, double pfa,
                             isac_detections** out) {
    return guard([&] {
        need(f, "frame");
        need(out, "out");
        const isac::RVMap m = map_at(f, dcf_offset);
        const isac::DetectionSet ds = isac::ca_cfar(m.mag, isac::CfarParams{guard_cells, train, pfa});
        *out = new isac_detections{f->cfg, from_cells(ds, m, f->cfg)};
    });
}

isac_status isac_detect_ml(const isac_frame* f, int n_targets, isac_detections** out) {
    return guard([&] {
        need(f, "frame");
        need(out, "out");
        *out = new isac_detections{f->cfg, isac::ml_full_search(f->y, f->s_ref, f->cfg, n_targets)};
    });
}

isac_status isac_detect_lr(const isac_frame* f, const char* conf_path, double delta, int p_max, double pfa,
                           isac_detections** out) {
    return guard([&] {
        need(f, "frame");
        need(out, "out");
        if (conf_path) {
            const isac::ConfidenceMap cm = isac::import_confidence(conf_path);
            if (cm.conf.rows() != f->y.rows() || cm.conf.cols() != f->y.cols())
                throw isac::Error(isac::ErrorCode::DimensionMismatch, "confidence map shape differs from the frame");
            *out = new isac_detections{f->cfg, isac::dcfnet_lr(cm.conf, f->y, f->s_ref, f->cfg, delta, p_max)};
            return;
        }
        if (p_max < 1) throw isac::Error(isac::ErrorCode::InvalidArgument, "p_max must be >= 1");
        const isac::RVMap m = map_at(f, 0.0);
        isac::DetectionSet ds = isac::ca_cfar(m.mag, isac::CfarParams{2, 8, pfa});
        std::stable_sort(ds.items.begin(), ds.items.end(),
                         [](const isac::Detection& a, const isac::Detection& b) { return a.score > b.score; });
        std::vector<isac::Cell> cells;
        for (const auto& d : ds.items) {
            if (static_cast<int>(cells.size()) >= p_max) break;
            cells.push_back(d.cell);
        }
        *out = new isac_detections{f->cfg, isac::refine_cells(cells, f->y, f->s_ref, f->cfg)};
    });
}

void isac_detections_free(isac_detections* d) { delete d; }

size_t isac_detections_count(const isac_detections* d) { return d ? d->items.size() : 0; }

isac_status isac_detections_get(const isac_detections* d, size_t index, isac_detection* out) {
    return guard([&] {
        need(d, "detections");
        need(out, "out");
        if (index >= d->items.size()) throw isac::Error(isac::ErrorCode::OutOfRange, "detection index out of range");
        const auto& r = d->items[index];
        *out = isac_detection{r.tau_bar,
                              r.fd_bar,
                              isac::tau_bar_to_range(r.tau_bar, d->cfg),
                              isac::fd_bar_to_velocity(r.fd_bar, d->cfg),
                              r.amp.real(),
                              r.amp.imag(),
                              r.stat,
                              r.eval_count,
                              r.cell.range_bin,
                              r.cell.doppler_bin};
    });
}

isac_status isac_detections_write_csv(const isac_detections* d, const char* path) {
    return guard([&] {
        need(d, "detections");
        need(path, "path");
        std::ostringstream os;
        isac::write_detections_csv(os, d->items, d->cfg);
        write_text(path, os.str());
    });
}

isac_status isac_detections_read_csv(const char* path, const isac_config* cfg, isac_detections** out) {
    return guard([&] {
        need(path, "path");
        need(cfg, "cfg");
        need(out, "out");
        std::ifstream is(path);
        if (!is) throw isac::Error(isac::ErrorCode::Io, std::string("cannot read ") + path);
        std::string line;
        std::getline(is, line);
        if (line != "tau_bar,fd_bar,range_m,vel_mps,amp_re,amp_im,stat,evals")
            throw isac::Error(isac::ErrorCode::Parse, std::string(path) + ": not a detections table");
        auto d = std::make_unique<isac_detections>();
        d->cfg = from_c(*cfg);
        int lineno = 1;
        while (std::getline(is, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ls(line);
            double v[8];
            char comma = ',';
            for (int i = 0; i < 8; ++i) {
                if (i && !(ls >> comma && comma == ','))
                    throw isac::Error(isac::ErrorCode::Parse, std::string(path) + ":" + std::to_string(lineno));
                if (!(ls >> v[i]))
                    throw isac::Error(isac::ErrorCode::Parse, std::string(path) + ":" + std::to_string(lineno));
            }
            isac::RefinedDetection r;
            r.tau_bar = v[0];
            r.fd_bar = v[1];
            r.amp = {v[4], v[5]};
            r.stat = v[6];
            r.eval_count = static_cast<long long>(v[7]);
            isac::NormalizedPath p;
            p.tau_bar = r.tau_bar - std::floor(r.tau_bar);
            p.fd_bar = r.fd_bar;
            r.cell = isac::cell_of(p, d->cfg);
            d->items.push_back(r);
        }
        *out = d.release();
    });
}

// ---- evaluation ----

isac_status isac_eval_score(const isac_detections* d, const isac_frame* f, int tol_cells, isac_score* out) {
    return guard([&] {
        need(d, "detections");
        need(f, "frame");
        need(out, "out");
        const isac::MatchResult r =
            isac::match_and_score(to_set(d), isac::ground_truth(f->targets, f->cfg), tol_cells);
        *out = isac_score{r.pd, r.pfa, r.true_pos, r.false_pos, r.targets};
    });
}

isac_status isac_eval_rmse(const isac_detections* d, const isac_frame* f, isac_rmse* out) {
    return guard([&] {
        need(d, "detections");
        need(f, "frame");
        need(out, "out");
        std::vector<isac::RangeVel> est, truth;
        for (const auto& r : d->items)
            est.push_back({isac::tau_bar_to_range(r.tau_bar, f->cfg), isac::fd_bar_to_velocity(r.fd_bar, f->cfg)});
        for (const auto& t : f->targets) truth.push_back({t.source.range_m, t.source.velocity_mps});
        const isac::RmseResult r = isac::rmse(est, truth, f->cfg);
        *out = isac_rmse{r.range_rmse, r.vel_rmse, r.matched, r.missed};
    });
}

isac_status isac_eval_roc(const char* dataset_dir, const char* conf_dir, size_t channel, const char* out_csv) {
    return guard([&] {
        need(dataset_dir, "dataset_dir");
        need(out_csv, "out_csv");
        const fs::path dir(dataset_dir);
        std::ifstream ms(dir / "manifest.json");
        if (!ms) throw isac::Error(isac::ErrorCode::Io, "no manifest.json in " + dir.string());
        json manifest;
        try {
            manifest = json::parse(ms);
        } catch (const json::exception& e) {
            throw isac::Error(isac::ErrorCode::Parse, "manifest.json: " + std::string(e.what()));
        }
        std::vector<isac::RMat> scores;
        std::vector<isac::GroundTruthMap> truths;
        for (const auto& s : manifest.at("samples")) {
            const isac::FrameContainer fc = isac::read_container(dir / s.at("file").get<std::string>());
            if (fc.channels < 2 || channel + 1 >= fc.channels)
                throw isac::Error(isac::ErrorCode::OutOfRange, "map channel " + std::to_string(channel) +
                                                                   " not in " + s.at("file").get<std::string>());
            isac::GroundTruthMap gt;
            gt.grid = isac::container_real(fc, fc.channels - 1);
            for (Eigen::Index r = 0; r < gt.grid.rows(); ++r)
                for (Eigen::Index c = 0; c < gt.grid.cols(); ++c)
                    if (gt.grid(r, c) > 0.5) gt.cells.push_back({static_cast<int>(r), static_cast<int>(c)});
            truths.push_back(std::move(gt));
            if (conf_dir) {
                const auto id = s.at("frame_id").get<std::string>();
                const isac::ConfidenceMap cm = isac::import_confidence(fs::path(conf_dir) / (id + ".bin"));
                scores.push_back(cm.conf);
            } else {
                scores.push_back(isac::container_real(fc, static_cast<std::uint32_t>(channel)));
            }
        }
        std::vector<isac::RocPoint> roc;
        if (conf_dir) {
            std::vector<double> thr;
            for (int i = 1; i < 100; ++i) thr.push_back(i / 100.0);
            roc = isac::roc_sweep(scores, truths, thr);
        } else {
            std::vector<double> pfas;
            for (int e = -50; e <= -10; e += 5) pfas.push_back(std::pow(10.0, e / 10.0));
            roc = isac::roc_sweep_cfar(scores, truths, pfas);
        }
        std::ostringstream os;
        isac::write_roc_csv(os, roc);
        write_text(out_csv, os.str());
    });
}

// ---- dataset bridge ----

isac_status isac_export_dataset(const isac_scenario* sc, int n_samples, uint64_t seed, const double* offsets,
                                size_t n_offsets, const char* out_dir) {
    return guard([&] {
        need(sc, "scenario");
        need(out_dir, "out_dir");
        isac::ExportSpec spec;
        spec.n_samples = n_samples;
        spec.seed = seed;
        spec.out_dir = out_dir;
        if (n_offsets) {
            need(offsets, "offsets");
            spec.bank.offsets.assign(offsets, offsets + n_offsets);
        } else {
            spec.bank = isac::DcfBank::default_bank(sc->sc.cfg);
        }
        isac::export_dataset(sc->sc, spec);
    });
}

isac_status isac_confidence_check(const char* path, int* rows, int* cols, char** frame_id) {
    return guard([&] {
        need(path, "path");
        const isac::ConfidenceMap cm = isac::import_confidence(path);
        if (rows) *rows = static_cast<int>(cm.conf.rows());
        if (cols) *cols = static_cast<int>(cm.conf.cols());
        if (frame_id) *frame_id = dup(cm.frame_id);
    });
}

}  // extern "C"
