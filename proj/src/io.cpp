#include "isac/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <future>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <png.h>

namespace isac {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = kPi / 180.0;

json parse_strict(const std::string& text, const std::string& source) {
    std::vector<std::set<std::string>> keys;
    std::string dup;
    json::parser_callback_t cb = [&](int, json::parse_event_t ev, json& parsed) {
        switch (ev) {
            case json::parse_event_t::object_start: keys.emplace_back(); break;
            case json::parse_event_t::key:
                if (!keys.back().insert(parsed.get<std::string>()).second && dup.empty()) dup = parsed.get<std::string>();
                break;
            case json::parse_event_t::object_end: keys.pop_back(); break;
            default: break;
        }
        return true;
    };
    json j;
    try {
        j = json::parse(text, cb);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, source + ": malformed JSON: " + e.what());
    }
    if (!dup.empty()) throw Error(ErrorCode::Parse, source + ": duplicate field '" + dup + "'");
    return j;
}

// Typed field access with the dotted field name in every error.
class Fields {
public:
    Fields(const json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
        if (!j.is_object()) throw Error(ErrorCode::Parse, "field '" + ctx_ + "' must be an object");
    }

    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k);
    }
    std::string name(const std::string& k) const { return ctx_.empty() ? k : ctx_ + "." + k; }
    const json& raw(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }

    double num(const std::string& k, double def) {
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_number()) throw Error(ErrorCode::Parse, "field '" + name(k) + "' must be a number");
        return v.get<double>();
    }
    long long integer(const std::string& k, long long def) {
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_number_integer()) throw Error(ErrorCode::Parse, "field '" + name(k) + "' must be an integer");
        return v.get<long long>();
    }
    std::uint64_t u64(const std::string& k, std::uint64_t def) {
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw Error(ErrorCode::Parse, "field '" + name(k) + "' must be a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::string str(const std::string& k, const std::string& def) {
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_string()) throw Error(ErrorCode::Parse, "field '" + name(k) + "' must be a string");
        return v.get<std::string>();
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw Error(ErrorCode::Parse, "unknown field '" + name(it.key()) + "'");
    }

private:
    const json& j_;
    std::string ctx_;
    std::set<std::string> seen_;
};

int as_int(long long v, const std::string& field) {
    if (v < INT32_MIN || v > INT32_MAX) throw Error(ErrorCode::Parse, "field '" + field + "' is out of range");
    return static_cast<int>(v);
}

void write_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t read_u32(const std::string& in, size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
    return v;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + p.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorCode::Io, "write failed for " + p.string());
}

std::string beam_mode_name(BeamMode m) { return m == BeamMode::Sensing ? "sensing" : "optimized"; }

}  // namespace

// ---- scenario ----------------------------------------------------------------------

nlohmann::json config_to_json(const SystemConfig& c) {
    return json{{"n_tx", c.n_tx},
                {"n_rx", c.n_rx},
                {"n_subcarriers", c.n_subcarriers},
                {"n_symbols", c.n_symbols},
                {"carrier_freq", c.carrier_freq},
                {"bandwidth", c.bandwidth},
                {"cp_fraction", c.cp_fraction},
                {"noise_var", c.noise_var},
                {"power_budget", c.power_budget},
                {"sensing_gain_req", c.sensing_gain_req},
                {"antenna_sep", c.antenna_sep},
                {"subgrid_range", c.subgrid_range},
                {"subgrid_doppler", c.subgrid_doppler}};
}

Scenario parse_scenario_text(const std::string& text, const std::string& source) {
    const json root = parse_strict(text, source);
    Fields top(root, "");
    Scenario sc;

    SystemConfig raw = reference_raw();
    if (top.has("config")) {
        Fields c(top.raw("config"), "config");
        raw.n_tx = as_int(c.integer("n_tx", raw.n_tx), "config.n_tx");
        raw.n_rx = as_int(c.integer("n_rx", raw.n_rx), "config.n_rx");
        raw.n_subcarriers = as_int(c.integer("n_subcarriers", raw.n_subcarriers), "config.n_subcarriers");
        raw.n_symbols = as_int(c.integer("n_symbols", raw.n_symbols), "config.n_symbols");
        raw.carrier_freq = c.num("carrier_freq", raw.carrier_freq);
        raw.bandwidth = c.num("bandwidth", raw.bandwidth);
        raw.cp_fraction = c.num("cp_fraction", raw.cp_fraction);
        raw.noise_var = c.num("noise_var", raw.noise_var);
        raw.power_budget = c.num("power_budget", raw.power_budget);
        raw.sensing_gain_req = c.num("sensing_gain_req", raw.sensing_gain_req);
        raw.antenna_sep = c.num("antenna_sep", raw.antenna_sep);
        raw.subgrid_range = as_int(c.integer("subgrid_range", raw.subgrid_range), "config.subgrid_range");
        raw.subgrid_doppler = as_int(c.integer("subgrid_doppler", raw.subgrid_doppler), "config.subgrid_doppler");
        c.finish();
    }
    try {
        sc.cfg = derive_config(raw);
    } catch (const Error& e) {
        throw Error(ErrorCode::Validation, source + ": " + e.what());
    }

    if (top.has("focal_angles_deg")) {
        const json& fa = top.raw("focal_angles_deg");
        if (!fa.is_array()) throw Error(ErrorCode::Parse, "field 'focal_angles_deg' must be an array");
        sc.focal_rad.clear();
        for (const auto& v : fa) {
            if (!v.is_number()) throw Error(ErrorCode::Parse, "field 'focal_angles_deg' must hold numbers");
            const double d = v.get<double>();
            if (std::abs(d) > 90.0) throw Error(ErrorCode::Validation, "focal angle outside [-90, 90] degrees");
            sc.focal_rad.push_back(d * kDeg);
        }
    }

    if (top.has("users")) {
        Fields u(top.raw("users"), "users");
        sc.users.count = as_int(u.integer("count", sc.users.count), "users.count");
        sc.users.range_m = u.num("range_m", sc.users.range_m);
        sc.users.clusters = as_int(u.integer("clusters", sc.users.clusters), "users.clusters");
        sc.users.rays_per_cluster = as_int(u.integer("rays_per_cluster", sc.users.rays_per_cluster), "users.rays_per_cluster");
        sc.users.angle_spread_rad = u.num("angle_spread_deg", sc.users.angle_spread_rad / kDeg) * kDeg;
        sc.users.seed = u.u64("seed", sc.users.seed);
        u.finish();
        if (sc.users.count < 1) throw Error(ErrorCode::Validation, "users.count must be >= 1");
        if (!(sc.users.range_m > 0)) throw Error(ErrorCode::Validation, "users.range_m must be positive");
        if (sc.users.clusters < 1 || sc.users.rays_per_cluster < 1)
            throw Error(ErrorCode::Validation, "users.clusters and users.rays_per_cluster must be >= 1");
    }

    if (top.has("targets")) {
        const json& ts = top.raw("targets");
        if (!ts.is_array()) throw Error(ErrorCode::Parse, "field 'targets' must be an array");
        for (size_t i = 0; i < ts.size(); ++i) {
            Fields t(ts[i], "targets[" + std::to_string(i) + "]");
            TargetSpec spec;
            PathParams& p = spec.path;
            p.range_m = t.num("range_m", 0.0);
            p.velocity_mps = t.num("velocity_mps", 0.0);
            p.aoa_rad = t.num("aoa_deg", 0.0) * kDeg;
            p.aod_rad = t.num("aod_deg", p.aoa_rad / kDeg) * kDeg;
            p.reflect = {t.num("reflect_re", 1.0), t.num("reflect_im", 0.0)};
            p.focal_group = as_int(t.integer("focal_group", 0), t.name("focal_group"));
            if (t.has("snr_db")) spec.snr_db = t.num("snr_db", 0.0);
            t.finish();
            if (p.focal_group < -1 || p.focal_group >= static_cast<int>(sc.focal_rad.size()))
                throw Error(ErrorCode::Validation, t.name("focal_group") + " references a missing focal angle");
            if (!(p.range_m >= 0.0) || p.range_m >= sc.cfg.unambiguous_range)
                throw Error(ErrorCode::Validation, t.name("range_m") + " outside the unambiguous range");
            sc.targets.push_back(spec);
        }
    }

    if (top.has("clutter")) {
        Fields c(top.raw("clutter"), "clutter");
        sc.clutter.count = as_int(c.integer("count", 0), "clutter.count");
        sc.clutter.power = c.num("power", 0.0);
        c.finish();
        if (sc.clutter.count < 0 || sc.clutter.power < 0)
            throw Error(ErrorCode::Validation, "clutter count and power must be non-negative");
    }

    try {
        sc.constellation = parse_constellation(top.str("constellation", "qpsk"));
    } catch (const Error& e) {
        throw Error(ErrorCode::Parse, std::string("field 'constellation': ") + e.what());
    }
    const std::string bm = top.str("beamformer", "optimized");
    if (bm == "optimized")
        sc.beams = BeamMode::Optimized;
    else if (bm == "sensing")
        sc.beams = BeamMode::Sensing;
    else
        throw Error(ErrorCode::Parse, "field 'beamformer' must be 'optimized' or 'sensing'");
    sc.seed = top.u64("seed", sc.seed);
    top.finish();
    return sc;
}

Scenario parse_scenario(const fs::path& path) {
    return parse_scenario_text(read_file(path), path.string());
}

nlohmann::json scenario_to_json(const Scenario& sc) {
    json targets = json::array();
    for (const auto& t : sc.targets) {
        json j{{"range_m", t.path.range_m},
               {"velocity_mps", t.path.velocity_mps},
               {"aoa_deg", t.path.aoa_rad / kDeg},
               {"aod_deg", t.path.aod_rad / kDeg},
               {"reflect_re", t.path.reflect.real()},
               {"reflect_im", t.path.reflect.imag()},
               {"focal_group", t.path.focal_group}};
        if (t.snr_db) j["snr_db"] = *t.snr_db;
        targets.push_back(j);
    }
    json focal = json::array();
    for (double f : sc.focal_rad) focal.push_back(f / kDeg);
    return json{{"config", config_to_json(sc.cfg)},
                {"targets", targets},
                {"users",
                 {{"count", sc.users.count},
                  {"range_m", sc.users.range_m},
                  {"clusters", sc.users.clusters},
                  {"rays_per_cluster", sc.users.rays_per_cluster},
                  {"angle_spread_deg", sc.users.angle_spread_rad / kDeg},
                  {"seed", sc.users.seed}}},
                {"focal_angles_deg", focal},
                {"clutter", {{"count", sc.clutter.count}, {"power", sc.clutter.power}}},
                {"constellation", constellation_name(sc.constellation)},
                {"beamformer", beam_mode_name(sc.beams)},
                {"seed", sc.seed}};
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

// ---- container -------------------------------------------------------------------------

size_t FrameContainer::values_per_channel() const {
    return static_cast<size_t>(rows) * cols * (dtype == DType::Complex64 ? 2 : 1);
}

FrameContainer container_from_complex(const std::vector<CMat>& channels) {
    if (channels.empty()) throw Error(ErrorCode::InvalidArgument, "container: no channels");
    FrameContainer fc;
    fc.rows = static_cast<std::uint32_t>(channels[0].rows());
    fc.cols = static_cast<std::uint32_t>(channels[0].cols());
    fc.channels = static_cast<std::uint32_t>(channels.size());
    fc.dtype = DType::Complex64;
    fc.payload.reserve(fc.values_per_channel() * fc.channels);
    for (const auto& m : channels) {
        if (m.rows() != fc.rows || m.cols() != fc.cols)
            throw Error(ErrorCode::DimensionMismatch, "container: channel shapes differ");
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                fc.payload.push_back(static_cast<float>(m(r, c).real()));
                fc.payload.push_back(static_cast<float>(m(r, c).imag()));
            }
    }
    return fc;
}

FrameContainer container_from_real(const std::vector<RMat>& channels) {
    if (channels.empty()) throw Error(ErrorCode::InvalidArgument, "container: no channels");
    FrameContainer fc;
    fc.rows = static_cast<std::uint32_t>(channels[0].rows());
    fc.cols = static_cast<std::uint32_t>(channels[0].cols());
    fc.channels = static_cast<std::uint32_t>(channels.size());
    fc.dtype = DType::Float32;
    fc.payload.reserve(fc.values_per_channel() * fc.channels);
    for (const auto& m : channels) {
        if (m.rows() != fc.rows || m.cols() != fc.cols)
            throw Error(ErrorCode::DimensionMismatch, "container: channel shapes differ");
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) fc.payload.push_back(static_cast<float>(m(r, c)));
    }
    return fc;
}

CMat container_complex(const FrameContainer& fc, std::uint32_t channel) {
    if (fc.dtype != DType::Complex64) throw Error(ErrorCode::InvalidArgument, "container holds real data");
    if (channel >= fc.channels) throw Error(ErrorCode::OutOfRange, "container channel out of range");
    CMat m(fc.rows, fc.cols);
    const float* p = fc.payload.data() + fc.values_per_channel() * channel;
    for (std::uint32_t r = 0; r < fc.rows; ++r)
        for (std::uint32_t c = 0; c < fc.cols; ++c, p += 2) m(r, c) = {p[0], p[1]};
    return m;
}

RMat container_real(const FrameContainer& fc, std::uint32_t channel) {
    if (fc.dtype != DType::Float32) throw Error(ErrorCode::InvalidArgument, "container holds complex data");
    if (channel >= fc.channels) throw Error(ErrorCode::OutOfRange, "container channel out of range");
    RMat m(fc.rows, fc.cols);
    const float* p = fc.payload.data() + fc.values_per_channel() * channel;
    for (std::uint32_t r = 0; r < fc.rows; ++r)
        for (std::uint32_t c = 0; c < fc.cols; ++c) m(r, c) = *p++;
    return m;
}

fs::path sidecar_path(const fs::path& path) { return fs::path(path.string() + ".json"); }

std::string encode_container(const FrameContainer& fc) {
    if (fc.payload.size() != fc.values_per_channel() * fc.channels)
        throw Error(ErrorCode::InvalidArgument, "container payload length disagrees with its header");
    std::string out(kContainerMagic, sizeof(kContainerMagic));
    write_u32(out, fc.rows);
    write_u32(out, fc.cols);
    write_u32(out, fc.channels);
    write_u32(out, static_cast<std::uint32_t>(fc.dtype));
    out.reserve(out.size() + fc.payload.size() * 4);
    for (float f : fc.payload) write_u32(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

FrameContainer decode_container(const std::string& bytes) {
    constexpr size_t header = sizeof(kContainerMagic) + 16;
    if (bytes.size() < header || std::memcmp(bytes.data(), kContainerMagic, sizeof(kContainerMagic)) != 0)
        throw Error(ErrorCode::Parse, "not an ISACB1 container (bad magic)");
    FrameContainer fc;
    fc.rows = read_u32(bytes, 6);
    fc.cols = read_u32(bytes, 10);
    fc.channels = read_u32(bytes, 14);
    const std::uint32_t dt = read_u32(bytes, 18);
    if (dt > 1) throw Error(ErrorCode::Parse, "unknown container dtype " + std::to_string(dt));
    fc.dtype = static_cast<DType>(dt);
    const unsigned long long n = static_cast<unsigned long long>(fc.values_per_channel()) * fc.channels;
    if (bytes.size() - header != n * 4)
        throw Error(ErrorCode::Parse, "container payload is " + std::to_string(bytes.size() - header) +
                                          " bytes, header implies " + std::to_string(n * 4));
    fc.payload.resize(n);
    for (size_t i = 0; i < n; ++i) fc.payload[i] = std::bit_cast<float>(read_u32(bytes, header + 4 * i));
    return fc;
}

void write_container(const fs::path& path, const FrameContainer& fc) {
    write_file(path, encode_container(fc));
    if (!fc.sidecar.is_null()) write_file(sidecar_path(path), fc.sidecar.dump(2) + "\n");
}

FrameContainer read_container(const fs::path& path) {
    FrameContainer fc = decode_container(read_file(path));
    const fs::path side = sidecar_path(path);
    if (fs::exists(side)) fc.sidecar = parse_strict(read_file(side), side.string());
    return fc;
}

// ---- dataset -------------------------------------------------------------------------------

nlohmann::json distribution_to_json(const TargetDistribution& d) {
    return json{{"targets", {d.min_targets, d.max_targets}},
                {"range_m", {d.range_min_m, "unambiguous_range*" + std::to_string(d.range_max_frac)}},
                {"range_max_frac", d.range_max_frac},
                {"velocity", "uniform in [-v_max, v_max]"},
                {"snr_db", {d.snr_min_db, d.snr_max_db}},
                {"angles", "focal angle 0 for every target"},
                {"cells", "distinct per sample (redrawn on collision)"}};
}

std::vector<TargetSpec> draw_targets(const TargetDistribution& d, const Scenario& sc, std::uint64_t seed) {
    const SystemConfig& cfg = sc.cfg;
    const double r_hi = cfg.unambiguous_range * d.range_max_frac;
    if (d.min_targets < 1 || d.max_targets < d.min_targets || !(r_hi > d.range_min_m))
        throw Error(ErrorCode::InvalidArgument, "target distribution is empty");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> count(d.min_targets, d.max_targets);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double phi = sc.focal_rad.empty() ? 0.0 : sc.focal_rad[0];

    const int n = count(rng);
    std::vector<TargetSpec> out;
    std::set<std::pair<int, int>> cells;
    int redraws = 0;
    while (static_cast<int>(out.size()) < n) {
        TargetSpec t;
        t.path.range_m = d.range_min_m + uni(rng) * (r_hi - d.range_min_m);
        t.path.velocity_mps = (2.0 * uni(rng) - 1.0) * cfg.v_max;
        t.path.aoa_rad = phi;
        t.path.aod_rad = phi;
        t.path.reflect = cis(2.0 * kPi * uni(rng));
        t.path.focal_group = 0;
        t.snr_db = d.snr_min_db + uni(rng) * (d.snr_max_db - d.snr_min_db);
        const Cell c = cell_of(normalize_path(t.path, cfg), cfg);
        if (!cells.insert({c.range_bin, c.doppler_bin}).second) {
            if (++redraws > 10000) throw Error(ErrorCode::Internal, "draw_targets: cannot place distinct cells");
            continue;
        }
        out.push_back(t);
    }
    return out;
}

nlohmann::json export_dataset(const Scenario& base, const ExportSpec& spec) {
    if (spec.n_samples < 1) throw Error(ErrorCode::InvalidArgument, "export_dataset: n must be >= 1");
    spec.bank.validate();
    const SystemConfig& cfg = base.cfg;
    std::error_code ec;
    fs::create_directories(spec.out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + spec.out_dir.string() + ": " + ec.message());

    const std::uint32_t n_ch = static_cast<std::uint32_t>(spec.bank.offsets.size() + 1);
    const double per_sample = 22.0 + 4.0 * cfg.n_subcarriers * cfg.n_symbols * n_ch + 8192.0;
    const auto space = fs::space(spec.out_dir, ec);
    if (!ec && static_cast<double>(space.available) < per_sample * spec.n_samples * 1.05)
        throw Error(ErrorCode::Io, "not enough disk space in " + spec.out_dir.string());

    const BeamDesign beams = design_beams(base);

    json bank = json::array();
    for (double o : spec.bank.offsets) bank.push_back(o);
    json provenance{{"scenario", scenario_to_json(base)},
                    {"bank", bank},
                    {"distribution", distribution_to_json(spec.dist)}};
    json manifest{{"format", "ISACB1"},
                  {"n_samples", spec.n_samples},
                  {"seed", spec.seed},
                  {"config_hash", fnv1a_hex(provenance.dump())},
                  {"config", config_to_json(cfg)},
                  {"bank", bank},
                  {"channels", n_ch},
                  {"channel_layout", "bank maps (float32 linear magnitude) then binary truth"},
                  {"distribution", distribution_to_json(spec.dist)},
                  {"scenario", scenario_to_json(base)}};
    auto one = [&](int i) -> json {
        const std::uint64_t s = mix_seed(spec.seed, static_cast<std::uint64_t>(i));
        Scenario sc = base;
        sc.targets = draw_targets(spec.dist, base, mix_seed(s, 100));
        const Simulation sim = simulate(sc, beams.set, s, true);
        const auto maps = pipeline(sim.frame, spec.bank, sim.s_ref, cfg);
        const GroundTruthMap truth = ground_truth(sim.targets, cfg);

        std::vector<RMat> ch;
        for (const auto& m : maps) ch.push_back(m.mag);
        ch.push_back(truth.grid);
        FrameContainer fc = container_from_real(ch);

        std::ostringstream id;
        id << "sample_" << std::setw(5) << std::setfill('0') << i;
        json tj = json::array();
        for (const auto& t : sim.targets) {
            const Cell c = cell_of(t, cfg);
            tj.push_back({{"range_m", t.source.range_m},
                          {"velocity_mps", t.source.velocity_mps},
                          {"tau_bar", t.tau_bar},
                          {"fd_bar", t.fd_bar},
                          {"amp_re", t.amp.real()},
                          {"amp_im", t.amp.imag()},
                          {"range_bin", c.range_bin},
                          {"doppler_bin", c.doppler_bin}});
        }
        fc.sidecar = {{"frame_id", id.str()}, {"seed", s}, {"bank", bank}, {"targets", tj}};
        const std::string file = id.str() + ".bin";
        write_container(spec.out_dir / file, fc);
        return {{"file", file}, {"frame_id", id.str()}, {"seed", s}, {"targets", sim.targets.size()}};
    };

    // samples are independent; run them in batches, keep manifest order
    const int workers = std::max(1u, std::thread::hardware_concurrency());
    json samples = json::array();
    for (int first = 0; first < spec.n_samples; first += workers) {
        std::vector<std::future<json>> batch;
        for (int i = first; i < std::min(spec.n_samples, first + workers); ++i)
            batch.push_back(std::async(std::launch::async, one, i));
        for (auto& f : batch) samples.push_back(f.get());
    }
    manifest["samples"] = samples;
    write_file(spec.out_dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

ConfidenceMap import_confidence(const fs::path& path) {
    const FrameContainer fc = read_container(path);
    if (fc.channels != 1 || fc.dtype != DType::Float32)
        throw Error(ErrorCode::Validation, "confidence container must hold one float32 channel");
    ConfidenceMap cm;
    cm.conf = container_real(fc, 0);
    for (Eigen::Index i = 0; i < cm.conf.size(); ++i) {
        const double v = cm.conf.data()[i];
        if (!(v >= 0.0 && v <= 1.0))
            throw Error(ErrorCode::Validation, "confidence value " + std::to_string(v) + " outside [0, 1]");
    }
    if (fc.sidecar.is_object() && fc.sidecar.contains("frame_id") && fc.sidecar["frame_id"].is_string())
        cm.frame_id = fc.sidecar["frame_id"].get<std::string>();
    else
        cm.frame_id = path.stem().string();
    return cm;
}

void export_confidence(const fs::path& path, const ConfidenceMap& map) {
    FrameContainer fc = container_from_real({map.conf});
    fc.sidecar = {{"frame_id", map.frame_id}, {"kind", "confidence"}};
    write_container(path, fc);
}

// ---- tables and images ---------------------------------------------------------------------

void write_detections_csv(std::ostream& os, const std::vector<RefinedDetection>& dets, const SystemConfig& cfg) {
    os << "tau_bar,fd_bar,range_m,vel_mps,amp_re,amp_im,stat,evals\n";
    os << std::setprecision(12);
    for (const auto& d : dets)
        os << d.tau_bar << ',' << d.fd_bar << ',' << tau_bar_to_range(d.tau_bar, cfg) << ','
           << fd_bar_to_velocity(d.fd_bar, cfg) << ',' << d.amp.real() << ',' << d.amp.imag() << ',' << d.stat << ','
           << d.eval_count << '\n';
}

void write_roc_csv(std::ostream& os, const std::vector<RocPoint>& roc) {
    os << "threshold,pd,pfa\n" << std::setprecision(12);
    for (const auto& p : roc) os << p.threshold << ',' << p.pd << ',' << p.pfa << '\n';
}

void write_rmse_csv(std::ostream& os, const std::vector<RmseResult>& rows) {
    os << "range_rmse_m,vel_rmse_mps,matched,missed\n" << std::setprecision(12);
    for (const auto& r : rows) os << r.range_rmse << ',' << r.vel_rmse << ',' << r.matched << ',' << r.missed << '\n';
}

void write_grid_csv(std::ostream& os, const RMat& grid) {
    os << std::setprecision(9);
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
        for (Eigen::Index c = 0; c < grid.cols(); ++c) os << (c ? "," : "") << grid(r, c);
        os << '\n';
    }
}

std::vector<std::uint8_t> db_image(const RMat& mag, double db_floor) {
    if (!(db_floor < 0.0)) throw Error(ErrorCode::InvalidArgument, "dB floor must be negative");
    std::vector<std::uint8_t> px(static_cast<size_t>(mag.size()), 0);
    const double peak = mag.size() ? mag.cwiseAbs().maxCoeff() : 0.0;
    if (peak <= 0.0) return px;
    size_t k = 0;
    for (Eigen::Index r = 0; r < mag.rows(); ++r)
        for (Eigen::Index c = 0; c < mag.cols(); ++c) {
            const double a = std::abs(mag(r, c));
            const double db = a > 0 ? 20.0 * std::log10(a / peak) : db_floor;
            const double t = std::clamp((db - db_floor) / -db_floor, 0.0, 1.0);
            px[k++] = static_cast<std::uint8_t>(std::lround(255.0 * t));
        }
    return px;
}

void write_png(const fs::path& path, const RMat& mag, double db_floor) {
    const auto px = db_image(mag, db_floor);
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw Error(ErrorCode::Io, "cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw Error(ErrorCode::Io, "PNG encoding failed for " + path.string());
    }
    png_init_io(png, fp);
    const auto w = static_cast<png_uint_32>(mag.cols());
    const auto h = static_cast<png_uint_32>(mag.rows());
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (png_uint_32 r = 0; r < h; ++r) png_write_row(png, px.data() + static_cast<size_t>(r) * w);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace isac
