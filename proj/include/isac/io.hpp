#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "isac/detection.hpp"
#include "isac/glrt.hpp"
#include "isac/scenario.hpp"

namespace isac {

// ---- scenario files ----------------------------------------------------------

/// Throws Error(Parse) naming the offending field (duplicates and unknown keys
/// included) and Error(Validation) when the values break an invariant.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<string>");

/// Canonical JSON for a scenario (angles in degrees), re-parseable.
nlohmann::json scenario_to_json(const Scenario& sc);
nlohmann::json config_to_json(const SystemConfig& cfg);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

// ---- binary frame container ----------------------------------------------------

inline constexpr char kContainerMagic[6] = {'I', 'S', 'A', 'C', 'B', '1'};

enum class DType : std::uint32_t { Complex64 = 0, Float32 = 1 };

/// Header: magic, then little-endian u32 rows, cols, channels, dtype.
/// Payload: channel after channel, each row-major; complex64 is (re, im) pairs.
struct FrameContainer {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint32_t channels = 0;
    DType dtype = DType::Float32;
    std::vector<float> payload;
    nlohmann::json sidecar;  // written to <path>.json when not null

    size_t values_per_channel() const;
};

FrameContainer container_from_complex(const std::vector<CMat>& channels);
FrameContainer container_from_real(const std::vector<RMat>& channels);
CMat container_complex(const FrameContainer& fc, std::uint32_t channel);
RMat container_real(const FrameContainer& fc, std::uint32_t channel);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Serialized bytes of the container (header + payload), no sidecar.
std::string encode_container(const FrameContainer& fc);
FrameContainer decode_container(const std::string& bytes);

void write_container(const std::filesystem::path& path, const FrameContainer& fc);
/// Reads the sidecar too when it exists. Throws Error(Parse) on a bad magic,
/// unknown dtype or a payload length that disagrees with the header.
FrameContainer read_container(const std::filesystem::path& path);

// ---- dataset bridge ------------------------------------------------------------------

/// Target draw per sample: count uniform in [min_targets, max_targets],
/// range uniform in [range_min_m, R_unamb * range_max_frac], velocity uniform
/// in +-v_max, per-element SNR uniform in dB over [snr_min_db, snr_max_db].
struct TargetDistribution {
    int min_targets = 1;
    int max_targets = 5;
    double range_min_m = 10.0;
    double range_max_frac = 0.125;
    double snr_min_db = -10.0;
    double snr_max_db = 20.0;
};

nlohmann::json distribution_to_json(const TargetDistribution& d);

/// Draws targets for one sample; cells are kept distinct by redrawing.
std::vector<TargetSpec> draw_targets(const TargetDistribution& d, const Scenario& sc, std::uint64_t seed);

struct ExportSpec {
    int n_samples = 1;
    DcfBank bank;
    TargetDistribution dist;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir;
};

/// Writes sample_NNNNN.bin (|bank| float32 magnitude maps plus the binary
/// truth channel) with sidecars, then manifest.json. Returns the manifest.
nlohmann::json export_dataset(const Scenario& base, const ExportSpec& spec);

struct ConfidenceMap {
    RMat conf;
    std::string frame_id;
};

/// One float32 channel with values in [0,1]; frame id from the sidecar or
/// the file stem. Throws Error(Validation) on anything outside [0,1].
ConfidenceMap import_confidence(const std::filesystem::path& path);
void export_confidence(const std::filesystem::path& path, const ConfidenceMap& map);

// ---- tables and images -------------------------------------------------------------

void write_detections_csv(std::ostream& os, const std::vector<RefinedDetection>& dets, const SystemConfig& cfg);
void write_roc_csv(std::ostream& os, const std::vector<RocPoint>& roc);
void write_rmse_csv(std::ostream& os, const std::vector<RmseResult>& rows);
void write_grid_csv(std::ostream& os, const RMat& grid);

/// 20 log10(mag / max) clipped at db_floor, scaled to 0..255.
std::vector<std::uint8_t> db_image(const RMat& mag, double db_floor);
/// 8-bit grayscale PNG, one pixel per cell, range bins down the rows.
void write_png(const std::filesystem::path& path, const RMat& mag, double db_floor);

}  // namespace isac
