/* C interface to the ISAC toolkit.
 *
 * Every object is an opaque handle released with its _free function.
 * Functions return an isac_status; on failure isac_last_error() holds a
 * message for the calling thread until its next call into the library.
 */
#ifndef ISAC_C_H
#define ISAC_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(ISAC_BUILDING_LIBRARY)
#define ISAC_API __attribute__((visibility("default")))
#else
#define ISAC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum isac_status {
    ISAC_OK = 0,
    ISAC_E_INVALID_ARGUMENT = 1,
    ISAC_E_CONFIG = 2,
    ISAC_E_OUT_OF_RANGE = 3,
    ISAC_E_DIMENSION = 4,
    ISAC_E_DEGENERATE_SYMBOLS = 5,
    ISAC_E_SINGULAR = 6,
    ISAC_E_INFEASIBLE = 7,
    ISAC_E_PARSE = 8,
    ISAC_E_VALIDATION = 9,
    ISAC_E_IO = 10,
    ISAC_E_INTERNAL = 11
} isac_status;

typedef struct isac_scenario isac_scenario;
typedef struct isac_beams isac_beams;
typedef struct isac_frame isac_frame;
typedef struct isac_maps isac_maps;
typedef struct isac_detections isac_detections;

typedef struct isac_config {
    int n_tx, n_rx, n_subcarriers, n_symbols;
    double carrier_freq, bandwidth, cp_fraction, noise_var;
    double power_budget, sensing_gain_req, antenna_sep;
    int subgrid_range, subgrid_doppler;
    double subcarrier_spacing, symbol_time, total_time, alpha;
    double range_res, v_max, unambiguous_range, velocity_res;
} isac_config;

typedef struct isac_detection {
    double tau_bar, fd_bar;
    double range_m, vel_mps;
    double amp_re, amp_im;
    double stat;
    long long evals;
    int range_bin, doppler_bin;
} isac_detection;

typedef struct isac_score {
    double pd, pfa;
    int true_pos, false_pos, targets;
} isac_score;

typedef struct isac_rmse {
    double range_rmse, vel_rmse;
    int matched, missed;
} isac_rmse;

ISAC_API const char* isac_version(void);
ISAC_API const char* isac_last_error(void);
ISAC_API const char* isac_status_name(isac_status s);
/* Strings returned through char** out-parameters. */
ISAC_API void isac_string_free(char* s);

/* config */
ISAC_API isac_status isac_config_reference(isac_config* out);
/* Recomputes the derived fields of *cfg in place. */
ISAC_API isac_status isac_config_derive(isac_config* cfg);

/* scenario */
ISAC_API isac_status isac_scenario_default(isac_scenario** out);
ISAC_API isac_status isac_scenario_load(const char* path, isac_scenario** out);
ISAC_API isac_status isac_scenario_parse(const char* json_text, isac_scenario** out);
ISAC_API void isac_scenario_free(isac_scenario* sc);
ISAC_API isac_status isac_scenario_config(const isac_scenario* sc, isac_config* out);
ISAC_API isac_status isac_scenario_seed(const isac_scenario* sc, uint64_t* out);
ISAC_API isac_status isac_scenario_set_seed(isac_scenario* sc, uint64_t seed);
ISAC_API isac_status isac_scenario_json(const isac_scenario* sc, char** out);

/* transmit / receive beamformers */
ISAC_API isac_status isac_beams_design(const isac_scenario* sc, isac_beams** out);
ISAC_API void isac_beams_free(isac_beams* b);
/* JSON report: per-subcarrier rates, gains, multipliers, traces, receive gains. */
ISAC_API isac_status isac_beams_report(const isac_beams* b, char** out);

/* frames: received matrix, reference symbols, truth */
/* beams may be NULL, in which case they are designed from the scenario. */
ISAC_API isac_status isac_simulate(const isac_scenario* sc, const isac_beams* beams, uint64_t seed, int noise_on,
                                   isac_frame** out);
ISAC_API void isac_frame_free(isac_frame* f);
ISAC_API isac_status isac_frame_write(const isac_frame* f, const char* path);
ISAC_API isac_status isac_frame_read(const char* path, isac_frame** out);
ISAC_API isac_status isac_frame_config(const isac_frame* f, isac_config* out);
ISAC_API size_t isac_frame_target_count(const isac_frame* f);

/* range-velocity maps */
ISAC_API isac_status isac_rvmap(const isac_frame* f, const double* offsets, size_t n_offsets, isac_maps** out);
/* Default DCF bank of the frame's configuration. */
ISAC_API isac_status isac_rvmap_default(const isac_frame* f, isac_maps** out);
ISAC_API void isac_maps_free(isac_maps* m);
ISAC_API size_t isac_maps_count(const isac_maps* m);
ISAC_API isac_status isac_maps_shape(const isac_maps* m, int* rows, int* cols);
ISAC_API isac_status isac_maps_offset(const isac_maps* m, size_t index, double* offset);
/* Copies map `index` row-major into buf (rows * cols doubles). */
ISAC_API isac_status isac_maps_copy(const isac_maps* m, size_t index, double* buf, size_t len);
ISAC_API isac_status isac_maps_write(const isac_maps* m, const char* path);
ISAC_API isac_status isac_maps_read(const char* path, isac_maps** out);
ISAC_API isac_status isac_maps_write_png(const isac_maps* m, size_t index, const char* path, double db_floor);
ISAC_API isac_status isac_maps_write_csv(const isac_maps* m, size_t index, const char* path);

/* detection */
ISAC_API isac_status isac_detect_cfar(const isac_frame* f, double dcf_offset, int guard, int train, double pfa,
                                      isac_detections** out);
ISAC_API isac_status isac_detect_ml(const isac_frame* f, int n_targets, isac_detections** out);
/* conf_path NULL: seeds come from CFAR at `pfa` on the uncorrected map. */
ISAC_API isac_status isac_detect_lr(const isac_frame* f, const char* conf_path, double delta, int p_max, double pfa,
                                    isac_detections** out);
ISAC_API void isac_detections_free(isac_detections* d);
ISAC_API size_t isac_detections_count(const isac_detections* d);
ISAC_API isac_status isac_detections_get(const isac_detections* d, size_t index, isac_detection* out);
ISAC_API isac_status isac_detections_write_csv(const isac_detections* d, const char* path);
ISAC_API isac_status isac_detections_read_csv(const char* path, const isac_config* cfg, isac_detections** out);

/* evaluation */
ISAC_API isac_status isac_eval_score(const isac_detections* d, const isac_frame* f, int tol_cells, isac_score* out);
ISAC_API isac_status isac_eval_rmse(const isac_detections* d, const isac_frame* f, isac_rmse* out);
/* ROC over an exported dataset directory. conf_dir NULL: CA-CFAR pfa sweep on
 * map channel `channel`; otherwise a threshold sweep over the confidence maps
 * <conf_dir>/<frame_id>.bin. Writes the CSV to out_csv. */
ISAC_API isac_status isac_eval_roc(const char* dataset_dir, const char* conf_dir, size_t channel, const char* out_csv);

/* dataset bridge */
ISAC_API isac_status isac_export_dataset(const isac_scenario* sc, int n_samples, uint64_t seed, const double* offsets,
                                         size_t n_offsets, const char* out_dir);
/* Validates a confidence map and reports its shape and frame id. */
ISAC_API isac_status isac_confidence_check(const char* path, int* rows, int* cols, char** frame_id);

#ifdef __cplusplus
}
#endif

#endif
