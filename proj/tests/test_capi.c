/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "isac/isac_c.h"

static int failures = 0;
static int checks = 0;

#define CHECK(cond)                                                               \
    do {                                                                          \
        ++checks;                                                                 \
        if (!(cond)) {                                                            \
            ++failures;                                                           \
            fprintf(stderr, "%s:%d: CHECK(%s) failed\n", __FILE__, __LINE__, #cond); \
        }                                                                         \
    } while (0)

#define OK(call)                                                                      \
    do {                                                                              \
        isac_status st_ = (call);                                                     \
        ++checks;                                                                     \
        if (st_ != ISAC_OK) {                                                         \
            ++failures;                                                               \
            fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call,        \
                    isac_status_name(st_), isac_last_error());                        \
        }                                                                             \
    } while (0)

static const char* kScenario =
    "{\"config\": {\"n_subcarriers\": 64, \"n_symbols\": 32, \"n_tx\": 4, \"n_rx\": 4,"
    " \"subgrid_range\": 16, \"subgrid_doppler\": 16, \"sensing_gain_req\": 1.0},"
    " \"users\": {\"count\": 2},"
    " \"targets\": [{\"range_m\": 60, \"velocity_mps\": 5, \"snr_db\": 20}],"
    " \"seed\": 3}";

static void put_u32(FILE* fp, unsigned v) {
    unsigned char b[4] = {(unsigned char)(v & 255), (unsigned char)((v >> 8) & 255), (unsigned char)((v >> 16) & 255),
                          (unsigned char)(v >> 24)};
    fwrite(b, 1, 4, fp);
}

/* a one-channel float32 container written by hand, as an external producer would */
static void write_conf(const char* path, int rows, int cols, int hot_r, int hot_c, float hot) {
    FILE* fp = fopen(path, "wb");
    if (!fp) return;
    fwrite("ISACB1", 1, 6, fp);
    put_u32(fp, (unsigned)rows);
    put_u32(fp, (unsigned)cols);
    put_u32(fp, 1);
    put_u32(fp, 1);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            float v = (r == hot_r && c == hot_c) ? hot : 0.0f;
            fwrite(&v, sizeof v, 1, fp);
        }
    fclose(fp);
}

static void join(char* out, size_t n, const char* dir, const char* name) { snprintf(out, n, "%s/%s", dir, name); }

int main(int argc, char** argv) {
    const char* dir = argc > 1 ? argv[1] : ".";
    char path[1024], path2[1024];

    CHECK(strlen(isac_version()) > 0);
    CHECK(strcmp(isac_status_name(ISAC_E_PARSE), "ISAC_E_PARSE") == 0 || strlen(isac_status_name(ISAC_E_PARSE)) > 0);

    /* config */
    isac_config t1;
    OK(isac_config_reference(&t1));
    CHECK(t1.n_subcarriers == 2048);
    CHECK(fabs(t1.range_res - 2.99792458) < 1e-6);
    CHECK(fabs(t1.subcarrier_spacing - 50e6 / 2048) < 1e-6);
    t1.bandwidth = 100e6;
    OK(isac_config_derive(&t1));
    CHECK(fabs(t1.range_res - 2.99792458 / 2) < 1e-6);
    t1.bandwidth = -1;
    CHECK(isac_config_derive(&t1) == ISAC_E_CONFIG);
    CHECK(strlen(isac_last_error()) > 0);

    /* argument and parse errors */
    CHECK(isac_config_reference(NULL) == ISAC_E_INVALID_ARGUMENT);
    isac_scenario* sc = NULL;
    CHECK(isac_scenario_parse("{\"seed\": 1, \"seed\": 2}", &sc) == ISAC_E_PARSE);
    CHECK(strstr(isac_last_error(), "seed") != NULL);
    CHECK(sc == NULL);
    CHECK(isac_scenario_load("/nonexistent/s.json", &sc) == ISAC_E_IO);

    OK(isac_scenario_parse(kScenario, &sc));
    uint64_t seed = 0;
    OK(isac_scenario_seed(sc, &seed));
    CHECK(seed == 3);
    isac_config cfg;
    OK(isac_scenario_config(sc, &cfg));
    CHECK(cfg.n_subcarriers == 64);
    char* js = NULL;
    OK(isac_scenario_json(sc, &js));
    CHECK(js && strstr(js, "\"n_subcarriers\": 64") != NULL);
    isac_scenario* sc2 = NULL;
    OK(isac_scenario_parse(js, &sc2));
    isac_string_free(js);
    isac_scenario_free(sc2);

    /* beams */
    isac_beams* beams = NULL;
    OK(isac_beams_design(sc, &beams));
    char* rep = NULL;
    OK(isac_beams_report(beams, &rep));
    CHECK(rep && strlen(rep) > 10);
    isac_string_free(rep);

    /* frame round trip */
    isac_frame* f = NULL;
    OK(isac_simulate(sc, beams, 11, 1, &f));
    CHECK(isac_frame_target_count(f) == 1);
    join(path, sizeof path, dir, "capi_frame.bin");
    OK(isac_frame_write(f, path));
    isac_frame* g = NULL;
    OK(isac_frame_read(path, &g));
    CHECK(isac_frame_target_count(g) == 1);
    isac_config gc;
    OK(isac_frame_config(g, &gc));
    CHECK(gc.n_symbols == 32);

    /* maps */
    isac_maps* maps = NULL;
    OK(isac_rvmap_default(g, &maps));
    CHECK(isac_maps_count(maps) == 3);
    int rows = 0, cols = 0;
    OK(isac_maps_shape(maps, &rows, &cols));
    CHECK(rows == 64 && cols == 32);
    double off = 1;
    OK(isac_maps_offset(maps, 1, &off));
    CHECK(off == 0.0);
    double* buf = malloc(sizeof(double) * 64 * 32);
    OK(isac_maps_copy(maps, 1, buf, 64 * 32));
    /* 60 m at 3 m per bin: peak in range bin 20 */
    int best = 0;
    for (int i = 1; i < 64 * 32; ++i)
        if (buf[i] > buf[best]) best = i;
    CHECK(best / 32 == 20);
    CHECK(isac_maps_copy(maps, 1, buf, 10) == ISAC_E_DIMENSION || isac_maps_copy(maps, 1, buf, 10) != ISAC_OK);
    CHECK(isac_maps_copy(maps, 5, buf, 64 * 32) != ISAC_OK);
    free(buf);
    join(path2, sizeof path2, dir, "capi_maps.bin");
    OK(isac_maps_write(maps, path2));
    isac_maps* m2 = NULL;
    OK(isac_maps_read(path2, &m2));
    CHECK(isac_maps_count(m2) == 3);
    isac_maps_free(m2);
    join(path2, sizeof path2, dir, "capi_map.png");
    OK(isac_maps_write_png(maps, 0, path2, -40));
    join(path2, sizeof path2, dir, "capi_map.csv");
    OK(isac_maps_write_csv(maps, 0, path2));
    const double bad_bank[2] = {0.1, 0.1};
    isac_maps* m3 = NULL;
    CHECK(isac_rvmap(g, bad_bank, 2, &m3) == ISAC_E_INVALID_ARGUMENT);
    isac_maps_free(maps);

    /* detection */
    isac_detections* d = NULL;
    OK(isac_detect_ml(g, 1, &d));
    CHECK(isac_detections_count(d) == 1);
    isac_detection det;
    OK(isac_detections_get(d, 0, &det));
    CHECK(fabs(det.range_m - 60.0) < 1.0);
    /* one fine Doppler bin is velocity_res / 16 */
    CHECK(fabs(det.vel_mps - 5.0) <= gc.velocity_res / 16);
    CHECK(det.evals == 64 * 32 + 16 * 16);
    CHECK(isac_detections_get(d, 1, &det) == ISAC_E_OUT_OF_RANGE);
    isac_score score;
    OK(isac_eval_score(d, g, 1, &score));
    CHECK(score.pd == 1.0 && score.targets == 1);
    isac_rmse err;
    OK(isac_eval_rmse(d, g, &err));
    CHECK(err.range_rmse < 1.0 && err.matched == 1);
    join(path2, sizeof path2, dir, "capi_dets.csv");
    OK(isac_detections_write_csv(d, path2));
    isac_detections* d2 = NULL;
    OK(isac_detections_read_csv(path2, &gc, &d2));
    CHECK(isac_detections_count(d2) == 1);
    isac_detection det2;
    OK(isac_detections_get(d2, 0, &det2));
    CHECK(fabs(det2.tau_bar - det.tau_bar) < 1e-9);
    isac_detections_free(d2);
    isac_detections_free(d);

    OK(isac_detect_cfar(g, 0.0, 2, 8, 1e-3, &d));
    OK(isac_eval_score(d, g, 1, &score));
    CHECK(score.pd == 1.0);
    isac_detections_free(d);
    CHECK(isac_detect_cfar(g, 0.0, 0, 8, 1e-3, &d) == ISAC_E_INVALID_ARGUMENT);

    OK(isac_detect_lr(g, NULL, 0.5, 10, 1e-3, &d));
    CHECK(isac_detections_count(d) >= 1);
    isac_detections_free(d);

    join(path2, sizeof path2, dir, "capi_conf.bin");
    write_conf(path2, 64, 32, 20, 1, 0.9f);
    int cr = 0, cc = 0;
    char* fid = NULL;
    OK(isac_confidence_check(path2, &cr, &cc, &fid));
    CHECK(cr == 64 && cc == 32);
    CHECK(fid && strcmp(fid, "capi_conf") == 0);
    isac_string_free(fid);
    OK(isac_detect_lr(g, path2, 0.5, 10, 1e-3, &d));
    CHECK(isac_detections_count(d) == 1);
    isac_detections_free(d);
    write_conf(path2, 64, 32, 0, 0, 1.2f);
    CHECK(isac_confidence_check(path2, NULL, NULL, NULL) == ISAC_E_VALIDATION);
    write_conf(path2, 16, 32, 0, 0, 0.9f);
    CHECK(isac_detect_lr(g, path2, 0.5, 10, 1e-3, &d) == ISAC_E_DIMENSION);

    /* dataset and ROC */
    join(path2, sizeof path2, dir, "capi_dataset");
    OK(isac_export_dataset(sc, 2, 7, NULL, 0, path2));
    join(path, sizeof path, dir, "capi_roc.csv");
    OK(isac_eval_roc(path2, NULL, 1, path));
    FILE* fp = fopen(path, "r");
    char line[256] = {0};
    CHECK(fp && fgets(line, sizeof line, fp) && strcmp(line, "threshold,pd,pfa\n") == 0);
    if (fp) fclose(fp);
    CHECK(isac_eval_roc("/nonexistent", NULL, 1, path) != ISAC_OK);

    isac_frame_free(g);
    isac_frame_free(f);
    isac_beams_free(beams);
    isac_scenario_free(sc);
    /* freeing NULL is a no-op */
    isac_scenario_free(NULL);
    isac_frame_free(NULL);

    printf("%d checks, %d failures\n", checks, failures);
    return failures ? 1 : 0;
}
