/* veridict — training-free adversarial-text detection toolkit.
 *
 * C API over the core library: opaque handles, integer status codes, and
 * JSON strings for structured results. Every char* returned by a vd_*
 * function is heap-allocated and must be released with vd_string_free().
 * Functions returning a pointer yield NULL on failure; functions returning
 * int yield 0 on success. vd_last_error()/vd_last_error_code() describe the
 * most recent failure on the calling thread.
 *
 * Handles passed into a constructor (models into a detector, lexicons into
 * components) must outlive the constructed handle.
 */

#ifndef VERIDICT_H
#define VERIDICT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define VD_API __declspec(dllexport)
#else
#define VD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
    VD_OK = 0,
    VD_ERR_CONFIG = 1,   /* invalid configuration or option value */
    VD_ERR_IO = 2,       /* unreadable/unwritable file */
    VD_ERR_FORMAT = 3,   /* malformed file contents */
    VD_ERR_ARGUMENT = 4, /* bad call argument (NULL handle, bad position...) */
    VD_ERR_INTERNAL = 5
};

typedef struct vd_model vd_model;
typedef struct vd_components vd_components;
typedef struct vd_detector vd_detector;
typedef struct vd_evalset vd_evalset;

VD_API const char* vd_version(void);
VD_API int vd_last_error_code(void);
VD_API const char* vd_last_error(void);
VD_API void vd_string_free(char* s);

/* ------------------------------------------------------------------ models
 * Training config JSON (all fields optional):
 *   {"kind":"naive-bayes"|"logistic-regression", "features":"bow"|"bow+char3",
 *    "smoothing":1.0, "learning_rate":0.1, "epochs":30, "seed":42}
 * The corpus CSV must carry the header `label,text` (RFC 4180 quoting).
 */
VD_API vd_model* vd_model_train_csv(const char* corpus_csv_path, const char* config_json);
VD_API vd_model* vd_model_load(const char* path);
VD_API int vd_model_save(const vd_model* model, const char* path);
VD_API void vd_model_free(vd_model* model);

/* {"class_id":1,"class_name":"pos","probs":[0.02,0.98]} */
VD_API char* vd_model_predict(const vd_model* model, const char* text);
/* {"kind":...,"classes":[...],"features":...} */
VD_API char* vd_model_info(const vd_model* model);
VD_API uint64_t vd_model_queries(const vd_model* model);
VD_API void vd_model_reset_queries(const vd_model* model);

/* -------------------------------------------------------------- components
 * Attack-component bundle (importance scorer + transformation provider +
 * similarity constraint). Config JSON:
 *   {"provider": {"kind":"lexicon","lexicon_path":"demo.tsv","cap":20}
 *              | {"kind":"char-ops","ops":["swap","substitute","delete","insert"],
 *                 "alphabet":"qwerty"|"letters","seed":42,"cap":20}
 *              | {"kind":"deletion"},
 *    "scorer": "unk"|"deletion"|"none",
 *    "constraint": {"stopwords_path":null, "max_perturbed_ratio":0.4,
 *                   "min_word_length":0}}
 * A null stopwords_path selects the bundled English list.
 */
VD_API vd_components* vd_components_create(const char* config_json);
VD_API void vd_components_free(vd_components* components);

/* ---------------------------------------------------------------- detector
 * Config JSON: {"alpha":1.0, "early_stop":true,
 *               "order":"importance"|"random", "random_seed":0}
 */
VD_API vd_detector* vd_detector_create(const vd_model* target,
                                       const vd_components* components,
                                       const char* config_json);
/* Support models must share the target's class set and outlive the detector. */
VD_API int vd_detector_add_support(vd_detector* detector, const vd_model* support);
/* Verdict JSON: {"is_adversarial":true,"trigger_index":3,"queries":57,
 *                "words_processed":4,"tallies":[{"word_index":3,
 *                "counts":{"pos":1,"neg":2}},...]} */
VD_API char* vd_detect(const vd_detector* detector, const char* text);
VD_API void vd_detector_free(vd_detector* detector);

/* ----------------------------------------------------------------- attacks
 * Options JSON: {"kind":"greedy"|"char"|"input-reduction", "budget":2000,
 *                "min_confidence":0.0}
 * Pass a detector to run the adaptive variant (the attack must then also
 * leave the detector saying "original"); pass NULL for the plain attack.
 * Result is one attack-record JSON:
 *   {"id":0,"original":...,"adversarial":...|null,"gold_label":...,
 *    "flipped_label":...|null,"perturbed_positions":[...],"queries":N}
 */
VD_API char* vd_attack_text(const vd_model* target, const vd_components* components,
                            const vd_detector* adaptive_detector, const char* text,
                            const char* gold_label, const char* options_json);

/* Attacks every corpus row (misclassified rows yield a null adversarial) and
 * returns JSON-lines, one record per input. Extra options:
 *   {"limit":0, "max_success":0}   (0 = unbounded)
 */
VD_API char* vd_attack_corpus(const vd_model* target, const vd_components* components,
                              const vd_detector* adaptive_detector,
                              const char* corpus_csv_path, const char* options_json);

/* ---------------------------------------------------------------- eval sets
 * Balanced original/adversarial pairs, loaded from attack JSONL (records with
 * a null adversarial are skipped).
 */
VD_API vd_evalset* vd_evalset_load_jsonl(const char* path);
VD_API vd_evalset* vd_evalset_from_jsonl(const char* jsonl);
VD_API size_t vd_evalset_size(const vd_evalset* set);
VD_API void vd_evalset_free(vd_evalset* set);

/* ----------------------------------------------------------------- reports
 * Evaluation report JSON (adversarial = positive class):
 *   {"f1":...,"recall":...,"precision":...,"counts":{...},
 *    "mean_queries":{"adv":...,"orig":...},"config_fingerprint":"..."}
 * Wall time is omitted unless include_wall_time != 0 so that fixed inputs
 * produce byte-identical reports.
 */
VD_API char* vd_evaluate(const vd_detector* detector, const vd_evalset* set,
                         int include_wall_time);

/* Per-text maximum one-word prediction-change rates, split by side:
 *   {"adv":{"mean":...,"rates":[...],"histogram":[10 bins]},"orig":{...}} */
VD_API char* vd_max_rate_histogram(const vd_model* target, const vd_components* components,
                                   const vd_evalset* set);

/* Measured query counts against the worst-case bound:
 *   {"theoretical_mean":{...},"measured_mean":{...},"reduction_pct":{...},
 *    "all_within_bound":true} */
VD_API char* vd_prediction_report(const vd_detector* detector, const vd_evalset* set);

/* ----------------------------------------------------------------- corpus
 * Seeded synthetic corpus + demo lexicon. Config JSON mirrors the generator
 * defaults; {"preset":"binary"} selects the two-class tuning. Writes the
 * train/test CSVs and the lexicon TSV; returns a summary JSON.
 */
VD_API char* vd_corpus_generate(const char* config_json, const char* train_csv_path,
                                const char* test_csv_path, const char* lexicon_tsv_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* VERIDICT_H */
