#ifndef KBFG_H
#define KBFG_H

/*
 * kbfg — knowledge-based feature generation from auxiliary tabular datasets.
 *
 * C API of the shared library. All objects are opaque handles owned by the
 * library; every function that can fail returns a kbfg_status and leaves a
 * human-readable message in kbfg_last_error() (thread-local, valid until the
 * next failing call on the same thread).
 *
 * Datasets are CSV files with a header row paired with a schema file that
 * declares each column's kind, the optional label column and the
 * missing-value token. Generation and evaluation runs are described by a
 * JSON configuration file; see the project README for the format.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define KBFG_API __declspec(dllexport)
#else
#define KBFG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct kbfg_dataset kbfg_dataset;
typedef struct kbfg_matching kbfg_matching;

typedef enum kbfg_status {
    KBFG_OK = 0,
    KBFG_ERROR_IO = 1,      /* unreadable or unwritable file */
    KBFG_ERROR_PARSE = 2,   /* malformed input file */
    KBFG_ERROR_INVALID = 3, /* invalid arguments or configuration */
    KBFG_ERROR_INTERNAL = 4
} kbfg_status;

KBFG_API const char* kbfg_version(void);
KBFG_API const char* kbfg_last_error(void);

/* --- datasets ----------------------------------------------------------- */

KBFG_API kbfg_status kbfg_dataset_open(const char* data_path, const char* schema_path,
                                       kbfg_dataset** out);
KBFG_API void kbfg_dataset_close(kbfg_dataset* d);
KBFG_API size_t kbfg_dataset_rows(const kbfg_dataset* d);
KBFG_API size_t kbfg_dataset_features(const kbfg_dataset* d);
KBFG_API int kbfg_dataset_labeled(const kbfg_dataset* d);
KBFG_API kbfg_status kbfg_dataset_save(const kbfg_dataset* d, const char* data_path,
                                       const char* schema_path);
/* per-column min-max rescale of continuous features to [0,1] */
KBFG_API kbfg_status kbfg_dataset_normalize(const kbfg_dataset* d, kbfg_dataset** out);

/* --- feature matching ----------------------------------------------------- */

/*
 * strategy_json selects the matching regime:
 *   {"kind":"exact"}
 *   {"kind":"manual","table":"pairs.tsv"}
 *   {"kind":"fuzzy","threshold":0.2}
 *   {"kind":"embedding","vectors":"vectors.txt","min_cosine":0.5}
 *   {"kind":"distribution","max_distance":0.1}
 */
KBFG_API kbfg_status kbfg_match(const kbfg_dataset* train, const kbfg_dataset* aux,
                                const char* strategy_json, kbfg_matching** out);
KBFG_API void kbfg_matching_close(kbfg_matching* m);
KBFG_API size_t kbfg_matching_pair_count(const kbfg_matching* m);
KBFG_API size_t kbfg_matching_aux_only_count(const kbfg_matching* m);
/* borrowed strings, valid while the matching handle lives */
KBFG_API kbfg_status kbfg_matching_pair(const kbfg_matching* m, size_t index,
                                        const char** train_name, const char** aux_name,
                                        double* score);
KBFG_API kbfg_status kbfg_matching_save(const kbfg_matching* m, const char* path);

/* --- feature generation task construction ---------------------------------- */

/* Splits one labeled dataset into a disjoint train/auxiliary pair: mu1 is the
 * shared-feature fraction, mu2 the train share of the remaining features. */
KBFG_API kbfg_status kbfg_split_fgt(const kbfg_dataset* d, double mu1, double mu2,
                                    uint64_t seed, kbfg_dataset** train_out,
                                    kbfg_dataset** aux_out);

/* --- configuration-driven runs ---------------------------------------------- */

/* Runs feature generation / the evaluation protocol described by a JSON
 * config file; outputs (enhanced dataset, feature manifest, predictors,
 * reports, run manifest) are written atomically under out_dir. jobs bounds
 * worker threads; 1 is bit-identical to any other value. */
KBFG_API kbfg_status kbfg_run_generate(const char* config_path, const char* out_dir, int jobs);
KBFG_API kbfg_status kbfg_run_evaluate(const char* config_path, const char* out_dir, int jobs);

#ifdef __cplusplus
}
#endif

#endif /* KBFG_H */
