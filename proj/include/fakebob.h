/* FakeBob toolkit C API.
 *
 * Black-box adversarial attacks on GMM-UBM speaker recognition: task losses,
 * NES gradient estimation, BIM iteration under an L-inf budget, score
 * threshold estimation, a PSO baseline, input-transformation defenses and the
 * experiment campaigns built on top of them.
 *
 * Conventions:
 *   - Every fallible function returns fb_status; FB_OK is 0.
 *   - On failure, fb_last_error() returns a thread-local message and
 *     fb_status_name() a stable category token.
 *   - Out-parameters are written only on FB_OK.
 *   - Objects returned through fb_*_free functions are owned by the caller.
 */

#ifndef FAKEBOB_H
#define FAKEBOB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fb_status {
  FB_OK = 0,
  FB_ERR_CONFIG = 1,
  FB_ERR_IO = 2,
  FB_ERR_PARSE = 3,
  FB_ERR_INVALID_ARGUMENT = 4,
  FB_ERR_DATA = 5,
  FB_ERR_STATE = 6,
  FB_ERR_BUDGET = 7,
  FB_ERR_INTERNAL = 8
} fb_status;

/* Message for the last failing call on this thread; empty string if none. */
const char* fb_last_error(void);
/* Stable category token, e.g. "invalid-argument". */
const char* fb_status_name(fb_status status);

typedef struct fb_waveform fb_waveform;
typedef struct fb_recognizer fb_recognizer;
typedef struct fb_attack_result fb_attack_result;

/* ---- waveforms (16-bit PCM mono WAV; amplitudes normalized to [-1, 1]) -- */

fb_status fb_waveform_read_wav(const char* path, fb_waveform** out);
fb_status fb_waveform_from_bytes(const uint8_t* bytes, size_t len, fb_waveform** out);
fb_status fb_waveform_write_wav(const fb_waveform* w, const char* path);
fb_status fb_waveform_create(const double* samples, size_t n, int sample_rate, fb_waveform** out);
size_t fb_waveform_length(const fb_waveform* w);
int fb_waveform_sample_rate(const fb_waveform* w);
/* Copies up to cap samples; fails with FB_ERR_INVALID_ARGUMENT when cap is
 * smaller than the waveform. */
fb_status fb_waveform_copy_samples(const fb_waveform* w, double* out, size_t cap);
void fb_waveform_free(fb_waveform* w);

/* Per-sample clip to the intersection of the epsilon-ball around `original`
 * and [-1, 1]. */
fb_status fb_clip_eps(const fb_waveform* candidate, const fb_waveform* original, double epsilon,
                      fb_waveform** out);
/* 10*log10(P_signal/P_noise); zero perturbation is FB_ERR_DATA. Any output
 * pointer may be NULL. */
fb_status fb_snr(const fb_waveform* original, const fb_waveform* adversarial, double* snr_db,
                 double* signal_power, double* noise_power);
fb_status fb_linf_distance(const fb_waveform* a, const fb_waveform* b, double* out);

/* ---- defenses ----------------------------------------------------------- */

typedef enum fb_defense_kind {
  FB_DEFENSE_MEDIAN_FILTER = 0, /* uses k (odd) */
  FB_DEFENSE_AUDIO_SQUEEZE = 1, /* uses tau in (0, 1] */
  FB_DEFENSE_QUANTIZE = 2       /* uses q >= 1 */
} fb_defense_kind;

typedef struct fb_defense_spec {
  fb_defense_kind kind;
  int k;
  double tau;
  int q;
} fb_defense_spec;

fb_status fb_defense_apply(const fb_defense_spec* spec, const fb_waveform* w, fb_waveform** out);

/* ---- recognizer --------------------------------------------------------- */

/* Decision encoding for fb_recognizer_decide:
 *   >= 0  enrolled speaker index (OSI/CSI)
 *   -1    reject
 *   -2    accept (SV) */
#define FB_DECISION_REJECT (-1)
#define FB_DECISION_ACCEPT (-2)

fb_status fb_recognizer_load(const char* path, fb_recognizer** out);
fb_status fb_recognizer_save(const fb_recognizer* rec, const char* path);
void fb_recognizer_free(fb_recognizer* rec);
fb_status fb_recognizer_num_speakers(const fb_recognizer* rec, int* out);
/* FB_ERR_STATE when no threshold is calibrated (CSI). */
fb_status fb_recognizer_threshold(const fb_recognizer* rec, double* out);
/* "osi", "csi" or "sv"; pointer is owned by the recognizer. */
fb_status fb_recognizer_task(const fb_recognizer* rec, const char** out);
fb_status fb_recognizer_score(const fb_recognizer* rec, const fb_waveform* w, double* scores,
                              size_t cap, size_t* n_out);
fb_status fb_recognizer_decide(const fb_recognizer* rec, const fb_waveform* w, int* decision);
/* Same decision after applying the defense to the input first. */
fb_status fb_recognizer_decide_defended(const fb_recognizer* rec, const fb_defense_spec* defense,
                                        const fb_waveform* w, int* decision);

/* Pipeline steps driven by an experiment config file (JSON, versioned):
 * train the UBM, MAP-enroll the speaker group, calibrate the threshold. The
 * resulting model carries the config's task. */
fb_status fb_train(const char* config_path, fb_recognizer** out);
fb_status fb_enroll(const char* config_path, fb_recognizer* rec);
fb_status fb_calibrate(const char* config_path, fb_recognizer* rec);

/* Synthesize the configured corpus into WAV files plus manifest.json. */
fb_status fb_generate_corpus(const char* config_path, const char* out_dir);

/* ---- attacks ------------------------------------------------------------ */

typedef struct fb_attack_config {
  double epsilon;
  double kappa;
  int m; /* NES samples per draw, even */
  double sigma;
  double eta_max;
  double eta_min;
  int max_iter;
  uint64_t seed;
} fb_attack_config;

void fb_attack_config_defaults(fb_attack_config* cfg);

typedef struct fb_pso_config {
  int particles;
  int epochs;
  int iters_per_epoch;
  double w_init;
  double w_end;
  double c1;
  double c2;
  double epsilon;
  double kappa;
  uint64_t seed;
} fb_pso_config;

void fb_pso_config_defaults(fb_pso_config* cfg);

typedef enum fb_loss_kind {
  FB_LOSS_OSI_TARGETED = 0,
  FB_LOSS_OSI_UNTARGETED = 1,
  FB_LOSS_CSI_TARGETED = 2,
  FB_LOSS_CSI_UNTARGETED = 3,
  FB_LOSS_SV_TARGETED = 4
} fb_loss_kind;

/* speaker_arg is the target index (targeted losses) or the source index
 * (CSI untargeted); ignored otherwise. theta_for_loss feeds the OSI/SV
 * losses: the true threshold if exposed, else an estimate. `defense`, when
 * non-NULL, is composed into the queried oracle (the S2 setting). */
fb_status fb_attack_run(const fb_recognizer* rec, const fb_defense_spec* defense,
                        const fb_waveform* original, fb_loss_kind kind, int speaker_arg,
                        double theta_for_loss, const fb_attack_config* cfg,
                        fb_attack_result** out);

fb_status fb_pso_run(const fb_recognizer* rec, const fb_defense_spec* defense,
                     const fb_waveform* original, fb_loss_kind kind, int speaker_arg,
                     double theta_for_loss, const fb_pso_config* cfg, fb_attack_result** out);

fb_status fb_attack_result_adversarial(const fb_attack_result* r, fb_waveform** out);
int fb_attack_result_success(const fb_attack_result* r);
int fb_attack_result_iterations(const fb_attack_result* r);
uint64_t fb_attack_result_queries(const fb_attack_result* r);
/* NaN when the adversarial voice equals the original. */
double fb_attack_result_snr_db(const fb_attack_result* r);
size_t fb_attack_result_trace_len(const fb_attack_result* r);
fb_status fb_attack_result_trace(const fb_attack_result* r, double* out, size_t cap);
void fb_attack_result_free(fb_attack_result* r);

/* Algorithm: raise a candidate threshold stepwise and push the rejected seed
 * voice's score toward it until the oracle accepts; the accepted probe's max
 * score is the estimate (an upper bound on the true threshold). */
fb_status fb_estimate_threshold(const fb_recognizer* rec, const fb_defense_spec* defense,
                                const fb_waveform* seed_voice, const fb_attack_config* cfg,
                                double* theta_hat, uint64_t* queries, fb_waveform** probe);

/* ---- campaigns (coarse-grained; reports returned as JSON strings) ------- */

/* All campaign functions read the experiment config file, write records,
 * summaries and adversarial WAVs under out_dir, and hand back the summary as
 * a JSON string to free with fb_string_free. */
fb_status fb_campaign_effectiveness(const char* config_path, const char* task,
                                    const char* out_dir, char** report_json);
fb_status fb_campaign_epsilon_sweep(const char* config_path, const char* out_dir,
                                    char** table_json);
fb_status fb_campaign_kappa_sweep(const char* config_path, const char* out_dir,
                                  char** table_json);
/* mode is "s1" (transform pre-crafted voices) or "s2" (attack the defended
 * pipeline). */
fb_status fb_campaign_defense(const char* config_path, const char* mode, const char* out_dir,
                              char** report_json);
/* Re-scores the persisted adversarial voices of a campaign on another model. */
fb_status fb_transfer_evaluate(const char* records_dir, const char* target_model_path,
                               char** report_json);
/* Benign FAR/FRR/OSIER/accuracy of the configured systems. */
fb_status fb_evaluate(const char* config_path, char** report_json);
/* Recomputes the aggregate report from a persisted record log. */
fb_status fb_report(const char* records_dir, char** report_json);
/* Re-runs one persisted trial and checks it reproduces bit-identically;
 * match is 1 on success, 0 on divergence. */
fb_status fb_replay_trial(const char* config_path, const char* records_dir, int trial,
                          int* match);

void fb_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FAKEBOB_H */
