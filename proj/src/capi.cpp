#include "fakebob.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "attack.hpp"
#include "campaign.hpp"
#include "config.hpp"
#include "defenses.hpp"
#include "error.hpp"
#include "oracle.hpp"
#include "pso.hpp"
#include "threadpool.hpp"

using namespace fakebob;

namespace {

thread_local std::string g_last_error;

fb_status status_from(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return FB_ERR_CONFIG;
    case ErrorCategory::io: return FB_ERR_IO;
    case ErrorCategory::parse: return FB_ERR_PARSE;
    case ErrorCategory::invalid_argument: return FB_ERR_INVALID_ARGUMENT;
    case ErrorCategory::data: return FB_ERR_DATA;
    case ErrorCategory::state: return FB_ERR_STATE;
    case ErrorCategory::budget: return FB_ERR_BUDGET;
    case ErrorCategory::internal: return FB_ERR_INTERNAL;
  }
  return FB_ERR_INTERNAL;
}

template <typename Fn>
fb_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_from(e.category());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FB_ERR_INTERNAL;
  }
}

void check_ptr(const void* p, const char* what) {
  require(p != nullptr, ErrorCategory::invalid_argument,
          std::string(what) + " must not be NULL");
}

DefenseSpec defense_from(const fb_defense_spec& s) {
  switch (s.kind) {
    case FB_DEFENSE_MEDIAN_FILTER: return MedianFilterSpec{s.k};
    case FB_DEFENSE_AUDIO_SQUEEZE: return AudioSqueezeSpec{s.tau};
    case FB_DEFENSE_QUANTIZE: return QuantizeSpec{s.q};
  }
  fail(ErrorCategory::invalid_argument, "unknown defense kind");
}

AttackConfig attack_from(const fb_attack_config& c) {
  AttackConfig out;
  out.epsilon = c.epsilon;
  out.kappa = c.kappa;
  out.m = c.m;
  out.sigma = c.sigma;
  out.eta_max = c.eta_max;
  out.eta_min = c.eta_min;
  out.max_iter = c.max_iter;
  out.seed = c.seed;
  return out;
}

PsoConfig pso_from(const fb_pso_config& c) {
  PsoConfig out;
  out.particles = c.particles;
  out.epochs = c.epochs;
  out.iters_per_epoch = c.iters_per_epoch;
  out.w_init = c.w_init;
  out.w_end = c.w_end;
  out.c1 = c.c1;
  out.c2 = c.c2;
  out.epsilon = c.epsilon;
  out.kappa = c.kappa;
  out.seed = c.seed;
  return out;
}

LossKind kind_from(fb_loss_kind kind, int speaker_arg) {
  switch (kind) {
    case FB_LOSS_OSI_TARGETED: return OsiTargeted{speaker_arg};
    case FB_LOSS_OSI_UNTARGETED: return OsiUntargeted{};
    case FB_LOSS_CSI_TARGETED: return CsiTargeted{speaker_arg};
    case FB_LOSS_CSI_UNTARGETED: return CsiUntargeted{speaker_arg};
    case FB_LOSS_SV_TARGETED: return SvTargeted{};
  }
  fail(ErrorCategory::invalid_argument, "unknown loss kind");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  require(out != nullptr, ErrorCategory::internal, "out of memory");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct fb_waveform {
  Waveform w;
};

struct fb_recognizer {
  Recognizer rec;
  std::string task_string;
};

struct fb_attack_result {
  AttackResult r;
};

extern "C" {

const char* fb_last_error(void) { return g_last_error.c_str(); }

const char* fb_status_name(fb_status status) {
  switch (status) {
    case FB_OK: return "ok";
    case FB_ERR_CONFIG: return "config";
    case FB_ERR_IO: return "io";
    case FB_ERR_PARSE: return "parse";
    case FB_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case FB_ERR_DATA: return "data";
    case FB_ERR_STATE: return "state";
    case FB_ERR_BUDGET: return "budget";
    case FB_ERR_INTERNAL: return "internal";
  }
  return "internal";
}

fb_status fb_waveform_read_wav(const char* path, fb_waveform** out) {
  return guarded([&] {
    check_ptr(path, "path");
    check_ptr(out, "out");
    *out = new fb_waveform{read_wav_file(path)};
  });
}

fb_status fb_waveform_from_bytes(const uint8_t* bytes, size_t len, fb_waveform** out) {
  return guarded([&] {
    check_ptr(bytes, "bytes");
    check_ptr(out, "out");
    *out = new fb_waveform{read_wav_bytes(std::span<const std::uint8_t>(bytes, len))};
  });
}

fb_status fb_waveform_write_wav(const fb_waveform* w, const char* path) {
  return guarded([&] {
    check_ptr(w, "waveform");
    check_ptr(path, "path");
    write_wav_file(w->w, path);
  });
}

fb_status fb_waveform_create(const double* samples, size_t n, int sample_rate, fb_waveform** out) {
  return guarded([&] {
    check_ptr(samples, "samples");
    check_ptr(out, "out");
    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.assign(samples, samples + n);
    validate_waveform(w);
    *out = new fb_waveform{std::move(w)};
  });
}

size_t fb_waveform_length(const fb_waveform* w) { return w ? w->w.samples.size() : 0; }

int fb_waveform_sample_rate(const fb_waveform* w) { return w ? w->w.sample_rate : 0; }

fb_status fb_waveform_copy_samples(const fb_waveform* w, double* out, size_t cap) {
  return guarded([&] {
    check_ptr(w, "waveform");
    check_ptr(out, "out");
    require(cap >= w->w.samples.size(), ErrorCategory::invalid_argument,
            "destination buffer too small");
    std::memcpy(out, w->w.samples.data(), w->w.samples.size() * sizeof(double));
  });
}

void fb_waveform_free(fb_waveform* w) { delete w; }

fb_status fb_clip_eps(const fb_waveform* candidate, const fb_waveform* original, double epsilon,
                      fb_waveform** out) {
  return guarded([&] {
    check_ptr(candidate, "candidate");
    check_ptr(original, "original");
    check_ptr(out, "out");
    *out = new fb_waveform{clip_eps(candidate->w, original->w, epsilon)};
  });
}

fb_status fb_snr(const fb_waveform* original, const fb_waveform* adversarial, double* snr_db,
                 double* signal_power, double* noise_power) {
  return guarded([&] {
    check_ptr(original, "original");
    check_ptr(adversarial, "adversarial");
    SnrReport rep = snr(original->w, adversarial->w);
    if (snr_db) *snr_db = rep.snr_db;
    if (signal_power) *signal_power = rep.signal_power;
    if (noise_power) *noise_power = rep.noise_power;
  });
}

fb_status fb_linf_distance(const fb_waveform* a, const fb_waveform* b, double* out) {
  return guarded([&] {
    check_ptr(a, "a");
    check_ptr(b, "b");
    check_ptr(out, "out");
    *out = linf_distance(a->w, b->w);
  });
}

fb_status fb_defense_apply(const fb_defense_spec* spec, const fb_waveform* w, fb_waveform** out) {
  return guarded([&] {
    check_ptr(spec, "spec");
    check_ptr(w, "waveform");
    check_ptr(out, "out");
    *out = new fb_waveform{apply_defense(defense_from(*spec), w->w)};
  });
}

fb_status fb_recognizer_load(const char* path, fb_recognizer** out) {
  return guarded([&] {
    check_ptr(path, "path");
    check_ptr(out, "out");
    Recognizer rec = Recognizer::load(path);
    *out = new fb_recognizer{std::move(rec), ""};
    (*out)->task_string = task_name((*out)->rec.task());
  });
}

fb_status fb_recognizer_save(const fb_recognizer* rec, const char* path) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(path, "path");
    rec->rec.save(path);
  });
}

void fb_recognizer_free(fb_recognizer* rec) { delete rec; }

fb_status fb_recognizer_num_speakers(const fb_recognizer* rec, int* out) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(out, "out");
    *out = rec->rec.num_speakers();
  });
}

fb_status fb_recognizer_threshold(const fb_recognizer* rec, double* out) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(out, "out");
    require(rec->rec.threshold().has_value(), ErrorCategory::state,
            "recognizer has no calibrated threshold");
    *out = *rec->rec.threshold();
  });
}

fb_status fb_recognizer_task(const fb_recognizer* rec, const char** out) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(out, "out");
    *out = rec->task_string.c_str();
  });
}

fb_status fb_recognizer_score(const fb_recognizer* rec, const fb_waveform* w, double* scores,
                              size_t cap, size_t* n_out) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(w, "waveform");
    check_ptr(scores, "scores");
    std::vector<double> s = rec->rec.score(w->w);
    require(cap >= s.size(), ErrorCategory::invalid_argument, "score buffer too small");
    std::memcpy(scores, s.data(), s.size() * sizeof(double));
    if (n_out) *n_out = s.size();
  });
}

namespace {
int encode_decision(const DecisionOutcome& o) {
  switch (o.kind) {
    case DecisionKind::speaker: return o.speaker_index;
    case DecisionKind::reject: return FB_DECISION_REJECT;
    case DecisionKind::accept: return FB_DECISION_ACCEPT;
  }
  return FB_DECISION_REJECT;
}
}  // namespace

fb_status fb_recognizer_decide(const fb_recognizer* rec, const fb_waveform* w, int* decision) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(w, "waveform");
    check_ptr(decision, "decision");
    *decision = encode_decision(rec->rec.decide(w->w));
  });
}

fb_status fb_recognizer_decide_defended(const fb_recognizer* rec, const fb_defense_spec* defense,
                                        const fb_waveform* w, int* decision) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(defense, "defense");
    check_ptr(w, "waveform");
    check_ptr(decision, "decision");
    Waveform transformed = apply_defense(defense_from(*defense), w->w);
    *decision = encode_decision(rec->rec.decide(transformed));
  });
}

fb_status fb_train(const char* config_path, fb_recognizer** out) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(out, "out");
    ExperimentConfig cfg = load_experiment_config(config_path);
    // UBM-only model; enrollment and calibration come later in the pipeline.
    DiagGmm ubm = train_ubm_from_config(cfg);
    Task task = task_from_name(cfg.recognizer.task);
    Recognizer rec(task, cfg.feature, std::move(ubm), {}, std::nullopt);
    *out = new fb_recognizer{std::move(rec), cfg.recognizer.task};
  });
}

fb_status fb_enroll(const char* config_path, fb_recognizer* rec) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(rec, "recognizer");
    ExperimentConfig cfg = load_experiment_config(config_path);
    std::vector<SpeakerModel> models = enroll_from_config(cfg, rec->rec.ubm());
    Task task = rec->rec.task();
    std::vector<SpeakerModel> speakers =
        task == Task::sv ? std::vector<SpeakerModel>{models.front()} : models;
    rec->rec = Recognizer(task, cfg.feature, rec->rec.ubm(), speakers, rec->rec.threshold());
  });
}

fb_status fb_calibrate(const char* config_path, fb_recognizer* rec) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(rec, "recognizer");
    ExperimentConfig cfg = load_experiment_config(config_path);
    std::vector<Waveform> calib = calibration_voices(cfg);
    double theta = calibrate_threshold(rec->rec, calib, cfg.recognizer.target_far);
    rec->rec = rec->rec.with_threshold(theta);
  });
}

fb_status fb_generate_corpus(const char* config_path, const char* out_dir) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(out_dir, "out_dir");
    ExperimentConfig cfg = load_experiment_config(config_path);
    write_corpus_dir(cfg, out_dir);
  });
}

void fb_attack_config_defaults(fb_attack_config* cfg) {
  if (!cfg) return;
  AttackConfig d;
  cfg->epsilon = d.epsilon;
  cfg->kappa = d.kappa;
  cfg->m = d.m;
  cfg->sigma = d.sigma;
  cfg->eta_max = d.eta_max;
  cfg->eta_min = d.eta_min;
  cfg->max_iter = d.max_iter;
  cfg->seed = d.seed;
}

void fb_pso_config_defaults(fb_pso_config* cfg) {
  if (!cfg) return;
  PsoConfig d;
  cfg->particles = d.particles;
  cfg->epochs = d.epochs;
  cfg->iters_per_epoch = d.iters_per_epoch;
  cfg->w_init = d.w_init;
  cfg->w_end = d.w_end;
  cfg->c1 = d.c1;
  cfg->c2 = d.c2;
  cfg->epsilon = d.epsilon;
  cfg->kappa = d.kappa;
  cfg->seed = d.seed;
}

fb_status fb_attack_run(const fb_recognizer* rec, const fb_defense_spec* defense,
                        const fb_waveform* original, fb_loss_kind kind, int speaker_arg,
                        double theta_for_loss, const fb_attack_config* cfg,
                        fb_attack_result** out) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(original, "original");
    check_ptr(cfg, "config");
    check_ptr(out, "out");
    LossKind lk = kind_from(kind, speaker_arg);
    AttackConfig ac = attack_from(*cfg);
    AttackResult r;
    if (defense) {
      DefendedOracle oracle(defense_from(*defense), rec->rec);
      r = run_fakebob(original->w, oracle, lk, theta_for_loss, ac, hardware_parallelism());
    } else {
      RecognizerOracle oracle(rec->rec);
      r = run_fakebob(original->w, oracle, lk, theta_for_loss, ac, hardware_parallelism());
    }
    *out = new fb_attack_result{std::move(r)};
  });
}

fb_status fb_pso_run(const fb_recognizer* rec, const fb_defense_spec* defense,
                     const fb_waveform* original, fb_loss_kind kind, int speaker_arg,
                     double theta_for_loss, const fb_pso_config* cfg, fb_attack_result** out) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(original, "original");
    check_ptr(cfg, "config");
    check_ptr(out, "out");
    LossKind lk = kind_from(kind, speaker_arg);
    PsoConfig pc = pso_from(*cfg);
    AttackResult r;
    if (defense) {
      DefendedOracle oracle(defense_from(*defense), rec->rec);
      r = pso_attack(original->w, oracle, lk, theta_for_loss, pc);
    } else {
      RecognizerOracle oracle(rec->rec);
      r = pso_attack(original->w, oracle, lk, theta_for_loss, pc);
    }
    *out = new fb_attack_result{std::move(r)};
  });
}

fb_status fb_attack_result_adversarial(const fb_attack_result* r, fb_waveform** out) {
  return guarded([&] {
    check_ptr(r, "result");
    check_ptr(out, "out");
    *out = new fb_waveform{r->r.adversarial};
  });
}

int fb_attack_result_success(const fb_attack_result* r) { return r && r->r.success ? 1 : 0; }

int fb_attack_result_iterations(const fb_attack_result* r) { return r ? r->r.iterations : 0; }

uint64_t fb_attack_result_queries(const fb_attack_result* r) { return r ? r->r.queries : 0; }

double fb_attack_result_snr_db(const fb_attack_result* r) {
  return r ? r->r.snr_db : 0.0;
}

size_t fb_attack_result_trace_len(const fb_attack_result* r) {
  return r ? r->r.loss_trace.size() : 0;
}

fb_status fb_attack_result_trace(const fb_attack_result* r, double* out, size_t cap) {
  return guarded([&] {
    check_ptr(r, "result");
    check_ptr(out, "out");
    require(cap >= r->r.loss_trace.size(), ErrorCategory::invalid_argument,
            "trace buffer too small");
    std::memcpy(out, r->r.loss_trace.data(), r->r.loss_trace.size() * sizeof(double));
  });
}

void fb_attack_result_free(fb_attack_result* r) { delete r; }

fb_status fb_estimate_threshold(const fb_recognizer* rec, const fb_defense_spec* defense,
                                const fb_waveform* seed_voice, const fb_attack_config* cfg,
                                double* theta_hat, uint64_t* queries, fb_waveform** probe) {
  return guarded([&] {
    check_ptr(rec, "recognizer");
    check_ptr(seed_voice, "seed_voice");
    check_ptr(cfg, "config");
    check_ptr(theta_hat, "theta_hat");
    AttackConfig ac = attack_from(*cfg);
    ThresholdEstimate est;
    if (defense) {
      DefendedOracle oracle(defense_from(*defense), rec->rec);
      est = estimate_threshold(oracle, seed_voice->w, ac, hardware_parallelism());
    } else {
      RecognizerOracle oracle(rec->rec);
      est = estimate_threshold(oracle, seed_voice->w, ac, hardware_parallelism());
    }
    *theta_hat = est.theta_hat;
    if (queries) *queries = est.queries;
    if (probe) *probe = new fb_waveform{std::move(est.probe)};
  });
}

fb_status fb_campaign_effectiveness(const char* config_path, const char* task,
                                    const char* out_dir, char** report_json) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(task, "task");
    check_ptr(out_dir, "out_dir");
    check_ptr(report_json, "report_json");
    ExperimentConfig cfg = load_experiment_config(config_path);
    CampaignOutcome out = run_effectiveness_campaign(cfg, task_from_name(task), out_dir);
    *report_json = dup_string(out.report.dump(2));
  });
}

fb_status fb_campaign_epsilon_sweep(const char* config_path, const char* out_dir,
                                    char** table_json) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(out_dir, "out_dir");
    check_ptr(table_json, "table_json");
    ExperimentConfig cfg = load_experiment_config(config_path);
    *table_json = dup_string(run_epsilon_sweep(cfg, out_dir).dump(2));
  });
}

fb_status fb_campaign_kappa_sweep(const char* config_path, const char* out_dir,
                                  char** table_json) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(out_dir, "out_dir");
    check_ptr(table_json, "table_json");
    ExperimentConfig cfg = load_experiment_config(config_path);
    *table_json = dup_string(run_kappa_sweep(cfg, out_dir).dump(2));
  });
}

fb_status fb_campaign_defense(const char* config_path, const char* mode, const char* out_dir,
                              char** report_json) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(mode, "mode");
    check_ptr(out_dir, "out_dir");
    check_ptr(report_json, "report_json");
    ExperimentConfig cfg = load_experiment_config(config_path);
    *report_json = dup_string(run_defense_evaluation(cfg, mode, out_dir).dump(2));
  });
}

fb_status fb_transfer_evaluate(const char* records_dir, const char* target_model_path,
                               char** report_json) {
  return guarded([&] {
    check_ptr(records_dir, "records_dir");
    check_ptr(target_model_path, "target_model_path");
    check_ptr(report_json, "report_json");
    Recognizer target = Recognizer::load(target_model_path);
    *report_json = dup_string(run_transfer_evaluation_json(records_dir, target).dump(2));
  });
}

fb_status fb_evaluate(const char* config_path, char** report_json) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(report_json, "report_json");
    ExperimentConfig cfg = load_experiment_config(config_path);
    *report_json = dup_string(run_benign_evaluation(cfg).dump(2));
  });
}

fb_status fb_report(const char* records_dir, char** report_json) {
  return guarded([&] {
    check_ptr(records_dir, "records_dir");
    check_ptr(report_json, "report_json");
    *report_json = dup_string(report_from_records(records_dir).dump(2));
  });
}

fb_status fb_replay_trial(const char* config_path, const char* records_dir, int trial,
                          int* match) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(records_dir, "records_dir");
    check_ptr(match, "match");
    ExperimentConfig cfg = load_experiment_config(config_path);
    auto records = read_records(std::string(records_dir) + "/records.jsonl");
    const TrialRecord* found = nullptr;
    for (const auto& r : records)
      if (r.trial == trial) found = &r;
    require(found != nullptr, ErrorCategory::data,
            "no record with trial index " + std::to_string(trial));
    DeskSystem sys = build_desk_system(cfg);
    AttackResult res = replay_trial(cfg, sys, *found);
    Waveform persisted = read_wav_file(std::string(records_dir) + "/" + found->wav);
    Waveform replayed_wav = read_wav_bytes(write_wav_bytes(res.adversarial));
    bool same = persisted.samples == replayed_wav.samples &&
                res.queries == found->queries && res.success == found->success &&
                res.iterations == found->iterations;
    *match = same ? 1 : 0;
  });
}

void fb_string_free(char* s) { std::free(s); }

}  // extern "C"
