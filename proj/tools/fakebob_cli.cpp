// Command-line front end for the FakeBob toolkit. Talks to the core library
// exclusively through the C API in fakebob.h.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fakebob.h"

namespace {

// Exit code mirrors the fb_status value; stderr carries the machine-readable
// category plus the human message.
int fail_with(fb_status status) {
  std::fprintf(stderr, "error: category=%s message=\"%s\"\n", fb_status_name(status),
               fb_last_error());
  return static_cast<int>(status);
}

#define CHECK_FB(call)                      \
  do {                                      \
    fb_status status__ = (call);            \
    if (status__ != FB_OK) return fail_with(status__); \
  } while (0)

struct WaveformDeleter {
  void operator()(fb_waveform* w) const { fb_waveform_free(w); }
};
struct RecognizerDeleter {
  void operator()(fb_recognizer* r) const { fb_recognizer_free(r); }
};
struct ResultDeleter {
  void operator()(fb_attack_result* r) const { fb_attack_result_free(r); }
};
using WaveformPtr = std::unique_ptr<fb_waveform, WaveformDeleter>;
using RecognizerPtr = std::unique_ptr<fb_recognizer, RecognizerDeleter>;
using ResultPtr = std::unique_ptr<fb_attack_result, ResultDeleter>;

void print_json(char* json) {
  std::printf("%s\n", json);
  fb_string_free(json);
}

fb_loss_kind parse_loss_kind(const std::string& s, bool* ok) {
  *ok = true;
  if (s == "osi_targeted") return FB_LOSS_OSI_TARGETED;
  if (s == "osi_untargeted") return FB_LOSS_OSI_UNTARGETED;
  if (s == "csi_targeted") return FB_LOSS_CSI_TARGETED;
  if (s == "csi_untargeted") return FB_LOSS_CSI_UNTARGETED;
  if (s == "sv_targeted") return FB_LOSS_SV_TARGETED;
  *ok = false;
  return FB_LOSS_OSI_TARGETED;
}

struct AttackFlags {
  std::string config;
  std::string model;
  std::string input;
  std::string output;
  std::string loss = "osi_targeted";
  int speaker_arg = 0;
  double theta = std::nan("");
  double epsilon = -1.0;
  double kappa = -1.0;
  int max_iter = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_single_attack(const AttackFlags& flags, bool pso) {
  RecognizerPtr rec;
  {
    fb_recognizer* raw = nullptr;
    CHECK_FB(fb_recognizer_load(flags.model.c_str(), &raw));
    rec.reset(raw);
  }
  WaveformPtr original;
  {
    fb_waveform* raw = nullptr;
    CHECK_FB(fb_waveform_read_wav(flags.input.c_str(), &raw));
    original.reset(raw);
  }
  bool ok = true;
  fb_loss_kind kind = parse_loss_kind(flags.loss, &ok);
  if (!ok) {
    std::fprintf(stderr, "error: category=invalid-argument message=\"unknown loss %s\"\n",
                 flags.loss.c_str());
    return static_cast<int>(FB_ERR_INVALID_ARGUMENT);
  }
  double theta = flags.theta;
  if (std::isnan(theta)) {
    // Default to the model's own threshold; CSI losses ignore it.
    if (fb_recognizer_threshold(rec.get(), &theta) != FB_OK) theta = 0.0;
  }

  ResultPtr result;
  if (pso) {
    fb_pso_config cfg;
    fb_pso_config_defaults(&cfg);
    if (flags.epsilon >= 0.0) cfg.epsilon = flags.epsilon;
    if (flags.kappa >= 0.0) cfg.kappa = flags.kappa;
    if (flags.seed_set) cfg.seed = flags.seed;
    fb_attack_result* raw = nullptr;
    CHECK_FB(fb_pso_run(rec.get(), nullptr, original.get(), kind, flags.speaker_arg, theta, &cfg,
                        &raw));
    result.reset(raw);
  } else {
    fb_attack_config cfg;
    fb_attack_config_defaults(&cfg);
    if (flags.epsilon >= 0.0) cfg.epsilon = flags.epsilon;
    if (flags.kappa >= 0.0) cfg.kappa = flags.kappa;
    if (flags.max_iter > 0) cfg.max_iter = flags.max_iter;
    if (flags.seed_set) cfg.seed = flags.seed;
    fb_attack_result* raw = nullptr;
    CHECK_FB(fb_attack_run(rec.get(), nullptr, original.get(), kind, flags.speaker_arg, theta,
                           &cfg, &raw));
    result.reset(raw);
  }

  if (!flags.output.empty()) {
    fb_waveform* adv = nullptr;
    CHECK_FB(fb_attack_result_adversarial(result.get(), &adv));
    WaveformPtr adv_ptr(adv);
    CHECK_FB(fb_waveform_write_wav(adv, flags.output.c_str()));
  }
  double snr_db = fb_attack_result_snr_db(result.get());
  std::printf("{\"success\": %s, \"iterations\": %d, \"queries\": %" PRIu64
              ", \"snr_db\": %s}\n",
              fb_attack_result_success(result.get()) ? "true" : "false",
              fb_attack_result_iterations(result.get()), fb_attack_result_queries(result.get()),
              std::isnan(snr_db) ? "null" : std::to_string(snr_db).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FakeBob: black-box adversarial attacks on speaker recognition"};
  app.require_subcommand(1);

  std::string config, out_dir, model_path, input, output, task = "osi", mode = "s1";
  std::string records_dir, target_model;
  int trial = 0;

  auto* gen = app.add_subcommand("gen-corpus", "synthesize the configured corpus as WAV files");
  gen->add_option("--config", config)->required();
  gen->add_option("--out", out_dir)->required();

  auto* train = app.add_subcommand("train", "train the UBM from the configured corpus");
  train->add_option("--config", config)->required();
  train->add_option("--out", model_path)->required();

  auto* enroll = app.add_subcommand("enroll", "MAP-enroll the configured speaker group");
  enroll->add_option("--config", config)->required();
  enroll->add_option("--model", model_path)->required();
  std::string enroll_out;
  enroll->add_option("--out", enroll_out);

  auto* calibrate = app.add_subcommand("calibrate", "set the score threshold at the target FAR");
  calibrate->add_option("--config", config)->required();
  calibrate->add_option("--model", model_path)->required();
  std::string calibrate_out;
  calibrate->add_option("--out", calibrate_out);

  AttackFlags attack_flags;
  auto* attack = app.add_subcommand("attack", "craft one adversarial voice with NES+BIM");
  attack->add_option("--config", attack_flags.config);
  attack->add_option("--model", attack_flags.model)->required();
  attack->add_option("--input", attack_flags.input)->required();
  attack->add_option("--out", attack_flags.output);
  attack->add_option("--loss", attack_flags.loss);
  attack->add_option("--speaker", attack_flags.speaker_arg);
  attack->add_option("--theta", attack_flags.theta);
  attack->add_option("--epsilon", attack_flags.epsilon);
  attack->add_option("--kappa", attack_flags.kappa);
  attack->add_option("--max-iter", attack_flags.max_iter);
  auto* seed_opt = attack->add_option("--seed", attack_flags.seed);

  auto* pso = app.add_subcommand("pso-attack", "craft one adversarial voice with the PSO baseline");
  pso->add_option("--model", attack_flags.model)->required();
  pso->add_option("--input", attack_flags.input)->required();
  pso->add_option("--out", attack_flags.output);
  pso->add_option("--loss", attack_flags.loss);
  pso->add_option("--speaker", attack_flags.speaker_arg);
  pso->add_option("--theta", attack_flags.theta);
  pso->add_option("--epsilon", attack_flags.epsilon);
  pso->add_option("--kappa", attack_flags.kappa);
  auto* pso_seed_opt = pso->add_option("--seed", attack_flags.seed);

  std::string est_model, est_input;
  double est_epsilon = -1.0;
  auto* est = app.add_subcommand("estimate-threshold", "estimate the score threshold by querying");
  est->add_option("--model", est_model)->required();
  est->add_option("--input", est_input)->required();
  est->add_option("--epsilon", est_epsilon);

  auto* evaluate = app.add_subcommand("evaluate", "benign FAR/FRR/OSIER/accuracy of the systems");
  evaluate->add_option("--config", config)->required();

  auto* campaign = app.add_subcommand("campaign", "run the effectiveness campaign for one task");
  campaign->add_option("--config", config)->required();
  campaign->add_option("--task", task);
  campaign->add_option("--out", out_dir)->required();

  std::string sweep_axis = "epsilon";
  auto* sweep = app.add_subcommand("sweep", "epsilon or kappa sweep campaigns");
  sweep->add_option("--config", config)->required();
  sweep->add_option("--axis", sweep_axis)->check(CLI::IsMember({"epsilon", "kappa"}));
  sweep->add_option("--out", out_dir)->required();

  auto* transfer = app.add_subcommand("transfer", "re-score persisted voices on another model");
  transfer->add_option("--records", records_dir)->required();
  transfer->add_option("--model", target_model)->required();

  auto* defend = app.add_subcommand("defend", "S1/S2 defense evaluations");
  defend->add_option("--config", config)->required();
  defend->add_option("--mode", mode)->check(CLI::IsMember({"s1", "s2"}));
  defend->add_option("--out", out_dir)->required();

  auto* report = app.add_subcommand("report", "recompute the report from persisted records");
  report->add_option("--records", records_dir)->required();

  auto* replay = app.add_subcommand("replay", "re-run one persisted trial and verify determinism");
  replay->add_option("--config", config)->required();
  replay->add_option("--records", records_dir)->required();
  replay->add_option("--trial", trial)->required();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    CHECK_FB(fb_generate_corpus(config.c_str(), out_dir.c_str()));
    std::printf("corpus written to %s\n", out_dir.c_str());
    return 0;
  }
  if (train->parsed()) {
    fb_recognizer* rec = nullptr;
    CHECK_FB(fb_train(config.c_str(), &rec));
    RecognizerPtr holder(rec);
    CHECK_FB(fb_recognizer_save(rec, model_path.c_str()));
    std::printf("UBM model written to %s\n", model_path.c_str());
    return 0;
  }
  if (enroll->parsed()) {
    fb_recognizer* rec = nullptr;
    CHECK_FB(fb_recognizer_load(model_path.c_str(), &rec));
    RecognizerPtr holder(rec);
    CHECK_FB(fb_enroll(config.c_str(), rec));
    const std::string& out = enroll_out.empty() ? model_path : enroll_out;
    CHECK_FB(fb_recognizer_save(rec, out.c_str()));
    int n = 0;
    CHECK_FB(fb_recognizer_num_speakers(rec, &n));
    std::printf("enrolled %d speakers -> %s\n", n, out.c_str());
    return 0;
  }
  if (calibrate->parsed()) {
    fb_recognizer* rec = nullptr;
    CHECK_FB(fb_recognizer_load(model_path.c_str(), &rec));
    RecognizerPtr holder(rec);
    CHECK_FB(fb_calibrate(config.c_str(), rec));
    const std::string& out = calibrate_out.empty() ? model_path : calibrate_out;
    CHECK_FB(fb_recognizer_save(rec, out.c_str()));
    double theta = 0.0;
    CHECK_FB(fb_recognizer_threshold(rec, &theta));
    std::printf("threshold %.6f -> %s\n", theta, out.c_str());
    return 0;
  }
  if (attack->parsed()) {
    attack_flags.seed_set = seed_opt->count() > 0;
    return run_single_attack(attack_flags, /*pso=*/false);
  }
  if (pso->parsed()) {
    attack_flags.seed_set = pso_seed_opt->count() > 0;
    return run_single_attack(attack_flags, /*pso=*/true);
  }
  if (est->parsed()) {
    fb_recognizer* rec = nullptr;
    CHECK_FB(fb_recognizer_load(est_model.c_str(), &rec));
    RecognizerPtr holder(rec);
    fb_waveform* seed_voice = nullptr;
    CHECK_FB(fb_waveform_read_wav(est_input.c_str(), &seed_voice));
    WaveformPtr seed_holder(seed_voice);
    fb_attack_config cfg;
    fb_attack_config_defaults(&cfg);
    if (est_epsilon >= 0.0) cfg.epsilon = est_epsilon;
    double theta_hat = 0.0;
    uint64_t queries = 0;
    CHECK_FB(fb_estimate_threshold(rec, nullptr, seed_voice, &cfg, &theta_hat, &queries, nullptr));
    std::printf("{\"theta_hat\": %.9g, \"queries\": %" PRIu64 "}\n", theta_hat, queries);
    return 0;
  }
  if (evaluate->parsed()) {
    char* json = nullptr;
    CHECK_FB(fb_evaluate(config.c_str(), &json));
    print_json(json);
    return 0;
  }
  if (campaign->parsed()) {
    char* json = nullptr;
    CHECK_FB(fb_campaign_effectiveness(config.c_str(), task.c_str(), out_dir.c_str(), &json));
    print_json(json);
    return 0;
  }
  if (sweep->parsed()) {
    char* json = nullptr;
    if (sweep_axis == "kappa")
      CHECK_FB(fb_campaign_kappa_sweep(config.c_str(), out_dir.c_str(), &json));
    else
      CHECK_FB(fb_campaign_epsilon_sweep(config.c_str(), out_dir.c_str(), &json));
    print_json(json);
    return 0;
  }
  if (transfer->parsed()) {
    char* json = nullptr;
    CHECK_FB(fb_transfer_evaluate(records_dir.c_str(), target_model.c_str(), &json));
    print_json(json);
    return 0;
  }
  if (defend->parsed()) {
    char* json = nullptr;
    CHECK_FB(fb_campaign_defense(config.c_str(), mode.c_str(), out_dir.c_str(), &json));
    print_json(json);
    return 0;
  }
  if (report->parsed()) {
    char* json = nullptr;
    CHECK_FB(fb_report(records_dir.c_str(), &json));
    print_json(json);
    return 0;
  }
  if (replay->parsed()) {
    int match = 0;
    CHECK_FB(fb_replay_trial(config.c_str(), records_dir.c_str(), trial, &match));
    std::printf("{\"trial\": %d, \"match\": %s}\n", trial, match ? "true" : "false");
    return match ? 0 : 1;
  }
  return 0;
}
