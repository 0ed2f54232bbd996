#include "campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "error.hpp"
#include "oracle.hpp"
#include "pso.hpp"
#include "rng.hpp"
#include "threadpool.hpp"

namespace fakebob {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Campaign salts keep per-trial seed streams disjoint across experiments.
constexpr std::uint64_t kSaltUbm = 0xA11CE;
constexpr std::uint64_t kSaltOsi = 0x051;
constexpr std::uint64_t kSaltCsi = 0xC51;
constexpr std::uint64_t kSaltSv = 0x5A;
constexpr std::uint64_t kSaltDefense = 0xDEF;

std::uint64_t task_salt(Task t) {
  switch (t) {
    case Task::osi: return kSaltOsi;
    case Task::csi: return kSaltCsi;
    case Task::sv: return kSaltSv;
  }
  return kSaltOsi;
}

FeatureMatrix pool_features(const std::vector<FeatureMatrix>& mats) {
  FeatureMatrix out;
  for (const auto& m : mats) {
    if (out.dim == 0) out.dim = m.dim;
    require(m.dim == out.dim, ErrorCategory::internal, "feature dim mismatch while pooling");
    out.data.insert(out.data.end(), m.data.begin(), m.data.end());
    out.voiced_mask.insert(out.voiced_mask.end(), m.voiced_mask.begin(), m.voiced_mask.end());
    out.num_frames += m.num_frames;
  }
  return out;
}

std::vector<LabeledUtterance> load_corpus_dir(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  require(in.good(), ErrorCategory::io, "cannot open " + dir + "/manifest.json");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCategory::parse, std::string("corpus manifest is not valid JSON: ") + e.what());
  }
  require(j.value("manifest_version", -1) == 1, ErrorCategory::parse,
          "unsupported corpus manifest version");
  std::vector<LabeledUtterance> utts;
  for (const auto& u : j.at("utterances")) {
    LabeledUtterance lu;
    lu.speaker_index = u.at("speaker_index").get<int>();
    lu.speaker_id = u.at("speaker_id").get<std::string>();
    lu.family = u.at("family").get<std::string>();
    lu.utt_index = u.at("utt_index").get<int>();
    lu.wave = read_wav_file(dir + "/" + u.at("file").get<std::string>());
    utts.push_back(std::move(lu));
  }
  return utts;
}

std::vector<LabeledUtterance> make_corpus(const ExperimentConfig& cfg) {
  if (cfg.corpus.wav_dir.has_value()) return load_corpus_dir(*cfg.corpus.wav_dir);
  SynthesisSpec spec;
  spec.n_speakers = cfg.corpus.n_background + cfg.corpus.n_enrolled + cfg.corpus.n_imposters;
  spec.utts_per_speaker =
      std::max(cfg.corpus.utts_background, cfg.corpus.utts_enroll + cfg.corpus.utts_test);
  spec.duration_s = cfg.corpus.duration_s;
  spec.sample_rate = cfg.corpus.sample_rate;
  spec.seed = cfg.master_seed;
  return generate_synthetic_corpus(spec);
}

// Single-utterance lookup without materializing the whole corpus.
Waveform source_waveform(const ExperimentConfig& cfg, int speaker_index, int utt_index) {
  if (cfg.corpus.wav_dir.has_value()) {
    auto utts = load_corpus_dir(*cfg.corpus.wav_dir);
    for (const auto& u : utts)
      if (u.speaker_index == speaker_index && u.utt_index == utt_index) return u.wave;
    fail(ErrorCategory::data, "corpus is missing speaker " + std::to_string(speaker_index) +
                                  " utterance " + std::to_string(utt_index));
  }
  return synthesize_utterance(cfg.master_seed, speaker_index, utt_index, cfg.corpus.duration_s,
                              cfg.corpus.sample_rate);
}

std::string decision_to_string(const DecisionOutcome& o) {
  switch (o.kind) {
    case DecisionKind::speaker: return "speaker";
    case DecisionKind::reject: return "reject";
    case DecisionKind::accept: return "accept";
  }
  return "reject";
}

struct TrialPlanEntry {
  int source_pos = 0;  // index into the campaign's source list
  int target_enrolled_index = 0;
  bool intra = false;
};

// Deterministic ~50/50 intra/inter grid: enumerate every (source voice,
// target) combination, split by pitch-family match, interleave.
std::vector<TrialPlanEntry> plan_trials(const std::vector<LabeledUtterance>& sources,
                                        const std::vector<std::string>& target_families,
                                        const std::vector<int>& target_corpus_index,
                                        bool skip_same_speaker, int trials) {
  std::vector<TrialPlanEntry> intra, inter;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    for (std::size_t t = 0; t < target_families.size(); ++t) {
      if (skip_same_speaker && sources[s].speaker_index == target_corpus_index[t]) continue;
      TrialPlanEntry e;
      e.source_pos = static_cast<int>(s);
      e.target_enrolled_index = static_cast<int>(t);
      e.intra = sources[s].family == target_families[t];
      (e.intra ? intra : inter).push_back(e);
    }
  }
  require(!intra.empty() || !inter.empty(), ErrorCategory::data,
          "campaign has an empty source/target grid");
  std::vector<TrialPlanEntry> plan;
  std::size_t i = 0, j = 0;
  while (static_cast<int>(plan.size()) < trials) {
    bool want_intra = plan.size() % 2 == 0;
    if (want_intra && i < intra.size())
      plan.push_back(intra[i++]);
    else if (!want_intra && j < inter.size())
      plan.push_back(inter[j++]);
    else if (i < intra.size())
      plan.push_back(intra[i++]);
    else if (j < inter.size())
      plan.push_back(inter[j++]);
    else {
      i = 0;  // grid smaller than the trial count: wrap around
      j = 0;
    }
  }
  return plan;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void aggregate_means(const std::vector<TrialRecord>& records, MetricsReport& m) {
  std::vector<double> iters, queries, snrs, times;
  for (const auto& r : records) {
    queries.push_back(static_cast<double>(r.queries));
    times.push_back(r.wall_s);
    if (r.success) {
      iters.push_back(static_cast<double>(r.iterations));
      if (!std::isnan(r.snr_db)) snrs.push_back(r.snr_db);
    }
  }
  if (!queries.empty()) m.mean_queries = mean_of(queries);
  if (!times.empty()) m.mean_time_s = mean_of(times);
  if (!iters.empty()) m.mean_iterations = mean_of(iters);
  if (!snrs.empty()) m.mean_snr_db = mean_of(snrs);
}

json cell_to_json(const MetricCell& c) {
  json j{{"num", c.num}, {"den", c.den}};
  if (c.present()) j["value"] = c.value();
  return j;
}

LossKind loss_kind_for(Task task, int target) {
  switch (task) {
    case Task::osi: return OsiTargeted{target};
    case Task::csi: return CsiTargeted{target};
    case Task::sv: return SvTargeted{};
  }
  return OsiTargeted{target};
}

LabeledOutcome labeled_outcome_for(Task task, const TrialRecord& r,
                                   const DecisionOutcome& decision) {
  LabeledOutcome lo;
  lo.task = task;
  lo.adversarial = true;
  lo.target = r.target_enrolled_index;
  if (task == Task::csi && r.source_enrolled_index >= 0) lo.source = r.source_enrolled_index;
  lo.outcome = decision;
  return lo;
}

}  // namespace

json metrics_to_json(const MetricsReport& m) {
  json j;
  j["asr"] = cell_to_json(m.asr);
  j["utr"] = cell_to_json(m.utr);
  j["far"] = cell_to_json(m.far);
  j["frr"] = cell_to_json(m.frr);
  j["osier"] = cell_to_json(m.osier);
  j["accuracy"] = cell_to_json(m.accuracy);
  if (m.mean_snr_db) j["mean_snr_db"] = *m.mean_snr_db;
  if (m.mean_iterations) j["mean_iterations"] = *m.mean_iterations;
  if (m.mean_queries) j["mean_queries"] = *m.mean_queries;
  if (m.mean_time_s) j["mean_time_s"] = *m.mean_time_s;
  return j;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t salt, std::uint64_t index) {
  return derive_seed(master_seed, salt, index);
}

const Recognizer& DeskSystem::recognizer_for(Task task, int target_enrolled_index) const {
  switch (task) {
    case Task::osi:
      require(osi.has_value(), ErrorCategory::state, "OSI recognizer not built");
      return *osi;
    case Task::csi:
      require(csi.has_value(), ErrorCategory::state, "CSI recognizer not built");
      return *csi;
    case Task::sv:
      require(target_enrolled_index >= 0 && target_enrolled_index < static_cast<int>(sv.size()),
              ErrorCategory::invalid_argument, "SV system index out of range");
      return sv[static_cast<std::size_t>(target_enrolled_index)];
  }
  fail(ErrorCategory::internal, "unreachable task");
}

DiagGmm train_ubm_from_config(const ExperimentConfig& cfg, std::vector<double>* loglike_trace) {
  std::vector<LabeledUtterance> corpus = make_corpus(cfg);
  std::vector<FeatureMatrix> bg_feats;
  for (const auto& u : corpus)
    if (u.speaker_index < cfg.corpus.n_background && u.utt_index < cfg.corpus.utts_background)
      bg_feats.push_back(extract_features(u.wave, cfg.feature));
  int K = cfg.recognizer.components;
  UbmTrainInfo info;
  DiagGmm ubm = train_ubm(bg_feats, K, cfg.recognizer.em_iters,
                          derive_seed(cfg.master_seed, kSaltUbm, static_cast<std::uint64_t>(K)),
                          &info);
  if (loglike_trace) *loglike_trace = info.loglike_trace;
  return ubm;
}

std::vector<SpeakerModel> enroll_from_config(const ExperimentConfig& cfg, const DiagGmm& ubm) {
  std::vector<LabeledUtterance> corpus = make_corpus(cfg);
  std::vector<SpeakerModel> models;
  for (int s = 0; s < cfg.corpus.n_enrolled; ++s) {
    int spk = cfg.corpus.n_background + s;
    std::vector<FeatureMatrix> mats;
    std::string speaker_id;
    for (const auto& u : corpus)
      if (u.speaker_index == spk && u.utt_index < cfg.corpus.utts_enroll) {
        mats.push_back(extract_features(u.wave, cfg.feature));
        speaker_id = u.speaker_id;
      }
    require(!mats.empty(), ErrorCategory::data,
            "no enrollment utterances for speaker " + std::to_string(spk));
    models.push_back(map_adapt(ubm, pool_features(mats), cfg.recognizer.relevance, speaker_id));
  }
  return models;
}

std::vector<Waveform> calibration_voices(const ExperimentConfig& cfg) {
  std::vector<LabeledUtterance> corpus = make_corpus(cfg);
  const auto& cs = cfg.corpus;
  std::vector<Waveform> calib;
  for (const auto& u : corpus) {
    bool imposter_spk = u.speaker_index >= cs.n_background + cs.n_enrolled &&
                        u.speaker_index < cs.n_background + cs.n_enrolled + cs.n_imposters;
    if (imposter_spk && u.utt_index < cs.utts_enroll) calib.push_back(u.wave);
  }
  return calib;
}

DeskSystem build_desk_system(const ExperimentConfig& cfg, int components_override) {
  std::vector<LabeledUtterance> corpus = make_corpus(cfg);
  const auto& cs = cfg.corpus;
  const int n_bg = cs.n_background;
  const int n_enr = cs.n_enrolled;
  const int n_imp = cs.n_imposters;

  DeskSystem sys;
  sys.feature = cfg.feature;

  std::vector<FeatureMatrix> bg_feats;
  for (const auto& u : corpus)
    if (u.speaker_index < n_bg && u.utt_index < cs.utts_background)
      bg_feats.push_back(extract_features(u.wave, cfg.feature));
  int K = components_override > 0 ? components_override : cfg.recognizer.components;
  UbmTrainInfo info;
  sys.ubm = train_ubm(bg_feats, K, cfg.recognizer.em_iters,
                      derive_seed(cfg.master_seed, kSaltUbm, static_cast<std::uint64_t>(K)), &info);
  sys.em_loglike_trace = info.loglike_trace;

  for (int s = 0; s < n_enr; ++s) {
    int spk = n_bg + s;
    std::vector<FeatureMatrix> mats;
    std::string speaker_id;
    for (const auto& u : corpus)
      if (u.speaker_index == spk && u.utt_index < cs.utts_enroll) {
        mats.push_back(extract_features(u.wave, cfg.feature));
        speaker_id = u.speaker_id;
      }
    require(!mats.empty(), ErrorCategory::data,
            "no enrollment utterances for speaker " + std::to_string(spk));
    FeatureMatrix pooled = pool_features(mats);
    sys.enrolled_models.push_back(map_adapt(sys.ubm, pooled, cfg.recognizer.relevance, speaker_id));
    sys.enrolled_corpus_index.push_back(spk);
  }

  for (const auto& u : corpus) {
    bool enrolled_spk = u.speaker_index >= n_bg && u.speaker_index < n_bg + n_enr;
    bool imposter_spk = u.speaker_index >= n_bg + n_enr && u.speaker_index < n_bg + n_enr + n_imp;
    bool test_utt = u.utt_index >= cs.utts_enroll && u.utt_index < cs.utts_enroll + cs.utts_test;
    if (enrolled_spk && test_utt) sys.enrolled_test.push_back(u);
    if (imposter_spk && u.utt_index < cs.utts_enroll) sys.imposter_calib.push_back(u);
    if (imposter_spk && test_utt) sys.imposter_eval.push_back(u);
  }

  std::vector<Waveform> calib_waves;
  for (const auto& u : sys.imposter_calib) calib_waves.push_back(u.wave);

  Recognizer osi_uncal(Task::osi, cfg.feature, sys.ubm, sys.enrolled_models, std::nullopt);
  double theta_osi = calibrate_threshold(osi_uncal, calib_waves, cfg.recognizer.target_far);
  sys.osi = osi_uncal.with_threshold(theta_osi);

  if (n_enr >= 2)
    sys.csi = Recognizer(Task::csi, cfg.feature, sys.ubm, sys.enrolled_models, std::nullopt);

  for (int s = 0; s < n_enr; ++s) {
    Recognizer sv_uncal(Task::sv, cfg.feature, sys.ubm,
                        {sys.enrolled_models[static_cast<std::size_t>(s)]}, std::nullopt);
    double theta_sv = calibrate_threshold(sv_uncal, calib_waves, cfg.recognizer.target_far);
    sys.sv.push_back(sv_uncal.with_threshold(theta_sv));
  }
  return sys;
}

CampaignOutcome run_effectiveness_campaign(const ExperimentConfig& cfg, Task task,
                                           const std::string& out_dir,
                                           const DeskSystem* prebuilt) {
  DeskSystem local;
  const DeskSystem* sys = prebuilt;
  if (!sys) {
    local = build_desk_system(cfg);
    sys = &local;
  }

  const std::vector<LabeledUtterance>& sources =
      task == Task::csi ? sys->enrolled_test : sys->imposter_eval;
  require(!sources.empty(), ErrorCategory::data, "campaign has no source voices");

  std::vector<std::string> target_families;
  for (int spk : sys->enrolled_corpus_index)
    target_families.push_back(spk % 2 == 0 ? "low" : "high");

  auto plan = plan_trials(sources, target_families, sys->enrolled_corpus_index,
                          /*skip_same_speaker=*/task == Task::csi, cfg.trials);

  if (!out_dir.empty()) fs::create_directories(out_dir);

  auto enrolled_position = [&](int corpus_index) {
    for (std::size_t i = 0; i < sys->enrolled_corpus_index.size(); ++i)
      if (sys->enrolled_corpus_index[i] == corpus_index) return static_cast<int>(i);
    return -1;
  };

  std::vector<TrialRecord> records(plan.size());
  std::vector<LabeledOutcome> outcomes(plan.size());
  const std::uint64_t salt = task_salt(task);
  parallel_for(plan.size(), effective_parallelism(cfg), [&](std::size_t i) {
    const auto& e = plan[i];
    const LabeledUtterance& source = sources[static_cast<std::size_t>(e.source_pos)];
    const Recognizer& rec = sys->recognizer_for(task, e.target_enrolled_index);
    LossKind kind = loss_kind_for(task, e.target_enrolled_index);
    double theta = rec.threshold().value_or(0.0);

    AttackConfig trial_cfg = cfg.attack;
    trial_cfg.seed = trial_seed(cfg.master_seed, salt, i);

    RecognizerOracle oracle(rec);
    auto t0 = std::chrono::steady_clock::now();
    AttackResult res = run_fakebob(source.wave, oracle, kind, theta, trial_cfg);
    auto t1 = std::chrono::steady_clock::now();

    TrialRecord r;
    r.trial = static_cast<int>(i);
    r.task = task_name(task);
    r.method = "nes";
    r.loss_kind = loss_kind_name(kind);
    r.loss_speaker_arg = loss_kind_speaker_arg(kind);
    r.scenario = e.intra ? "intra" : "inter";
    r.source_speaker_index = source.speaker_index;
    r.source_speaker_id = source.speaker_id;
    r.source_utt = source.utt_index;
    r.source_enrolled_index = enrolled_position(source.speaker_index);
    r.target_enrolled_index = e.target_enrolled_index;
    r.target_speaker_id =
        sys->enrolled_models[static_cast<std::size_t>(e.target_enrolled_index)].speaker_id;
    r.theta_for_loss = theta;
    r.attack = trial_cfg;
    r.success = res.success;
    r.iterations = res.iterations;
    r.queries = res.queries;
    r.snr_db = res.snr_db;
    r.final_loss = res.loss_trace.empty() ? 0.0 : res.loss_trace.back();
    DecisionOutcome final_decision = rec.decide(res.adversarial);
    r.decision = decision_to_string(final_decision);
    r.decision_speaker =
        final_decision.kind == DecisionKind::speaker ? final_decision.speaker_index : -1;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "trial_%05d.wav", r.trial);
    r.wav = buf;
    r.wall_s = std::chrono::duration<double>(t1 - t0).count();
    records[i] = r;
    outcomes[i] = labeled_outcome_for(task, r, final_decision);

    if (!out_dir.empty()) write_wav_file(res.adversarial, out_dir + "/" + r.wav);
  });

  CampaignOutcome out;
  out.records = std::move(records);
  out.overall = compute_metrics(outcomes);
  std::vector<LabeledOutcome> intra_outcomes, inter_outcomes;
  std::vector<TrialRecord> intra_records, inter_records;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    if (out.records[i].scenario == "intra") {
      intra_outcomes.push_back(outcomes[i]);
      intra_records.push_back(out.records[i]);
    } else {
      inter_outcomes.push_back(outcomes[i]);
      inter_records.push_back(out.records[i]);
    }
  }
  out.intra = compute_metrics(intra_outcomes);
  out.inter = compute_metrics(inter_outcomes);
  aggregate_means(out.records, out.overall);
  aggregate_means(intra_records, out.intra);
  aggregate_means(inter_records, out.inter);

  out.report = json{{"task", task_name(task)},
                    {"trials", out.records.size()},
                    {"metrics", metrics_to_json(out.overall)},
                    {"intra", metrics_to_json(out.intra)},
                    {"inter", metrics_to_json(out.inter)}};

  if (!out_dir.empty()) {
    write_records(out.records, out_dir + "/records.jsonl");
    write_summary_tsv(out.records, out_dir + "/summary.tsv");
    std::ofstream cfg_out(out_dir + "/config.json", std::ios::trunc);
    cfg_out << experiment_config_to_json(cfg).dump(2) << "\n";
    std::ofstream rep(out_dir + "/summary.json", std::ios::trunc);
    rep << out.report.dump(2) << "\n";
  }
  return out;
}

nlohmann::json run_epsilon_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  require(!cfg.sweep_epsilons.empty(), ErrorCategory::config,
          "epsilon sweep requires sweep.epsilons in the config");
  DeskSystem sys = build_desk_system(cfg);
  Task task = task_from_name(cfg.recognizer.task);
  json rows = json::array();
  for (double epsilon : cfg.sweep_epsilons) {
    ExperimentConfig step = cfg;
    step.attack.epsilon = epsilon;  // matched seeds across the sweep
    std::string dir;
    if (!out_dir.empty()) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "eps_%g", epsilon);
      dir = out_dir + "/" + buf;
    }
    CampaignOutcome res = run_effectiveness_campaign(step, task, dir, &sys);
    rows.push_back(json{{"epsilon", epsilon}, {"metrics", metrics_to_json(res.overall)}});
  }
  json table{{"sweep", "epsilon"}, {"task", cfg.recognizer.task}, {"rows", rows}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/sweep.json", std::ios::trunc);
    out << table.dump(2) << "\n";
  }
  return table;
}

MetricsReport run_transfer_evaluation(const std::vector<TrialRecord>& records,
                                      const std::string& wav_dir, const Recognizer& target) {
  require(!records.empty(), ErrorCategory::data,
          "transfer evaluation needs a non-empty record set");
  std::vector<LabeledOutcome> outcomes;
  for (const auto& r : records) {
    if (!r.success) continue;  // transfer rate is over voices that fooled the source
    Waveform adv = read_wav_file(wav_dir + "/" + r.wav);
    LabeledOutcome lo;
    lo.task = target.task();
    lo.adversarial = true;
    lo.target = r.target_enrolled_index;
    if (target.task() == Task::csi && r.source_enrolled_index >= 0)
      lo.source = r.source_enrolled_index;
    lo.outcome = target.decide(adv);
    outcomes.push_back(std::move(lo));
  }
  require(!outcomes.empty(), ErrorCategory::data,
          "transfer evaluation: no successful source voices to transfer");
  return compute_metrics(outcomes);
}

nlohmann::json run_transfer_evaluation_json(const std::string& records_dir,
                                            const Recognizer& target) {
  auto records = read_records(records_dir + "/records.jsonl");
  MetricsReport m = run_transfer_evaluation(records, records_dir, target);
  return json{{"records", records.size()}, {"metrics", metrics_to_json(m)}};
}

nlohmann::json run_kappa_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  require(!cfg.sweep_kappas.empty(), ErrorCategory::config,
          "kappa sweep requires sweep.kappas in the config");
  DeskSystem source_sys = build_desk_system(cfg);
  DeskSystem target_sys = build_desk_system(cfg, cfg.transfer_components);
  Task task = task_from_name(cfg.recognizer.task);
  require(task != Task::sv, ErrorCategory::config,
          "kappa transfer sweep is defined for OSI/CSI");

  json rows = json::array();
  for (double kappa : cfg.sweep_kappas) {
    ExperimentConfig step = cfg;
    step.attack.kappa = kappa;  // same seeds at every kappa, matched pairwise
    std::string dir;
    if (!out_dir.empty()) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "kappa_%g", kappa);
      dir = out_dir + "/" + buf;
    }
    CampaignOutcome res = run_effectiveness_campaign(step, task, dir, &source_sys);

    json row;
    row["kappa"] = kappa;
    row["source_asr"] = res.overall.asr.present() ? res.overall.asr.value() : 0.0;
    int successes = 0;
    for (const auto& r : res.records)
      if (r.success) ++successes;
    row["source_successes"] = successes;
    if (successes > 0) {
      const Recognizer& target = target_sys.recognizer_for(task, 0);
      std::vector<LabeledOutcome> outcomes;
      for (const auto& r : res.records) {
        if (!r.success) continue;
        Waveform adv = dir.empty() ? replay_trial(step, source_sys, r).adversarial
                                   : read_wav_file(dir + "/" + r.wav);
        LabeledOutcome lo;
        lo.task = task;
        lo.adversarial = true;
        lo.target = r.target_enrolled_index;
        if (task == Task::csi && r.source_enrolled_index >= 0)
          lo.source = r.source_enrolled_index;
        lo.outcome = target.decide(adv);
        outcomes.push_back(std::move(lo));
      }
      row["transfer"] = metrics_to_json(compute_metrics(outcomes));
    }
    rows.push_back(row);
  }
  json table{{"sweep", "kappa"},
             {"task", cfg.recognizer.task},
             {"source_components", cfg.recognizer.components},
             {"target_components", cfg.transfer_components},
             {"rows", rows}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/kappa_sweep.json", std::ios::trunc);
    out << table.dump(2) << "\n";
  }
  return table;
}

nlohmann::json run_benign_evaluation(const ExperimentConfig& cfg, const DeskSystem* prebuilt) {
  DeskSystem local;
  const DeskSystem* sys = prebuilt;
  if (!sys) {
    local = build_desk_system(cfg);
    sys = &local;
  }
  auto enrolled_position = [&](int corpus_index) {
    for (std::size_t i = 0; i < sys->enrolled_corpus_index.size(); ++i)
      if (sys->enrolled_corpus_index[i] == corpus_index) return static_cast<int>(i);
    return -1;
  };

  json out;
  if (sys->csi.has_value()) {
    std::vector<LabeledOutcome> csi_outcomes;
    for (const auto& u : sys->enrolled_test) {
      LabeledOutcome lo;
      lo.task = Task::csi;
      lo.true_speaker = enrolled_position(u.speaker_index);
      lo.outcome = sys->csi->decide(u.wave);
      csi_outcomes.push_back(std::move(lo));
    }
    out["csi"] = metrics_to_json(compute_metrics(csi_outcomes));
  }

  {
    std::vector<LabeledOutcome> osi_outcomes;
    for (const auto& u : sys->imposter_eval) {
      LabeledOutcome lo;
      lo.task = Task::osi;
      lo.outcome = sys->osi->decide(u.wave);
      osi_outcomes.push_back(std::move(lo));
    }
    for (const auto& u : sys->enrolled_test) {
      LabeledOutcome lo;
      lo.task = Task::osi;
      lo.true_speaker = enrolled_position(u.speaker_index);
      lo.outcome = sys->osi->decide(u.wave);
      osi_outcomes.push_back(std::move(lo));
    }
    json osi = metrics_to_json(compute_metrics(osi_outcomes));
    osi["threshold"] = sys->osi->threshold().value();
    out["osi"] = osi;
  }

  {
    std::vector<LabeledOutcome> sv_outcomes;
    for (std::size_t s = 0; s < sys->sv.size(); ++s) {
      for (const auto& u : sys->imposter_eval) {
        LabeledOutcome lo;
        lo.task = Task::sv;
        lo.outcome = sys->sv[s].decide(u.wave);
        sv_outcomes.push_back(std::move(lo));
      }
      for (const auto& u : sys->enrolled_test) {
        if (enrolled_position(u.speaker_index) != static_cast<int>(s)) continue;
        LabeledOutcome lo;
        lo.task = Task::sv;
        lo.true_speaker = 0;
        lo.outcome = sys->sv[s].decide(u.wave);
        sv_outcomes.push_back(std::move(lo));
      }
    }
    out["sv"] = metrics_to_json(compute_metrics(sv_outcomes));
  }

  out["em_loglike_trace"] = sys->em_loglike_trace;
  return out;
}

nlohmann::json report_from_records(const std::string& records_dir) {
  auto records = read_records(records_dir + "/records.jsonl");
  require(!records.empty(), ErrorCategory::data, "record log is empty");
  std::vector<LabeledOutcome> outcomes;
  for (const auto& r : records) {
    LabeledOutcome lo;
    lo.task = task_from_name(r.task);
    lo.adversarial = true;
    lo.target = r.target_enrolled_index;
    if (lo.task == Task::csi && r.source_enrolled_index >= 0)
      lo.source = r.source_enrolled_index;
    DecisionOutcome d;
    if (r.decision == "speaker") {
      d.kind = DecisionKind::speaker;
      d.speaker_index = r.decision_speaker;
    } else if (r.decision == "accept") {
      d.kind = DecisionKind::accept;
    } else {
      d.kind = DecisionKind::reject;
    }
    lo.outcome = d;
    outcomes.push_back(std::move(lo));
  }
  MetricsReport m = compute_metrics(outcomes);
  aggregate_means(records, m);
  return json{{"records", records.size()}, {"metrics", metrics_to_json(m)}};
}

void write_corpus_dir(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::vector<LabeledUtterance> corpus = make_corpus(cfg);
  fs::create_directories(out_dir);
  json manifest;
  manifest["manifest_version"] = 1;
  json utts = json::array();
  for (const auto& u : corpus) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s_utt%03d.wav", u.speaker_id.c_str(), u.utt_index);
    write_wav_file(u.wave, out_dir + "/" + buf);
    utts.push_back(json{{"file", buf},
                        {"speaker_index", u.speaker_index},
                        {"speaker_id", u.speaker_id},
                        {"family", u.family},
                        {"utt_index", u.utt_index}});
  }
  manifest["utterances"] = utts;
  std::ofstream out(out_dir + "/manifest.json", std::ios::trunc);
  require(out.good(), ErrorCategory::io, "cannot open " + out_dir + "/manifest.json");
  out << manifest.dump(2) << "\n";
  require(out.good(), ErrorCategory::io, "failed writing corpus manifest");
}

AttackResult replay_trial(const ExperimentConfig& cfg, const DeskSystem& system,
                          const TrialRecord& record) {
  Task task = task_from_name(record.task);
  const Recognizer& rec = system.recognizer_for(task, record.target_enrolled_index);
  Waveform original = source_waveform(cfg, record.source_speaker_index, record.source_utt);
  LossKind kind = make_loss_kind(record.loss_kind, record.loss_speaker_arg);
  RecognizerOracle oracle(rec);
  if (record.method == "pso") {
    PsoConfig pso = cfg.pso;
    pso.epsilon = record.attack.epsilon;
    pso.kappa = record.attack.kappa;
    pso.seed = record.attack.seed;
    return pso_attack(original, oracle, kind, record.theta_for_loss, pso);
  }
  return run_fakebob(original, oracle, kind, record.theta_for_loss, record.attack);
}

nlohmann::json run_defense_evaluation(const ExperimentConfig& cfg, const std::string& mode,
                                      const std::string& out_dir) {
  require(cfg.defense.has_value(), ErrorCategory::config,
          "defense evaluation requires a defense spec in the config");
  require(mode == "s1" || mode == "s2", ErrorCategory::invalid_argument,
          "defense mode must be s1 or s2");
  DeskSystem sys = build_desk_system(cfg);
  Task task = task_from_name(cfg.recognizer.task);
  require(task == Task::osi, ErrorCategory::config,
          "defense evaluation is defined on the OSI task");

  if (mode == "s1") {
    std::string lc_dir = out_dir.empty() ? "" : out_dir + "/s1_low_confidence";
    std::string hc_dir = out_dir.empty() ? "" : out_dir + "/s1_high_confidence";

    CampaignOutcome lc = run_effectiveness_campaign(cfg, task, lc_dir, &sys);

    ExperimentConfig hc_cfg = cfg;
    hc_cfg.attack.kappa = cfg.sweep_kappas.empty() ? 2.0 : cfg.sweep_kappas.back();
    hc_cfg.attack.epsilon = std::max(cfg.attack.epsilon, 0.05);
    CampaignOutcome hc = run_effectiveness_campaign(hc_cfg, task, hc_dir, &sys);

    auto collect = [&](const ExperimentConfig& c, const CampaignOutcome& campaign,
                       const std::string& dir) {
      std::vector<AdversarialVoice> voices;
      for (const auto& r : campaign.records) {
        if (!r.success) continue;
        AdversarialVoice v;
        v.wave = dir.empty() ? replay_trial(c, sys, r).adversarial
                             : read_wav_file(dir + "/" + r.wav);
        v.target = r.target_enrolled_index;
        voices.push_back(std::move(v));
      }
      return voices;
    };
    std::vector<AdversarialVoice> lc_voices = collect(cfg, lc, lc_dir);
    std::vector<AdversarialVoice> hc_voices = collect(hc_cfg, hc, hc_dir);

    std::vector<BenignVoice> normals;
    auto enrolled_position = [&](int corpus_index) {
      for (std::size_t i = 0; i < sys.enrolled_corpus_index.size(); ++i)
        if (sys.enrolled_corpus_index[i] == corpus_index) return static_cast<int>(i);
      return -1;
    };
    for (const auto& u : sys.enrolled_test)
      normals.push_back(BenignVoice{u.wave, enrolled_position(u.speaker_index)});

    const Recognizer& rec = *sys.osi;
    json out{{"mode", "s1"},
             {"defense", defense_spec_to_json(*cfg.defense)},
             {"low_confidence",
              {{"undefended", metrics_to_json(apply_defense_s1(std::nullopt, lc_voices, normals, rec))},
               {"defended", metrics_to_json(apply_defense_s1(cfg.defense, lc_voices, normals, rec))}}},
             {"high_confidence",
              {{"undefended", metrics_to_json(apply_defense_s1(std::nullopt, hc_voices, normals, rec))},
               {"defended", metrics_to_json(apply_defense_s1(cfg.defense, hc_voices, normals, rec))}}}};
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream f(out_dir + "/defense_s1.json", std::ios::trunc);
      f << out.dump(2) << "\n";
    }
    return out;
  }

  // S2: attack the defended pipeline on matched seeds.
  std::vector<AttackTrialSpec> trials;
  require(!sys.imposter_eval.empty(), ErrorCategory::data, "no imposter voices for S2 trials");
  for (int i = 0; i < cfg.trials; ++i) {
    const auto& src = sys.imposter_eval[static_cast<std::size_t>(i) % sys.imposter_eval.size()];
    AttackTrialSpec t;
    t.original = src.wave;
    t.kind = OsiTargeted{i % static_cast<int>(sys.enrolled_models.size())};
    t.theta_for_loss = sys.osi->threshold().value();
    t.seed = trial_seed(cfg.master_seed, kSaltDefense, static_cast<std::uint64_t>(i));
    trials.push_back(std::move(t));
  }
  DefenseS2Report undefended =
      apply_defense_s2(std::nullopt, *sys.osi, trials, cfg.attack, effective_parallelism(cfg));
  DefenseS2Report defended =
      apply_defense_s2(cfg.defense, *sys.osi, trials, cfg.attack, effective_parallelism(cfg));
  json out{{"mode", "s2"},
           {"defense", defense_spec_to_json(*cfg.defense)},
           {"trials", trials.size()},
           {"undefended",
            {{"asr", undefended.asr}, {"median_iterations", undefended.median_iterations}}},
           {"defended",
            {{"asr", defended.asr}, {"median_iterations", defended.median_iterations}}}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir + "/defense_s2.json", std::ios::trunc);
    f << out.dump(2) << "\n";
  }
  return out;
}

}  // namespace fakebob
