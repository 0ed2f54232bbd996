#include "config.hpp"

#include <cstdlib>
#include <fstream>

#include "error.hpp"
#include "threadpool.hpp"

namespace fakebob {

using nlohmann::json;

namespace {
constexpr int kConfigVersion = 1;

template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace

json attack_config_to_json(const AttackConfig& c) {
  return json{{"epsilon", c.epsilon}, {"kappa", c.kappa},     {"m", c.m},
              {"sigma", c.sigma},     {"eta_max", c.eta_max}, {"eta_min", c.eta_min},
              {"max_iter", c.max_iter}, {"seed", c.seed}};
}

AttackConfig attack_config_from_json(const json& j) {
  AttackConfig c;
  read_into(j, "epsilon", c.epsilon);
  read_into(j, "kappa", c.kappa);
  read_into(j, "m", c.m);
  read_into(j, "sigma", c.sigma);
  read_into(j, "eta_max", c.eta_max);
  read_into(j, "eta_min", c.eta_min);
  read_into(j, "max_iter", c.max_iter);
  read_into(j, "seed", c.seed);
  validate_attack_config(c);
  return c;
}

json pso_config_to_json(const PsoConfig& c) {
  return json{{"particles", c.particles}, {"epochs", c.epochs},
              {"iters_per_epoch", c.iters_per_epoch}, {"w_init", c.w_init},
              {"w_end", c.w_end}, {"c1", c.c1}, {"c2", c.c2},
              {"epsilon", c.epsilon}, {"kappa", c.kappa}, {"seed", c.seed}};
}

PsoConfig pso_config_from_json(const json& j) {
  PsoConfig c;
  read_into(j, "particles", c.particles);
  read_into(j, "epochs", c.epochs);
  read_into(j, "iters_per_epoch", c.iters_per_epoch);
  read_into(j, "w_init", c.w_init);
  read_into(j, "w_end", c.w_end);
  read_into(j, "c1", c.c1);
  read_into(j, "c2", c.c2);
  read_into(j, "epsilon", c.epsilon);
  read_into(j, "kappa", c.kappa);
  read_into(j, "seed", c.seed);
  validate_pso_config(c);
  return c;
}

json defense_spec_to_json(const DefenseSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MedianFilterSpec>)
          return json{{"kind", "median_filter"}, {"k", s.k}};
        else if constexpr (std::is_same_v<T, AudioSqueezeSpec>)
          return json{{"kind", "audio_squeeze"}, {"tau", s.tau}};
        else
          return json{{"kind", "quantize"}, {"q", s.q}};
      },
      spec);
}

DefenseSpec defense_spec_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  DefenseSpec spec;
  if (kind == "median_filter")
    spec = MedianFilterSpec{j.value("k", 1)};
  else if (kind == "audio_squeeze")
    spec = AudioSqueezeSpec{j.value("tau", 1.0)};
  else if (kind == "quantize")
    spec = QuantizeSpec{j.value("q", 1)};
  else
    fail(ErrorCategory::parse, "unknown defense kind: " + kind);
  validate_defense_spec(spec);
  return spec;
}

namespace {

json feature_to_json(const FeatureConfig& c) {
  return json{{"frame_len_ms", c.frame_len_ms}, {"frame_step_ms", c.frame_step_ms},
              {"preemphasis", c.preemphasis},   {"n_mels", c.n_mels},
              {"n_ceps", c.n_ceps},             {"delta_window", c.delta_window},
              {"vad_energy_ratio", c.vad_energy_ratio}};
}

FeatureConfig feature_from_json(const json& j) {
  FeatureConfig c;
  read_into(j, "frame_len_ms", c.frame_len_ms);
  read_into(j, "frame_step_ms", c.frame_step_ms);
  read_into(j, "preemphasis", c.preemphasis);
  read_into(j, "n_mels", c.n_mels);
  read_into(j, "n_ceps", c.n_ceps);
  read_into(j, "delta_window", c.delta_window);
  read_into(j, "vad_energy_ratio", c.vad_energy_ratio);
  validate_feature_config(c);
  return c;
}

json corpus_to_json(const CorpusSpec& c) {
  json j{{"n_background", c.n_background}, {"n_enrolled", c.n_enrolled},
         {"n_imposters", c.n_imposters},   {"utts_background", c.utts_background},
         {"utts_enroll", c.utts_enroll},   {"utts_test", c.utts_test},
         {"duration_s", c.duration_s},     {"sample_rate", c.sample_rate}};
  if (c.wav_dir.has_value()) j["wav_dir"] = *c.wav_dir;
  return j;
}

CorpusSpec corpus_from_json(const json& j) {
  CorpusSpec c;
  read_into(j, "n_background", c.n_background);
  read_into(j, "n_enrolled", c.n_enrolled);
  read_into(j, "n_imposters", c.n_imposters);
  read_into(j, "utts_background", c.utts_background);
  read_into(j, "utts_enroll", c.utts_enroll);
  read_into(j, "utts_test", c.utts_test);
  read_into(j, "duration_s", c.duration_s);
  read_into(j, "sample_rate", c.sample_rate);
  if (j.contains("wav_dir")) c.wav_dir = j.at("wav_dir").get<std::string>();
  require(c.n_background >= 2 && c.n_enrolled >= 1 && c.n_imposters >= 1,
          ErrorCategory::config, "corpus spec: speaker counts too small");
  require(c.utts_background >= 1 && c.utts_enroll >= 1 && c.utts_test >= 1,
          ErrorCategory::config, "corpus spec: utterance counts must be positive");
  return c;
}

json recognizer_to_json(const RecognizerSpec& c) {
  return json{{"task", c.task}, {"components", c.components}, {"em_iters", c.em_iters},
              {"relevance", c.relevance}, {"target_far", c.target_far}};
}

RecognizerSpec recognizer_from_json(const json& j) {
  RecognizerSpec c;
  read_into(j, "task", c.task);
  read_into(j, "components", c.components);
  read_into(j, "em_iters", c.em_iters);
  read_into(j, "relevance", c.relevance);
  read_into(j, "target_far", c.target_far);
  task_from_name(c.task);  // validates
  require(c.components >= 1 && c.em_iters >= 1, ErrorCategory::config,
          "recognizer spec: components and em_iters must be positive");
  require(c.relevance > 0.0, ErrorCategory::config, "recognizer spec: relevance must be > 0");
  require(c.target_far >= 0.0 && c.target_far < 1.0, ErrorCategory::config,
          "recognizer spec: target_far must be in [0, 1)");
  return c;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  int version = j.value("config_version", -1);
  require(version == kConfigVersion, ErrorCategory::config,
          "unsupported config_version " + std::to_string(version));
  require(j.contains("master_seed"), ErrorCategory::config,
          "config requires an explicit master_seed");
  ExperimentConfig cfg;
  cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("corpus")) cfg.corpus = corpus_from_json(j.at("corpus"));
  if (j.contains("recognizer")) cfg.recognizer = recognizer_from_json(j.at("recognizer"));
  if (j.contains("feature")) cfg.feature = feature_from_json(j.at("feature"));
  if (j.contains("attack")) cfg.attack = attack_config_from_json(j.at("attack"));
  if (j.contains("pso")) cfg.pso = pso_config_from_json(j.at("pso"));
  if (j.contains("defense") && !j.at("defense").is_null())
    cfg.defense = defense_spec_from_json(j.at("defense"));
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (s.contains("epsilons")) cfg.sweep_epsilons = s.at("epsilons").get<std::vector<double>>();
    if (s.contains("kappas")) cfg.sweep_kappas = s.at("kappas").get<std::vector<double>>();
  }
  read_into(j, "transfer_components", cfg.transfer_components);
  read_into(j, "trials", cfg.trials);
  read_into(j, "parallelism", cfg.parallelism);
  read_into(j, "output_dir", cfg.output_dir);
  require(cfg.trials >= 1, ErrorCategory::config, "config: trials must be >= 1");
  apply_env_overrides(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::config, "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCategory::config, std::string("config is not valid JSON: ") + e.what());
  }
  return experiment_config_from_json(j);
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["config_version"] = kConfigVersion;
  j["master_seed"] = cfg.master_seed;
  j["corpus"] = corpus_to_json(cfg.corpus);
  j["recognizer"] = recognizer_to_json(cfg.recognizer);
  j["feature"] = feature_to_json(cfg.feature);
  j["attack"] = attack_config_to_json(cfg.attack);
  j["pso"] = pso_config_to_json(cfg.pso);
  if (cfg.defense.has_value()) j["defense"] = defense_spec_to_json(*cfg.defense);
  j["sweep"] = json{{"epsilons", cfg.sweep_epsilons}, {"kappas", cfg.sweep_kappas}};
  j["transfer_components"] = cfg.transfer_components;
  j["trials"] = cfg.trials;
  j["parallelism"] = cfg.parallelism;
  j["output_dir"] = cfg.output_dir;
  return j;
}

void apply_env_overrides(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("FAKEBOB_OUT_DIR")) cfg.output_dir = dir;
  if (const char* par = std::getenv("FAKEBOB_PARALLELISM")) {
    char* end = nullptr;
    long v = std::strtol(par, &end, 10);
    require(end != par && v >= 0, ErrorCategory::config,
            "FAKEBOB_PARALLELISM must be a non-negative integer");
    cfg.parallelism = static_cast<int>(v);
  }
}

int effective_parallelism(const ExperimentConfig& cfg) {
  return cfg.parallelism > 0 ? cfg.parallelism : hardware_parallelism();
}

}  // namespace fakebob
