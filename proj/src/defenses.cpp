#include "defenses.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "threadpool.hpp"

namespace fakebob {

void validate_defense_spec(const DefenseSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MedianFilterSpec>) {
          require(s.k >= 1 && s.k % 2 == 1, ErrorCategory::invalid_argument,
                  "median filter window must be odd and positive");
        } else if constexpr (std::is_same_v<T, AudioSqueezeSpec>) {
          require(s.tau > 0.0 && s.tau <= 1.0, ErrorCategory::invalid_argument,
                  "audio squeeze ratio must be in (0, 1]");
        } else {
          require(s.q >= 1, ErrorCategory::invalid_argument,
                  "quantization factor must be >= 1");
        }
      },
      spec);
}

std::string defense_name(const DefenseSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MedianFilterSpec>)
          return "median_filter(k=" + std::to_string(s.k) + ")";
        else if constexpr (std::is_same_v<T, AudioSqueezeSpec>)
          return "audio_squeeze(tau=" + std::to_string(s.tau) + ")";
        else
          return "quantize(q=" + std::to_string(s.q) + ")";
      },
      spec);
}

Waveform median_filter(const Waveform& w, int k) {
  validate_waveform(w);
  require(k >= 1 && k % 2 == 1, ErrorCategory::invalid_argument,
          "median filter window must be odd and positive");
  if (k == 1) return w;
  const int half = k / 2;
  const int n = static_cast<int>(w.samples.size());
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(w.samples.size());
  std::vector<double> window(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    for (int j = -half; j <= half; ++j) {
      int idx = std::clamp(i + j, 0, n - 1);  // edge replication
      window[static_cast<std::size_t>(j + half)] = w.samples[static_cast<std::size_t>(idx)];
    }
    auto mid = window.begin() + half;
    std::nth_element(window.begin(), mid, window.end());
    out.samples[static_cast<std::size_t>(i)] = *mid;
  }
  return out;
}

namespace {

// Endpoint-aligned linear resample to `target_len`.
std::vector<double> linear_resample(const std::vector<double>& x, std::size_t target_len) {
  std::vector<double> y(target_len);
  if (x.size() == 1 || target_len == 1) {
    std::fill(y.begin(), y.end(), x[0]);
    return y;
  }
  double scale = static_cast<double>(x.size() - 1) / static_cast<double>(target_len - 1);
  for (std::size_t j = 0; j < target_len; ++j) {
    double pos = static_cast<double>(j) * scale;
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo >= x.size() - 1) {
      y[j] = x[x.size() - 1];
      continue;
    }
    double t = pos - static_cast<double>(lo);
    y[j] = t == 0.0 ? x[lo] : (1.0 - t) * x[lo] + t * x[lo + 1];
  }
  return y;
}

}  // namespace

Waveform audio_squeeze(const Waveform& w, double tau) {
  validate_waveform(w);
  require(tau > 0.0 && tau <= 1.0, ErrorCategory::invalid_argument,
          "audio squeeze ratio must be in (0, 1]");
  if (tau == 1.0) return w;
  std::size_t reduced = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(static_cast<double>(w.samples.size()) * tau)));
  std::vector<double> down = linear_resample(w.samples, reduced);
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples = linear_resample(down, w.samples.size());
  for (double& s : out.samples) s = std::clamp(s, -1.0, 1.0);
  return out;
}

Waveform quantize(const Waveform& w, int q) {
  validate_waveform(w);
  require(q >= 1, ErrorCategory::invalid_argument, "quantization factor must be >= 1");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    long v = std::lround(w.samples[i] * 32767.0);  // ties away from zero
    long r = std::lround(static_cast<double>(v) / q) * q;
    out.samples[i] = std::clamp(static_cast<double>(r) / 32767.0, -1.0, 1.0);
  }
  return out;
}

Waveform apply_defense(const DefenseSpec& spec, const Waveform& w) {
  validate_defense_spec(spec);
  return std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MedianFilterSpec>)
          return median_filter(w, s.k);
        else if constexpr (std::is_same_v<T, AudioSqueezeSpec>)
          return audio_squeeze(w, s.tau);
        else
          return quantize(w, s.q);
      },
      spec);
}

DecisionOutcome DefendedOracle::do_query(const Waveform& w) {
  return rec_->decide(apply_defense(defense_, w));
}

MetricsReport apply_defense_s1(const std::optional<DefenseSpec>& defense,
                               const std::vector<AdversarialVoice>& adversarial,
                               const std::vector<BenignVoice>& normal, const Recognizer& rec) {
  std::vector<LabeledOutcome> outcomes;
  outcomes.reserve(adversarial.size() + normal.size());
  auto transformed = [&](const Waveform& w) {
    return defense.has_value() ? apply_defense(*defense, w) : w;
  };
  for (const auto& a : adversarial) {
    LabeledOutcome lo;
    lo.task = rec.task();
    lo.adversarial = true;
    lo.target = a.target;
    lo.source = a.source;
    lo.outcome = rec.decide(transformed(a.wave));
    outcomes.push_back(std::move(lo));
  }
  for (const auto& b : normal) {
    LabeledOutcome lo;
    lo.task = rec.task();
    lo.adversarial = false;
    lo.true_speaker = b.true_speaker;
    lo.outcome = rec.decide(transformed(b.wave));
    outcomes.push_back(std::move(lo));
  }
  return compute_metrics(outcomes);
}

DefenseS2Report apply_defense_s2(const std::optional<DefenseSpec>& defense, const Recognizer& rec,
                                 const std::vector<AttackTrialSpec>& trials,
                                 const AttackConfig& cfg, int parallelism) {
  DefenseS2Report report;
  report.trials = static_cast<int>(trials.size());
  report.results.resize(trials.size());
  parallel_for(trials.size(), parallelism, [&](std::size_t i) {
    const auto& t = trials[i];
    AttackConfig trial_cfg = cfg;
    trial_cfg.seed = t.seed;
    if (defense.has_value()) {
      DefendedOracle oracle(*defense, rec);
      report.results[i] = run_fakebob(t.original, oracle, t.kind, t.theta_for_loss, trial_cfg);
    } else {
      RecognizerOracle oracle(rec);
      report.results[i] = run_fakebob(t.original, oracle, t.kind, t.theta_for_loss, trial_cfg);
    }
  });
  int successes = 0;
  std::vector<double> iters;
  iters.reserve(trials.size());
  for (const auto& r : report.results) {
    if (r.success) ++successes;
    iters.push_back(r.success ? static_cast<double>(r.iterations)
                              : static_cast<double>(cfg.max_iter));
  }
  if (!iters.empty()) {
    std::sort(iters.begin(), iters.end());
    std::size_t mid = iters.size() / 2;
    report.median_iterations = iters.size() % 2 == 1
                                   ? iters[mid]
                                   : 0.5 * (iters[mid - 1] + iters[mid]);
    report.asr = static_cast<double>(successes) / static_cast<double>(iters.size());
  }
  return report;
}

}  // namespace fakebob
