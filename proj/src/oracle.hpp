#pragma once

#include <atomic>
#include <cstdint>

#include "defenses_spec.hpp"
#include "recognizer.hpp"

namespace fakebob {

// Black-box query contract: deterministic outcome per waveform, one counter
// tick per call. Concrete oracles must be stateless apart from the counter so
// probes may run concurrently.
class QueryOracle {
 public:
  virtual ~QueryOracle() = default;

  DecisionOutcome query(const Waveform& w) {
    count_.fetch_add(1, std::memory_order_relaxed);
    return do_query(w);
  }

  std::uint64_t queries() const { return count_.load(std::memory_order_relaxed); }

 protected:
  virtual DecisionOutcome do_query(const Waveform& w) = 0;

 private:
  std::atomic<std::uint64_t> count_{0};
};

class RecognizerOracle : public QueryOracle {
 public:
  explicit RecognizerOracle(const Recognizer& rec) : rec_(&rec) {}

 protected:
  DecisionOutcome do_query(const Waveform& w) override { return rec_->decide(w); }

 private:
  const Recognizer* rec_;
};

// Defense composed in front of the recognizer; the transform runs inside the
// query so the attacker pays for it implicitly.
class DefendedOracle : public QueryOracle {
 public:
  DefendedOracle(const DefenseSpec& defense, const Recognizer& rec)
      : defense_(defense), rec_(&rec) {}

 protected:
  DecisionOutcome do_query(const Waveform& w) override;

 private:
  DefenseSpec defense_;
  const Recognizer* rec_;
};

}  // namespace fakebob
