#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "exactml/bigint.hpp"
#include "exactml/compile.hpp"
#include "exactml/counter.hpp"
#include "exactml/model.hpp"
#include "exactml/predicate.hpp"

namespace exactml {

// Counts one formula. The default is count_projected with the configured budget.
using CountBackend = std::function<CountResult(const CnfFormula&)>;

struct MetricsOptions {
  CompileOptions compile;
  CounterOptions counter;
  CountBackend backend;  // overrides `counter` when set
  // Features held at a concrete value; counts are over domain().restrict(fixed).
  FixedInputs fixed;
  unsigned threads = 1;
  bool macro_average = false;
};

// A derived ratio: known, undefined by a zero denominator, or unknown because
// a count it depends on was not obtained.
struct Ratio {
  enum class State { value, undefined, unknown };
  State state = State::unknown;
  Rational value;

  static Ratio of(const std::optional<BigInt>& num, const std::optional<BigInt>& den);
  bool known() const { return state == State::value; }
};

struct LabelMetrics {
  ClassLabel label = 0;
  std::optional<BigInt> tp, fp, tn, fn;  // empty when the budget ran out
  Ratio accuracy, precision, recall, f1;

  const std::optional<BigInt>& count(MetricKind kind) const;
};

struct MacroAverage {
  Ratio accuracy, precision, recall, f1;
};

struct MetricsReport {
  BigInt domain_size;
  std::vector<LabelMetrics> labels;
  std::optional<MacroAverage> macro;
  std::vector<std::string> gaps;  // count keys that could not be obtained

  bool complete() const { return gaps.empty(); }
};

struct SafetyReport {
  std::vector<ClassLabel> allowed;
  std::optional<BigInt> sat_count, viol_count, pre_size;
  Ratio accuracy;
  bool vacuous = false;  // pre_size == 0
  std::vector<std::string> gaps;

  bool complete() const { return gaps.empty(); }
};

struct RobustnessReport {
  std::vector<std::int64_t> center;
  std::int64_t epsilon = 0;
  ClassLabel target_label = 0;
  BigInt region_size;
  std::optional<BigInt> correct_count;
  Ratio robustness;
  std::vector<std::string> gaps;

  bool complete() const { return gaps.empty(); }
};

MetricsReport learnability(const Model& model, std::span<const Predicate> truth,
                           const MetricsOptions& options = {});
SafetyReport safety(const Model& model, const SafetyProperty& property, const MetricsOptions& options = {});
RobustnessReport robustness(const Model& model, std::span<const std::int64_t> center, std::int64_t epsilon,
                            const MetricsOptions& options = {});

// Counts the satisfying inputs of a named circuit output via the backend.
CountResult count_output(const Circuit& circuit, const std::string& output, const MetricsOptions& options = {});

// Monte-Carlo estimates for side-by-side comparison with exact counts.
struct BaselineOptions {
  static constexpr std::uint64_t kDefaultSeed = 0x5eedc0de;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t samples = 1000;
  bool with_replacement = true;
};

struct Estimate {
  std::uint64_t drawn = 0;     // points sampled
  std::uint64_t eligible = 0;  // points the metric is defined over
  std::uint64_t hits = 0;
  Ratio value;
};

// Samples `options.samples` points of `space`. Without replacement the count
// is capped at |space|, and a sample covering the space enumerates it in order.
std::vector<std::vector<std::int64_t>> sample_points(const InputDomain& space, const BaselineOptions& options);

// Per-label accuracy estimates.
std::vector<Estimate> baseline_learnability(const Model& model, std::span<const Predicate> truth,
                                            const BaselineOptions& options);
Estimate baseline_safety(const Model& model, const SafetyProperty& property, const BaselineOptions& options);
Estimate baseline_robustness(const Model& model, const RobustnessRegion& region, const BaselineOptions& options);

// Report documents (format_version 1). Counts are decimal strings; ratios are
// {"fraction": "a/b", "decimal": "0.5000"} or "undefined"; unknown values are null.
nlohmann::ordered_json ratio_json(const Ratio& r);
nlohmann::ordered_json report_json(const MetricsReport& report);
nlohmann::ordered_json report_json(const SafetyReport& report);
nlohmann::ordered_json report_json(const RobustnessReport& report);
nlohmann::ordered_json estimate_json(const Estimate& estimate);

// Stable text form: two-space indentation and a trailing newline.
std::string render(const nlohmann::ordered_json& document);

}  // namespace exactml
