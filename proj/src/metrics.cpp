#include "exactml/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "exactml/cnf.hpp"
#include "exactml/error.hpp"
#include "random.hpp"

namespace exactml {

std::string to_decimal(const Rational& q, unsigned places) {
  Rational a = abs(q);
  BigInt scale = 1;
  for (unsigned i = 0; i < places; ++i) scale *= 10;
  BigInt scaled_num = a.get_num() * scale;
  BigInt whole, rem;
  mpz_fdiv_qr(whole.get_mpz_t(), rem.get_mpz_t(), scaled_num.get_mpz_t(), a.get_den_mpz_t());
  const int half = cmp(BigInt(rem * 2), a.get_den());
  if (half > 0 || (half == 0 && mpz_odd_p(whole.get_mpz_t()))) ++whole;

  std::string digits = whole.get_str();
  if (digits.size() <= places) digits.insert(0, places + 1 - digits.size(), '0');
  std::string out = (q < 0 && whole != 0) ? "-" : "";
  out += digits.substr(0, digits.size() - places);
  if (places > 0) out += "." + digits.substr(digits.size() - places);
  return out;
}

Ratio Ratio::of(const std::optional<BigInt>& num, const std::optional<BigInt>& den) {
  Ratio r;
  if (!num || !den) return r;
  if (*den == 0) {
    r.state = State::undefined;
    return r;
  }
  r.state = State::value;
  r.value = Rational(*num, *den);
  r.value.canonicalize();
  return r;
}

const std::optional<BigInt>& LabelMetrics::count(MetricKind kind) const {
  switch (kind) {
    case MetricKind::tp: return tp;
    case MetricKind::fp: return fp;
    case MetricKind::tn: return tn;
    case MetricKind::fn: return fn;
  }
  return tp;
}

namespace {

CountResult run_backend(const CnfFormula& cnf, const MetricsOptions& options) {
  return options.backend ? options.backend(cnf) : count_projected(cnf, options.counter);
}

// Counts every named output. Results are stored by position, so the outcome
// does not depend on thread scheduling.
std::vector<std::optional<BigInt>> count_outputs(const Circuit& circuit, const std::vector<std::string>& names,
                                                 const MetricsOptions& options) {
  std::vector<std::optional<BigInt>> results(names.size());
  auto work = [&](std::size_t i) {
    const CountResult r = count_output(circuit, names[i], options);
    if (r.exact()) results[i] = r.count;
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1u, options.threads), names.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < names.size(); ++i) work(i);
    return results;
  }
  std::vector<std::exception_ptr> errors(names.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < names.size();) {
        try {
          work(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

Circuit finish(Circuit circuit, const MetricsOptions& options) {
  if (options.fixed.empty()) return circuit;
  return partial_evaluate(circuit, options.fixed);
}

std::optional<BigInt> sum(const std::optional<BigInt>& a, const std::optional<BigInt>& b) {
  if (!a || !b) return std::nullopt;
  return BigInt(*a + *b);
}

Ratio f1_of(const Ratio& p, const Ratio& r) {
  if (p.state == Ratio::State::unknown || r.state == Ratio::State::unknown) return {};
  Ratio out;
  if (!p.known() || !r.known()) {
    out.state = Ratio::State::undefined;
    return out;
  }
  const Rational denom = p.value + r.value;
  if (denom == 0) {
    out.state = Ratio::State::undefined;
    return out;
  }
  out.state = Ratio::State::value;
  out.value = 2 * p.value * r.value / denom;
  return out;
}

Ratio mean_of(const std::vector<LabelMetrics>& labels, Ratio LabelMetrics::*field) {
  Ratio out;
  Rational total = 0;
  for (const auto& l : labels) {
    const Ratio& r = l.*field;
    if (r.state == Ratio::State::unknown) return {};
    if (r.state == Ratio::State::undefined) out.state = Ratio::State::undefined;
    else total += r.value;
  }
  if (out.state == Ratio::State::undefined || labels.empty()) {
    out.state = Ratio::State::undefined;
    return out;
  }
  out.state = Ratio::State::value;
  out.value = total / Rational(static_cast<long>(labels.size()));
  return out;
}

}  // namespace

CountResult count_output(const Circuit& circuit, const std::string& output, const MetricsOptions& options) {
  return run_backend(tseitin(circuit, circuit.output(output)), options);
}

MetricsReport learnability(const Model& model, std::span<const Predicate> truth, const MetricsOptions& options) {
  const int labels = num_labels(model);
  if (truth.size() != static_cast<std::size_t>(labels))
    throw InputError("expected " + std::to_string(labels) + " truth predicates, got " +
                     std::to_string(truth.size()));
  Circuit c = compile_model(model, options.compile);
  compile_truth_into(c, truth);
  std::vector<std::string> names;
  for (ClassLabel l = 0; l < labels; ++l)
    for (MetricKind kind : kAllMetricKinds) {
      names.push_back(count_key(l, kind));
      c.set_output(names.back(), compose_metric(c, l, kind));
    }
  const Circuit circuit = finish(std::move(c), options);
  const auto counts = count_outputs(circuit, names, options);

  MetricsReport report;
  report.domain_size = circuit.domain().cardinality();
  for (ClassLabel l = 0; l < labels; ++l) {
    LabelMetrics m;
    m.label = l;
    const std::size_t base = static_cast<std::size_t>(l) * 4;
    m.tp = counts[base + 0];
    m.fp = counts[base + 1];
    m.tn = counts[base + 2];
    m.fn = counts[base + 3];
    for (std::size_t k = 0; k < 4; ++k)
      if (!counts[base + k]) report.gaps.push_back(names[base + k]);
    m.accuracy = Ratio::of(sum(m.tp, m.tn), report.domain_size);
    m.precision = Ratio::of(m.tp, sum(m.tp, m.fp));
    m.recall = Ratio::of(m.tp, sum(m.tp, m.fn));
    m.f1 = f1_of(m.precision, m.recall);
    report.labels.push_back(std::move(m));
  }
  if (options.macro_average) {
    report.macro = MacroAverage{mean_of(report.labels, &LabelMetrics::accuracy),
                                mean_of(report.labels, &LabelMetrics::precision),
                                mean_of(report.labels, &LabelMetrics::recall),
                                mean_of(report.labels, &LabelMetrics::f1)};
  }
  return report;
}

SafetyReport safety(const Model& model, const SafetyProperty& property, const MetricsOptions& options) {
  SafetyReport report;
  report.allowed = property.allowed(num_labels(model));
  Circuit c = compile_model(model, options.compile);
  const Wire pre = compile_predicate(c, property.pre);
  std::vector<Wire> outs;
  for (ClassLabel l : report.allowed) outs.push_back(c.output(model_output(l)));
  const Wire post = c.make_or(outs);
  c.set_output("sat", c.make_and(pre, post));
  c.set_output("viol", c.make_and(pre, c.make_not(post)));
  c.set_output("pre", pre);
  const Circuit circuit = finish(std::move(c), options);
  const std::vector<std::string> names{"sat", "viol", "pre"};
  const auto counts = count_outputs(circuit, names, options);
  report.sat_count = counts[0];
  report.viol_count = counts[1];
  report.pre_size = counts[2];
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!counts[i]) report.gaps.push_back(names[i]);
  report.vacuous = report.pre_size && *report.pre_size == 0;
  report.accuracy = Ratio::of(report.sat_count, sum(report.sat_count, report.viol_count));
  return report;
}

RobustnessReport robustness(const Model& model, std::span<const std::int64_t> center, std::int64_t epsilon,
                            const MetricsOptions& options) {
  if (!options.fixed.empty()) throw InputError("fixed inputs are not supported for robustness");
  const InputDomain& domain = model_domain(model);
  domain.check(center);
  RobustnessReport report;
  report.center.assign(center.begin(), center.end());
  report.epsilon = epsilon;
  const RobustnessRegion region = make_region(center, epsilon, domain);
  report.region_size = region.size;
  report.target_label = evaluate(model, center);

  Circuit c = compile_model(model, options.compile);
  c.set_output("correct", constrain_region(c, c.output(model_output(report.target_label)), region));
  const auto counts = count_outputs(c, {"correct"}, options);
  report.correct_count = counts[0];
  if (!counts[0]) report.gaps.push_back("correct");
  report.robustness = Ratio::of(report.correct_count, report.region_size);
  return report;
}

// ---------------------------------------------------------------------------
// Statistical baseline

std::vector<std::vector<std::int64_t>> sample_points(const InputDomain& space, const BaselineOptions& options) {
  std::vector<std::vector<std::int64_t>> points;
  const BigInt card = space.cardinality();
  if (!options.with_replacement && card <= BigInt(static_cast<unsigned long>(options.samples))) {
    for (DomainCursor cur(space); !cur.done(); cur.next()) points.push_back(cur.value());
    return points;
  }
  detail::Rng rng(options.seed);
  auto draw = [&] {
    std::vector<std::int64_t> x(space.size());
    for (std::size_t f = 0; f < space.size(); ++f) {
      const auto& spec = space.feature(f);
      x[f] = spec.lo + static_cast<std::int64_t>(
                           rng.below(static_cast<std::uint64_t>(spec.hi) - static_cast<std::uint64_t>(spec.lo) + 1));
    }
    return x;
  };
  if (options.with_replacement) {
    for (std::uint64_t i = 0; i < options.samples; ++i) points.push_back(draw());
    return points;
  }
  std::set<std::vector<std::int64_t>> seen;
  while (points.size() < options.samples) {
    auto x = draw();
    if (seen.insert(x).second) points.push_back(std::move(x));
  }
  return points;
}

std::vector<Estimate> baseline_learnability(const Model& model, std::span<const Predicate> truth,
                                            const BaselineOptions& options) {
  const int labels = num_labels(model);
  if (truth.size() != static_cast<std::size_t>(labels)) throw InputError("truth predicate count mismatch");
  std::vector<Estimate> out(static_cast<std::size_t>(labels));
  for (const auto& x : sample_points(model_domain(model), options)) {
    const ClassLabel y = evaluate(model, x);
    for (ClassLabel l = 0; l < labels; ++l) {
      auto& e = out[static_cast<std::size_t>(l)];
      ++e.drawn;
      ++e.eligible;
      if ((y == l) == truth[static_cast<std::size_t>(l)].eval(x)) ++e.hits;
    }
  }
  for (auto& e : out)
    e.value = Ratio::of(BigInt(static_cast<unsigned long>(e.hits)), BigInt(static_cast<unsigned long>(e.eligible)));
  return out;
}

Estimate baseline_safety(const Model& model, const SafetyProperty& property, const BaselineOptions& options) {
  const auto allowed = property.allowed(num_labels(model));
  Estimate e;
  for (const auto& x : sample_points(model_domain(model), options)) {
    ++e.drawn;
    if (!property.pre.eval(x)) continue;
    ++e.eligible;
    if (std::binary_search(allowed.begin(), allowed.end(), evaluate(model, x))) ++e.hits;
  }
  e.value = Ratio::of(BigInt(static_cast<unsigned long>(e.hits)), BigInt(static_cast<unsigned long>(e.eligible)));
  return e;
}

Estimate baseline_robustness(const Model& model, const RobustnessRegion& region, const BaselineOptions& options) {
  const InputDomain& domain = model_domain(model);
  const ClassLabel target = evaluate(model, region.center);
  Estimate e;
  for (const auto& x : sample_points(region.as_domain(domain), options)) {
    ++e.drawn;
    ++e.eligible;
    if (evaluate(model, x) == target) ++e.hits;
  }
  e.value = Ratio::of(BigInt(static_cast<unsigned long>(e.hits)), BigInt(static_cast<unsigned long>(e.eligible)));
  return e;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::ordered_json count_json(const std::optional<BigInt>& v) {
  return v ? nlohmann::ordered_json(to_string(*v)) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json header(const char* kind) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["kind"] = kind;
  return doc;
}

}  // namespace

nlohmann::ordered_json ratio_json(const Ratio& r) {
  switch (r.state) {
    case Ratio::State::unknown: return nullptr;
    case Ratio::State::undefined: return "undefined";
    case Ratio::State::value: break;
  }
  nlohmann::ordered_json j;
  j["fraction"] = r.value.get_num().get_str() + "/" + r.value.get_den().get_str();
  j["decimal"] = to_decimal(r.value);
  return j;
}

nlohmann::ordered_json report_json(const MetricsReport& report) {
  auto doc = header("learnability");
  doc["domain_size"] = to_string(report.domain_size);
  doc["complete"] = report.complete();
  doc["gaps"] = report.gaps;
  auto& labels = doc["labels"] = nlohmann::ordered_json::array();
  for (const auto& m : report.labels) {
    nlohmann::ordered_json l;
    l["label"] = m.label;
    for (MetricKind kind : kAllMetricKinds) l["counts"][std::string(metric_name(kind))] = count_json(m.count(kind));
    l["accuracy"] = ratio_json(m.accuracy);
    l["precision"] = ratio_json(m.precision);
    l["recall"] = ratio_json(m.recall);
    l["f1"] = ratio_json(m.f1);
    labels.push_back(std::move(l));
  }
  if (report.macro) {
    auto& macro = doc["macro_average"];
    macro["accuracy"] = ratio_json(report.macro->accuracy);
    macro["precision"] = ratio_json(report.macro->precision);
    macro["recall"] = ratio_json(report.macro->recall);
    macro["f1"] = ratio_json(report.macro->f1);
  }
  return doc;
}

nlohmann::ordered_json report_json(const SafetyReport& report) {
  auto doc = header("safety");
  doc["complete"] = report.complete();
  doc["gaps"] = report.gaps;
  doc["allowed_labels"] = report.allowed;
  doc["pre_size"] = count_json(report.pre_size);
  doc["sat_count"] = count_json(report.sat_count);
  doc["viol_count"] = count_json(report.viol_count);
  doc["vacuous"] = report.vacuous;
  doc["accuracy"] = report.vacuous ? nlohmann::ordered_json("vacuous property") : ratio_json(report.accuracy);
  return doc;
}

nlohmann::ordered_json report_json(const RobustnessReport& report) {
  auto doc = header("robustness");
  doc["complete"] = report.complete();
  doc["gaps"] = report.gaps;
  doc["center"] = report.center;
  doc["epsilon"] = report.epsilon;
  doc["target_label"] = report.target_label;
  doc["region_size"] = to_string(report.region_size);
  doc["correct_count"] = count_json(report.correct_count);
  doc["robustness"] = ratio_json(report.robustness);
  return doc;
}

nlohmann::ordered_json estimate_json(const Estimate& e) {
  nlohmann::ordered_json j;
  j["drawn"] = e.drawn;
  j["eligible"] = e.eligible;
  j["hits"] = e.hits;
  j["estimate"] = ratio_json(e.value);
  return j;
}

std::string render(const nlohmann::ordered_json& document) { return document.dump(2) + "\n"; }

}  // namespace exactml
