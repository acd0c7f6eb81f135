#include "exactml/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <thread>

#include "exactml/compile.hpp"
#include "exactml/error.hpp"

namespace exactml {

namespace {

constexpr std::uint64_t kPrime = 0x100000001b3ull;

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t point_hash(std::span<const std::int64_t> x) {
  std::uint64_t h = 0;
  for (std::int64_t v : x) h = mix(h ^ static_cast<std::uint64_t>(v));
  return h;
}

std::uint64_t power(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  for (; exp != 0; exp >>= 1, base *= base)
    if (exp & 1) r *= base;
  return r;
}

struct Shard {
  std::vector<std::uint64_t> tally;
  std::uint64_t hash = 0;
  std::uint64_t length = 0;
};

void check_cap(const InputDomain& domain, const OracleOptions& options) {
  if (domain.cardinality() > options.cap) throw CapExceeded("domain too large for oracle");
}

// Contiguous slices of feature 0, so concatenating shard sequences in order
// reproduces the lexicographic order of the whole domain.
std::vector<InputDomain> shards(const InputDomain& domain, unsigned threads) {
  if (threads <= 1 || domain.size() == 0) return {domain};
  const auto& f0 = domain.feature(0);
  const auto range = static_cast<std::uint64_t>(f0.hi) - static_cast<std::uint64_t>(f0.lo) + 1;
  const std::uint64_t parts = std::min<std::uint64_t>(threads, range);
  if (parts <= 1) return {domain};
  std::vector<InputDomain> out;
  std::int64_t lo = f0.lo;
  for (std::uint64_t p = 0; p < parts; ++p) {
    const std::uint64_t len = range / parts + (p < range % parts ? 1 : 0);
    std::vector<FeatureSpec> features(domain.features().begin(), domain.features().end());
    features[0].lo = lo;
    features[0].hi = static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + len - 1);
    out.emplace_back(std::move(features));
    lo = static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + len);
  }
  return out;
}

template <class Visit>
OracleReport enumerate(const InputDomain& domain, const std::vector<std::string>& keys, const OracleOptions& options,
                       const Visit& visit) {
  check_cap(domain, options);
  const auto parts = shards(domain, options.threads);
  std::vector<Shard> results(parts.size());
  std::vector<std::exception_ptr> errors(parts.size());
  auto run = [&](std::size_t s) {
    try {
      Shard& out = results[s];
      out.tally.assign(keys.size(), 0);
      for (DomainCursor cur(parts[s]); !cur.done(); cur.next()) {
        const auto& x = cur.value();
        out.hash = out.hash * kPrime + point_hash(x);
        ++out.length;
        visit(x, out.tally);
      }
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };
  if (parts.size() == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < parts.size(); ++s) pool.emplace_back(run, s);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  OracleReport report;
  report.domain_size = domain.cardinality();
  std::vector<std::uint64_t> total(keys.size(), 0);
  for (const auto& r : results) {
    for (std::size_t k = 0; k < keys.size(); ++k) total[k] += r.tally[k];
    report.fingerprint = report.fingerprint * power(kPrime, r.length) + r.hash;
  }
  for (std::size_t k = 0; k < keys.size(); ++k) report.counts[keys[k]] = BigInt(static_cast<unsigned long>(total[k]));
  return report;
}

}  // namespace

OracleReport brute_learnability(const Model& model, std::span<const Predicate> truth, const InputDomain& domain,
                                const OracleOptions& options) {
  const int labels = num_labels(model);
  if (truth.size() != static_cast<std::size_t>(labels)) throw InputError("truth predicate count mismatch");
  std::vector<std::string> keys;
  for (ClassLabel l = 0; l < labels; ++l)
    for (MetricKind kind : kAllMetricKinds) keys.push_back(count_key(l, kind));
  return enumerate(domain, keys, options, [&](const std::vector<std::int64_t>& x, std::vector<std::uint64_t>& t) {
    const ClassLabel y = evaluate(model, x);
    for (ClassLabel l = 0; l < labels; ++l) {
      const bool psi = eval_predicate(truth[static_cast<std::size_t>(l)], domain, x);
      const bool phi = y == l;
      const std::size_t kind = psi ? (phi ? 0 : 3) : (phi ? 1 : 2);  // tp, fn, fp, tn
      ++t[static_cast<std::size_t>(l) * 4 + kind];
    }
  });
}

OracleReport brute_safety(const Model& model, const SafetyProperty& property, const InputDomain& domain,
                          const OracleOptions& options) {
  const auto allowed = property.allowed(num_labels(model));
  return enumerate(domain, {"sat", "viol", "pre"}, options,
                   [&](const std::vector<std::int64_t>& x, std::vector<std::uint64_t>& t) {
                     if (!eval_predicate(property.pre, domain, x)) return;
                     ++t[2];
                     const bool ok = std::binary_search(allowed.begin(), allowed.end(), evaluate(model, x));
                     ++t[ok ? 0 : 1];
                   });
}

OracleReport brute_robustness(const Model& model, const RobustnessRegion& region, const OracleOptions& options) {
  const InputDomain space = region.as_domain(model_domain(model));
  const ClassLabel target = evaluate(model, region.center);
  return enumerate(space, {"correct", "region"}, options,
                   [&](const std::vector<std::int64_t>& x, std::vector<std::uint64_t>& t) {
                     ++t[1];
                     if (region.contains(x) && evaluate(model, x) == target) ++t[0];
                   });
}

BigInt brute_count_predicate(const Predicate& pred, const InputDomain& domain, const OracleOptions& options) {
  const auto r = enumerate(domain, {"sat"}, options,
                           [&](const std::vector<std::int64_t>& x, std::vector<std::uint64_t>& t) {
                             t[0] += pred.eval(x) ? 1 : 0;
                           });
  return r.counts.at("sat");
}

BigInt brute_count_root(const Circuit& circuit, Wire root, const InputDomain& domain, const OracleOptions& options) {
  check_cap(domain, options);
  if (domain.size() != circuit.domain().size()) throw InputError("domain does not match the circuit");
  for (std::size_t f = 0; f < domain.size(); ++f) {
    const auto& inner = domain.feature(f);
    const auto& outer = circuit.domain().feature(f);
    if (inner.lo < outer.lo || inner.hi > outer.hi)
      throw InputError("domain is not inside the circuit domain at feature '" + inner.name + "'");
  }
  const auto parts = shards(domain, options.threads);
  std::vector<std::uint64_t> totals(parts.size(), 0);
  auto run = [&](std::size_t s) {
    std::vector<std::vector<std::int64_t>> batch;
    auto flush = [&] {
      if (batch.empty()) return;
      const auto words = circuit.pack_inputs(batch);
      const auto sim = circuit.simulate_lanes(words);
      std::uint64_t lane = sim[root.id];
      if (batch.size() < 64) lane &= (std::uint64_t{1} << batch.size()) - 1;
      totals[s] += static_cast<std::uint64_t>(std::popcount(lane));
      batch.clear();
    };
    for (DomainCursor cur(parts[s]); !cur.done(); cur.next()) {
      batch.push_back(cur.value());
      if (batch.size() == 64) flush();
    }
    flush();
  };
  if (parts.size() == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < parts.size(); ++s) pool.emplace_back(run, s);
    for (auto& t : pool) t.join();
  }
  std::uint64_t total = 0;
  for (auto v : totals) total += v;
  return BigInt(static_cast<unsigned long>(total));
}

nlohmann::ordered_json report_json(const OracleReport& report, const std::string& mode) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["kind"] = "oracle";
  doc["mode"] = mode;
  doc["domain_size"] = to_string(report.domain_size);
  auto& counts = doc["counts"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.counts) counts[key] = to_string(value);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(report.fingerprint));
  doc["fingerprint"] = hex;
  return doc;
}

}  // namespace exactml
