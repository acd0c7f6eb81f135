#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include <json.hpp>

#include "exactml/bigint.hpp"
#include "exactml/circuit.hpp"
#include "exactml/model.hpp"
#include "exactml/predicate.hpp"

namespace exactml {

// Brute-force enumeration used as ground truth. Models and predicates are
// evaluated directly; only brute_count_root touches a circuit, by simulation.
struct OracleOptions {
  BigInt cap = pow2(24);  // largest enumerable domain
  unsigned threads = 1;   // shards by the value of feature 0
};

struct OracleReport {
  std::map<std::string, BigInt> counts;
  BigInt domain_size;
  // Polynomial hash of the visited points in lexicographic order; identical
  // for any shard count.
  std::uint64_t fingerprint = 0;
};

// Keys count_key(l, kind). `domain` may narrow the model's domain (for
// example to a restricted one); every point must lie inside the model domain.
OracleReport brute_learnability(const Model& model, std::span<const Predicate> truth, const InputDomain& domain,
                                const OracleOptions& options = {});
// Keys "sat", "viol", "pre".
OracleReport brute_safety(const Model& model, const SafetyProperty& property, const InputDomain& domain,
                          const OracleOptions& options = {});
// Keys "correct", "region" over the points of the region.
OracleReport brute_robustness(const Model& model, const RobustnessRegion& region, const OracleOptions& options = {});

// Inputs of `domain` (a sub-box of the circuit's domain) where `root` simulates to true.
BigInt brute_count_root(const Circuit& circuit, Wire root, const InputDomain& domain,
                        const OracleOptions& options = {});
// Inputs of a predicate's domain that satisfy it.
BigInt brute_count_predicate(const Predicate& pred, const InputDomain& domain, const OracleOptions& options = {});

nlohmann::ordered_json report_json(const OracleReport& report, const std::string& mode);

}  // namespace exactml
