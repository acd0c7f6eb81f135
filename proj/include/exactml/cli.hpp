#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace exactml::cli {

// Stable process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kBudgetExhausted = 2,
  kOracleMismatch = 3,
};

struct RunConfig {
  std::string subcommand;
  std::string domain;    // path, or "graph<N>"
  std::string model;     // path
  std::string property;  // builtin graph property name, or a truth/safety document path
  int nodes = 0;
  std::string pre;   // safety precondition (predicate text)
  std::string post;  // allowed labels "1,2" or forbidden "!0"
  std::string center;
  std::int64_t epsilon = 0;
  std::string backend = "builtin";  // builtin | external:<cmd {file}> | external-approx:<cmd {file}>
  std::string dialect = "ind";
  std::uint64_t budget = 0;  // decisions per count; 0 = unlimited
  std::uint64_t seed = 0x5eedc0de;  // same as BaselineOptions::kDefaultSeed
  std::uint64_t samples = 0;  // statistical baseline sample size; 0 = none
  bool without_replacement = false;
  std::string out;
  // emit / oracle
  std::string mode = "learnability";  // learnability | safety | robustness | truth
  int label = 1;
  std::string kind;
  std::string fix;   // "name=value,..."
  std::string diff;  // prior report path
  std::string cnf;   // count: DIMACS input path
  unsigned threads = 1;
  bool macro = false;
};

// Parses argv and runs one subcommand. Reports go to --out or `out`;
// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace exactml::cli
