#include "exactml/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>

#include "exactml/cnf.hpp"
#include "exactml/counter.hpp"
#include "exactml/error.hpp"
#include "exactml/metrics.hpp"
#include "exactml/oracle.hpp"
#include "json_util.hpp"

namespace exactml::cli {

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) { return detail::parse_json(read_file(path), path.c_str()); }

void write_output(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw InputError("cannot write file '" + cfg.out + "'");
  f << text;
}

int graph_nodes(const std::string& spec) {
  if (spec.size() <= 5 || spec.compare(0, 5, "graph") != 0) return 0;
  int n = 0;
  for (char ch : spec.substr(5)) {
    if (ch < '0' || ch > '9') return 0;
    n = n * 10 + (ch - '0');
    if (n > 64) return 0;
  }
  return n;
}

InputDomain resolve_domain(RunConfig& cfg) {
  if (cfg.domain.empty()) {
    if (cfg.nodes > 0) return InputDomain::graph(cfg.nodes);
    throw InputError("missing --domain");
  }
  if (const int n = graph_nodes(cfg.domain); n > 0 && !std::filesystem::exists(cfg.domain)) {
    if (cfg.nodes == 0) cfg.nodes = n;
    if (cfg.nodes != n) throw InputError("--nodes does not match --domain " + cfg.domain);
    return InputDomain::graph(n);
  }
  return load_domain(read_json(cfg.domain));
}

Model resolve_model(const RunConfig& cfg, const InputDomain& domain) {
  if (cfg.model.empty()) throw InputError("missing --model");
  return load_model(read_json(cfg.model), domain);
}

// Builtin graph property names resolve against graph(nodes); anything else is
// read as a truth document.
std::vector<Predicate> resolve_truth(const RunConfig& cfg, const InputDomain& domain) {
  if (cfg.property.empty()) throw InputError("missing --property");
  if (!std::filesystem::exists(cfg.property)) {
    const GraphProperty p = parse_graph_property(cfg.property);
    int nodes = cfg.nodes;
    if (nodes == 0) nodes = static_cast<int>(std::lround(std::sqrt(static_cast<double>(domain.size()))));
    if (!(domain == InputDomain::graph(nodes)))
      throw InputError("builtin property '" + cfg.property + "' needs the graph" + std::to_string(nodes) +
                       " domain");
    return binary_truth(builtin_graph_property(p, nodes));
  }
  return load_truth(read_json(cfg.property), domain);
}

SafetyProperty resolve_safety(const RunConfig& cfg, const InputDomain& domain) {
  if (!cfg.property.empty()) {
    if (!cfg.pre.empty() || !cfg.post.empty()) throw InputError("give either --property or --pre/--post");
    return load_safety(read_json(cfg.property), domain);
  }
  if (cfg.post.empty()) throw InputError("missing --post");
  const Predicate pre = cfg.pre.empty() ? Predicate::truth(true) : parse_predicate(cfg.pre, domain);
  return make_safety(pre, cfg.post);
}

std::vector<std::int64_t> resolve_center(const RunConfig& cfg, const InputDomain& domain) {
  if (cfg.center.empty()) throw InputError("missing --center");
  auto center = parse_int_list(cfg.center);
  if (center.size() != domain.size())
    throw InputError("center has " + std::to_string(center.size()) + " values, domain has " +
                     std::to_string(domain.size()) + " features");
  domain.check(center);
  if (cfg.epsilon < 0) throw InputError("epsilon must be non-negative");
  return center;
}

// ---------------------------------------------------------------------------
// Counting backends

struct Backend {
  std::string name = "builtin";
  CountBackend count;  // empty for builtin
  bool approximate = false;
};

std::string run_command(const std::string& command) {
  std::FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) throw InputError("cannot run '" + command + "'");
  std::string output;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) output.append(buf, n);
  ::pclose(pipe);
  return output;
}

Backend make_backend(const RunConfig& cfg) {
  Backend b;
  if (cfg.backend == "builtin") return b;
  std::string tmpl;
  ExternalTool tool = ExternalTool::projected_exact;
  if (cfg.backend.rfind("external:", 0) == 0) {
    tmpl = cfg.backend.substr(9);
  } else if (cfg.backend.rfind("external-approx:", 0) == 0) {
    tmpl = cfg.backend.substr(16);
    tool = ExternalTool::approximate;
    b.approximate = true;
  } else {
    throw InputError("unknown backend '" + cfg.backend + "'");
  }
  if (tmpl.empty()) throw InputError("empty external counter command");
  b.name = cfg.backend;
  const DimacsDialect dialect = parse_dialect(cfg.dialect);
  b.count = [tmpl, tool, dialect](const CnfFormula& cnf) {
    char path[] = "/tmp/exactml-XXXXXX.cnf";
    const int fd = ::mkstemps(path, 4);
    if (fd < 0) throw InputError("cannot create a temporary DIMACS file");
    const std::string text = emit_dimacs(cnf, dialect);
    const bool written = ::write(fd, text.data(), text.size()) == static_cast<ssize_t>(text.size());
    ::close(fd);
    if (!written) {
      std::remove(path);
      throw InputError("cannot write a temporary DIMACS file");
    }
    std::string command = tmpl;
    if (const auto at = command.find("{file}"); at != std::string::npos) command.replace(at, 6, path);
    else command += std::string(" ") + path;
    std::string output;
    try {
      output = run_command(command);
    } catch (...) {
      std::remove(path);
      throw;
    }
    std::remove(path);
    return parse_external_count(output, tool);
  };
  return b;
}

MetricsOptions metrics_options(const RunConfig& cfg, const Backend& backend, const InputDomain& domain) {
  MetricsOptions o;
  o.counter.decision_budget = cfg.budget;
  o.backend = backend.count;
  o.threads = cfg.threads;
  o.macro_average = cfg.macro;
  if (!cfg.fix.empty()) o.fixed = parse_fixed(cfg.fix, domain);
  return o;
}

BaselineOptions baseline_options(const RunConfig& cfg) {
  BaselineOptions o;
  o.seed = cfg.seed;
  o.samples = cfg.samples;
  o.with_replacement = !cfg.without_replacement;
  return o;
}

ordered_json baseline_header(const RunConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples;
  j["with_replacement"] = !cfg.without_replacement;
  return j;
}

void annotate_backend(ordered_json& doc, const Backend& backend) {
  doc["backend"] = backend.name;
  if (backend.approximate) doc["approximate"] = true;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_learnability(RunConfig& cfg, std::ostream& out) {
  const InputDomain domain = resolve_domain(cfg);
  const Model model = resolve_model(cfg, domain);
  const auto truth = resolve_truth(cfg, domain);
  const Backend backend = make_backend(cfg);
  const auto report = learnability(model, truth, metrics_options(cfg, backend, domain));
  auto doc = report_json(report);
  annotate_backend(doc, backend);
  if (cfg.samples > 0) {
    if (!cfg.fix.empty()) throw InputError("--samples cannot be combined with --fix");
    auto baseline = baseline_header(cfg);
    for (const auto& e : baseline_learnability(model, truth, baseline_options(cfg)))
      baseline["accuracy"].push_back(estimate_json(e));
    doc["baseline"] = std::move(baseline);
  }
  write_output(cfg, render(doc), out);
  return report.complete() ? kSuccess : kBudgetExhausted;
}

int cmd_safety(RunConfig& cfg, std::ostream& out) {
  const InputDomain domain = resolve_domain(cfg);
  const Model model = resolve_model(cfg, domain);
  const SafetyProperty property = resolve_safety(cfg, domain);
  const Backend backend = make_backend(cfg);
  const auto report = safety(model, property, metrics_options(cfg, backend, domain));
  auto doc = report_json(report);
  annotate_backend(doc, backend);
  if (cfg.samples > 0) {
    if (!cfg.fix.empty()) throw InputError("--samples cannot be combined with --fix");
    auto baseline = baseline_header(cfg);
    baseline["accuracy"] = estimate_json(baseline_safety(model, property, baseline_options(cfg)));
    doc["baseline"] = std::move(baseline);
  }
  write_output(cfg, render(doc), out);
  return report.complete() ? kSuccess : kBudgetExhausted;
}

int cmd_robustness(RunConfig& cfg, std::ostream& out) {
  const InputDomain domain = resolve_domain(cfg);
  const Model model = resolve_model(cfg, domain);
  const auto center = resolve_center(cfg, domain);
  if (!cfg.fix.empty()) throw InputError("--fix is not supported for robustness");
  const Backend backend = make_backend(cfg);
  const auto report = robustness(model, center, cfg.epsilon, metrics_options(cfg, backend, domain));
  auto doc = report_json(report);
  annotate_backend(doc, backend);
  if (cfg.samples > 0) {
    auto baseline = baseline_header(cfg);
    const auto region = make_region(center, cfg.epsilon, domain);
    baseline["robustness"] = estimate_json(baseline_robustness(model, region, baseline_options(cfg)));
    doc["baseline"] = std::move(baseline);
  }
  write_output(cfg, render(doc), out);
  return report.complete() ? kSuccess : kBudgetExhausted;
}

MetricKind parse_kind(const std::string& name) {
  for (MetricKind k : kAllMetricKinds)
    if (metric_name(k) == name) return k;
  throw InputError("unknown metric kind '" + name + "' (expected tp, fp, tn or fn)");
}

// Circuit whose output "root" is the formula selected by --mode/--kind/--label.
Circuit build_emit_circuit(RunConfig& cfg) {
  const InputDomain domain = resolve_domain(cfg);
  if (cfg.mode == "truth") {
    const auto truth = resolve_truth(cfg, domain);
    if (cfg.label < 0 || static_cast<std::size_t>(cfg.label) >= truth.size())
      throw InputError("label " + std::to_string(cfg.label) + " out of range");
    Circuit c(domain);
    c.set_output("root", compile_predicate(c, truth[static_cast<std::size_t>(cfg.label)]));
    return c;
  }
  const Model model = resolve_model(cfg, domain);
  Circuit c = compile_model(model);
  if (cfg.mode == "learnability") {
    const auto truth = resolve_truth(cfg, domain);
    if (cfg.label < 0 || cfg.label >= num_labels(model))
      throw InputError("label " + std::to_string(cfg.label) + " out of range");
    if (truth.size() != static_cast<std::size_t>(num_labels(model)))
      throw InputError("truth predicate count does not match the model's labels");
    compile_truth_into(c, truth);
    c.set_output("root", compose_metric(c, cfg.label, parse_kind(cfg.kind.empty() ? "tp" : cfg.kind)));
  } else if (cfg.mode == "safety") {
    const SafetyProperty property = resolve_safety(cfg, domain);
    const Wire pre = compile_predicate(c, property.pre);
    std::vector<Wire> outs;
    for (ClassLabel l : property.allowed(num_labels(model))) outs.push_back(c.output(model_output(l)));
    const Wire post = c.make_or(outs);
    const std::string kind = cfg.kind.empty() ? "viol" : cfg.kind;
    if (kind == "sat") c.set_output("root", c.make_and(pre, post));
    else if (kind == "viol") c.set_output("root", c.make_and(pre, c.make_not(post)));
    else if (kind == "pre") c.set_output("root", pre);
    else throw InputError("unknown safety kind '" + kind + "' (expected sat, viol or pre)");
  } else if (cfg.mode == "robustness") {
    const auto center = resolve_center(cfg, domain);
    const auto region = make_region(center, cfg.epsilon, domain);
    const Wire target = c.output(model_output(evaluate(model, center)));
    c.set_output("root", constrain_region(c, target, region));
  } else {
    throw InputError("unknown mode '" + cfg.mode + "'");
  }
  return c;
}

int cmd_emit(RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const DimacsDialect dialect = parse_dialect(cfg.dialect);
  Circuit c = build_emit_circuit(cfg);
  if (!cfg.fix.empty()) c = partial_evaluate(c, parse_fixed(cfg.fix, c.domain()));
  const CnfFormula cnf = tseitin(c, c.output("root"));
  write_output(cfg, emit_dimacs(cnf, dialect), out);
  (cfg.out.empty() ? err : out) << "projection variables: " << cnf.projection.size() << "\n";
  return kSuccess;
}

int cmd_count(RunConfig& cfg, std::ostream& out) {
  if (cfg.cnf.empty()) throw InputError("missing DIMACS file");
  const CnfFormula cnf = parse_dimacs(read_file(cfg.cnf));
  const Backend backend = make_backend(cfg);
  CounterOptions options;
  options.decision_budget = cfg.budget;
  const CountResult r = backend.count ? backend.count(cnf) : count_projected(cnf, options);
  if (!r.exact()) {
    write_output(cfg, "s mc unknown\n", out);
    return kBudgetExhausted;
  }
  write_output(cfg, "s mc " + to_string(r.count) + "\n", out);
  return kSuccess;
}

// Flattens the counts of any report document to oracle keys.
std::map<std::string, std::string> report_counts(const nlohmann::json& doc) {
  std::map<std::string, std::string> out;
  auto put = [&](const std::string& key, const nlohmann::json& v) { out[key] = v.is_string() ? v.get<std::string>() : v.dump(); };
  const std::string kind = doc.value("kind", "");
  if (doc.contains("domain_size")) put("domain_size", doc["domain_size"]);
  if (kind == "oracle") {
    for (const auto& [k, v] : doc.at("counts").items()) put(k, v);
  } else if (kind == "learnability") {
    for (const auto& l : doc.at("labels")) {
      const int label = l.at("label").get<int>();
      for (MetricKind k : kAllMetricKinds) put(count_key(label, k), l.at("counts").at(std::string(metric_name(k))));
    }
  } else if (kind == "safety") {
    put("sat", doc.at("sat_count"));
    put("viol", doc.at("viol_count"));
    put("pre", doc.at("pre_size"));
  } else if (kind == "robustness") {
    put("correct", doc.at("correct_count"));
    put("region", doc.at("region_size"));
  } else {
    throw InputError("unrecognized report kind '" + kind + "'");
  }
  return out;
}

int cmd_oracle(RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const InputDomain domain = resolve_domain(cfg);
  const Model model = resolve_model(cfg, domain);
  OracleOptions options;
  options.threads = cfg.threads;
  const InputDomain space = cfg.fix.empty() ? domain : domain.restrict(parse_fixed(cfg.fix, domain));
  OracleReport report;
  if (cfg.mode == "learnability") {
    report = brute_learnability(model, resolve_truth(cfg, domain), space, options);
  } else if (cfg.mode == "safety") {
    report = brute_safety(model, resolve_safety(cfg, domain), space, options);
  } else if (cfg.mode == "robustness") {
    if (!cfg.fix.empty()) throw InputError("--fix is not supported for robustness");
    report = brute_robustness(model, make_region(resolve_center(cfg, domain), cfg.epsilon, domain), options);
  } else {
    throw InputError("unknown mode '" + cfg.mode + "'");
  }
  const auto doc = report_json(report, cfg.mode);
  write_output(cfg, render(doc), out);
  if (cfg.diff.empty()) return kSuccess;

  const auto prior = report_counts(read_json(cfg.diff));
  // Only learnability reports carry the domain size.
  std::map<std::string, std::string> mine;
  if (cfg.mode == "learnability") mine["domain_size"] = to_string(report.domain_size);
  for (const auto& [k, v] : report.counts) mine[k] = to_string(v);
  for (const auto& [key, value] : mine) {
    const auto it = prior.find(key);
    if (it == prior.end() || it->second != value) {
      err << "oracle mismatch at " << key << ": oracle " << value << ", report "
          << (it == prior.end() ? std::string("missing") : it->second) << "\n";
      return kOracleMismatch;
    }
  }
  return kSuccess;
}

void add_inputs(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--domain", cfg.domain, "Domain document, or graph<N>");
  sub->add_option("--model", cfg.model, "Model document (decision tree or quantized network)");
  sub->add_option("--property", cfg.property, "Builtin graph property or truth/safety document");
  sub->add_option("--nodes", cfg.nodes, "Node count for builtin graph properties")->check(CLI::PositiveNumber);
  sub->add_option("--pre", cfg.pre, "Safety precondition");
  sub->add_option("--post", cfg.post, "Allowed labels (\"1,2\") or forbidden (\"!0\")");
  sub->add_option("--center", cfg.center, "Robustness center, comma separated");
  sub->add_option("--epsilon", cfg.epsilon, "Robustness radius (L-infinity)");
  sub->add_option("--fix", cfg.fix, "Hold features at values: name=value,...");
  sub->add_option("--out", cfg.out, "Output path (default: standard output)");
}

void add_counting(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--backend", cfg.backend, "builtin | external:<cmd {file}> | external-approx:<cmd {file}>");
  sub->add_option("--dialect", cfg.dialect, "Projection comment dialect for external counters: ind | pshow");
  sub->add_option("--budget", cfg.budget, "Decision budget per count")->check(CLI::PositiveNumber);
  sub->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void add_baseline(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--samples", cfg.samples, "Statistical baseline sample size");
  sub->add_option("--seed", cfg.seed, "Sampler seed");
  sub->add_flag("--without-replacement", cfg.without_replacement, "Sample distinct points");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.seed = BaselineOptions::kDefaultSeed;
  CLI::App app{"Exact learnability, safety and robustness metrics by projected model counting", "exactml"};
  app.require_subcommand(1);

  auto* learn = app.add_subcommand("learnability", "TP/FP/TN/FN counts and derived metrics per label");
  add_inputs(learn, cfg);
  add_counting(learn, cfg);
  add_baseline(learn, cfg);
  learn->add_flag("--macro", cfg.macro, "Add a macro average over labels");

  auto* safe = app.add_subcommand("safety", "Counts of inputs satisfying and violating Pre => Post");
  add_inputs(safe, cfg);
  add_counting(safe, cfg);
  add_baseline(safe, cfg);

  auto* robust = app.add_subcommand("robustness", "Fraction of an L-infinity region with the center's label");
  add_inputs(robust, cfg);
  add_counting(robust, cfg);
  add_baseline(robust, cfg);

  auto* emit = app.add_subcommand("emit", "Write one counting formula as DIMACS");
  add_inputs(emit, cfg);
  emit->add_option("--dialect", cfg.dialect, "ind | pshow");
  emit->add_option("--mode", cfg.mode, "learnability | safety | robustness | truth");
  emit->add_option("--label", cfg.label, "Label for learnability and truth formulas");
  emit->add_option("--kind", cfg.kind, "tp|fp|tn|fn (learnability) or sat|viol|pre (safety)");

  auto* oracle = app.add_subcommand("oracle", "Brute-force counts, optionally diffed against a report");
  add_inputs(oracle, cfg);
  oracle->add_option("--mode", cfg.mode, "learnability | safety | robustness");
  oracle->add_option("--diff", cfg.diff, "Report to compare against");
  oracle->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* count = app.add_subcommand("count", "Projected model count of a DIMACS file");
  count->add_option("file", cfg.cnf, "DIMACS CNF")->required();
  add_counting(count, cfg);
  count->add_option("--out", cfg.out, "Output path (default: standard output)");

  std::vector<const char*> argv{"exactml"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (learn->parsed()) return cmd_learnability(cfg, out);
    if (safe->parsed()) return cmd_safety(cfg, out);
    if (robust->parsed()) return cmd_robustness(cfg, out);
    if (emit->parsed()) return cmd_emit(cfg, out, err);
    if (oracle->parsed()) return cmd_oracle(cfg, out, err);
    if (count->parsed()) return cmd_count(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace exactml::cli
