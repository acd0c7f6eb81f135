#pragma once

#include <string>

#include "exactml/circuit.hpp"
#include "exactml/model.hpp"
#include "exactml/predicate.hpp"

namespace exactml {

struct CompileOptions {
  // Widest two's-complement bundle the network compiler may create.
  unsigned max_width = 64;
};

std::string model_output(ClassLabel label);  // "model_<l>"
std::string truth_output(ClassLabel label);  // "truth_<l>"

// Adds one output wire model_<l> per label; exactly one is true per input.
void compile_model_into(Circuit& circuit, const Model& model, const CompileOptions& options = {});

Circuit compile_tree(const DecisionTree& tree, const InputDomain& domain);
Circuit compile_network(const QuantizedNetwork& net, const InputDomain& domain,
                        const CompileOptions& options = {});
Circuit compile_model(const Model& model, const CompileOptions& options = {});

Wire compile_predicate(Circuit& circuit, const Predicate& pred);
// Adds truth_<l> for each predicate.
void compile_truth_into(Circuit& circuit, std::span<const Predicate> truth);

enum class MetricKind { tp, fp, tn, fn };
std::string_view metric_name(MetricKind kind);  // "tp", "fp", ...
// "label_<l>.<kind>"; shared by reports and the oracle so they can be diffed.
std::string count_key(ClassLabel label, MetricKind kind);
inline constexpr MetricKind kAllMetricKinds[] = {MetricKind::tp, MetricKind::fp, MetricKind::tn,
                                                 MetricKind::fn};

// TP = truth & model, FP = !truth & model, TN = !truth & !model, FN = truth & !model.
Wire compose_metric(Circuit& circuit, ClassLabel label, MetricKind kind);

// root AND every feature inside the region's interval.
Wire constrain_region(Circuit& circuit, Wire root, const RobustnessRegion& region);

// Substitutes constants for the fixed features, folds, and keeps only gates
// reachable from the outputs. The result lives over domain().restrict(fixed).
// Arithmetic bundle records are not carried over.
Circuit partial_evaluate(const Circuit& circuit, const FixedInputs& fixed);

namespace bits {

// Smallest two's-complement width holding every value in [lo, hi].
unsigned signed_width(const BigInt& lo, const BigInt& hi);

Bundle constant(Circuit& c, const BigInt& value);
// Offset value (x - lo) of a feature as a non-negative bundle.
Bundle feature_offset(Circuit& c, std::size_t feature);
// Feature value lo + (x - lo).
Bundle feature_value(Circuit& c, std::size_t feature, unsigned max_width = 64);

Bundle resize(Circuit& c, const Bundle& a, std::size_t width);
// Drops redundant sign copies.
Bundle fit(Circuit& c, const Bundle& a);
Bundle add(Circuit& c, const Bundle& a, const Bundle& b, bool subtract, unsigned max_width);
Bundle shift_left(Circuit& c, const Bundle& a, unsigned amount, unsigned max_width);
// floor(a / 2^amount)
Bundle shift_right(Circuit& c, const Bundle& a, unsigned amount);
Bundle relu(Circuit& c, const Bundle& a);
Bundle mux(Circuit& c, Wire sel, const Bundle& when_true, const Bundle& when_false);
// Constant multiplication by shift-and-add.
Bundle multiply(Circuit& c, const Bundle& a, const BigInt& factor, unsigned max_width);

Wire signed_greater(Circuit& c, const Bundle& a, const Bundle& b);
Wire equal(Circuit& c, const Bundle& a, const Bundle& b);
// Unsigned bits <= constant (constant must be non-negative).
Wire unsigned_le_const(Circuit& c, std::span<const Wire> bits, const BigInt& constant);

}  // namespace bits

}  // namespace exactml
