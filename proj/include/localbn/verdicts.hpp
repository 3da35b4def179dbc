#ifndef LOCALBN_VERDICTS_HPP
#define LOCALBN_VERDICTS_HPP

#include <string>

#include "localbn/bn.hpp"
#include "localbn/predictor.hpp"

namespace localbn {

enum class TopologyPattern { CommonEffect, CommonCause, Mixed, Isolated };

std::string to_string(TopologyPattern p);

// How the class node sits in the learned graph: edges in only (common
// effect), out only (common cause), both (mixed), or none (isolated).
struct ClassTopology {
    TopologyPattern pattern = TopologyPattern::Isolated;
    int in_degree = 0;
    int out_degree = 0;
};

ClassTopology classify_topology(const Dag& dag, const std::string& class_var);

enum class Rule { R1HighConfidence, R2Unreliable, R3Contrast, R4Uncertain };

std::string to_string(Rule r);

struct RuleVerdict {
    Rule rule = Rule::R4Uncertain;
    std::string predicted_label;         // black-box label
    std::string surrogate_argmax;        // mode of the surrogate's class marginal
    ClassDistribution surrogate_posterior;
    double threshold_used = 0.95;
    ClassTopology topology;
};

// Confidence verdict for one explained point, evaluated in order:
//   (a) class node isolated                          -> R2 (unreliable)
//   (b) surrogate argmax != predicted label          -> R3 (contrast)
//   (c) posterior[predicted] >= tau                  -> R1 (high confidence)
//   (d) otherwise                                    -> R4 (uncertain)
// Argmax ties break by label order; a tie that includes the predicted label
// counts as agreement.  Requires 0.5 < tau <= 1.
RuleVerdict classify_rule(const Dag& dag, const std::string& class_var,
                          const ClassDistribution& class_marginal,
                          const std::string& predicted_label, double tau);

}  // namespace localbn

#endif  // LOCALBN_VERDICTS_HPP
