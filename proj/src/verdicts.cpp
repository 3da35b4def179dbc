#include "localbn/verdicts.hpp"

#include <algorithm>

#include "localbn/errors.hpp"
#include "localbn/util.hpp"

namespace localbn {

std::string to_string(TopologyPattern p) {
    switch (p) {
        case TopologyPattern::CommonEffect: return "common_effect";
        case TopologyPattern::CommonCause: return "common_cause";
        case TopologyPattern::Mixed: return "mixed";
        case TopologyPattern::Isolated: return "isolated";
    }
    return "isolated";
}

std::string to_string(Rule r) {
    switch (r) {
        case Rule::R1HighConfidence: return "R1_high_confidence";
        case Rule::R2Unreliable: return "R2_unreliable";
        case Rule::R3Contrast: return "R3_contrast";
        case Rule::R4Uncertain: return "R4_uncertain";
    }
    return "R4_uncertain";
}

ClassTopology classify_topology(const Dag& dag, const std::string& class_var) {
    const int c = dag.require_index(class_var);
    ClassTopology t;
    t.in_degree = static_cast<int>(dag.parents(c).size());
    t.out_degree = static_cast<int>(dag.children(c).size());
    if (t.in_degree == 0 && t.out_degree == 0) {
        t.pattern = TopologyPattern::Isolated;
    } else if (t.in_degree >= 1 && t.out_degree == 0) {
        t.pattern = TopologyPattern::CommonEffect;
    } else if (t.out_degree >= 1 && t.in_degree == 0) {
        t.pattern = TopologyPattern::CommonCause;
    } else {
        t.pattern = TopologyPattern::Mixed;
    }
    return t;
}

RuleVerdict classify_rule(const Dag& dag, const std::string& class_var,
                          const ClassDistribution& class_marginal,
                          const std::string& predicted_label, double tau) {
    if (!(tau > 0.5 && tau <= 1.0)) {
        throw ValidationError("tau must be in (0.5, 1], got " + format_double(tau));
    }
    const double p_predicted = class_marginal.probability_of(predicted_label);

    RuleVerdict verdict;
    verdict.predicted_label = predicted_label;
    verdict.surrogate_argmax = class_marginal.argmax_label();
    verdict.surrogate_posterior = class_marginal;
    verdict.threshold_used = tau;
    verdict.topology = classify_topology(dag, class_var);

    if (verdict.topology.pattern == TopologyPattern::Isolated) {
        verdict.rule = Rule::R2Unreliable;
        return verdict;
    }
    const double p_max =
        *std::max_element(class_marginal.probabilities.begin(), class_marginal.probabilities.end());
    if (p_predicted != p_max) {  // a tie with the mode counts as agreement
        verdict.rule = Rule::R3Contrast;
        return verdict;
    }
    verdict.rule = p_predicted >= tau ? Rule::R1HighConfidence : Rule::R4Uncertain;
    return verdict;
}

}  // namespace localbn
