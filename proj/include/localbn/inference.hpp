#ifndef LOCALBN_INFERENCE_HPP
#define LOCALBN_INFERENCE_HPP

#include <map>
#include <string>
#include <vector>

#include "localbn/bn.hpp"

namespace localbn {

// Dense table over a sorted list of variable indices.  Values are row-major
// with the first scope variable slowest.
struct Factor {
    std::vector<int> scope;              // ascending node indices
    std::vector<std::size_t> card;       // aligned with scope
    std::vector<double> values;

    std::size_t table_size() const;
    double at(const std::vector<int>& assignment) const;  // assignment aligned with scope
};

Factor factor_from_cpt(const BayesianNetwork& bn, int node);
Factor factor_product(const Factor& a, const Factor& b);
Factor factor_sum_out(const Factor& f, int variable);
Factor factor_restrict(const Factor& f, int variable, int value);

// Observed categories by variable name.
using Evidence = std::map<std::string, std::string>;

// Exact posterior over the query variable by variable elimination.
// Non-query, non-evidence variables are summed out in min-degree order over
// the evidence-restricted factor graph, ties broken lexicographically by
// name.  Throws Error when the evidence has zero total mass.
std::vector<double> eliminate(const BayesianNetwork& bn, const std::string& query,
                              const Evidence& evidence = {});

// Same sum, but with a caller-chosen elimination order (every non-query,
// non-evidence variable exactly once).  Any valid order is exact.
std::vector<double> eliminate_with_order(const BayesianNetwork& bn, const std::string& query,
                                         const Evidence& evidence,
                                         const std::vector<std::string>& order);

// Prior marginal of every variable (no evidence); each sums to 1 within 1e-9.
std::map<std::string, std::vector<double>> all_marginals(const BayesianNetwork& bn);

// Full joint table: cell = product of CPT entries along each assignment.
// Guarded to <= 1e6 cells; this is the enumeration oracle the elimination
// path is checked against.
Factor brute_force_joint(const BayesianNetwork& bn);

// Parents, children and children's other parents of a node.  The three sets
// are disjoint by construction and exclude the target.
struct MarkovBlanket {
    std::string target;
    std::vector<std::string> parents;
    std::vector<std::string> children;
    std::vector<std::string> spouses;
    // Original DAG edges among {target} + blanket, sorted by name pair.
    std::vector<std::pair<std::string, std::string>> edges;

    std::vector<std::string> members() const;  // union of the three sets, sorted
    bool empty() const { return parents.empty() && children.empty() && spouses.empty(); }
};

MarkovBlanket markov_blanket(const Dag& dag, const std::string& target);

// DOT rendering with the target double-bordered, matching the report style.
std::string markov_blanket_to_dot(const MarkovBlanket& mb);

}  // namespace localbn

#endif  // LOCALBN_INFERENCE_HPP
