#ifndef LOCALBN_BN_HPP
#define LOCALBN_BN_HPP

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "localbn/discretizer.hpp"

namespace localbn {

// Directed acyclic graph over named variables.  Mutations reject self loops,
// duplicate edges and anything that would close a cycle.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::vector<std::string> nodes);

    const std::vector<std::string>& nodes() const { return nodes_; }
    std::size_t node_count() const { return nodes_.size(); }
    int index_of(const std::string& name) const;       // -1 when absent
    int require_index(const std::string& name) const;  // throws when absent

    const std::vector<int>& parents(int v) const { return parents_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& children(int u) const { return children_[static_cast<std::size_t>(u)]; }
    bool has_edge(int u, int v) const;
    // True when adding u -> v would close a cycle (path v ~> u exists).
    bool would_create_cycle(int u, int v) const;

    void add_edge(int u, int v);
    void remove_edge(int u, int v);
    void reverse_edge(int u, int v);

    // Edges sorted by (parent, child) index.
    std::vector<std::pair<int, int>> edges() const;
    std::size_t edge_count() const { return edge_count_; }

    // Full acyclicity + adjacency consistency audit; throws on violation.
    void check_invariants() const;

private:
    bool path_exists(int from, int to) const;

    std::vector<std::string> nodes_;
    std::vector<std::vector<int>> parents_;   // sorted
    std::vector<std::vector<int>> children_;  // sorted
    std::size_t edge_count_ = 0;
};

// Conditional probability table for one node.  Rows are indexed row-major
// over the parent alphabets (first parent slowest).
struct Cpt {
    int child = 0;
    std::vector<int> parents;
    std::vector<std::vector<double>> rows;

    // Each row sums to 1 within 1e-9; row count matches the parent
    // cardinality product; entries strictly positive when smoothed.
    void validate(const std::vector<std::size_t>& cardinalities, bool require_positive) const;
};

struct BayesianNetwork {
    Dag dag;
    std::vector<std::vector<std::string>> alphabets;  // aligned with dag.nodes()
    std::vector<Cpt> cpts;                            // one per node, same order

    std::size_t cardinality(int v) const { return alphabets[static_cast<std::size_t>(v)].size(); }
    void validate(bool require_positive_cpts = false) const;
};

struct SearchConfig {
    std::optional<int> max_parents = 4;
    int max_iterations = 1000;

    void validate() const;
};

// BIC family score: maximum-likelihood log-likelihood of `child` given
// `parents` minus (ln n / 2) * (|child alphabet| - 1) * prod |parent
// alphabets|.  Zero-count cells contribute nothing.  Natural log.
double family_bic(const DiscreteDataset& data, int child, std::span<const int> parents);
double family_bic(const DiscreteDataset& data, const std::string& child,
                  const std::vector<std::string>& parents);

// Sum of family scores over the DAG (BIC decomposability).
double network_bic(const DiscreteDataset& data, const Dag& dag);

// Greedy hill climbing from the empty graph over add/remove/reverse
// single-edge moves.  Each step applies the legal move with the largest
// strictly positive gain; ties resolve lexicographically by (operator name,
// parent name, child name).  Only affected families are rescored.
Dag hill_climb(const DiscreteDataset& data, const SearchConfig& cfg = {});

// Additive-smoothed CPT estimation: (count + alpha) / (total + alpha * k).
// Rows with no observations come out uniform.
BayesianNetwork fit_parameters(const DiscreteDataset& data, const Dag& dag, double alpha = 1.0);

// Structured-text (JSON) and DOT serializations.
std::string bn_to_json(const BayesianNetwork& bn);
BayesianNetwork bn_from_json(const std::string& text);
std::string dag_to_dot(const Dag& dag);

}  // namespace localbn

#endif  // LOCALBN_BN_HPP
