#ifndef LOCALBN_TESTS_SUPPORT_HPP
#define LOCALBN_TESTS_SUPPORT_HPP

// Shared helpers for the unit and acceptance suites: independent scoring and
// inference oracles, random-instance generators, and scratch-file plumbing.
// The oracles deliberately use the dumbest data structures available (maps,
// full enumeration) so they cannot share bugs with the library's optimized
// stride-based paths.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "localbn/bn.hpp"
#include "localbn/discretizer.hpp"
#include "localbn/inference.hpp"
#include "localbn/verdicts.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Scratch files

class TempFile {
public:
    explicit TempFile(const std::string& contents, const std::string& suffix = ".txt") {
        static std::atomic<int> counter{0};
        static const unsigned long long stamp = std::random_device{}();
        path_ = std::filesystem::temp_directory_path() /
                ("localbn_test_" + std::to_string(stamp) + "_" +
                 std::to_string(counter.fetch_add(1)) + suffix);
        std::ofstream out(path_, std::ios::binary);
        out << contents;
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;
    std::string path() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// Deterministic uniform draws (kept local so oracle data does not depend on
// library helpers)

inline double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

// ---------------------------------------------------------------------------
// Independent BIC oracle: plain nested maps, no strides, no caching

inline double naive_family_bic(const localbn::DiscreteDataset& data, int child,
                               const std::vector<int>& parents) {
    std::map<std::vector<int>, std::map<int, int>> counts;
    for (const auto& row : data.rows) {
        std::vector<int> key;
        for (int p : parents) key.push_back(row[static_cast<std::size_t>(p)]);
        ++counts[key][row[static_cast<std::size_t>(child)]];
    }
    double loglik = 0.0;
    for (const auto& [key, child_counts] : counts) {
        int total = 0;
        for (const auto& [value, n] : child_counts) total += n;
        for (const auto& [value, n] : child_counts) {
            loglik += n * std::log(static_cast<double>(n) / total);
        }
    }
    double parent_configs = 1.0;
    for (int p : parents) {
        parent_configs *= static_cast<double>(data.alphabets[static_cast<std::size_t>(p)].size());
    }
    const double free_params =
        (static_cast<double>(data.alphabets[static_cast<std::size_t>(child)].size()) - 1.0) *
        parent_configs;
    return loglik -
           0.5 * std::log(static_cast<double>(data.rows.size())) * free_params;
}

inline double naive_network_bic(const localbn::DiscreteDataset& data,
                                const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> parents(data.variables.size());
    for (const auto& [u, v] : edges) parents[static_cast<std::size_t>(v)].push_back(u);
    double total = 0.0;
    for (std::size_t v = 0; v < data.variables.size(); ++v) {
        total += naive_family_bic(data, static_cast<int>(v), parents[v]);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Exhaustive DAG enumeration over three nodes (25 graphs)

inline std::vector<std::vector<std::pair<int, int>>> all_three_node_dags() {
    const std::pair<int, int> pairs[3] = {{0, 1}, {0, 2}, {1, 2}};
    std::vector<std::vector<std::pair<int, int>>> dags;
    for (int s0 = 0; s0 < 3; ++s0) {
        for (int s1 = 0; s1 < 3; ++s1) {
            for (int s2 = 0; s2 < 3; ++s2) {
                const int state[3] = {s0, s1, s2};
                std::vector<std::pair<int, int>> edges;
                for (int i = 0; i < 3; ++i) {
                    if (state[i] == 1) edges.push_back(pairs[i]);
                    if (state[i] == 2) edges.emplace_back(pairs[i].second, pairs[i].first);
                }
                bool cyclic = false;
                if (edges.size() == 3) {
                    int in_degree[3] = {0, 0, 0};
                    for (const auto& [u, v] : edges) ++in_degree[v];
                    cyclic = in_degree[0] == 1 && in_degree[1] == 1 && in_degree[2] == 1;
                }
                if (!cyclic) dags.push_back(std::move(edges));
            }
        }
    }
    return dags;
}

// ---------------------------------------------------------------------------
// Random instances

inline localbn::Dag dag_from_edges(std::vector<std::string> nodes,
                                   const std::vector<std::pair<int, int>>& edges) {
    localbn::Dag dag(std::move(nodes));
    for (const auto& [u, v] : edges) dag.add_edge(u, v);
    return dag;
}

// Random edge list over n nodes, acyclic by construction (edges follow a
// shuffled topological order).
inline std::vector<std::pair<int, int>> random_edges(std::mt19937_64& rng, int n,
                                                     double edge_probability = 0.4) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (unit_draw(rng) < edge_probability) {
                edges.emplace_back(order[static_cast<std::size_t>(a)],
                                   order[static_cast<std::size_t>(b)]);
            }
        }
    }
    return edges;
}

// Random network with strictly positive CPTs: 1..max_vars variables,
// alphabet sizes 2..max_card.
inline localbn::BayesianNetwork random_network(std::mt19937_64& rng, int max_vars = 6,
                                               int max_card = 4) {
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_vars));
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> alphabets;
    for (int v = 0; v < n; ++v) {
        names.push_back("n" + std::to_string(v));
        const int card = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_card - 1));
        std::vector<std::string> alphabet;
        for (int c = 0; c < card; ++c) alphabet.push_back("c" + std::to_string(c));
        alphabets.push_back(std::move(alphabet));
    }

    localbn::BayesianNetwork bn;
    bn.dag = dag_from_edges(names, random_edges(rng, n));
    bn.alphabets = alphabets;
    for (int v = 0; v < n; ++v) {
        localbn::Cpt cpt;
        cpt.child = v;
        cpt.parents = bn.dag.parents(v);
        std::size_t rows = 1;
        for (int p : cpt.parents) rows *= bn.alphabets[static_cast<std::size_t>(p)].size();
        const std::size_t card = bn.alphabets[static_cast<std::size_t>(v)].size();
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> row(card);
            double total = 0.0;
            for (auto& cell : row) {
                cell = 0.05 + unit_draw(rng);
                total += cell;
            }
            for (auto& cell : row) cell /= total;
            cpt.rows.push_back(std::move(row));
        }
        bn.cpts.push_back(std::move(cpt));
    }
    bn.validate(true);
    return bn;
}

// ---------------------------------------------------------------------------
// Conditionals straight off a joint table

// P(target | fixed assignment of `given`) computed by summing joint cells.
// Empty result means the conditioning event has zero mass.
inline std::vector<double> joint_conditional(const localbn::Factor& joint, int target,
                                             const std::map<int, int>& given) {
    std::size_t target_pos = joint.scope.size();
    for (std::size_t i = 0; i < joint.scope.size(); ++i) {
        if (joint.scope[i] == target) target_pos = i;
    }
    std::vector<double> numerator(joint.card[target_pos], 0.0);
    double denominator = 0.0;

    std::vector<int> assignment(joint.scope.size(), 0);
    for (std::size_t cell = 0; cell < joint.values.size(); ++cell) {
        bool match = true;
        for (const auto& [variable, value] : given) {
            for (std::size_t i = 0; i < joint.scope.size(); ++i) {
                if (joint.scope[i] == variable && assignment[i] != value) {
                    match = false;
                    break;
                }
            }
            if (!match) break;
        }
        if (match) {
            numerator[static_cast<std::size_t>(assignment[target_pos])] += joint.values[cell];
            denominator += joint.values[cell];
        }
        for (std::size_t i = joint.scope.size(); i-- > 0;) {
            if (++assignment[i] < static_cast<int>(joint.card[i])) break;
            assignment[i] = 0;
        }
    }
    if (denominator == 0.0) return {};
    for (auto& p : numerator) p /= denominator;
    return numerator;
}

// ---------------------------------------------------------------------------
// Canned structure-learning datasets

inline localbn::DiscreteDataset make_dataset(std::vector<std::string> variables,
                                             std::vector<std::vector<std::string>> alphabets,
                                             std::vector<std::vector<int>> rows,
                                             std::size_t class_index) {
    localbn::DiscreteDataset data;
    data.variables = std::move(variables);
    data.alphabets = std::move(alphabets);
    data.rows = std::move(rows);
    data.class_index = class_index;
    data.validate();
    return data;
}

// Rows over binary {x1, x2, y}: x1 and x2 fair independent coins, y drawn
// with P(y=1 | x1, x2) = 0.05 / 0.6 / 0.6 / 0.95.  Every single edge carries
// signal, so greedy search can reach the collider one edge at a time.
inline localbn::DiscreteDataset v_structure_dataset(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double p_y1[2][2] = {{0.05, 0.6}, {0.6, 0.95}};
    std::vector<std::vector<int>> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int x1 = unit_draw(rng) < 0.5 ? 0 : 1;
        const int x2 = unit_draw(rng) < 0.5 ? 0 : 1;
        const int y = unit_draw(rng) < p_y1[x1][x2] ? 1 : 0;
        rows.push_back({x1, x2, y});
    }
    return make_dataset({"x1", "x2", "y"}, {{"0", "1"}, {"0", "1"}, {"0", "1"}},
                        std::move(rows), 2);
}

// Two independent fair coins (class column is the second coin).
inline localbn::DiscreteDataset coins_dataset(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<int>> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int a = unit_draw(rng) < 0.5 ? 0 : 1;
        const int b = unit_draw(rng) < 0.5 ? 0 : 1;
        rows.push_back({a, b});
    }
    return make_dataset({"a", "b"}, {{"0", "1"}, {"0", "1"}}, std::move(rows), 1);
}

// ---------------------------------------------------------------------------
// Independent verdict reference (mirrors the documented decision procedure,
// written from the rule list rather than the library code)

inline localbn::Rule expected_rule(int in_degree, int out_degree,
                                   const std::vector<double>& probabilities,
                                   std::size_t predicted_index, double tau) {
    if (in_degree == 0 && out_degree == 0) return localbn::Rule::R2Unreliable;
    double max_probability = probabilities[0];
    for (double p : probabilities) max_probability = std::max(max_probability, p);
    if (probabilities[predicted_index] < max_probability) return localbn::Rule::R3Contrast;
    if (probabilities[predicted_index] >= tau) return localbn::Rule::R1HighConfidence;
    return localbn::Rule::R4Uncertain;
}

}  // namespace testsupport

#endif  // LOCALBN_TESTS_SUPPORT_HPP
