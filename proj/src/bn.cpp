#include "localbn/bn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "localbn/errors.hpp"
#include "localbn/util.hpp"
#include <json.hpp>

namespace localbn {

// ---------------------------------------------------------------------------
// Dag

Dag::Dag(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
    std::vector<std::string> sorted = nodes_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ValidationError("dag: duplicate node name");
    }
    parents_.resize(nodes_.size());
    children_.resize(nodes_.size());
}

int Dag::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int Dag::require_index(const std::string& name) const {
    const int i = index_of(name);
    if (i < 0) throw ValidationError("dag: unknown node '" + name + "'");
    return i;
}

bool Dag::has_edge(int u, int v) const {
    const auto& ch = children_[static_cast<std::size_t>(u)];
    return std::binary_search(ch.begin(), ch.end(), v);
}

bool Dag::path_exists(int from, int to) const {
    if (from == to) return true;
    std::vector<int> stack{from};
    std::vector<bool> seen(nodes_.size(), false);
    seen[static_cast<std::size_t>(from)] = true;
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        for (int next : children_[static_cast<std::size_t>(cur)]) {
            if (next == to) return true;
            if (!seen[static_cast<std::size_t>(next)]) {
                seen[static_cast<std::size_t>(next)] = true;
                stack.push_back(next);
            }
        }
    }
    return false;
}

bool Dag::would_create_cycle(int u, int v) const { return path_exists(v, u); }

namespace {

void sorted_insert(std::vector<int>& v, int x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
}

void sorted_erase(std::vector<int>& v, int x) {
    const auto it = std::lower_bound(v.begin(), v.end(), x);
    v.erase(it);
}

}  // namespace

void Dag::add_edge(int u, int v) {
    if (u == v) throw ValidationError("dag: self loop on '" + nodes_[static_cast<std::size_t>(u)] + "'");
    if (has_edge(u, v)) throw ValidationError("dag: duplicate edge");
    if (would_create_cycle(u, v)) {
        throw ValidationError("dag: edge " + nodes_[static_cast<std::size_t>(u)] + " -> " +
                              nodes_[static_cast<std::size_t>(v)] + " would create a cycle");
    }
    sorted_insert(children_[static_cast<std::size_t>(u)], v);
    sorted_insert(parents_[static_cast<std::size_t>(v)], u);
    ++edge_count_;
}

void Dag::remove_edge(int u, int v) {
    if (!has_edge(u, v)) throw ValidationError("dag: removing absent edge");
    sorted_erase(children_[static_cast<std::size_t>(u)], v);
    sorted_erase(parents_[static_cast<std::size_t>(v)], u);
    --edge_count_;
}

void Dag::reverse_edge(int u, int v) {
    remove_edge(u, v);
    add_edge(v, u);  // throws and leaves the edge removed only if cyclic; callers pre-check
}

std::vector<std::pair<int, int>> Dag::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edge_count_);
    for (std::size_t u = 0; u < nodes_.size(); ++u) {
        for (int v : children_[u]) out.emplace_back(static_cast<int>(u), v);
    }
    return out;
}

void Dag::check_invariants() const {
    // Kahn's algorithm; every node must be emitted.
    std::vector<std::size_t> in_degree(nodes_.size());
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        in_degree[v] = parents_[v].size();
        for (int p : parents_[v]) {
            const auto& ch = children_[static_cast<std::size_t>(p)];
            if (!std::binary_search(ch.begin(), ch.end(), static_cast<int>(v))) {
                throw Error("dag: parent/child adjacency out of sync");
            }
        }
    }
    std::vector<int> queue;
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        if (in_degree[v] == 0) queue.push_back(static_cast<int>(v));
    }
    std::size_t emitted = 0;
    while (!queue.empty()) {
        const int u = queue.back();
        queue.pop_back();
        ++emitted;
        for (int v : children_[static_cast<std::size_t>(u)]) {
            if (--in_degree[static_cast<std::size_t>(v)] == 0) queue.push_back(v);
        }
    }
    if (emitted != nodes_.size()) throw Error("dag: cycle detected");
}

// ---------------------------------------------------------------------------
// Scoring

void Cpt::validate(const std::vector<std::size_t>& cardinalities, bool require_positive) const {
    std::size_t expected_rows = 1;
    for (int p : parents) expected_rows *= cardinalities[static_cast<std::size_t>(p)];
    if (rows.size() != expected_rows) {
        throw ValidationError("cpt: row count " + std::to_string(rows.size()) + " != " +
                              std::to_string(expected_rows));
    }
    const std::size_t k = cardinalities[static_cast<std::size_t>(child)];
    for (const auto& row : rows) {
        if (row.size() != k) throw ValidationError("cpt: row width mismatch");
        double total = 0.0;
        for (double p : row) {
            if (!(p >= 0.0)) throw ValidationError("cpt: negative entry");
            if (require_positive && p <= 0.0) throw ValidationError("cpt: zero entry after smoothing");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw ValidationError("cpt: row sums to " + format_double(total));
        }
    }
}

void BayesianNetwork::validate(bool require_positive_cpts) const {
    if (alphabets.size() != dag.node_count() || cpts.size() != dag.node_count()) {
        throw ValidationError("bn: alphabets/cpts not aligned with dag nodes");
    }
    std::vector<std::size_t> card(dag.node_count());
    for (std::size_t v = 0; v < card.size(); ++v) card[v] = alphabets[v].size();
    for (std::size_t v = 0; v < cpts.size(); ++v) {
        if (cpts[v].child != static_cast<int>(v)) throw ValidationError("bn: cpt order mismatch");
        if (cpts[v].parents != dag.parents(static_cast<int>(v))) {
            throw ValidationError("bn: cpt parents differ from dag parents");
        }
        cpts[v].validate(card, require_positive_cpts);
    }
    dag.check_invariants();
}

void SearchConfig::validate() const {
    if (max_parents && *max_parents < 1) throw ValidationError("max_parents must be >= 1");
    if (max_iterations < 0) throw ValidationError("max_iterations must be >= 0");
}

namespace {

struct FamilyCounts {
    std::vector<long long> cells;  // parent-config major, child value minor
    std::size_t child_card = 0;
    std::size_t config_count = 0;
};

FamilyCounts count_family(const DiscreteDataset& data, int child, std::span<const int> parents) {
    FamilyCounts fc;
    fc.child_card = data.cardinality(static_cast<std::size_t>(child));
    fc.config_count = 1;
    std::vector<std::size_t> stride(parents.size());
    for (std::size_t i = parents.size(); i-- > 0;) {
        stride[i] = fc.config_count;
        fc.config_count *= data.cardinality(static_cast<std::size_t>(parents[i]));
    }
    fc.cells.assign(fc.config_count * fc.child_card, 0);
    for (const auto& row : data.rows) {
        std::size_t config = 0;
        for (std::size_t i = 0; i < parents.size(); ++i) {
            config += stride[i] * static_cast<std::size_t>(row[static_cast<std::size_t>(parents[i])]);
        }
        ++fc.cells[config * fc.child_card + static_cast<std::size_t>(row[static_cast<std::size_t>(child)])];
    }
    return fc;
}

}  // namespace

double family_bic(const DiscreteDataset& data, int child, std::span<const int> parents) {
    const FamilyCounts fc = count_family(data, child, parents);
    double loglik = 0.0;
    for (std::size_t c = 0; c < fc.config_count; ++c) {
        long long total = 0;
        for (std::size_t k = 0; k < fc.child_card; ++k) total += fc.cells[c * fc.child_card + k];
        if (total == 0) continue;
        for (std::size_t k = 0; k < fc.child_card; ++k) {
            const long long n_ck = fc.cells[c * fc.child_card + k];
            if (n_ck > 0) {
                loglik += static_cast<double>(n_ck) *
                          std::log(static_cast<double>(n_ck) / static_cast<double>(total));
            }
        }
    }
    const double n = static_cast<double>(data.rows.size());
    const double free_params =
        static_cast<double>(fc.child_card - 1) * static_cast<double>(fc.config_count);
    return loglik - 0.5 * std::log(n) * free_params;
}

double family_bic(const DiscreteDataset& data, const std::string& child,
                  const std::vector<std::string>& parents) {
    const int c = data.index_of(child);
    if (c < 0) throw ValidationError("family_bic: unknown variable '" + child + "'");
    std::vector<int> ps;
    for (const auto& p : parents) {
        const int i = data.index_of(p);
        if (i < 0) throw ValidationError("family_bic: unknown variable '" + p + "'");
        ps.push_back(i);
    }
    return family_bic(data, c, ps);
}

double network_bic(const DiscreteDataset& data, const Dag& dag) {
    double total = 0.0;
    for (std::size_t v = 0; v < dag.node_count(); ++v) {
        total += family_bic(data, static_cast<int>(v), dag.parents(static_cast<int>(v)));
    }
    return total;
}

// ---------------------------------------------------------------------------
// Hill climbing

namespace {

class FamilyScoreCache {
public:
    explicit FamilyScoreCache(const DiscreteDataset& data) : data_(data) {}

    double score(int child, std::vector<int> parents) {
        std::sort(parents.begin(), parents.end());
        std::vector<int> key;
        key.reserve(parents.size() + 1);
        key.push_back(child);
        key.insert(key.end(), parents.begin(), parents.end());
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double s = family_bic(data_, child, parents);
        cache_.emplace(std::move(key), s);
        return s;
    }

private:
    const DiscreteDataset& data_;
    std::map<std::vector<int>, double> cache_;
};

std::vector<int> with_parent(const std::vector<int>& parents, int extra) {
    std::vector<int> out = parents;
    out.push_back(extra);
    return out;
}

std::vector<int> without_parent(const std::vector<int>& parents, int removed) {
    std::vector<int> out;
    out.reserve(parents.size());
    for (int p : parents) {
        if (p != removed) out.push_back(p);
    }
    return out;
}

}  // namespace

Dag hill_climb(const DiscreteDataset& data, const SearchConfig& cfg) {
    data.validate();
    cfg.validate();

    Dag dag(data.variables);
    const int n = static_cast<int>(dag.node_count());
    const std::size_t parent_cap =
        cfg.max_parents ? static_cast<std::size_t>(*cfg.max_parents) : static_cast<std::size_t>(n);

    FamilyScoreCache cache(data);
    std::vector<double> family_score(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) family_score[static_cast<std::size_t>(v)] = cache.score(v, {});

    // Candidate (parent, child) pairs are walked in lexicographic name order
    // so equal-gain moves resolve deterministically.
    std::vector<int> by_name(static_cast<std::size_t>(n));
    std::iota(by_name.begin(), by_name.end(), 0);
    std::sort(by_name.begin(), by_name.end(),
              [&](int a, int b) { return dag.nodes()[static_cast<std::size_t>(a)] < dag.nodes()[static_cast<std::size_t>(b)]; });

    enum class Op { Add, Remove, Reverse };  // enum order = lexicographic name order

    for (int iteration = 0; iteration < cfg.max_iterations; ++iteration) {
        double best_gain = 0.0;
        Op best_op = Op::Add;
        int best_u = -1;
        int best_v = -1;

        for (const Op op : {Op::Add, Op::Remove, Op::Reverse}) {
            for (int u : by_name) {
                for (int v : by_name) {
                    if (u == v) continue;
                    double gain = 0.0;
                    switch (op) {
                        case Op::Add: {
                            if (dag.has_edge(u, v) || dag.parents(v).size() >= parent_cap ||
                                dag.would_create_cycle(u, v)) {
                                continue;
                            }
                            gain = cache.score(v, with_parent(dag.parents(v), u)) -
                                   family_score[static_cast<std::size_t>(v)];
                            break;
                        }
                        case Op::Remove: {
                            if (!dag.has_edge(u, v)) continue;
                            gain = cache.score(v, without_parent(dag.parents(v), u)) -
                                   family_score[static_cast<std::size_t>(v)];
                            break;
                        }
                        case Op::Reverse: {
                            if (!dag.has_edge(u, v) || dag.parents(u).size() >= parent_cap) continue;
                            // Cycle check for v -> u with u -> v removed: any
                            // other path u ~> v forbids the reversal.
                            Dag probe = dag;
                            probe.remove_edge(u, v);
                            if (probe.would_create_cycle(v, u)) continue;
                            gain = cache.score(v, without_parent(dag.parents(v), u)) -
                                   family_score[static_cast<std::size_t>(v)] +
                                   cache.score(u, with_parent(dag.parents(u), v)) -
                                   family_score[static_cast<std::size_t>(u)];
                            break;
                        }
                    }
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_op = op;
                        best_u = u;
                        best_v = v;
                    }
                }
            }
        }

        if (best_u < 0) break;  // no strictly improving move

        switch (best_op) {
            case Op::Add:
                dag.add_edge(best_u, best_v);
                family_score[static_cast<std::size_t>(best_v)] =
                    cache.score(best_v, dag.parents(best_v));
                break;
            case Op::Remove:
                dag.remove_edge(best_u, best_v);
                family_score[static_cast<std::size_t>(best_v)] =
                    cache.score(best_v, dag.parents(best_v));
                break;
            case Op::Reverse:
                dag.reverse_edge(best_u, best_v);
                family_score[static_cast<std::size_t>(best_v)] =
                    cache.score(best_v, dag.parents(best_v));
                family_score[static_cast<std::size_t>(best_u)] =
                    cache.score(best_u, dag.parents(best_u));
                break;
        }
        dag.check_invariants();
    }
    return dag;
}

BayesianNetwork fit_parameters(const DiscreteDataset& data, const Dag& dag, double alpha) {
    data.validate();
    if (alpha < 0.0) throw ValidationError("fit_parameters: alpha must be >= 0");
    if (dag.node_count() != data.variables.size()) {
        throw ValidationError("fit_parameters: dag does not cover the dataset variables");
    }
    for (std::size_t v = 0; v < dag.node_count(); ++v) {
        if (dag.nodes()[v] != data.variables[v]) {
            throw ValidationError("fit_parameters: dag/dataset variable order mismatch");
        }
    }

    BayesianNetwork bn;
    bn.dag = dag;
    bn.alphabets = data.alphabets;
    bn.cpts.resize(dag.node_count());

    for (int v = 0; v < static_cast<int>(dag.node_count()); ++v) {
        const auto& parents = dag.parents(v);
        const FamilyCounts fc = count_family(data, v, parents);
        Cpt cpt;
        cpt.child = v;
        cpt.parents = parents;
        cpt.rows.resize(fc.config_count);
        const double k = static_cast<double>(fc.child_card);
        for (std::size_t c = 0; c < fc.config_count; ++c) {
            long long total = 0;
            for (std::size_t j = 0; j < fc.child_card; ++j) total += fc.cells[c * fc.child_card + j];
            auto& row = cpt.rows[c];
            row.resize(fc.child_card);
            const double denom = static_cast<double>(total) + alpha * k;
            for (std::size_t j = 0; j < fc.child_card; ++j) {
                row[j] = denom > 0.0
                             ? (static_cast<double>(fc.cells[c * fc.child_card + j]) + alpha) / denom
                             : 1.0 / k;
            }
        }
        bn.cpts[static_cast<std::size_t>(v)] = std::move(cpt);
    }
    return bn;
}

// ---------------------------------------------------------------------------
// Serialization

std::string bn_to_json(const BayesianNetwork& bn) {
    nlohmann::json doc;
    doc["nodes"] = bn.dag.nodes();
    auto edges = nlohmann::json::array();
    for (const auto& [u, v] : bn.dag.edges()) {
        edges.push_back({bn.dag.nodes()[static_cast<std::size_t>(u)],
                         bn.dag.nodes()[static_cast<std::size_t>(v)]});
    }
    doc["edges"] = edges;
    auto alphabets = nlohmann::json::object();
    auto cpts = nlohmann::json::object();
    for (std::size_t v = 0; v < bn.dag.node_count(); ++v) {
        const auto& name = bn.dag.nodes()[v];
        alphabets[name] = bn.alphabets[v];
        std::vector<std::string> parent_names;
        for (int p : bn.cpts[v].parents) {
            parent_names.push_back(bn.dag.nodes()[static_cast<std::size_t>(p)]);
        }
        cpts[name] = {{"parents", parent_names}, {"rows", bn.cpts[v].rows}};
    }
    doc["alphabets"] = alphabets;
    doc["cpts"] = cpts;
    return doc.dump(2);
}

BayesianNetwork bn_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bn document is not valid JSON: ") + e.what());
    }
    try {
        BayesianNetwork bn;
        bn.dag = Dag(doc.at("nodes").get<std::vector<std::string>>());
        for (const auto& e : doc.at("edges")) {
            bn.dag.add_edge(bn.dag.require_index(e.at(0).get<std::string>()),
                            bn.dag.require_index(e.at(1).get<std::string>()));
        }
        bn.alphabets.resize(bn.dag.node_count());
        bn.cpts.resize(bn.dag.node_count());
        for (std::size_t v = 0; v < bn.dag.node_count(); ++v) {
            const auto& name = bn.dag.nodes()[v];
            bn.alphabets[v] = doc.at("alphabets").at(name).get<std::vector<std::string>>();
            Cpt cpt;
            cpt.child = static_cast<int>(v);
            for (const auto& p : doc.at("cpts").at(name).at("parents")) {
                cpt.parents.push_back(bn.dag.require_index(p.get<std::string>()));
            }
            std::sort(cpt.parents.begin(), cpt.parents.end());
            cpt.rows = doc.at("cpts").at(name).at("rows").get<std::vector<std::vector<double>>>();
            bn.cpts[v] = std::move(cpt);
        }
        bn.validate();
        return bn;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bn document schema error: ") + e.what());
    }
}

std::string dag_to_dot(const Dag& dag) {
    std::string out = "digraph bn {\n";
    for (const auto& node : dag.nodes()) {
        out += "  \"" + node + "\";\n";
    }
    for (const auto& [u, v] : dag.edges()) {
        out += "  \"" + dag.nodes()[static_cast<std::size_t>(u)] + "\" -> \"" +
               dag.nodes()[static_cast<std::size_t>(v)] + "\";\n";
    }
    out += "}\n";
    return out;
}

}  // namespace localbn
