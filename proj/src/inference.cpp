#include "localbn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "localbn/errors.hpp"
#include "localbn/util.hpp"

namespace localbn {

std::size_t Factor::table_size() const {
    std::size_t n = 1;
    for (std::size_t c : card) n *= c;
    return n;
}

double Factor::at(const std::vector<int>& assignment) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < scope.size(); ++i) {
        idx = idx * card[i] + static_cast<std::size_t>(assignment[i]);
    }
    return values[idx];
}

namespace {

// Strides of each result-scope variable inside an operand factor; zero for
// variables the operand does not mention.
std::vector<std::size_t> aligned_strides(const Factor& operand, const std::vector<int>& scope) {
    std::vector<std::size_t> operand_stride(operand.scope.size());
    std::size_t s = 1;
    for (std::size_t i = operand.scope.size(); i-- > 0;) {
        operand_stride[i] = s;
        s *= operand.card[i];
    }
    std::vector<std::size_t> out(scope.size(), 0);
    for (std::size_t i = 0; i < scope.size(); ++i) {
        const auto it = std::find(operand.scope.begin(), operand.scope.end(), scope[i]);
        if (it != operand.scope.end()) {
            out[i] = operand_stride[static_cast<std::size_t>(it - operand.scope.begin())];
        }
    }
    return out;
}

// Walks every joint assignment of `scope`, calling fn(assignment).
template <typename Fn>
void for_each_assignment(const std::vector<std::size_t>& card, Fn&& fn) {
    std::vector<int> assignment(card.size(), 0);
    for (;;) {
        fn(assignment);
        std::size_t i = card.size();
        while (i > 0) {
            --i;
            if (static_cast<std::size_t>(++assignment[i]) < card[i]) break;
            assignment[i] = 0;
            if (i == 0) return;
        }
        if (card.empty()) return;
    }
}

}  // namespace

Factor factor_from_cpt(const BayesianNetwork& bn, int node) {
    const Cpt& cpt = bn.cpts[static_cast<std::size_t>(node)];
    Factor f;
    f.scope = cpt.parents;
    f.scope.push_back(node);
    std::sort(f.scope.begin(), f.scope.end());
    f.card.resize(f.scope.size());
    for (std::size_t i = 0; i < f.scope.size(); ++i) f.card[i] = bn.cardinality(f.scope[i]);
    f.values.resize(f.table_size());

    // Parent-config strides in CPT row order (first parent slowest).
    std::vector<std::size_t> parent_stride(cpt.parents.size());
    std::size_t s = 1;
    for (std::size_t i = cpt.parents.size(); i-- > 0;) {
        parent_stride[i] = s;
        s *= bn.cardinality(cpt.parents[i]);
    }

    std::size_t linear = 0;
    for_each_assignment(f.card, [&](const std::vector<int>& assignment) {
        std::size_t config = 0;
        int child_value = 0;
        for (std::size_t i = 0; i < f.scope.size(); ++i) {
            if (f.scope[i] == node) {
                child_value = assignment[i];
            } else {
                const auto it = std::find(cpt.parents.begin(), cpt.parents.end(), f.scope[i]);
                config += parent_stride[static_cast<std::size_t>(it - cpt.parents.begin())] *
                          static_cast<std::size_t>(assignment[i]);
            }
        }
        f.values[linear++] = cpt.rows[config][static_cast<std::size_t>(child_value)];
    });
    return f;
}

Factor factor_product(const Factor& a, const Factor& b) {
    Factor f;
    f.scope = a.scope;
    for (std::size_t i = 0; i < b.scope.size(); ++i) {
        if (std::find(f.scope.begin(), f.scope.end(), b.scope[i]) == f.scope.end()) {
            f.scope.push_back(b.scope[i]);
        }
    }
    std::sort(f.scope.begin(), f.scope.end());
    f.card.resize(f.scope.size());
    for (std::size_t i = 0; i < f.scope.size(); ++i) {
        const auto ia = std::find(a.scope.begin(), a.scope.end(), f.scope[i]);
        f.card[i] = ia != a.scope.end()
                        ? a.card[static_cast<std::size_t>(ia - a.scope.begin())]
                        : b.card[static_cast<std::size_t>(
                              std::find(b.scope.begin(), b.scope.end(), f.scope[i]) -
                              b.scope.begin())];
    }
    const auto sa = aligned_strides(a, f.scope);
    const auto sb = aligned_strides(b, f.scope);
    f.values.resize(f.table_size());
    std::size_t linear = 0;
    for_each_assignment(f.card, [&](const std::vector<int>& assignment) {
        std::size_t ia = 0;
        std::size_t ib = 0;
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            ia += sa[i] * static_cast<std::size_t>(assignment[i]);
            ib += sb[i] * static_cast<std::size_t>(assignment[i]);
        }
        f.values[linear++] = a.values[ia] * b.values[ib];
    });
    return f;
}

Factor factor_sum_out(const Factor& f, int variable) {
    const auto it = std::find(f.scope.begin(), f.scope.end(), variable);
    if (it == f.scope.end()) return f;
    const std::size_t pos = static_cast<std::size_t>(it - f.scope.begin());

    Factor out;
    out.scope = f.scope;
    out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(pos));
    out.card = f.card;
    out.card.erase(out.card.begin() + static_cast<std::ptrdiff_t>(pos));
    out.values.assign(out.table_size(), 0.0);

    const auto strides = aligned_strides(out, f.scope);  // out index per f-scope var, 0 at pos
    std::size_t linear = 0;
    for_each_assignment(f.card, [&](const std::vector<int>& assignment) {
        std::size_t io = 0;
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            io += strides[i] * static_cast<std::size_t>(assignment[i]);
        }
        out.values[io] += f.values[linear++];
    });
    return out;
}

Factor factor_restrict(const Factor& f, int variable, int value) {
    const auto it = std::find(f.scope.begin(), f.scope.end(), variable);
    if (it == f.scope.end()) return f;
    const std::size_t pos = static_cast<std::size_t>(it - f.scope.begin());

    Factor out;
    out.scope = f.scope;
    out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(pos));
    out.card = f.card;
    out.card.erase(out.card.begin() + static_cast<std::ptrdiff_t>(pos));
    out.values.reserve(out.table_size());

    std::size_t linear = 0;
    for_each_assignment(f.card, [&](const std::vector<int>& assignment) {
        if (assignment[pos] == value) out.values.push_back(f.values[linear]);
        ++linear;
    });
    return out;
}

namespace {

std::vector<Factor> evidence_restricted_factors(const BayesianNetwork& bn,
                                                const std::map<int, int>& evidence_by_index) {
    std::vector<Factor> factors;
    factors.reserve(bn.dag.node_count());
    for (int v = 0; v < static_cast<int>(bn.dag.node_count()); ++v) {
        Factor f = factor_from_cpt(bn, v);
        for (const auto& [var, val] : evidence_by_index) f = factor_restrict(f, var, val);
        factors.push_back(std::move(f));
    }
    return factors;
}

std::map<int, int> resolve_evidence(const BayesianNetwork& bn, const Evidence& evidence) {
    std::map<int, int> out;
    for (const auto& [name, category] : evidence) {
        const int v = bn.dag.require_index(name);
        const auto& alphabet = bn.alphabets[static_cast<std::size_t>(v)];
        const auto it = std::find(alphabet.begin(), alphabet.end(), category);
        if (it == alphabet.end()) {
            throw ValidationError("evidence: category '" + category + "' not in alphabet of '" +
                                  name + "'");
        }
        out[v] = static_cast<int>(it - alphabet.begin());
    }
    return out;
}

std::vector<double> run_elimination(const BayesianNetwork& bn, int query,
                                    std::vector<Factor> factors, const std::vector<int>& order) {
    for (int w : order) {
        Factor combined;
        bool have = false;
        std::vector<Factor> remaining;
        remaining.reserve(factors.size());
        for (auto& f : factors) {
            if (std::find(f.scope.begin(), f.scope.end(), w) != f.scope.end()) {
                combined = have ? factor_product(combined, f) : std::move(f);
                have = true;
            } else {
                remaining.push_back(std::move(f));
            }
        }
        if (have) remaining.push_back(factor_sum_out(combined, w));
        factors = std::move(remaining);
    }

    // Everything left is scoped on the query (or constant).
    Factor result;
    result.scope = {query};
    result.card = {bn.cardinality(query)};
    result.values.assign(result.card[0], 1.0);
    for (const auto& f : factors) {
        if (f.scope.empty()) {
            for (double& x : result.values) x *= f.values[0];
        } else {
            result = factor_product(result, f);
        }
    }

    double total = 0.0;
    for (double x : result.values) total += x;
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw Error("eliminate: evidence has zero probability mass");
    }
    for (double& x : result.values) x /= total;
    return result.values;
}

}  // namespace

std::vector<double> eliminate(const BayesianNetwork& bn, const std::string& query,
                              const Evidence& evidence) {
    const int q = bn.dag.require_index(query);
    if (evidence.count(query) > 0) throw ValidationError("eliminate: query is also evidence");
    const auto evidence_by_index = resolve_evidence(bn, evidence);
    auto factors = evidence_restricted_factors(bn, evidence_by_index);

    std::set<int> to_eliminate;
    for (int v = 0; v < static_cast<int>(bn.dag.node_count()); ++v) {
        if (v != q && evidence_by_index.count(v) == 0) to_eliminate.insert(v);
    }

    // Min-degree: repeatedly pick the pending variable with the fewest
    // co-occurring neighbors in the current factor set, ties by name.
    std::vector<int> order;
    std::vector<std::set<int>> scopes;
    for (const auto& f : factors) scopes.emplace_back(f.scope.begin(), f.scope.end());
    while (!to_eliminate.empty()) {
        int best = -1;
        std::size_t best_degree = 0;
        for (int w : to_eliminate) {
            std::set<int> neighbors;
            for (const auto& s : scopes) {
                if (s.count(w) > 0) neighbors.insert(s.begin(), s.end());
            }
            neighbors.erase(w);
            const std::size_t degree = neighbors.size();
            const bool better =
                best < 0 || degree < best_degree ||
                (degree == best_degree &&
                 bn.dag.nodes()[static_cast<std::size_t>(w)] < bn.dag.nodes()[static_cast<std::size_t>(best)]);
            if (better) {
                best = w;
                best_degree = degree;
            }
        }
        order.push_back(best);
        to_eliminate.erase(best);
        // Merge the scopes touching `best` into one clique without it.
        std::set<int> merged;
        std::vector<std::set<int>> next;
        for (auto& s : scopes) {
            if (s.count(best) > 0) {
                merged.insert(s.begin(), s.end());
            } else {
                next.push_back(std::move(s));
            }
        }
        merged.erase(best);
        if (!merged.empty()) next.push_back(std::move(merged));
        scopes = std::move(next);
    }

    return run_elimination(bn, q, std::move(factors), order);
}

std::vector<double> eliminate_with_order(const BayesianNetwork& bn, const std::string& query,
                                         const Evidence& evidence,
                                         const std::vector<std::string>& order) {
    const int q = bn.dag.require_index(query);
    if (evidence.count(query) > 0) throw ValidationError("eliminate: query is also evidence");
    const auto evidence_by_index = resolve_evidence(bn, evidence);

    std::set<int> expected;
    for (int v = 0; v < static_cast<int>(bn.dag.node_count()); ++v) {
        if (v != q && evidence_by_index.count(v) == 0) expected.insert(v);
    }
    std::vector<int> order_idx;
    for (const auto& name : order) {
        const int v = bn.dag.require_index(name);
        if (expected.erase(v) == 0) {
            throw ValidationError("eliminate: order entry '" + name + "' repeated or not eliminable");
        }
        order_idx.push_back(v);
    }
    if (!expected.empty()) throw ValidationError("eliminate: order misses variables");

    return run_elimination(bn, q, evidence_restricted_factors(bn, evidence_by_index), order_idx);
}

std::map<std::string, std::vector<double>> all_marginals(const BayesianNetwork& bn) {
    std::map<std::string, std::vector<double>> out;
    for (const auto& node : bn.dag.nodes()) out[node] = eliminate(bn, node, {});
    return out;
}

Factor brute_force_joint(const BayesianNetwork& bn) {
    Factor joint;
    joint.scope.resize(bn.dag.node_count());
    joint.card.resize(bn.dag.node_count());
    std::size_t cells = 1;
    for (std::size_t v = 0; v < bn.dag.node_count(); ++v) {
        joint.scope[v] = static_cast<int>(v);
        joint.card[v] = bn.cardinality(static_cast<int>(v));
        cells *= joint.card[v];
        if (cells > 1000000) throw Error("brute_force_joint: joint table exceeds 1e6 cells");
    }
    joint.values.resize(cells);

    std::size_t linear = 0;
    for_each_assignment(joint.card, [&](const std::vector<int>& assignment) {
        double p = 1.0;
        for (std::size_t v = 0; v < bn.dag.node_count(); ++v) {
            const Cpt& cpt = bn.cpts[v];
            std::size_t config = 0;
            for (int parent : cpt.parents) {
                config = config * bn.cardinality(parent) +
                         static_cast<std::size_t>(assignment[static_cast<std::size_t>(parent)]);
            }
            p *= cpt.rows[config][static_cast<std::size_t>(assignment[v])];
        }
        joint.values[linear++] = p;
    });
    return joint;
}

MarkovBlanket markov_blanket(const Dag& dag, const std::string& target) {
    const int t = dag.require_index(target);

    std::set<int> parents(dag.parents(t).begin(), dag.parents(t).end());
    std::set<int> children(dag.children(t).begin(), dag.children(t).end());
    std::set<int> spouses;
    for (int child : children) {
        for (int p : dag.parents(child)) {
            if (p != t && parents.count(p) == 0 && children.count(p) == 0) spouses.insert(p);
        }
    }

    MarkovBlanket mb;
    mb.target = target;
    const auto names_of = [&](const std::set<int>& ids) {
        std::vector<std::string> names;
        for (int i : ids) names.push_back(dag.nodes()[static_cast<std::size_t>(i)]);
        std::sort(names.begin(), names.end());
        return names;
    };
    mb.parents = names_of(parents);
    mb.children = names_of(children);
    mb.spouses = names_of(spouses);

    std::set<int> closure{t};
    closure.insert(parents.begin(), parents.end());
    closure.insert(children.begin(), children.end());
    closure.insert(spouses.begin(), spouses.end());
    for (const auto& [u, v] : dag.edges()) {
        if (closure.count(u) > 0 && closure.count(v) > 0) {
            mb.edges.emplace_back(dag.nodes()[static_cast<std::size_t>(u)],
                                  dag.nodes()[static_cast<std::size_t>(v)]);
        }
    }
    std::sort(mb.edges.begin(), mb.edges.end());
    return mb;
}

std::vector<std::string> MarkovBlanket::members() const {
    std::vector<std::string> out = parents;
    out.insert(out.end(), children.begin(), children.end());
    out.insert(out.end(), spouses.begin(), spouses.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::string markov_blanket_to_dot(const MarkovBlanket& mb) {
    std::string out = "digraph markov_blanket {\n";
    out += "  \"" + mb.target + "\" [peripheries=2];\n";
    for (const auto& m : mb.members()) out += "  \"" + m + "\";\n";
    for (const auto& [u, v] : mb.edges) out += "  \"" + u + "\" -> \"" + v + "\";\n";
    out += "}\n";
    return out;
}

}  // namespace localbn
