#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "localbn/inference.hpp"
#include "support.hpp"

using namespace localbn;

namespace {

// A -> B over binary alphabets {"0","1"} with the given success chances.
BayesianNetwork chain_ab(double a1, double b1_a0, double b1_a1) {
    BayesianNetwork bn;
    bn.dag = Dag({"A", "B"});
    bn.dag.add_edge(0, 1);
    bn.alphabets = {{"0", "1"}, {"0", "1"}};
    Cpt a;
    a.child = 0;
    a.rows = {{1.0 - a1, a1}};
    Cpt b;
    b.child = 1;
    b.parents = {0};
    b.rows = {{1.0 - b1_a0, b1_a0}, {1.0 - b1_a1, b1_a1}};
    bn.cpts = {a, b};
    bn.validate();
    return bn;
}

// X1 -> Y <- X2; y1[config] = P(Y=1 | config) with X1 the slow parent.
BayesianNetwork collider_bn(double x1p, double x2p, const std::array<double, 4>& y1) {
    BayesianNetwork bn;
    bn.dag = Dag({"X1", "X2", "Y"});
    bn.dag.add_edge(0, 2);
    bn.dag.add_edge(1, 2);
    bn.alphabets = {{"0", "1"}, {"0", "1"}, {"0", "1"}};
    Cpt a;
    a.child = 0;
    a.rows = {{1.0 - x1p, x1p}};
    Cpt b;
    b.child = 1;
    b.rows = {{1.0 - x2p, x2p}};
    Cpt y;
    y.child = 2;
    y.parents = {0, 1};
    for (double p : y1) y.rows.push_back({1.0 - p, p});
    bn.cpts = {a, b, y};
    bn.validate();
    return bn;
}

}  // namespace

TEST_CASE("factor primitives agree with a hand-indexed table") {
    const BayesianNetwork bn = chain_ab(0.3, 0.2, 0.9);
    const Factor fb = factor_from_cpt(bn, 1);
    CHECK(fb.scope == std::vector<int>{0, 1});
    CHECK(fb.table_size() == 4);
    CHECK(fb.at({0, 0}) == 0.8);
    CHECK(fb.at({0, 1}) == 0.2);
    CHECK(fb.at({1, 1}) == 0.9);

    const Factor fa = factor_from_cpt(bn, 0);
    const Factor joint = factor_product(fa, fb);
    CHECK(joint.at({1, 1}) == doctest::Approx(0.3 * 0.9).epsilon(1e-12));

    const Factor pb = factor_sum_out(joint, 0);
    CHECK(pb.scope == std::vector<int>{1});
    CHECK(pb.values[1] == doctest::Approx(0.41).epsilon(1e-12));

    const Factor restricted = factor_restrict(joint, 0, 1);
    CHECK(restricted.scope == std::vector<int>{1});
    CHECK(restricted.values[1] == doctest::Approx(0.27).epsilon(1e-12));
}

TEST_CASE("a uniform chain stays uniform") {
    const BayesianNetwork bn = chain_ab(0.5, 0.5, 0.5);
    const auto pb = eliminate(bn, "B");
    CHECK(pb[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pb[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("two-node chain marginal and posterior match hand arithmetic") {
    // P(B=1) = 0.3 * 0.9 + 0.7 * 0.2 = 0.41; P(A=1 | B=1) = 0.27 / 0.41.
    const BayesianNetwork bn = chain_ab(0.3, 0.2, 0.9);
    const auto pb = eliminate(bn, "B");
    CHECK(pb[1] == doctest::Approx(0.41).epsilon(1e-9));

    const auto pa_given_b1 = eliminate(bn, "A", {{"B", "1"}});
    CHECK(pa_given_b1[1] == doctest::Approx(0.27 / 0.41).epsilon(1e-9));
}

TEST_CASE("collider prior marginal matches direct enumeration") {
    const std::array<double, 4> y1{0.05, 0.6, 0.7, 0.95};
    const BayesianNetwork bn = collider_bn(0.3, 0.6, y1);
    double expect = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double pa = a == 1 ? 0.3 : 0.7;
            const double pb = b == 1 ? 0.6 : 0.4;
            expect += pa * pb * y1[static_cast<std::size_t>(a * 2 + b)];
        }
    }
    CHECK(eliminate(bn, "Y")[1] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("elimination matches the enumeration oracle on random networks") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        const BayesianNetwork bn = testsupport::random_network(rng);
        const Factor joint = brute_force_joint(bn);
        const int n = static_cast<int>(bn.dag.node_count());

        // Prior marginal of every variable.
        for (int v = 0; v < n; ++v) {
            const auto got = eliminate(bn, bn.dag.nodes()[static_cast<std::size_t>(v)]);
            const auto want = testsupport::joint_conditional(joint, v, {});
            REQUIRE(got.size() == want.size());
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-9));
            }
        }

        // Posterior under one or two random evidence assignments.
        if (n < 2) continue;
        const int query = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        std::map<int, int> given;
        Evidence evidence;
        const int want_evidence = 1 + static_cast<int>(rng() % 2);
        for (int v = 0; v < n && static_cast<int>(given.size()) < want_evidence; ++v) {
            if (v == query) continue;
            const int value = static_cast<int>(rng() % bn.cardinality(v));
            given[v] = value;
            evidence[bn.dag.nodes()[static_cast<std::size_t>(v)]] =
                bn.alphabets[static_cast<std::size_t>(v)][static_cast<std::size_t>(value)];
        }
        const auto got = eliminate(bn, bn.dag.nodes()[static_cast<std::size_t>(query)], evidence);
        const auto want = testsupport::joint_conditional(joint, query, given);
        REQUIRE_FALSE(want.empty());  // positive CPTs leave no zero-mass events
        for (std::size_t k = 0; k < got.size(); ++k) {
            CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-9));
        }
    }
}

TEST_CASE("all_marginals covers every variable with a proper distribution") {
    std::mt19937_64 rng(55);
    const BayesianNetwork bn = testsupport::random_network(rng);
    const auto marginals = all_marginals(bn);
    CHECK(marginals.size() == bn.dag.node_count());
    for (const auto& node : bn.dag.nodes()) {
        REQUIRE(marginals.count(node) == 1);
        const auto& p = marginals.at(node);
        double total = 0.0;
        for (double x : p) total += x;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        const auto direct = eliminate(bn, node);
        for (std::size_t k = 0; k < p.size(); ++k) {
            CHECK(p[k] == doctest::Approx(direct[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("marginals of parentless variables reproduce their tables") {
    BayesianNetwork bn;
    bn.dag = Dag({"A", "C"});  // two isolated roots
    bn.alphabets = {{"0", "1"}, {"x", "y", "z"}};
    Cpt a;
    a.child = 0;
    a.rows = {{0.3, 0.7}};
    Cpt c;
    c.child = 1;
    c.rows = {{0.2, 0.5, 0.3}};
    bn.cpts = {a, c};
    bn.validate();

    const auto marginals = all_marginals(bn);
    CHECK(marginals.at("A") == std::vector<double>{0.3, 0.7});
    CHECK(marginals.at("C") == std::vector<double>{0.2, 0.5, 0.3});
}

TEST_CASE("the enumerated joint behaves like a joint distribution") {
    SUBCASE("independent fair coins give four equal cells") {
        BayesianNetwork bn;
        bn.dag = Dag({"A", "B"});
        bn.alphabets = {{"0", "1"}, {"0", "1"}};
        Cpt a;
        a.child = 0;
        a.rows = {{0.5, 0.5}};
        Cpt b;
        b.child = 1;
        b.rows = {{0.5, 0.5}};
        bn.cpts = {a, b};
        bn.validate();
        const Factor joint = brute_force_joint(bn);
        REQUIRE(joint.values.size() == 4);
        for (double v : joint.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    }

    SUBCASE("a deterministic copy has zero off-diagonal mass") {
        const BayesianNetwork bn = chain_ab(0.5, 0.0, 1.0);  // B == A
        const Factor joint = brute_force_joint(bn);
        CHECK(joint.at({0, 1}) == 0.0);
        CHECK(joint.at({1, 0}) == 0.0);
        CHECK(joint.at({0, 0}) == 0.5);
        CHECK(joint.at({1, 1}) == 0.5);
    }

    SUBCASE("collider cells factor into their three terms") {
        const std::array<double, 4> y1{0.05, 0.6, 0.7, 0.95};
        const BayesianNetwork bn = collider_bn(0.3, 0.6, y1);
        const Factor joint = brute_force_joint(bn);
        CHECK(joint.at({1, 0, 1}) == doctest::Approx(0.3 * 0.4 * 0.7).epsilon(1e-12));
        CHECK(joint.at({0, 1, 0}) == doctest::Approx(0.7 * 0.6 * 0.4).epsilon(1e-12));
    }

    SUBCASE("cells sum to one on random networks") {
        std::mt19937_64 rng(303);
        for (int trial = 0; trial < 5; ++trial) {
            const Factor joint = brute_force_joint(testsupport::random_network(rng));
            double total = 0.0;
            for (double v : joint.values) total += v;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
    }

    SUBCASE("oversized joints are refused") {
        const int n = 21;  // 2^21 cells
        std::vector<std::string> names;
        for (int v = 0; v < n; ++v) names.push_back("v" + std::to_string(v));
        BayesianNetwork bn;
        bn.dag = Dag(names);
        for (int v = 0; v < n; ++v) {
            bn.alphabets.push_back({"0", "1"});
            Cpt cpt;
            cpt.child = v;
            cpt.rows = {{0.5, 0.5}};
            bn.cpts.push_back(std::move(cpt));
        }
        bn.validate();
        CHECK_THROWS_AS(brute_force_joint(bn), Error);
    }
}

TEST_CASE("any valid elimination order gives the same exact answer") {
    std::mt19937_64 rng(909);
    for (int trial = 0; trial < 10; ++trial) {
        const BayesianNetwork bn = testsupport::random_network(rng);
        const int n = static_cast<int>(bn.dag.node_count());
        const std::string query = bn.dag.nodes()[rng() % static_cast<std::uint64_t>(n)];
        const auto reference = eliminate(bn, query);

        std::vector<std::string> order;
        for (const auto& node : bn.dag.nodes()) {
            if (node != query) order.push_back(node);
        }
        for (int shuffle = 0; shuffle < 3; ++shuffle) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[rng() % i]);
            }
            const auto got = eliminate_with_order(bn, query, {}, order);
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got[k] == doctest::Approx(reference[k]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("caller-supplied orders are strictly validated") {
    const BayesianNetwork bn = collider_bn(0.3, 0.6, {0.05, 0.6, 0.7, 0.95});
    CHECK_THROWS_AS(eliminate_with_order(bn, "Y", {}, {"X1"}), ValidationError);  // misses X2
    CHECK_THROWS_AS(eliminate_with_order(bn, "Y", {}, {"X1", "X1"}), ValidationError);
    CHECK_THROWS_AS(eliminate_with_order(bn, "Y", {}, {"X1", "X2", "Y"}), ValidationError);
    CHECK_THROWS_AS(eliminate_with_order(bn, "Y", {}, {"X1", "ghost"}), ValidationError);
    CHECK_NOTHROW(eliminate_with_order(bn, "Y", {}, {"X2", "X1"}));
}

TEST_CASE("evidence handling rejects bad queries and zero-mass events") {
    const BayesianNetwork bn = chain_ab(0.3, 0.2, 0.9);
    CHECK_THROWS_AS(eliminate(bn, "ghost"), ValidationError);
    CHECK_THROWS_AS(eliminate(bn, "B", {{"ghost", "1"}}), ValidationError);
    CHECK_THROWS_AS(eliminate(bn, "B", {{"A", "purple"}}), ValidationError);
    CHECK_THROWS_AS(eliminate(bn, "B", {{"B", "1"}}), ValidationError);

    // A is deterministically "0", so evidence A="1" has no mass.
    const BayesianNetwork hard = chain_ab(0.0, 0.2, 0.9);
    try {
        eliminate(hard, "B", {{"A", "1"}});
        FAIL("expected zero-mass evidence to throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("zero probability") != std::string::npos);
    }
}

TEST_CASE("markov blankets of textbook shapes") {
    SUBCASE("isolated node") {
        Dag with_isolated({"A", "B", "C"});
        with_isolated.add_edge(0, 1);
        const MarkovBlanket mb = markov_blanket(with_isolated, "C");
        CHECK(mb.empty());
        CHECK(mb.members().empty());
        CHECK(mb.edges.empty());
    }
    SUBCASE("collider") {
        Dag dag({"X1", "X2", "Y"});
        dag.add_edge(0, 2);
        dag.add_edge(1, 2);
        const MarkovBlanket of_y = markov_blanket(dag, "Y");
        CHECK(of_y.parents == std::vector<std::string>{"X1", "X2"});
        CHECK(of_y.children.empty());
        CHECK(of_y.spouses.empty());
        CHECK(of_y.members() == std::vector<std::string>{"X1", "X2"});

        const MarkovBlanket of_x1 = markov_blanket(dag, "X1");
        CHECK(of_x1.children == std::vector<std::string>{"Y"});
        CHECK(of_x1.spouses == std::vector<std::string>{"X2"});  // co-parent via Y
        CHECK(of_x1.members() == std::vector<std::string>{"X2", "Y"});
        const std::vector<std::pair<std::string, std::string>> expect{{"X1", "Y"}, {"X2", "Y"}};
        CHECK(of_x1.edges == expect);
    }
    SUBCASE("chain shields distant ancestors") {
        Dag dag({"A", "B", "C"});
        dag.add_edge(0, 1);
        dag.add_edge(1, 2);
        const MarkovBlanket of_b = markov_blanket(dag, "B");
        CHECK(of_b.parents == std::vector<std::string>{"A"});
        CHECK(of_b.children == std::vector<std::string>{"C"});
        CHECK(of_b.spouses.empty());
        // C's blanket is only its parent; A is screened off.
        CHECK(markov_blanket(dag, "C").members() == std::vector<std::string>{"B"});
    }
    SUBCASE("unknown target") {
        Dag dag({"A"});
        CHECK_THROWS_AS(markov_blanket(dag, "nope"), ValidationError);
    }
}

TEST_CASE("blanket sets partition cleanly on random graphs") {
    std::mt19937_64 rng(2222);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 6);
        std::vector<std::string> names;
        for (int v = 0; v < n; ++v) names.push_back("n" + std::to_string(v));
        const Dag dag = testsupport::dag_from_edges(names, testsupport::random_edges(rng, n));

        for (const auto& target : names) {
            const MarkovBlanket mb = markov_blanket(dag, target);
            std::set<std::string> all;
            for (const auto& group : {mb.parents, mb.children, mb.spouses}) {
                for (const auto& name : group) {
                    CHECK(name != target);
                    CHECK(all.insert(name).second);  // disjoint across the three sets
                }
            }
            const std::vector<std::string> members = mb.members();
            CHECK(members.size() == all.size());
            CHECK(std::is_sorted(members.begin(), members.end()));

            // Spouses really are other parents of the target's children.
            const int t = dag.require_index(target);
            std::set<std::string> expected_spouses;
            for (int child : dag.children(t)) {
                for (int p : dag.parents(child)) {
                    const std::string& name = dag.nodes()[static_cast<std::size_t>(p)];
                    if (p == t) continue;
                    if (std::count(mb.parents.begin(), mb.parents.end(), name) > 0) continue;
                    if (std::count(mb.children.begin(), mb.children.end(), name) > 0) continue;
                    expected_spouses.insert(name);
                }
            }
            CHECK(std::set<std::string>(mb.spouses.begin(), mb.spouses.end()) == expected_spouses);
        }
    }
}

TEST_CASE("the blanket really shields the target in a collider network") {
    const BayesianNetwork bn = collider_bn(0.3, 0.6, {0.05, 0.6, 0.7, 0.95});
    const Factor joint = brute_force_joint(bn);
    // P(X1 | X2, Y) from the joint equals elimination with full evidence.
    for (int x2 = 0; x2 < 2; ++x2) {
        for (int y = 0; y < 2; ++y) {
            const auto want = testsupport::joint_conditional(joint, 0, {{1, x2}, {2, y}});
            const auto got = eliminate(bn, "X1",
                                       {{"X2", x2 ? "1" : "0"}, {"Y", y ? "1" : "0"}});
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("blanket DOT output double-borders the target") {
    Dag dag({"X1", "X2", "Y"});
    dag.add_edge(0, 2);
    dag.add_edge(1, 2);
    const std::string dot = markov_blanket_to_dot(markov_blanket(dag, "Y"));
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("\"Y\" [peripheries=2];") != std::string::npos);
    CHECK(dot.find("\"X1\" -> \"Y\";") != std::string::npos);
}
