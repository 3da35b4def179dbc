#include "localbn/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "localbn/errors.hpp"
#include "localbn/util.hpp"
#include <json.hpp>

namespace localbn {

namespace {

using SteadyClock = std::chrono::steady_clock;

double ms_between(SteadyClock::time_point from, SteadyClock::time_point to) {
    return std::chrono::duration<double, std::milli>(to - from).count();
}

TopologyPattern pattern_from_string(const std::string& name) {
    if (name == "common_effect") return TopologyPattern::CommonEffect;
    if (name == "common_cause") return TopologyPattern::CommonCause;
    if (name == "mixed") return TopologyPattern::Mixed;
    if (name == "isolated") return TopologyPattern::Isolated;
    throw ValidationError("unknown topology pattern '" + name + "'");
}

Rule rule_from_string(const std::string& name) {
    if (name == "R1_high_confidence") return Rule::R1HighConfidence;
    if (name == "R2_unreliable") return Rule::R2Unreliable;
    if (name == "R3_contrast") return Rule::R3Contrast;
    if (name == "R4_uncertain") return Rule::R4Uncertain;
    throw ValidationError("unknown rule name '" + name + "'");
}

}  // namespace

void ExplainConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw ValidationError("epsilon must be in [0,1], got " + format_double(epsilon));
    }
    if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
    if (quartiles < 2) throw ValidationError("quartiles must be >= 2");
    if (!(tau > 0.5 && tau <= 1.0)) {
        throw ValidationError("tau must be in (0.5, 1], got " + format_double(tau));
    }
    if (max_parents < 1) throw ValidationError("max_parents must be >= 1");
    if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (!(alpha > 0.0)) throw ValidationError("alpha must be > 0, got " + format_double(alpha));
    if (class_var.empty()) throw ValidationError("class_var must be non-empty");
}

namespace {

// Shared tail of explain()/explain_sample(): everything after the labeled
// neighborhood exists.
ExplanationReport explain_core(const FeatureVector& x, const ClassDistribution& blackbox,
                               const LabeledSample& sample, const ExplainConfig& cfg) {
    ExplanationReport report;
    report.input = x;
    report.config = cfg;
    report.blackbox_distribution = blackbox;
    report.predicted_label = blackbox.argmax_label();
    report.label_counts = label_histogram(sample);
    report.single_class_sample = report.label_counts.size() == 1;

    auto t0 = SteadyClock::now();
    report.binning = fit_bins(sample, cfg.quartiles);
    DiscreteDataset data = apply_bins(sample, report.binning);
    auto t1 = SteadyClock::now();
    report.timing_ms["discretization"] = ms_between(t0, t1);

    SearchConfig search;
    search.max_parents = cfg.max_parents;
    search.max_iterations = cfg.max_iterations;
    Dag dag = hill_climb(data, search);
    auto t2 = SteadyClock::now();
    report.timing_ms["structure_search"] = ms_between(t1, t2);

    report.network = fit_parameters(data, dag, cfg.alpha);
    auto t3 = SteadyClock::now();
    report.timing_ms["parameter_fit"] = ms_between(t2, t3);

    report.marginals = all_marginals(report.network);
    report.blanket = markov_blanket(dag, cfg.class_var);
    report.topology = classify_topology(dag, cfg.class_var);
    report.view =
        data.variables.size() <= kFullNetworkNodeLimit ? "full_network" : "markov_blanket";

    if (report.single_class_sample) {
        // Unanimous neighborhood: the surrogate's one-letter class variable
        // cannot disagree with anything, so the verdict is fixed at high
        // confidence with the full posterior mass on the observed label.
        const std::string& unanimous = sample.labels.front();
        RuleVerdict verdict;
        verdict.rule = Rule::R1HighConfidence;
        verdict.predicted_label = report.predicted_label;
        verdict.surrogate_argmax = unanimous;
        verdict.surrogate_posterior.labels = blackbox.labels;
        verdict.surrogate_posterior.probabilities.assign(blackbox.labels.size(), 0.0);
        bool found = false;
        for (std::size_t i = 0; i < blackbox.labels.size(); ++i) {
            if (blackbox.labels[i] == unanimous) {
                verdict.surrogate_posterior.probabilities[i] = 1.0;
                found = true;
            }
        }
        if (!found) {
            verdict.surrogate_posterior.labels.push_back(unanimous);
            verdict.surrogate_posterior.probabilities.push_back(1.0);
        }
        verdict.threshold_used = cfg.tau;
        verdict.topology = report.topology;
        report.verdict = verdict;
    } else {
        ClassDistribution surrogate;
        surrogate.labels = data.alphabets[data.class_index];
        surrogate.probabilities = report.marginals.at(cfg.class_var);
        if (std::find(surrogate.labels.begin(), surrogate.labels.end(), report.predicted_label) ==
            surrogate.labels.end()) {
            // The black box's label never showed up in the neighborhood;
            // give it zero mass so the disagreement surfaces as a verdict.
            surrogate.labels.push_back(report.predicted_label);
            surrogate.probabilities.push_back(0.0);
        }
        report.verdict =
            classify_rule(dag, cfg.class_var, surrogate, report.predicted_label, cfg.tau);
    }
    auto t4 = SteadyClock::now();
    report.timing_ms["inference"] = ms_between(t3, t4);
    return report;
}

}  // namespace

ExplanationReport explain(const FeatureVector& x, const Predictor& model,
                          const ExplainConfig& cfg) {
    cfg.validate();
    x.validate();

    auto t0 = SteadyClock::now();
    ClassDistribution blackbox = model.predict(x);
    blackbox.validate();

    PermutationConfig pcfg;
    pcfg.epsilon = cfg.epsilon;
    pcfg.n_samples = cfg.n_samples;
    pcfg.seed = cfg.seed;
    pcfg.include_original = cfg.include_original;
    LabeledSample sample = generate_permutations(x, model, pcfg, cfg.class_var);
    auto t1 = SteadyClock::now();

    ExplanationReport report = explain_core(x, blackbox, sample, cfg);
    report.timing_ms["sampling"] = ms_between(t0, t1);
    report.timing_ms["total"] = ms_between(t0, SteadyClock::now());
    return report;
}

ExplanationReport explain_sample(const FeatureVector& x, const ClassDistribution& blackbox,
                                 const LabeledSample& sample, const ExplainConfig& cfg) {
    cfg.validate();
    x.validate();
    blackbox.validate();
    if (sample.feature_names != x.names) {
        throw ValidationError("sample feature names do not match the input vector");
    }
    if (sample.class_name != cfg.class_var) {
        throw ValidationError("sample class name '" + sample.class_name +
                              "' does not match configured class_var '" + cfg.class_var + "'");
    }
    if (sample.rows.empty()) throw ValidationError("sample has no rows");
    if (sample.rows.size() != sample.labels.size()) {
        throw ValidationError("sample rows and labels differ in length");
    }

    auto t0 = SteadyClock::now();
    ExplanationReport report = explain_core(x, blackbox, sample, cfg);
    report.timing_ms["total"] = ms_between(t0, SteadyClock::now());
    return report;
}

// ---------------------------------------------------------------------------
// Batch harness

int TabularDataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
}

TabularDataset load_tabular_csv(std::istream& in) {
    TabularDataset data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = csv_split_line(line);
        if (data.columns.empty()) {
            data.columns = std::move(cells);
            continue;
        }
        if (cells.size() != data.columns.size()) {
            throw ValidationError("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(data.columns.size()) + " cells, got " +
                                  std::to_string(cells.size()));
        }
        data.rows.push_back(std::move(cells));
    }
    if (data.columns.empty()) throw ValidationError("csv input has no header row");
    std::set<std::string> seen;
    for (const auto& column : data.columns) {
        if (column.empty()) throw ValidationError("csv header contains an empty column name");
        if (!seen.insert(column).second) {
            throw ValidationError("csv header repeats column '" + column + "'");
        }
    }
    return data;
}

TabularDataset load_tabular_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset file: " + path);
    return load_tabular_csv(in);
}

std::string confusion_cell(const std::string& truth, const std::string& predicted,
                           const std::string& positive_label) {
    const bool truth_positive = truth == positive_label;
    const bool predicted_positive = predicted == positive_label;
    if (truth_positive) return predicted_positive ? "TP" : "FN";
    return predicted_positive ? "FP" : "TN";
}

std::vector<BatchResult> batch_explain(const TabularDataset& data, const std::string& label_col,
                                       const Predictor& model, const ExplainConfig& cfg,
                                       const std::string& positive_label) {
    cfg.validate();
    const int label_idx = data.column_index(label_col);
    if (label_idx < 0) {
        throw ValidationError("label column '" + label_col + "' is not in the dataset header");
    }
    const auto model_labels = model.labels();
    if (model_labels.empty()) throw ValidationError("model declares no labels");
    const std::string positive = positive_label.empty() ? model_labels.front() : positive_label;

    std::vector<BatchResult> results;
    results.reserve(data.rows.size());
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        FeatureVector x;
        for (std::size_t c = 0; c < data.columns.size(); ++c) {
            if (static_cast<int>(c) == label_idx) continue;
            const std::string& cell = data.rows[r][c];
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw ValidationError("dataset row " + std::to_string(r + 1) + ", column '" +
                                      data.columns[c] + "': '" + cell + "' is not a number");
            }
            x.names.push_back(data.columns[c]);
            x.values.push_back(value);
        }
        try {
            x.validate();
        } catch (const Error& e) {
            throw ValidationError("dataset row " + std::to_string(r + 1) + ": " + e.what());
        }

        ExplainConfig row_cfg = cfg;
        row_cfg.seed = derive_seed(cfg.seed, r);
        BatchResult result;
        result.report = explain(x, model, row_cfg);
        result.truth_label = data.rows[r][static_cast<std::size_t>(label_idx)];
        result.confusion_cell =
            confusion_cell(result.truth_label, result.report.predicted_label, positive);
        results.push_back(std::move(result));
    }
    return results;
}

namespace {

nlohmann::json cells_to_json(const std::map<std::string, SweepCellStats>& cells) {
    auto out = nlohmann::json::object();
    for (const auto& [cell, stats] : cells) {
        nlohmann::json value;
        value["count"] = stats.total;
        if (stats.total == 0) {
            value["empty"] = true;
        } else {
            auto rules = nlohmann::json::object();
            for (int r = 0; r < 4; ++r) {
                const auto count = stats.rule_counts[static_cast<std::size_t>(r)];
                rules[to_string(static_cast<Rule>(r))] = {
                    {"count", count}, {"fraction", static_cast<double>(count) / stats.total}};
            }
            value["rules"] = rules;
        }
        out[cell] = value;
    }
    return out;
}

std::map<std::string, SweepCellStats> tally_cells(const std::vector<BatchResult>& results) {
    static const char* const kCellNames[] = {"TP", "TN", "FP", "FN"};
    std::map<std::string, SweepCellStats> cells;
    for (const char* name : kCellNames) cells[name];
    for (const auto& result : results) {
        auto& stats = cells[result.confusion_cell];
        ++stats.total;
        ++stats.rule_counts[static_cast<std::size_t>(result.report.verdict.rule)];
    }
    return cells;
}

}  // namespace

std::string batch_to_json(const std::vector<BatchResult>& results, const std::string& label_col,
                          const std::string& positive_label) {
    nlohmann::json doc;
    doc["label_col"] = label_col;
    doc["positive_label"] = positive_label;
    auto rows = nlohmann::json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        rows.push_back({{"row", i + 1},
                        {"cell", results[i].confusion_cell},
                        {"truth", results[i].truth_label},
                        {"report", nlohmann::json::parse(report_to_json(results[i].report))}});
    }
    doc["results"] = rows;
    doc["summary"] = cells_to_json(tally_cells(results));
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Epsilon sweep harness

double SweepSummary::rule_fraction(std::size_t epsilon_index, Rule rule) const {
    const auto& cells = per_epsilon.at(epsilon_index);
    int total = 0;
    int hits = 0;
    for (const auto& [cell, stats] : cells) {
        total += stats.total;
        hits += stats.rule_counts[static_cast<std::size_t>(rule)];
    }
    return total == 0 ? 0.0 : static_cast<double>(hits) / total;
}

SweepSummary epsilon_sweep(const TabularDataset& data, const std::string& label_col,
                           const Predictor& model, const std::vector<double>& epsilons,
                           const ExplainConfig& cfg, const std::string& positive_label,
                           const std::string& dataset_id, const std::string& model_id) {
    cfg.validate();
    if (epsilons.empty()) throw ValidationError("epsilon sweep needs at least one epsilon");
    for (double epsilon : epsilons) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
            throw ValidationError("sweep epsilon must be in [0,1], got " + format_double(epsilon));
        }
    }

    SweepSummary summary;
    summary.epsilons = epsilons;
    summary.dataset_id = dataset_id;
    summary.model_id = model_id;
    summary.seed = cfg.seed;

    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        ExplainConfig run_cfg = cfg;
        run_cfg.epsilon = epsilons[i];
        run_cfg.seed = derive_seed(cfg.seed, i);
        summary.per_epsilon.push_back(
            tally_cells(batch_explain(data, label_col, model, run_cfg, positive_label)));
    }
    return summary;
}

std::string sweep_to_json(const SweepSummary& summary) {
    nlohmann::json doc;
    doc["dataset"] = summary.dataset_id;
    doc["model"] = summary.model_id;
    doc["seed"] = summary.seed;
    doc["epsilons"] = summary.epsilons;
    auto results = nlohmann::json::array();
    for (std::size_t i = 0; i < summary.per_epsilon.size(); ++i) {
        results.push_back({{"epsilon", summary.epsilons[i]},
                           {"cells", cells_to_json(summary.per_epsilon[i])}});
    }
    doc["results"] = results;
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Rendering

ReportFormat parse_report_format(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "dot") return ReportFormat::Dot;
    if (name == "text") return ReportFormat::Text;
    throw ValidationError("unknown report format '" + name + "' (expected json, dot or text)");
}

std::string report_to_json(const ExplanationReport& report) {
    nlohmann::json doc;
    doc["input"] = {{"names", report.input.names}, {"values", report.input.values}};
    doc["predicted_label"] = report.predicted_label;
    doc["blackbox"] = {{"labels", report.blackbox_distribution.labels},
                       {"probabilities", report.blackbox_distribution.probabilities}};
    doc["config"] = {{"alpha", report.config.alpha},
                     {"class_var", report.config.class_var},
                     {"epsilon", report.config.epsilon},
                     {"include_original", report.config.include_original},
                     {"max_iterations", report.config.max_iterations},
                     {"max_parents", report.config.max_parents},
                     {"n_samples", report.config.n_samples},
                     {"quantile_interpolation", "linear"},
                     {"quartiles", report.config.quartiles},
                     {"seed", report.config.seed},
                     {"tau", report.config.tau}};
    auto cuts = nlohmann::json::object();
    auto bins = nlohmann::json::object();
    for (std::size_t j = 0; j < report.binning.feature_names.size(); ++j) {
        cuts[report.binning.feature_names[j]] = report.binning.cuts[j];
        bins[report.binning.feature_names[j]] = report.binning.bin_labels[j];
    }
    doc["binning"] = {{"feature_names", report.binning.feature_names},
                      {"cuts", cuts},
                      {"bin_labels", bins},
                      {"quartiles", report.binning.quartiles}};
    doc["network"] = nlohmann::json::parse(bn_to_json(report.network));
    doc["view"] = report.view;
    auto blanket_edges = nlohmann::json::array();
    for (const auto& [u, v] : report.blanket.edges) {
        blanket_edges.push_back(nlohmann::json::array({u, v}));
    }
    doc["blanket"] = {{"target", report.blanket.target},
                      {"parents", report.blanket.parents},
                      {"children", report.blanket.children},
                      {"spouses", report.blanket.spouses},
                      {"members", report.blanket.members()},
                      {"edges", blanket_edges}};
    auto marginals = nlohmann::json::object();
    for (const auto& [variable, probabilities] : report.marginals) {
        const int v = report.network.dag.index_of(variable);
        if (v < 0) throw ValidationError("marginal for unknown variable '" + variable + "'");
        auto entry = nlohmann::json::object();
        const auto& alphabet = report.network.alphabets[static_cast<std::size_t>(v)];
        for (std::size_t k = 0; k < probabilities.size(); ++k) {
            entry[alphabet[k]] = probabilities[k];
        }
        marginals[variable] = entry;
    }
    doc["marginals"] = marginals;
    doc["topology"] = {{"pattern", to_string(report.topology.pattern)},
                       {"in_degree", report.topology.in_degree},
                       {"out_degree", report.topology.out_degree}};
    doc["verdict"] = {{"rule", to_string(report.verdict.rule)},
                      {"predicted_label", report.verdict.predicted_label},
                      {"surrogate_argmax", report.verdict.surrogate_argmax},
                      {"posterior", {{"labels", report.verdict.surrogate_posterior.labels},
                                     {"probabilities",
                                      report.verdict.surrogate_posterior.probabilities}}},
                      {"threshold", report.verdict.threshold_used},
                      {"topology", to_string(report.verdict.topology.pattern)}};
    doc["label_counts"] = report.label_counts;
    doc["single_class_sample"] = report.single_class_sample;
    doc["timing_ms"] = report.timing_ms;
    return doc.dump(2);
}

ExplanationReport report_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("report is not valid JSON: ") + e.what());
    }
    try {
        ExplanationReport report;
        report.input.names = doc.at("input").at("names").get<std::vector<std::string>>();
        report.input.values = doc.at("input").at("values").get<std::vector<double>>();
        report.predicted_label = doc.at("predicted_label").get<std::string>();
        report.blackbox_distribution.labels =
            doc.at("blackbox").at("labels").get<std::vector<std::string>>();
        report.blackbox_distribution.probabilities =
            doc.at("blackbox").at("probabilities").get<std::vector<double>>();

        const auto& cfg = doc.at("config");
        report.config.alpha = cfg.at("alpha").get<double>();
        report.config.class_var = cfg.at("class_var").get<std::string>();
        report.config.epsilon = cfg.at("epsilon").get<double>();
        report.config.include_original = cfg.at("include_original").get<bool>();
        report.config.max_iterations = cfg.at("max_iterations").get<int>();
        report.config.max_parents = cfg.at("max_parents").get<int>();
        report.config.n_samples = cfg.at("n_samples").get<int>();
        report.config.quartiles = cfg.at("quartiles").get<int>();
        report.config.seed = cfg.at("seed").get<std::uint64_t>();
        report.config.tau = cfg.at("tau").get<double>();

        const auto& binning = doc.at("binning");
        report.binning.feature_names =
            binning.at("feature_names").get<std::vector<std::string>>();
        report.binning.quartiles = binning.at("quartiles").get<int>();
        for (const auto& name : report.binning.feature_names) {
            report.binning.cuts.push_back(
                binning.at("cuts").at(name).get<std::vector<double>>());
            report.binning.bin_labels.push_back(
                binning.at("bin_labels").at(name).get<std::vector<std::string>>());
        }

        report.network = bn_from_json(doc.at("network").dump());
        report.view = doc.at("view").get<std::string>();

        const auto& blanket = doc.at("blanket");
        report.blanket.target = blanket.at("target").get<std::string>();
        report.blanket.parents = blanket.at("parents").get<std::vector<std::string>>();
        report.blanket.children = blanket.at("children").get<std::vector<std::string>>();
        report.blanket.spouses = blanket.at("spouses").get<std::vector<std::string>>();
        for (const auto& edge : blanket.at("edges")) {
            report.blanket.edges.emplace_back(edge.at(0).get<std::string>(),
                                              edge.at(1).get<std::string>());
        }

        for (const auto& [variable, entry] : doc.at("marginals").items()) {
            const int v = report.network.dag.index_of(variable);
            if (v < 0) throw ValidationError("marginal for unknown variable '" + variable + "'");
            const auto& alphabet = report.network.alphabets[static_cast<std::size_t>(v)];
            std::vector<double> probabilities;
            probabilities.reserve(alphabet.size());
            for (const auto& category : alphabet) {
                probabilities.push_back(entry.at(category).get<double>());
            }
            report.marginals[variable] = std::move(probabilities);
        }

        const auto& topology = doc.at("topology");
        report.topology.pattern = pattern_from_string(topology.at("pattern").get<std::string>());
        report.topology.in_degree = topology.at("in_degree").get<int>();
        report.topology.out_degree = topology.at("out_degree").get<int>();

        const auto& verdict = doc.at("verdict");
        report.verdict.rule = rule_from_string(verdict.at("rule").get<std::string>());
        report.verdict.predicted_label = verdict.at("predicted_label").get<std::string>();
        report.verdict.surrogate_argmax = verdict.at("surrogate_argmax").get<std::string>();
        report.verdict.surrogate_posterior.labels =
            verdict.at("posterior").at("labels").get<std::vector<std::string>>();
        report.verdict.surrogate_posterior.probabilities =
            verdict.at("posterior").at("probabilities").get<std::vector<double>>();
        report.verdict.threshold_used = verdict.at("threshold").get<double>();
        report.verdict.topology = report.topology;

        report.label_counts = doc.at("label_counts").get<std::map<std::string, int>>();
        report.single_class_sample = doc.at("single_class_sample").get<bool>();
        report.timing_ms = doc.at("timing_ms").get<std::map<std::string, double>>();
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("report schema error: ") + e.what());
    }
}

namespace {

std::string dot_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

// Nodes within `depth` blanket hops of the target, target included.
std::set<std::string> blanket_closure(const Dag& dag, const std::string& target, int depth) {
    std::set<std::string> nodes{target};
    std::vector<std::string> frontier{target};
    for (int d = 0; d < depth && !frontier.empty(); ++d) {
        std::vector<std::string> next;
        for (const auto& node : frontier) {
            for (const auto& member : markov_blanket(dag, node).members()) {
                if (nodes.insert(member).second) next.push_back(member);
            }
        }
        frontier = std::move(next);
    }
    return nodes;
}

std::string dot_node_label(const ExplanationReport& report, const std::string& name) {
    const auto it = report.marginals.find(name);
    if (it == report.marginals.end() || it->second.empty()) {
        throw ValidationError("report carries no marginal for variable '" + name + "'");
    }
    const double mode = it->second[argmax_first(it->second)];
    return dot_escape(name) + "\\nP(mode)=" + format_fixed(mode, 4);
}

std::string render_dot(const ExplanationReport& report, int blanket_depth) {
    const Dag& dag = report.network.dag;
    const std::string& class_var = report.config.class_var;
    const bool full = report.view == "full_network";
    std::set<std::string> keep;
    if (!full) keep = blanket_closure(dag, class_var, blanket_depth);

    std::string out = "digraph explanation {\n";
    for (const auto& node : dag.nodes()) {
        if (!full && keep.count(node) == 0) continue;
        out += "  \"" + dot_escape(node) + "\" [label=\"" + dot_node_label(report, node) + "\"";
        if (node == class_var) out += ", peripheries=2";
        out += "];\n";
    }
    for (const auto& [u, v] : dag.edges()) {
        const auto& from = dag.nodes()[static_cast<std::size_t>(u)];
        const auto& to = dag.nodes()[static_cast<std::size_t>(v)];
        if (!full && (keep.count(from) == 0 || keep.count(to) == 0)) continue;
        out += "  \"" + dot_escape(from) + "\" -> \"" + dot_escape(to) + "\";\n";
    }
    out += "}\n";
    return out;
}

std::string render_text(const ExplanationReport& report, int blanket_depth) {
    std::ostringstream out;
    out << "prediction: " << report.predicted_label << " (black-box p="
        << format_fixed(report.blackbox_distribution.probability_of(report.predicted_label), 4)
        << ")\n";
    out << "verdict: " << to_string(report.verdict.rule) << " (threshold "
        << format_double(report.verdict.threshold_used) << ")\n";
    out << "surrogate posterior:";
    for (std::size_t i = 0; i < report.verdict.surrogate_posterior.labels.size(); ++i) {
        out << " " << report.verdict.surrogate_posterior.labels[i] << "="
            << format_fixed(report.verdict.surrogate_posterior.probabilities[i], 4);
    }
    out << "\n";
    out << "surrogate argmax: " << report.verdict.surrogate_argmax
        << (report.verdict.surrogate_argmax == report.predicted_label
                ? " (agrees with the black box)"
                : " (contradicts the black box)")
        << "\n";
    out << "class topology: " << to_string(report.topology.pattern) << " (in "
        << report.topology.in_degree << ", out " << report.topology.out_degree << ")\n";

    auto members = blanket_closure(report.network.dag, report.config.class_var, blanket_depth);
    members.erase(report.config.class_var);
    out << "markov blanket of " << report.config.class_var;
    if (blanket_depth > 1) out << " (depth " << blanket_depth << ")";
    out << ":";
    if (members.empty()) {
        out << " (none)";
    } else {
        for (const auto& member : members) out << " " << member;
    }
    out << "\n";
    out << "view: " << report.view << " (" << report.network.dag.node_count() << " variables)\n";

    int rows = 0;
    for (const auto& [label, count] : report.label_counts) rows += count;
    out << "sample: " << rows << " rows;";
    for (const auto& [label, count] : report.label_counts) out << " " << label << "=" << count;
    out << "\n";
    if (report.single_class_sample) {
        out << "note: every sampled row received the same label\n";
    }
    return out.str();
}

}  // namespace

std::string render_report(const ExplanationReport& report, ReportFormat format,
                          int blanket_depth) {
    if (blanket_depth < 1) throw ValidationError("blanket depth must be >= 1");
    switch (format) {
        case ReportFormat::Json: return report_to_json(report);
        case ReportFormat::Dot: return render_dot(report, blanket_depth);
        case ReportFormat::Text: return render_text(report, blanket_depth);
    }
    throw ValidationError("unknown report format");
}

}  // namespace localbn
