#ifndef LOCALBN_PIPELINE_HPP
#define LOCALBN_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "localbn/discretizer.hpp"
#include "localbn/inference.hpp"
#include "localbn/predictor.hpp"
#include "localbn/sampler.hpp"
#include "localbn/verdicts.hpp"

namespace localbn {

// Node-count threshold below which reports present the full network rather
// than the Markov blanket view (features + class variable).
inline constexpr std::size_t kFullNetworkNodeLimit = 10;

struct ExplainConfig {
    double epsilon = 0.1;
    int n_samples = 300;
    std::uint64_t seed = 0;
    bool include_original = true;
    int quartiles = 4;
    double tau = 0.95;
    int max_parents = 4;
    int max_iterations = 1000;
    double alpha = 1.0;
    std::string class_var = "class";

    void validate() const;
};

// Everything one explanation produced, including the knobs that shaped it.
// The full network is always embedded; `view` records which presentation the
// node-count threshold selected.
struct ExplanationReport {
    FeatureVector input;
    std::string predicted_label;
    ClassDistribution blackbox_distribution;
    ExplainConfig config;
    BinningScheme binning;
    BayesianNetwork network;
    std::string view;  // "full_network" or "markov_blanket"
    MarkovBlanket blanket;
    std::map<std::string, std::vector<double>> marginals;
    ClassTopology topology;
    RuleVerdict verdict;
    std::map<std::string, int> label_counts;
    bool single_class_sample = false;
    std::map<std::string, double> timing_ms;
};

// Runs the full local-explanation pipeline for one datapoint: perturbation
// sampling, quantile discretization, structure search, parameter fitting,
// marginals, Markov blanket and the confidence verdict.  Deterministic for a
// fixed seed.  A sample whose labels are unanimous short-circuits to an R1
// verdict with posterior 1.0 and isolated topology.
ExplanationReport explain(const FeatureVector& x, const Predictor& model,
                          const ExplainConfig& cfg);

// Same pipeline from an existing labeled sample (e.g. one round-tripped
// through CSV), bypassing the sampler stage.
ExplanationReport explain_sample(const FeatureVector& x, const ClassDistribution& blackbox,
                                 const LabeledSample& sample, const ExplainConfig& cfg);

// ---------------------------------------------------------------------------
// Batch harness

struct TabularDataset {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 when absent
};

TabularDataset load_tabular_csv(std::istream& in);
TabularDataset load_tabular_csv_file(const std::string& path);

struct BatchResult {
    ExplanationReport report;
    std::string truth_label;
    std::string confusion_cell;  // TP / TN / FP / FN
};

// Explains every dataset row.  The confusion cell compares the ground-truth
// label against the black-box prediction, one-vs-rest on `positive_label`
// (empty selects the model's first declared label).  Row i runs with seed
// derive_seed(cfg.seed, i); output order matches input order.
std::vector<BatchResult> batch_explain(const TabularDataset& data, const std::string& label_col,
                                       const Predictor& model, const ExplainConfig& cfg,
                                       const std::string& positive_label = "");

// Derives the TP/TN/FP/FN cell for one (truth, prediction) pair.
std::string confusion_cell(const std::string& truth, const std::string& predicted,
                           const std::string& positive_label);

// Canonical JSON for a batch run: per-row reports plus a per-cell rule
// summary table.
std::string batch_to_json(const std::vector<BatchResult>& results, const std::string& label_col,
                          const std::string& positive_label);

// ---------------------------------------------------------------------------
// Epsilon sweep harness

struct SweepCellStats {
    std::array<int, 4> rule_counts{};  // indexed by Rule enum order R1..R4
    int total = 0;
};

struct SweepSummary {
    std::vector<double> epsilons;
    std::string dataset_id;
    std::string model_id;
    std::uint64_t seed = 0;
    // One map per epsilon, keyed by confusion cell.
    std::vector<std::map<std::string, SweepCellStats>> per_epsilon;

    // R1 fraction across all cells for one epsilon index.
    double rule_fraction(std::size_t epsilon_index, Rule rule) const;
};

// Runs batch_explain once per epsilon with seeds derived from (cfg.seed,
// epsilon index) and aggregates rule frequencies per confusion cell.
SweepSummary epsilon_sweep(const TabularDataset& data, const std::string& label_col,
                           const Predictor& model, const std::vector<double>& epsilons,
                           const ExplainConfig& cfg, const std::string& positive_label = "",
                           const std::string& dataset_id = "", const std::string& model_id = "");

std::string sweep_to_json(const SweepSummary& summary);

// ---------------------------------------------------------------------------
// Rendering

enum class ReportFormat { Json, Dot, Text };

ReportFormat parse_report_format(const std::string& name);  // throws on unknown

// json is lossless (parse -> render is byte-identical); dot draws the
// network or blanket view with per-node mode probabilities and a
// double-bordered class node; text is a one-screen human summary.
// blanket_depth widens the dot/text blanket view: depth 2 adds the blankets
// of blanket members, and so on.
std::string render_report(const ExplanationReport& report, ReportFormat format,
                          int blanket_depth = 1);

std::string report_to_json(const ExplanationReport& report);
ExplanationReport report_from_json(const std::string& text);

}  // namespace localbn

#endif  // LOCALBN_PIPELINE_HPP
