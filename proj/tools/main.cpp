#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "localbn/errors.hpp"
#include "localbn/pipeline.hpp"
#include "localbn/predictor.hpp"
#include "localbn/util.hpp"

namespace {

struct ModelOptions {
    std::string spec;
    std::string labels;  // comma list; only meaningful for cmd: models
    int timeout_ms = 10000;
};

struct ExplainOptions {
    ModelOptions model;
    std::string input;
    std::string class_var = "class";
    double epsilon = 0.1;
    int samples = 300;
    std::uint64_t seed = 0;
    int quartiles = 4;
    double tau = 0.95;
    int max_parents = 4;
    int max_iterations = 1000;
    double alpha = 1.0;
    std::string format = "json";
    std::string out;
    int blanket_depth = 1;
};

struct BatchOptions {
    ExplainOptions base;
    std::string dataset;
    std::string label_col;
    std::string positive_label;
    std::string epsilons;  // sweep only
};

struct RenderOptions {
    std::string report;
    std::string format = "dot";
    std::string out;
    int blanket_depth = 1;
};

double parse_double(const std::string& text, const std::string& what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw localbn::ValidationError(what + ": '" + text + "' is not a number");
    }
    return value;
}

std::unique_ptr<localbn::Predictor> load_model(const ModelOptions& opt) {
    if (opt.spec.rfind("cmd:", 0) == 0) {
        localbn::BridgePredictor::Options options;
        options.timeout_ms = opt.timeout_ms;
        if (!opt.labels.empty()) options.declared_labels = localbn::split(opt.labels, ',');
        return std::make_unique<localbn::BridgePredictor>(opt.spec.substr(4), options);
    }
    if (opt.spec.rfind("synthetic:", 0) == 0) {
        return localbn::make_synthetic(opt.spec.substr(10));
    }
    return std::make_unique<localbn::MlpModel>(localbn::mlp_load_file(opt.spec));
}

// --input is either an inline "x1=0.3,x2=0.7" list or a CSV file holding a
// header row plus exactly one data row.
localbn::FeatureVector parse_input(const std::string& input) {
    localbn::FeatureVector x;
    if (input.find('=') != std::string::npos) {
        for (const auto& pair : localbn::split(input, ',')) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw localbn::ValidationError("--input entry '" + pair + "' is not name=value");
            }
            x.names.push_back(pair.substr(0, eq));
            x.values.push_back(parse_double(pair.substr(eq + 1), "--input value"));
        }
        return x;
    }
    auto data = localbn::load_tabular_csv_file(input);
    if (data.rows.size() != 1) {
        throw localbn::ValidationError("input file must hold exactly one data row, got " +
                                       std::to_string(data.rows.size()));
    }
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
        x.names.push_back(data.columns[c]);
        x.values.push_back(parse_double(data.rows[0][c], "input column '" + data.columns[c] + "'"));
    }
    return x;
}

localbn::ExplainConfig make_config(const ExplainOptions& opt) {
    localbn::ExplainConfig cfg;
    cfg.epsilon = opt.epsilon;
    cfg.n_samples = opt.samples;
    cfg.seed = opt.seed;
    cfg.quartiles = opt.quartiles;
    cfg.tau = opt.tau;
    cfg.max_parents = opt.max_parents;
    cfg.max_iterations = opt.max_iterations;
    cfg.alpha = opt.alpha;
    cfg.class_var = opt.class_var;
    return cfg;
}

void emit(std::string document, const std::string& out_path) {
    if (document.empty() || document.back() != '\n') document += '\n';
    if (out_path.empty()) {
        std::cout << document;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw localbn::ValidationError("cannot open output file: " + out_path);
    out << document;
    if (!out.good()) throw localbn::ValidationError("failed writing output file: " + out_path);
}

void run_explain(const ExplainOptions& opt) {
    auto model = load_model(opt.model);
    auto report = localbn::explain(parse_input(opt.input), *model, make_config(opt));
    emit(localbn::render_report(report, localbn::parse_report_format(opt.format),
                                opt.blanket_depth),
         opt.out);
}

void run_batch(const BatchOptions& opt) {
    if (localbn::parse_report_format(opt.base.format) != localbn::ReportFormat::Json) {
        throw localbn::ValidationError("batch emits json; pass --format json or drop the flag");
    }
    auto model = load_model(opt.base.model);
    auto data = localbn::load_tabular_csv_file(opt.dataset);
    const std::string positive =
        opt.positive_label.empty() ? model->labels().front() : opt.positive_label;
    auto results = localbn::batch_explain(data, opt.label_col, *model, make_config(opt.base),
                                          positive);
    emit(localbn::batch_to_json(results, opt.label_col, positive), opt.base.out);
}

void run_sweep(const BatchOptions& opt) {
    if (localbn::parse_report_format(opt.base.format) != localbn::ReportFormat::Json) {
        throw localbn::ValidationError("sweep emits json; pass --format json or drop the flag");
    }
    auto model = load_model(opt.base.model);
    auto data = localbn::load_tabular_csv_file(opt.dataset);
    std::vector<double> epsilons;
    for (const auto& item : localbn::split(opt.epsilons, ',')) {
        epsilons.push_back(parse_double(item, "--epsilons entry"));
    }
    auto summary = localbn::epsilon_sweep(data, opt.label_col, *model, epsilons,
                                          make_config(opt.base), opt.positive_label, opt.dataset,
                                          opt.base.model.spec);
    emit(localbn::sweep_to_json(summary), opt.base.out);
}

void run_render(const RenderOptions& opt) {
    std::ifstream in(opt.report);
    if (!in) throw localbn::ValidationError("cannot open report file: " + opt.report);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto report = localbn::report_from_json(buffer.str());
    emit(localbn::render_report(report, localbn::parse_report_format(opt.format),
                                opt.blanket_depth),
         opt.out);
}

void add_explain_flags(CLI::App* cmd, ExplainOptions& opt, bool with_input) {
    cmd->add_option("--model", opt.model.spec,
                    "Weights file, synthetic:<spec>, or cmd:<external command>")
        ->required();
    cmd->add_option("--labels", opt.model.labels,
                    "Declared label set for cmd: models (comma list)");
    cmd->add_option("--timeout-ms", opt.model.timeout_ms, "Per-request timeout for cmd: models");
    if (with_input) {
        cmd->add_option("--input", opt.input, "CSV row file or inline name=value list")
            ->required();
    }
    cmd->add_option("--class-var", opt.class_var, "Class variable name in the learned graph");
    cmd->add_option("--epsilon", opt.epsilon, "Neighborhood half-width in [0,1]");
    cmd->add_option("--samples", opt.samples, "Neighborhood size");
    cmd->add_option("--seed", opt.seed, "Base RNG seed");
    cmd->add_option("--quartiles", opt.quartiles, "Equal-frequency bins per feature");
    cmd->add_option("--tau", opt.tau, "High-confidence threshold in (0.5, 1]");
    cmd->add_option("--max-parents", opt.max_parents, "Parent cap during structure search");
    cmd->add_option("--max-iterations", opt.max_iterations, "Structure search move cap");
    cmd->add_option("--alpha", opt.alpha, "Additive smoothing for fitted tables");
    cmd->add_option("--format", opt.format, "json, dot or text");
    cmd->add_option("--out", opt.out, "Output path (default stdout)");
    cmd->add_option("--blanket-depth", opt.blanket_depth, "Blanket hops in dot/text views");
}

void add_batch_flags(CLI::App* cmd, BatchOptions& opt) {
    cmd->add_option("--dataset", opt.dataset, "CSV with feature columns plus a label column")
        ->required();
    cmd->add_option("--label-col", opt.label_col, "Ground-truth label column name")->required();
    cmd->add_option("--positive-label", opt.positive_label,
                    "Positive class for TP/TN/FP/FN (default: model's first label)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local behavioral explanations for black-box tabular classifiers"};
    app.require_subcommand(1);

    ExplainOptions explain_opt;
    BatchOptions batch_opt;
    BatchOptions sweep_opt;
    RenderOptions render_opt;

    auto* explain_cmd = app.add_subcommand("explain", "Explain one prediction");
    add_explain_flags(explain_cmd, explain_opt, true);
    explain_cmd->callback([&] { run_explain(explain_opt); });

    auto* batch_cmd = app.add_subcommand("batch", "Explain every row of a labeled dataset");
    add_explain_flags(batch_cmd, batch_opt.base, false);
    add_batch_flags(batch_cmd, batch_opt);
    batch_cmd->callback([&] { run_batch(batch_opt); });

    auto* sweep_cmd = app.add_subcommand("sweep", "Repeat a batch run over an epsilon grid");
    add_explain_flags(sweep_cmd, sweep_opt.base, false);
    add_batch_flags(sweep_cmd, sweep_opt);
    sweep_cmd->add_option("--epsilons", sweep_opt.epsilons, "Comma-separated epsilon grid")
        ->required();
    sweep_cmd->callback([&] { run_sweep(sweep_opt); });

    auto* render_cmd = app.add_subcommand("render", "Re-render a saved json report");
    render_cmd->add_option("--report", render_opt.report, "Report file produced by explain")
        ->required();
    render_cmd->add_option("--format", render_opt.format, "json, dot or text");
    render_cmd->add_option("--out", render_opt.out, "Output path (default stdout)");
    render_cmd->add_option("--blanket-depth", render_opt.blanket_depth,
                           "Blanket hops in dot/text views");
    render_cmd->callback([&] { run_render(render_opt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const localbn::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
