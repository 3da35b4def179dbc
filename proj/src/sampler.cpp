#include "localbn/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <random>

#include "localbn/errors.hpp"
#include "localbn/util.hpp"

namespace localbn {

void PermutationConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw ValidationError("epsilon must be in [0,1], got " + format_double(epsilon));
    }
    if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
}

LabeledSample generate_permutations(const FeatureVector& x, const Predictor& model,
                                    const PermutationConfig& cfg, const std::string& class_name) {
    x.validate();
    cfg.validate();
    if (std::find(x.names.begin(), x.names.end(), class_name) != x.names.end()) {
        throw ValidationError("class name '" + class_name + "' collides with a feature name");
    }

    const std::size_t d = x.values.size();
    LabeledSample sample;
    sample.feature_names = x.names;
    sample.class_name = class_name;
    sample.rows.resize(static_cast<std::size_t>(cfg.n_samples));

    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = 0; i < sample.rows.size(); ++i) {
        auto& row = sample.rows[i];
        if (i == 0 && cfg.include_original) {
            row = x.values;
            continue;
        }
        row.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            const double lo = std::max(0.0, x.values[j] - cfg.epsilon);
            const double hi = std::min(1.0, x.values[j] + cfg.epsilon);
            row[j] = std::clamp(lo + uniform01(rng) * (hi - lo), lo, hi);
        }
    }

    sample.labels.reserve(sample.rows.size());
    for (std::size_t i = 0; i < sample.rows.size(); ++i) {
        try {
            sample.labels.push_back(predict_label(model, FeatureVector{x.names, sample.rows[i]}));
        } catch (const Error& e) {
            throw Error("predictor failed on permutation row " + std::to_string(i) + ": " +
                        e.what());
        }
    }
    return sample;
}

std::map<std::string, int> label_histogram(const LabeledSample& s) {
    std::map<std::string, int> counts;
    for (const auto& label : s.labels) ++counts[label];
    return counts;
}

void write_labeled_sample_csv(const LabeledSample& s, std::ostream& out) {
    for (const auto& name : s.feature_names) out << csv_escape(name) << ',';
    out << csv_escape(s.class_name) << '\n';
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        for (double v : s.rows[i]) out << format_double(v) << ',';
        out << csv_escape(s.labels[i]) << '\n';
    }
}

LabeledSample read_labeled_sample_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("labeled sample CSV: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = csv_split_line(line);
    if (header.size() < 2) throw ValidationError("labeled sample CSV: need >= 2 columns");

    LabeledSample s;
    s.class_name = header.back();
    header.pop_back();
    s.feature_names = std::move(header);

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = csv_split_line(line);
        if (cells.size() != s.feature_names.size() + 1) {
            throw ValidationError("labeled sample CSV: row " + std::to_string(lineno) +
                                  " has " + std::to_string(cells.size()) + " cells");
        }
        std::vector<double> row(s.feature_names.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            const std::string& cell = cells[j];
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[j]);
            if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw ValidationError("labeled sample CSV: bad number '" + cell + "' at row " +
                                      std::to_string(lineno));
            }
        }
        s.rows.push_back(std::move(row));
        s.labels.push_back(cells.back());
    }
    if (s.rows.empty()) throw ValidationError("labeled sample CSV: no data rows");
    return s;
}

}  // namespace localbn
