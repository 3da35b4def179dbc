#include "localbn/discretizer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "localbn/errors.hpp"
#include "localbn/util.hpp"

namespace localbn {

int DiscreteDataset::index_of(const std::string& variable) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i] == variable) return static_cast<int>(i);
    }
    return -1;
}

void DiscreteDataset::validate() const {
    if (rows.empty()) throw ValidationError("discrete dataset: no rows");
    if (variables.size() != alphabets.size()) {
        throw ValidationError("discrete dataset: variables/alphabets mismatch");
    }
    if (class_index >= variables.size()) {
        throw ValidationError("discrete dataset: class index out of range");
    }
    for (const auto& alphabet : alphabets) {
        if (alphabet.empty()) throw ValidationError("discrete dataset: empty alphabet");
    }
    for (const auto& row : rows) {
        if (row.size() != variables.size()) {
            throw ValidationError("discrete dataset: ragged row");
        }
        for (std::size_t v = 0; v < row.size(); ++v) {
            if (row[v] < 0 || static_cast<std::size_t>(row[v]) >= alphabets[v].size()) {
                throw ValidationError("discrete dataset: cell out of alphabet range");
            }
        }
    }
}

double quantile_linear(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

std::vector<std::string> make_bin_labels(const std::vector<double>& cuts) {
    if (cuts.empty()) return {"(-inf..inf)"};
    std::vector<std::string> labels;
    labels.push_back("(-inf.." + format_double(cuts.front()) + "]");
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        labels.push_back("(" + format_double(cuts[i - 1]) + ".." + format_double(cuts[i]) + "]");
    }
    labels.push_back("(" + format_double(cuts.back()) + "..inf)");
    return labels;
}

}  // namespace

BinningScheme fit_bins(const LabeledSample& s, int quartiles) {
    if (quartiles < 2) throw ValidationError("quartiles must be >= 2");
    if (s.rows.empty()) throw ValidationError("fit_bins: empty sample");

    BinningScheme scheme;
    scheme.feature_names = s.feature_names;
    scheme.quartiles = quartiles;

    for (std::size_t j = 0; j < s.feature_names.size(); ++j) {
        std::vector<double> column(s.rows.size());
        for (std::size_t r = 0; r < s.rows.size(); ++r) column[r] = s.rows[r][j];
        std::sort(column.begin(), column.end());

        // Quantile edges at k/quartiles for k = 0..quartiles; dedupe, then
        // drop the outermost two.  The outer bins are unbounded, so a cut
        // equal to the column extremes would only create empty categories.
        std::vector<double> edges;
        for (int k = 0; k <= quartiles; ++k) {
            edges.push_back(quantile_linear(column, static_cast<double>(k) / quartiles));
        }
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        std::vector<double> cuts;
        if (edges.size() > 2) cuts.assign(edges.begin() + 1, edges.end() - 1);
        scheme.bin_labels.push_back(make_bin_labels(cuts));
        scheme.cuts.push_back(std::move(cuts));
    }
    return scheme;
}

int bin_of(const std::vector<double>& cuts, double value) {
    // Right-closed: value == cut maps to the lower bin.
    int bin = 0;
    for (double cut : cuts) {
        if (value <= cut) return bin;
        ++bin;
    }
    return bin;
}

DiscreteDataset apply_bins(const LabeledSample& s, const BinningScheme& b) {
    if (s.feature_names != b.feature_names) {
        throw ValidationError("apply_bins: scheme fitted on different feature names");
    }

    DiscreteDataset d;
    d.variables = s.feature_names;
    d.variables.push_back(s.class_name);
    d.class_index = d.variables.size() - 1;
    d.alphabets = b.bin_labels;

    // Class alphabet: observed labels in first-appearance order.
    std::vector<std::string> class_alphabet;
    std::vector<int> class_codes(s.labels.size());
    for (std::size_t r = 0; r < s.labels.size(); ++r) {
        const auto it = std::find(class_alphabet.begin(), class_alphabet.end(), s.labels[r]);
        if (it == class_alphabet.end()) {
            class_codes[r] = static_cast<int>(class_alphabet.size());
            class_alphabet.push_back(s.labels[r]);
        } else {
            class_codes[r] = static_cast<int>(it - class_alphabet.begin());
        }
    }
    d.alphabets.push_back(std::move(class_alphabet));

    d.rows.resize(s.rows.size());
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
        auto& row = d.rows[r];
        row.resize(d.variables.size());
        for (std::size_t j = 0; j < s.feature_names.size(); ++j) {
            row[j] = bin_of(b.cuts[j], s.rows[r][j]);
        }
        row[d.class_index] = class_codes[r];
    }
    d.validate();
    return d;
}

void write_discrete_dataset_csv(const DiscreteDataset& d, std::ostream& out) {
    for (std::size_t v = 0; v < d.variables.size(); ++v) {
        out << d.variables[v] << (v + 1 < d.variables.size() ? ',' : '\n');
    }
    for (const auto& row : d.rows) {
        for (std::size_t v = 0; v < row.size(); ++v) {
            out << d.alphabets[v][static_cast<std::size_t>(row[v])]
                << (v + 1 < row.size() ? ',' : '\n');
        }
    }
}

}  // namespace localbn
