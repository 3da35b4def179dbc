#ifndef LOCALBN_DISCRETIZER_HPP
#define LOCALBN_DISCRETIZER_HPP

#include <string>
#include <vector>

#include "localbn/sampler.hpp"

namespace localbn {

// Per-feature equal-frequency binning fitted on the sample itself.
struct BinningScheme {
    std::vector<std::string> feature_names;
    // Strictly increasing interior cut points per feature; may be empty
    // (constant column -> one category).
    std::vector<std::vector<double>> cuts;
    // One name per bin: "(-inf..c1]", "(c1..c2]", ..., "(ck..inf)".
    std::vector<std::vector<std::string>> bin_labels;
    int quartiles = 4;
};

// Categorical table ready for structure learning.  The class variable is the
// last column and its alphabet is the label set observed in the sample, in
// first-appearance order.
struct DiscreteDataset {
    std::vector<std::string> variables;
    std::vector<std::vector<std::string>> alphabets;
    std::vector<std::vector<int>> rows;      // rows[r][v] indexes alphabets[v]
    std::size_t class_index = 0;

    std::size_t cardinality(std::size_t v) const { return alphabets[v].size(); }
    int index_of(const std::string& variable) const;  // -1 when absent
    void validate() const;
};

// Empirical quantile with linear interpolation between order statistics.
// `sorted` must be ascending; p in [0,1].
double quantile_linear(const std::vector<double>& sorted, double p);

// Interior cut points are the k/quartiles empirical quantiles of each
// feature column over the sample; duplicate edges merge, so features may end
// with fewer than `quartiles` categories, and constant columns with one.
BinningScheme fit_bins(const LabeledSample& s, int quartiles = 4);

// Maps values through right-closed intervals (-inf,c1], (c1,c2], ...,
// (ck,+inf).  Class labels pass through unbinned.
DiscreteDataset apply_bins(const LabeledSample& s, const BinningScheme& b);

// Bin index for one value under one feature's cut list.
int bin_of(const std::vector<double>& cuts, double value);

void write_discrete_dataset_csv(const DiscreteDataset& d, std::ostream& out);

}  // namespace localbn

#endif  // LOCALBN_DISCRETIZER_HPP
