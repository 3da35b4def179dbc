#ifndef LOCALBN_SAMPLER_HPP
#define LOCALBN_SAMPLER_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "localbn/predictor.hpp"

namespace localbn {

struct PermutationConfig {
    double epsilon = 0.1;       // half-width of the per-feature uniform interval
    int n_samples = 300;
    std::uint64_t seed = 0;
    bool include_original = true;

    void validate() const;      // 0 <= epsilon <= 1, n_samples >= 1
};

// Neighborhood sample around one datapoint, labeled by the black box.
struct LabeledSample {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;   // n_samples x n_features, in [0,1]
    std::vector<std::string> labels;         // one black-box label per row
    std::string class_name;
};

// Draws each row i.i.d. per feature, uniform on [max(0, x_j - eps),
// min(1, x_j + eps)], then labels every row with the black box.  Row 0 is the
// unperturbed datapoint when include_original is set.  Deterministic for a
// fixed seed; all draws happen in one pass before labeling.
LabeledSample generate_permutations(const FeatureVector& x, const Predictor& model,
                                    const PermutationConfig& cfg,
                                    const std::string& class_name = "class");

// Label -> row count; counts sum to rows.size().
std::map<std::string, int> label_histogram(const LabeledSample& s);

// CSV with header = feature names + class name, class column last.  Values
// are written in shortest round-trip form so read_labeled_sample_csv
// restores them bit-exactly.
void write_labeled_sample_csv(const LabeledSample& s, std::ostream& out);
LabeledSample read_labeled_sample_csv(std::istream& in);

}  // namespace localbn

#endif  // LOCALBN_SAMPLER_HPP
