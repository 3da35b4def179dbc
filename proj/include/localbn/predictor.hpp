#ifndef LOCALBN_PREDICTOR_HPP
#define LOCALBN_PREDICTOR_HPP

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "localbn/errors.hpp"

namespace localbn {

// One datapoint to explain: named features scaled to the unit interval.
struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;

    // Throws ValidationError unless names are unique and non-empty, lengths
    // match, and every value is finite and inside [0, 1].
    void validate() const;
};

// Probability distribution over the class labels, in declared label order.
struct ClassDistribution {
    std::vector<std::string> labels;
    std::vector<double> probabilities;

    // Unique labels, >= 2 of them, probabilities in [0, 1] summing to 1
    // within 1e-9.
    void validate() const;

    double probability_of(const std::string& label) const;
    const std::string& argmax_label() const;
};

// Black-box prediction interface.  Implementations must be deterministic:
// identical (model state, x) pairs return identical distributions.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual ClassDistribution predict(const FeatureVector& x) const = 0;
    // Class labels in declared order; fixes argmax tie-breaking.
    virtual std::vector<std::string> labels() const = 0;
};

// Argmax of predict(); ties broken by label order, first wins.
std::string predict_label(const Predictor& model, const FeatureVector& x);

// ---------------------------------------------------------------------------
// Feed-forward network backend

enum class Activation { Relu, Softmax };

struct MlpLayer {
    // Row-major [out][in].
    std::vector<std::vector<double>> weights;
    std::vector<double> bias;
    Activation activation = Activation::Relu;
};

class MlpModel final : public Predictor {
public:
    MlpModel(std::vector<std::string> input_names, std::vector<std::string> output_labels,
             std::vector<MlpLayer> layers);

    ClassDistribution predict(const FeatureVector& x) const override;
    std::vector<std::string> labels() const override { return output_labels_; }

    const std::vector<std::string>& input_names() const { return input_names_; }
    const std::vector<MlpLayer>& layers() const { return layers_; }

private:
    std::vector<std::string> input_names_;
    std::vector<std::string> output_labels_;
    std::vector<MlpLayer> layers_;
};

// Parses and validates a weights document (see README for the schema).
// Throws ValidationError on malformed documents, dimension mismatches and
// unknown activation names.
MlpModel mlp_load(const std::string& weights_document);
MlpModel mlp_load_file(const std::string& path);

// ---------------------------------------------------------------------------
// Synthetic analytic classifiers

// Builds a classifier from a registry spec string:
//   threshold[:cut[:feature_index]]   hard threshold, pos iff x[i] > cut
//   logistic[:gain[:cut[:feature_index]]]
//                                     P(pos) = sigmoid(gain * (x[i] - cut))
//   coin[:seed]                       label from a hash of (x, seed); the
//                                     flip is unrelated to feature geometry
// All emit labels {pos, neg}.  Throws ValidationError on unknown names.
std::unique_ptr<Predictor> make_synthetic(const std::string& spec);

// ---------------------------------------------------------------------------
// External process bridge

// Line-delimited JSON over the child's stdin/stdout:
//   request   {"features": {"<name>": <float>, ...}}
//   response  {"probabilities": {"<label>": <float>, ...}}
// Responses must arrive in request order.  One in-flight request per handle;
// predict() serializes callers.
class BridgePredictor final : public Predictor {
public:
    struct Options {
        int timeout_ms = 10000;
        // When set, every response must carry exactly these labels.  When
        // empty, the first response fixes the label set (sorted order).
        std::vector<std::string> declared_labels;
    };

    explicit BridgePredictor(const std::string& command);
    BridgePredictor(const std::string& command, Options options);
    ~BridgePredictor() override;

    BridgePredictor(const BridgePredictor&) = delete;
    BridgePredictor& operator=(const BridgePredictor&) = delete;

    ClassDistribution predict(const FeatureVector& x) const override;
    std::vector<std::string> labels() const override;

private:
    std::string read_line_with_timeout() const;

    Options options_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    mutable std::mutex mutex_;
    mutable std::string buffer_;
    mutable std::vector<std::string> known_labels_;
};

}  // namespace localbn

#endif  // LOCALBN_PREDICTOR_HPP
