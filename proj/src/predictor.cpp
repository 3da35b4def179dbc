#include "localbn/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <time.h>
#include <unistd.h>

extern char** environ;

#include "localbn/util.hpp"
#include <json.hpp>

namespace localbn {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kBridgeSumTolerance = 1e-6;

void softmax_inplace(std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (double& x : v) {
        x = std::exp(x - m);
        total += x;
    }
    for (double& x : v) x /= total;
}

}  // namespace

void FeatureVector::validate() const {
    if (names.empty()) throw ValidationError("feature vector has no features");
    if (names.size() != values.size()) {
        throw ValidationError("feature vector: names/values length mismatch");
    }
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw ValidationError("feature vector: empty feature name");
        if (!seen.insert(n).second) {
            throw ValidationError("feature vector: duplicate feature name '" + n + "'");
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ValidationError("feature '" + names[i] + "' = " + format_double(v) +
                                  " is outside [0,1]");
        }
    }
}

void ClassDistribution::validate() const {
    if (labels.size() < 2) throw ValidationError("class distribution needs >= 2 labels");
    if (labels.size() != probabilities.size()) {
        throw ValidationError("class distribution: labels/probabilities length mismatch");
    }
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second) {
            throw ValidationError("class distribution: duplicate label '" + l + "'");
        }
    }
    double total = 0.0;
    for (double p : probabilities) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw ValidationError("class probability " + format_double(p) + " outside [0,1]");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kSumTolerance) {
        throw ValidationError("class probabilities sum to " + format_double(total));
    }
}

double ClassDistribution::probability_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return probabilities[i];
    }
    throw ValidationError("label '" + label + "' not in distribution");
}

const std::string& ClassDistribution::argmax_label() const {
    return labels[argmax_first(probabilities)];
}

std::string predict_label(const Predictor& model, const FeatureVector& x) {
    return model.predict(x).argmax_label();
}

// ---------------------------------------------------------------------------
// MLP backend

MlpModel::MlpModel(std::vector<std::string> input_names, std::vector<std::string> output_labels,
                   std::vector<MlpLayer> layers)
    : input_names_(std::move(input_names)),
      output_labels_(std::move(output_labels)),
      layers_(std::move(layers)) {
    if (input_names_.empty()) throw ValidationError("mlp: no input names");
    if (output_labels_.size() < 2) throw ValidationError("mlp: needs >= 2 output labels");
    if (layers_.empty()) throw ValidationError("mlp: no layers");

    std::size_t in_dim = input_names_.size();
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const MlpLayer& layer = layers_[l];
        if (layer.weights.empty()) {
            throw ValidationError("mlp: layer " + std::to_string(l) + " has no rows");
        }
        for (const auto& row : layer.weights) {
            if (row.size() != in_dim) {
                throw ValidationError("mlp: layer " + std::to_string(l) + " expects " +
                                      std::to_string(row.size()) + " inputs, got " +
                                      std::to_string(in_dim));
            }
        }
        if (layer.bias.size() != layer.weights.size()) {
            throw ValidationError("mlp: layer " + std::to_string(l) + " bias length mismatch");
        }
        in_dim = layer.weights.size();
    }
    if (layers_.back().activation != Activation::Softmax) {
        throw ValidationError("mlp: final layer activation must be softmax");
    }
    if (layers_.back().weights.size() != output_labels_.size()) {
        throw ValidationError("mlp: final layer width " +
                              std::to_string(layers_.back().weights.size()) +
                              " != number of output labels " +
                              std::to_string(output_labels_.size()));
    }
}

ClassDistribution MlpModel::predict(const FeatureVector& x) const {
    x.validate();
    if (x.names != input_names_) {
        throw ValidationError("mlp: feature names do not match model input names");
    }

    std::vector<double> v = x.values;
    for (const MlpLayer& layer : layers_) {
        std::vector<double> out(layer.weights.size());
        for (std::size_t r = 0; r < layer.weights.size(); ++r) {
            double acc = layer.bias[r];
            const auto& row = layer.weights[r];
            for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
            out[r] = acc;
        }
        if (layer.activation == Activation::Relu) {
            for (double& y : out) y = std::max(0.0, y);
        } else {
            softmax_inplace(out);
        }
        v = std::move(out);
    }

    ClassDistribution dist{output_labels_, std::move(v)};
    dist.validate();
    return dist;
}

namespace {

Activation parse_activation(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "softmax") return Activation::Softmax;
    throw ValidationError("unknown activation '" + name + "'");
}

}  // namespace

MlpModel mlp_load(const std::string& weights_document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(weights_document);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("weights document is not valid JSON: ") + e.what());
    }
    try {
        std::vector<std::string> input_names = doc.at("input_names").get<std::vector<std::string>>();
        std::vector<std::string> output_labels =
            doc.at("output_labels").get<std::vector<std::string>>();
        std::vector<MlpLayer> layers;
        for (const auto& jl : doc.at("layers")) {
            MlpLayer layer;
            layer.weights = jl.at("weights").get<std::vector<std::vector<double>>>();
            layer.bias = jl.at("bias").get<std::vector<double>>();
            layer.activation = parse_activation(jl.at("activation").get<std::string>());
            layers.push_back(std::move(layer));
        }
        return MlpModel(std::move(input_names), std::move(output_labels), std::move(layers));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("weights document schema error: ") + e.what());
    }
}

MlpModel mlp_load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open weights file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return mlp_load(buf.str());
}

// ---------------------------------------------------------------------------
// Synthetic classifiers

namespace {

class ThresholdClassifier final : public Predictor {
public:
    ThresholdClassifier(double cut, std::size_t index) : cut_(cut), index_(index) {}

    ClassDistribution predict(const FeatureVector& x) const override {
        x.validate();
        if (index_ >= x.values.size()) {
            throw ValidationError("threshold classifier: feature index out of range");
        }
        const bool positive = x.values[index_] > cut_;
        return ClassDistribution{{"pos", "neg"}, {positive ? 1.0 : 0.0, positive ? 0.0 : 1.0}};
    }
    std::vector<std::string> labels() const override { return {"pos", "neg"}; }

private:
    double cut_;
    std::size_t index_;
};

class LogisticClassifier final : public Predictor {
public:
    LogisticClassifier(double gain, double cut, std::size_t index)
        : gain_(gain), cut_(cut), index_(index) {}

    ClassDistribution predict(const FeatureVector& x) const override {
        x.validate();
        if (index_ >= x.values.size()) {
            throw ValidationError("logistic classifier: feature index out of range");
        }
        const double p = 1.0 / (1.0 + std::exp(-gain_ * (x.values[index_] - cut_)));
        return ClassDistribution{{"pos", "neg"}, {p, 1.0 - p}};
    }
    std::vector<std::string> labels() const override { return {"pos", "neg"}; }

private:
    double gain_;
    double cut_;
    std::size_t index_;
};

// Deterministic per-input coin: hashes the feature bits with the seed, so
// repeated calls agree but the outcome carries no geometric signal.
class CoinClassifier final : public Predictor {
public:
    explicit CoinClassifier(std::uint64_t seed) : seed_(seed) {}

    ClassDistribution predict(const FeatureVector& x) const override {
        x.validate();
        std::uint64_t h = splitmix64(seed_);
        for (double v : x.values) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            h = splitmix64(h ^ bits);
        }
        for (const auto& n : x.names) {
            for (char c : n) h = splitmix64(h ^ static_cast<unsigned char>(c));
        }
        const bool heads = (h & 1ULL) != 0;
        return ClassDistribution{{"pos", "neg"}, {heads ? 1.0 : 0.0, heads ? 0.0 : 1.0}};
    }
    std::vector<std::string> labels() const override { return {"pos", "neg"}; }

private:
    std::uint64_t seed_;
};

double parse_real(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("synthetic spec: bad " + what + " '" + s + "'");
    }
}

}  // namespace

std::unique_ptr<Predictor> make_synthetic(const std::string& spec) {
    const std::vector<std::string> parts = split(spec, ':');
    const std::string& name = parts.empty() ? spec : parts[0];
    if (name == "threshold") {
        double cut = parts.size() > 1 ? parse_real(parts[1], "cut") : 0.5;
        std::size_t index = parts.size() > 2
                                ? static_cast<std::size_t>(parse_real(parts[2], "feature index"))
                                : 0;
        return std::make_unique<ThresholdClassifier>(cut, index);
    }
    if (name == "logistic") {
        double gain = parts.size() > 1 ? parse_real(parts[1], "gain") : 10.0;
        double cut = parts.size() > 2 ? parse_real(parts[2], "cut") : 0.5;
        std::size_t index = parts.size() > 3
                                ? static_cast<std::size_t>(parse_real(parts[3], "feature index"))
                                : 0;
        return std::make_unique<LogisticClassifier>(gain, cut, index);
    }
    if (name == "coin") {
        std::uint64_t seed =
            parts.size() > 1 ? static_cast<std::uint64_t>(parse_real(parts[1], "seed")) : 0;
        return std::make_unique<CoinClassifier>(seed);
    }
    throw ValidationError("unknown synthetic classifier '" + name + "'");
}

// ---------------------------------------------------------------------------
// Stdio bridge

BridgePredictor::BridgePredictor(const std::string& command)
    : BridgePredictor(command, Options{}) {}

BridgePredictor::BridgePredictor(const std::string& command, Options options)
    : options_(std::move(options)), known_labels_(options_.declared_labels) {
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
        throw BridgeError("bridge: pipe() failed");
    }

    // posix_spawn keeps the parent's signal handlers out of the child and
    // returns only once the exec has happened, so an early kill from our
    // destructor can never hit a half-started process image.
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, to_child[0]);
    posix_spawn_file_actions_addclose(&actions, to_child[1]);
    posix_spawn_file_actions_addclose(&actions, from_child[0]);
    posix_spawn_file_actions_addclose(&actions, from_child[1]);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    sigset_t defaults;
    sigfillset(&defaults);
    posix_spawnattr_setsigdefault(&attr, &defaults);
    // The child leads its own process group so teardown can signal every
    // helper it forks, not just the shell.
    posix_spawnattr_setpgroup(&attr, 0);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGDEF | POSIX_SPAWN_SETPGROUP);

    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
    pid_t pid = 0;
    const int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr,
                               const_cast<char* const*>(argv), environ);
    posix_spawnattr_destroy(&attr);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) {
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        throw BridgeError("bridge: failed to start '" + command + "': " +
                          std::string(std::strerror(rc)));
    }
    pid_ = pid;
    close(to_child[0]);
    close(from_child[1]);
    to_child_ = to_child[1];
    from_child_ = from_child[0];
    // Writes to a dead child must surface as EPIPE, not SIGPIPE.
    signal(SIGPIPE, SIG_IGN);
}

BridgePredictor::~BridgePredictor() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        if (waitpid(pid_, &status, WNOHANG) == 0) {
            // Sweep the whole process group: the shell may have forked the
            // actual worker, and an orphaned worker would keep inherited
            // descriptors (and any pipeline reading them) alive.
            kill(-pid_, SIGTERM);
            bool reaped = false;
            for (int i = 0; i < 50; ++i) {
                if (waitpid(pid_, &status, WNOHANG) != 0) {
                    reaped = true;
                    break;
                }
                const timespec delay{0, 10'000'000};  // 10 ms
                nanosleep(&delay, nullptr);
            }
            if (!reaped) {
                kill(-pid_, SIGKILL);
                waitpid(pid_, &status, 0);
            }
        }
    }
}

std::string BridgePredictor::read_line_with_timeout() const {
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int rc = poll(&pfd, 1, options_.timeout_ms);
        if (rc == 0) throw BridgeError("bridge: timed out waiting for a response");
        if (rc < 0) throw BridgeError("bridge: poll() failed");
        char chunk[4096];
        const ssize_t n = read(from_child_, chunk, sizeof(chunk));
        if (n < 0) throw BridgeError("bridge: read() failed");
        if (n == 0) throw BridgeError("bridge: process closed its output");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

ClassDistribution BridgePredictor::predict(const FeatureVector& x) const {
    x.validate();
    std::lock_guard<std::mutex> lock(mutex_);

    nlohmann::json features = nlohmann::json::object();
    for (std::size_t i = 0; i < x.names.size(); ++i) features[x.names[i]] = x.values[i];
    const std::string request = nlohmann::json{{"features", features}}.dump() + "\n";

    const char* data = request.data();
    std::size_t remaining = request.size();
    while (remaining > 0) {
        const ssize_t n = write(to_child_, data, remaining);
        if (n <= 0) throw BridgeError("bridge: write to process failed");
        data += n;
        remaining -= static_cast<std::size_t>(n);
    }

    const std::string line = read_line_with_timeout();
    nlohmann::json response;
    try {
        response = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
        throw ProtocolError("bridge: response is not valid JSON: " + line);
    }
    if (!response.contains("probabilities") || !response["probabilities"].is_object()) {
        throw ProtocolError("bridge: response lacks a probabilities object");
    }

    // nlohmann object keys iterate sorted, which fixes the adopted order.
    std::vector<std::string> labels;
    std::vector<double> probs;
    for (const auto& [label, p] : response["probabilities"].items()) {
        if (!p.is_number()) throw ProtocolError("bridge: probability for '" + label + "' not a number");
        labels.push_back(label);
        probs.push_back(p.get<double>());
    }

    if (known_labels_.empty()) {
        known_labels_ = labels;
    } else {
        std::vector<std::string> expected = known_labels_;
        std::sort(expected.begin(), expected.end());
        if (labels != expected) {
            throw ProtocolError("bridge: response labels do not match the declared label set");
        }
        // Reorder into declared order.
        std::vector<double> ordered(known_labels_.size());
        for (std::size_t i = 0; i < known_labels_.size(); ++i) {
            const auto it = std::find(labels.begin(), labels.end(), known_labels_[i]);
            ordered[i] = probs[static_cast<std::size_t>(it - labels.begin())];
        }
        labels = known_labels_;
        probs = std::move(ordered);
    }

    double total = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0 + kBridgeSumTolerance) {
            throw ProtocolError("bridge: probability " + format_double(p) + " outside [0,1]");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kBridgeSumTolerance) {
        throw ProtocolError("bridge: probabilities sum to " + format_double(total));
    }
    for (double& p : probs) p = std::min(1.0, std::max(0.0, p / total));

    ClassDistribution dist{std::move(labels), std::move(probs)};
    dist.validate();
    return dist;
}

std::vector<std::string> BridgePredictor::labels() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (known_labels_.empty()) {
        throw BridgeError("bridge: labels unknown until declared or first response");
    }
    return known_labels_;
}

}  // namespace localbn
