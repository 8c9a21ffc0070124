#include "psieve/quality_classifier.hpp"

#include "psieve/error.hpp"
#include "psieve/keyed_rng.hpp"
#include "psieve/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

namespace psieve {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
    if (epochs < 1) throw Error("epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw Error("learning_rate must be a positive finite number");
    features.validate();
}

LinearModel LinearModel::zeros(const FeatureConfig& cfg) {
    cfg.validate();
    LinearModel m;
    m.cfg = cfg;
    m.weights.assign(cfg.buckets, 0.0);
    return m;
}

double LinearModel::margin(const FeatureVector& x) const {
    double z = bias;
    for (const auto& [idx, count] : x.entries) z += weights[idx] * count;
    return z;
}

double LinearModel::score(const FeatureVector& x) const { return sigmoid(margin(x)); }

double LinearModel::score_text(std::string_view text) const { return score(featurize(text, cfg)); }

double sigmoid(double z) {
    static constexpr double kLo = std::numeric_limits<double>::denorm_min();
    static const double kHi = std::nextafter(1.0, 0.0);
    double s = 0.0;
    if (z >= 0) {
        s = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        s = e / (1.0 + e);
    }
    if (std::isnan(s)) return 0.5;
    return std::clamp(s, kLo, kHi);
}

double score(const LinearModel& model, const Document& doc) { return model.score_text(doc.text); }

namespace {

double raw_sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

std::vector<FeatureVector> featurize_all(std::span<const Document> docs, const FeatureConfig& cfg) {
    std::vector<FeatureVector> out(docs.size());
    parallel_for(docs.size(), 0, [&](std::size_t i) { out[i] = featurize(docs[i].text, cfg); });
    return out;
}

}  // namespace

double example_loss(const LinearModel& model, const FeatureVector& x, bool positive) {
    const double z = model.margin(x);
    return softplus(z) - (positive ? z : 0.0);
}

Gradient example_gradient(const LinearModel& model, const FeatureVector& x, bool positive) {
    const double residual = raw_sigmoid(model.margin(x)) - (positive ? 1.0 : 0.0);
    Gradient g;
    g.weights.reserve(x.entries.size());
    for (const auto& [idx, count] : x.entries) g.weights.push_back(residual * count);
    g.bias = residual;
    return g;
}

void sgd_step(LinearModel& model, const FeatureVector& x, bool positive, double learning_rate) {
    const Gradient g = example_gradient(model, x, positive);
    for (std::size_t k = 0; k < x.entries.size(); ++k)
        model.weights[x.entries[k].first] -= learning_rate * g.weights[k];
    model.bias -= learning_rate * g.bias;
}

LinearModel train(std::span<const Document> positives, std::span<const Document> negatives,
                  const TrainConfig& tc, const LabeledLabels& labels) {
    tc.validate();
    if (positives.empty() || negatives.empty()) throw Error("empty training class");

    const auto pos_x = featurize_all(positives, tc.features);
    const auto neg_x = featurize_all(negatives, tc.features);

    struct Example {
        const FeatureVector* x;
        bool positive;
    };
    std::vector<Example> interleaved;
    interleaved.reserve(pos_x.size() + neg_x.size());
    for (std::size_t i = 0; i < std::max(pos_x.size(), neg_x.size()); ++i) {
        if (i < pos_x.size()) interleaved.push_back({&pos_x[i], true});
        if (i < neg_x.size()) interleaved.push_back({&neg_x[i], false});
    }

    LinearModel model = LinearModel::zeros(tc.features);
    model.positive_label = labels.positive;
    model.negative_label = labels.negative;

    std::vector<std::size_t> order(interleaved.size());
    for (std::uint32_t epoch = 0; epoch < tc.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        KeyedStream rng(derive_key(tc.seed, epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = rng.next_below(i);
            std::swap(order[i - 1], order[j]);
        }
        for (const std::size_t k : order) sgd_step(model, *interleaved[k].x, interleaved[k].positive, tc.learning_rate);
    }

    model.train_meta = {tc.epochs, tc.learning_rate, tc.seed, positives.size(), negatives.size()};
    return model;
}

EvalResult evaluate(const LinearModel& model, std::span<const Document> positives,
                    std::span<const Document> negatives) {
    const std::size_t n = positives.size() + negatives.size();
    if (n == 0) throw Error("evaluate: no documents");
    std::vector<unsigned char> correct(n, 0);
    parallel_for(n, 0, [&](std::size_t i) {
        if (i < positives.size())
            correct[i] = score(model, positives[i]) > 0.5;
        else
            correct[i] = score(model, negatives[i - positives.size()]) <= 0.5;
    });
    const auto hits = std::count(correct.begin(), correct.end(), 1);
    return {static_cast<double>(hits) / static_cast<double>(n), n};
}

double mean_loss(const LinearModel& model, std::span<const Document> positives,
                 std::span<const Document> negatives) {
    const std::size_t n = positives.size() + negatives.size();
    if (n == 0) throw Error("mean_loss: no documents");
    double total = 0.0;
    for (const auto& d : positives) total += example_loss(model, featurize(d.text, model.cfg), true);
    for (const auto& d : negatives) total += example_loss(model, featurize(d.text, model.cfg), false);
    return total / static_cast<double>(n);
}

// ---- persistence -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'P', 'S', 'I', 'E', 'V', 'E', '1', '\0'};
constexpr std::size_t kHeaderBytes = 4 + 8 + 4 + 8 + 8;

template <class T>
void put_le(std::string& out, T value) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    auto bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.push_back(static_cast<char>(bits & 0xFF));
        bits >>= 8;
    }
}

class ByteReader {
public:
    ByteReader(std::string_view bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

    template <class T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
        need(sizeof(U));
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += sizeof(U);
        return std::bit_cast<T>(bits);
    }

    std::string get_string() {
        const auto len = get<std::uint32_t>();
        need(len);
        std::string s(bytes_.substr(pos_, len));
        pos_ += len;
        return s;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

    [[noreturn]] void fail(const std::string& reason) const {
        throw Error(origin_ + ": " + reason);
    }

private:
    void need(std::size_t n) const {
        if (remaining() < n) fail("truncated model file");
    }

    std::string_view bytes_;
    const std::string& origin_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string encode_model(const LinearModel& model) {
    if (model.weights.size() != model.cfg.buckets) throw Error("model weights do not match bucket count");
    std::string out(kMagic, sizeof(kMagic));
    out.reserve(sizeof(kMagic) + kHeaderBytes + 8 * (model.weights.size() + 1) +
                model.positive_label.size() + model.negative_label.size() + 8);
    put_le(out, model.cfg.ngram_order);
    put_le(out, model.cfg.buckets);
    put_le(out, model.train_meta.epochs);
    put_le(out, model.train_meta.learning_rate);
    put_le(out, model.train_meta.seed);
    put_le(out, model.bias);
    for (const double w : model.weights) put_le(out, w);
    for (const auto* label : {&model.positive_label, &model.negative_label}) {
        put_le(out, static_cast<std::uint32_t>(label->size()));
        out += *label;
    }
    return out;
}

LinearModel decode_model(std::string_view bytes, const std::string& origin) {
    ByteReader in(bytes, origin);
    if (bytes.size() < sizeof(kMagic) || bytes.substr(0, 6) != std::string_view(kMagic, 6))
        in.fail("not a model file");
    if (bytes.substr(0, sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic)))
        in.fail("unsupported model version");

    ByteReader body(bytes.substr(sizeof(kMagic)), origin);
    LinearModel m;
    m.cfg.ngram_order = body.get<std::uint32_t>();
    m.cfg.buckets = body.get<std::uint64_t>();
    m.train_meta.epochs = body.get<std::uint32_t>();
    m.train_meta.learning_rate = body.get<double>();
    m.train_meta.seed = body.get<std::uint64_t>();
    if (m.cfg.ngram_order < 1) body.fail("corrupt model file: ngram_order is 0");
    if (m.cfg.buckets < 2) body.fail("corrupt model file: fewer than 2 buckets");
    m.bias = body.get<double>();
    if (m.cfg.buckets > body.remaining() / 8) body.fail("truncated model file");
    m.weights.resize(m.cfg.buckets);
    for (auto& w : m.weights) w = body.get<double>();
    m.positive_label = body.get_string();
    m.negative_label = body.get_string();
    if (body.remaining() != 0) body.fail("corrupt model file: trailing bytes");
    return m;
}

void save_model(const LinearModel& model, const fs::path& path) {
    const std::string bytes = encode_model(model);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("write failed for " + path.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error("cannot write " + path.string() + ": " + ec.message());
}

LinearModel load_model(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error("read error in " + path.string());
    return decode_model(bytes, path.string());
}

}  // namespace psieve
