#include "oia/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace oia {
namespace {

constexpr char kMagic[6] = {'I', 'A', 'Q', 'N', 'E', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Forward pass keeping every pre-activation; activations[0] is the input.
struct ForwardTrace {
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> pre_activations;
};

ForwardTrace traced_forward(const MlpParameters& params, const std::vector<double>& obs) {
    const int layers = params.layer_count();
    ForwardTrace trace;
    trace.activations.resize(layers + 1);
    trace.pre_activations.resize(layers);
    trace.activations[0] = obs;
    for (int i = 0; i < layers; ++i) {
        const int in_width = params.architecture[i];
        const int out_width = params.architecture[i + 1];
        const std::vector<double>& a = trace.activations[i];
        std::vector<double>& z = trace.pre_activations[i];
        z.assign(out_width, 0.0);
        const double* w = params.weights[i].data();
        for (int o = 0; o < out_width; ++o) {
            double acc = params.biases[i][o];
            const double* row = w + static_cast<std::size_t>(o) * in_width;
            for (int k = 0; k < in_width; ++k) acc += row[k] * a[k];
            z[o] = acc;
        }
        if (i + 1 < layers) {
            std::vector<double>& out = trace.activations[i + 1];
            out.resize(out_width);
            for (int o = 0; o < out_width; ++o) out[o] = z[o] > 0.0 ? z[o] : 0.0;
        } else {
            trace.activations[i + 1] = z;
        }
    }
    return trace;
}

/// Adds one sample's contribution to the mean-loss gradient (the 1/B
/// factor is folded in here so block partials sum to the exact gradient).
void accumulate_sample_gradient(const MlpParameters& params, const TrainingBatch& batch,
                                int sample, MlpParameters& grad) {
    const int layers = params.layer_count();
    const ForwardTrace trace = traced_forward(params, batch.observations[sample]);
    const int action = batch.actions[sample];
    const double q = trace.activations[layers][action];
    const double scale = 2.0 * (q - batch.targets[sample]) / batch.size();

    std::vector<double> delta(params.output_width(), 0.0);
    delta[action] = scale;  // only the taken action's unit carries error

    for (int i = layers - 1; i >= 0; --i) {
        const int in_width = params.architecture[i];
        const int out_width = params.architecture[i + 1];
        const std::vector<double>& a = trace.activations[i];
        double* gw = grad.weights[i].data();
        for (int o = 0; o < out_width; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            double* row = gw + static_cast<std::size_t>(o) * in_width;
            for (int k = 0; k < in_width; ++k) row[k] += d * a[k];
            grad.biases[i][o] += d;
        }
        if (i == 0) break;
        std::vector<double> prev(in_width, 0.0);
        const double* w = params.weights[i].data();
        for (int o = 0; o < out_width; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            const double* row = w + static_cast<std::size_t>(o) * in_width;
            for (int k = 0; k < in_width; ++k) prev[k] += d * row[k];
        }
        // rectifier derivative: pass-through where the pre-activation was positive
        const std::vector<double>& z = trace.pre_activations[i - 1];
        for (int k = 0; k < in_width; ++k)
            if (!(z[k] > 0.0)) prev[k] = 0.0;
        delta = std::move(prev);
    }
}

void add_into(MlpParameters& dst, const MlpParameters& src) {
    for (std::size_t i = 0; i < dst.weights.size(); ++i) {
        for (std::size_t k = 0; k < dst.weights[i].size(); ++k)
            dst.weights[i][k] += src.weights[i][k];
        for (std::size_t k = 0; k < dst.biases[i].size(); ++k)
            dst.biases[i][k] += src.biases[i][k];
    }
}

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_f64_le(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct ByteReader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void require(std::size_t n) const {
        if (pos + n > bytes.size())
            throw std::runtime_error("checkpoint: truncated file");
    }
    std::uint32_t read_u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    double read_f64() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(v);
    }
};

}  // namespace

void MlpParameters::validate() const {
    if (architecture.size() < 2)
        throw std::invalid_argument("MlpParameters: need at least input and output widths");
    for (const int width : architecture)
        if (width < 1) throw std::invalid_argument("MlpParameters: layer width must be >= 1");
    const std::size_t layers = architecture.size() - 1;
    if (weights.size() != layers || biases.size() != layers)
        throw std::invalid_argument("MlpParameters: layer count mismatch");
    for (std::size_t i = 0; i < layers; ++i) {
        const std::size_t in_width = static_cast<std::size_t>(architecture[i]);
        const std::size_t out_width = static_cast<std::size_t>(architecture[i + 1]);
        if (weights[i].size() != in_width * out_width)
            throw std::invalid_argument("MlpParameters: weight shape mismatch at layer " +
                                        std::to_string(i));
        if (biases[i].size() != out_width)
            throw std::invalid_argument("MlpParameters: bias shape mismatch at layer " +
                                        std::to_string(i));
        if (!all_finite(weights[i]) || !all_finite(biases[i]))
            throw std::invalid_argument("MlpParameters: non-finite parameter at layer " +
                                        std::to_string(i));
    }
}

void TrainingBatch::validate(int input_width, int output_width) const {
    if (observations.empty()) throw std::invalid_argument("TrainingBatch: empty batch");
    if (actions.size() != observations.size() || targets.size() != observations.size())
        throw std::invalid_argument("TrainingBatch: field lengths differ");
    for (const auto& obs : observations)
        if (static_cast<int>(obs.size()) != input_width)
            throw std::invalid_argument("TrainingBatch: observation width mismatch");
    for (const int a : actions)
        if (a < 0 || a >= output_width)
            throw std::invalid_argument("TrainingBatch: action index out of range");
}

MlpParameters init_mlp(const std::vector<int>& architecture, Rng& rng) {
    if (architecture.size() < 2)
        throw std::invalid_argument("init_mlp: need at least input and output widths");
    MlpParameters params;
    params.architecture = architecture;
    const int layers = params.layer_count();
    params.weights.resize(layers);
    params.biases.resize(layers);
    for (int i = 0; i < layers; ++i) {
        const int in_width = architecture[i];
        const int out_width = architecture[i + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_width));
        params.weights[i].resize(static_cast<std::size_t>(in_width) * out_width);
        for (double& w : params.weights[i]) w = bound * (2.0 * rng.uniform() - 1.0);
        params.biases[i].assign(out_width, 0.0);
    }
    params.validate();
    return params;
}

MlpParameters zero_like(const MlpParameters& params) {
    MlpParameters grad;
    grad.architecture = params.architecture;
    grad.weights.resize(params.weights.size());
    grad.biases.resize(params.biases.size());
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        grad.weights[i].assign(params.weights[i].size(), 0.0);
        grad.biases[i].assign(params.biases[i].size(), 0.0);
    }
    return grad;
}

std::vector<double> forward(const MlpParameters& params, const std::vector<double>& obs) {
    if (static_cast<int>(obs.size()) != params.input_width())
        throw std::invalid_argument("forward: observation width mismatch");
    return traced_forward(params, obs).activations.back();
}

std::vector<std::vector<double>> forward_batch(const MlpParameters& params,
                                               const std::vector<std::vector<double>>& obs) {
    std::vector<std::vector<double>> out(obs.size());
    const int n = static_cast<int>(obs.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) out[i] = forward(params, obs[i]);
    return out;
}

double loss(const MlpParameters& params, const TrainingBatch& batch) {
    batch.validate(params.input_width(), params.output_width());
    double total = 0.0;
    for (int b = 0; b < batch.size(); ++b) {
        const std::vector<double> q = forward(params, batch.observations[b]);
        const double err = batch.targets[b] - q[batch.actions[b]];
        total += err * err;
    }
    return total / batch.size();
}

MlpParameters backward(const MlpParameters& params, const TrainingBatch& batch) {
    batch.validate(params.input_width(), params.output_width());
    const int n = batch.size();
    const int blocks = std::min(n, 64);
    std::vector<MlpParameters> partials(blocks, zero_like(params));
#pragma omp parallel for schedule(static)
    for (int blk = 0; blk < blocks; ++blk) {
        const int begin = static_cast<int>(static_cast<long>(blk) * n / blocks);
        const int end = static_cast<int>(static_cast<long>(blk + 1) * n / blocks);
        for (int s = begin; s < end; ++s)
            accumulate_sample_gradient(params, batch, s, partials[blk]);
    }
    MlpParameters grad = std::move(partials[0]);
    for (int blk = 1; blk < blocks; ++blk) add_into(grad, partials[blk]);
    return grad;
}

MlpParameters backward_serial(const MlpParameters& params, const TrainingBatch& batch) {
    batch.validate(params.input_width(), params.output_width());
    MlpParameters grad = zero_like(params);
    for (int s = 0; s < batch.size(); ++s)
        accumulate_sample_gradient(params, batch, s, grad);
    return grad;
}

void sgd_step(MlpParameters& params, const MlpParameters& gradients, double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("sgd_step: alpha must be >= 0");
    if (gradients.architecture != params.architecture)
        throw std::invalid_argument("sgd_step: gradient shape mismatch");
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        for (std::size_t k = 0; k < params.weights[i].size(); ++k)
            params.weights[i][k] -= alpha * gradients.weights[i][k];
        for (std::size_t k = 0; k < params.biases[i].size(); ++k)
            params.biases[i][k] -= alpha * gradients.biases[i][k];
    }
}

MlpParameters copy_weights(const MlpParameters& params) { return params; }

std::vector<std::uint8_t> serialize_checkpoint(const MlpParameters& params) {
    params.validate();
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
    append_u32_le(out, kFormatVersion);
    append_u32_le(out, static_cast<std::uint32_t>(params.architecture.size()));
    for (const int width : params.architecture)
        append_u32_le(out, static_cast<std::uint32_t>(width));
    for (const auto& layer : params.weights)
        for (const double w : layer) append_f64_le(out, w);
    for (const auto& layer : params.biases)
        for (const double b : layer) append_f64_le(out, b);
    return out;
}

MlpParameters parse_checkpoint(const std::vector<std::uint8_t>& bytes) {
    ByteReader reader{bytes};
    reader.require(sizeof(kMagic));
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    reader.pos = sizeof(kMagic);
    const std::uint32_t version = reader.read_u32();
    if (version != kFormatVersion)
        throw std::runtime_error("checkpoint: unsupported format version " +
                                 std::to_string(version));
    const std::uint32_t width_count = reader.read_u32();
    if (width_count < 2 || width_count > 64)
        throw std::runtime_error("checkpoint: implausible architecture length");
    MlpParameters params;
    params.architecture.resize(width_count);
    for (std::uint32_t i = 0; i < width_count; ++i) {
        const std::uint32_t width = reader.read_u32();
        if (width < 1 || width > (1u << 20))
            throw std::runtime_error("checkpoint: implausible layer width");
        params.architecture[i] = static_cast<int>(width);
    }
    const int layers = params.layer_count();
    params.weights.resize(layers);
    params.biases.resize(layers);
    for (int i = 0; i < layers; ++i) {
        const std::size_t count = static_cast<std::size_t>(params.architecture[i]) *
                                  params.architecture[i + 1];
        params.weights[i].resize(count);
        for (std::size_t k = 0; k < count; ++k) params.weights[i][k] = reader.read_f64();
    }
    for (int i = 0; i < layers; ++i) {
        params.biases[i].resize(params.architecture[i + 1]);
        for (double& b : params.biases[i]) b = reader.read_f64();
    }
    if (reader.pos != bytes.size())
        throw std::runtime_error("checkpoint: trailing bytes after parameters");
    params.validate();
    return params;
}

void save_checkpoint(const MlpParameters& params, const std::string& path) {
    const std::vector<std::uint8_t> bytes = serialize_checkpoint(params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

MlpParameters load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open for reading: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_checkpoint(bytes);
}

}  // namespace oia
