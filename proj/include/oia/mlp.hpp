#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oia/rng.hpp"

namespace oia {

/// Fully-connected network parameters. Layer i maps architecture[i] inputs
/// to architecture[i+1] outputs through a row-major weight matrix and a
/// bias vector; hidden layers apply a rectifier, the output layer is
/// affine. The same shape doubles as the gradient structure.
struct MlpParameters {
    std::vector<int> architecture;
    std::vector<std::vector<double>> weights;  // [layer][out * in_width + in]
    std::vector<std::vector<double>> biases;   // [layer][out]

    int layer_count() const { return static_cast<int>(architecture.size()) - 1; }
    int input_width() const { return architecture.front(); }
    int output_width() const { return architecture.back(); }

    void validate() const;  // shape consistency + finiteness
};

/// A minibatch with precomputed regression targets for the chosen actions.
struct TrainingBatch {
    std::vector<std::vector<double>> observations;
    std::vector<int> actions;
    std::vector<double> targets;

    int size() const { return static_cast<int>(observations.size()); }
    void validate(int input_width, int output_width) const;
};

/// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
/// Needs at least two layer widths; a width-pair (linear) net is allowed.
MlpParameters init_mlp(const std::vector<int>& architecture, Rng& rng);

/// Same-shape structure with every parameter zero.
MlpParameters zero_like(const MlpParameters& params);

std::vector<double> forward(const MlpParameters& params, const std::vector<double>& obs);

/// Row-wise forward over independent observations (parallelized; each row
/// is bit-identical to forward()).
std::vector<std::vector<double>> forward_batch(const MlpParameters& params,
                                               const std::vector<std::vector<double>>& obs);

/// Mean over the batch of (target_b - Q(x_b)[a_b])^2.
double loss(const MlpParameters& params, const TrainingBatch& batch);

/// Exact gradient of loss() with respect to every parameter. Samples are
/// accumulated in a fixed block partition (at most 64 blocks) so the
/// result is identical for any thread count.
MlpParameters backward(const MlpParameters& params, const TrainingBatch& batch);

/// Single-threaded reference accumulating samples strictly in order.
/// Agrees with backward() up to summation rounding.
MlpParameters backward_serial(const MlpParameters& params, const TrainingBatch& batch);

/// In-place theta -= alpha * gradients.
void sgd_step(MlpParameters& params, const MlpParameters& gradients, double alpha);

/// Deep copy for the target network; later updates to the source do not
/// alias into the copy.
MlpParameters copy_weights(const MlpParameters& params);

/// Checkpoint byte layout: magic "IAQNET", u32 format version (currently 1),
/// u32 layer-width count, the widths as u32, then every weight matrix layer
/// by layer and every bias vector layer by layer as IEEE-754 doubles. All
/// integers and doubles little-endian.
std::vector<std::uint8_t> serialize_checkpoint(const MlpParameters& params);
MlpParameters parse_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const MlpParameters& params, const std::string& path);
MlpParameters load_checkpoint(const std::string& path);

}  // namespace oia
