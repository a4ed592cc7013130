#pragma once

#include <array>
#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "afrl/neural/params.hpp"

namespace afrl::neural {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kActionCount = 3;

/// Intermediates recorded by a batched Q-network forward pass.
template <typename T>
struct MlpTape {
    RowMatrix<T> input;
    RowMatrix<T> z1, h1, z2, h2;
    bool recorded = false;
};

/// Q-network: input -> hidden -> hidden -> 3, ReLU after both hidden layers,
/// linear head. Parameters "fc{1,2,3}.weight" are [out, in], "fc{1,2,3}.bias" [out].
template <typename T>
class BasicQNetwork {
public:
    static constexpr int kHidden = 256;

    /// All-zero parameters.
    explicit BasicQNetwork(int input_width, int hidden = kHidden);
    /// Adopts an existing parameter set; throws ShapeError if the layout is not an MLP of this shape.
    explicit BasicQNetwork(BasicParamSet<T> params);

    /// Fan-in uniform init: weights ~ U(-sqrt(1/fan_in), sqrt(1/fan_in)), zero biases.
    static BasicQNetwork initialized(int input_width, std::uint64_t seed, int hidden = kHidden);

    [[nodiscard]] int input_width() const noexcept { return input_width_; }
    [[nodiscard]] int hidden_width() const noexcept { return hidden_; }
    [[nodiscard]] const BasicParamSet<T>& params() const noexcept { return params_; }
    [[nodiscard]] BasicParamSet<T>& params() noexcept { return params_; }

    /// Q-values for one state. Throws ShapeError on a width mismatch.
    [[nodiscard]] std::array<T, kActionCount> forward(std::span<const T> state) const;

    /// Rows of `states` are states; returns [batch, 3]. Records into `tape` when given.
    [[nodiscard]] RowMatrix<T> forward_batch(const RowMatrix<T>& states, MlpTape<T>* tape = nullptr) const;

    /// Exact reverse-mode gradients of a scalar loss given dLoss/dQ ([batch, 3]).
    /// Writes dLoss/dstates into `d_input` when non-null. Throws UsageError
    /// when the tape holds no forward pass.
    [[nodiscard]] BasicParamSet<T> backward(const MlpTape<T>& tape, const RowMatrix<T>& d_q,
                                            RowMatrix<T>* d_input = nullptr) const;

private:
    BasicParamSet<T> params_;
    int input_width_;
    int hidden_;
};

/// Intermediates recorded by a batched encoder forward pass.
template <typename T>
struct EncoderTape {
    struct Layer {
        RowMatrix<T> cols;  // im2col of the layer input, [in_channels * 9, batch * out_h * out_w]
        RowMatrix<T> z;     // pre-activation, [channels, batch * out_h * out_w]
    };
    std::vector<Layer> layers;
    int batch = 0;
    bool recorded = false;
};

/// Patch encoder: `depth` 3x3 convolutions (stride 2, zero padding 1, ReLU),
/// each with `channels` filters, followed by a spatial mean-pool to a
/// `channels`-vector. The default geometry maps 1x32x32 -> 8x16x16 -> 8x8x8
/// -> 8x4x4 -> 8x2x2 -> 8. Parameters "conv{i}.weight" are [out, in, 3, 3].
template <typename T>
class BasicEncoder {
public:
    static constexpr int kChannels = 8;
    static constexpr int kDepth = 4;
    static constexpr int kInputSize = 32;

    explicit BasicEncoder(int input_size = kInputSize, int channels = kChannels, int depth = kDepth);
    explicit BasicEncoder(BasicParamSet<T> params, int input_size = kInputSize);

    static BasicEncoder initialized(std::uint64_t seed, int input_size = kInputSize, int channels = kChannels,
                                    int depth = kDepth);

    [[nodiscard]] int input_size() const noexcept { return input_size_; }
    [[nodiscard]] int output_width() const noexcept { return channels_; }
    [[nodiscard]] int depth() const noexcept { return depth_; }
    [[nodiscard]] const BasicParamSet<T>& params() const noexcept { return params_; }
    [[nodiscard]] BasicParamSet<T>& params() noexcept { return params_; }

    /// Spatial side length after each convolution.
    [[nodiscard]] std::vector<int> layer_sizes() const;

    /// Encodes one row-major input_size x input_size patch. Throws ShapeError on a size mismatch.
    [[nodiscard]] std::vector<T> encode(std::span<const T> patch) const;

    /// Rows of `patches` are flattened patches; returns [batch, channels].
    [[nodiscard]] RowMatrix<T> forward_batch(const RowMatrix<T>& patches, EncoderTape<T>* tape = nullptr) const;

    /// Gradients given dLoss/dencoding ([batch, channels]). Throws UsageError without a recorded tape.
    [[nodiscard]] BasicParamSet<T> backward(const EncoderTape<T>& tape, const RowMatrix<T>& d_out) const;

private:
    BasicParamSet<T> params_;
    int input_size_;
    int channels_;
    int depth_;
};

using QNetwork = BasicQNetwork<float>;
using Encoder = BasicEncoder<float>;

}  // namespace afrl::neural
