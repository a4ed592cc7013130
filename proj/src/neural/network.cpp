#include "afrl/neural/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "afrl/error.hpp"

namespace afrl::neural {

namespace {

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
Eigen::Map<const RowMatrix<T>> as_matrix(const BasicTensor<T>& t, int rows, int cols) {
    return Eigen::Map<const RowMatrix<T>>(t.data.data(), rows, cols);
}

template <typename T>
Eigen::Map<const RowVector<T>> as_row(const BasicTensor<T>& t) {
    return Eigen::Map<const RowVector<T>>(t.data.data(), static_cast<Eigen::Index>(t.data.size()));
}

template <typename T>
void store(BasicTensor<T>& dst, const RowMatrix<T>& src) {
    std::copy(src.data(), src.data() + src.size(), dst.data.begin());
}

template <typename T>
void fill_uniform(BasicTensor<T>& t, int fan_in, std::mt19937_64& rng) {
    const double limit = std::sqrt(1.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (T& v : t.data) v = static_cast<T>(dist(rng));
}

template <typename T>
RowMatrix<T> relu(const RowMatrix<T>& z) {
    return z.cwiseMax(T{0});
}

// ReLU subgradient: 0 at exactly zero.
template <typename T>
RowMatrix<T> relu_mask(const RowMatrix<T>& z) {
    return (z.array() > T{0}).template cast<T>().matrix();
}

std::string fc(int i, const char* what) { return "fc" + std::to_string(i) + "." + what; }
std::string conv(int i, const char* what) { return "conv" + std::to_string(i) + "." + what; }

}  // namespace

// ---------------------------------------------------------------------------
// Q-network

template <typename T>
BasicQNetwork<T>::BasicQNetwork(int input_width, int hidden) : input_width_(input_width), hidden_(hidden) {
    if (input_width < 1 || hidden < 1) throw ShapeError("Q-network widths must be positive");
    params_.add(fc(1, "weight"), {hidden, input_width});
    params_.add(fc(1, "bias"), {hidden});
    params_.add(fc(2, "weight"), {hidden, hidden});
    params_.add(fc(2, "bias"), {hidden});
    params_.add(fc(3, "weight"), {kActionCount, hidden});
    params_.add(fc(3, "bias"), {kActionCount});
}

template <typename T>
BasicQNetwork<T>::BasicQNetwork(BasicParamSet<T> params) : input_width_(0), hidden_(0) {
    if (!params.contains(fc(1, "weight")) || params.at(fc(1, "weight")).shape.size() != 2) {
        throw ShapeError("parameter set is not a Q-network (missing fc1.weight)");
    }
    const auto& w1 = params.at(fc(1, "weight")).shape;
    BasicQNetwork layout(w1[1], w1[0]);
    layout.params_.check_aligned(params);
    params_ = std::move(params);
    input_width_ = layout.input_width_;
    hidden_ = layout.hidden_;
}

template <typename T>
BasicQNetwork<T> BasicQNetwork<T>::initialized(int input_width, std::uint64_t seed, int hidden) {
    BasicQNetwork net(input_width, hidden);
    std::mt19937_64 rng(seed);
    fill_uniform(net.params_.at(fc(1, "weight")), input_width, rng);
    fill_uniform(net.params_.at(fc(2, "weight")), hidden, rng);
    fill_uniform(net.params_.at(fc(3, "weight")), hidden, rng);
    return net;
}

template <typename T>
std::array<T, kActionCount> BasicQNetwork<T>::forward(std::span<const T> state) const {
    if (static_cast<int>(state.size()) != input_width_) {
        throw ShapeError("state width " + std::to_string(state.size()) + " does not match Q-network input " +
                         std::to_string(input_width_));
    }
    RowMatrix<T> x = Eigen::Map<const RowMatrix<T>>(state.data(), 1, input_width_);
    const RowMatrix<T> q = forward_batch(x);
    return {q(0, 0), q(0, 1), q(0, 2)};
}

template <typename T>
RowMatrix<T> BasicQNetwork<T>::forward_batch(const RowMatrix<T>& states, MlpTape<T>* tape) const {
    if (states.cols() != input_width_) {
        throw ShapeError("state width " + std::to_string(states.cols()) + " does not match Q-network input " +
                         std::to_string(input_width_));
    }
    const auto w1 = as_matrix(params_.at(fc(1, "weight")), hidden_, input_width_);
    const auto w2 = as_matrix(params_.at(fc(2, "weight")), hidden_, hidden_);
    const auto w3 = as_matrix(params_.at(fc(3, "weight")), kActionCount, hidden_);

    RowMatrix<T> z1 = states * w1.transpose();
    z1.rowwise() += as_row(params_.at(fc(1, "bias")));
    RowMatrix<T> h1 = relu(z1);
    RowMatrix<T> z2 = h1 * w2.transpose();
    z2.rowwise() += as_row(params_.at(fc(2, "bias")));
    RowMatrix<T> h2 = relu(z2);
    RowMatrix<T> q = h2 * w3.transpose();
    q.rowwise() += as_row(params_.at(fc(3, "bias")));

    if (tape != nullptr) {
        tape->input = states;
        tape->z1 = std::move(z1);
        tape->h1 = std::move(h1);
        tape->z2 = std::move(z2);
        tape->h2 = std::move(h2);
        tape->recorded = true;
    }
    return q;
}

template <typename T>
BasicParamSet<T> BasicQNetwork<T>::backward(const MlpTape<T>& tape, const RowMatrix<T>& d_q,
                                            RowMatrix<T>* d_input) const {
    if (!tape.recorded) throw UsageError("Q-network backward called before a recorded forward pass");
    if (d_q.rows() != tape.input.rows() || d_q.cols() != kActionCount) {
        throw ShapeError("upstream gradient shape does not match the recorded batch");
    }
    const auto w1 = as_matrix(params_.at(fc(1, "weight")), hidden_, input_width_);
    const auto w2 = as_matrix(params_.at(fc(2, "weight")), hidden_, hidden_);
    const auto w3 = as_matrix(params_.at(fc(3, "weight")), kActionCount, hidden_);

    BasicParamSet<T> grads = params_.zeros_like();
    store<T>(grads.at(fc(3, "weight")), d_q.transpose() * tape.h2);
    store<T>(grads.at(fc(3, "bias")), d_q.colwise().sum());

    const RowMatrix<T> dz2 = (d_q * w3).cwiseProduct(relu_mask(tape.z2));
    store<T>(grads.at(fc(2, "weight")), dz2.transpose() * tape.h1);
    store<T>(grads.at(fc(2, "bias")), dz2.colwise().sum());

    const RowMatrix<T> dz1 = (dz2 * w2).cwiseProduct(relu_mask(tape.z1));
    store<T>(grads.at(fc(1, "weight")), dz1.transpose() * tape.input);
    store<T>(grads.at(fc(1, "bias")), dz1.colwise().sum());

    if (d_input != nullptr) *d_input = dz1 * w1;
    return grads;
}

// ---------------------------------------------------------------------------
// Encoder

namespace {

// cols[(c*9 + ky*3 + kx), b*oh*ow + oy*ow + ox] = in[c, b*h*w + iy*w + ix], zero outside.
template <typename T>
RowMatrix<T> im2col(const T* in, int channels, int batch, int size) {
    const int out = size / 2;
    const int in_area = size * size;
    const int out_area = out * out;
    RowMatrix<T> cols = RowMatrix<T>::Zero(channels * 9, static_cast<Eigen::Index>(batch) * out_area);
    for (int c = 0; c < channels; ++c) {
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                T* dst = cols.row(c * 9 + ky * 3 + kx).data();
                for (int b = 0; b < batch; ++b) {
                    const T* plane = in + (static_cast<std::size_t>(c) * batch + b) * in_area;
                    for (int oy = 0; oy < out; ++oy) {
                        const int iy = 2 * oy + ky - 1;
                        if (iy < 0 || iy >= size) continue;
                        for (int ox = 0; ox < out; ++ox) {
                            const int ix = 2 * ox + kx - 1;
                            if (ix < 0 || ix >= size) continue;
                            dst[static_cast<std::size_t>(b) * out_area + oy * out + ox] = plane[iy * size + ix];
                        }
                    }
                }
            }
        }
    }
    return cols;
}

template <typename T>
RowMatrix<T> col2im(const RowMatrix<T>& cols, int channels, int batch, int size) {
    const int out = size / 2;
    const int in_area = size * size;
    const int out_area = out * out;
    RowMatrix<T> img = RowMatrix<T>::Zero(channels, static_cast<Eigen::Index>(batch) * in_area);
    for (int c = 0; c < channels; ++c) {
        T* plane_row = img.row(c).data();
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const T* src = cols.row(c * 9 + ky * 3 + kx).data();
                for (int b = 0; b < batch; ++b) {
                    T* plane = plane_row + static_cast<std::size_t>(b) * in_area;
                    for (int oy = 0; oy < out; ++oy) {
                        const int iy = 2 * oy + ky - 1;
                        if (iy < 0 || iy >= size) continue;
                        for (int ox = 0; ox < out; ++ox) {
                            const int ix = 2 * ox + kx - 1;
                            if (ix < 0 || ix >= size) continue;
                            plane[iy * size + ix] += src[static_cast<std::size_t>(b) * out_area + oy * out + ox];
                        }
                    }
                }
            }
        }
    }
    return img;
}

}  // namespace

template <typename T>
BasicEncoder<T>::BasicEncoder(int input_size, int channels, int depth)
    : input_size_(input_size), channels_(channels), depth_(depth) {
    if (channels < 1 || depth < 1 || input_size < 2 || input_size % (1 << depth) != 0) {
        throw ShapeError("encoder input size must be divisible by 2^depth");
    }
    for (int i = 1; i <= depth; ++i) {
        params_.add(conv(i, "weight"), {channels, i == 1 ? 1 : channels, 3, 3});
        params_.add(conv(i, "bias"), {channels});
    }
}

template <typename T>
BasicEncoder<T>::BasicEncoder(BasicParamSet<T> params, int input_size) : input_size_(input_size) {
    if (!params.contains(conv(1, "weight"))) throw ShapeError("parameter set is not an encoder (missing conv1.weight)");
    const int channels = params.at(conv(1, "weight")).shape.front();
    const int depth = static_cast<int>(params.size()) / 2;
    BasicEncoder layout(input_size, channels, depth);
    layout.params_.check_aligned(params);
    params_ = std::move(params);
    channels_ = channels;
    depth_ = depth;
}

template <typename T>
BasicEncoder<T> BasicEncoder<T>::initialized(std::uint64_t seed, int input_size, int channels, int depth) {
    BasicEncoder enc(input_size, channels, depth);
    std::mt19937_64 rng(seed);
    for (int i = 1; i <= depth; ++i) {
        fill_uniform(enc.params_.at(conv(i, "weight")), (i == 1 ? 1 : channels) * 9, rng);
    }
    return enc;
}

template <typename T>
std::vector<int> BasicEncoder<T>::layer_sizes() const {
    std::vector<int> sizes;
    int s = input_size_;
    for (int i = 0; i < depth_; ++i) sizes.push_back(s /= 2);
    return sizes;
}

template <typename T>
std::vector<T> BasicEncoder<T>::encode(std::span<const T> patch) const {
    const auto area = static_cast<std::size_t>(input_size_) * input_size_;
    if (patch.size() != area) {
        throw ShapeError("encoder expects a " + std::to_string(input_size_) + "x" + std::to_string(input_size_) +
                         " patch, got " + std::to_string(patch.size()) + " values");
    }
    const RowMatrix<T> x = Eigen::Map<const RowMatrix<T>>(patch.data(), 1, static_cast<Eigen::Index>(area));
    const RowMatrix<T> out = forward_batch(x);
    return std::vector<T>(out.data(), out.data() + out.size());
}

template <typename T>
RowMatrix<T> BasicEncoder<T>::forward_batch(const RowMatrix<T>& patches, EncoderTape<T>* tape) const {
    if (patches.cols() != static_cast<Eigen::Index>(input_size_) * input_size_) {
        throw ShapeError("encoder expects flattened " + std::to_string(input_size_) + "x" +
                         std::to_string(input_size_) + " patches");
    }
    const int batch = static_cast<int>(patches.rows());
    if (tape != nullptr) {
        tape->layers.assign(static_cast<std::size_t>(depth_), {});
        tape->batch = batch;
    }
    // A row-major [batch, size*size] block is the same memory as a [1, batch*size*size] activation.
    RowMatrix<T> act = patches;
    int size = input_size_;
    int in_channels = 1;
    for (int i = 1; i <= depth_; ++i) {
        RowMatrix<T> cols = im2col(act.data(), in_channels, batch, size);
        const auto w = as_matrix(params_.at(conv(i, "weight")), channels_, in_channels * 9);
        RowMatrix<T> z = w * cols;
        z.colwise() += as_row(params_.at(conv(i, "bias"))).transpose();
        act = relu(z);
        if (tape != nullptr) {
            tape->layers[static_cast<std::size_t>(i - 1)] = {std::move(cols), std::move(z)};
        }
        size /= 2;
        in_channels = channels_;
    }
    const int area = size * size;
    RowMatrix<T> out(batch, channels_);
    for (int b = 0; b < batch; ++b) {
        for (int c = 0; c < channels_; ++c) {
            out(b, c) = act.row(c).segment(static_cast<Eigen::Index>(b) * area, area).sum() / static_cast<T>(area);
        }
    }
    if (tape != nullptr) tape->recorded = true;
    return out;
}

template <typename T>
BasicParamSet<T> BasicEncoder<T>::backward(const EncoderTape<T>& tape, const RowMatrix<T>& d_out) const {
    if (!tape.recorded) throw UsageError("encoder backward called before a recorded forward pass");
    const int batch = tape.batch;
    if (d_out.rows() != batch || d_out.cols() != channels_) {
        throw ShapeError("upstream gradient shape does not match the recorded batch");
    }
    const std::vector<int> sizes = layer_sizes();
    const int last = sizes.back();
    const int area = last * last;

    // Mean-pool backward.
    RowMatrix<T> d_act(channels_, static_cast<Eigen::Index>(batch) * area);
    for (int c = 0; c < channels_; ++c) {
        for (int b = 0; b < batch; ++b) {
            d_act.row(c).segment(static_cast<Eigen::Index>(b) * area, area).setConstant(d_out(b, c) / static_cast<T>(area));
        }
    }

    BasicParamSet<T> grads = params_.zeros_like();
    for (int i = depth_; i >= 1; --i) {
        const auto& layer = tape.layers[static_cast<std::size_t>(i - 1)];
        const int in_channels = i == 1 ? 1 : channels_;
        const RowMatrix<T> dz = d_act.cwiseProduct(relu_mask(layer.z));
        store<T>(grads.at(conv(i, "weight")), dz * layer.cols.transpose());
        store<T>(grads.at(conv(i, "bias")), dz.rowwise().sum().transpose());
        if (i > 1) {
            const auto w = as_matrix(params_.at(conv(i, "weight")), channels_, in_channels * 9);
            const RowMatrix<T> dcols = w.transpose() * dz;
            d_act = col2im(dcols, in_channels, batch, sizes[static_cast<std::size_t>(i - 2)]);
        }
    }
    return grads;
}

template class BasicQNetwork<float>;
template class BasicQNetwork<double>;
template class BasicEncoder<float>;
template class BasicEncoder<double>;

}  // namespace afrl::neural
