#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "afrl/error.hpp"
#include "afrl/neural/checkpoint.hpp"
#include "afrl/neural/network.hpp"
#include "afrl/neural/optim.hpp"
#include "support.hpp"

using namespace afrl;
using namespace afrl::neural;

namespace {

template <typename T>
void randomize(BasicParamSet<T>& ps, std::uint64_t seed, double scale = 0.5) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    ps.for_each([&](const std::string&, BasicTensor<T>& t) {
        for (auto& v : t.data) v = static_cast<T>(u(rng));
    });
}

RowMatrix<double> random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RowMatrix<double> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

/// Checks every analytic gradient of `loss(params)` against a central difference.
template <typename Loss>
void check_gradients(BasicParamSet<double>& params, const BasicParamSet<double>& analytic, Loss loss) {
    const double h = 1e-6;
    double worst = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        for (std::size_t j = 0; j < params[i].data.size(); ++j) {
            double& p = params[i].data[j];
            const double saved = p;
            p = saved + h;
            const double up = loss();
            p = saved - h;
            const double down = loss();
            p = saved;
            worst = std::max(worst, rel_err(analytic[i].data[j], (up - down) / (2 * h)));
        }
    }
    CHECK(worst < 1e-4);
}

/// Direct (non-im2col) encoder: stride-2 3x3 convolutions with zero padding, ReLU, mean pool.
std::vector<double> encoder_oracle(const BasicParamSet<double>& p, std::vector<double> x, int size, int depth) {
    int in_c = 1;
    for (int l = 1; l <= depth; ++l) {
        const auto& w = p.at("conv" + std::to_string(l) + ".weight");
        const auto& b = p.at("conv" + std::to_string(l) + ".bias");
        const int out_c = w.shape[0];
        const int out = (size + 1) / 2;
        std::vector<double> y(static_cast<std::size_t>(out_c * out * out));
        for (int o = 0; o < out_c; ++o) {
            for (int oy = 0; oy < out; ++oy) {
                for (int ox = 0; ox < out; ++ox) {
                    double acc = b.data[static_cast<std::size_t>(o)];
                    for (int c = 0; c < in_c; ++c) {
                        for (int ky = 0; ky < 3; ++ky) {
                            for (int kx = 0; kx < 3; ++kx) {
                                const int iy = 2 * oy + ky - 1, ix = 2 * ox + kx - 1;
                                if (iy < 0 || ix < 0 || iy >= size || ix >= size) continue;
                                acc += w.data[static_cast<std::size_t>(((o * in_c + c) * 3 + ky) * 3 + kx)] *
                                       x[static_cast<std::size_t>((c * size + iy) * size + ix)];
                            }
                        }
                    }
                    y[static_cast<std::size_t>((o * out + oy) * out + ox)] = std::max(0.0, acc);
                }
            }
        }
        x = std::move(y);
        in_c = out_c;
        size = out;
    }
    std::vector<double> pooled(static_cast<std::size_t>(in_c), 0.0);
    for (int c = 0; c < in_c; ++c) {
        for (int k = 0; k < size * size; ++k) pooled[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(c * size * size + k)];
        pooled[static_cast<std::size_t>(c)] /= size * size;
    }
    return pooled;
}

}  // namespace

TEST_CASE("q-network forward matches a hand-written MLP") {
    auto net = BasicQNetwork<double>::initialized(5, 3, 7);
    randomize(net.params(), 11);
    const std::vector<double> s{0.3, -0.2, 0.9, 0.0, 1.5};
    const auto& p = net.params();
    auto layer = [&](const std::string& name, const std::vector<double>& in, bool relu) {
        const auto& w = p.at(name + ".weight");
        const auto& b = p.at(name + ".bias");
        const int out = w.shape[0], n = w.shape[1];
        std::vector<double> y(static_cast<std::size_t>(out));
        for (int o = 0; o < out; ++o) {
            double acc = b.data[static_cast<std::size_t>(o)];
            for (int i = 0; i < n; ++i) acc += w.data[static_cast<std::size_t>(o * n + i)] * in[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(o)] = relu ? std::max(0.0, acc) : acc;
        }
        return y;
    };
    const auto q_ref = layer("fc3", layer("fc2", layer("fc1", s, true), true), false);
    const auto q = net.forward(s);
    for (int a = 0; a < kActionCount; ++a) CHECK(q[static_cast<std::size_t>(a)] == doctest::Approx(q_ref[static_cast<std::size_t>(a)]).epsilon(1e-12));

    RowMatrix<double> batch(2, 5);
    batch.row(0) = Eigen::Map<const Eigen::RowVectorXd>(s.data(), 5);
    batch.row(1).setZero();
    const auto qb = net.forward_batch(batch);
    CHECK(qb(0, 2) == doctest::Approx(q_ref[2]).epsilon(1e-12));
    CHECK_THROWS_AS((void)net.forward(std::vector<double>(4, 0.0)), ShapeError);
    CHECK(BasicQNetwork<float>(16).params().parameter_count() == 16 * 256 + 256 + 256 * 256 + 256 + 256 * 3 + 3);
}

TEST_CASE("q-network gradients match finite differences") {
    auto net = BasicQNetwork<double>::initialized(6, 21, 9);
    randomize(net.params(), 22);
    const auto states = random_matrix(4, 6, 23);
    const auto dq = random_matrix(4, 3, 24);
    MlpTape<double> tape;
    (void)net.forward_batch(states, &tape);
    RowMatrix<double> d_in;
    const auto grads = net.backward(tape, dq, &d_in);
    auto loss = [&] { return (net.forward_batch(states).array() * dq.array()).sum(); };
    check_gradients(net.params(), grads, loss);

    auto shifted = states;
    double worst = 0;
    for (Eigen::Index i = 0; i < states.size(); ++i) {
        const double saved = shifted.data()[i];
        shifted.data()[i] = saved + 1e-6;
        const double up = (net.forward_batch(shifted).array() * dq.array()).sum();
        shifted.data()[i] = saved - 1e-6;
        const double down = (net.forward_batch(shifted).array() * dq.array()).sum();
        shifted.data()[i] = saved;
        worst = std::max(worst, rel_err(d_in.data()[i], (up - down) / 2e-6));
    }
    CHECK(worst < 1e-4);

    CHECK_THROWS_AS((void)net.backward(MlpTape<double>{}, dq), UsageError);
}

TEST_CASE("encoder forward matches a direct convolution") {
    auto enc = BasicEncoder<double>::initialized(31, 16, 3, 3);
    randomize(enc.params(), 32);
    CHECK(enc.layer_sizes() == std::vector<int>{8, 4, 2});
    const auto patch = random_matrix(1, 256, 33);
    const std::vector<double> x(patch.data(), patch.data() + 256);
    const auto ref = encoder_oracle(enc.params(), x, 16, 3);
    const auto got = enc.encode(x);
    REQUIRE(got.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(ref[c]).epsilon(1e-12));
    CHECK_THROWS_AS((void)enc.encode(std::vector<double>(255, 0.0)), ShapeError);

    BasicEncoder<float> standard;
    CHECK(standard.layer_sizes() == std::vector<int>{16, 8, 4, 2});
    CHECK(standard.output_width() == 8);
}

TEST_CASE("encoder gradients match finite differences") {
    auto enc = BasicEncoder<double>::initialized(41, 8, 3, 2);
    randomize(enc.params(), 42);
    const auto patches = random_matrix(3, 64, 43);
    const auto d_out = random_matrix(3, 3, 44);
    EncoderTape<double> tape;
    (void)enc.forward_batch(patches, &tape);
    const auto grads = enc.backward(tape, d_out);
    auto loss = [&] { return (enc.forward_batch(patches).array() * d_out.array()).sum(); };
    check_gradients(enc.params(), grads, loss);
    CHECK_THROWS_AS((void)enc.backward(EncoderTape<double>{}, d_out), UsageError);
}

TEST_CASE("initialization is seeded and fan-in bounded") {
    const auto a = QNetwork::initialized(16, 5);
    CHECK(a.params() == QNetwork::initialized(16, 5).params());
    CHECK_FALSE(a.params() == QNetwork::initialized(16, 6).params());
    const double bound = std::sqrt(1.0 / 16.0);
    for (float v : a.params().at("fc1.weight").data) CHECK(std::abs(v) <= bound);
    for (float v : a.params().at("fc1.bias").data) CHECK(v == 0.0f);
}

TEST_CASE("huber loss and gradient") {
    CHECK(huber_loss(std::vector<double>{0.5}, std::vector<double>{0.0}) == 0.125);
    CHECK(huber_loss(std::vector<double>{3.0}, std::vector<double>{0.0}) == 2.5);
    CHECK(huber_loss(std::vector<double>{0.5, 3.0}, std::vector<double>{0.0, 0.0}) == doctest::Approx(1.3125));
    CHECK(huber_grad(0.5) == 0.5);
    CHECK(huber_grad(3.0) == 1.0);
    CHECK(huber_grad(-3.0) == -1.0);
    CHECK_THROWS_AS(huber_loss(std::vector<double>{1.0}, std::vector<double>{}), ShapeError);
}

TEST_CASE("rmsprop first step") {
    ParamSet params;
    params.add("w", {2});
    auto grads = params.zeros_like();
    grads[0].data = {1.0f, -2.0f};
    RmsProp opt(params);
    opt.step(params, grads);
    const double expect = 1e-5 / (std::sqrt(0.05) + 1e-8);
    CHECK(params[0].data[0] == doctest::Approx(-expect).epsilon(1e-6));
    CHECK(params[0].data[1] == doctest::Approx(expect).epsilon(1e-6));  // |g| cancels on the first step
    CHECK(opt.accumulator[0].data[1] == doctest::Approx(0.2).epsilon(1e-6));

    ParamSet other;
    other.add("v", {2});
    CHECK_THROWS_AS(opt.step(params, other), ShapeError);
}

TEST_CASE("checkpoint round trip") {
    const auto dir = test::temp_dir("ckpt");
    Checkpoint ckpt;
    ckpt.params = QNetwork::initialized(16, 3).params();
    ckpt.metadata = {{"variant", "rl-mgm"}, {"experiences", 1234}};
    save_checkpoint(ckpt, dir / "a.ckpt");
    const auto back = load_checkpoint(dir / "a.ckpt");
    CHECK(back.params == ckpt.params);
    CHECK(back.metadata == ckpt.metadata);
    CHECK_THROWS_AS(load_checkpoint(dir / "none.ckpt"), FormatError);
}

TEST_CASE("checkpoint corruption is classified") {
    const auto dir = test::temp_dir("ckpt_bad");
    Checkpoint ckpt;
    ckpt.params = QNetwork::initialized(4, 1, 8).params();
    save_checkpoint(ckpt, dir / "good.ckpt");
    std::string blob;
    {
        std::ifstream in(dir / "good.ckpt", std::ios::binary);
        blob.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto write = [&](const std::string& name, const std::string& bytes) {
        std::ofstream(dir / name, std::ios::binary) << bytes;
        return dir / name;
    };
    std::uint32_t header_len = 0;
    std::memcpy(&header_len, blob.data() + 8, 4);

    auto bad = blob;
    bad[0] = 'X';
    CHECK_THROWS_AS(load_checkpoint(write("magic.ckpt", bad)), CorruptHeaderError);
    bad = blob;
    bad[4] = 9;
    CHECK_THROWS_AS(load_checkpoint(write("version.ckpt", bad)), FormatVersionError);
    CHECK_THROWS_AS(load_checkpoint(write("short.ckpt", blob.substr(0, blob.size() - 6))), TruncatedFileError);
    CHECK_THROWS_AS(load_checkpoint(write("long.ckpt", blob + "zz")), CorruptHeaderError);
    bad = blob;
    bad[12 + header_len + 5] ^= 0x40;
    CHECK_THROWS_AS(load_checkpoint(write("crc.ckpt", bad)), ChecksumError);
    bad = blob;
    bad[12] = '!';
    CHECK_THROWS_AS(load_checkpoint(write("json.ckpt", bad)), CorruptHeaderError);
}
