#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace afrl::neural {

/// Dense row-major buffer with an explicit shape.
template <typename T>
struct BasicTensor {
    std::vector<int> shape;
    std::vector<T> data;

    BasicTensor() = default;
    explicit BasicTensor(std::vector<int> dims, T fill = T{0});

    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }
    friend bool operator==(const BasicTensor&, const BasicTensor&) = default;
};

std::size_t shape_volume(std::span<const int> shape);

/// Ordered collection of named tensors. Two sets are "aligned" when they hold
/// the same names with the same shapes in the same order.
template <typename T>
class BasicParamSet {
public:
    BasicTensor<T>& add(std::string name, std::vector<int> shape);

    [[nodiscard]] std::size_t size() const noexcept { return tensors_.size(); }
    [[nodiscard]] const std::string& name(std::size_t i) const { return names_[i]; }
    [[nodiscard]] BasicTensor<T>& operator[](std::size_t i) { return tensors_[i]; }
    [[nodiscard]] const BasicTensor<T>& operator[](std::size_t i) const { return tensors_[i]; }

    /// Throws ShapeError when the name is absent.
    [[nodiscard]] BasicTensor<T>& at(std::string_view name);
    [[nodiscard]] const BasicTensor<T>& at(std::string_view name) const;
    [[nodiscard]] bool contains(std::string_view name) const noexcept;

    /// Same names and shapes, all values zero.
    [[nodiscard]] BasicParamSet zeros_like() const;

    /// Throws ShapeError unless `other` is aligned with this set.
    void check_aligned(const BasicParamSet& other) const;

    [[nodiscard]] std::size_t parameter_count() const noexcept;
    [[nodiscard]] bool all_finite() const noexcept;

    /// Copies every tensor of `other` in under `prefix + name`.
    void append(const BasicParamSet& other, std::string_view prefix);
    /// Subset whose names start with `prefix`, with the prefix stripped.
    [[nodiscard]] BasicParamSet extract(std::string_view prefix) const;

    void for_each(const std::function<void(const std::string&, BasicTensor<T>&)>& fn);

    friend bool operator==(const BasicParamSet&, const BasicParamSet&) = default;

private:
    std::vector<std::string> names_;
    std::vector<BasicTensor<T>> tensors_;
};

using Tensor = BasicTensor<float>;
using ParamSet = BasicParamSet<float>;

/// Converts element type, keeping names and shapes.
template <typename To, typename From>
BasicParamSet<To> convert_params(const BasicParamSet<From>& src) {
    BasicParamSet<To> out;
    for (std::size_t i = 0; i < src.size(); ++i) {
        auto& t = out.add(src.name(i), src[i].shape);
        for (std::size_t j = 0; j < t.data.size(); ++j) t.data[j] = static_cast<To>(src[i].data[j]);
    }
    return out;
}

}  // namespace afrl::neural
