#include "afrl/neural/params.hpp"

#include <algorithm>
#include <cmath>

#include "afrl/error.hpp"

namespace afrl::neural {

std::size_t shape_volume(std::span<const int> shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 1) throw ShapeError("tensor dimensions must be positive");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

template <typename T>
BasicTensor<T>::BasicTensor(std::vector<int> dims, T fill) : shape(std::move(dims)), data(shape_volume(shape), fill) {}

template <typename T>
BasicTensor<T>& BasicParamSet<T>::add(std::string name, std::vector<int> shape) {
    if (contains(name)) throw ShapeError("duplicate parameter name '" + name + "'");
    names_.push_back(std::move(name));
    tensors_.emplace_back(std::move(shape));
    return tensors_.back();
}

template <typename T>
BasicTensor<T>& BasicParamSet<T>::at(std::string_view name) {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw ShapeError("no parameter named '" + std::string(name) + "'");
    return tensors_[static_cast<std::size_t>(it - names_.begin())];
}

template <typename T>
const BasicTensor<T>& BasicParamSet<T>::at(std::string_view name) const {
    return const_cast<BasicParamSet*>(this)->at(name);
}

template <typename T>
bool BasicParamSet<T>::contains(std::string_view name) const noexcept {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

template <typename T>
BasicParamSet<T> BasicParamSet<T>::zeros_like() const {
    BasicParamSet out;
    for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], tensors_[i].shape);
    return out;
}

template <typename T>
void BasicParamSet<T>::check_aligned(const BasicParamSet& other) const {
    if (other.size() != size()) {
        throw ShapeError("parameter sets differ in tensor count (" + std::to_string(size()) + " vs " +
                         std::to_string(other.size()) + ")");
    }
    for (std::size_t i = 0; i < size(); ++i) {
        if (names_[i] != other.names_[i] || tensors_[i].shape != other.tensors_[i].shape) {
            throw ShapeError("parameter '" + names_[i] + "' is not aligned with '" + other.names_[i] + "'");
        }
    }
}

template <typename T>
std::size_t BasicParamSet<T>::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
}

template <typename T>
bool BasicParamSet<T>::all_finite() const noexcept {
    return std::all_of(tensors_.begin(), tensors_.end(), [](const BasicTensor<T>& t) {
        return std::all_of(t.data.begin(), t.data.end(), [](T v) { return std::isfinite(v); });
    });
}

template <typename T>
void BasicParamSet<T>::append(const BasicParamSet& other, std::string_view prefix) {
    for (std::size_t i = 0; i < other.size(); ++i) {
        add(std::string(prefix) + other.names_[i], other.tensors_[i].shape).data = other.tensors_[i].data;
    }
}

template <typename T>
BasicParamSet<T> BasicParamSet<T>::extract(std::string_view prefix) const {
    BasicParamSet out;
    for (std::size_t i = 0; i < size(); ++i) {
        if (names_[i].starts_with(prefix)) {
            out.add(names_[i].substr(prefix.size()), tensors_[i].shape).data = tensors_[i].data;
        }
    }
    return out;
}

template <typename T>
void BasicParamSet<T>::for_each(const std::function<void(const std::string&, BasicTensor<T>&)>& fn) {
    for (std::size_t i = 0; i < size(); ++i) fn(names_[i], tensors_[i]);
}

template struct BasicTensor<float>;
template struct BasicTensor<double>;
template class BasicParamSet<float>;
template class BasicParamSet<double>;

}  // namespace afrl::neural
