#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "afrl/error.hpp"
#include "afrl/scan/walk.hpp"

namespace afrl::dqn {

/// Fixed-capacity FIFO ring. Once full, each push evicts the oldest entry.
template <typename T>
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw ConfigError("replay capacity must be positive");
    }

    void push(T item) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(item));
        } else {
            items_[head_] = std::move(item);
            head_ = (head_ + 1) % capacity_;
        }
        ++inserted_;
    }

    [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] std::uint64_t inserted() const noexcept { return inserted_; }

    /// Age order: 0 is the oldest entry still held.
    [[nodiscard]] const T& at(std::size_t i) const {
        if (i >= items_.size()) throw IndexError("replay index out of range");
        return items_[(head_ + i) % items_.size()];
    }
    [[nodiscard]] const T& oldest() const { return at(0); }

    /// `count` indices drawn uniformly with replacement over the current contents.
    [[nodiscard]] std::vector<std::size_t> sample_indices(std::size_t count, scan::Rng& rng) const {
        if (items_.empty()) throw UsageError("cannot sample from an empty replay memory");
        std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
        std::vector<std::size_t> out(count);
        for (auto& i : out) i = pick(rng);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::uint64_t inserted_ = 0;
    std::vector<T> items_;
};

inline constexpr std::int64_t kNoPatch = -1;

/// Append-only patch buffer addressed by monotonically increasing ids; the
/// front can be released once no transition refers to it.
template <std::size_t N>
class PatchStore {
public:
    using Patch = std::array<float, N>;

    std::int64_t push(const Patch& patch) {
        patches_.push_back(patch);
        return base_ + static_cast<std::int64_t>(patches_.size()) - 1;
    }

    [[nodiscard]] const Patch& at(std::int64_t id) const {
        if (id < base_ || id >= end_id()) throw IndexError("patch id not held");
        return patches_[static_cast<std::size_t>(id - base_)];
    }

    /// Drops every patch with id < `first_kept`.
    void release_before(std::int64_t first_kept) {
        while (base_ < first_kept && !patches_.empty()) {
            patches_.pop_front();
            ++base_;
        }
    }

    [[nodiscard]] std::int64_t base() const noexcept { return base_; }
    [[nodiscard]] std::int64_t end_id() const noexcept { return base_ + static_cast<std::int64_t>(patches_.size()); }
    [[nodiscard]] std::size_t size() const noexcept { return patches_.size(); }

private:
    std::deque<Patch> patches_;
    std::int64_t base_ = 0;
};

}  // namespace afrl::dqn
