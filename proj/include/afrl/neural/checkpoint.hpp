#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "afrl/neural/params.hpp"

namespace afrl::neural {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// A named tensor set plus free-form metadata.
///
/// On disk: "AFRL", u32 version, u32 header length, JSON header
/// {"dtype": "f32-le", "tensors": [{"name", "shape"}...], "metadata": {...}},
/// the float32 little-endian payloads in header order, then a u32 CRC-32 of the
/// payload. All integers little-endian.
struct Checkpoint {
    ParamSet params;
    nlohmann::json metadata = nlohmann::json::object();
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws CorruptHeaderError (bad magic, unparsable header, trailing bytes),
/// FormatVersionError, TruncatedFileError or ChecksumError.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace afrl::neural
