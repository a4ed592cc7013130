#pragma once

#include <filesystem>
#include <vector>

#include "afrl/scan/scan.hpp"

namespace afrl::scan {

inline constexpr int kScanFormatVersion = 1;

/// Writes `manifest.json` plus one 8-bit PGM per frame (`frame_%05d.pgm`) or
/// per stack image (`pose_%05d_k_%03d.pgm`). The manifest carries a CRC-32 of
/// every image file. Creates the directory if needed.
void save_scan(const Scan& scan, const std::filesystem::path& dir);

/// Loads a scan directory written by save_scan.
/// Throws MissingManifestError, FormatVersionError, FrameCountError (naming the
/// first missing file), ChecksumError or CorruptHeaderError.
Scan load_scan(const std::filesystem::path& dir);

/// Subdirectories of `root` that contain a manifest, sorted by name.
std::vector<std::filesystem::path> list_scan_dirs(const std::filesystem::path& root);

}  // namespace afrl::scan
