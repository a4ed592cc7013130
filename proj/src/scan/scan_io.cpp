#include "afrl/scan/scan_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "afrl/error.hpp"
#include "afrl/image/pgm.hpp"

namespace afrl::scan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";

std::string frame_name(int t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%05d.pgm", t);
    return buf;
}

std::string stack_name(int pose, int k) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "pose_%05d_k_%03d.pgm", pose, k);
    return buf;
}

std::uint32_t file_crc(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::uint32_t write_image(const image::GrayImage& img, const fs::path& path) {
    image::write_pgm(img, path);
    return file_crc(path);
}

image::GrayImage read_checked(const fs::path& path, std::uint32_t expected_crc, const std::string& what) {
    if (!fs::exists(path)) {
        throw FrameCountError("scan directory is missing " + what + " (" + path.filename().string() + ")");
    }
    if (file_crc(path) != expected_crc) {
        throw ChecksumError("checksum mismatch for " + what + " (" + path.filename().string() + ")");
    }
    return image::read_pgm(path);
}

template <typename T>
T field(const json& manifest, const char* key) {
    if (!manifest.contains(key)) throw CorruptHeaderError(std::string("manifest lacks '") + key + "'");
    try {
        return manifest.at(key).get<T>();
    } catch (const json::exception& e) {
        throw CorruptHeaderError(std::string("manifest field '") + key + "': " + e.what());
    }
}

void write_manifest(const json& manifest, const fs::path& dir) {
    std::ofstream out(dir / kManifest, std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) throw FormatError("cannot write manifest in " + dir.string());
}

}  // namespace

void save_scan(const Scan& scan, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest;
    std::vector<std::uint32_t> crcs;
    if (const auto* sim = std::get_if<SimulatedScan>(&scan)) {
        sim->validate();
        for (int t = 0; t < sim->frame_count(); ++t) {
            crcs.push_back(write_image(sim->frames[static_cast<std::size_t>(t)], dir / frame_name(t)));
        }
        manifest["type"] = "simulated";
        manifest["frames"] = sim->frame_count();
        manifest["width"] = sim->frames.front().width();
        manifest["height"] = sim->frames.front().height();
        manifest["sigma0"] = sim->sigma0;
        manifest["f_star"] = sim->f_star;
        manifest["seed"] = sim->seed;
        manifest["source_id"] = sim->source_id;
    } else {
        const auto& stack = std::get<FocalStackScan>(scan);
        stack.validate();
        if (stack.images.empty()) throw ConfigError("focal stack scan has no poses");
        for (int p = 0; p < stack.pose_count(); ++p) {
            for (int k = 0; k < static_cast<int>(stack.focal_grid.size()); ++k) {
                crcs.push_back(write_image(stack.images[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)],
                                           dir / stack_name(p, k)));
            }
        }
        manifest["type"] = "stack";
        manifest["poses"] = stack.pose_count();
        manifest["width"] = stack.images.front().front().width();
        manifest["height"] = stack.images.front().front().height();
        manifest["focal_grid"] = stack.focal_grid;
        manifest["f_star"] = stack.f_star ? json(*stack.f_star) : json::array();
        manifest["seed"] = stack.seed;
        manifest["source_id"] = stack.source_id;
    }
    manifest["crc32"] = crcs;
    manifest["format_version"] = kScanFormatVersion;
    write_manifest(manifest, dir);
}

Scan load_scan(const fs::path& dir) {
    const fs::path manifest_path = dir / kManifest;
    if (!fs::exists(manifest_path)) throw MissingManifestError("no manifest.json in " + dir.string());
    json manifest;
    try {
        std::ifstream in(manifest_path);
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw CorruptHeaderError("unreadable manifest in " + dir.string() + ": " + e.what());
    }
    const int version = field<int>(manifest, "format_version");
    if (version != kScanFormatVersion) {
        throw FormatVersionError("unsupported scan format_version " + std::to_string(version) + " in " +
                                 dir.string());
    }
    const auto type = field<std::string>(manifest, "type");
    const auto crcs = field<std::vector<std::uint32_t>>(manifest, "crc32");

    if (type == "simulated") {
        SimulatedScan scan;
        const int frames = field<int>(manifest, "frames");
        if (frames < 1 || crcs.size() != static_cast<std::size_t>(frames)) {
            throw CorruptHeaderError("manifest frame count and checksum list disagree");
        }
        scan.sigma0 = field<double>(manifest, "sigma0");
        scan.f_star = field<std::vector<double>>(manifest, "f_star");
        scan.seed = field<std::uint64_t>(manifest, "seed");
        scan.source_id = field<std::string>(manifest, "source_id");
        for (int t = 0; t < frames; ++t) {
            scan.frames.push_back(read_checked(dir / frame_name(t), crcs[static_cast<std::size_t>(t)],
                                               "frame " + std::to_string(t)));
        }
        try {
            scan.validate();
        } catch (const ConfigError& e) {
            throw CorruptHeaderError(dir.string() + ": " + e.what());
        }
        return scan;
    }
    if (type == "stack") {
        FocalStackScan scan;
        const int poses = field<int>(manifest, "poses");
        scan.focal_grid = field<std::vector<double>>(manifest, "focal_grid");
        const std::size_t grid = scan.focal_grid.size();
        if (poses < 1 || crcs.size() != static_cast<std::size_t>(poses) * grid) {
            throw CorruptHeaderError("manifest pose count and checksum list disagree");
        }
        auto f_star = field<std::vector<double>>(manifest, "f_star");
        if (!f_star.empty()) scan.f_star = std::move(f_star);
        scan.seed = field<std::uint64_t>(manifest, "seed");
        scan.source_id = field<std::string>(manifest, "source_id");
        scan.images.resize(static_cast<std::size_t>(poses));
        for (int p = 0; p < poses; ++p) {
            for (std::size_t k = 0; k < grid; ++k) {
                scan.images[static_cast<std::size_t>(p)].push_back(
                    read_checked(dir / stack_name(p, static_cast<int>(k)), crcs[static_cast<std::size_t>(p) * grid + k],
                                 "pose " + std::to_string(p) + " grid index " + std::to_string(k)));
            }
        }
        try {
            scan.validate();
        } catch (const ConfigError& e) {
            throw CorruptHeaderError(dir.string() + ": " + e.what());
        }
        return scan;
    }
    throw CorruptHeaderError("unknown scan type '" + type + "' in " + dir.string());
}

std::vector<fs::path> list_scan_dirs(const fs::path& root) {
    std::vector<fs::path> dirs;
    if (!fs::is_directory(root)) return dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::exists(entry.path() / kManifest)) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

}  // namespace afrl::scan
