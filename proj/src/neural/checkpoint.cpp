#include "afrl/neural/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "afrl/error.hpp"

namespace afrl::neural {

namespace {

constexpr char kMagic[4] = {'A', 'F', 'R', 'L'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

std::uint32_t crc_of(const char* data, std::size_t n) {
    return static_cast<std::uint32_t>(::crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    nlohmann::json header;
    header["dtype"] = "f32-le";
    header["tensors"] = nlohmann::json::array();
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
        header["tensors"].push_back({{"name", ckpt.params.name(i)}, {"shape", ckpt.params[i].shape}});
    }
    header["metadata"] = ckpt.metadata;
    const std::string header_text = header.dump();

    std::string payload;
    payload.reserve(ckpt.params.parameter_count() * 4);
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
        for (float v : ckpt.params[i].data) {
            std::uint32_t bits = 0;
            std::memcpy(&bits, &v, sizeof bits);
            put_u32(payload, bits);
        }
    }

    std::string blob(kMagic, 4);
    put_u32(blob, kCheckpointVersion);
    put_u32(blob, static_cast<std::uint32_t>(header_text.size()));
    blob += header_text;
    blob += payload;
    put_u32(blob, crc_of(payload.data(), payload.size()));

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw FormatError("cannot write checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint " + path.string());
    const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string where = " in checkpoint " + path.string();

    if (blob.size() < 12) throw TruncatedFileError("file too short" + where);
    if (std::memcmp(blob.data(), kMagic, 4) != 0) throw CorruptHeaderError("bad magic bytes" + where);
    const std::uint32_t version = get_u32(blob, 4);
    if (version != kCheckpointVersion) {
        throw FormatVersionError("unsupported checkpoint version " + std::to_string(version) + where);
    }
    const std::size_t header_len = get_u32(blob, 8);
    if (blob.size() < 12 + header_len) throw TruncatedFileError("header cut short" + where);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(blob.substr(12, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptHeaderError(std::string("unparsable header") + where + ": " + e.what());
    }

    Checkpoint ckpt;
    std::size_t floats = 0;
    try {
        if (header.at("dtype").get<std::string>() != "f32-le") throw CorruptHeaderError("unsupported dtype" + where);
        for (const auto& t : header.at("tensors")) {
            auto& tensor = ckpt.params.add(t.at("name").get<std::string>(), t.at("shape").get<std::vector<int>>());
            floats += tensor.size();
        }
        ckpt.metadata = header.value("metadata", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw CorruptHeaderError(std::string("malformed header") + where + ": " + e.what());
    } catch (const ShapeError& e) {
        throw CorruptHeaderError(std::string("malformed tensor table") + where + ": " + e.what());
    }

    const std::size_t payload_at = 12 + header_len;
    const std::size_t payload_len = floats * 4;
    if (blob.size() < payload_at + payload_len + 4) throw TruncatedFileError("payload cut short" + where);
    if (blob.size() > payload_at + payload_len + 4) throw CorruptHeaderError("trailing bytes" + where);
    if (crc_of(blob.data() + payload_at, payload_len) != get_u32(blob, payload_at + payload_len)) {
        throw ChecksumError("payload checksum mismatch" + where);
    }

    std::size_t at = payload_at;
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
        for (float& v : ckpt.params[i].data) {
            const std::uint32_t bits = get_u32(blob, at);
            std::memcpy(&v, &bits, sizeof v);
            at += 4;
        }
    }
    return ckpt;
}

}  // namespace afrl::neural
