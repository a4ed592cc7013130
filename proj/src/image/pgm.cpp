#include "afrl/image/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "afrl/error.hpp"

namespace afrl::image {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
    std::string token;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    return token;
}

int header_int(std::istream& in, const std::filesystem::path& path, const char* what) {
    const std::string token = header_token(in);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw FormatError(path.string() + ": bad PGM " + what + " '" + token + "'");
    }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    if (header_token(in) != "P5") throw FormatError(path.string() + ": not a binary PGM (P5)");
    const int width = header_int(in, path, "width");
    const int height = header_int(in, path, "height");
    const int maxval = header_int(in, path, "maxval");
    if (width < 1 || height < 1) throw FormatError(path.string() + ": non-positive PGM dimensions");
    if (maxval != 255) throw FormatError(path.string() + ": only maxval 255 is supported");

    std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        throw TruncatedFileError(path.string() + ": truncated PGM payload");
    }
    std::vector<double> pixels(bytes.size());
    std::transform(bytes.begin(), bytes.end(), pixels.begin(), [](unsigned char b) { return b / 255.0; });
    return GrayImage(width, height, std::move(pixels));
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<unsigned char> bytes(img.size());
    std::transform(img.pixels().begin(), img.pixels().end(), bytes.begin(), [](double v) {
        return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    });
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace afrl::image
