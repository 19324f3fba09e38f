#include "core/idx_io.hpp"

#include <fstream>

#include "core/errors.hpp"

namespace vgc {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& is, const std::string& path) {
    unsigned char bytes[4];
    is.read(reinterpret_cast<char*>(bytes), 4);
    require(is.good(), ErrorKind::format, "truncated IDX file: " + path);
    return (static_cast<std::uint32_t>(bytes[0]) << 24) |
           (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) | static_cast<std::uint32_t>(bytes[3]);
}

void write_be32(std::ostream& os, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>((v >> 24) & 0xFF), static_cast<char>((v >> 16) & 0xFF),
                           static_cast<char>((v >> 8) & 0xFF), static_cast<char>(v & 0xFF)};
    os.write(bytes, 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream is(images_path, std::ios::binary);
    require(is.good(), ErrorKind::io, "cannot open IDX image file: " + images_path);
    const std::uint32_t magic = read_be32(is, images_path);
    require(magic == kImageMagic, ErrorKind::format,
            "bad IDX image magic in " + images_path + " (expected 0x00000803)");
    const std::uint32_t count = read_be32(is, images_path);
    const std::uint32_t rows = read_be32(is, images_path);
    const std::uint32_t cols = read_be32(is, images_path);
    const std::size_t pixels_per_image = static_cast<std::size_t>(rows) * cols;

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(count) * pixels_per_image);
    is.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    require(static_cast<std::size_t>(is.gcount()) == pixels.size(), ErrorKind::format,
            "truncated IDX image payload: " + images_path);

    Dataset out;
    out.points = Matrix(count, pixels_per_image);
    for (std::size_t i = 0; i < pixels.size(); ++i)
        out.points.flat()[i] = static_cast<double>(pixels[i]) / 255.0;
    out.provenance = "idx:" + images_path;

    if (!labels_path.empty()) {
        std::ifstream ls(labels_path, std::ios::binary);
        require(ls.good(), ErrorKind::io, "cannot open IDX label file: " + labels_path);
        const std::uint32_t label_magic = read_be32(ls, labels_path);
        require(label_magic == kLabelMagic, ErrorKind::format,
                "bad IDX label magic in " + labels_path + " (expected 0x00000801)");
        const std::uint32_t label_count = read_be32(ls, labels_path);
        require(label_count == count, ErrorKind::format,
                "IDX image/label count mismatch: " + std::to_string(count) + " images vs " +
                    std::to_string(label_count) + " labels");
        std::vector<std::uint8_t> raw(label_count);
        ls.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        require(static_cast<std::size_t>(ls.gcount()) == raw.size(), ErrorKind::format,
                "truncated IDX label payload: " + labels_path);
        out.labels.assign(raw.begin(), raw.end());
        out.has_labels = true;
    }
    return out;
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols) {
    require(pixels.size() == static_cast<std::size_t>(count) * rows * cols,
            ErrorKind::invalid_argument, "write_idx_images: pixel count mismatch");
    std::ofstream os(path, std::ios::binary);
    require(os.good(), ErrorKind::io, "cannot open for writing: " + path);
    write_be32(os, kImageMagic);
    write_be32(os, count);
    write_be32(os, rows);
    write_be32(os, cols);
    os.write(reinterpret_cast<const char*>(pixels.data()),
             static_cast<std::streamsize>(pixels.size()));
    require(os.good(), ErrorKind::io, "write failed: " + path);
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), ErrorKind::io, "cannot open for writing: " + path);
    write_be32(os, kLabelMagic);
    write_be32(os, static_cast<std::uint32_t>(labels.size()));
    os.write(reinterpret_cast<const char*>(labels.data()),
             static_cast<std::streamsize>(labels.size()));
    require(os.good(), ErrorKind::io, "write failed: " + path);
}

}  // namespace vgc
