#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/dataset.hpp"

namespace vgc {

// IDX image/label readers (the MNIST container format). Integers are
// big-endian; image files carry magic 0x00000803 with count x rows x cols
// dimensions, label files carry 0x00000801. Pixels are scaled to [0, 1]
// by division with 255. labels_path may be empty.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Writers for the same layout, used for round-trip checks and fixtures.
void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

}  // namespace vgc
