#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tce/dataset.hpp"

namespace tce::idx {

inline constexpr std::uint32_t kImagesMagic = 0x00000803;
inline constexpr std::uint32_t kLabelsMagic = 0x00000801;

/// Reads a file, inflating it first if it starts with the gzip signature 1f 8b.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

struct Images {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;
};

/// Parse errors throw DataError naming the field ("bad magic", "truncated ...").
Images parse_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_images(const Images& images);
std::vector<std::uint8_t> encode_labels(std::span<const std::uint8_t> labels);

/// Loads an IDX image/label pair. Pixels are mapped to [0, 1]; no normalization.
/// MNIST has 10 classes, so labels >= 10 are rejected.
Dataset load_mnist(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

}  // namespace tce::idx
