#include "tce/idx.hpp"

#include <zlib.h>

#include <fstream>
#include <iterator>
#include <string>

#include "tce/error.hpp"

namespace tce::idx {
namespace {

constexpr std::size_t kMnistClasses = 10;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected, const char* what) {
  if (bytes.size() < 4 || read_be32(bytes, 0) != expected) {
    throw DataError(std::string("bad magic: ") + what + " file must start with 0x0000080" +
                    (expected == kImagesMagic ? "3" : "1"));
  }
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& compressed, const std::string& name) {
  z_stream stream{};
  if (inflateInit2(&stream, 16 + MAX_WBITS) != Z_OK) {
    throw DataError("cannot initialize gzip decoder for " + name);
  }
  stream.next_in = const_cast<Bytef*>(compressed.data());
  stream.avail_in = static_cast<uInt>(compressed.size());
  std::vector<std::uint8_t> out;
  std::uint8_t chunk[1 << 16];
  int status = Z_OK;
  while (status != Z_STREAM_END) {
    stream.next_out = chunk;
    stream.avail_out = sizeof chunk;
    status = inflate(&stream, Z_NO_FLUSH);
    if (status != Z_OK && status != Z_STREAM_END) {
      inflateEnd(&stream);
      throw DataError("corrupt gzip stream in " + name);
    }
    out.insert(out.end(), chunk, chunk + (sizeof chunk - stream.avail_out));
    if (status == Z_OK && stream.avail_in == 0 && stream.avail_out != 0) {
      inflateEnd(&stream);
      throw DataError("truncated gzip stream in " + name);
    }
  }
  inflateEnd(&stream);
  return out;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) {
    return gunzip(bytes, path.string());
  }
  return bytes;
}

Images parse_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kImagesMagic, "images");
  if (bytes.size() < 16) {
    throw DataError("truncated images header: need 16 bytes, found " + std::to_string(bytes.size()));
  }
  Images img;
  img.count = read_be32(bytes, 4);
  img.rows = read_be32(bytes, 8);
  img.cols = read_be32(bytes, 12);
  const std::size_t declared = img.count * img.rows * img.cols;
  const std::size_t actual = bytes.size() - 16;
  if (actual < declared) {
    throw DataError("truncated images payload: declared " + std::to_string(declared) +
                    " bytes, found " + std::to_string(actual));
  }
  img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(declared));
  return img;
}

std::vector<std::uint8_t> parse_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kLabelsMagic, "labels");
  if (bytes.size() < 8) {
    throw DataError("truncated labels header: need 8 bytes, found " + std::to_string(bytes.size()));
  }
  const std::size_t declared = read_be32(bytes, 4);
  const std::size_t actual = bytes.size() - 8;
  if (actual < declared) {
    throw DataError("truncated labels payload: declared " + std::to_string(declared) +
                    " labels, found " + std::to_string(actual));
  }
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(declared)};
}

std::vector<std::uint8_t> encode_images(const Images& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kImagesMagic);
  write_be32(out, static_cast<std::uint32_t>(images.count));
  write_be32(out, static_cast<std::uint32_t>(images.rows));
  write_be32(out, static_cast<std::uint32_t>(images.cols));
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

Dataset load_mnist(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const Images img = parse_images(read_file(images_path));
  const std::vector<std::uint8_t> raw_labels = parse_labels(read_file(labels_path));
  if (img.count != raw_labels.size()) {
    throw DataError("count mismatch: " + images_path.string() + " has " + std::to_string(img.count) +
                    " images but " + labels_path.string() + " has " +
                    std::to_string(raw_labels.size()) + " labels");
  }
  const std::size_t features = img.rows * img.cols;
  Matrix pixels(img.count, features);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    pixels.values()[i] = static_cast<double>(img.pixels[i]) / 255.0;
  }
  std::vector<Label> labels(raw_labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (raw_labels[i] >= kMnistClasses) {
      throw DataError("label value " + std::to_string(raw_labels[i]) + " at index " +
                      std::to_string(i) + " is not a digit class");
    }
    labels[i] = raw_labels[i];
  }
  return Dataset::from_labels(std::move(pixels), std::move(labels), kMnistClasses);
}

}  // namespace tce::idx
