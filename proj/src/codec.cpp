#include "lowlight/codec.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "lowlight/error.hpp"

namespace lowlight {

namespace {

constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                        '\r', '\n', 0x1a, '\n'};

[[noreturn]] void decode_fail(const std::string& what, std::size_t offset) {
  throw Error(ErrorKind::decode, what + " at offset " + std::to_string(offset));
}

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

// Walks the chunk structure before libpng sees the stream so that truncation
// and unsupported layouts are reported with byte offsets.
struct PngHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

PngHeader scan_png(std::span<const std::uint8_t> bytes) {
  PngHeader hdr;
  std::size_t pos = kPngSignature.size();
  bool saw_ihdr = false;
  bool saw_idat = false;
  while (true) {
    if (pos + 8 > bytes.size()) decode_fail("truncated PNG chunk header", pos);
    const std::uint32_t len = read_be32(bytes, pos);
    const std::size_t chunk_at = pos;
    char type[5] = {};
    std::memcpy(type, bytes.data() + pos + 4, 4);
    if (len > 0x7fffffffu) decode_fail("invalid PNG chunk length", chunk_at);
    const std::size_t data_at = pos + 8;
    if (data_at + len + 4 > bytes.size()) {
      decode_fail(std::string("truncated PNG chunk '") + type + "'", chunk_at);
    }
    const std::string_view t(type, 4);
    if (!saw_ihdr) {
      if (t != "IHDR" || len != 13) decode_fail("PNG stream must start with IHDR", chunk_at);
      hdr.width = read_be32(bytes, data_at);
      hdr.height = read_be32(bytes, data_at + 4);
      hdr.bit_depth = bytes[data_at + 8];
      hdr.color_type = bytes[data_at + 9];
      if (hdr.width == 0 || hdr.height == 0 || hdr.width > 0x7fffffu ||
          hdr.height > 0x7fffffu) {
        decode_fail("invalid PNG dimensions", data_at);
      }
      saw_ihdr = true;
    } else if (t == "IDAT") {
      saw_idat = true;
    } else if (t == "IEND") {
      if (!saw_idat) decode_fail("PNG stream has no IDAT", chunk_at);
      break;
    }
    pos = data_at + len + 4;
  }

  if (hdr.color_type == 3) {
    throw Error(ErrorKind::unsupported_format, "palette PNG images are not supported");
  }
  if (hdr.color_type == 4 || hdr.color_type == 6) {
    throw Error(ErrorKind::unsupported_format, "PNG images with alpha are not supported");
  }
  if (hdr.color_type != 0 && hdr.color_type != 2) {
    decode_fail("invalid PNG color type " + std::to_string(hdr.color_type), 25);
  }
  if (hdr.bit_depth != 8) {
    throw Error(ErrorKind::unsupported_format,
                std::to_string(hdr.bit_depth) + "-bit PNG images are not supported");
  }
  return hdr;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  const PngHeader hdr = scan_png(bytes);
  const int channels = hdr.color_type == 0 ? 1 : 3;

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::decode, "PNG header: " + msg);
  }
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::decode, "PNG payload: " + msg);
  }

  std::vector<float> data(raw.size());
  std::transform(raw.begin(), raw.end(), data.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
  return Image(static_cast<int>(hdr.width), static_cast<int>(hdr.height), channels,
               std::move(data));
}

std::vector<std::uint8_t> encode_png(const Image& img, std::span<const std::uint8_t> samples) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, samples.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::io, "PNG encode: " + msg);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, samples.data(), 0,
                                 nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::io, "PNG encode: " + msg);
  }
  out.resize(size);
  return out;
}

// Binary PNM header tokenizer: whitespace and '#' comments between fields.
class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  unsigned long next_number(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 0xffffffUL) decode_fail(std::string("PNM ") + field + " too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= bytes_.size()) decode_fail(std::string("truncated PNM header before ") + field, pos_);
      decode_fail(std::string("malformed PNM ") + field, pos_);
    }
    return value;
  }

  void expect_single_space() {
    if (pos_ >= bytes_.size()) decode_fail("truncated PNM header", pos_);
    if (!is_space(bytes_[pos_])) decode_fail("expected whitespace after PNM maxval", pos_);
    ++pos_;
  }

 private:
  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

Image decode_pnm(std::span<const std::uint8_t> bytes) {
  const int channels = bytes[1] == '5' ? 1 : 3;
  PnmReader reader(bytes);
  const unsigned long width = reader.next_number("width");
  const unsigned long height = reader.next_number("height");
  const std::size_t maxval_at = reader.pos();
  const unsigned long maxval = reader.next_number("maxval");
  if (width == 0 || height == 0) decode_fail("PNM dimensions must be positive", maxval_at);
  if (maxval > 255) {
    throw Error(ErrorKind::unsupported_format,
                "16-bit PNM (maxval " + std::to_string(maxval) + ") is not supported");
  }
  if (maxval != 255) {
    throw Error(ErrorKind::unsupported_format,
                "PNM maxval " + std::to_string(maxval) + " is not supported (expected 255)");
  }
  reader.expect_single_space();

  const std::size_t start = reader.pos();
  const std::size_t count = width * height * static_cast<std::size_t>(channels);
  if (bytes.size() - start < count) {
    decode_fail("truncated PNM payload (expected " + std::to_string(count) +
                    " bytes, found " + std::to_string(bytes.size() - start) + ")",
                bytes.size());
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = static_cast<float>(bytes[start + i]) / 255.0f;
  }
  return Image(static_cast<int>(width), static_cast<int>(height), channels, std::move(data));
}

std::vector<std::uint8_t> encode_pnm(const Image& img, std::span<const std::uint8_t> samples) {
  const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), samples.begin(), samples.end());
  return out;
}

}  // namespace

std::uint8_t quantize(float v) noexcept {
  const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= kPngSignature.size() &&
      std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') {
    throw Error(ErrorKind::unsupported_format,
                std::string("PNM variant P") + static_cast<char>(bytes[1]) +
                    " is not supported (binary P5/P6 only)");
  }
  decode_fail("unrecognized image signature", 0);
}

std::vector<std::uint8_t> encode_image(const Image& img, ImageFormat format) {
  if (img.empty() || (img.channels() != 1 && img.channels() != 3)) {
    throw Error(ErrorKind::invalid_image, "encode_image: channels must be 1 or 3");
  }
  std::vector<std::uint8_t> samples(img.size());
  std::transform(img.data().begin(), img.data().end(), samples.begin(), quantize);
  return format == ImageFormat::png8 ? encode_png(img, samples) : encode_pnm(img, samples);
}

ImageFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return ImageFormat::png8;
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return ImageFormat::ppm;
  throw Error(ErrorKind::parameter, "cannot infer image format from '" + path.string() +
                                        "' (use .png, .ppm or .pgm)");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "failed reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "failed writing '" + path.string() + "'");
}

Image read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw e.with_stage(path.string());
  }
}

void write_image(const std::filesystem::path& path, const Image& img) {
  write_image(path, img, format_for_path(path));
}

void write_image(const std::filesystem::path& path, const Image& img, ImageFormat format) {
  write_file(path, encode_image(img, format));
}

}  // namespace lowlight
