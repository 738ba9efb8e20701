#include "lowlight/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowlight/error.hpp"

namespace lowlight {

namespace {

void check_dims(int width, int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::invalid_image, "image dimensions must be positive, got " +
                                              std::to_string(width) + "x" +
                                              std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw Error(ErrorKind::invalid_image,
                "channel count must be 1 or 3, got " + std::to_string(channels));
  }
}

std::string shape_str(const Image& img) {
  return std::to_string(img.width()) + "x" + std::to_string(img.height()) + "x" +
         std::to_string(img.channels());
}

}  // namespace

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                   static_cast<std::size_t>(channels),
               fill);
}

Image::Image(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height, channels);
  const std::size_t expected = static_cast<std::size_t>(width) *
                               static_cast<std::size_t>(height) *
                               static_cast<std::size_t>(channels);
  if (data_.size() != expected) {
    throw Error(ErrorKind::shape, "buffer length " + std::to_string(data_.size()) +
                                      " does not match " + std::to_string(width) + "x" +
                                      std::to_string(height) + "x" +
                                      std::to_string(channels));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorKind::invalid_image,
                  "non-finite sample at buffer index " + std::to_string(i));
    }
  }
}

float Image::clamped(int x, int y, int c) const noexcept {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y, c);
}

std::vector<Image> split_channels(const Image& img) {
  require_channels(img, 3, "split_channels");
  std::vector<Image> planes;
  planes.reserve(3);
  for (int c = 0; c < 3; ++c) planes.push_back(channel(img, c));
  return planes;
}

Image merge_channels(std::span<const Image> planes) {
  if (planes.size() != 3) {
    throw Error(ErrorKind::shape,
                "merge_channels expects 3 planes, got " + std::to_string(planes.size()));
  }
  for (const Image& p : planes) {
    if (p.channels() != 1 || !p.same_size(planes[0])) {
      throw Error(ErrorKind::shape, "merge_channels: plane " + shape_str(p) +
                                        " does not match " + shape_str(planes[0]));
    }
  }
  Image out(planes[0].width(), planes[0].height(), 3);
  auto dst = out.data();
  const std::size_t n = out.pixel_count();
  for (int c = 0; c < 3; ++c) {
    auto src = planes[c].data();
    for (std::size_t i = 0; i < n; ++i) dst[i * 3 + c] = src[i];
  }
  return out;
}

Image channel(const Image& img, int c) {
  if (c < 0 || c >= img.channels()) {
    throw Error(ErrorKind::shape, "channel " + std::to_string(c) + " out of range for " +
                                      shape_str(img));
  }
  Image out(img.width(), img.height(), 1);
  auto src = img.data();
  auto dst = out.data();
  const std::size_t stride = static_cast<std::size_t>(img.channels());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i * stride + c];
  return out;
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.empty() || !a.same_shape(b)) {
    throw Error(ErrorKind::shape, std::string(what) + ": shape mismatch " +
                                      shape_str(a) + " vs " + shape_str(b));
  }
}

void require_channels(const Image& img, int channels, const char* what) {
  if (img.empty() || img.channels() != channels) {
    throw Error(ErrorKind::shape, std::string(what) + ": expected " +
                                      std::to_string(channels) + "-channel image, got " +
                                      shape_str(img));
  }
}

Image clamp01(Image img) {
  for (float& v : img.data()) v = std::clamp(v, 0.0f, 1.0f);
  return img;
}

}  // namespace lowlight
