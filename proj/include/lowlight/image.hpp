#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lowlight {

/// Row-major, channel-interleaved float image. Origin is top-left and
/// index(x, y, c) = (y * width + x) * channels + c.
///
/// Stored values are finite. They are normally in [0, 1] but intermediate
/// results (Laplacian bands, unclamped color transforms) may leave that range;
/// clamping happens at the codec boundary.
class Image {
 public:
  Image() = default;

  /// Zero-filled (or fill-valued) image. Throws on zero dimensions or a channel
  /// count other than 1 or 3.
  Image(int width, int height, int channels, float fill = 0.0f);

  /// Adopts an existing buffer. Throws if the length disagrees with the
  /// dimensions or if any value is not finite.
  Image(int width, int height, int channels, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  float at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }
  float& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

  /// Edge-replicated read.
  float clamped(int x, int y, int c = 0) const noexcept;

  std::span<const float> data() const& noexcept { return data_; }
  std::span<float> data() & noexcept { return data_; }
  // A span into a temporary would dangle.
  std::span<const float> data() const&& = delete;

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }
  bool same_size(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Splits a 3-channel image into three planar 1-channel images.
std::vector<Image> split_channels(const Image& img);

/// Inverse of split_channels. Throws a shape error unless given exactly three
/// 1-channel planes of equal size.
Image merge_channels(std::span<const Image> planes);

/// Extracts channel c as a 1-channel image.
Image channel(const Image& img, int c);

/// Throws a shape error unless a and b have identical dimensions and channels.
void require_same_shape(const Image& a, const Image& b, const char* what);
/// Throws a shape error unless img has the given channel count.
void require_channels(const Image& img, int channels, const char* what);

/// Clamps every value to [0, 1].
Image clamp01(Image img);

}  // namespace lowlight
