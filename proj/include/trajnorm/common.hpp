#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace trajnorm {

/// Points per trajectory window.
inline constexpr int kWindowLength = 31;
/// Sliding-window stride, in points.
inline constexpr int kWindowStride = 10;
/// Features per point: x, y, vx, vy.
inline constexpr int kPointFeatures = 4;
/// Packed sample width: label + 31 points of (x, y, vx, vy).
inline constexpr int kPackedWidth = 1 + kWindowLength * kPointFeatures;
static_assert(kPackedWidth == 125);

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// One packed sample per row.
using Corpus = Eigen::MatrixXd;
using PackedSample = Eigen::Matrix<double, 1, kPackedWidth>;

enum class ClassLabel : int { pedestrian = 0, car = 1, bike = 2 };

inline constexpr bool is_valid_label(int value) { return value >= 0 && value <= 2; }

std::string_view label_name(ClassLabel label);

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Derives an independent stream seed from a global seed and a stage tag
/// (splitmix64 over the seed xor an FNV-1a hash of the tag).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace trajnorm
