#ifndef PTYCHO_FIELD_HPP
#define PTYCHO_FIELD_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ptycho/error.hpp"

namespace ptycho
{

using Complex = std::complex<double>;

/// Physical 2D vector in meters (object-plane coordinates).
struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Integer grid shape. Width runs along x (columns), height along y (rows).
struct Shape
{
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t size() const { return width * height; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Regular sampling grid: shape, pitch and the physical position of pixel (0,0).
struct GridGeometry
{
  Shape shape;
  double pixel_size = 1.0;
  Vec2 origin;
};

/// Row-major 2D sampled field with a uniform pixel pitch.
///
/// Element (ix, iy) lives at data()[iy * width + ix]. Fields are plain value
/// types; copying copies the samples.
template <typename T>
class Field2D
{
public:
  using value_type = T;

  Field2D() = default;

  Field2D(std::size_t width, std::size_t height, double pixelSize, T fill = T{})
    : mWidth(width), mHeight(height), mPixelSize(pixelSize), mData(width * height, fill)
  {
    if (!(pixelSize > 0.0) || !std::isfinite(pixelSize))
      throw InvalidArgument("field pixel size must be positive and finite");
  }

  Field2D(Shape shape, double pixelSize, T fill = T{})
    : Field2D(shape.width, shape.height, pixelSize, fill)
  {}

  Field2D(std::size_t width, std::size_t height, double pixelSize, std::vector<T> data)
    : Field2D(width, height, pixelSize)
  {
    if (data.size() != width * height)
      throw InvalidArgument("field data length " + std::to_string(data.size()) +
                            " does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
    mData = std::move(data);
  }

  std::size_t width() const { return mWidth; }
  std::size_t height() const { return mHeight; }
  Shape shape() const { return {mWidth, mHeight}; }
  std::size_t size() const { return mData.size(); }
  bool empty() const { return mData.empty(); }
  double pixelSize() const { return mPixelSize; }
  void setPixelSize(double p) { mPixelSize = p; }

  T& operator()(std::size_t ix, std::size_t iy) { return mData[iy * mWidth + ix]; }
  const T& operator()(std::size_t ix, std::size_t iy) const { return mData[iy * mWidth + ix]; }

  T& operator[](std::size_t i) { return mData[i]; }
  const T& operator[](std::size_t i) const { return mData[i]; }

  std::span<T> values() { return mData; }
  std::span<const T> values() const { return mData; }
  T* data() { return mData.data(); }
  const T* data() const { return mData.data(); }

  auto begin() { return mData.begin(); }
  auto end() { return mData.end(); }
  auto begin() const { return mData.begin(); }
  auto end() const { return mData.end(); }

  bool allFinite() const
  {
    for (const auto& v : mData)
      if (!isFiniteValue(v))
        return false;
    return true;
  }

  /// Throws NonFiniteError naming `what` if any sample is NaN/Inf.
  void requireFinite(const char* what) const
  {
    if (!allFinite())
      throw NonFiniteError(std::string(what) + ": field contains non-finite values");
  }

private:
  static bool isFiniteValue(double v) { return std::isfinite(v); }
  static bool isFiniteValue(const Complex& v)
  {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  }

  std::size_t mWidth = 0;
  std::size_t mHeight = 0;
  double mPixelSize = 1.0;
  std::vector<T> mData;
};

using ComplexField = Field2D<Complex>;
using RealField = Field2D<double>;

/// Angular spatial frequencies (rad/m) of a DFT grid in standard DFT order.
class FreqGrid
{
public:
  FreqGrid(std::size_t width, std::size_t height, double pixelSize);

  std::size_t width() const { return mQx.size(); }
  std::size_t height() const { return mQy.size(); }

  /// q_x of column ix; independent of the row.
  double qx(std::size_t ix) const { return mQx[ix]; }
  /// q_y of row iy; independent of the column.
  double qy(std::size_t iy) const { return mQy[iy]; }

  double stepX() const { return mStepX; }
  double stepY() const { return mStepY; }

  std::span<const double> qxAxis() const { return mQx; }
  std::span<const double> qyAxis() const { return mQy; }

private:
  std::vector<double> mQx, mQy;
  double mStepX, mStepY;
};

/// Builds the frequency grid for a width x height field of the given pitch.
/// Step is 2*pi/(N*pixel_size); index N/2 of an even axis holds -pi/pixel_size.
FreqGrid freqGrid(std::size_t width, std::size_t height, double pixelSize);

double sumSquaredModulus(const ComplexField& f);
double sum(const RealField& f);

RealField modulus(const ComplexField& f);
RealField phase(const ComplexField& f);
RealField realPart(const ComplexField& f);
RealField imagPart(const ComplexField& f);

} // namespace ptycho

#endif
