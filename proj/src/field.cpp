#include "ptycho/field.hpp"

#include <numbers>

namespace ptycho
{

namespace
{

std::vector<double> dftAxis(std::size_t n, double pixelSize)
{
  const double step = 2.0 * std::numbers::pi / (static_cast<double>(n) * pixelSize);
  std::vector<double> q(n);
  const std::size_t half = (n + 1) / 2; // first negative index is ceil(n/2)
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto k = i < half ? static_cast<double>(i)
                            : static_cast<double>(i) - static_cast<double>(n);
    q[i] = k * step;
  }
  return q;
}

} // namespace

FreqGrid::FreqGrid(std::size_t width, std::size_t height, double pixelSize)
{
  if (width < 2 || height < 2)
    throw InvalidArgument("frequency grid needs at least 2x2 samples");
  if (!(pixelSize > 0.0) || !std::isfinite(pixelSize))
    throw InvalidArgument("frequency grid pixel size must be positive");
  mQx = dftAxis(width, pixelSize);
  mQy = dftAxis(height, pixelSize);
  mStepX = 2.0 * std::numbers::pi / (static_cast<double>(width) * pixelSize);
  mStepY = 2.0 * std::numbers::pi / (static_cast<double>(height) * pixelSize);
}

FreqGrid freqGrid(std::size_t width, std::size_t height, double pixelSize)
{
  return FreqGrid(width, height, pixelSize);
}

double sumSquaredModulus(const ComplexField& f)
{
  double s = 0.0;
  for (const auto& v : f)
    s += std::norm(v);
  return s;
}

double sum(const RealField& f)
{
  double s = 0.0;
  for (double v : f)
    s += v;
  return s;
}

namespace
{

template <typename Fn>
RealField mapToReal(const ComplexField& f, Fn fn)
{
  RealField out(f.shape(), f.pixelSize());
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = fn(f[i]);
  return out;
}

} // namespace

RealField modulus(const ComplexField& f)
{
  return mapToReal(f, [](const Complex& c) { return std::abs(c); });
}

RealField phase(const ComplexField& f)
{
  return mapToReal(f, [](const Complex& c) { return std::arg(c); });
}

RealField realPart(const ComplexField& f)
{
  return mapToReal(f, [](const Complex& c) { return c.real(); });
}

RealField imagPart(const ComplexField& f)
{
  return mapToReal(f, [](const Complex& c) { return c.imag(); });
}

} // namespace ptycho
