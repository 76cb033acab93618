#ifndef PTYCHO_FFT_HPP
#define PTYCHO_FFT_HPP

#include <memory>
#include <span>
#include <string>

#include "ptycho/field.hpp"

namespace ptycho
{

/// Unitary 2D DFT of a fixed shape.
///
/// Forward kernel is exp(-i q.r); both directions scale by 1/sqrt(width*height)
/// so that sum |.|^2 is conserved. A plan may be reused for any number of
/// transforms but must not be shared between threads while executing.
class Fft2
{
public:
  Fft2(std::size_t width, std::size_t height);
  ~Fft2();
  Fft2(Fft2&&) noexcept;
  Fft2& operator=(Fft2&&) noexcept;
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  std::size_t width() const { return mWidth; }
  std::size_t height() const { return mHeight; }

  /// in and out must not alias. Both must hold width*height values.
  void forward(std::span<const Complex> in, std::span<Complex> out) const;
  void inverse(std::span<const Complex> in, std::span<Complex> out) const;

private:
  struct Plans;
  std::size_t mWidth = 0, mHeight = 0;
  std::unique_ptr<Plans> mPlans;
};

/// Forward unitary DFT. Output pixel size carries the x frequency step 2*pi/(W*dx).
ComplexField dft2(const ComplexField& f);

/// Inverse of dft2; restores the spatial pixel size from the frequency step.
ComplexField idft2(const ComplexField& F);

/// Version string of the FFT backend.
std::string fftBackendVersion();

} // namespace ptycho

#endif
