#include "ptycho/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace ptycho
{

namespace
{

// FFTW's planner is not thread safe; execution with new-array execute is.
std::mutex& plannerMutex()
{
  static std::mutex m;
  return m;
}

} // namespace

struct Fft2::Plans
{
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  double scale = 1.0;

  ~Plans()
  {
    std::lock_guard lock(plannerMutex());
    if (forward)
      fftw_destroy_plan(forward);
    if (inverse)
      fftw_destroy_plan(inverse);
  }
};

Fft2::Fft2(std::size_t width, std::size_t height)
  : mWidth(width), mHeight(height), mPlans(std::make_unique<Plans>())
{
  if (width == 0 || height == 0)
    throw InvalidArgument("FFT shape must be non-empty");

  // Plans are created on scratch buffers and later executed with
  // fftw_execute_dft on caller memory, hence FFTW_UNALIGNED.
  std::vector<Complex> a(width * height), b(width * height);
  auto* pa = reinterpret_cast<fftw_complex*>(a.data());
  auto* pb = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_MEASURE | FFTW_UNALIGNED;
  const int n0 = static_cast<int>(height);
  const int n1 = static_cast<int>(width);

  std::lock_guard lock(plannerMutex());
  mPlans->forward = fftw_plan_dft_2d(n0, n1, pa, pb, FFTW_FORWARD, flags);
  mPlans->inverse = fftw_plan_dft_2d(n0, n1, pa, pb, FFTW_BACKWARD, flags);
  if (!mPlans->forward || !mPlans->inverse)
    throw Error("FFTW failed to create a plan");
  mPlans->scale = 1.0 / std::sqrt(static_cast<double>(width * height));
}

Fft2::~Fft2() = default;
Fft2::Fft2(Fft2&&) noexcept = default;
Fft2& Fft2::operator=(Fft2&&) noexcept = default;

namespace
{

void execute(fftw_plan plan, double scale, std::span<const Complex> in,
             std::span<Complex> out, std::size_t n)
{
  if (in.size() != n || out.size() != n)
    throw InvalidArgument("FFT buffer size does not match plan shape");
  // FFTW takes a non-const input pointer but does not modify it for
  // out-of-place complex transforms.
  auto* pin = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
  auto* pout = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, pin, pout);
  for (auto& v : out)
    v *= scale;
}

const Fft2& cachedPlan(std::size_t width, std::size_t height)
{
  thread_local std::map<std::pair<std::size_t, std::size_t>, Fft2> cache;
  auto key = std::make_pair(width, height);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, Fft2(width, height)).first;
  return it->second;
}

} // namespace

void Fft2::forward(std::span<const Complex> in, std::span<Complex> out) const
{
  execute(mPlans->forward, mPlans->scale, in, out, mWidth * mHeight);
}

void Fft2::inverse(std::span<const Complex> in, std::span<Complex> out) const
{
  execute(mPlans->inverse, mPlans->scale, in, out, mWidth * mHeight);
}

ComplexField dft2(const ComplexField& f)
{
  if (f.empty())
    throw InvalidArgument("dft2 of an empty field");
  f.requireFinite("dft2");
  const double dq = 2.0 * std::numbers::pi / (static_cast<double>(f.width()) * f.pixelSize());
  ComplexField out(f.shape(), dq);
  cachedPlan(f.width(), f.height()).forward(f.values(), out.values());
  return out;
}

ComplexField idft2(const ComplexField& F)
{
  if (F.empty())
    throw InvalidArgument("idft2 of an empty field");
  F.requireFinite("idft2");
  const double dx = 2.0 * std::numbers::pi / (static_cast<double>(F.width()) * F.pixelSize());
  ComplexField out(F.shape(), dx);
  cachedPlan(F.width(), F.height()).inverse(F.values(), out.values());
  return out;
}

std::string fftBackendVersion()
{
  return fftw_version;
}

} // namespace ptycho
