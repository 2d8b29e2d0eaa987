#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace mmf::detail {
namespace {

enum class Kind { Forward2D, Inverse2D, Forward1D, Inverse1D };
using PlanKey = std::tuple<Kind, int, int, std::size_t>;

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Kind kind, int n0, int n1, std::size_t batch) {
    std::lock_guard lock(mutex_);
    const PlanKey key{kind, n0, n1, batch};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    fftw_plan plan = make(kind, n0, n1, batch);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  static fftw_plan make(Kind kind, int n0, int n1, std::size_t batch) {
    const int howmany = static_cast<int>(batch);
    switch (kind) {
      case Kind::Forward2D:
      case Kind::Inverse2D: {
        const int n[2] = {n0, n1};
        const std::size_t real_len = static_cast<std::size_t>(n0) * n1 * batch;
        const std::size_t cplx_len = static_cast<std::size_t>(n0) * (n1 / 2 + 1) * batch;
        std::vector<double> r(real_len);
        std::vector<Complex> c(cplx_len);
        auto* cp = reinterpret_cast<fftw_complex*>(c.data());
        if (kind == Kind::Forward2D)
          return fftw_plan_many_dft_r2c(2, n, howmany, r.data(), nullptr, howmany, 1, cp, nullptr,
                                        howmany, 1, kFlags);
        return fftw_plan_many_dft_c2r(2, n, howmany, cp, nullptr, howmany, 1, r.data(), nullptr,
                                      howmany, 1, kFlags);
      }
      case Kind::Forward1D:
      case Kind::Inverse1D: {
        const int n[1] = {n0};
        const int nc = n0 / 2 + 1;
        std::vector<double> r(static_cast<std::size_t>(n0) * batch);
        std::vector<Complex> c(static_cast<std::size_t>(nc) * batch);
        auto* cp = reinterpret_cast<fftw_complex*>(c.data());
        if (kind == Kind::Forward1D)
          return fftw_plan_many_dft_r2c(1, n, howmany, r.data(), nullptr, 1, n0, cp, nullptr, 1, nc,
                                        kFlags);
        return fftw_plan_many_dft_c2r(1, n, howmany, cp, nullptr, 1, nc, r.data(), nullptr, 1, n0,
                                      kFlags);
      }
    }
    return nullptr;
  }

  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

std::vector<Complex>& scratch(std::size_t n) {
  thread_local std::vector<Complex> buffer;
  if (buffer.size() < n) buffer.resize(n);
  return buffer;
}

}  // namespace

void forward_2d(int nx, int ny, int batch, const double* in, Complex* out) {
  fftw_plan plan = cache().get(Kind::Forward2D, nx, ny, static_cast<std::size_t>(batch));
  // r2c does not modify its input.
  fftw_execute_dft_r2c(plan, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  const double scale = 1.0 / (static_cast<double>(nx) * ny);
  const std::size_t len = static_cast<std::size_t>(nx) * (ny / 2 + 1) * batch;
  for (std::size_t k = 0; k < len; ++k) out[k] *= scale;
}

void inverse_2d(int nx, int ny, int batch, const Complex* in, double* out) {
  fftw_plan plan = cache().get(Kind::Inverse2D, nx, ny, static_cast<std::size_t>(batch));
  const std::size_t len = static_cast<std::size_t>(nx) * (ny / 2 + 1) * batch;
  auto& buf = scratch(len);
  std::copy(in, in + len, buf.begin());
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(buf.data()), out);
}

void forward_1d(int n, std::size_t count, const double* in, Complex* out) {
  fftw_plan plan = cache().get(Kind::Forward1D, n, 0, count);
  fftw_execute_dft_r2c(plan, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  const double scale = 1.0 / n;
  const std::size_t len = static_cast<std::size_t>(n / 2 + 1) * count;
  for (std::size_t k = 0; k < len; ++k) out[k] *= scale;
}

void inverse_1d(int n, std::size_t count, const Complex* in, double* out) {
  fftw_plan plan = cache().get(Kind::Inverse1D, n, 0, count);
  const std::size_t len = static_cast<std::size_t>(n / 2 + 1) * count;
  auto& buf = scratch(len);
  std::copy(in, in + len, buf.begin());
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(buf.data()), out);
}

}  // namespace mmf::detail
