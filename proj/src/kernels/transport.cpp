#include "vbgk/error.hpp"
#include "vbgk/kernels.hpp"

namespace vbgk {

void apply_phases(std::span<std::complex<double>> spectrum, std::span<const std::complex<double>> phases,
                  Execution exec) {
  if (spectrum.size() != phases.size()) throw InvalidArgument("apply_phases: spectrum and phase table differ in size");
  const auto n = static_cast<long long>(spectrum.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) spectrum[static_cast<std::size_t>(i)] *= phases[static_cast<std::size_t>(i)];
  } else {
    for (long long i = 0; i < n; ++i) spectrum[static_cast<std::size_t>(i)] *= phases[static_cast<std::size_t>(i)];
  }
}

}  // namespace vbgk
