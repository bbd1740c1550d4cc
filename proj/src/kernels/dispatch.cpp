#include <cstdlib>
#include <string>

#include "gsan/errors.hpp"
#include "gsan/kernels.hpp"

namespace gsan::kernels {

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::string_view name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    throw InvalidArgument("kernel ISA not supported on this CPU: " + std::string(name(isa)));
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return detail::kAvx2Table;
#endif
#if defined(__aarch64__)
    case Isa::Neon: return detail::kNeonTable;
#endif
    default: return detail::kScalarTable;
  }
}

namespace {

const KernelTable& select() noexcept {
  if (const char* env = std::getenv("GSAN_KERNELS")) {
    const std::string_view want(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (want == name(isa) && supported(isa)) return table(isa);
    }
  }
  if (supported(Isa::Avx2)) return table(Isa::Avx2);
  if (supported(Isa::Neon)) return table(Isa::Neon);
  return detail::kScalarTable;
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace gsan::kernels
