#include "west/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace west::simd {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool avx2_usable() {
  // the table is zeroed when the TU was built without AVX2 support
  return cpu_has_avx2_fma() && detail::avx2_table<float>().dot != nullptr;
}

struct State {
  Variant variant;
  KernelTable<float> f;
  KernelTable<double> d;

  State() {
    variant = avx2_usable() ? Variant::avx2 : Variant::scalar;
    if (const char* env = std::getenv("WEST_SIMD")) {
      if (std::strcmp(env, "scalar") == 0) variant = Variant::scalar;
      else if (std::strcmp(env, "avx2") == 0 && avx2_usable()) variant = Variant::avx2;
    }
    load();
  }

  void load() {
    if (variant == Variant::avx2) {
      f = detail::avx2_table<float>();
      d = detail::avx2_table<double>();
    } else {
      f = detail::scalar_table<float>();
      d = detail::scalar_table<double>();
    }
  }
};

State& state() {
  static State s;
  return s;
}

} // namespace

Variant active_variant() { return state().variant; }

bool variant_available(Variant v) {
  return v == Variant::scalar || (v == Variant::avx2 && avx2_usable());
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::scalar: return "scalar";
    case Variant::avx2: return "avx2";
  }
  return "?";
}

void force_variant(Variant v) {
  if (!variant_available(v))
    throw std::runtime_error(std::string("simd variant unavailable: ") + variant_name(v));
  state().variant = v;
  state().load();
}

template <> const KernelTable<float>& active<float>() { return state().f; }
template <> const KernelTable<double>& active<double>() { return state().d; }

} // namespace west::simd
