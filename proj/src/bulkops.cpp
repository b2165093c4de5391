#include "rolex/bulkops.hpp"

#include <cstdlib>
#include <cstring>

#if defined(__x86_64__)
#include <immintrin.h>
#elif defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace rolex::bulk {

namespace {

// ----- scalar reference kernels -----

bool equalBytesScalar(const uint8_t* a, const uint8_t* b, size_t n) {
  return std::memcmp(a, b, n) == 0;
}

size_t firstMismatchScalar(const uint8_t* a, const uint8_t* b, size_t n) {
  for (size_t i = 0; i < n; i++)
    if (a[i] != b[i]) return i;
  return n;
}

template <typename T>
VoteResult vote3Scalar(uint8_t* a, uint8_t* b, uint8_t* c, size_t n) {
  VoteResult res;
  size_t count = n / sizeof(T);
  for (size_t i = 0; i < count; i++) {
    T va, vb, vc;
    std::memcpy(&va, a + i * sizeof(T), sizeof(T));
    std::memcpy(&vb, b + i * sizeof(T), sizeof(T));
    std::memcpy(&vc, c + i * sizeof(T), sizeof(T));
    if (va == vb && vb == vc) continue;
    if (va == vb) {
      std::memcpy(c + i * sizeof(T), &va, sizeof(T));
      res.repairedElements++;
    } else if (va == vc) {
      std::memcpy(b + i * sizeof(T), &va, sizeof(T));
      res.repairedElements++;
    } else if (vb == vc) {
      std::memcpy(a + i * sizeof(T), &vb, sizeof(T));
      res.repairedElements++;
    } else {
      res.unresolvedElements++;
    }
  }
  return res;
}

#if defined(__x86_64__)

// ----- AVX2 kernels -----

__attribute__((target("avx2"))) bool equalBytesAvx2(const uint8_t* a, const uint8_t* b,
                                                    size_t n) {
  size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    __m256i eq = _mm256_cmpeq_epi8(va, vb);
    if (_mm256_movemask_epi8(eq) != -1) return false;
  }
  return std::memcmp(a + i, b + i, n - i) == 0;
}

__attribute__((target("avx2"))) size_t firstMismatchAvx2(const uint8_t* a, const uint8_t* b,
                                                         size_t n) {
  size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    int mask = _mm256_movemask_epi8(_mm256_cmpeq_epi8(va, vb));
    if (mask != -1) return i + static_cast<size_t>(__builtin_ctz(~static_cast<unsigned>(mask)));
  }
  return i + firstMismatchScalar(a + i, b + i, n - i);
}

// Vectorized element-majority: where two lanes agree the third is blended
// in; lanes with three distinct values are reported unresolved and kept.
template <typename T>
__attribute__((target("avx2"))) VoteResult vote3Avx2(uint8_t* a, uint8_t* b, uint8_t* c,
                                                     size_t n) {
  VoteResult res;
  constexpr int W = sizeof(T);
  size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    __m256i vc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c + i));
    __m256i ab, ac, bc;
    if constexpr (W == 4) {
      ab = _mm256_cmpeq_epi32(va, vb);
      ac = _mm256_cmpeq_epi32(va, vc);
      bc = _mm256_cmpeq_epi32(vb, vc);
    } else {
      ab = _mm256_cmpeq_epi64(va, vb);
      ac = _mm256_cmpeq_epi64(va, vc);
      bc = _mm256_cmpeq_epi64(vb, vc);
    }
    int allEq = _mm256_movemask_epi8(_mm256_and_si256(ab, ac));
    if (allEq == -1) continue;
    // majority value per lane: a==b or a==c -> a, else b==c -> b
    __m256i majAB = _mm256_or_si256(ab, ac);
    __m256i maj = _mm256_blendv_epi8(vb, va, majAB);
    __m256i resolved = _mm256_or_si256(majAB, bc);
    __m256i na = _mm256_blendv_epi8(va, maj, resolved);
    __m256i nb = _mm256_blendv_epi8(vb, maj, resolved);
    __m256i nc = _mm256_blendv_epi8(vc, maj, resolved);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(a + i), na);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(b + i), nb);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(c + i), nc);
    unsigned resolvedMask = static_cast<unsigned>(_mm256_movemask_epi8(resolved));
    unsigned allEqMask = static_cast<unsigned>(allEq);
    for (int lane = 0; lane < 32 / W; lane++) {
      unsigned laneBit = 1u << (lane * W);
      if (allEqMask & laneBit) continue;
      if (resolvedMask & laneBit)
        res.repairedElements++;
      else
        res.unresolvedElements++;
    }
  }
  VoteResult tail = vote3Scalar<T>(a + i, b + i, c + i, n - i);
  res.repairedElements += tail.repairedElements;
  res.unresolvedElements += tail.unresolvedElements;
  return res;
}

#elif defined(__aarch64__)

bool equalBytesNeon(const uint8_t* a, const uint8_t* b, size_t n) {
  size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    uint8x16_t va = vld1q_u8(a + i);
    uint8x16_t vb = vld1q_u8(b + i);
    uint8x16_t eq = vceqq_u8(va, vb);
    if (vminvq_u8(eq) != 0xff) return false;
  }
  return std::memcmp(a + i, b + i, n - i) == 0;
}

#endif

// ----- dispatch -----

enum class Impl { Scalar, Avx2, Neon };

Impl pickImpl() {
  const char* force = std::getenv("ROLEX_FORCE_SCALAR");
  if (force && force[0] == '1') return Impl::Scalar;
#if defined(__x86_64__)
  if (__builtin_cpu_supports("avx2")) return Impl::Avx2;
#elif defined(__aarch64__)
  return Impl::Neon;
#endif
  return Impl::Scalar;
}

Impl activeImpl() {
  static const Impl impl = pickImpl();
  return impl;
}

}  // namespace

const char* activeImplementation() {
  switch (activeImpl()) {
    case Impl::Avx2: return "avx2";
    case Impl::Neon: return "neon";
    case Impl::Scalar: return "scalar";
  }
  return "scalar";
}

bool equalBytes(const uint8_t* a, const uint8_t* b, size_t n) {
#if defined(__x86_64__)
  if (activeImpl() == Impl::Avx2) return equalBytesAvx2(a, b, n);
#elif defined(__aarch64__)
  if (activeImpl() == Impl::Neon) return equalBytesNeon(a, b, n);
#endif
  return equalBytesScalar(a, b, n);
}

size_t firstMismatch(const uint8_t* a, const uint8_t* b, size_t n) {
#if defined(__x86_64__)
  if (activeImpl() == Impl::Avx2) return firstMismatchAvx2(a, b, n);
#endif
  return firstMismatchScalar(a, b, n);
}

VoteResult majorityVote3(uint8_t* a, uint8_t* b, uint8_t* c, size_t n, int elemSize) {
#if defined(__x86_64__)
  if (activeImpl() == Impl::Avx2) {
    if (elemSize == 8) return vote3Avx2<uint64_t>(a, b, c, n);
    return vote3Avx2<uint32_t>(a, b, c, n);
  }
#endif
  if (elemSize == 8) return vote3Scalar<uint64_t>(a, b, c, n);
  return vote3Scalar<uint32_t>(a, b, c, n);
}

}  // namespace rolex::bulk
