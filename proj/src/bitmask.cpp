#include "rolex/bitmask.hpp"

#include <cmath>
#include <cstdio>

namespace rolex {

int elementSize(ElementKind k) {
  switch (k) {
    case ElementKind::I32:
    case ElementKind::U32:
    case ElementKind::F32:
      return 4;
    case ElementKind::F64:
    case ElementKind::Ptr:
      return 8;
    case ElementKind::None:
      return 0;
  }
  return 0;
}

const char* elementKindName(ElementKind k) {
  switch (k) {
    case ElementKind::I32: return "I32";
    case ElementKind::U32: return "U32";
    case ElementKind::F32: return "F32";
    case ElementKind::F64: return "F64";
    case ElementKind::Ptr: return "PTR";
    case ElementKind::None: return "NONE";
  }
  return "NONE";
}

ElementKind elementKindFromName(const std::string& s) {
  if (s == "I32") return ElementKind::I32;
  if (s == "U32") return ElementKind::U32;
  if (s == "F32") return ElementKind::F32;
  if (s == "F64") return ElementKind::F64;
  if (s == "PTR") return ElementKind::Ptr;
  return ElementKind::None;
}

int mantissaBitsForDecimalDigits(uint64_t digits) {
  return static_cast<int>(std::ceil(static_cast<double>(digits) * std::log2(10.0)));
}

namespace {

constexpr uint64_t kF32MantissaMask = 0x007fffffull;          // 23 bits
constexpr uint64_t kF64MantissaMask = 0x000fffffffffffffull;  // 52 bits

int mantissaWidth(ElementKind k) { return k == ElementKind::F32 ? 23 : 52; }

ToleranceMask fullElisionMask(ElementKind kind) {
  ToleranceMask m;
  m.elementKind = kind;
  m.fullElision = true;
  m.keepMask = 0;
  m.coerceMask = m.allBits();
  return m;
}

}  // namespace

ToleranceMask deriveMask(ElementKind kind, const RolexPrecision* limit) {
  if (kind == ElementKind::None || kind == ElementKind::Ptr)
    throw InvalidLimit("tolerance masks are only derivable for scalar kinds");
  if (limit == nullptr) return fullElisionMask(kind);
  if (limit->value == 0) throw InvalidLimit("tolerance limit must be strictly positive");

  ToleranceMask m;
  m.elementKind = kind;
  m.limit = *limit;

  const bool isFloat = kind == ElementKind::F32 || kind == ElementKind::F64;
  if (limit->interpretation == LimitInterpretation::MaxValue) {
    if (isFloat) throw InvalidLimit("MAXIMUS applies to integer kinds only");
    uint64_t typeMax = kind == ElementKind::U32 ? 0xffffffffull : 0x7fffffffull;
    if (limit->value > typeMax) throw InvalidLimit("maximus exceeds type range");
    int b = 0;
    while (b < 64 && !((1ull << b) > limit->value)) b++;
    m.keepMask = b >= 64 ? ~0ull : ((1ull << b) - 1);
    if (kind == ElementKind::I32) m.keepMask |= 0x80000000ull;  // sign stays
    m.coerceMask = m.allBits() & ~m.keepMask;
    return m;
  }

  // PRECISION: significant decimal digits, floats only.
  if (!isFloat) throw InvalidLimit("PRECISION applies to floating-point kinds only");
  int keptMantissa = mantissaBitsForDecimalDigits(limit->value);
  int width = mantissaWidth(kind);
  if (keptMantissa > width) throw InvalidLimit("precision exceeds mantissa width");
  return maskForClearedMantissaBits(kind, width - keptMantissa);
}

ToleranceMask maskForClearedMantissaBits(ElementKind kind, int clearedMantissaBits) {
  if (kind != ElementKind::F32 && kind != ElementKind::F64)
    throw InvalidLimit("mantissa masks apply to floating-point kinds only");
  int width = mantissaWidth(kind);
  if (clearedMantissaBits < 0 || clearedMantissaBits > width)
    throw InvalidLimit("cleared-bit count out of range");
  ToleranceMask m;
  m.elementKind = kind;
  m.coerceMask =
      clearedMantissaBits == 0 ? 0 : ((1ull << clearedMantissaBits) - 1);
  m.keepMask = m.allBits() & ~m.coerceMask;
  m.limit.interpretation = LimitInterpretation::DecimalDigits;
  return m;
}

uint64_t applyCoercion(const ToleranceMask& mask, uint64_t rawBits) {
  if (mask.fullElision) return rawBits;
  switch (mask.elementKind) {
    case ElementKind::I32:
    case ElementKind::U32:
      return rawBits & mask.keepMask;
    case ElementKind::F32:
    case ElementKind::F64:
      return rawBits & ~mask.coerceMask;
    default:
      return rawBits;
  }
}

bool isErrorElidable(const ToleranceMask& mask, int faultBitIndex) {
  if (faultBitIndex < 0 || faultBitIndex >= mask.widthBits()) return false;
  if (mask.fullElision) return true;
  return (mask.coerceMask >> faultBitIndex) & 1;
}

std::string maskToHex(const ToleranceMask& mask) {
  char buf[20];
  if (elementSize(mask.elementKind) == 8)
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(mask.keepMask));
  else
    std::snprintf(buf, sizeof buf, "%08llx",
                  static_cast<unsigned long long>(mask.keepMask));
  return buf;
}

}  // namespace rolex
