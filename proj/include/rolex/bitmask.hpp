#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rolex {

enum class ElementKind { None, I32, U32, F32, F64, Ptr };

int elementSize(ElementKind k);
const char* elementKindName(ElementKind k);
ElementKind elementKindFromName(const std::string& s);

enum class LimitInterpretation { MaxValue, DecimalDigits };

// The tolerance limit attached to a qualifier or rolex_malloc_tolerant call.
// Integers carry a maximum attainable value, floats a count of significant
// decimal digits to preserve.
struct RolexPrecision {
  uint64_t value = 0;
  LimitInterpretation interpretation = LimitInterpretation::MaxValue;
};

struct InvalidLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bit-level detection/correction mask for one tolerant element.
// keepMask bits must retain their true value; coerceMask bits may be cleared
// (or, under full elision, ignored outright). The two partition the element.
struct ToleranceMask {
  ElementKind elementKind = ElementKind::None;
  uint64_t keepMask = 0;
  uint64_t coerceMask = 0;
  bool fullElision = false;
  RolexPrecision limit;

  int widthBits() const { return elementSize(elementKind) * 8; }
  uint64_t allBits() const {
    int w = widthBits();
    return w == 64 ? ~0ull : ((1ull << w) - 1);
  }
};

// Mask derivation per element kind:
//  - U32 with MAXIMUS m keeps the low b bits, b the smallest integer with
//    2^b > m; the unused upper bits are resettable.
//  - I32 additionally always keeps the sign bit.
//  - F32/F64 with PRECISION d keep sign, exponent and the top
//    ceil(d*log2(10)) mantissa bits; the remaining low mantissa bits are
//    cleared on coercion.
//  - No limit means full elision: every bit is acceptable as-is.
// Throws InvalidLimit for MAXIMUS on floats, PRECISION on integers, limits
// that exceed the type width, and zero-valued limits.
ToleranceMask deriveMask(ElementKind kind, const RolexPrecision* limit);

// Mask with exactly `clearedMantissaBits` low mantissa bits coercible; used
// where a bit budget is stated directly rather than via a decimal-digit
// limit.
ToleranceMask maskForClearedMantissaBits(ElementKind kind, int clearedMantissaBits);

// Integer kinds: rawBits & keepMask. Float kinds: coerceMask mantissa bits
// cleared, sign/exponent untouched. Full elision returns rawBits unchanged.
// Idempotent.
uint64_t applyCoercion(const ToleranceMask& mask, uint64_t rawBits);

// True iff a flip of this bit is acceptable under the mask (inside
// coerceMask, or anywhere under full elision).
bool isErrorElidable(const ToleranceMask& mask, int faultBitIndex);

// Fixed-width lowercase hex: 8 digits for 32-bit kinds, 16 for 64-bit.
std::string maskToHex(const ToleranceMask& mask);

// Mantissa bits kept for d significant decimal digits.
int mantissaBitsForDecimalDigits(uint64_t digits);

}  // namespace rolex
