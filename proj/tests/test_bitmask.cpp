#include <cmath>
#include <cstdint>
#include <cstring>

#include "doctest.h"
#include "rolex/bitmask.hpp"

using namespace rolex;

namespace {

// reference mask width: smallest b with 2^b > m, by direct search
int bruteForceKeepBits(uint64_t m) {
  for (int b = 0; b < 64; b++)
    if ((1ull << b) > m) return b;
  return 64;
}

struct Rng {
  uint64_t s;
  uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
};

}  // namespace

TEST_CASE("maximus masks follow the smallest-covering-width rule") {
  RolexPrecision lim;
  lim.interpretation = LimitInterpretation::MaxValue;

  lim.value = 1023;
  ToleranceMask m = deriveMask(ElementKind::U32, &lim);
  CHECK(m.keepMask == 0x000003ffull);
  CHECK(m.coerceMask == 0xfffffc00ull);
  CHECK(maskToHex(m) == "000003ff");

  lim.value = 16777216;
  m = deriveMask(ElementKind::U32, &lim);
  CHECK(m.keepMask == 0x01ffffffull);  // 2^24 needs bit 24 kept

  Rng rng{0x1234u};
  for (int i = 0; i < 2000; i++) {
    uint64_t mx = (rng.next() % 0xfffffffeull) + 1;
    lim.value = mx;
    m = deriveMask(ElementKind::U32, &lim);
    int b = bruteForceKeepBits(mx);
    uint64_t expect = b >= 64 ? ~0ull : (1ull << b) - 1;
    CHECK(m.keepMask == expect);
    CHECK((m.keepMask ^ m.coerceMask) == m.allBits());
    CHECK((m.keepMask & m.coerceMask) == 0);
  }
}

TEST_CASE("signed maximus keeps the sign bit") {
  RolexPrecision lim;
  lim.interpretation = LimitInterpretation::MaxValue;
  lim.value = 100;
  ToleranceMask m = deriveMask(ElementKind::I32, &lim);
  CHECK((m.keepMask & 0x80000000ull) != 0);
  CHECK((m.keepMask & 0x7full) == 0x7full);
  CHECK(isErrorElidable(m, 31) == false);
}

TEST_CASE("precision masks keep ceil(d*log2(10)) mantissa bits") {
  RolexPrecision lim;
  lim.interpretation = LimitInterpretation::DecimalDigits;
  lim.value = 6;
  ToleranceMask m = deriveMask(ElementKind::F32, &lim);
  // 6 digits keep 20 of 23 mantissa bits
  CHECK(m.coerceMask == 0x7ull);
  CHECK((m.keepMask >> 31) == 1);  // sign kept
  CHECK(mantissaBitsForDecimalDigits(6) == 20);
  CHECK(mantissaBitsForDecimalDigits(15) == 50);

  // the paper's molecular-dynamics setting: low 26 F64 mantissa bits cleared
  ToleranceMask md = maskForClearedMantissaBits(ElementKind::F64, 26);
  CHECK(md.coerceMask == 0x3ffffffull);
  CHECK(isErrorElidable(md, 25));
  CHECK(!isErrorElidable(md, 26));
  CHECK(!isErrorElidable(md, 63));  // sign
  CHECK(!isErrorElidable(md, 52));  // exponent
}

TEST_CASE("invalid limits are rejected") {
  RolexPrecision lim;
  lim.interpretation = LimitInterpretation::MaxValue;
  lim.value = 10;
  CHECK_THROWS_AS(deriveMask(ElementKind::F64, &lim), InvalidLimit);
  lim.interpretation = LimitInterpretation::DecimalDigits;
  CHECK_THROWS_AS(deriveMask(ElementKind::U32, &lim), InvalidLimit);
  lim.value = 0;
  CHECK_THROWS_AS(deriveMask(ElementKind::F64, &lim), InvalidLimit);
  lim.value = 16;  // > 15 digits does not fit 52 mantissa bits
  CHECK_THROWS_AS(deriveMask(ElementKind::F64, &lim), InvalidLimit);
}

TEST_CASE("coercion resets unused upper bits exactly") {
  RolexPrecision lim;
  lim.interpretation = LimitInterpretation::MaxValue;
  lim.value = 1023;
  ToleranceMask m = deriveMask(ElementKind::U32, &lim);
  CHECK(applyCoercion(m, 0x80000201ull) == 0x00000201ull);
  CHECK(isErrorElidable(m, 20));
  CHECK(!isErrorElidable(m, 3));

  Rng rng{99};
  for (int i = 0; i < 10000; i++) {
    uint32_t truth = static_cast<uint32_t>(rng.next() % 1024);
    uint32_t corrupt = static_cast<uint32_t>(rng.next()) & static_cast<uint32_t>(m.coerceMask);
    uint64_t recovered = applyCoercion(m, truth | corrupt);
    CHECK(recovered == truth);
    // idempotency
    CHECK(applyCoercion(m, recovered) == recovered);
  }
}

TEST_CASE("float coercion clears exactly the masked mantissa bits") {
  ToleranceMask m = maskForClearedMantissaBits(ElementKind::F64, 26);
  uint64_t one = 0x3ff0000000000000ull;  // 1.0
  uint64_t flipped = one | (1ull << 3);
  CHECK(applyCoercion(m, flipped) == one);

  Rng rng{7};
  for (int i = 0; i < 10000; i++) {
    // random normal double
    uint64_t bits = rng.next();
    int exp = 1 + static_cast<int>(rng.next() % 2000);
    bits = (bits & 0x800fffffffffffffull) | (static_cast<uint64_t>(exp) << 52);
    double x;
    std::memcpy(&x, &bits, 8);
    uint64_t corrupted = bits ^ (rng.next() & m.coerceMask);
    uint64_t coerced = applyCoercion(m, corrupted);
    double y;
    std::memcpy(&y, &coerced, 8);
    // relative error bound 2^-(52-26)
    CHECK(std::fabs(y - x) / std::fabs(x) <= std::ldexp(1.0, -(52 - 26)));
    CHECK(applyCoercion(m, coerced) == coerced);
  }
}

TEST_CASE("full elision accepts every bit and coerces nothing") {
  ToleranceMask m = deriveMask(ElementKind::U32, nullptr);
  CHECK(m.fullElision);
  for (int b = 0; b < 32; b++) CHECK(isErrorElidable(m, b));
  CHECK(applyCoercion(m, 0xdeadbeefull) == 0xdeadbeefull);
  CHECK((m.keepMask ^ m.coerceMask) == m.allBits());
}
