#pragma once

#include <cstddef>
#include <cstdint>

namespace rolex::bulk {

// Inner loops of replica comparison and majority voting. Scalar reference
// kernels plus AVX2 (x86-64) / NEON (aarch64) variants; the active
// implementation is picked once at startup from CPU capabilities and can be
// forced with ROLEX_FORCE_SCALAR=1 for equivalence testing.

// Element-level result of a 3-way vote over equally sized buffers.
struct VoteResult {
  uint64_t repairedElements = 0;      // elements where a minority was overwritten
  uint64_t unresolvedElements = 0;    // elements where all three copies differ
};

// True iff a and b are byte-identical.
bool equalBytes(const uint8_t* a, const uint8_t* b, size_t n);

// Index of the first differing byte, or n if equal.
size_t firstMismatch(const uint8_t* a, const uint8_t* b, size_t n);

// Per-element majority vote across three replicas of n bytes each
// (n a multiple of elemSize, elemSize 4 or 8). Two agreeing copies
// overwrite the third; elements with three distinct values are counted
// unresolved and left untouched.
VoteResult majorityVote3(uint8_t* a, uint8_t* b, uint8_t* c, size_t n, int elemSize);

const char* activeImplementation();  // "scalar", "avx2" or "neon"

}  // namespace rolex::bulk
