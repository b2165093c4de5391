#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rolex/bitmask.hpp"

namespace rolex {

using Addr = uint64_t;

enum class Segment { Static, Heap, BlockCode };

enum class Access { Ok, Unmapped, Uninitialized };

struct SymbolPlacement {
  int symbolId = -1;
  Addr base = 0;
  uint64_t length = 0;
  ElementKind elementKind = ElementKind::None;
};

struct HeapBlock {
  Addr base = 0;
  uint64_t length = 0;
  bool live = false;
};

struct CodeRange {
  int blockIndex = -1;  // index into the runtime's block table
  Addr base = 0;
  uint64_t length = 0;
};

// Byte-addressable simulated memory: a static segment for named program
// state, a heap for the rolex allocation routines, and synthetic
// instruction-memory ranges for outlined blocks. Reads require every byte
// to have been written once; the fault injector flips raw bits without
// touching initialization state.
class AddressSpace {
 public:
  static constexpr Addr kStaticBase = 0x00001000;
  static constexpr Addr kHeapBase = 0x00100000;
  static constexpr Addr kCodeBase = 0x00800000;
  static constexpr uint64_t kHeapCapacity = 8ull << 20;

  // --- layout (load time) ---
  Addr placeStatic(int symbolId, uint64_t length, ElementKind elem);
  Addr placeCodeRange(int blockIndex, uint64_t length);
  void sealStatic();  // no further static placement

  // --- heap ---
  Addr heapAlloc(uint64_t length);  // 0 on exhaustion
  bool heapFree(Addr base);
  const std::vector<HeapBlock>& heapBlocks() const { return heap_; }
  const HeapBlock* heapBlockAt(Addr a) const;

  // --- typed access ---
  Access read(Addr a, void* out, uint64_t n) const;
  Access write(Addr a, const void* in, uint64_t n);
  // identical to write but leaves initialization state untouched
  bool rawReadByte(Addr a, uint8_t& out) const;
  bool rawWriteByte(Addr a, uint8_t v);
  bool isMapped(Addr a, uint64_t n) const;
  void markInitialized(Addr a, uint64_t n);
  // direct storage access for bulk replica operations (span must be mapped)
  uint8_t* rawSpan(Addr a, uint64_t n);
  const uint8_t* rawSpan(Addr a, uint64_t n) const;
  uint8_t* rawInitSpan(Addr a, uint64_t n);

  // --- code ranges ---
  const CodeRange* codeRangeAt(Addr a) const;
  const std::vector<CodeRange>& codeRanges() const { return codeRanges_; }

  // --- symbols ---
  const std::vector<SymbolPlacement>& placements() const { return placements_; }
  const SymbolPlacement* placementOf(int symbolId) const;

  // --- injectable-site enumeration (deterministic order) ---
  // Mapped bytes: the whole static segment, live heap blocks in allocation
  // order, then code ranges. Order is stable for a fixed program state.
  uint64_t mappedByteCount() const;
  Addr mappedByteAt(uint64_t index) const;

  uint64_t staticSize() const { return staticBytes_.size(); }

 private:
  struct Backing {
    std::vector<uint8_t>* bytes;
    std::vector<uint8_t>* init;
    Addr base;
  };
  bool locate(Addr a, uint64_t n, const std::vector<uint8_t>*& bytes,
              const std::vector<uint8_t>*& init, uint64_t& offset) const;

  std::vector<uint8_t> staticBytes_;
  std::vector<uint8_t> staticInit_;
  std::vector<uint8_t> heapBytes_;
  std::vector<uint8_t> heapInit_;
  uint64_t heapTop_ = 0;
  std::vector<HeapBlock> heap_;
  std::vector<CodeRange> codeRanges_;
  uint64_t codeTop_ = 0;
  std::vector<SymbolPlacement> placements_;
  std::vector<int> placementIndexBySymbol_;
  bool sealed_ = false;
};

}  // namespace rolex
