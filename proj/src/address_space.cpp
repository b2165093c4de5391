#include "rolex/address_space.hpp"

#include <cassert>
#include <cstring>

namespace rolex {

namespace {
uint64_t alignUp(uint64_t v, uint64_t a) { return (v + a - 1) & ~(a - 1); }
}  // namespace

Addr AddressSpace::placeStatic(int symbolId, uint64_t length, ElementKind elem) {
  assert(!sealed_);
  uint64_t off = alignUp(staticBytes_.size(), 8);
  staticBytes_.resize(off + length, 0);
  staticInit_.resize(staticBytes_.size(), 0);
  SymbolPlacement p;
  p.symbolId = symbolId;
  p.base = kStaticBase + off;
  p.length = length;
  p.elementKind = elem;
  if (symbolId >= static_cast<int>(placementIndexBySymbol_.size()))
    placementIndexBySymbol_.resize(symbolId + 1, -1);
  placementIndexBySymbol_[symbolId] = static_cast<int>(placements_.size());
  placements_.push_back(p);
  return p.base;
}

Addr AddressSpace::placeCodeRange(int blockIndex, uint64_t length) {
  CodeRange r;
  r.blockIndex = blockIndex;
  r.base = kCodeBase + codeTop_;
  r.length = length;
  codeTop_ += alignUp(length, 8);
  codeRanges_.push_back(r);
  return r.base;
}

void AddressSpace::sealStatic() { sealed_ = true; }

Addr AddressSpace::heapAlloc(uint64_t length) {
  uint64_t off = alignUp(heapTop_, 8);
  if (off + length > kHeapCapacity) return 0;
  heapTop_ = off + length;
  if (heapBytes_.size() < heapTop_) {
    heapBytes_.resize(heapTop_, 0);
    heapInit_.resize(heapTop_, 0);
  }
  HeapBlock b;
  b.base = kHeapBase + off;
  b.length = length;
  b.live = true;
  heap_.push_back(b);
  return b.base;
}

bool AddressSpace::heapFree(Addr base) {
  for (auto& b : heap_) {
    if (b.live && b.base == base) {
      b.live = false;
      return true;
    }
  }
  return false;
}

const HeapBlock* AddressSpace::heapBlockAt(Addr a) const {
  for (const auto& b : heap_)
    if (b.live && a >= b.base && a < b.base + b.length) return &b;
  return nullptr;
}

bool AddressSpace::locate(Addr a, uint64_t n, const std::vector<uint8_t>*& bytes,
                          const std::vector<uint8_t>*& init, uint64_t& offset) const {
  if (a >= kStaticBase && a + n <= kStaticBase + staticBytes_.size()) {
    bytes = &staticBytes_;
    init = &staticInit_;
    offset = a - kStaticBase;
    return true;
  }
  if (a >= kHeapBase && a + n <= kHeapBase + heapBytes_.size()) {
    // the span must fall inside one live allocation
    const HeapBlock* b = heapBlockAt(a);
    if (!b || a + n > b->base + b->length) return false;
    bytes = &heapBytes_;
    init = &heapInit_;
    offset = a - kHeapBase;
    return true;
  }
  return false;
}

Access AddressSpace::read(Addr a, void* out, uint64_t n) const {
  const std::vector<uint8_t>*bytes, *init;
  uint64_t off;
  if (!locate(a, n, bytes, init, off)) return Access::Unmapped;
  for (uint64_t i = 0; i < n; i++)
    if (!(*init)[off + i]) return Access::Uninitialized;
  std::memcpy(out, bytes->data() + off, n);
  return Access::Ok;
}

Access AddressSpace::write(Addr a, const void* in, uint64_t n) {
  const std::vector<uint8_t>*bytes, *init;
  uint64_t off;
  if (!locate(a, n, bytes, init, off)) return Access::Unmapped;
  std::memcpy(const_cast<uint8_t*>(bytes->data()) + off, in, n);
  std::memset(const_cast<uint8_t*>(init->data()) + off, 1, n);
  return Access::Ok;
}

bool AddressSpace::rawReadByte(Addr a, uint8_t& out) const {
  const std::vector<uint8_t>*bytes, *init;
  uint64_t off;
  if (!locate(a, 1, bytes, init, off)) return false;
  out = (*bytes)[off];
  return true;
}

bool AddressSpace::rawWriteByte(Addr a, uint8_t v) {
  const std::vector<uint8_t>*bytes, *init;
  uint64_t off;
  if (!locate(a, 1, bytes, init, off)) return false;
  const_cast<uint8_t&>((*bytes)[off]) = v;
  return true;
}

bool AddressSpace::isMapped(Addr a, uint64_t n) const {
  const std::vector<uint8_t>*bytes, *init;
  uint64_t off;
  return locate(a, n, bytes, init, off);
}

void AddressSpace::markInitialized(Addr a, uint64_t n) {
  const std::vector<uint8_t>*bytes, *init;
  uint64_t off;
  if (!locate(a, n, bytes, init, off)) return;
  std::memset(const_cast<uint8_t*>(init->data()) + off, 1, n);
}

uint8_t* AddressSpace::rawSpan(Addr a, uint64_t n) {
  const std::vector<uint8_t>*bytes, *init;
  uint64_t off;
  if (!locate(a, n, bytes, init, off)) return nullptr;
  return const_cast<uint8_t*>(bytes->data()) + off;
}

const uint8_t* AddressSpace::rawSpan(Addr a, uint64_t n) const {
  const std::vector<uint8_t>*bytes, *init;
  uint64_t off;
  if (!locate(a, n, bytes, init, off)) return nullptr;
  return bytes->data() + off;
}

uint8_t* AddressSpace::rawInitSpan(Addr a, uint64_t n) {
  const std::vector<uint8_t>*bytes, *init;
  uint64_t off;
  if (!locate(a, n, bytes, init, off)) return nullptr;
  return const_cast<uint8_t*>(init->data()) + off;
}

const CodeRange* AddressSpace::codeRangeAt(Addr a) const {
  for (const auto& r : codeRanges_)
    if (a >= r.base && a < r.base + r.length) return &r;
  return nullptr;
}

const SymbolPlacement* AddressSpace::placementOf(int symbolId) const {
  if (symbolId < 0 || symbolId >= static_cast<int>(placementIndexBySymbol_.size()))
    return nullptr;
  int idx = placementIndexBySymbol_[symbolId];
  return idx < 0 ? nullptr : &placements_[idx];
}

uint64_t AddressSpace::mappedByteCount() const {
  uint64_t n = staticBytes_.size();
  for (const auto& b : heap_)
    if (b.live) n += b.length;
  for (const auto& r : codeRanges_) n += r.length;
  return n;
}

Addr AddressSpace::mappedByteAt(uint64_t index) const {
  if (index < staticBytes_.size()) return kStaticBase + index;
  index -= staticBytes_.size();
  for (const auto& b : heap_) {
    if (!b.live) continue;
    if (index < b.length) return b.base + index;
    index -= b.length;
  }
  for (const auto& r : codeRanges_) {
    if (index < r.length) return r.base + index;
    index -= r.length;
  }
  return 0;
}

}  // namespace rolex
