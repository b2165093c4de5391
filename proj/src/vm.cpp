#include "rolex/vm.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

namespace rolex {

const char* vmStatusName(VmStatus s) {
  switch (s) {
    case VmStatus::Running: return "running";
    case VmStatus::CompletedOk: return "completed";
    case VmStatus::TerminatedGraceful: return "terminated-graceful";
    case VmStatus::Crashed: return "crashed";
  }
  return "?";
}

Value Value::ofI32(int32_t v) { return {ElementKind::I32, static_cast<uint32_t>(v)}; }
Value Value::ofU32(uint32_t v) { return {ElementKind::U32, v}; }
Value Value::ofF32(float v) { return {ElementKind::F32, std::bit_cast<uint32_t>(v)}; }
Value Value::ofF64(double v) { return {ElementKind::F64, std::bit_cast<uint64_t>(v)}; }
Value Value::ofPtr(uint64_t v) { return {ElementKind::Ptr, v}; }

int32_t Value::asI32() const {
  switch (kind) {
    case ElementKind::I32:
    case ElementKind::U32:
      return static_cast<int32_t>(static_cast<uint32_t>(raw));
    case ElementKind::F32: {
      float f = std::bit_cast<float>(static_cast<uint32_t>(raw));
      if (std::isnan(f)) return 0;
      if (f >= 2147483647.0f) return INT32_MAX;
      if (f <= -2147483648.0f) return INT32_MIN;
      return static_cast<int32_t>(f);
    }
    case ElementKind::F64: {
      double d = std::bit_cast<double>(raw);
      if (std::isnan(d)) return 0;
      if (d >= 2147483647.0) return INT32_MAX;
      if (d <= -2147483648.0) return INT32_MIN;
      return static_cast<int32_t>(d);
    }
    default:
      return static_cast<int32_t>(raw);
  }
}

uint32_t Value::asU32() const {
  switch (kind) {
    case ElementKind::I32:
    case ElementKind::U32:
      return static_cast<uint32_t>(raw);
    case ElementKind::F32: {
      float f = std::bit_cast<float>(static_cast<uint32_t>(raw));
      if (std::isnan(f) || f <= 0.0f) return 0;
      if (f >= 4294967295.0f) return UINT32_MAX;
      return static_cast<uint32_t>(f);
    }
    case ElementKind::F64: {
      double d = std::bit_cast<double>(raw);
      if (std::isnan(d) || d <= 0.0) return 0;
      if (d >= 4294967295.0) return UINT32_MAX;
      return static_cast<uint32_t>(d);
    }
    default:
      return static_cast<uint32_t>(raw);
  }
}

float Value::asF32() const {
  switch (kind) {
    case ElementKind::I32: return static_cast<float>(asI32());
    case ElementKind::U32: return static_cast<float>(asU32());
    case ElementKind::F32: return std::bit_cast<float>(static_cast<uint32_t>(raw));
    case ElementKind::F64: return static_cast<float>(std::bit_cast<double>(raw));
    default: return static_cast<float>(raw);
  }
}

double Value::asF64() const {
  switch (kind) {
    case ElementKind::I32: return static_cast<double>(asI32());
    case ElementKind::U32: return static_cast<double>(asU32());
    case ElementKind::F32: return static_cast<double>(std::bit_cast<float>(static_cast<uint32_t>(raw)));
    case ElementKind::F64: return std::bit_cast<double>(raw);
    default: return static_cast<double>(raw);
  }
}

namespace {

struct VmHalt {};

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct ControlEntry {
  enum class Kind : uint8_t { Seq, Single, Loop };
  Kind kind = Kind::Seq;
  const std::vector<StmtPtr>* list = nullptr;
  size_t index = 0;
  const Stmt* stmt = nullptr;
  uint8_t phase = 0;  // Loop: 0 = for-init, 1 = test, 2 = for-incr
};

struct Frame {
  int fnIndex = -1;
  std::vector<ControlEntry> control;
  bool hasDest = false;
  Addr destAddr = 0;
  ElementKind destKind = ElementKind::None;
  bool recoveryBarrier = false;
};

struct PlaceRef {
  Addr addr = 0;
  ElementKind elem = ElementKind::None;
};

}  // namespace

struct Vm::Impl {
  Vm& vm;
  std::vector<Frame> frames;
  int recoveryResult = 0;
  uint64_t heapEntryCounter = 0;

  explicit Impl(Vm& v) : vm(v) {}

  AddressSpace& mem() { return vm.memory_; }
  const Program& prog() { return vm.program_; }
  RolexRuntime& rt() { return *vm.runtime_; }

  [[noreturn]] void crashHalt(const std::string& reason) {
    vm.crash(reason);
    throw VmHalt{};
  }

  // ---- values / conversion ----

  Value convert(const Value& v, ElementKind to) {
    switch (to) {
      case ElementKind::I32: return Value::ofI32(v.asI32());
      case ElementKind::U32: return Value::ofU32(v.asU32());
      case ElementKind::F32: return Value::ofF32(v.asF32());
      case ElementKind::F64: return Value::ofF64(v.asF64());
      case ElementKind::Ptr: return Value::ofPtr(v.raw);
      default: return v;
    }
  }

  Value load(const PlaceRef& p) {
    uint64_t raw = 0;
    int esz = elementSize(p.elem);
    Access a = mem().read(p.addr, &raw, static_cast<uint64_t>(esz));
    if (a == Access::Unmapped) crashHalt("invalid-access");
    if (a == Access::Uninitialized) crashHalt("uninitialized-read");
    Value v;
    v.kind = p.elem;
    v.raw = raw;
    return v;
  }

  void store(const PlaceRef& p, const Value& v) {
    Value c = convert(v, p.elem);
    int esz = elementSize(p.elem);
    Access a = mem().write(p.addr, &c.raw, static_cast<uint64_t>(esz));
    if (a != Access::Ok) crashHalt("invalid-access");
    if (p.addr >= AddressSpace::kHeapBase)
      rt().mirrorHeapWrite(p.addr, static_cast<uint64_t>(esz));
  }

  bool toBool(const Value& v) {
    switch (v.kind) {
      case ElementKind::F32: {
        float f = v.asF32();
        if (std::isnan(f)) crashHalt("nan-predicate");
        return f != 0.0f;
      }
      case ElementKind::F64: {
        double d = v.asF64();
        if (std::isnan(d)) crashHalt("nan-predicate");
        return d != 0.0;
      }
      case ElementKind::I32:
      case ElementKind::U32:
        return static_cast<uint32_t>(v.raw) != 0;
      default:
        return v.raw != 0;
    }
  }

  // ---- lvalues ----

  PlaceRef placeOfSymbol(int symbolId) {
    const SymbolPlacement* pl = mem().placementOf(symbolId);
    if (!pl) crashHalt("internal: symbol without storage");
    return {pl->base, pl->elementKind};
  }

  PlaceRef resolveLValue(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Ident: {
        if (e.type.isArray()) crashHalt("internal: array as scalar lvalue");
        return placeOfSymbol(e.symbolId);
      }
      case Expr::Kind::Index:
        return resolveIndexed(e);
      case Expr::Kind::Unary: {
        // *p
        Value p = evalExpr(*e.lhs);
        return {p.raw, e.type.elementKind()};
      }
      default:
        crashHalt("internal: bad lvalue");
    }
  }

  PlaceRef resolveIndexed(const Expr& e) {
    const Expr& base = *e.lhs;
    int64_t idx = evalExpr(*e.args[0]).asI32();
    // a[i][j] over a named 2-D array: both dimensions bounded
    if (base.kind == Expr::Kind::Index && base.lhs->kind == Expr::Kind::Ident &&
        base.lhs->type.arrayDims.size() == 2) {
      const Type& at = base.lhs->type;
      int64_t i0 = evalExpr(*base.args[0]).asI32();
      if (i0 < 0 || i0 >= at.arrayDims[0]) crashHalt("out-of-bounds");
      if (idx < 0 || idx >= at.arrayDims[1]) crashHalt("out-of-bounds");
      PlaceRef root = placeOfSymbol(base.lhs->symbolId);
      int esz = elementSize(root.elem);
      return {root.addr + static_cast<uint64_t>((i0 * at.arrayDims[1] + idx) * esz),
              root.elem};
    }
    if (base.kind == Expr::Kind::Ident && base.type.arrayDims.size() == 1) {
      const Type& at = base.type;
      if (idx < 0 || idx >= at.arrayDims[0]) crashHalt("out-of-bounds");
      PlaceRef root = placeOfSymbol(base.symbolId);
      int esz = elementSize(root.elem);
      return {root.addr + static_cast<uint64_t>(idx * esz), root.elem};
    }
    // pointer-typed base (including decayed rows)
    Value p = evalExpr(base);
    ElementKind elem = e.type.elementKind();
    int esz = elementSize(elem);
    return {p.raw + static_cast<uint64_t>(idx * esz), elem};
  }

  // span of an lvalue-ish argument for __rolex_compare: whole arrays by
  // name, single elements otherwise
  std::pair<Addr, uint64_t> resolveSpan(const Expr& e) {
    if (e.kind == Expr::Kind::Ident && e.type.isArray()) {
      const SymbolPlacement* pl = mem().placementOf(e.symbolId);
      if (!pl) crashHalt("internal: symbol without storage");
      return {pl->base, pl->length};
    }
    PlaceRef p = resolveLValue(e);
    return {p.addr, static_cast<uint64_t>(elementSize(p.elem))};
  }

  // ---- expressions ----

  Value evalExpr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        if (e.intValue > 0x7fffffffull)
          return Value::ofU32(static_cast<uint32_t>(e.intValue));
        return Value::ofI32(static_cast<int32_t>(e.intValue));
      case Expr::Kind::FloatLit:
        return Value::ofF64(e.floatValue);
      case Expr::Kind::NullLit:
        return Value::ofPtr(0);
      case Expr::Kind::StringLit:
        return Value::ofPtr(0);  // only reachable through print
      case Expr::Kind::SizeOf:
        return Value::ofI32(elementSize(e.sizeofType.elementKind()));
      case Expr::Kind::Ident: {
        const SymbolInfo& s = prog().symbols[static_cast<size_t>(e.symbolId)];
        if (s.type.isArray()) {
          const SymbolPlacement* pl = mem().placementOf(e.symbolId);
          return Value::ofPtr(pl->base);  // decay
        }
        return load(placeOfSymbol(e.symbolId));
      }
      case Expr::Kind::Unary: {
        if (e.text == "&") {
          if (e.lhs->kind == Expr::Kind::Ident && e.lhs->type.isArray()) {
            const SymbolPlacement* pl = mem().placementOf(e.lhs->symbolId);
            return Value::ofPtr(pl->base);
          }
          PlaceRef p = resolveLValue(*e.lhs);
          return Value::ofPtr(p.addr);
        }
        if (e.text == "*") {
          Value p = evalExpr(*e.lhs);
          return load({p.raw, e.type.elementKind()});
        }
        Value v = evalExpr(*e.lhs);
        if (e.text == "!") return Value::ofI32(toBool(v) ? 0 : 1);
        // unary minus
        switch (v.kind) {
          case ElementKind::F64: return Value::ofF64(-v.asF64());
          case ElementKind::F32: return Value::ofF32(-v.asF32());
          case ElementKind::U32: return Value::ofU32(0u - v.asU32());
          default: return Value::ofI32(static_cast<int32_t>(0u - static_cast<uint32_t>(v.raw)));
        }
      }
      case Expr::Kind::Index: {
        if (e.type.isArray()) {
          // row decay of a 2-D array
          const Expr& base = *e.lhs;
          int64_t idx = evalExpr(*e.args[0]).asI32();
          if (base.kind == Expr::Kind::Ident && base.type.arrayDims.size() == 2) {
            if (idx < 0 || idx >= base.type.arrayDims[0]) crashHalt("out-of-bounds");
            const SymbolPlacement* pl = mem().placementOf(base.symbolId);
            int esz = elementSize(pl->elementKind);
            return Value::ofPtr(pl->base +
                                static_cast<uint64_t>(idx * base.type.arrayDims[1] * esz));
          }
          crashHalt("internal: unsupported row expression");
        }
        return load(resolveIndexed(e));
      }
      case Expr::Kind::Binary:
        return evalBinary(e);
      case Expr::Kind::Call:
        return evalBuiltinCall(e);
    }
    crashHalt("internal: bad expression");
  }

  Value evalBinary(const Expr& e) {
    const std::string& op = e.text;
    if (op == "&&") {
      if (!toBool(evalExpr(*e.lhs))) return Value::ofI32(0);
      return Value::ofI32(toBool(evalExpr(*e.rhs)) ? 1 : 0);
    }
    if (op == "||") {
      if (toBool(evalExpr(*e.lhs))) return Value::ofI32(1);
      return Value::ofI32(toBool(evalExpr(*e.rhs)) ? 1 : 0);
    }
    Value a = evalExpr(*e.lhs);
    Value b = evalExpr(*e.rhs);
    char o = op[0];
    bool isCmp = op == "==" || op == "!=" || op == "<" || op == ">" || op == "<=" || op == ">=";

    if (a.kind == ElementKind::Ptr || b.kind == ElementKind::Ptr) {
      if (isCmp) return Value::ofI32(compareRaw(a.raw, b.raw, op) ? 1 : 0);
      // pointer arithmetic, scaled by the pointee width
      if (a.kind == ElementKind::Ptr && b.kind == ElementKind::Ptr) {
        int esz = elementSize(e.lhs->type.pointeeKind());
        if (esz == 0) esz = 1;
        return Value::ofI32(static_cast<int32_t>((static_cast<int64_t>(a.raw) -
                                                  static_cast<int64_t>(b.raw)) /
                                                 esz));
      }
      const Value& p = a.kind == ElementKind::Ptr ? a : b;
      const Value& i = a.kind == ElementKind::Ptr ? b : a;
      int esz = elementSize(e.type.pointeeKind());
      if (esz == 0) esz = 1;
      int64_t off = static_cast<int64_t>(i.asI32()) * esz;
      if (o == '-') off = -off;
      return Value::ofPtr(p.raw + static_cast<uint64_t>(off));
    }

    bool f64 = a.kind == ElementKind::F64 || b.kind == ElementKind::F64;
    bool f32 = !f64 && (a.kind == ElementKind::F32 || b.kind == ElementKind::F32);
    if (f64) {
      double x = a.asF64();
      double y = b.asF64();
      if (isCmp) return Value::ofI32(compareF64(x, y, op) ? 1 : 0);
      switch (o) {
        case '+': return Value::ofF64(x + y);
        case '-': return Value::ofF64(x - y);
        case '*': return Value::ofF64(x * y);
        case '/': return Value::ofF64(x / y);
        default: crashHalt("float-modulo");
      }
    }
    if (f32) {
      float x = a.asF32();
      float y = b.asF32();
      if (isCmp) return Value::ofI32(compareF64(x, y, op) ? 1 : 0);
      switch (o) {
        case '+': return Value::ofF32(x + y);
        case '-': return Value::ofF32(x - y);
        case '*': return Value::ofF32(x * y);
        case '/': return Value::ofF32(x / y);
        default: crashHalt("float-modulo");
      }
    }

    bool u = a.kind == ElementKind::U32 || b.kind == ElementKind::U32;
    if (u) {
      uint32_t x = a.asU32();
      uint32_t y = b.asU32();
      if (isCmp) return Value::ofI32(compareRaw(x, y, op) ? 1 : 0);
      switch (o) {
        case '+': return Value::ofU32(x + y);
        case '-': return Value::ofU32(x - y);
        case '*': return Value::ofU32(x * y);
        case '/':
          if (y == 0) crashHalt("division-by-zero");
          return Value::ofU32(x / y);
        case '%':
          if (y == 0) crashHalt("division-by-zero");
          return Value::ofU32(x % y);
      }
    }
    int32_t x = a.asI32();
    int32_t y = b.asI32();
    if (isCmp) return Value::ofI32(compareI32(x, y, op) ? 1 : 0);
    uint32_t ux = static_cast<uint32_t>(x);
    uint32_t uy = static_cast<uint32_t>(y);
    switch (o) {
      case '+': return Value::ofI32(static_cast<int32_t>(ux + uy));
      case '-': return Value::ofI32(static_cast<int32_t>(ux - uy));
      case '*': return Value::ofI32(static_cast<int32_t>(ux * uy));
      case '/':
        if (y == 0) crashHalt("division-by-zero");
        if (x == INT32_MIN && y == -1) return Value::ofI32(INT32_MIN);
        return Value::ofI32(x / y);
      case '%':
        if (y == 0) crashHalt("division-by-zero");
        if (x == INT32_MIN && y == -1) return Value::ofI32(0);
        return Value::ofI32(x % y);
    }
    crashHalt("internal: bad operator");
  }

  static bool compareF64(double x, double y, const std::string& op) {
    if (op == "==") return x == y;
    if (op == "!=") return x != y;
    if (op == "<") return x < y;
    if (op == ">") return x > y;
    if (op == "<=") return x <= y;
    return x >= y;
  }
  template <typename T>
  static bool compareRaw(T x, T y, const std::string& op) {
    if (op == "==") return x == y;
    if (op == "!=") return x != y;
    if (op == "<") return x < y;
    if (op == ">") return x > y;
    if (op == "<=") return x <= y;
    return x >= y;
  }
  static bool compareI32(int32_t x, int32_t y, const std::string& op) {
    return compareRaw<int32_t>(x, y, op);
  }

  // ---- builtins usable inside expressions ----

  Value evalBuiltinCall(const Expr& e) {
    switch (e.builtin) {
      case BuiltinId::Sqrt: return Value::ofF64(std::sqrt(evalExpr(*e.args[0]).asF64()));
      case BuiltinId::Fabs: return Value::ofF64(std::fabs(evalExpr(*e.args[0]).asF64()));
      case BuiltinId::ArgNum: {
        int32_t i = evalExpr(*e.args[0]).asI32();
        const auto& args = vmArgs();
        if (i < 0 || static_cast<size_t>(i) >= args.size()) return Value::ofF64(0.0);
        return Value::ofF64(args[static_cast<size_t>(i)]);
      }
      case BuiltinId::RolexPrecisionCast:
        return evalExpr(*e.args[0]);
      case BuiltinId::Malloc:
      case BuiltinId::RolexMallocTolerant:
      case BuiltinId::RolexMallocRobust:
      case BuiltinId::RolexMallocRepairable:
        return execMalloc(e);
      default:
        crashHalt("internal: builtin not valid in an expression");
    }
  }

  const std::vector<double>& vmArgs();

  Value execMalloc(const Expr& e) {
    int64_t bytes = evalExpr(*e.args[0]).asI32();
    ElementKind elem = e.heapElementKind;
    int esz = elementSize(elem) == 0 ? 1 : elementSize(elem);
    if (bytes <= 0 || bytes % esz != 0) crashHalt("invalid-allocation-size");
    uint64_t len = static_cast<uint64_t>(bytes);

    if (e.builtin == BuiltinId::Malloc) {
      Addr base = mem().heapAlloc(len);
      if (!base) crashHalt("out-of-simulated-memory");
      return Value::ofPtr(base);
    }

    if (e.builtin == BuiltinId::RolexMallocTolerant) {
      Addr base = mem().heapAlloc(len);
      if (!base) crashHalt("out-of-simulated-memory");
      DrmEntry d;
      d.constructId = "heapdyn:" + std::to_string(heapEntryCounter++);
      d.kind = ProfileKind::TolerantHeap;
      d.elementKind = elem;
      d.ranges.emplace_back(base, len);
      d.dynamic = true;
      const Expr& lim = *e.args[1];
      if (lim.kind == Expr::Kind::NullLit) {
        d.fullElision = true;
        d.mask = deriveMask(elem, nullptr);
      } else {
        RolexPrecision p;
        p.value = lim.args[0]->intValue;
        p.interpretation = (elem == ElementKind::F32 || elem == ElementKind::F64)
                               ? LimitInterpretation::DecimalDigits
                               : LimitInterpretation::MaxValue;
        try {
          d.mask = deriveMask(elem, &p);
        } catch (const InvalidLimit&) {
          crashHalt("invalid-tolerance-limit");
        }
      }
      rt().drmRegister(std::move(d));
      return Value::ofPtr(base);
    }

    if (e.builtin == BuiltinId::RolexMallocRobust) {
      int copies = static_cast<int>(e.args[1]->intValue);
      DrmEntry d;
      d.constructId = "heapdyn:" + std::to_string(heapEntryCounter++);
      d.kind = ProfileKind::RobustHeap;
      d.elementKind = elem;
      d.strength = copies == 3 ? Strength::Correct : Strength::Detect;
      d.dynamic = true;
      Addr first = 0;
      for (int i = 0; i < copies; i++) {
        Addr b = mem().heapAlloc(len);
        if (!b) crashHalt("out-of-simulated-memory");
        if (i == 0) first = b;
        d.ranges.emplace_back(b, len);
      }
      rt().drmRegister(std::move(d));
      return Value::ofPtr(first);
    }

    // repairable
    Addr base = mem().heapAlloc(len);
    if (!base) crashHalt("out-of-simulated-memory");
    DrmEntry d;
    d.constructId = "heapdyn:" + std::to_string(heapEntryCounter++);
    d.kind = ProfileKind::RepairableHeap;
    d.elementKind = elem;
    d.ranges.emplace_back(base, len);
    d.recoveryFnIndex = e.args[1]->calleeIndex;
    d.dynamic = true;
    rt().drmRegister(std::move(d));
    return Value::ofPtr(base);
  }

  // ---- statement-level builtins ----

  void execBuiltinStmt(const Expr& e) {
    switch (e.builtin) {
      case BuiltinId::Free: {
        Addr p = evalExpr(*e.args[0]).raw;
        const DrmEntry* d = rt().drm().lookup(p);
        if (d && d->dynamic && !d->ranges.empty() && d->ranges[0].first == p) {
          for (const auto& [b, l] : d->ranges) mem().heapFree(b);
          rt().drmDeregister(d->constructId);
          return;
        }
        if (!mem().heapFree(p)) crashHalt("invalid-free");
        return;
      }
      case BuiltinId::RolexValidateRobust: {
        Addr p = spanTargetAddr(*e.args[0]);
        const DrmEntry* d = rt().drm().lookup(p);
        if (!d || (d->kind != ProfileKind::Robust && d->kind != ProfileKind::RobustHeap))
          crashHalt("validate-target-not-robust");
        VoteOutcome v = rt().voteAndRepair(*d);
        RecoveryAction a;
        a.step = vm.stepCounter_;
        a.target = d->constructId;
        if (v == VoteOutcome::DetectedOnly) {
          a.kind = RecoveryActionKind::DetectReport;
          logAndObserve(a);
          vm.terminateGracefully("validation found an unrecoverable mismatch in " +
                                 d->constructId);
          throw VmHalt{};
        }
        if (v == VoteOutcome::Corrected) {
          a.kind = RecoveryActionKind::VoteCorrect;
          a.repaired = true;
          logAndObserve(a);
        }
        return;
      }
      case BuiltinId::RolexAmeliorateHeal: {
        Addr p = spanTargetAddr(*e.args[0]);
        const DrmEntry* d = rt().drm().lookup(p);
        if (!d || (d->kind != ProfileKind::Heal && d->kind != ProfileKind::RepairableHeap))
          crashHalt("heal-target-not-repairable");
        RecoveryAction a;
        a.step = vm.stepCounter_;
        a.target = d->constructId;
        a.kind = RecoveryActionKind::HealInvoke;
        if (rt().healInvoke(*d)) {
          a.repaired = true;
          logAndObserve(a);
          return;
        }
        logAndObserve(a);
        vm.terminateGracefully("recovery function could not repair " + d->constructId);
        throw VmHalt{};
      }
      case BuiltinId::RtlInitialize:
        return;
      case BuiltinId::RtlFinalize:
        rt().finalize();
        return;
      case BuiltinId::RtlRegister: {
        const std::string& id = e.args[0]->text;
        if (!rt().isBlockId(id)) crashHalt("unknown-block: " + id);
        rt().enterBlock(id, frames.size() - 1);
        if (vm.status_ != VmStatus::Running) throw VmHalt{};
        return;
      }
      case BuiltinId::RtlDeregister: {
        rt().exitBlock(e.args[0]->text);
        if (vm.status_ != VmStatus::Running) throw VmHalt{};
        return;
      }
      case BuiltinId::RtlPreserveState: {
        const std::string& id = e.args[0]->text;
        rt().preserveState(id);
        if (vm.observer_) {
          const ProfileRecord* rec = rt().profileRecord(id);
          if (rec) {
            auto note = [&](const std::vector<std::string>& ids) {
              for (const auto& cid : ids) {
                const SymbolPlacement* pl = vm.findConstruct(cid);
                if (pl) vm.observer_->onCheckpoint(id, pl->symbolId, pl->base, pl->length);
              }
            };
            note(rec->shareVars);
            note(rec->reinitializeVars);
          }
        }
        return;
      }
      case BuiltinId::RtlRestoreState:
        rt().restoreState(e.args[0]->text);
        return;
      case BuiltinId::RtlJmpFwd:
        rt().jmpFwd(e.args[0]->text);
        return;
      case BuiltinId::RtlJmpBack:
        rt().jmpBack(e.args[0]->text);
        return;
      case BuiltinId::RtlCreateCheckpoint:
        rt().createCheckpoint(e.args[0]->text, e.args[1]->symbolId);
        return;
      case BuiltinId::RtlRestoreCheckpoint:
        rt().restoreCheckpoint(e.args[0]->text, e.args[1]->symbolId);
        return;
      case BuiltinId::RtlCopy: {
        if (e.args.size() == 1) {
          rt().copyVar(e.args[0]->symbolId);
          return;
        }
        // two-argument form: raw duplication including definedness
        auto [srcA, srcL] = resolveSpanOf(*e.args[0]);
        auto [dstA, dstL] = resolveSpanOf(*e.args[1]);
        uint64_t n = std::min(srcL, dstL);
        const uint8_t* sb = mem().rawSpan(srcA, n);
        uint8_t* si = mem().rawInitSpan(srcA, n);
        uint8_t* db = mem().rawSpan(dstA, n);
        uint8_t* di = mem().rawInitSpan(dstA, n);
        if (!sb || !db) crashHalt("invalid-access");
        std::memcpy(db, sb, n);
        std::memcpy(di, si, n);
        return;
      }
      case BuiltinId::RtlCompare: {
        const std::string& id = e.args[0]->text;
        std::vector<std::pair<Addr, uint64_t>> spans;
        ElementKind elem = ElementKind::None;
        for (size_t i = 1; i < e.args.size(); i++) {
          spans.push_back(resolveSpanOf(*e.args[i]));
          if (elem == ElementKind::None) {
            const Type& t = e.args[i]->type;
            elem = t.isArray() ? t.elementKind() : t.elementKind();
          }
        }
        rt().compareGroup(id, spans, elem);
        if (vm.observer_) vm.observer_->afterCompareGroup(id);
        if (vm.status_ != VmStatus::Running) throw VmHalt{};
        return;
      }
      default:
        // value-returning builtins in statement position: evaluate and drop
        evalExpr(e);
        return;
    }
  }

  void logAndObserve(const RecoveryAction& a) {
    rt().logExternal(a);
    if (vm.observer_) vm.observer_->afterAction(a);
  }

  std::pair<Addr, uint64_t> resolveSpanOf(const Expr& e) { return resolveSpan(e); }

  Addr spanTargetAddr(const Expr& e) {
    if (e.kind == Expr::Kind::Ident && e.type.isArray()) {
      const SymbolPlacement* pl = mem().placementOf(e.symbolId);
      return pl->base;
    }
    if (e.kind == Expr::Kind::Ident && !e.type.isPointer())
      return placeOfSymbol(e.symbolId).addr;
    return evalExpr(e).raw;
  }

  // ---- calls ----

  void pushUserCall(int fnIndex, const std::vector<Value>& argValues, bool hasDest,
                    Addr destAddr, ElementKind destKind, bool barrier) {
    const FunctionDecl& fn = prog().functions[static_cast<size_t>(fnIndex)];
    if (!fn.body) crashHalt("call-to-undefined-function");
    for (size_t i = 0; i < fn.params.size(); i++) {
      PlaceRef p = placeOfSymbol(fn.params[i].symbolId);
      store(p, argValues[i]);
    }
    Frame f;
    f.fnIndex = fnIndex;
    f.hasDest = hasDest;
    f.destAddr = destAddr;
    f.destKind = destKind;
    f.recoveryBarrier = barrier;
    ControlEntry ce;
    ce.kind = ControlEntry::Kind::Seq;
    ce.list = &fn.body->stmts;
    ce.index = 0;
    f.control.push_back(ce);
    frames.push_back(std::move(f));
    if (frames.size() > 512) crashHalt("call-depth-exceeded");
  }

  void returnFromFrame(const Value& v) {
    Frame& f = frames.back();
    if (f.hasDest) store({f.destAddr, f.destKind}, v);
    if (f.recoveryBarrier) recoveryResult = v.asI32();
    bool wasMain = frames.size() == 1;
    frames.pop_back();
    rt().dropContextsAboveFrame(frames.size());
    if (wasMain) {
      vm.exitValue_ = v.asI32();
      vm.status_ = VmStatus::CompletedOk;
    }
  }

  // statement-level user call handling; returns true if a call frame was
  // pushed or the call was skipped by a pending roll-forward
  void execUserCall(const Expr& call, bool hasDest, Addr destAddr, ElementKind destKind,
                    size_t anchorStmtIndex, bool anchorValid) {
    std::vector<Value> argValues;
    const FunctionDecl& fn = prog().functions[static_cast<size_t>(call.calleeIndex)];
    argValues.reserve(call.args.size());
    for (size_t i = 0; i < call.args.size(); i++) {
      Value v = evalExpr(*call.args[i]);
      argValues.push_back(convert(v, fn.params[i].type.elementKind()));
    }
    ControlAnchor anchor;
    anchor.set = anchorValid;
    anchor.frameIndex = frames.size() - 1;
    anchor.controlIndex = frames.back().control.size() - 1;
    anchor.stmtIndex = anchorStmtIndex;
    anchor.hasDest = hasDest;
    anchor.destAddr = destAddr;
    anchor.destKind = destKind;
    if (!rt().onUserCall(call.calleeIndex, anchor)) return;  // skipped
    pushUserCall(call.calleeIndex, argValues, hasDest, destAddr, destKind, false);
  }

  // ---- statement dispatch; returns true when a counted unit ran ----

  bool dispatch(const Stmt& s, size_t seqIndex, bool inSeq) {
    switch (s.kind) {
      case Stmt::Kind::Block: {
        ControlEntry ce;
        ce.kind = ControlEntry::Kind::Seq;
        ce.list = &s.stmts;
        ce.index = 0;
        frames.back().control.push_back(ce);
        return false;
      }
      case Stmt::Kind::Decl: {
        if (!s.decl.init) return false;
        PlaceRef dest = placeOfSymbol(s.decl.symbolId);
        if (s.decl.init->kind == Expr::Kind::Call && s.decl.init->calleeIndex >= 0) {
          execUserCall(*s.decl.init, true, dest.addr, dest.elem, seqIndex, inSeq);
          return true;
        }
        store(dest, evalExpr(*s.decl.init));
        return true;
      }
      case Stmt::Kind::Assign: {
        PlaceRef dest = resolveLValue(*s.lhs);
        if (s.expr->kind == Expr::Kind::Call && s.expr->calleeIndex >= 0) {
          execUserCall(*s.expr, true, dest.addr, dest.elem, seqIndex, inSeq);
          return true;
        }
        store(dest, evalExpr(*s.expr));
        return true;
      }
      case Stmt::Kind::ExprStmt: {
        const Expr& e = *s.expr;
        if (e.kind == Expr::Kind::Call && e.calleeIndex >= 0) {
          execUserCall(e, false, 0, ElementKind::None, seqIndex, inSeq);
          return true;
        }
        execBuiltinStmt(e);
        return true;
      }
      case Stmt::Kind::If: {
        bool cond = toBool(evalExpr(*s.expr));
        const Stmt* branch = cond ? s.body.get() : s.elseBody.get();
        if (branch) {
          ControlEntry ce;
          ce.kind = ControlEntry::Kind::Single;
          ce.stmt = branch;
          frames.back().control.push_back(ce);
        }
        return true;
      }
      case Stmt::Kind::While: {
        ControlEntry ce;
        ce.kind = ControlEntry::Kind::Loop;
        ce.stmt = &s;
        ce.phase = 1;
        frames.back().control.push_back(ce);
        return false;
      }
      case Stmt::Kind::For: {
        ControlEntry ce;
        ce.kind = ControlEntry::Kind::Loop;
        ce.stmt = &s;
        ce.phase = 0;
        frames.back().control.push_back(ce);
        return false;
      }
      case Stmt::Kind::Return: {
        Value v = Value::ofI32(0);
        if (s.expr) {
          const FunctionDecl& fn = prog().functions[static_cast<size_t>(frames.back().fnIndex)];
          v = convert(evalExpr(*s.expr), fn.returnType.elementKind());
        }
        returnFromFrame(v);
        return true;
      }
      case Stmt::Kind::Break:
      case Stmt::Kind::Continue: {
        auto& control = frames.back().control;
        while (!control.empty() && control.back().kind != ControlEntry::Kind::Loop)
          control.pop_back();
        if (control.empty()) crashHalt("internal: loop control escape");
        if (s.kind == Stmt::Kind::Break) {
          control.pop_back();
        } else {
          ControlEntry& loop = control.back();
          loop.phase = loop.stmt->kind == Stmt::Kind::For ? 2 : 1;
        }
        return true;
      }
      case Stmt::Kind::Print: {
        std::string line;
        for (size_t i = 0; i < s.args.size(); i++) {
          if (i) line += " ";
          line += formatValue(*s.args[i]);
        }
        line += "\n";
        vm.output_ += line;
        return true;
      }
      case Stmt::Kind::Directive: {
        // untransformed execution: the structured block runs plainly
        ControlEntry ce;
        ce.kind = ControlEntry::Kind::Single;
        ce.stmt = s.body.get();
        frames.back().control.push_back(ce);
        return false;
      }
    }
    return false;
  }

  std::string formatValue(const Expr& arg) {
    if (arg.kind == Expr::Kind::StringLit) return arg.text;
    Value v = evalExpr(arg);
    char buf[40];
    switch (v.kind) {
      case ElementKind::I32:
        std::snprintf(buf, sizeof buf, "%d", v.asI32());
        break;
      case ElementKind::U32:
        std::snprintf(buf, sizeof buf, "%u", v.asU32());
        break;
      case ElementKind::F32:
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v.asF32()));
        break;
      case ElementKind::F64:
        std::snprintf(buf, sizeof buf, "%.17g", v.asF64());
        break;
      default:
        std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v.raw));
        break;
    }
    return buf;
  }

  // ---- the statement machine ----

  void executeOneUnit() {
    try {
      while (vm.status_ == VmStatus::Running) {
        if (frames.empty()) {
          vm.status_ = VmStatus::CompletedOk;
          return;
        }
        Frame& f = frames.back();
        if (f.control.empty()) {
          returnFromFrame(Value::ofI32(0));  // fall off the end
          continue;
        }
        ControlEntry& ce = f.control.back();
        switch (ce.kind) {
          case ControlEntry::Kind::Seq: {
            if (ce.index >= ce.list->size()) {
              f.control.pop_back();
              continue;
            }
            size_t idx = ce.index++;
            const Stmt* s = (*ce.list)[idx].get();
            if (dispatch(*s, idx, true)) {
              vm.stepCounter_++;
              return;
            }
            continue;
          }
          case ControlEntry::Kind::Single: {
            const Stmt* s = ce.stmt;
            f.control.pop_back();
            if (dispatch(*s, 0, false)) {
              vm.stepCounter_++;
              return;
            }
            continue;
          }
          case ControlEntry::Kind::Loop: {
            const Stmt* loop = ce.stmt;
            if (ce.phase == 0) {  // for-init
              ce.phase = 1;
              if (loop->init) {
                ControlEntry sub;
                sub.kind = ControlEntry::Kind::Single;
                sub.stmt = loop->init.get();
                f.control.push_back(sub);
              }
              continue;
            }
            if (ce.phase == 2) {  // for-incr
              ce.phase = 1;
              if (loop->incr) {
                ControlEntry sub;
                sub.kind = ControlEntry::Kind::Single;
                sub.stmt = loop->incr.get();
                f.control.push_back(sub);
              }
              continue;
            }
            // test
            bool cond = loop->expr ? toBool(evalExpr(*loop->expr)) : true;
            if (!cond) {
              f.control.pop_back();
            } else {
              ce.phase = loop->kind == Stmt::Kind::For ? 2 : 1;
              ControlEntry sub;
              sub.kind = ControlEntry::Kind::Single;
              sub.stmt = loop->body.get();
              f.control.push_back(sub);
            }
            vm.stepCounter_++;
            return;
          }
        }
      }
    } catch (const VmHalt&) {
      // status already updated
    } catch (const std::runtime_error& err) {
      if (vm.status_ == VmStatus::Running) {
        vm.status_ = VmStatus::Crashed;
        vm.crashReason_ = err.what();
      }
    }
  }

  void applyPendingTransfers() {
    auto& contexts = rt().contexts();
    for (size_t i = contexts.size(); i-- > 0;) {
      BlockContext& ctx = contexts[i];
      if (!ctx.pendingRetry && !ctx.pendingSkip) continue;
      bool retry = ctx.pendingRetry;
      ctx.pendingRetry = false;
      ctx.pendingSkip = false;
      if (!ctx.anchor.set) {
        // fault arrived before the bracketed call: the upcoming call is the
        // retry; a skip must swallow that call when it arrives
        if (!retry) ctx.skipNextCall = true;
        return;
      }
      contexts.resize(i + 1);
      frames.resize(ctx.anchor.frameIndex + 1);
      Frame& f = frames.back();
      if (f.control.size() > ctx.anchor.controlIndex + 1)
        f.control.resize(ctx.anchor.controlIndex + 1);
      ControlEntry& ce = f.control.back();
      ce.index = ctx.anchor.stmtIndex + (retry ? 0 : 1);
      if (!retry && ctx.applyFallback) rt().applySkipFallback(ctx);
      return;
    }
  }

  void drainNotifications() {
    size_t before = rt().actionLog().size();
    try {
      while (vm.status_ == VmStatus::Running && vm.channel_.hasPending()) {
        ErrorNotification n = vm.channel_.pop();
        vm.channel_.noteDelivered();
        rt().handleNotification(n);
      }
    } catch (const VmHalt&) {
    } catch (const std::runtime_error& err) {
      if (vm.status_ == VmStatus::Running) {
        vm.status_ = VmStatus::Crashed;
        vm.crashReason_ = err.what();
      }
    }
    if (vm.observer_)
      for (size_t i = before; i < rt().actionLog().size(); i++)
        vm.observer_->afterAction(rt().actionLog()[i]);
  }
};

// ---------------------------------------------------------------------------
// construction / loading

namespace {

double constEval(const Expr& e);

double constEval(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IntLit: return static_cast<double>(e.intValue);
    case Expr::Kind::FloatLit: return e.floatValue;
    case Expr::Kind::NullLit: return 0.0;
    case Expr::Kind::SizeOf: return elementSize(e.sizeofType.elementKind());
    case Expr::Kind::Unary:
      if (e.text == "-") return -constEval(*e.lhs);
      if (e.text == "!") return constEval(*e.lhs) == 0.0 ? 1.0 : 0.0;
      throw LoadError("global initializer must be constant");
    case Expr::Kind::Binary: {
      double a = constEval(*e.lhs);
      double b = constEval(*e.rhs);
      if (e.text == "+") return a + b;
      if (e.text == "-") return a - b;
      if (e.text == "*") return a * b;
      if (e.text == "/") return a / b;
      throw LoadError("global initializer must be constant");
    }
    default:
      throw LoadError("global initializer must be constant");
  }
}

}  // namespace

Vm::Vm(const Program& program, const ResilienceProfile& profile, VmOptions options)
    : program_(program), observer_(options.observer) {
  if (!program.resolved)
    throw LoadError("program must pass validation before loading");
  impl_ = std::make_unique<Impl>(*this);
  stepLimit_ = options.stepLimit;
  args_ = options.args;

  // permuted placement of every named symbol inside the static segment
  std::vector<int> order(program.symbols.size());
  for (size_t i = 0; i < order.size(); i++) order[i] = static_cast<int>(i);
  uint64_t rng = options.layoutSeed * 0x2545f4914f6cdd1dull + 0x9e3779b97f4a7c15ull;
  for (size_t i = order.size(); i > 1; i--) {
    uint64_t j = splitmix64(rng) % i;
    std::swap(order[i - 1], order[j]);
  }
  for (int symId : order) {
    const SymbolInfo& s = program.symbols[static_cast<size_t>(symId)];
    memory_.placeStatic(symId, static_cast<uint64_t>(s.type.byteSize()),
                        s.type.elementKind());
  }
  memory_.sealStatic();

  runtime_ = std::make_unique<RolexRuntime>(*this);
  try {
    runtime_->initialize(profile);
  } catch (const std::runtime_error& e) {
    throw LoadError(std::string("profile does not match program: ") + e.what());
  }

  // synthetic instruction-memory ranges, placement order permuted as well
  auto& blocks = runtime_->blocksMutable();
  std::vector<int> blockOrder(blocks.size());
  for (size_t i = 0; i < blockOrder.size(); i++) blockOrder[i] = static_cast<int>(i);
  for (size_t i = blockOrder.size(); i > 1; i--) {
    uint64_t j = splitmix64(rng) % i;
    std::swap(blockOrder[i - 1], blockOrder[j]);
  }
  for (int bi : blockOrder) {
    BlockInfo& b = blocks[static_cast<size_t>(bi)];
    uint64_t len = b.record.codeBytes ? b.record.codeBytes : 16;
    b.codeBase = memory_.placeCodeRange(bi, len);
    b.codeLength = len;
  }

  // constant global initializers
  for (const auto& g : program.globals) {
    if (!g.init) continue;
    const SymbolPlacement* pl = memory_.placementOf(g.symbolId);
    Value v;
    switch (g.type.elementKind()) {
      case ElementKind::I32: v = Value::ofI32(static_cast<int32_t>(constEval(*g.init))); break;
      case ElementKind::U32: v = Value::ofU32(static_cast<uint32_t>(constEval(*g.init))); break;
      case ElementKind::F32: v = Value::ofF32(static_cast<float>(constEval(*g.init))); break;
      case ElementKind::F64: v = Value::ofF64(constEval(*g.init)); break;
      case ElementKind::Ptr: v = Value::ofPtr(0); break;
      default: continue;
    }
    memory_.write(pl->base, &v.raw, pl->length);
  }

  int mainIdx = program.findFunction("main");
  if (mainIdx < 0 || !program.functions[static_cast<size_t>(mainIdx)].body)
    throw LoadError("program has no main function");
  if (!program.functions[static_cast<size_t>(mainIdx)].params.empty())
    throw LoadError("main takes no parameters");
  impl_->pushUserCall(mainIdx, {}, false, 0, ElementKind::None, false);
}

Vm::~Vm() = default;

const std::vector<double>& Vm::Impl::vmArgs() { return vm.args_; }

void Vm::step() {
  if (status_ != VmStatus::Running) return;
  impl_->drainNotifications();
  if (status_ != VmStatus::Running) return;
  impl_->applyPendingTransfers();
  if (status_ != VmStatus::Running) return;
  impl_->executeOneUnit();
  if (status_ == VmStatus::Running && stepCounter_ >= stepLimit_) crashSoft("timeout");
}

void Vm::run(uint64_t stepLimit) {
  stepLimit_ = stepLimit;
  while (status_ == VmStatus::Running) {
    if (stepCounter_ >= stepLimit_) {
      crashSoft("timeout");
      return;
    }
    step();
  }
}

void Vm::crashSoft(const std::string& reason) {
  if (status_ != VmStatus::Running) return;
  status_ = VmStatus::Crashed;
  crashReason_ = reason;
}

int Vm::runRecoveryFunction(int fnIndex) {
  size_t baseFrames = impl_->frames.size();
  impl_->recoveryResult = 0;
  try {
    impl_->pushUserCall(fnIndex, {}, false, 0, ElementKind::None, true);
  } catch (const VmHalt&) {
  }
  while (status_ == VmStatus::Running && impl_->frames.size() > baseFrames) {
    if (stepCounter_ >= stepLimit_) {
      crashSoft("timeout");
      break;
    }
    impl_->executeOneUnit();
  }
  if (status_ == VmStatus::Crashed && crashReason_ != "timeout") {
    // a crashing recovery function is an unrepairable outcome, not a VM end
    impl_->frames.resize(baseFrames);
    status_ = VmStatus::Running;
    crashReason_.clear();
    return 0;
  }
  return impl_->recoveryResult;
}

void Vm::terminateGracefully(const std::string& why) {
  if (status_ != VmStatus::Running) return;
  status_ = VmStatus::TerminatedGraceful;
  crashReason_ = why;
  throw VmHalt{};
}

void Vm::crash(const std::string& reason) {
  if (status_ != VmStatus::Running) return;
  status_ = VmStatus::Crashed;
  crashReason_ = reason;
  throw VmHalt{};
}

bool Vm::applyFault(Addr address, int bitIndex, bool detected, std::string* hitConstruct) {
  if (const CodeRange* cr = memory_.codeRangeAt(address)) {
    if (hitConstruct)
      *hitConstruct = runtime_->blocks()[static_cast<size_t>(cr->blockIndex)].record.constructId;
    if (detected) {
      ErrorNotification n;
      n.address = address;
      n.bitIndex = bitIndex;
      n.detected = true;
      n.step = stepCounter_;
      channel_.push(n);
    } else {
      ErrorNotification n;
      n.address = address;
      n.bitIndex = bitIndex;
      n.detected = false;
      n.step = stepCounter_;
      channel_.push(n);
      try {
        runtime_->noteSilentCodeFault(cr->blockIndex);
      } catch (const VmHalt&) {
      }
    }
    return true;
  }
  uint8_t b;
  if (!memory_.rawReadByte(address, b)) return false;
  memory_.rawWriteByte(address, static_cast<uint8_t>(b ^ (1u << bitIndex)));
  if (hitConstruct) {
    const DrmEntry* e = runtime_->drm().lookup(address);
    if (e) *hitConstruct = e->constructId;
  }
  ErrorNotification n;
  n.address = address;
  n.bitIndex = bitIndex;
  n.detected = detected;
  n.step = stepCounter_;
  channel_.push(n);
  return true;
}

const SymbolPlacement* Vm::findConstruct(const std::string& constructId) const {
  for (size_t i = 0; i < program_.symbols.size(); i++)
    if (program_.symbols[i].constructId == constructId)
      return memory_.placementOf(static_cast<int>(i));
  return nullptr;
}

}  // namespace rolex
