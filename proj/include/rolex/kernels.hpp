#pragma once

#include "rolex/injector.hpp"
#include "rolex/transform.hpp"

namespace rolex {

// Kernel correctness bound, from the manifest's "bound" field:
//   exact                    bit-equal output
//   mismatch-frac:F          fraction of differing tokens <= F
//   pixel-frac:T:F           fraction of integer tokens off by more than T < F
//   final-rel:F              last numeric token within relative F of golden
//   resid-below:R            last numeric token < R (golden-independent)
struct BoundSpec {
  enum class Kind { Exact, MismatchFrac, PixelFrac, FinalRel, ResidBelow };
  Kind kind = Kind::Exact;
  double p1 = 0.0;
  double p2 = 0.0;

  static BoundSpec parse(const std::string& text);
  std::string toString() const;
};

struct KernelSpec {
  std::string name;
  std::string sourcePath;  // relative to the corpus directory
  std::vector<double> defaultArgs;
  BoundSpec bound;
  FaultMode defaultMode = FaultMode::Detected;
  std::vector<std::string> rolexConstructsUsed;
};

// Reads kernels/manifest.cfg ("<kernel>.<field> = value" lines).
std::vector<KernelSpec> corpus(const std::string& corpusDir);

const KernelSpec* findKernel(const std::vector<KernelSpec>& specs, const std::string& name);

bool correctnessCheck(const BoundSpec& bound, const std::string& output,
                      const std::string& golden);

OutputBound boundPredicate(const BoundSpec& bound);

// Parse + validate + transform one kernel. Throws std::runtime_error with
// the collected diagnostics on failure.
struct LoadedKernel {
  KernelSpec spec;
  Program original;     // directives executed plainly, no profile
  TransformResult transformed;
};

LoadedKernel loadKernel(const std::string& corpusDir, const KernelSpec& spec);

// Compiled-in default corpus location (overridable by --kernels / config).
std::string defaultCorpusDir();

}  // namespace rolex
