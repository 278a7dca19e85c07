#pragma once

#include "vtem/types.hpp"

#include <string>
#include <vector>

namespace vtem {

// One failed inequality: which check, where, and by how much.
struct Violation {
  std::string check;
  Vector witness;
  double measured = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::string subject;
  long samples_checked = 0;
  std::vector<Violation> violations;

  bool pass() const { return violations.empty(); }
  std::string summary() const;
};

// Deterministic sample set for validators: a Kronecker (golden-ratio)
// low-discrepancy sequence scaled to the box [lo, hi]^dim.
std::vector<Vector> sample_box(const Vector& lo, const Vector& hi, int count);
std::vector<Vector> sample_box(int dim, double half_width, int count);

// Deterministic unit directions for sphere sampling.
std::vector<Vector> sample_directions(int dim, int count);

}  // namespace vtem
