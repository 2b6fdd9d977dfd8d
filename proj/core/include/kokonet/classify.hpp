#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kokonet/angles.hpp"
#include "kokonet/elliptic.hpp"

namespace kokonet {

struct ClassificationReport {
  bool elliptic = false;
  bool moduliEqual = false;
  double moduliDeviation = 0.0;
  bool amplitudesMatch = false;
  double amplitudesDeviation = 0.0;
  double M = 0.0;  // mean modulus
  std::array<double, 4> moduli{};
  bool phaseShiftsValid = false;
  std::array<PhaseShift, 4> phaseShifts{};
  std::optional<std::array<int, 3>> periodSigns;
  double periodResidual = 0.0;
  bool verdict = false;
  std::string diagnostic;
};

inline constexpr double kClassifyTol = 1e-9;
inline constexpr double kClassifyTolTruncated = 1e-6;

// Equimodular elliptic predicate. Throws NotElliptic if a vertex fails the
// ellipticity test; any later failure is reported through verdict/diagnostic.
ClassificationReport classify(const NetAngles& net, double tol = kClassifyTol);

// The four amplitude/period-sign equalities at common vertices: r1=r2, s1=s4, r3=r4, s2=s3.
double amplitude_mismatch(const std::array<DerivedVertexQuantities, 4>& q);

enum class Strip { Top, Left, Bottom, Right };

// Index of the dihedral angle shifted by pi when the strip is switched.
int strip_dihedral(Strip s) noexcept;

// Complements the flat-angle quadruple carried by the strip:
//   Right (theta4):  beta, gamma at A1, A4
//   Left (theta2):   beta, gamma at A2, A3
//   Top (theta1):    alpha, beta at A1, A2
//   Bottom (theta3): alpha, beta at A3, A4
NetAngles switch_strip(const NetAngles& net, Strip which);
DihedralState switch_strip(const DihedralState& state, Strip which);

struct ExclusivityReport {
  bool orthodiagonalRuledOut = false;
  bool conjugateModularRuledOut = false;
  bool trivialRuledOut = false;
  bool linearCompoundRuledOut = false;
  int stripVariantsChecked = 0;
  // Smallest margins seen over all variants; a margin <= tol means the class was not excluded.
  double orthodiagonalMargin = 0.0;
  double conjugateModularMargin = 0.0;
  double trivialMargin = 0.0;
  double linearCompoundMargin = 0.0;
};

struct ExclusivityOptions {
  double tol = 1e-9;
  double constancyRelStd = 1e-8;
  std::size_t minSamples = 8;
};

ExclusivityReport exclusivity(const NetAngles& net, const std::vector<DihedralState>& samples,
                              const ExclusivityOptions& opts = {});

}  // namespace kokonet
