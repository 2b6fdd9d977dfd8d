#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kokonet/angles.hpp"

namespace kokonet {

// Which of the two dihedral angles adjacent to a vertex plays the role of xi.
// Odd vertices (A1, A3): xi = theta_i, eta = theta_{i-1}.
// Even vertices (A2, A4): xi = theta_{i-1}, eta = theta_i.
enum class Parity { Odd, Even };

Parity vertex_parity(int vertex) noexcept;      // vertex is 0-based
int xi_index(int vertex) noexcept;              // index into DihedralState
int eta_index(int vertex) noexcept;

// Up to two solutions, ascending.
struct TransferSolutions {
  std::array<double, 2> values{};
  int count = 0;

  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
  bool empty() const { return count == 0; }
  // -1 picks the lower solution, +1 the upper; a single solution serves both.
  double pick(int sign) const;
};

// Solves a cos(x) + b sin(x) = c for x in (-pi, pi].
TransferSolutions solve_trig_linear(double a, double b, double c);

// Coupling cos(beta) = P + Q cos(eta) + R sin(eta) at one vertex.
struct CouplingTerms {
  double P = 0.0, Q = 0.0, R = 0.0;
};
CouplingTerms coupling_terms(const VertexGermAngles& g, double xi);

// eta from xi, and xi from eta (the relation is symmetric under (xi, alpha) <-> (eta, gamma)).
TransferSolutions vertex_transfer(const VertexGermAngles& g, double xi);
TransferSolutions vertex_transfer_inverse(const VertexGermAngles& g, double eta);

// cos(beta_i) - (P + Q cos(eta) + R sin(eta)) at each vertex.
std::array<double, 4> coupling_residuals(const NetAngles& net, const DihedralState& s);
double max_coupling_residual(const NetAngles& net, const DihedralState& s);

struct Propagation {
  DihedralState state;
  double closureResidual = 0.0;
};

// Chains the transfers A2 (theta1 -> theta2), A3 (-> theta3), A4 (-> theta4), A1 (-> theta1).
// branch[k] selects the solution at the k-th step of that chain.
// Throws PropagationDead naming the vertex when a transfer has no real solution.
Propagation propagate(const NetAngles& net, double theta1, const std::array<int, 4>& branch);

// Same cycle entered at theta[driver] (0-based) instead of theta1.
Propagation propagate_from(const NetAngles& net, int driver, double value,
                           const std::array<int, 4>& branch);

// Gauss-Newton on the four vertex relations with theta[driver] held fixed. Returns the
// input unchanged if no step reduces the largest relation residual.
DihedralState refine_state(const NetAngles& net, const DihedralState& s, int driver);

// Candidates closing to within this are refined before the tolerance is applied.
inline constexpr double kRefineWindow = 1e-6;

// All distinct states over the 16 branch choices whose closure residual is <= tol.
// A refined state reports its largest vertex relation residual instead.
std::vector<Propagation> closing_states(const NetAngles& net, double theta1, double tol);
std::vector<Propagation> closing_states_from(const NetAngles& net, int driver, double value,
                                             double tol);

inline constexpr double kTraceCloseTol = 1e-8;

struct FlexionTrace {
  std::vector<double> t;  // t = cot(theta1/2), ascending
  std::vector<DihedralState> states;
  bool truncated = false;
  std::string diagnostic;
};

// Continues the branch through start to every grid point of [tMin, tMax] (steps points,
// endpoints included) by nearest-state selection, with t = cot(theta[driver]/2).
// Requires start to close to 1e-10.
FlexionTrace flexion_trace(const NetAngles& net, const DihedralState& start, double tMin,
                           double tMax, int steps, int driver = 0);

struct BricardCoefficients {
  std::array<std::array<double, 4>, 4> A{};  // A[i][j], vertex i, term j (0-based)
};
BricardCoefficients bricard_coefficients(const DihedralState& s);

// Vertex relation in w1 = cot(xi/2), w2 = cot(eta/2):
//   c22 w1^2 w2^2 + c20 w1^2 + c02 w2^2 + 2 c11 w1 w2 + c00 = 0.
struct Biquadratic {
  double c22 = 0.0, c20 = 0.0, c02 = 0.0, c11 = 0.0, c00 = 0.0;
  double eval(double w1, double w2) const;
};
Biquadratic vertex_biquadratic(const VertexGermAngles& g);

// Residuals of the cos(delta_i) relations (first four) and the
// sin(theta_i) sin(theta_{i-1}) relations (last four), using each vertex's own
// derived u, x, y, z, epsilon. Throws Inadmissible on a non-positive radicand.
std::array<double, 8> eq13_residuals(const NetAngles& net, const DihedralState& s);

// Nine search parameters; the shared ones follow x2 = x1, x4 = x3, y4 = y1, y3 = y2.
struct SearchParameters {
  double u = 0.0;
  double x1 = 0.0, x3 = 0.0;
  double y1 = 0.0, y2 = 0.0;
  std::array<double, 4> z{};

  double x(int vertex) const { return vertex < 2 ? x1 : x3; }
  double y(int vertex) const { return (vertex == 0 || vertex == 3) ? y1 : y2; }

  std::array<double, 9> to_array() const;
  static SearchParameters from_array(const std::array<double, 9>& a);
};

// Flat angles from parameters and per-vertex signs.
// Throws Inadmissible on a guard or radicand failure, NonRealAngles on |cos| > 1 or
// an inconsistent half-sum.
NetAngles recover_flat_angles(const SearchParameters& p, const std::array<int, 4>& eps);

enum class RigidityVerdict { Flexes, Isolated, Inconclusive };
const char* to_string(RigidityVerdict v) noexcept;

struct RigidityConfig {
  double radius = 0.05;
  int samplesPerSide = 10;
  double closeTol = 1e-8;
  double isolatedTol = 1e-6;
  double flexFraction = 0.9;
  // A candidate counts only within nearnessFactor * |perturbation| of the base state.
  double nearnessFactor = 20.0;
};

// Each dihedral angle in turn is perturbed; the best-closing driver decides.
struct RigidityReport {
  RigidityVerdict verdict = RigidityVerdict::Inconclusive;
  int driver = 0;  // driver with the most closing samples
  int samples = 0;
  int closing = 0;
  double minResidual = 0.0;  // smallest best-residual over all samples and drivers
  double maxResidual = 0.0;  // largest best-residual over the reported driver's samples
};

RigidityReport rigidity_probe(const NetAngles& net, const DihedralState& state,
                              const RigidityConfig& cfg = {});

}  // namespace kokonet
