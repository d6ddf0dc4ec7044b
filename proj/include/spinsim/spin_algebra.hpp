#pragma once

#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace spinsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Absolute, entrywise. Every operator in this library is assembled
// analytically, so asymmetry above this level means a construction bug.
inline constexpr double kHermitianTolerance = 1e-12;

// Spin quantum number stored as 2F so half-integer values stay exact.
class SpinQuantumNumber {
 public:
  static SpinQuantumNumber from_twice(int two_f);
  static SpinQuantumNumber from_integer(int f) { return from_twice(2 * f); }

  int two_f() const { return two_f_; }
  double value() const { return 0.5 * two_f_; }
  int dim() const { return two_f_ + 1; }
  bool is_integer() const { return two_f_ % 2 == 0; }

  friend bool operator==(SpinQuantumNumber, SpinQuantumNumber) = default;

 private:
  explicit SpinQuantumNumber(int two_f) : two_f_(two_f) {}
  int two_f_;
};

// |F, m> label, again in doubled units.
struct BasisLabel {
  int two_f = 0;
  int two_m = 0;

  double f() const { return 0.5 * two_f; }
  double m() const { return 0.5 * two_m; }
  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

std::string to_string(const BasisLabel& label);

// Labels for a single manifold in the canonical order m = F, F-1, ..., -F.
std::vector<BasisLabel> manifold_labels(SpinQuantumNumber f);

struct StateVector {
  ComplexVector amplitudes;
  std::vector<BasisLabel> labels;

  int dim() const { return static_cast<int>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }
  // Index of a label, or -1.
  int index_of(const BasisLabel& label) const;
  double population(const BasisLabel& label) const;
};

// Normalised basis state |F, m> in a single manifold.
StateVector basis_state(SpinQuantumNumber f, int two_m);
// Basis state selected by label in an arbitrary labelled basis.
StateVector basis_state(const std::vector<BasisLabel>& labels, const BasisLabel& which);

struct SpinOperatorSet {
  SpinQuantumNumber f;
  ComplexMatrix fx;
  ComplexMatrix fy;
  ComplexMatrix fz;
};

// Ladder-operator construction in units of hbar. Throws kTrivialSpin for 2F = 0.
SpinOperatorSet build_spin_operators(SpinQuantumNumber f);

double max_hermitian_asymmetry(const ComplexMatrix& a);
double max_abs_entry(const ComplexMatrix& a);

// exp(-i h dt) for Hermitian h in rad/s via eigendecomposition. Decoupled
// diagonal blocks of h are diagonalised independently.
ComplexMatrix unitary_from_hamiltonian(const ComplexMatrix& h, double dt);

// <a|b>; requires identical labels.
Complex overlap(const StateVector& a, const StateVector& b);

struct LabelledBlock {
  ComplexMatrix matrix;
  std::vector<BasisLabel> labels;
};

ComplexMatrix embed_direct_sum(std::span<const LabelledBlock> blocks);
std::vector<BasisLabel> direct_sum_labels(std::span<const LabelledBlock> blocks);

}  // namespace spinsim
