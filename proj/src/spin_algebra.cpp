#include "spinsim/spin_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spinsim/error.hpp"

namespace spinsim {

SpinQuantumNumber SpinQuantumNumber::from_twice(int two_f) {
  if (two_f < 0) {
    throw Error(ErrorKind::kInvalidArgument, "2F must be non-negative, got " + std::to_string(two_f));
  }
  return SpinQuantumNumber(two_f);
}

std::string to_string(const BasisLabel& label) {
  auto half = [](int twice) {
    if (twice % 2 == 0) return std::to_string(twice / 2);
    return std::to_string(twice) + "/2";
  };
  return "|" + half(label.two_f) + "," + half(label.two_m) + ">";
}

std::vector<BasisLabel> manifold_labels(SpinQuantumNumber f) {
  std::vector<BasisLabel> labels;
  labels.reserve(f.dim());
  for (int two_m = f.two_f(); two_m >= -f.two_f(); two_m -= 2) {
    labels.push_back({f.two_f(), two_m});
  }
  return labels;
}

int StateVector::index_of(const BasisLabel& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

double StateVector::population(const BasisLabel& label) const {
  int i = index_of(label);
  if (i < 0) throw Error(ErrorKind::kInvalidArgument, "label " + to_string(label) + " not in basis");
  return std::norm(amplitudes[i]);
}

StateVector basis_state(const std::vector<BasisLabel>& labels, const BasisLabel& which) {
  StateVector s{ComplexVector::Zero(static_cast<Eigen::Index>(labels.size())), labels};
  int i = s.index_of(which);
  if (i < 0) throw Error(ErrorKind::kInvalidArgument, "label " + to_string(which) + " not in basis");
  s.amplitudes[i] = 1.0;
  return s;
}

StateVector basis_state(SpinQuantumNumber f, int two_m) {
  if (std::abs(two_m) > f.two_f() || (f.two_f() - two_m) % 2 != 0) {
    throw Error(ErrorKind::kInvalidArgument, "2m = " + std::to_string(two_m) + " invalid for 2F = " +
                                                 std::to_string(f.two_f()));
  }
  return basis_state(manifold_labels(f), BasisLabel{f.two_f(), two_m});
}

SpinOperatorSet build_spin_operators(SpinQuantumNumber f) {
  if (f.two_f() == 0) {
    throw Error(ErrorKind::kTrivialSpin, "F = 0 has a one-dimensional space and no dynamics");
  }
  const int d = f.dim();
  const double ff = f.value();
  // Row/column k carries m = F - k; F+ raises m, so it lives above the diagonal.
  ComplexMatrix raise = ComplexMatrix::Zero(d, d);
  for (int k = 1; k < d; ++k) {
    const double m = ff - k;
    raise(k - 1, k) = std::sqrt(ff * (ff + 1.0) - m * (m + 1.0));
  }
  const ComplexMatrix lower = raise.adjoint();
  SpinOperatorSet ops{f, ComplexMatrix(), ComplexMatrix(), ComplexMatrix::Zero(d, d)};
  ops.fx = 0.5 * (raise + lower);
  ops.fy = Complex(0.0, -0.5) * (raise - lower);
  for (int k = 0; k < d; ++k) ops.fz(k, k) = ff - k;
  return ops;
}

double max_hermitian_asymmetry(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs_entry(const ComplexMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

namespace {

constexpr int kSmallBlock = 16;
using SmallMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kSmallBlock, kSmallBlock>;

// Groups indices into connected components of the nonzero pattern.
std::vector<std::vector<Eigen::Index>> coupled_blocks(const ComplexMatrix& h) {
  const Eigen::Index n = h.rows();
  std::vector<Eigen::Index> parent(n);
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (h(i, j) != Complex(0.0) || h(j, i) != Complex(0.0)) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<Eigen::Index> slot(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<Eigen::Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[root]].push_back(i);
  }
  return blocks;
}

template <typename Mat>
void exponentiate_block(const ComplexMatrix& h, const std::vector<Eigen::Index>& idx, double dt, ComplexMatrix& u) {
  using Vec = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, Mat::MaxRowsAtCompileTime, 1>;
  const auto k = static_cast<Eigen::Index>(idx.size());
  Mat block(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) block(r, c) = h(idx[r], idx[c]);
  Eigen::SelfAdjointEigenSolver<Mat> eig(block);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::kInvalidArgument, "eigendecomposition failed");
  }
  Vec phases(k);
  for (Eigen::Index j = 0; j < k; ++j) phases[j] = std::polar(1.0, -eig.eigenvalues()[j] * dt);
  // One Newton-Schulz pass re-orthonormalises the eigenvectors.
  const Mat& raw = eig.eigenvectors();
  const Mat v = raw * (1.5 * Mat::Identity(k, k) - 0.5 * (raw.adjoint() * raw));
  const Mat ub = v * phases.asDiagonal() * v.adjoint();
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) u(idx[r], idx[c]) = ub(r, c);
}

}  // namespace

ComplexMatrix unitary_from_hamiltonian(const ComplexMatrix& h, double dt) {
  if (h.rows() != h.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "Hamiltonian must be square");
  }
  if (!std::isfinite(dt)) throw Error(ErrorKind::kInvalidArgument, "dt must be finite");
  const double asym = max_hermitian_asymmetry(h);
  if (!(asym < kHermitianTolerance)) {
    throw Error(ErrorKind::kNonHermitian, "max |H - H^dagger| = " + std::to_string(asym));
  }
  const Eigen::Index n = h.rows();
  ComplexMatrix u = ComplexMatrix::Zero(n, n);
  for (const auto& idx : coupled_blocks(h)) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    if (k == 1) {
      u(idx[0], idx[0]) = std::polar(1.0, -h(idx[0], idx[0]).real() * dt);
      continue;
    }
    if (k <= kSmallBlock) {
      exponentiate_block<SmallMatrix>(h, idx, dt, u);
    } else {
      exponentiate_block<ComplexMatrix>(h, idx, dt, u);
    }
  }
  return u;
}

Complex overlap(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim() || a.labels != b.labels) {
    throw Error(ErrorKind::kDimensionMismatch, "overlap requires identical bases (" + std::to_string(a.dim()) +
                                                   " vs " + std::to_string(b.dim()) + ")");
  }
  return a.amplitudes.dot(b.amplitudes);
}

ComplexMatrix embed_direct_sum(std::span<const LabelledBlock> blocks) {
  if (blocks.empty()) throw Error(ErrorKind::kEmptyInput, "direct sum of zero blocks");
  Eigen::Index total = 0;
  for (const auto& b : blocks) {
    if (b.matrix.rows() != b.matrix.cols()) {
      throw Error(ErrorKind::kDimensionMismatch, "direct-sum block is not square");
    }
    if (!b.labels.empty() && static_cast<Eigen::Index>(b.labels.size()) != b.matrix.rows()) {
      throw Error(ErrorKind::kDimensionMismatch, "block label count does not match its dimension");
    }
    total += b.matrix.rows();
  }
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    out.block(offset, offset, b.matrix.rows(), b.matrix.cols()) = b.matrix;
    offset += b.matrix.rows();
  }
  return out;
}

std::vector<BasisLabel> direct_sum_labels(std::span<const LabelledBlock> blocks) {
  std::vector<BasisLabel> labels;
  for (const auto& b : blocks) labels.insert(labels.end(), b.labels.begin(), b.labels.end());
  return labels;
}

}  // namespace spinsim
