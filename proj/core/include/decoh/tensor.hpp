#pragma once

// Tensor-product Hilbert spaces, state vectors and matrix-free operators
// written as sums of Kronecker products of small local matrices.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace decoh {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

enum class FactorKind { SchwingerSite, Apparatus, Environment };

struct HilbertFactor {
  FactorKind kind = FactorKind::SchwingerSite;
  int site = 0;  // 1-based lattice site, only meaningful for SchwingerSite
  std::size_t dim = 2;

  static HilbertFactor schwinger_site(int n) { return {FactorKind::SchwingerSite, n, 2}; }
  static HilbertFactor apparatus(std::size_t d) { return {FactorKind::Apparatus, 0, d}; }
  static HilbertFactor environment(std::size_t d) { return {FactorKind::Environment, 0, d}; }

  std::string label() const;
  friend bool operator==(const HilbertFactor&, const HilbertFactor&) = default;
};

/// Ordered list of factors with row-major flattening: the last factor is the
/// fastest-varying index.
class CompositeSpace {
 public:
  CompositeSpace() = default;
  /// Throws std::invalid_argument on an empty list, a factor with dim < 2, a
  /// Schwinger site with dim != 2, or a total dimension that overflows.
  explicit CompositeSpace(std::vector<HilbertFactor> factors);

  std::size_t num_factors() const { return factors_.size(); }
  std::size_t total_dim() const { return total_dim_; }
  std::size_t dim(std::size_t factor) const { return factors_.at(factor).dim; }
  /// Distance in the flat index between neighbouring values of `factor`.
  std::size_t stride(std::size_t factor) const { return strides_.at(factor); }
  const HilbertFactor& factor(std::size_t i) const { return factors_.at(i); }
  const std::vector<HilbertFactor>& factors() const { return factors_; }

  std::size_t flat_index(std::span<const std::size_t> multi_index) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  std::optional<std::size_t> find(FactorKind kind, int site = 0) const;
  std::size_t index_of(FactorKind kind, int site = 0) const;

  /// Product of dims over factors [first, first + count).
  std::size_t range_dim(std::size_t first, std::size_t count) const;

  friend bool operator==(const CompositeSpace& a, const CompositeSpace& b) {
    return a.factors_ == b.factors_;
  }

 private:
  std::vector<HilbertFactor> factors_;
  std::vector<std::size_t> strides_;
  std::size_t total_dim_ = 0;
};

CompositeSpace compose_space(std::vector<HilbertFactor> factors);

class StateVector {
 public:
  StateVector() = default;
  StateVector(CompositeSpace space, Vector amplitudes);
  /// All-zero vector on `space`.
  explicit StateVector(CompositeSpace space);

  const CompositeSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amps_; }
  Vector& amplitudes() { return amps_; }
  std::size_t size() const { return static_cast<std::size_t>(amps_.size()); }

  double norm() const { return amps_.norm(); }
  /// Returns a unit-norm copy; throws std::domain_error for a zero vector.
  StateVector normalized() const;

 private:
  CompositeSpace space_;
  Vector amps_;
};

/// Kronecker product of per-factor states, in factor order.
StateVector product_state(const CompositeSpace& space, const std::vector<Vector>& locals);

/// A dense matrix acting on the contiguous factor range [first, first + count).
/// Usually count == 1; joint blocks (e.g. a two-particle potential) use more.
struct LocalOp {
  std::size_t first = 0;
  std::size_t count = 1;
  Matrix matrix;
};

struct Term {
  cplx coeff{1.0, 0.0};
  std::vector<LocalOp> ops;  // disjoint ranges, identity implied elsewhere
};

class OperatorExpr {
 public:
  OperatorExpr() = default;
  explicit OperatorExpr(CompositeSpace space, bool hermitian = true)
      : space_(std::move(space)), hermitian_(hermitian) {}

  /// Identity times `coeff`.
  static OperatorExpr identity(const CompositeSpace& space, cplx coeff = 1.0);
  /// `matrix` on one factor, identity elsewhere.
  static OperatorExpr local(const CompositeSpace& space, std::size_t factor, const Matrix& matrix,
                            cplx coeff = 1.0, bool hermitian = true);

  const CompositeSpace& space() const { return space_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool hermitian() const { return hermitian_; }
  void set_hermitian(bool h) { hermitian_ = h; }
  bool empty() const { return terms_.empty(); }

  /// Validates shapes and disjointness; ops are sorted by factor.
  OperatorExpr& add_term(cplx coeff, std::vector<LocalOp> ops);
  OperatorExpr& add_local(cplx coeff, std::size_t factor, const Matrix& matrix);

  OperatorExpr& operator+=(const OperatorExpr& other);
  OperatorExpr& operator*=(cplx s);
  friend OperatorExpr operator+(OperatorExpr a, const OperatorExpr& b) { return a += b; }
  friend OperatorExpr operator*(cplx s, OperatorExpr a) { return a *= s; }
  friend OperatorExpr operator*(double s, OperatorExpr a) { return a *= cplx(s); }

  /// Operator product; local matrices on shared factors are multiplied.
  /// Terms whose ranges overlap only partially are rejected.
  friend OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b);

  /// True when every local matrix of every term is diagonal.
  bool is_diagonal() const;

  /// Materializes the full matrix; throws when total_dim exceeds `max_dim`.
  Matrix to_dense(std::size_t max_dim = 4096) const;

 private:
  CompositeSpace space_;
  std::vector<Term> terms_;
  bool hermitian_ = true;
};

/// How CompiledOperator::apply runs.
///   MatrixFree: strided passes over the local matrices, O(dim) memory.
///   Assembled: one sparse matrix built from the same plan.
///   Auto: Assembled when the nonzero count stays below 5e7.
enum class ApplyStrategy { Auto, MatrixFree, Assembled };

/// Immutable execution plan for an OperatorExpr. Terms built only from
/// diagonal local matrices are folded into one diagonal; terms sharing the
/// same off-diagonal part are merged with a diagonal weight vector.
class CompiledOperator {
 public:
  CompiledOperator() = default;
  explicit CompiledOperator(const OperatorExpr& op, ApplyStrategy strategy = ApplyStrategy::Auto);

  const CompositeSpace& space() const { return space_; }
  bool hermitian() const { return hermitian_; }
  std::size_t num_groups() const { return groups_.size(); }
  bool assembled() const { return assembled_; }
  std::size_t nonzeros() const { return assembled_ ? static_cast<std::size_t>(sparse_.nonZeros()) : 0; }

  /// out = O * in. `in` and `out` must not alias. Safe to call concurrently.
  void apply(const Vector& in, Vector& out) const;
  Vector apply(const Vector& in) const;

 private:
  struct SparseLocal {
    std::size_t stride = 1;
    std::size_t dim = 1;
    std::vector<std::size_t> row, col;
    std::vector<cplx> val;
  };
  struct Group {
    std::vector<SparseLocal> ops;
    Vector weights;  // empty: uniform `scale`
    cplx scale{1.0, 0.0};
  };

  static void apply_local(const SparseLocal& op, const Vector& in, Vector& out);
  void apply_matrix_free(const Vector& in, Vector& out) const;
  void assemble();
  std::size_t estimate_nonzeros() const;

  CompositeSpace space_;
  bool hermitian_ = true;
  Vector diagonal_;
  bool has_diagonal_ = false;
  std::vector<Group> groups_;
  bool assembled_ = false;
  Eigen::SparseMatrix<cplx, Eigen::RowMajor, std::ptrdiff_t> sparse_;
};

StateVector apply(const OperatorExpr& op, const StateVector& psi);
StateVector apply(const CompiledOperator& op, const StateVector& psi);

cplx inner(const StateVector& phi, const StateVector& psi);

/// <psi|O|psi>. For Hermitian operators the imaginary part is checked against
/// `imag_tol` (relative to max(1, |re|)) and discarded; throws
/// std::runtime_error when it is exceeded.
double expectation(const OperatorExpr& op, const StateVector& psi, double imag_tol = 1e-10);
double expectation(const CompiledOperator& op, const StateVector& psi, double imag_tol = 1e-10);
cplx expectation_complex(const CompiledOperator& op, const StateVector& psi);

/// Pauli and ladder matrices with sigma_z|0> = +|0>, sigma_plus = |0><1|.
namespace pauli {
Matrix x();
Matrix y();
Matrix z();
Matrix plus();
Matrix minus();
Matrix id();
}  // namespace pauli

}  // namespace decoh
