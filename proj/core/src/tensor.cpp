#include "decoh/tensor.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace decoh {

namespace {

bool is_diagonal_matrix(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != cplx(0.0)) return false;
  return true;
}

bool same_op(const LocalOp& a, const LocalOp& b) {
  return a.first == b.first && a.count == b.count && a.matrix.rows() == b.matrix.rows() &&
         a.matrix == b.matrix;
}

}  // namespace

std::string HilbertFactor::label() const {
  switch (kind) {
    case FactorKind::SchwingerSite:
      return "S" + std::to_string(site);
    case FactorKind::Apparatus:
      return "A";
    case FactorKind::Environment:
      return "E";
  }
  return "?";
}

CompositeSpace::CompositeSpace(std::vector<HilbertFactor> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw std::invalid_argument("compose_space: empty factor list");
  std::size_t total = 1;
  for (const auto& f : factors_) {
    if (f.dim < 2)
      throw std::invalid_argument("compose_space: factor " + f.label() + " has dim < 2");
    if (f.kind == FactorKind::SchwingerSite && f.dim != 2)
      throw std::invalid_argument("compose_space: Schwinger site " + f.label() + " must have dim 2");
    if (total > std::numeric_limits<std::size_t>::max() / f.dim)
      throw std::overflow_error("compose_space: total dimension overflows the index type");
    total *= f.dim;
  }
  // Amplitude storage is indexed with Eigen::Index.
  if (total > static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max()))
    throw std::overflow_error("compose_space: total dimension overflows the index type");
  total_dim_ = total;
  strides_.resize(factors_.size());
  std::size_t s = 1;
  for (std::size_t i = factors_.size(); i-- > 0;) {
    strides_[i] = s;
    s *= factors_[i].dim;
  }
}

CompositeSpace compose_space(std::vector<HilbertFactor> factors) {
  return CompositeSpace(std::move(factors));
}

std::size_t CompositeSpace::flat_index(std::span<const std::size_t> multi_index) const {
  if (multi_index.size() != factors_.size())
    throw std::invalid_argument("flat_index: expected " + std::to_string(factors_.size()) +
                                " components");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (multi_index[i] >= factors_[i].dim)
      throw std::out_of_range("flat_index: component " + std::to_string(i) + " out of range");
    flat += multi_index[i] * strides_[i];
  }
  return flat;
}

std::vector<std::size_t> CompositeSpace::unflatten(std::size_t flat) const {
  if (flat >= total_dim_) throw std::out_of_range("unflatten: index out of range");
  std::vector<std::size_t> m(factors_.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    m[i] = flat / strides_[i];
    flat %= strides_[i];
  }
  return m;
}

std::optional<std::size_t> CompositeSpace::find(FactorKind kind, int site) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].kind != kind) continue;
    if (kind == FactorKind::SchwingerSite && factors_[i].site != site) continue;
    return i;
  }
  return std::nullopt;
}

std::size_t CompositeSpace::index_of(FactorKind kind, int site) const {
  auto i = find(kind, site);
  if (!i) {
    HilbertFactor f{kind, site, 2};
    throw std::invalid_argument("space has no factor " + f.label());
  }
  return *i;
}

std::size_t CompositeSpace::range_dim(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > factors_.size())
    throw std::out_of_range("range_dim: factor range out of bounds");
  std::size_t d = 1;
  for (std::size_t i = first; i < first + count; ++i) d *= factors_[i].dim;
  return d;
}

// ---------------------------------------------------------------------------

StateVector::StateVector(CompositeSpace space, Vector amplitudes)
    : space_(std::move(space)), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != space_.total_dim())
    throw std::invalid_argument("StateVector: amplitude count does not match space dimension");
}

StateVector::StateVector(CompositeSpace space)
    : space_(std::move(space)), amps_(Vector::Zero(static_cast<Eigen::Index>(space_.total_dim()))) {}

StateVector StateVector::normalized() const {
  const double n = amps_.norm();
  if (!(n > 0.0)) throw std::domain_error("cannot normalize a zero vector");
  return StateVector(space_, amps_ / n);
}

StateVector product_state(const CompositeSpace& space, const std::vector<Vector>& locals) {
  if (locals.size() != space.num_factors())
    throw std::invalid_argument("product_state: one local vector per factor required");
  Vector acc = Vector::Ones(1);
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (static_cast<std::size_t>(locals[i].size()) != space.dim(i))
      throw std::invalid_argument("product_state: local vector " + std::to_string(i) +
                                  " has wrong dimension");
    Vector next = Eigen::kroneckerProduct(acc, locals[i]).eval();
    acc = std::move(next);
  }
  return StateVector(space, std::move(acc));
}

// ---------------------------------------------------------------------------

OperatorExpr OperatorExpr::identity(const CompositeSpace& space, cplx coeff) {
  OperatorExpr op(space, coeff.imag() == 0.0);
  op.add_term(coeff, {});
  return op;
}

OperatorExpr OperatorExpr::local(const CompositeSpace& space, std::size_t factor,
                                 const Matrix& matrix, cplx coeff, bool hermitian) {
  OperatorExpr op(space, hermitian);
  op.add_local(coeff, factor, matrix);
  return op;
}

OperatorExpr& OperatorExpr::add_term(cplx coeff, std::vector<LocalOp> ops) {
  std::sort(ops.begin(), ops.end(),
            [](const LocalOp& a, const LocalOp& b) { return a.first < b.first; });
  std::size_t next_free = 0;
  for (const auto& op : ops) {
    if (op.first < next_free)
      throw std::invalid_argument("add_term: local operators act on overlapping factors");
    const std::size_t d = space_.range_dim(op.first, op.count);
    if (static_cast<std::size_t>(op.matrix.rows()) != d ||
        static_cast<std::size_t>(op.matrix.cols()) != d)
      throw std::invalid_argument("add_term: local matrix shape does not match factor dims");
    next_free = op.first + op.count;
  }
  terms_.push_back({coeff, std::move(ops)});
  return *this;
}

OperatorExpr& OperatorExpr::add_local(cplx coeff, std::size_t factor, const Matrix& matrix) {
  return add_term(coeff, {LocalOp{factor, 1, matrix}});
}

OperatorExpr& OperatorExpr::operator+=(const OperatorExpr& other) {
  if (terms_.empty() && space_.num_factors() == 0) {
    *this = other;
    return *this;
  }
  if (!(space_ == other.space_)) throw std::invalid_argument("operator+: space mismatch");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  hermitian_ = hermitian_ && other.hermitian_;
  return *this;
}

OperatorExpr& OperatorExpr::operator*=(cplx s) {
  for (auto& t : terms_) t.coeff *= s;
  if (s.imag() != 0.0) hermitian_ = false;
  return *this;
}

OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b) {
  if (!(a.space_ == b.space_)) throw std::invalid_argument("operator*: space mismatch");
  OperatorExpr out(a.space_, false);
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      std::vector<LocalOp> ops;
      std::vector<bool> used_b(tb.ops.size(), false);
      for (const auto& oa : ta.ops) {
        LocalOp merged = oa;
        for (std::size_t j = 0; j < tb.ops.size(); ++j) {
          const auto& ob = tb.ops[j];
          const bool disjoint = ob.first + ob.count <= oa.first || oa.first + oa.count <= ob.first;
          if (disjoint) continue;
          if (ob.first != oa.first || ob.count != oa.count)
            throw std::invalid_argument("operator*: partially overlapping local ranges");
          merged.matrix = oa.matrix * ob.matrix;
          used_b[j] = true;
        }
        ops.push_back(std::move(merged));
      }
      for (std::size_t j = 0; j < tb.ops.size(); ++j)
        if (!used_b[j]) ops.push_back(tb.ops[j]);
      out.add_term(ta.coeff * tb.coeff, std::move(ops));
    }
  }
  return out;
}

bool OperatorExpr::is_diagonal() const {
  for (const auto& t : terms_)
    for (const auto& op : t.ops)
      if (!is_diagonal_matrix(op.matrix)) return false;
  return true;
}

Matrix OperatorExpr::to_dense(std::size_t max_dim) const {
  const std::size_t n = space_.total_dim();
  if (n > max_dim)
    throw std::length_error("to_dense: dimension " + std::to_string(n) + " exceeds limit " +
                            std::to_string(max_dim));
  const auto N = static_cast<Eigen::Index>(n);
  Matrix dense = Matrix::Zero(N, N);
  for (const auto& t : terms_) {
    Matrix acc = Matrix::Ones(1, 1);
    std::size_t f = 0;
    auto op = t.ops.begin();
    while (f < space_.num_factors()) {
      Matrix block;
      if (op != t.ops.end() && op->first == f) {
        block = op->matrix;
        f += op->count;
        ++op;
      } else {
        const auto d = static_cast<Eigen::Index>(space_.dim(f));
        block = Matrix::Identity(d, d);
        ++f;
      }
      Matrix next = Eigen::kroneckerProduct(acc, block).eval();
      acc = std::move(next);
    }
    dense += t.coeff * acc;
  }
  return dense;
}

// ---------------------------------------------------------------------------

CompiledOperator::CompiledOperator(const OperatorExpr& op, ApplyStrategy strategy)
    : space_(op.space()), hermitian_(op.hermitian()) {
  const auto n = static_cast<Eigen::Index>(space_.total_dim());

  // Full-length diagonal of the product of a term's diagonal local ops.
  auto diagonal_weights = [&](const Term& t, const std::vector<const LocalOp*>& diag_ops) {
    Vector w = Vector::Constant(n, t.coeff);
    for (const LocalOp* d : diag_ops) {
      const std::size_t stride = space_.stride(d->first + d->count - 1);
      const std::size_t dim = static_cast<std::size_t>(d->matrix.rows());
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t local = (static_cast<std::size_t>(i) / stride) % dim;
        w[i] *= d->matrix(static_cast<Eigen::Index>(local), static_cast<Eigen::Index>(local));
      }
    }
    return w;
  };

  struct Pending {
    std::vector<LocalOp> offdiag;
    Vector weights;
    cplx scale{0.0};
    bool weighted = false;
  };
  std::vector<Pending> pending;

  for (const auto& t : op.terms()) {
    if (t.coeff == cplx(0.0)) continue;
    std::vector<const LocalOp*> diag_ops;
    std::vector<LocalOp> offdiag;
    for (const auto& lo : t.ops) {
      if (is_diagonal_matrix(lo.matrix))
        diag_ops.push_back(&lo);
      else
        offdiag.push_back(lo);
    }
    if (offdiag.empty()) {
      if (!has_diagonal_) {
        diagonal_ = Vector::Zero(n);
        has_diagonal_ = true;
      }
      if (diag_ops.empty())
        diagonal_.array() += t.coeff;
      else
        diagonal_ += diagonal_weights(t, diag_ops);
      continue;
    }
    auto match = std::find_if(pending.begin(), pending.end(), [&](const Pending& p) {
      if (p.offdiag.size() != offdiag.size()) return false;
      for (std::size_t k = 0; k < offdiag.size(); ++k)
        if (!same_op(p.offdiag[k], offdiag[k])) return false;
      return true;
    });
    if (match == pending.end()) {
      pending.push_back({std::move(offdiag), Vector(), cplx(0.0), false});
      match = std::prev(pending.end());
    }
    if (diag_ops.empty() && !match->weighted) {
      match->scale += t.coeff;
    } else {
      if (!match->weighted) {
        match->weights = Vector::Constant(n, match->scale);
        match->weighted = true;
      }
      match->weights += diagonal_weights(t, diag_ops);
    }
  }

  for (auto& p : pending) {
    Group g;
    for (const auto& lo : p.offdiag) {
      SparseLocal s;
      s.stride = space_.stride(lo.first + lo.count - 1);
      s.dim = static_cast<std::size_t>(lo.matrix.rows());
      for (Eigen::Index c = 0; c < lo.matrix.cols(); ++c)
        for (Eigen::Index r = 0; r < lo.matrix.rows(); ++r)
          if (lo.matrix(r, c) != cplx(0.0)) {
            s.row.push_back(static_cast<std::size_t>(r));
            s.col.push_back(static_cast<std::size_t>(c));
            s.val.push_back(lo.matrix(r, c));
          }
      g.ops.push_back(std::move(s));
    }
    if (p.weighted)
      g.weights = std::move(p.weights);
    else
      g.scale = p.scale;
    groups_.push_back(std::move(g));
  }

  if (strategy == ApplyStrategy::Assembled ||
      (strategy == ApplyStrategy::Auto && estimate_nonzeros() <= 50'000'000))
    assemble();
}

std::size_t CompiledOperator::estimate_nonzeros() const {
  const std::size_t n = space_.total_dim();
  double per_col = has_diagonal_ ? 1.0 : 0.0;
  for (const auto& g : groups_) {
    double c = 1.0;
    for (const auto& lo : g.ops) c *= static_cast<double>(lo.val.size()) / static_cast<double>(lo.dim);
    per_col += c;
  }
  return static_cast<std::size_t>(per_col * static_cast<double>(n)) + 1;
}

void CompiledOperator::assemble() {
  using Index = std::ptrdiff_t;
  const std::size_t n = space_.total_dim();
  std::vector<Eigen::Triplet<cplx, Index>> trip;
  trip.reserve(estimate_nonzeros());
  if (has_diagonal_)
    for (std::size_t i = 0; i < n; ++i)
      if (diagonal_[static_cast<Eigen::Index>(i)] != cplx(0.0))
        trip.emplace_back(static_cast<Index>(i), static_cast<Index>(i), diagonal_[static_cast<Eigen::Index>(i)]);

  std::vector<std::pair<std::size_t, cplx>> cur, next;
  for (const auto& g : groups_) {
    // per local op: nonzeros grouped by column
    std::vector<std::vector<std::vector<std::size_t>>> by_col(g.ops.size());
    for (std::size_t k = 0; k < g.ops.size(); ++k) {
      by_col[k].resize(g.ops[k].dim);
      for (std::size_t e = 0; e < g.ops[k].val.size(); ++e) by_col[k][g.ops[k].col[e]].push_back(e);
    }
    for (std::size_t col = 0; col < n; ++col) {
      cur.assign(1, {col, cplx(1.0)});
      for (std::size_t k = 0; k < g.ops.size() && !cur.empty(); ++k) {
        const auto& lo = g.ops[k];
        next.clear();
        for (const auto& [idx, c] : cur) {
          const std::size_t digit = (idx / lo.stride) % lo.dim;
          for (std::size_t e : by_col[k][digit])
            next.emplace_back(idx + (lo.row[e] - digit) * lo.stride, c * lo.val[e]);
        }
        cur.swap(next);
      }
      for (const auto& [row, c] : cur) {
        const cplx w = g.weights.size() != 0 ? g.weights[static_cast<Eigen::Index>(row)] : g.scale;
        if (w * c != cplx(0.0)) trip.emplace_back(static_cast<Index>(row), static_cast<Index>(col), w * c);
      }
    }
  }
  sparse_.resize(static_cast<Index>(n), static_cast<Index>(n));
  sparse_.setFromTriplets(trip.begin(), trip.end());
  sparse_.makeCompressed();
  assembled_ = true;
}

void CompiledOperator::apply_local(const SparseLocal& op, const Vector& in, Vector& out) {
  const std::size_t n = static_cast<std::size_t>(in.size());
  const std::size_t block = op.dim * op.stride;
  out.setZero();
  const cplx* src = in.data();
  cplx* dst = out.data();
  for (std::size_t base = 0; base < n; base += block) {
    for (std::size_t k = 0; k < op.val.size(); ++k) {
      const cplx v = op.val[k];
      cplx* o = dst + base + op.row[k] * op.stride;
      const cplx* s = src + base + op.col[k] * op.stride;
      for (std::size_t t = 0; t < op.stride; ++t) o[t] += v * s[t];
    }
  }
}

void CompiledOperator::apply(const Vector& in, Vector& out) const {
  const auto n = static_cast<Eigen::Index>(space_.total_dim());
  if (in.size() != n) throw std::invalid_argument("apply: vector size does not match operator space");
  if (out.size() != n) out.resize(n);
  if (assembled_) {
    out.noalias() = sparse_ * in;
    return;
  }
  apply_matrix_free(in, out);
}

void CompiledOperator::apply_matrix_free(const Vector& in, Vector& out) const {
  const auto n = static_cast<Eigen::Index>(space_.total_dim());
  if (has_diagonal_)
    out = diagonal_.cwiseProduct(in);
  else
    out.setZero();

  thread_local Vector scratch_a, scratch_b;
  if (scratch_a.size() != n) scratch_a.resize(n);
  if (scratch_b.size() != n) scratch_b.resize(n);

  for (const auto& g : groups_) {
    const Vector* cur = &in;
    Vector* bufs[2] = {&scratch_a, &scratch_b};
    int which = 0;
    for (const auto& lo : g.ops) {
      apply_local(lo, *cur, *bufs[which]);
      cur = bufs[which];
      which ^= 1;
    }
    if (g.weights.size() != 0)
      out += g.weights.cwiseProduct(*cur);
    else
      out += g.scale * (*cur);
  }
}

Vector CompiledOperator::apply(const Vector& in) const {
  Vector out;
  apply(in, out);
  return out;
}

StateVector apply(const CompiledOperator& op, const StateVector& psi) {
  if (!(op.space() == psi.space())) throw std::invalid_argument("apply: space mismatch");
  return StateVector(psi.space(), op.apply(psi.amplitudes()));
}

StateVector apply(const OperatorExpr& op, const StateVector& psi) {
  if (!(op.space() == psi.space())) throw std::invalid_argument("apply: space mismatch");
  return apply(CompiledOperator(op), psi);
}

cplx inner(const StateVector& phi, const StateVector& psi) {
  if (!(phi.space() == psi.space())) throw std::invalid_argument("inner: space mismatch");
  return phi.amplitudes().dot(psi.amplitudes());
}

cplx expectation_complex(const CompiledOperator& op, const StateVector& psi) {
  if (!(op.space() == psi.space())) throw std::invalid_argument("expectation: space mismatch");
  return psi.amplitudes().dot(op.apply(psi.amplitudes()));
}

double expectation(const CompiledOperator& op, const StateVector& psi, double imag_tol) {
  const cplx e = expectation_complex(op, psi);
  if (op.hermitian() && std::abs(e.imag()) > imag_tol * std::max(1.0, std::abs(e.real())))
    throw std::runtime_error("expectation: imaginary part " + std::to_string(e.imag()) +
                             " on a Hermitian operator");
  return e.real();
}

double expectation(const OperatorExpr& op, const StateVector& psi, double imag_tol) {
  return expectation(CompiledOperator(op), psi, imag_tol);
}

namespace pauli {
Matrix x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Matrix y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
Matrix z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
Matrix plus() {
  Matrix m(2, 2);
  m << 0, 1, 0, 0;
  return m;
}
Matrix minus() {
  Matrix m(2, 2);
  m << 0, 0, 1, 0;
  return m;
}
Matrix id() { return Matrix::Identity(2, 2); }
}  // namespace pauli

}  // namespace decoh
