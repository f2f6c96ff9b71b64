#pragma once

#include "hostcap/network.hpp"

#include <iosfwd>
#include <string_view>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hostcap {

struct AffineTerm {
  int var = 0;
  double coef = 0.0;
};

/// Sparse affine functional  sum(coef * x[var]) + constant.
struct AffineExpr {
  std::vector<AffineTerm> terms;
  double constant = 0.0;

  AffineExpr() = default;
  AffineExpr(std::vector<AffineTerm> t, double c = 0.0) : terms(std::move(t)), constant(c) {}
  static AffineExpr constant_value(double c) { return AffineExpr({}, c); }

  [[nodiscard]] double evaluate(const Vector& x) const;
  AffineExpr& operator+=(const AffineExpr& other);
  [[nodiscard]] AffineExpr scaled(double factor) const;
};

[[nodiscard]] AffineExpr operator+(AffineExpr a, const AffineExpr& b);
[[nodiscard]] AffineExpr operator-(AffineExpr a, const AffineExpr& b);

/// Second-order cone constraint  || vec(x) || <= scalar(x).
struct SocBlock {
  AffineExpr scalar;
  std::vector<AffineExpr> vec;
};

/// Rotated cone  z1*z2 >= Z1^2 + Z2^2, z1 + z2 >= 0  as a standard cone:
/// ((2 Z1, 2 Z2, z1 - z2), z1 + z2).
[[nodiscard]] SocBlock soc_rotated(const AffineExpr& z1, const AffineExpr& z2, const AffineExpr& Z1,
                                   const AffineExpr& Z2);

/// True when the constant block (u0; u1) satisfies ||u1|| <= u0 + tol.
[[nodiscard]] bool soc_contains(double u0, const Vector& u1, double tol = 0.0);

enum class RowClass {
  RealBalance,
  ReactiveBalance,
  VoltageDrop,
  Substation,
  BranchCone,
  UpperLink,
  LowerLink,
  FlowHinge,
  UpperSlack,
  LowerSlack,
  FlowSlack,
  UpperCvar,
  LowerCvar,
  FlowCvar,
  CapacityBox,
  Generic,
};

[[nodiscard]] std::string_view to_string(RowClass cls) noexcept;

/// Which model constraint a program row came from. scenario is -1 for
/// scenario-independent rows.
struct RowTag {
  RowClass cls = RowClass::Generic;
  int scenario = -1;
  int index = 0;
};

struct VariableBlock {
  std::string name;
  int scenario = -1;
  int offset = 0;
  int size = 0;
};

/// Cone program
///
///   minimize    c'x
///   subject to  A_eq x = C_psi psi - E_psi      (equalities)
///               A_in x <= b_in                  (orthant)
///               H_i x + h_i in SOC_i            (scalar entry first)
///
/// The equality right-hand side is kept split into its psi-dependent part
/// so certificates can be turned into affine cuts in psi.
class ConicProgram {
 public:
  class Builder;

  [[nodiscard]] int variables() const noexcept { return n_; }
  [[nodiscard]] int equalities() const noexcept { return static_cast<int>(b_eq_.size()); }
  [[nodiscard]] int inequalities() const noexcept { return static_cast<int>(b_in_.size()); }
  [[nodiscard]] int cones() const noexcept { return static_cast<int>(cone_dims_.size()); }
  [[nodiscard]] int psi_dimension() const noexcept { return static_cast<int>(C_psi_.cols()); }

  [[nodiscard]] const Vector& c() const noexcept { return c_; }
  [[nodiscard]] const SparseMatrix& A_eq() const noexcept { return A_eq_; }
  [[nodiscard]] const Vector& b_eq() const noexcept { return b_eq_; }
  [[nodiscard]] const SparseMatrix& C_psi() const noexcept { return C_psi_; }
  [[nodiscard]] const Vector& E_psi() const noexcept { return E_psi_; }
  [[nodiscard]] const SparseMatrix& A_in() const noexcept { return A_in_; }
  [[nodiscard]] const Vector& b_in() const noexcept { return b_in_; }
  /// Stacked cone rows H and offsets h; cone i occupies rows
  /// cone_offsets()[i] .. + cone_dims()[i].
  [[nodiscard]] const SparseMatrix& H() const noexcept { return H_; }
  [[nodiscard]] const Vector& h() const noexcept { return h_; }
  [[nodiscard]] const std::vector<int>& cone_dims() const noexcept { return cone_dims_; }
  [[nodiscard]] const std::vector<int>& cone_offsets() const noexcept { return cone_offsets_; }
  [[nodiscard]] int cone_rows() const noexcept { return static_cast<int>(h_.size()); }

  [[nodiscard]] const std::vector<RowTag>& equality_tags() const noexcept { return eq_tags_; }
  [[nodiscard]] const std::vector<RowTag>& inequality_tags() const noexcept { return in_tags_; }
  [[nodiscard]] const std::vector<RowTag>& cone_tags() const noexcept { return cone_tags_; }
  [[nodiscard]] const std::vector<VariableBlock>& blocks() const noexcept { return blocks_; }

  /// Coordinate of entry i of the named block (scenario -1 for global blocks).
  [[nodiscard]] int index(const std::string& name, int scenario, int i) const;
  [[nodiscard]] const VariableBlock& block(const std::string& name, int scenario) const;
  [[nodiscard]] bool has_block(const std::string& name, int scenario) const;

  /// The psi at which the equality right-hand side was evaluated (empty when
  /// the program has no psi-dependent rows).
  [[nodiscard]] const Vector& psi() const noexcept { return psi_; }

  /// Same program with the right-hand side re-evaluated at another psi.
  [[nodiscard]] ConicProgram with_psi(const Vector& psi) const;

  /// Largest violation of any constraint at x (equalities in absolute value,
  /// inequality excess, cone deficit).
  [[nodiscard]] double max_violation(const Vector& x) const;

  /// Documented sparse text dump: one section per block, triplets 0-based.
  void write_dump(std::ostream& out) const;

 private:
  int n_ = 0;
  Vector c_;
  SparseMatrix A_eq_, C_psi_, A_in_, H_;
  Vector b_eq_, E_psi_, b_in_, h_;
  std::vector<int> cone_dims_, cone_offsets_;
  std::vector<RowTag> eq_tags_, in_tags_, cone_tags_;
  std::vector<VariableBlock> blocks_;
  std::map<std::pair<std::string, int>, std::size_t> block_index_;
  Vector psi_;
};

class ConicProgram::Builder {
 public:
  /// psi_dimension > 0 enables psi-dependent equality right-hand sides.
  explicit Builder(int psi_dimension = 0);

  int add_variables(const std::string& name, int size, int scenario = -1);
  void set_cost(int var, double coef);

  /// expr(x) = sum(psi_terms * psi) - e_psi.  psi_terms index into psi.
  void add_equality(const AffineExpr& expr, const RowTag& tag, const std::vector<AffineTerm>& psi_terms = {},
                    double e_psi = 0.0);
  /// expr(x) <= 0.
  void add_inequality(const AffineExpr& expr, const RowTag& tag);
  void add_cone(const SocBlock& cone, const RowTag& tag);

  [[nodiscard]] int variables() const noexcept { return n_; }

  /// psi is required (length psi_dimension) when the builder was created
  /// with psi_dimension > 0.
  [[nodiscard]] ConicProgram build(const Vector& psi = {}) const;

 private:
  using Triplet = Eigen::Triplet<double>;
  int n_ = 0;
  int psi_dim_ = 0;
  std::vector<std::pair<int, double>> costs_;
  std::vector<Triplet> eq_, eq_psi_, in_, cone_;
  std::vector<double> eq_e_, in_b_, cone_h_;
  std::vector<int> cone_dims_;
  std::vector<RowTag> eq_tags_, in_tags_, cone_tags_;
  std::vector<VariableBlock> blocks_;
};

}  // namespace hostcap
