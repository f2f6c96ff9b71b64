#include "hostcap/conic/program.hpp"

#include "hostcap/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace hostcap {

double AffineExpr::evaluate(const Vector& x) const {
  double value = constant;
  for (const auto& t : terms) value += t.coef * x[t.var];
  return value;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return *this;
}

AffineExpr AffineExpr::scaled(double factor) const {
  AffineExpr out = *this;
  for (auto& t : out.terms) t.coef *= factor;
  out.constant *= factor;
  return out;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) {
  a += b;
  return a;
}

AffineExpr operator-(AffineExpr a, const AffineExpr& b) {
  a += b.scaled(-1.0);
  return a;
}

SocBlock soc_rotated(const AffineExpr& z1, const AffineExpr& z2, const AffineExpr& Z1, const AffineExpr& Z2) {
  SocBlock block;
  block.scalar = z1 + z2;
  block.vec = {Z1.scaled(2.0), Z2.scaled(2.0), z1 - z2};
  return block;
}

bool soc_contains(double u0, const Vector& u1, double tol) { return u1.norm() <= u0 + tol; }

std::string_view to_string(RowClass cls) noexcept {
  switch (cls) {
    case RowClass::RealBalance: return "real_balance";
    case RowClass::ReactiveBalance: return "reactive_balance";
    case RowClass::VoltageDrop: return "voltage_drop";
    case RowClass::Substation: return "substation";
    case RowClass::BranchCone: return "branch_cone";
    case RowClass::UpperLink: return "upper_link";
    case RowClass::LowerLink: return "lower_link";
    case RowClass::FlowHinge: return "flow_hinge";
    case RowClass::UpperSlack: return "upper_slack";
    case RowClass::LowerSlack: return "lower_slack";
    case RowClass::FlowSlack: return "flow_slack";
    case RowClass::UpperCvar: return "upper_cvar";
    case RowClass::LowerCvar: return "lower_cvar";
    case RowClass::FlowCvar: return "flow_cvar";
    case RowClass::CapacityBox: return "capacity_box";
    case RowClass::Generic: return "generic";
  }
  return "unknown";
}

int ConicProgram::index(const std::string& name, int scenario, int i) const {
  const VariableBlock& b = block(name, scenario);
  require(i >= 0 && i < b.size, ErrorKind::InvalidArgument, "index outside block " + name);
  return b.offset + i;
}

const VariableBlock& ConicProgram::block(const std::string& name, int scenario) const {
  const auto it = block_index_.find({name, scenario});
  require(it != block_index_.end(), ErrorKind::InvalidArgument,
          "no variable block " + name + " for scenario " + std::to_string(scenario));
  return blocks_[it->second];
}

bool ConicProgram::has_block(const std::string& name, int scenario) const {
  return block_index_.contains({name, scenario});
}

ConicProgram ConicProgram::with_psi(const Vector& psi) const {
  require(psi.size() == psi_dimension(), ErrorKind::DimensionMismatch, "psi length does not match program");
  ConicProgram copy = *this;
  copy.psi_ = psi;
  copy.b_eq_ = C_psi_ * psi - E_psi_;
  return copy;
}

double ConicProgram::max_violation(const Vector& x) const {
  require(x.size() == n_, ErrorKind::DimensionMismatch, "point length does not match program");
  double worst = 0.0;
  if (equalities() > 0) worst = std::max(worst, (A_eq_ * x - b_eq_).lpNorm<Eigen::Infinity>());
  if (inequalities() > 0) worst = std::max(worst, (A_in_ * x - b_in_).maxCoeff());
  if (cones() > 0) {
    const Vector u = H_ * x + h_;
    for (std::size_t i = 0; i < cone_dims_.size(); ++i) {
      const int off = cone_offsets_[i];
      const int d = cone_dims_[i];
      worst = std::max(worst, u.segment(off + 1, d - 1).norm() - u[off]);
    }
  }
  return worst;
}

namespace {

void dump_matrix(std::ostream& out, const char* name, const SparseMatrix& m) {
  out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

void dump_vector(std::ostream& out, const char* name, const Vector& v) {
  out << "vector " << name << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

}  // namespace

void ConicProgram::write_dump(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "conic-program 1\n";
  out << "variables " << n_ << '\n';
  dump_vector(out, "c", c_);
  dump_matrix(out, "A_eq", A_eq_);
  dump_vector(out, "b_eq", b_eq_);
  dump_matrix(out, "A_in", A_in_);
  dump_vector(out, "b_in", b_in_);
  dump_matrix(out, "H", H_);
  dump_vector(out, "h", h_);
  out << "cones " << cone_dims_.size() << '\n';
  for (int d : cone_dims_) out << d << '\n';
  out.precision(old_precision);
}

// ---------------------------------------------------------------------------

ConicProgram::Builder::Builder(int psi_dimension) : psi_dim_(psi_dimension) {
  require(psi_dimension >= 0, ErrorKind::InvalidArgument, "negative psi dimension");
}

int ConicProgram::Builder::add_variables(const std::string& name, int size, int scenario) {
  require(size >= 0, ErrorKind::InvalidArgument, "negative block size");
  const int offset = n_;
  blocks_.push_back(VariableBlock{name, scenario, offset, size});
  n_ += size;
  return offset;
}

void ConicProgram::Builder::set_cost(int var, double coef) { costs_.emplace_back(var, coef); }

void ConicProgram::Builder::add_equality(const AffineExpr& expr, const RowTag& tag,
                                         const std::vector<AffineTerm>& psi_terms, double e_psi) {
  const int row = static_cast<int>(eq_e_.size());
  for (const auto& t : expr.terms) eq_.emplace_back(row, t.var, t.coef);
  for (const auto& t : psi_terms) {
    require(t.var >= 0 && t.var < psi_dim_, ErrorKind::InvalidArgument, "psi term outside psi dimension");
    eq_psi_.emplace_back(row, t.var, t.coef);
  }
  // expr.terms x + constant = C psi - e  <=>  terms x = C psi - (e + constant)
  eq_e_.push_back(e_psi + expr.constant);
  eq_tags_.push_back(tag);
}

void ConicProgram::Builder::add_inequality(const AffineExpr& expr, const RowTag& tag) {
  const int row = static_cast<int>(in_b_.size());
  for (const auto& t : expr.terms) in_.emplace_back(row, t.var, t.coef);
  in_b_.push_back(-expr.constant);
  in_tags_.push_back(tag);
}

void ConicProgram::Builder::add_cone(const SocBlock& cone, const RowTag& tag) {
  require(!cone.vec.empty(), ErrorKind::InvalidArgument, "cone needs a vector part of dimension >= 1");
  int row = static_cast<int>(cone_h_.size());
  auto push = [&](const AffineExpr& e) {
    for (const auto& t : e.terms) cone_.emplace_back(row, t.var, t.coef);
    cone_h_.push_back(e.constant);
    ++row;
  };
  push(cone.scalar);
  for (const auto& e : cone.vec) push(e);
  cone_dims_.push_back(static_cast<int>(cone.vec.size()) + 1);
  cone_tags_.push_back(tag);
}

ConicProgram ConicProgram::Builder::build(const Vector& psi) const {
  ConicProgram p;
  p.n_ = n_;
  p.c_ = Vector::Zero(n_);
  for (const auto& [var, coef] : costs_) p.c_[var] += coef;

  const auto rows_eq = static_cast<Eigen::Index>(eq_e_.size());
  p.A_eq_.resize(rows_eq, n_);
  p.A_eq_.setFromTriplets(eq_.begin(), eq_.end());
  p.C_psi_.resize(rows_eq, psi_dim_);
  p.C_psi_.setFromTriplets(eq_psi_.begin(), eq_psi_.end());
  p.E_psi_ = Eigen::Map<const Vector>(eq_e_.data(), rows_eq);

  const auto rows_in = static_cast<Eigen::Index>(in_b_.size());
  p.A_in_.resize(rows_in, n_);
  p.A_in_.setFromTriplets(in_.begin(), in_.end());
  p.b_in_ = Eigen::Map<const Vector>(in_b_.data(), rows_in);

  const auto rows_cone = static_cast<Eigen::Index>(cone_h_.size());
  p.H_.resize(rows_cone, n_);
  p.H_.setFromTriplets(cone_.begin(), cone_.end());
  p.h_ = Eigen::Map<const Vector>(cone_h_.data(), rows_cone);
  p.cone_dims_ = cone_dims_;
  int off = 0;
  for (int d : cone_dims_) {
    p.cone_offsets_.push_back(off);
    off += d;
  }

  p.eq_tags_ = eq_tags_;
  p.in_tags_ = in_tags_;
  p.cone_tags_ = cone_tags_;
  p.blocks_ = blocks_;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const bool fresh = p.block_index_.emplace(std::make_pair(blocks_[i].name, blocks_[i].scenario), i).second;
    require(fresh, ErrorKind::InvalidArgument, "duplicate variable block " + blocks_[i].name);
  }

  if (psi_dim_ > 0) {
    require(psi.size() == psi_dim_, ErrorKind::DimensionMismatch, "psi length does not match program");
    p.psi_ = psi;
    p.b_eq_ = p.C_psi_ * psi - p.E_psi_;
  } else {
    p.b_eq_ = -p.E_psi_;
  }
  return p;
}

}  // namespace hostcap
