#include "hostcap/conic/solver.hpp"

#include "hostcap/error.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hostcap {

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::InfeasibleNoCertificate: return "InfeasibleNoCertificate";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

double Certificate::inf_norm() const {
  double v = 0.0;
  if (lambda.size() > 0) v = std::max(v, lambda.lpNorm<Eigen::Infinity>());
  if (mu.size() > 0) v = std::max(v, mu.lpNorm<Eigen::Infinity>());
  if (cone.size() > 0) v = std::max(v, cone.lpNorm<Eigen::Infinity>());
  return v;
}

Certificate Certificate::scaled(double factor) const { return Certificate{lambda * factor, mu * factor, cone * factor}; }

double dual_objective(const Certificate& cert, const ConicProgram& program, const Vector& psi) {
  require(cert.lambda.size() == program.equalities() && cert.mu.size() == program.inequalities() &&
              cert.cone.size() == program.cone_rows(),
          ErrorKind::DimensionMismatch, "certificate does not match program");
  require(psi.size() == program.psi_dimension(), ErrorKind::DimensionMismatch, "psi length does not match program");
  Vector rhs = -program.E_psi();
  if (program.psi_dimension() > 0) rhs += program.C_psi() * psi;
  return rhs.dot(cert.lambda) - program.b_in().dot(cert.mu) - program.h().dot(cert.cone);
}

double stationarity_residual(const Certificate& cert, const ConicProgram& program) {
  Vector r = Vector::Zero(program.variables());
  if (program.inequalities() > 0) r += program.A_in().transpose() * cert.mu;
  if (program.equalities() > 0) r -= program.A_eq().transpose() * cert.lambda;
  if (program.cone_rows() > 0) r -= program.H().transpose() * cert.cone;
  return r.size() > 0 ? r.lpNorm<Eigen::Infinity>() : 0.0;
}

double dual_cone_violation(const Certificate& cert, const ConicProgram& program) {
  double worst = 0.0;
  if (cert.mu.size() > 0) worst = std::max(worst, -cert.mu.minCoeff());
  for (int i = 0; i < program.cones(); ++i) {
    const int off = program.cone_offsets()[static_cast<std::size_t>(i)];
    const int d = program.cone_dims()[static_cast<std::size_t>(i)];
    worst = std::max(worst, cert.cone.segment(off + 1, d - 1).norm() - cert.cone[off]);
  }
  return worst;
}

namespace {

constexpr double kStepMin = 1e-8;
constexpr double kStepMax = 0.999;
constexpr double kStepFraction = 0.99;
constexpr double kSigmaMin = 1e-4;
constexpr double kSigmaMax = 1.0;

struct ConeLayout {
  int nlin = 0;
  std::vector<int> dims;
  std::vector<int> offs;  // offsets into the full cone vector
  int size = 0;
  [[nodiscard]] int degree() const { return nlin + static_cast<int>(dims.size()); }
};

// Nesterov-Todd scaling for the product cone.
struct Scaling {
  Vector lin_w;
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::MatrixXd> W2;
  Vector lambda;

  void apply(const ConeLayout& k, const Vector& v, Vector& out) const {
    out.resize(v.size());
    out.head(k.nlin) = lin_w.cwiseProduct(v.head(k.nlin));
    for (std::size_t i = 0; i < k.dims.size(); ++i) {
      out.segment(k.offs[i], k.dims[i]).noalias() = W[i] * v.segment(k.offs[i], k.dims[i]);
    }
  }

  void apply_squared(const ConeLayout& k, const Vector& v, Vector& out) const {
    out.resize(v.size());
    out.head(k.nlin) = lin_w.cwiseAbs2().cwiseProduct(v.head(k.nlin));
    for (std::size_t i = 0; i < k.dims.size(); ++i) {
      out.segment(k.offs[i], k.dims[i]).noalias() = W2[i] * v.segment(k.offs[i], k.dims[i]);
    }
  }
};

bool update_scaling(const ConeLayout& k, const Vector& s, const Vector& z, Scaling& sc) {
  sc.lin_w.resize(k.nlin);
  sc.lambda.resize(k.size);
  for (int i = 0; i < k.nlin; ++i) {
    if (!(s[i] > 0.0) || !(z[i] > 0.0)) return false;
    sc.lin_w[i] = std::sqrt(s[i] / z[i]);
    sc.lambda[i] = std::sqrt(s[i] * z[i]);
  }
  sc.W.resize(k.dims.size());
  sc.W2.resize(k.dims.size());
  for (std::size_t c = 0; c < k.dims.size(); ++c) {
    const int off = k.offs[c];
    const int d = k.dims[c];
    const auto sk = s.segment(off, d);
    const auto zk = z.segment(off, d);
    const double sres = sk[0] * sk[0] - sk.tail(d - 1).squaredNorm();
    const double zres = zk[0] * zk[0] - zk.tail(d - 1).squaredNorm();
    if (!(sres > 0.0) || !(zres > 0.0) || !(sk[0] > 0.0) || !(zk[0] > 0.0)) return false;
    const double snorm = std::sqrt(sres);
    const double znorm = std::sqrt(zres);
    const Vector sbar = sk / snorm;
    const Vector zbar = zk / znorm;
    const double eta = std::sqrt(snorm / znorm);
    const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    const double a = (sbar[0] + zbar[0]) / (2.0 * gamma);
    const Vector q = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2.0 * gamma);
    Eigen::MatrixXd W(d, d);
    W(0, 0) = a;
    W.block(0, 1, 1, d - 1) = q.transpose();
    W.block(1, 0, d - 1, 1) = q;
    W.block(1, 1, d - 1, d - 1) = Eigen::MatrixXd::Identity(d - 1, d - 1) + q * q.transpose() / (1.0 + a);
    W *= eta;
    sc.W[c] = W;
    sc.W2[c] = W * W;
    sc.lambda.segment(off, d) = W * zk;
  }
  return true;
}

// u o v
Vector conic_product(const ConeLayout& k, const Vector& u, const Vector& v) {
  Vector w(u.size());
  w.head(k.nlin) = u.head(k.nlin).cwiseProduct(v.head(k.nlin));
  for (std::size_t c = 0; c < k.dims.size(); ++c) {
    const int off = k.offs[c];
    const int d = k.dims[c];
    w[off] = u.segment(off, d).dot(v.segment(off, d));
    w.segment(off + 1, d - 1) = u[off] * v.segment(off + 1, d - 1) + v[off] * u.segment(off + 1, d - 1);
  }
  return w;
}

// v = u \ w
Vector conic_division(const ConeLayout& k, const Vector& u, const Vector& w) {
  Vector v(u.size());
  v.head(k.nlin) = w.head(k.nlin).cwiseQuotient(u.head(k.nlin));
  for (std::size_t c = 0; c < k.dims.size(); ++c) {
    const int off = k.offs[c];
    const int d = k.dims[c];
    const double u0 = u[off];
    const double w0 = w[off];
    const auto u1 = u.segment(off + 1, d - 1);
    const auto w1 = w.segment(off + 1, d - 1);
    const double rho = u0 * u0 - u1.squaredNorm();
    const double zeta = u1.dot(w1);
    v[off] = (u0 * w0 - zeta) / rho;
    v.segment(off + 1, d - 1) = ((zeta / u0 - w0) / rho) * u1 + w1 / u0;
  }
  return v;
}

void bring_to_cone(const ConeLayout& k, const Vector& r, Vector& s) {
  double alpha = -0.99;
  for (int i = 0; i < k.nlin; ++i) {
    if (r[i] <= 0.0) alpha = std::max(alpha, -r[i]);
  }
  for (std::size_t c = 0; c < k.dims.size(); ++c) {
    const int off = k.offs[c];
    const double cres = r[off] - r.segment(off + 1, k.dims[c] - 1).norm();
    if (cres <= 0.0) alpha = std::max(alpha, -cres);
  }
  alpha += 1.0;
  s = r;
  s.head(k.nlin).array() += alpha;
  for (std::size_t c = 0; c < k.dims.size(); ++c) s[k.offs[c]] += alpha;
}

double line_search(const ConeLayout& k, const Vector& lambda, const Vector& ds, const Vector& dz, double tau,
                   double dtau, double kap, double dkap) {
  double alpha = 1.0 / kStepMin;
  for (int i = 0; i < k.nlin; ++i) {
    const double rs = ds[i] / lambda[i];
    const double rz = dz[i] / lambda[i];
    if (rs < 0.0) alpha = std::min(alpha, -1.0 / rs);
    if (rz < 0.0) alpha = std::min(alpha, -1.0 / rz);
  }
  if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
  if (dkap < 0.0) alpha = std::min(alpha, -kap / dkap);

  for (std::size_t c = 0; c < k.dims.size(); ++c) {
    const int off = k.offs[c];
    const int d = k.dims[c];
    const auto lk = lambda.segment(off, d);
    const double lnorm2 = lk[0] * lk[0] - lk.tail(d - 1).squaredNorm();
    if (lnorm2 <= 0.0) continue;
    const double lnorm = std::sqrt(lnorm2);
    const Vector lbar = lk / lnorm;
    auto bound = [&](const auto& dv) {
      const double ldv = lbar[0] * dv[0] - lbar.tail(d - 1).dot(dv.tail(d - 1));
      const double factor = (ldv + dv[0]) / (lbar[0] + 1.0);
      const double rho0 = ldv / lnorm;
      const Vector rho1 = (dv.tail(d - 1) - factor * lbar.tail(d - 1)) / lnorm;
      return rho1.norm() - rho0;
    };
    const double step = std::max(bound(ds.segment(off, d)), bound(dz.segment(off, d)));
    if (step > 0.0) alpha = std::min(alpha, 1.0 / step);
  }
  return std::clamp(alpha, 0.0, kStepMax);
}

// Scaled standard-form data:  min c'x  s.t.  Ax = b,  Gx + s = h,  s in K.
struct StandardForm {
  int n = 0;
  int p = 0;
  ConeLayout cones;
  SparseMatrix A, G, At, Gt;
  Vector c, b, h;
  Vector x_equil, A_equil, G_equil;
  double cost_scale = 1.0;
};

StandardForm standard_form(const ConicProgram& prog, const SolverOptions& opts) {
  StandardForm sf;
  sf.n = prog.variables();
  sf.p = prog.equalities();
  sf.cones.nlin = prog.inequalities();
  int off = sf.cones.nlin;
  for (int d : prog.cone_dims()) {
    sf.cones.dims.push_back(d);
    sf.cones.offs.push_back(off);
    off += d;
  }
  sf.cones.size = off;

  sf.A = prog.A_eq();
  sf.G.resize(off, sf.n);
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(prog.A_in().nonZeros() + prog.H().nonZeros()));
    for (int col = 0; col < prog.A_in().outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(prog.A_in(), col); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    }
    for (int col = 0; col < prog.H().outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(prog.H(), col); it; ++it) {
        trip.emplace_back(sf.cones.nlin + it.row(), it.col(), -it.value());
      }
    }
    sf.G.setFromTriplets(trip.begin(), trip.end());
  }
  sf.c = prog.c() * opts.objective_scale;
  sf.b = prog.b_eq();
  sf.h.resize(off);
  sf.h << prog.b_in(), prog.h();

  sf.x_equil = Vector::Ones(sf.n);
  sf.A_equil = Vector::Ones(sf.p);
  sf.G_equil = Vector::Ones(off);
  for (int pass = 0; pass < opts.equilibration_passes; ++pass) {
    Vector xs = Vector::Zero(sf.n);
    Vector as = Vector::Zero(sf.p);
    Vector gs = Vector::Zero(off);
    for (int col = 0; col < sf.A.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(sf.A, col); it; ++it) {
        const double v = std::abs(it.value());
        xs[col] = std::max(xs[col], v);
        as[it.row()] = std::max(as[it.row()], v);
      }
    }
    for (int col = 0; col < sf.G.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(sf.G, col); it; ++it) {
        const double v = std::abs(it.value());
        xs[col] = std::max(xs[col], v);
        gs[it.row()] = std::max(gs[it.row()], v);
      }
    }
    // One factor per cone so that the scaled cone is the same cone.
    for (std::size_t c = 0; c < sf.cones.dims.size(); ++c) {
      const double mean = gs.segment(sf.cones.offs[c], sf.cones.dims[c]).mean();
      gs.segment(sf.cones.offs[c], sf.cones.dims[c]).setConstant(mean);
    }
    auto fix = [](Vector& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = v[i] < 1e-6 ? 1.0 : std::sqrt(v[i]);
    };
    fix(xs);
    fix(as);
    fix(gs);
    for (int col = 0; col < sf.A.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(sf.A, col); it; ++it) it.valueRef() /= as[it.row()] * xs[col];
    }
    for (int col = 0; col < sf.G.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(sf.G, col); it; ++it) it.valueRef() /= gs[it.row()] * xs[col];
    }
    sf.x_equil = sf.x_equil.cwiseProduct(xs);
    sf.A_equil = sf.A_equil.cwiseProduct(as);
    sf.G_equil = sf.G_equil.cwiseProduct(gs);
  }
  sf.c = sf.c.cwiseQuotient(sf.x_equil);
  // Large costs are divided out so the stopping tests see unit-sized duals;
  // the argmax is unchanged and the multipliers are scaled back on return.
  sf.cost_scale = std::max(1.0, sf.c.lpNorm<Eigen::Infinity>());
  sf.c /= sf.cost_scale;
  sf.b = sf.b.cwiseQuotient(sf.A_equil);
  sf.h = sf.h.cwiseQuotient(sf.G_equil);
  sf.At = sf.A.transpose();
  sf.Gt = sf.G.transpose();
  return sf;
}

// Quasi-definite KKT matrix
//   [ dI   A'   G'      ]
//   [ A   -dI   0       ]
//   [ G    0   -W^2 - dI]
// stored lower-triangular with fixed pattern; the W^2 block is refreshed in place.
class KktSystem {
 public:
  KktSystem(const StandardForm& sf, double delta) : sf_(sf), delta_(delta) {
    const int n = sf.n, p = sf.p, m = sf.cones.size;
    dim_ = n + p + m;
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, delta);
    for (int col = 0; col < sf.A.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(sf.A, col); it; ++it) trip.emplace_back(n + it.row(), col, it.value());
    }
    for (int col = 0; col < sf.G.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(sf.G, col); it; ++it) trip.emplace_back(n + p + it.row(), col, it.value());
    }
    for (int i = 0; i < p; ++i) trip.emplace_back(n + i, n + i, -delta);
    const int zb = n + p;
    for (int i = 0; i < sf.cones.nlin; ++i) trip.emplace_back(zb + i, zb + i, -1.0);
    for (std::size_t c = 0; c < sf.cones.dims.size(); ++c) {
      const int off = zb + sf.cones.offs[c];
      for (int a = 0; a < sf.cones.dims[c]; ++a) {
        for (int b = 0; b <= a; ++b) trip.emplace_back(off + a, off + b, a == b ? -1.0 : 0.0);
      }
    }
    K_.resize(dim_, dim_);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();
    for (int i = 0; i < sf.cones.nlin; ++i) lin_ptr_.push_back(&K_.coeffRef(zb + i, zb + i));
    cone_ptr_.resize(sf.cones.dims.size());
    for (std::size_t c = 0; c < sf.cones.dims.size(); ++c) {
      const int off = zb + sf.cones.offs[c];
      for (int a = 0; a < sf.cones.dims[c]; ++a) {
        for (int b = 0; b <= a; ++b) cone_ptr_[c].push_back(&K_.coeffRef(off + a, off + b));
      }
    }
    ldlt_.analyzePattern(K_);
  }

  void set_identity_scaling() {
    for (double* v : lin_ptr_) *v = -1.0 - delta_;
    for (std::size_t c = 0; c < cone_ptr_.size(); ++c) {
      std::size_t idx = 0;
      for (int a = 0; a < sf_.cones.dims[c]; ++a) {
        for (int b = 0; b <= a; ++b) *cone_ptr_[c][idx++] = a == b ? -1.0 - delta_ : 0.0;
      }
    }
    identity_ = true;
  }

  void set_scaling(const Scaling* sc) {
    for (std::size_t i = 0; i < lin_ptr_.size(); ++i) *lin_ptr_[i] = -sc->lin_w[static_cast<Eigen::Index>(i)] *
                                                                          sc->lin_w[static_cast<Eigen::Index>(i)] -
                                                                      delta_;
    for (std::size_t c = 0; c < cone_ptr_.size(); ++c) {
      std::size_t idx = 0;
      for (int a = 0; a < sf_.cones.dims[c]; ++a) {
        for (int b = 0; b <= a; ++b) *cone_ptr_[c][idx++] = -sc->W2[c](a, b) - (a == b ? delta_ : 0.0);
      }
    }
    scaling_ = sc;
    identity_ = false;
  }

  bool factorize() {
    ldlt_.factorize(K_);
    return ldlt_.info() == Eigen::Success;
  }

  // Solves the unregularized system with iterative refinement.
  Vector solve(const Vector& rhs, int refinement_steps) const {
    Vector sol = ldlt_.solve(rhs);
    const double target = 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>());
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < refinement_steps; ++it) {
      const Vector err = rhs - apply(sol);
      const double nerr = err.lpNorm<Eigen::Infinity>();
      if (!(nerr > target) || nerr > 0.5 * prev) break;
      prev = nerr;
      sol += ldlt_.solve(err);
    }
    return sol;
  }

 private:
  Vector apply(const Vector& v) const {
    const int n = sf_.n, p = sf_.p, m = sf_.cones.size;
    Vector out(dim_);
    const auto x = v.head(n);
    const auto y = v.segment(n, p);
    const Vector z = v.tail(m);
    out.head(n) = sf_.Gt * z;
    if (p > 0) out.head(n) += sf_.At * y;
    if (p > 0) out.segment(n, p) = sf_.A * x;
    Vector wz;
    if (identity_) {
      wz = z;
    } else {
      scaling_->apply_squared(sf_.cones, z, wz);
    }
    out.tail(m) = sf_.G * x - wz;
    return out;
  }

  const StandardForm& sf_;
  double delta_;
  int dim_ = 0;
  SparseMatrix K_;
  std::vector<double*> lin_ptr_;
  std::vector<std::vector<double*>> cone_ptr_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  const Scaling* scaling_ = nullptr;
  bool identity_ = true;
};

struct Split {
  Vector x, y, z;
};

Split split(const StandardForm& sf, const Vector& v) {
  return Split{v.head(sf.n), v.segment(sf.n, sf.p), v.tail(sf.cones.size)};
}

}  // namespace

SolveOutcome solve(const ConicProgram& program, const SolverOptions& opts) {
  require(opts.feas_tol > 0.0 && opts.gap_tol > 0.0 && opts.max_iter > 0, ErrorKind::InvalidArgument,
          "solver tolerances must be positive");
  require(std::isfinite(opts.objective_scale) && opts.objective_scale > 0.0, ErrorKind::InvalidArgument,
          "objective scale must be positive");

  const StandardForm sf = standard_form(program, opts);
  const ConeLayout& cones = sf.cones;
  const int n = sf.n, p = sf.p, m = cones.size;
  SolveOutcome out;

  KktSystem kkt(sf, opts.static_regularization);
  kkt.set_identity_scaling();
  if (!kkt.factorize()) {
    out.status = SolveStatus::NumericalFailure;
    return out;
  }

  // Starting point from two least-squares style solves.
  Vector rhs1(n + p + m);
  rhs1 << Vector::Zero(n), sf.b, sf.h;
  Vector rhs2 = Vector::Zero(n + p + m);
  rhs2.head(n) = -sf.c;

  Vector x, y, z, s;
  {
    const Split d1 = split(sf, kkt.solve(rhs1, opts.refinement_steps));
    x = d1.x;
    bring_to_cone(cones, -d1.z, s);
    const Split d2 = split(sf, kkt.solve(rhs2, opts.refinement_steps));
    y = d2.y;
    bring_to_cone(cones, d2.z, z);
  }
  rhs1.head(n) = -sf.c;
  double tau = 1.0;
  double kap = 1.0;

  const double resx0 = std::max(1.0, sf.c.norm());
  const double resy0 = std::max(1.0, sf.b.norm());
  const double resz0 = std::max(1.0, sf.h.norm());
  const double feastol = opts.feas_tol;
  const double abstol = opts.gap_tol;
  const double reltol = opts.gap_tol;

  Scaling sc;
  bool infeasible_seen = false;
  Certificate last_ray;
  double best_pres = std::numeric_limits<double>::infinity();
  Vector best_x;

  auto make_ray = [&](const Vector& yy, const Vector& zz) {
    Certificate cert;
    cert.lambda = -yy.cwiseQuotient(sf.A_equil);
    const Vector zo = zz.cwiseQuotient(sf.G_equil);
    cert.mu = zo.head(cones.nlin);
    cert.cone = zo.tail(m - cones.nlin);
    const double norm = cert.inf_norm();
    if (norm > 0.0) cert = cert.scaled(1.0 / norm);
    return cert;
  };

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    out.iterations = iter;
    // Residuals.
    Vector rx = -sf.Gt * z - tau * sf.c;
    if (p > 0) rx -= sf.At * y;
    Vector ry = Vector::Zero(p);
    if (p > 0) ry = sf.A * x - tau * sf.b;
    const Vector hrz = s + sf.G * x;
    const Vector rz = hrz - tau * sf.h;
    const double cx = sf.c.dot(x);
    const double by = p > 0 ? sf.b.dot(y) : 0.0;
    const double hz = sf.h.dot(z);
    const double rt = kap + cx + by + hz;
    const double nx = x.norm(), ny = y.norm(), nz = z.norm(), ns = s.norm();

    const double gap_h = s.dot(z);
    const double mu = (gap_h + kap * tau) / (cones.degree() + 1);
    const double pcost = cx / tau;
    const double dcost = -(hz + by) / tau;
    const double gap = gap_h / (tau * tau);
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0.0) {
      relgap = gap / -pcost;
    } else if (dcost > 0.0) {
      relgap = gap / dcost;
    }
    const double nry = p > 0 ? ry.norm() / std::max(resy0 + nx, 1.0) : 0.0;
    const double nrz = rz.norm() / std::max(resz0 + nx + ns, 1.0);
    const double pres = std::max(nry, nrz) / tau;
    const double dres = rx.norm() / std::max(resx0 + ny + nz, 1.0) / tau;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;
    if (!std::isfinite(pres) || !std::isfinite(dres)) break;
    if (pres < best_pres) {
      best_pres = pres;
      best_x = x / tau;
    }

    if ((-cx > 0.0 || -by - hz >= -abstol) && pres < feastol && dres < feastol && (gap < abstol || relgap < reltol)) {
      out.status = SolveStatus::Optimal;
      out.x = (x / tau).cwiseQuotient(sf.x_equil);
      out.dual.lambda = -(y * (sf.cost_scale / tau)).cwiseQuotient(sf.A_equil);
      const Vector zo = (z * (sf.cost_scale / tau)).cwiseQuotient(sf.G_equil);
      out.dual.mu = zo.head(cones.nlin);
      out.dual.cone = zo.tail(m - cones.nlin);
      out.objective = program.c().dot(out.x);
      return out;
    }

    // Primal infeasibility: the (y, z) part of the iterate is a Farkas ray.
    if ((hz + by) / std::max(ny + nz, 1.0) < -reltol && tau < kap) {
      Vector aty = sf.Gt * z;
      if (p > 0) aty += sf.At * y;
      const double pinfres = aty.norm() / std::max(ny + nz, 1.0);
      if (pinfres < feastol) {
        infeasible_seen = true;
        last_ray = make_ray(y, z);
        const double resid = stationarity_residual(last_ray, program);
        const double dobj = dual_objective(last_ray, program, program.psi());
        if (resid <= feastol && dobj > 0.0 && dual_cone_violation(last_ray, program) <= feastol) {
          out.status = SolveStatus::Infeasible;
          out.certificate = last_ray;
          return out;
        }
      }
    }
    // Dual infeasibility (unbounded primal).
    if (cx / std::max(nx, 1.0) < -reltol && tau < kap) {
      double hresy = p > 0 ? (sf.A * x).norm() : 0.0;
      const double dinfres = std::max(hresy / std::max(nx, 1.0), hrz.norm() / std::max(nx + ns, 1.0));
      if (dinfres < feastol) {
        out.status = SolveStatus::Unbounded;
        out.x = x.cwiseQuotient(sf.x_equil);
        return out;
      }
    }
    if (iter == opts.max_iter) break;

    if (!update_scaling(cones, s, z, sc)) break;
    kkt.set_scaling(&sc);
    if (!kkt.factorize()) break;

    const Split d1 = split(sf, kkt.solve(rhs1, opts.refinement_steps));

    // Affine direction.
    Vector rhs_aff(n + p + m);
    rhs_aff << rx, -ry, s - rz;
    Split d2 = split(sf, kkt.solve(rhs_aff, opts.refinement_steps));
    const double dtau_denom = kap / tau - sf.c.dot(d1.x) - (p > 0 ? sf.b.dot(d1.y) : 0.0) - sf.h.dot(d1.z);
    const double dtauaff =
        (rt - kap + sf.c.dot(d2.x) + (p > 0 ? sf.b.dot(d2.y) : 0.0) + sf.h.dot(d2.z)) / dtau_denom;
    const Vector dzaff = d2.z + dtauaff * d1.z;
    Vector w_dzaff;
    sc.apply(cones, dzaff, w_dzaff);
    const Vector dsaff_by_w = -w_dzaff - sc.lambda;
    const double dkapaff = -kap - kap / tau * dtauaff;
    const double step_aff = line_search(cones, sc.lambda, dsaff_by_w, w_dzaff, tau, dtauaff, kap, dkapaff);
    const double sigma = std::clamp(std::pow(1.0 - step_aff, 3), kSigmaMin, kSigmaMax);

    // Combined direction.
    Vector ds1 = conic_product(cones, sc.lambda, sc.lambda) + conic_product(cones, dsaff_by_w, w_dzaff);
    ds1.head(cones.nlin).array() -= sigma * mu;
    for (int off : cones.offs) ds1[off] -= sigma * mu;
    const Vector lambda_div = conic_division(cones, sc.lambda, ds1);
    Vector w_lambda_div;
    sc.apply(cones, lambda_div, w_lambda_div);
    Vector rhs_comb(n + p + m);
    rhs_comb << (1.0 - sigma) * rx, -(1.0 - sigma) * ry, -(1.0 - sigma) * rz + w_lambda_div;
    Split dc = split(sf, kkt.solve(rhs_comb, opts.refinement_steps));
    const double bkap = kap * tau + dkapaff * dtauaff - sigma * mu;
    const double dtau = ((1.0 - sigma) * rt - bkap / tau + sf.c.dot(dc.x) + (p > 0 ? sf.b.dot(dc.y) : 0.0) +
                         sf.h.dot(dc.z)) /
                        dtau_denom;
    dc.x += dtau * d1.x;
    dc.y += dtau * d1.y;
    dc.z += dtau * d1.z;
    Vector w_dz;
    sc.apply(cones, dc.z, w_dz);
    const Vector ds_by_w = -(lambda_div + w_dz);
    const double dkap = -(bkap + kap * dtau) / tau;
    const double step = kStepFraction * line_search(cones, sc.lambda, ds_by_w, w_dz, tau, dtau, kap, dkap);
    if (!(step > kStepMin)) break;
    Vector ds;
    sc.apply(cones, ds_by_w, ds);

    x += step * dc.x;
    y += step * dc.y;
    z += step * dc.z;
    s += step * ds;
    kap += step * dkap;
    tau += step * dtau;
  }

  out.status = infeasible_seen ? SolveStatus::InfeasibleNoCertificate : SolveStatus::NumericalFailure;
  if (infeasible_seen) out.certificate = last_ray;
  if (best_x.size() == n) {
    out.x = best_x.cwiseQuotient(sf.x_equil);
    out.objective = program.c().dot(out.x);
  }
  return out;
}

}  // namespace hostcap
