#include "hostcap/assemble.hpp"

#include "hostcap/error.hpp"

#include <cmath>
#include <optional>

namespace hostcap {

void RiskParams::validate() const {
  require(std::isfinite(nu) && nu >= 0.0 && nu < 1.0, ErrorKind::BadDelta, "nu must lie in [0, 1)");
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma < 1.0, ErrorKind::BadDelta, "gamma must lie in [0, 1)");
}

bool psi_in_box(const RadialNetwork& net, const Vector& psi, double tol) {
  if (psi.size() != net.lines()) return false;
  return (psi.array() >= -tol).all() && (psi.array() <= net.psi_max().array() + tol).all();
}

namespace {

ConicProgram assemble(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                      const std::optional<Vector>& fixed_psi, const AssembleOptions& opts) {
  risk.validate();
  const int n = net.buses();
  const int m = net.lines();
  const int K = scen.count();
  require(scen.width() == m, ErrorKind::DimensionMismatch,
          "scenario width " + std::to_string(scen.width()) + " does not match " + std::to_string(m) + " buses");
  if (fixed_psi) {
    require(fixed_psi->size() == m, ErrorKind::DimensionMismatch, "psi must have one entry per non-substation bus");
    require(fixed_psi->allFinite(), ErrorKind::InvalidArgument, "psi must be finite");
  }
  require(std::isfinite(opts.loss_weight) && opts.loss_weight >= 0.0, ErrorKind::InvalidArgument,
          "loss weight must be nonnegative");

  ConicProgram::Builder b(fixed_psi ? m : 0);
  const int psi0 = fixed_psi ? -1 : b.add_variables(block::psi, m);
  const int wu0 = b.add_variables(block::w_upper, n);
  const int wl0 = b.add_variables(block::w_lower, n);
  const int s0 = b.add_variables(block::s_flow, m);

  struct Offsets {
    int P, Q, W, L, tu, tl, tf;
  };
  std::vector<Offsets> off(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    Offsets& o = off[static_cast<std::size_t>(k)];
    o.P = b.add_variables(block::P, m, k);
    o.Q = b.add_variables(block::Q, m, k);
    o.W = b.add_variables(block::W, n, k);
    o.L = b.add_variables(block::L, m, k);
    o.tu = b.add_variables(block::t_upper, n, k);
    o.tl = b.add_variables(block::t_lower, n, k);
    o.tf = b.add_variables(block::t_flow, m, k);
  }

  if (!fixed_psi) {
    for (int j = 0; j < m; ++j) b.set_cost(psi0 + j, -1.0);
  }
  if (opts.loss_weight > 0.0) {
    for (int k = 0; k < K; ++k) {
      for (int e = 0; e < m; ++e) {
        if (net.r()[e] > 0.0) b.set_cost(off[static_cast<std::size_t>(k)].L + e, opts.loss_weight * net.r()[e] / K);
      }
    }
  }

  const auto& lines = net.edges();
  auto var = [](int v, double coef = 1.0) { return AffineExpr({{v, coef}}); };

  for (int k = 0; k < K; ++k) {
    const Offsets& o = off[static_cast<std::size_t>(k)];
    const Vector alpha = scen.alpha_row(k);
    const Vector pd = scen.p_row(k);
    const Vector qd = scen.q_row(k);

    // Nodal balance at buses 2..n:
    //   sum_out P - sum_in (P - r L) = alpha psi - pD   (and the reactive analogue).
    for (int bus = 1; bus < n; ++bus) {
      const int j = bus - 1;
      AffineExpr real, reactive;
      for (int e : net.child_lines(bus)) {
        real.terms.push_back({o.P + e, 1.0});
        reactive.terms.push_back({o.Q + e, 1.0});
      }
      const int in = net.parent_line(bus);
      real.terms.push_back({o.P + in, -1.0});
      reactive.terms.push_back({o.Q + in, -1.0});
      if (net.r()[in] != 0.0) real.terms.push_back({o.L + in, net.r()[in]});
      if (net.x()[in] != 0.0) reactive.terms.push_back({o.L + in, net.x()[in]});
      const double qa = net.eta_g()[j] * alpha[j];
      if (fixed_psi) {
        b.add_equality(real, {RowClass::RealBalance, k, j}, {{j, alpha[j]}}, pd[j]);
        b.add_equality(reactive, {RowClass::ReactiveBalance, k, j}, {{j, qa}}, qd[j]);
      } else {
        real.terms.push_back({psi0 + j, -alpha[j]});
        real.constant = pd[j];
        reactive.terms.push_back({psi0 + j, -qa});
        reactive.constant = qd[j];
        b.add_equality(real, {RowClass::RealBalance, k, j});
        b.add_equality(reactive, {RowClass::ReactiveBalance, k, j});
      }
    }

    for (int e = 0; e < m; ++e) {
      const Line& line = lines[static_cast<std::size_t>(e)];
      const double z2 = line.r * line.r + line.x * line.x;
      AffineExpr drop({{o.W + line.from, 1.0},
                       {o.W + line.to, -1.0},
                       {o.P + e, -2.0 * line.r},
                       {o.Q + e, -2.0 * line.x},
                       {o.L + e, z2}});
      b.add_equality(drop, {RowClass::VoltageDrop, k, e});
    }
    b.add_equality(AffineExpr({{o.W, 1.0}}, -net.w_substation()), {RowClass::Substation, k, 0});

    for (int e = 0; e < m; ++e) {
      const Line& line = lines[static_cast<std::size_t>(e)];
      b.add_cone(soc_rotated(var(o.W + line.from), var(o.L + e), var(o.P + e), var(o.Q + e)),
                 {RowClass::BranchCone, k, e});
    }
    for (int j = 0; j < n; ++j) {
      b.add_inequality(AffineExpr({{o.W + j, 1.0}, {wu0 + j, -1.0}, {o.tu + j, -1.0}}), {RowClass::UpperLink, k, j});
    }
    for (int j = 0; j < n; ++j) {
      b.add_inequality(AffineExpr({{o.W + j, -1.0}, {wl0 + j, -1.0}, {o.tl + j, -1.0}}), {RowClass::LowerLink, k, j});
    }
    // t_flow + s >= P^2 + Q^2 as a rotated cone with z2 = 1.
    for (int e = 0; e < m; ++e) {
      const AffineExpr shifted({{o.tf + e, 1.0}, {s0 + e, 1.0}});
      b.add_cone(soc_rotated(shifted, AffineExpr::constant_value(1.0), var(o.P + e), var(o.Q + e)),
                 {RowClass::FlowHinge, k, e});
    }
    for (int j = 0; j < n; ++j) b.add_inequality(var(o.tu + j, -1.0), {RowClass::UpperSlack, k, j});
    for (int j = 0; j < n; ++j) b.add_inequality(var(o.tl + j, -1.0), {RowClass::LowerSlack, k, j});
    for (int e = 0; e < m; ++e) b.add_inequality(var(o.tf + e, -1.0), {RowClass::FlowSlack, k, e});
  }

  // Sampled CVaR epigraphs, one anchor per constrained component.
  const double wv = 1.0 / ((1.0 - risk.nu) * K);
  const double wf = 1.0 / ((1.0 - risk.gamma) * K);
  for (int j = 0; j < n; ++j) {
    AffineExpr upper({{wu0 + j, 1.0}}, -net.w_max()[j]);
    AffineExpr lower({{wl0 + j, 1.0}}, net.w_min()[j]);
    for (int k = 0; k < K; ++k) {
      upper.terms.push_back({off[static_cast<std::size_t>(k)].tu + j, wv});
      lower.terms.push_back({off[static_cast<std::size_t>(k)].tl + j, wv});
    }
    b.add_inequality(upper, {RowClass::UpperCvar, -1, j});
    b.add_inequality(lower, {RowClass::LowerCvar, -1, j});
  }
  for (int e = 0; e < m; ++e) {
    AffineExpr flow({{s0 + e, 1.0}}, -net.s_max()[e] * net.s_max()[e]);
    for (int k = 0; k < K; ++k) flow.terms.push_back({off[static_cast<std::size_t>(k)].tf + e, wf});
    b.add_inequality(flow, {RowClass::FlowCvar, -1, e});
  }

  if (!fixed_psi) {
    for (int j = 0; j < m; ++j) b.add_inequality(var(psi0 + j, -1.0), {RowClass::CapacityBox, -1, j});
    for (int j = 0; j < m; ++j) {
      b.add_inequality(AffineExpr({{psi0 + j, 1.0}}, -net.psi_max()[j]), {RowClass::CapacityBox, -1, m + j});
    }
    return b.build();
  }
  return b.build(*fixed_psi);
}

}  // namespace

ConicProgram build_hc_max(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                          const AssembleOptions& opts) {
  return assemble(net, scen, risk, std::nullopt, opts);
}

ConicProgram build_acceptability(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                                 const Vector& psi, const AssembleOptions& opts) {
  return assemble(net, scen, risk, psi, opts);
}

FlowState extract_flow(const ConicProgram& program, const Vector& x, int scenario) {
  require(x.size() == program.variables(), ErrorKind::DimensionMismatch, "solution does not match program");
  auto seg = [&](const char* name) {
    const VariableBlock& blk = program.block(name, scenario);
    return Vector(x.segment(blk.offset, blk.size));
  };
  return FlowState{seg(block::P), seg(block::Q), seg(block::L), seg(block::W)};
}

ScenarioSize scenario_size(const ConicProgram& program, int scenario) {
  ScenarioSize size;
  for (const VariableBlock& blk : program.blocks()) {
    if (blk.scenario == scenario) size.variables += blk.size;
  }
  auto count = [&](const std::vector<RowTag>& tags) {
    for (const RowTag& t : tags) {
      if (t.scenario != scenario) continue;
      ++size.raw_rows;
      if (t.cls != RowClass::Substation && t.cls != RowClass::FlowSlack) ++size.constraints;
    }
  };
  count(program.equality_tags());
  count(program.inequality_tags());
  count(program.cone_tags());
  return size;
}

CvarAnchors extract_anchors(const ConicProgram& program, const Vector& x) {
  require(x.size() == program.variables(), ErrorKind::DimensionMismatch, "solution does not match program");
  auto seg = [&](const char* name) {
    const VariableBlock& blk = program.block(name, -1);
    return Vector(x.segment(blk.offset, blk.size));
  };
  return CvarAnchors{seg(block::w_upper), seg(block::w_lower), seg(block::s_flow)};
}

}  // namespace hostcap
