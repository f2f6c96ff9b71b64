#include "hostcap/network.hpp"

#include "hostcap/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace hostcap {

namespace {

using json = nlohmann::json;

void check_vector(const Vector& v, Eigen::Index expected, const char* name) {
  require(v.size() == expected, ErrorKind::DimensionMismatch,
          std::string(name) + " has length " + std::to_string(v.size()) + ", expected " + std::to_string(expected));
  require(v.allFinite(), ErrorKind::InvalidArgument, std::string(name) + " contains non-finite values");
}

}  // namespace

void check_spanning_tree(int buses, const std::vector<Line>& lines) {
  require(buses >= 1, ErrorKind::GraphNotTree, "network needs at least one bus");
  require(static_cast<int>(lines.size()) == buses - 1, ErrorKind::GraphNotTree,
          std::to_string(lines.size()) + " lines for " + std::to_string(buses) + " buses; a tree has n-1");
  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(buses));
  for (const auto& line : lines) {
    require(line.from >= 0 && line.from < buses && line.to >= 0 && line.to < buses, ErrorKind::GraphNotTree,
            "line endpoint outside bus range");
    require(line.from != line.to, ErrorKind::GraphNotTree, "self-loop at bus " + std::to_string(line.from + 1));
    adjacency[static_cast<std::size_t>(line.from)].push_back(line.to);
    adjacency[static_cast<std::size_t>(line.to)].push_back(line.from);
  }
  std::vector<bool> seen(static_cast<std::size_t>(buses), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int bus = frontier.front();
    frontier.pop();
    for (int next : adjacency[static_cast<std::size_t>(bus)]) {
      if (!seen[static_cast<std::size_t>(next)]) {
        seen[static_cast<std::size_t>(next)] = true;
        ++reached;
        frontier.push(next);
      }
    }
  }
  // n-1 edges and connected implies acyclic.
  require(reached == buses, ErrorKind::GraphNotTree, "lines do not connect every bus to the substation");
}

RadialNetwork::RadialNetwork(NetworkData data) : n_(data.buses), w_sub_(data.w_substation) {
  check_spanning_tree(data.buses, data.lines);
  const Eigen::Index m = n_ - 1;
  check_vector(data.w_min, n_, "w_min");
  check_vector(data.w_max, n_, "w_max");
  check_vector(data.psi_max, m, "psi_max");
  check_vector(data.eta_g, m, "eta_g");
  require(std::isfinite(w_sub_) && w_sub_ > 0.0, ErrorKind::InvalidArgument, "w_substation must be positive");
  for (Eigen::Index j = 0; j < n_; ++j) {
    require(data.w_min[j] > 0.0 && data.w_min[j] < data.w_max[j], ErrorKind::InvalidArgument,
            "voltage limits must satisfy 0 < w_min < w_max at bus " + std::to_string(j + 1));
  }
  require((data.psi_max.array() >= 0.0).all(), ErrorKind::InvalidArgument, "psi_max must be nonnegative");

  // Orient every line parent->child.
  std::vector<std::vector<int>> incident(static_cast<std::size_t>(n_));
  for (std::size_t e = 0; e < data.lines.size(); ++e) {
    incident[static_cast<std::size_t>(data.lines[e].from)].push_back(static_cast<int>(e));
    incident[static_cast<std::size_t>(data.lines[e].to)].push_back(static_cast<int>(e));
  }
  parent_line_.assign(static_cast<std::size_t>(n_), -1);
  child_lines_.assign(static_cast<std::size_t>(n_), {});
  lines_ = data.lines;
  std::vector<bool> seen(static_cast<std::size_t>(n_), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  while (!frontier.empty()) {
    const int bus = frontier.front();
    frontier.pop();
    bfs_.push_back(bus);
    for (int e : incident[static_cast<std::size_t>(bus)]) {
      Line& line = lines_[static_cast<std::size_t>(e)];
      const int other = line.from == bus ? line.to : line.from;
      if (seen[static_cast<std::size_t>(other)]) continue;
      seen[static_cast<std::size_t>(other)] = true;
      line.from = bus;
      line.to = other;
      parent_line_[static_cast<std::size_t>(other)] = e;
      child_lines_[static_cast<std::size_t>(bus)].push_back(e);
      frontier.push(other);
    }
  }

  r_.resize(m);
  x_.resize(m);
  s_max_.resize(m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const Line& line = lines_[static_cast<std::size_t>(e)];
    require(std::isfinite(line.r) && std::isfinite(line.x) && std::isfinite(line.s_max), ErrorKind::InvalidArgument,
            "line parameters must be finite");
    require(line.r >= 0.0, ErrorKind::InvalidArgument, "line resistance must be nonnegative");
    require(line.s_max > 0.0, ErrorKind::InvalidArgument, "line s_max must be positive");
    r_[e] = line.r;
    x_[e] = line.x;
    s_max_[e] = line.s_max;
  }
  w_min_ = std::move(data.w_min);
  w_max_ = std::move(data.w_max);
  psi_max_ = std::move(data.psi_max);
  eta_g_ = std::move(data.eta_g);
}

NetworkData RadialNetwork::data() const {
  return NetworkData{n_, lines_, w_min_, w_max_, psi_max_, eta_g_, w_sub_};
}

Vector IncidenceDecomposition::drop(const Vector& v) const {
  Vector out(static_cast<Eigen::Index>(drop_first.size()));
  for (std::size_t i = 0; i < drop_first.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[drop_first[i]];
  return out;
}

IncidenceDecomposition build_incidence(const RadialNetwork& net) {
  const int n = net.buses();
  const int m = net.lines();
  IncidenceDecomposition inc;
  inc.B.resize(m, n);
  inc.B_plus.resize(m, n);
  inc.B_minus.resize(m, n);
  std::vector<Eigen::Triplet<double>> all, plus, minus;
  for (int e = 0; e < m; ++e) {
    const Line& line = net.edges()[static_cast<std::size_t>(e)];
    all.emplace_back(e, line.from, 1.0);
    all.emplace_back(e, line.to, -1.0);
    plus.emplace_back(e, line.from, 1.0);
    minus.emplace_back(e, line.to, 1.0);
  }
  inc.B.setFromTriplets(all.begin(), all.end());
  inc.B_plus.setFromTriplets(plus.begin(), plus.end());
  inc.B_minus.setFromTriplets(minus.begin(), minus.end());
  for (int j = 1; j < n; ++j) inc.drop_first.push_back(j);
  return inc;
}

Injections injections(const RadialNetwork& net, const Vector& alpha, const Vector& p_demand, const Vector& q_demand,
                      const Vector& psi) {
  const Eigen::Index m = net.lines();
  require(alpha.size() == m && p_demand.size() == m && q_demand.size() == m && psi.size() == m,
          ErrorKind::DimensionMismatch, "injection inputs must have one entry per non-substation bus");
  const Vector generation = alpha.cwiseProduct(psi);
  return Injections{generation - p_demand, net.eta_g().cwiseProduct(generation) - q_demand};
}

double FlowResiduals::max() const {
  return std::max({real_balance, reactive_balance, voltage_drop, current_relation, substation});
}

FlowResiduals flow_residuals(const RadialNetwork& net, const Injections& inj, const FlowState& s) {
  const int n = net.buses();
  const int m = net.lines();
  require(s.P.size() == m && s.Q.size() == m && s.L.size() == m && s.W.size() == n, ErrorKind::DimensionMismatch,
          "flow state does not match network");
  Vector p_bal = Vector::Zero(n);
  Vector q_bal = Vector::Zero(n);
  FlowResiduals res;
  for (int e = 0; e < m; ++e) {
    const Line& line = net.edges()[static_cast<std::size_t>(e)];
    p_bal[line.from] += s.P[e];
    q_bal[line.from] += s.Q[e];
    p_bal[line.to] -= s.P[e] - line.r * s.L[e];
    q_bal[line.to] -= s.Q[e] - line.x * s.L[e];
    const double z2 = line.r * line.r + line.x * line.x;
    const double drop = s.W[line.from] - s.W[line.to] - 2.0 * (line.r * s.P[e] + line.x * s.Q[e]) + z2 * s.L[e];
    res.voltage_drop = std::max(res.voltage_drop, std::abs(drop));
    const double current = s.W[line.from] * s.L[e] - s.P[e] * s.P[e] - s.Q[e] * s.Q[e];
    res.current_relation = std::max(res.current_relation, std::abs(current));
  }
  for (int j = 1; j < n; ++j) {
    res.real_balance = std::max(res.real_balance, std::abs(inj.p[j - 1] - p_bal[j]));
    res.reactive_balance = std::max(res.reactive_balance, std::abs(inj.q[j - 1] - q_bal[j]));
  }
  res.substation = std::abs(s.W[0] - net.w_substation());
  return res;
}

FlowState solve_power_flow_oracle(const RadialNetwork& net, const Injections& inj, const OracleOptions& opts) {
  const int n = net.buses();
  const int m = net.lines();
  require(inj.p.size() == m && inj.q.size() == m, ErrorKind::DimensionMismatch, "injections do not match network");
  FlowState s{Vector::Zero(m), Vector::Zero(m), Vector::Zero(m), Vector::Constant(n, net.w_substation())};
  const auto& order = net.bfs_order();

  auto sweep = [&] {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int bus = *it;
      if (bus == 0) continue;
      const int e = net.parent_line(bus);
      double p = -inj.p[bus - 1] + net.r()[e] * s.L[e];
      double q = -inj.q[bus - 1] + net.x()[e] * s.L[e];
      for (int c : net.child_lines(bus)) {
        p += s.P[c];
        q += s.Q[c];
      }
      s.P[e] = p;
      s.Q[e] = q;
    }
    for (int bus : order) {
      if (bus == 0) continue;
      const int e = net.parent_line(bus);
      const Line& line = net.edges()[static_cast<std::size_t>(e)];
      const double z2 = line.r * line.r + line.x * line.x;
      s.W[bus] = s.W[line.from] - 2.0 * (line.r * s.P[e] + line.x * s.Q[e]) + z2 * s.L[e];
      if (!(s.W[bus] > 0.0)) {
        throw Error(ErrorKind::NoSolution, "voltage collapse at bus " + std::to_string(bus + 1));
      }
    }
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    sweep();
    double change = 0.0;
    double scale = 1.0;
    for (int e = 0; e < m; ++e) {
      const int from = net.edges()[static_cast<std::size_t>(e)].from;
      const double next = (s.P[e] * s.P[e] + s.Q[e] * s.Q[e]) / s.W[from];
      if (!std::isfinite(next) || next > opts.divergence_bound) {
        throw Error(ErrorKind::NoSolution, "line current diverges; load exceeds deliverable power");
      }
      change = std::max(change, std::abs(next - s.L[e]));
      scale = std::max(scale, next);
      s.L[e] = next;
    }
    if (change <= opts.tolerance * scale) {
      sweep();
      return s;
    }
  }
  throw Error(ErrorKind::NonConvergence, "power flow sweep hit the iteration cap");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void reject_unknown(const json& object, const std::set<std::string>& allowed, const char* where) {
  for (const auto& item : object.items()) {
    if (!allowed.contains(item.key())) {
      throw Error(ErrorKind::ParseError, std::string("unknown field '") + item.key() + "' in " + where);
    }
  }
}

Vector read_vector(const json& doc, const char* key) {
  if (!doc.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw Error(ErrorKind::ParseError, std::string("field '") + key + "' must be an array");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw Error(ErrorKind::ParseError, std::string("non-numeric entry in '") + key + "'");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

RadialNetwork parse_network(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("network JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "network document must be an object");
  reject_unknown(doc, {"buses", "edges", "w_min", "w_max", "psi_max", "eta_g", "w_substation"}, "network");
  NetworkData data;
  try {
    data.buses = doc.at("buses").get<int>();
    for (const auto& edge : doc.at("edges")) {
      reject_unknown(edge, {"from", "to", "r", "x", "s_max"}, "edge");
      Line line;
      line.from = edge.at("from").get<int>() - 1;
      line.to = edge.at("to").get<int>() - 1;
      line.r = edge.at("r").get<double>();
      line.x = edge.at("x").get<double>();
      line.s_max = edge.at("s_max").get<double>();
      data.lines.push_back(line);
    }
    if (doc.contains("w_substation")) data.w_substation = doc.at("w_substation").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("network JSON: ") + e.what());
  }
  data.w_min = read_vector(doc, "w_min");
  data.w_max = read_vector(doc, "w_max");
  data.psi_max = read_vector(doc, "psi_max");
  data.eta_g = read_vector(doc, "eta_g");
  return RadialNetwork(std::move(data));
}

RadialNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open network file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_network(buffer.str());
}

std::string network_to_json(const RadialNetwork& net) {
  json doc;
  doc["buses"] = net.buses();
  json edges = json::array();
  for (const auto& line : net.edges()) {
    edges.push_back({{"from", line.from + 1}, {"to", line.to + 1}, {"r", line.r}, {"x", line.x}, {"s_max", line.s_max}});
  }
  doc["edges"] = std::move(edges);
  doc["w_min"] = vector_json(net.w_min());
  doc["w_max"] = vector_json(net.w_max());
  doc["psi_max"] = vector_json(net.psi_max());
  doc["eta_g"] = vector_json(net.eta_g());
  doc["w_substation"] = net.w_substation();
  return doc.dump(2);
}

void save_network(const RadialNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write network file " + path.string());
  out << network_to_json(net) << '\n';
}

}  // namespace hostcap
