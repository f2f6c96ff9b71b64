#include "hostcap/scenarios.hpp"

#include "hostcap/error.hpp"
#include "hostcap/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace hostcap {

ScenarioSet::ScenarioSet(Matrix alpha, Matrix p_demand, Matrix q_demand)
    : alpha_(std::move(alpha)), p_(std::move(p_demand)), q_(std::move(q_demand)) {
  require(alpha_.rows() >= 1, ErrorKind::EmptyFile, "scenario set needs at least one scenario");
  require(p_.rows() == alpha_.rows() && q_.rows() == alpha_.rows() && p_.cols() == alpha_.cols() &&
              q_.cols() == alpha_.cols(),
          ErrorKind::DimensionMismatch, "alpha, p_D and q_D must share one shape");
  require(alpha_.allFinite() && p_.allFinite() && q_.allFinite(), ErrorKind::ParseError,
          "scenario values must be finite");
  require((alpha_.array() >= 0.0).all(), ErrorKind::ParseError, "irradiance coefficients must be nonnegative");
}

ScenarioSet ScenarioSet::rows(const std::vector<int>& indices) const {
  const auto m = static_cast<Eigen::Index>(indices.size());
  Matrix a(m, alpha_.cols()), p(m, p_.cols()), q(m, q_.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const int k = indices[static_cast<std::size_t>(i)];
    require(k >= 0 && k < count(), ErrorKind::InvalidArgument, "scenario index out of range");
    a.row(i) = alpha_.row(k);
    p.row(i) = p_.row(k);
    q.row(i) = q_.row(k);
  }
  return ScenarioSet(std::move(a), std::move(p), std::move(q));
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r'; });
}

}  // namespace

ScenarioSet parse_scenarios(const std::string& text, int buses) {
  require(buses >= 2, ErrorKind::InvalidArgument, "scenarios need at least two buses");
  const int width = buses - 1;
  const int columns = 3 * width;
  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int rows = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric = numeric && parse_double(fields[i], row[i]);
    if (first && !numeric) {
      // Header row.
      first = false;
      require(static_cast<int>(fields.size()) == columns, ErrorKind::DimensionMismatch,
              "header has " + std::to_string(fields.size()) + " columns, expected " + std::to_string(columns));
      continue;
    }
    first = false;
    require(static_cast<int>(fields.size()) == columns, ErrorKind::DimensionMismatch,
            "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) + " columns, expected " +
                std::to_string(columns));
    require(numeric, ErrorKind::ParseError, "line " + std::to_string(line_no) + " has a malformed number");
    for (int j = 0; j < columns; ++j) {
      require(std::isfinite(row[static_cast<std::size_t>(j)]), ErrorKind::ParseError,
              "line " + std::to_string(line_no) + " has a non-finite value");
    }
    for (int j = 0; j < width; ++j) {
      require(row[static_cast<std::size_t>(j)] >= 0.0, ErrorKind::ParseError,
              "line " + std::to_string(line_no) + " has a negative irradiance coefficient");
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  require(rows > 0, ErrorKind::EmptyFile, "scenario file has no data rows");
  Matrix a(rows, width), p(rows, width), q(rows, width);
  for (int k = 0; k < rows; ++k) {
    const double* row = values.data() + static_cast<std::ptrdiff_t>(k) * columns;
    for (int j = 0; j < width; ++j) {
      a(k, j) = row[j];
      p(k, j) = row[width + j];
      q(k, j) = row[2 * width + j];
    }
  }
  return ScenarioSet(std::move(a), std::move(p), std::move(q));
}

ScenarioSet load_scenarios(const std::filesystem::path& path, int buses) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenarios(buffer.str(), buses);
}

std::string scenarios_to_csv(const ScenarioSet& set, bool header) {
  const int width = set.width();
  std::string out;
  if (header) {
    for (const char* prefix : {"alpha_", "p_d_", "q_d_"}) {
      for (int j = 0; j < width; ++j) {
        if (!out.empty()) out += ',';
        out += prefix + std::to_string(j + 2);
      }
    }
    out += '\n';
  }
  for (int k = 0; k < set.count(); ++k) {
    bool first = true;
    for (const Matrix* m : {&set.alpha(), &set.p_demand(), &set.q_demand()}) {
      for (int j = 0; j < width; ++j) {
        if (!first) out += ',';
        first = false;
        out += format_double((*m)(k, j));
      }
    }
    out += '\n';
  }
  return out;
}

void save_scenarios(const ScenarioSet& set, const std::filesystem::path& path, bool header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write scenario file " + path.string());
  out << scenarios_to_csv(set, header);
}

std::vector<int> subsample_indices(int count, int m, std::uint64_t seed) {
  require(m >= 1 && m <= count, ErrorKind::BadCount,
          "subsample size " + std::to_string(m) + " outside [1, " + std::to_string(count) + "]");
  std::vector<int> idx(static_cast<std::size_t>(count));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first m slots are a uniform m-subset.
  for (int i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(i) + uniform_below(rng, static_cast<std::uint64_t>(count - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  return idx;
}

ScenarioSet subsample(const ScenarioSet& set, int m, std::uint64_t seed) {
  return set.rows(subsample_indices(set.count(), m, seed));
}

std::string scenario_digest(const ScenarioSet& set) { return sha256_hex(scenarios_to_csv(set)); }

}  // namespace hostcap
