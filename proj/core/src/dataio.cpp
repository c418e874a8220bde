#include "music/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "music/error.hpp"
#include "music/format.hpp"
#include "music/rng.hpp"

namespace music {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// strtod accepts "inf"/"nan" and hex floats; from_chars with the general
// format is the stricter of the two and matches what LIBSVM files contain.
bool parse_real(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_index(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    Sample s;
    if (!parse_real(tokens[0], s.label)) {
      throw ParseError(line_no, "bad label '" + std::string(tokens[0]) + "'");
    }
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const std::string_view tok = tokens[k];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "token '" + std::string(tok) +
                                      "' is not idx:val");
      }
      std::size_t idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx) || idx == 0) {
        throw ParseError(line_no, "bad feature index in '" + std::string(tok) +
                                      "' (indices are 1-based)");
      }
      if (!parse_real(tok.substr(colon + 1), val)) {
        throw ParseError(line_no,
                         "non-numeric value in '" + std::string(tok) + "'");
      }
      s.features.emplace_back(idx - 1, val);
      d.dim = std::max(d.dim, idx);
    }
    std::stable_sort(s.features.begin(), s.features.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 1; k < s.features.size(); ++k) {
      if (s.features[k].first == s.features[k - 1].first) {
        throw ParseError(line_no, "duplicate feature index " +
                                      std::to_string(s.features[k].first + 1));
      }
    }
    d.samples.push_back(std::move(s));
  }
  if (in.bad()) throw IoError("read failure while parsing LIBSVM data");
  return d;
}

Dataset parse_libsvm_string(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open LIBSVM file '" + path + "'");
  try {
    return parse_libsvm(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  }
}

void write_libsvm(std::ostream& out, const Dataset& d) {
  for (const auto& s : d.samples) {
    out << format_double(s.label);
    for (const auto& [idx, val] : s.features) {
      out << ' ' << (idx + 1) << ':' << format_double(val);
    }
    out << '\n';
  }
}

Dataset binary_filter(const Dataset& d, double label_pos, double label_neg) {
  if (label_pos == label_neg) {
    throw std::invalid_argument("binary_filter: labels must differ");
  }
  Dataset out;
  out.dim = d.dim;
  std::size_t pos = 0, neg = 0;
  for (const auto& s : d.samples) {
    if (s.label == label_pos) {
      out.samples.push_back({1.0, s.features});
      ++pos;
    } else if (s.label == label_neg) {
      out.samples.push_back({-1.0, s.features});
      ++neg;
    }
  }
  if (out.samples.empty()) {
    throw Error("binary_filter: no samples carry label " +
                format_double(label_pos) + " or " + format_double(label_neg));
  }
  return out;
}

std::vector<std::vector<std::size_t>> partition(const Dataset& d,
                                                std::size_t n_agents,
                                                std::size_t m_per_agent,
                                                std::uint64_t seed) {
  if (n_agents == 0 || m_per_agent == 0) {
    throw std::invalid_argument("partition: counts must be positive");
  }
  const std::size_t need = n_agents * m_per_agent;
  if (need > d.samples.size()) {
    throw Error("partition: need " + std::to_string(need) + " samples, have " +
                std::to_string(d.samples.size()));
  }
  std::vector<std::size_t> order(d.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Xoshiro256 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<std::vector<std::size_t>> shards(n_agents);
  for (std::size_t a = 0; a < n_agents; ++a) {
    shards[a].assign(order.begin() + static_cast<std::ptrdiff_t>(a * m_per_agent),
                     order.begin() + static_cast<std::ptrdiff_t>((a + 1) * m_per_agent));
  }
  return shards;
}

Matrix densify(const Dataset& d, const std::vector<std::size_t>& rows,
               std::size_t p) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [idx, val] : d.samples.at(rows[r]).features) {
      if (idx >= p) {
        throw DimensionError("feature index " + std::to_string(idx + 1) +
                             " exceeds p=" + std::to_string(p));
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(idx)) = val;
    }
  }
  return out;
}

QuadraticProblem synth_uniform(std::size_t p, std::size_t m,
                               std::size_t n_agents, double mu,
                               std::uint64_t seed) {
  if (p == 0 || m == 0 || n_agents == 0) {
    throw std::invalid_argument("synth_uniform: dimensions must be positive");
  }
  Xoshiro256 rng(seed);
  std::vector<Matrix> a;
  std::vector<Vector> b;
  a.reserve(n_agents);
  b.reserve(n_agents);
  const auto rows = static_cast<Eigen::Index>(p);
  const auto cols = static_cast<Eigen::Index>(m);
  for (std::size_t i = 0; i < n_agents; ++i) {
    Matrix ai(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) ai(r, c) = rng.uniform();
    }
    Vector bi(cols);
    for (Eigen::Index c = 0; c < cols; ++c) bi[c] = rng.uniform();
    a.push_back(std::move(ai));
    b.push_back(std::move(bi));
  }
  return QuadraticProblem(std::move(a), std::move(b), mu);
}

LogisticProblem synth_logistic(std::size_t p, std::size_t m,
                               std::size_t n_agents, double mu,
                               std::uint64_t seed) {
  if (p == 0 || m == 0 || n_agents == 0) {
    throw std::invalid_argument("synth_logistic: dimensions must be positive");
  }
  Xoshiro256 rng(seed);
  const auto dim = static_cast<Eigen::Index>(p);
  Vector planted(dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (Eigen::Index k = 0; k < dim; ++k) planted[k] = scale * rng.normal();

  std::vector<Matrix> h;
  std::vector<Vector> y;
  for (std::size_t i = 0; i < n_agents; ++i) {
    Matrix hi(static_cast<Eigen::Index>(m), dim);
    Vector yi(static_cast<Eigen::Index>(m));
    for (Eigen::Index j = 0; j < hi.rows(); ++j) {
      for (Eigen::Index k = 0; k < dim; ++k) hi(j, k) = rng.normal();
      const double prob = sigmoid(hi.row(j).dot(planted));
      yi[j] = rng.uniform() < prob ? 1.0 : -1.0;
    }
    h.push_back(std::move(hi));
    y.push_back(std::move(yi));
  }
  return LogisticProblem(std::move(h), std::move(y), mu);
}

QuadraticProblem quadratic_from_dataset(
    const Dataset& d, const std::vector<std::vector<std::size_t>>& shards,
    std::size_t p, double mu) {
  std::vector<Matrix> a;
  std::vector<Vector> b;
  for (const auto& rows : shards) {
    a.push_back(densify(d, rows, p).transpose());
    Vector bi(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      bi[static_cast<Eigen::Index>(r)] = d.samples.at(rows[r]).label;
    }
    b.push_back(std::move(bi));
  }
  return QuadraticProblem(std::move(a), std::move(b), mu);
}

LogisticProblem logistic_from_dataset(
    const Dataset& d, const std::vector<std::vector<std::size_t>>& shards,
    std::size_t p, double mu) {
  std::vector<Matrix> h;
  std::vector<Vector> y;
  for (const auto& rows : shards) {
    h.push_back(densify(d, rows, p));
    Vector yi(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      yi[static_cast<Eigen::Index>(r)] = d.samples.at(rows[r]).label;
    }
    y.push_back(std::move(yi));
  }
  return LogisticProblem(std::move(h), std::move(y), mu);
}

}  // namespace music
