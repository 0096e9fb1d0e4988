#include "gsc/data_io.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gsc/rng.hpp"

namespace gsc {

namespace {

constexpr std::uint64_t kMemoryGuardBytes = 1ULL << 31;  // 2 GiB dense ceiling

void check_capacity(Eigen::Index rows, Eigen::Index cols) {
  const auto bytes = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * 8ULL;
  if (bytes > kMemoryGuardBytes) {
    throw CapacityError("dataset exceeds the 2 GiB dense-storage guard");
  }
}

double parse_double(const std::string& tok, const std::string& path, std::size_t lineno) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << path << ":" << lineno << ": bad numeric value '" << tok << "'";
    throw ParseError(msg.str());
  }
  return v;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

Dataset load_libsvm(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("load_libsvm: cannot open " + path);

  std::vector<double> labels;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows;
  Eigen::Index max_index = 0;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    // Comments and blank lines are tolerated.
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;

    labels.push_back(parse_double(tok, path, lineno));
    rows.emplace_back();
    auto& row = rows.back();
    Eigen::Index prev = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        std::ostringstream msg;
        msg << path << ":" << lineno << ": expected index:value, got '" << tok << "'";
        throw ParseError(msg.str());
      }
      const std::string idx_s = tok.substr(0, colon);
      char* end = nullptr;
      const long idx = std::strtol(idx_s.c_str(), &end, 10);
      if (end == idx_s.c_str() || *end != '\0' || idx < 1) {
        std::ostringstream msg;
        msg << path << ":" << lineno << ": bad 1-based index '" << idx_s << "'";
        throw ParseError(msg.str());
      }
      if (idx <= prev) {
        std::ostringstream msg;
        msg << path << ":" << lineno << ": indices must be strictly increasing";
        throw ParseError(msg.str());
      }
      prev = idx;
      row.emplace_back(idx - 1, parse_double(tok.substr(colon + 1), path, lineno));
      max_index = std::max<Eigen::Index>(max_index, idx);
    }
  }
  if (rows.empty()) throw ParseError("load_libsvm: " + path + " contains no samples");

  check_capacity(static_cast<Eigen::Index>(rows.size()), max_index);
  Dataset data;
  data.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
  data.y.resize(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.y[static_cast<Eigen::Index>(i)] = labels[i];
    for (const auto& [j, v] : rows[i]) data.x(static_cast<Eigen::Index>(i), j) = v;
  }
  data.provenance = "libsvm:" + path;
  return data;
}

void write_libsvm(const std::string& path, const Dataset& data) {
  std::ofstream os(path);
  if (!os) throw Error("write_libsvm: cannot open " + path);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    os << fmt_double(data.y[i]);
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (data.x(i, j) != 0.0) os << ' ' << (j + 1) << ':' << fmt_double(data.x(i, j));
    }
    os << '\n';
  }
  if (!os) throw Error("write_libsvm: write failed for " + path);
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream is(path);
  if (!is) throw Error("load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(is, line)) throw ParseError("load_csv: " + path + " is empty");
  const auto header = split_fields(strip(line), ',');
  Eigen::Index label_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (strip(header[j]) == label_column) label_idx = static_cast<Eigen::Index>(j);
  }
  if (label_idx < 0) {
    throw ParseError("load_csv: " + path + " has no column named '" + label_column + "'");
  }
  const auto ncols = static_cast<Eigen::Index>(header.size());

  std::vector<double> values;
  std::vector<double> labels;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = strip(line);
    if (s.empty()) continue;
    const auto fields = split_fields(s, ',');
    if (static_cast<Eigen::Index>(fields.size()) != ncols) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": expected " << ncols << " fields, got " << fields.size();
      throw ParseError(msg.str());
    }
    for (Eigen::Index j = 0; j < ncols; ++j) {
      const double v = parse_double(strip(fields[static_cast<std::size_t>(j)]), path, lineno);
      if (j == label_idx) {
        labels.push_back(v);
      } else {
        values.push_back(v);
      }
    }
  }
  if (labels.empty()) throw ParseError("load_csv: " + path + " contains no samples");

  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto d = ncols - 1;
  check_capacity(n, d);
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.y[i] = labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) {
      data.x(i, j) = values[static_cast<std::size_t>(i * d + j)];
    }
  }
  data.provenance = "csv:" + path;
  return data;
}

Dataset standardize(Dataset data) {
  const auto n = data.rows();
  if (n < 2) throw DomainError("standardize: need at least two rows");
  data.mean = data.x.colwise().mean();
  data.std.resize(data.cols());
  data.unscaled_columns.clear();
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    data.x.col(j).array() -= data.mean[j];
    const double var = data.x.col(j).squaredNorm() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
      data.x.col(j) /= sd;
      data.std[j] = sd;
    } else {
      data.std[j] = 1.0;
      data.unscaled_columns.push_back(j);
    }
  }
  if (!data.provenance.empty()) data.provenance += "|standardized";
  return data;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw DomainError("split: test fraction must lie in [0,1)");
  }
  const auto n = data.rows();
  const auto n_test = static_cast<Eigen::Index>(std::llround(test_fraction * static_cast<double>(n)));
  SplitMix64 rng(seed);
  const auto perm = rng.permutation(n);

  auto take = [&](Eigen::Index begin, Eigen::Index count) {
    Dataset part;
    part.x.resize(count, data.cols());
    part.y.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      part.x.row(i) = data.x.row(perm[static_cast<std::size_t>(begin + i)]);
      part.y[i] = data.y[perm[static_cast<std::size_t>(begin + i)]];
    }
    part.mean = data.mean;
    part.std = data.std;
    part.unscaled_columns = data.unscaled_columns;
    part.provenance = data.provenance;
    return part;
  };
  return {take(n_test, n - n_test), take(0, n_test)};
}

Dataset synth_logistic(Eigen::Index n, Eigen::Index d, double margin, double noise,
                       std::uint64_t seed) {
  if (n < 1 || d < 1) throw DomainError("synth_logistic: need n, d >= 1");
  if (!(noise >= 0.0 && noise <= 0.5)) throw DomainError("synth_logistic: noise in [0, 0.5]");
  check_capacity(n, d);
  SplitMix64 rng(seed);

  Eigen::VectorXd sep(d);
  for (Eigen::Index j = 0; j < d; ++j) sep[j] = rng.normal();
  sep.normalize();

  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.x(i, j) = rng.normal();
    const double score = data.x.row(i).dot(sep);
    const double side = score >= 0 ? 1.0 : -1.0;
    data.x.row(i) += margin * side * sep.transpose();
    double label = side;
    if (noise > 0.0 && rng.uniform01() < noise) label = -label;
    data.y[i] = label;
  }
  data.provenance = "synth_logistic";
  return data;
}

Dataset synth_two_moons(Eigen::Index n, double noise, std::uint64_t seed) {
  if (n < 2) throw DomainError("synth_two_moons: need n >= 2");
  check_capacity(n, 2);
  SplitMix64 rng(seed);

  Dataset data;
  data.x.resize(n, 2);
  data.y.resize(n);
  const double pi = 3.14159265358979323846;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool upper = i % 2 == 0;
    const double t = pi * rng.uniform01();
    double px, py;
    if (upper) {
      px = std::cos(t);
      py = std::sin(t);
    } else {
      px = 1.0 - std::cos(t);
      py = 0.5 - std::sin(t);
    }
    data.x(i, 0) = px + noise * rng.normal();
    data.x(i, 1) = py + noise * rng.normal();
    data.y[i] = upper ? 1.0 : -1.0;
  }
  data.provenance = "synth_two_moons";
  return data;
}

}  // namespace gsc
