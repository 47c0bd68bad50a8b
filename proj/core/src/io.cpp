#include "percloud/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "percloud/rng.hpp"

namespace percloud {
namespace {

constexpr char kMagic[4] = {'P', 'C', 'L', 'D'};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_double(const std::string& token, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError("bad numeric token '" + token + "' in " + context);
  return value;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

PointCloud read_xyz_text(std::istream& in, const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  Eigen::Index cols = -1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    if (tokens.size() < 3)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected at least 3 columns");
    std::vector<double> row;
    row.reserve(tokens.size());
    for (const auto& t : tokens)
      row.push_back(parse_double(t, path + ":" + std::to_string(lineno)));
    if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": ragged row (expected " + std::to_string(cols) +
                            " columns)");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no points");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Matrix coords(n, 3), features(n, cols - 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) coords(i, j) = rows[i][j];
    for (Eigen::Index j = 3; j < cols; ++j) features(i, j - 3) = rows[i][j];
  }
  return PointCloud(std::move(coords), std::move(features));
}

PointCloud read_ply_ascii(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || split_ws(line) != std::vector<std::string>{"ply"})
    throw ParseError(path + ": missing 'ply' header");

  std::size_t vertex_count = 0;
  bool in_vertex_element = false;
  bool saw_vertex_element = false;
  // name -> column position among vertex properties
  std::vector<std::string> vertex_props;
  // elements declared after vertex whose data lines must be skipped
  std::vector<std::pair<std::string, std::size_t>> other_elements;

  while (std::getline(in, line)) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "comment") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii")
        throw ParseError(path + ": only ascii PLY is supported");
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError(path + ": malformed element line");
      if (tok[1] == "vertex") {
        vertex_count = std::stoul(tok[2]);
        in_vertex_element = true;
        saw_vertex_element = true;
      } else {
        in_vertex_element = false;
        other_elements.emplace_back(tok[1], std::stoul(tok[2]));
        std::cerr << "warning: " << path << ": ignoring element '" << tok[1]
                  << "'\n";
      }
    } else if (tok[0] == "property") {
      if (in_vertex_element) {
        if (tok.size() < 3) throw ParseError(path + ": malformed property");
        if (tok[1] == "list")
          throw ParseError(path + ": list properties unsupported on vertex");
        vertex_props.push_back(tok.back());
      }
    } else if (tok[0] == "end_header") {
      break;
    } else {
      throw ParseError(path + ": unexpected header line '" + tok[0] + "'");
    }
  }
  if (!saw_vertex_element) throw ParseError(path + ": no vertex element");
  if (vertex_count == 0) throw ParseError(path + ": zero vertices");

  int xi = -1, yi = -1, zi = -1;
  std::vector<int> feature_cols;
  for (std::size_t i = 0; i < vertex_props.size(); ++i) {
    if (vertex_props[i] == "x")
      xi = static_cast<int>(i);
    else if (vertex_props[i] == "y")
      yi = static_cast<int>(i);
    else if (vertex_props[i] == "z")
      zi = static_cast<int>(i);
    else
      feature_cols.push_back(static_cast<int>(i));
  }
  if (xi < 0 || yi < 0 || zi < 0)
    throw ParseError(path + ": vertex element lacks x/y/z properties");

  const Eigen::Index n = static_cast<Eigen::Index>(vertex_count);
  Matrix coords(n, 3);
  Matrix features(n, static_cast<Eigen::Index>(feature_cols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw ParseError(path + ": truncated vertex data");
    const auto tok = split_ws(line);
    if (tok.size() != vertex_props.size())
      throw ParseError(path + ": vertex row has " + std::to_string(tok.size()) +
                       " values, expected " +
                       std::to_string(vertex_props.size()));
    const std::string ctx = path + " vertex " + std::to_string(i);
    coords(i, 0) = parse_double(tok[xi], ctx);
    coords(i, 1) = parse_double(tok[yi], ctx);
    coords(i, 2) = parse_double(tok[zi], ctx);
    for (std::size_t f = 0; f < feature_cols.size(); ++f)
      features(i, static_cast<Eigen::Index>(f)) =
          parse_double(tok[feature_cols[f]], ctx);
  }
  return PointCloud(std::move(coords), std::move(features));
}

PointCloud read_packed_binary(std::istream& in, const std::string& path) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError(path + ": bad magic (expected PCLD)");
  std::uint32_t n = 0, d0 = 0;
  if (!in.read(reinterpret_cast<char*>(&n), 4) ||
      !in.read(reinterpret_cast<char*>(&d0), 4))
    throw ParseError(path + ": truncated header");
  if (n == 0) throw ParseError(path + ": zero points");

  Matrix coords(n, 3), features(n, d0);
  std::vector<double> buf(3 + static_cast<std::size_t>(d0));
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), 24))
      throw ParseError(path + ": truncated coords");
    for (int j = 0; j < 3; ++j) coords(i, j) = buf[j];
  }
  for (std::uint32_t i = 0; i < n && d0 > 0; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(8) * d0))
      throw ParseError(path + ": truncated features");
    for (std::uint32_t j = 0; j < d0; ++j) features(i, j) = buf[j];
  }
  return PointCloud(std::move(coords), std::move(features));
}

void write_text_row(std::ostream& out, const PointCloud& c, Eigen::Index i) {
  char buf[32];
  for (Eigen::Index j = 0; j < 3; ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", c.coords()(i, j));
    out << (j ? " " : "") << buf;
  }
  for (Eigen::Index j = 0; j < c.feature_dim(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", c.features()(i, j));
    out << ' ' << buf;
  }
  out << '\n';
}

}  // namespace

CloudFormat parse_format(const std::string& name) {
  const std::string n = lower(name);
  if (n == "xyz-text" || n == "xyz") return CloudFormat::kXyzText;
  if (n == "ply-ascii" || n == "ply") return CloudFormat::kPlyAscii;
  if (n == "packed-binary" || n == "bin") return CloudFormat::kPackedBinary;
  throw BadParams("unknown cloud format '" + name + "'");
}

std::string format_name(CloudFormat format) {
  switch (format) {
    case CloudFormat::kXyzText: return "xyz-text";
    case CloudFormat::kPlyAscii: return "ply-ascii";
    case CloudFormat::kPackedBinary: return "packed-binary";
  }
  return "?";
}

CloudFormat format_from_path(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : lower(path.substr(dot + 1));
  if (ext == "xyz" || ext == "txt") return CloudFormat::kXyzText;
  if (ext == "ply") return CloudFormat::kPlyAscii;
  return CloudFormat::kPackedBinary;
}

PointCloud read_cloud(const std::string& path, CloudFormat format) {
  std::ifstream in(path, format == CloudFormat::kPackedBinary
                             ? std::ios::binary
                             : std::ios::in);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  switch (format) {
    case CloudFormat::kXyzText: return read_xyz_text(in, path);
    case CloudFormat::kPlyAscii: return read_ply_ascii(in, path);
    case CloudFormat::kPackedBinary: return read_packed_binary(in, path);
  }
  throw BadParams("unhandled format");
}

void write_cloud(const PointCloud& cloud, const std::string& path,
                 CloudFormat format) {
  std::ofstream out(path, format == CloudFormat::kPackedBinary
                              ? std::ios::binary
                              : std::ios::out);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  const Eigen::Index n = cloud.size();
  switch (format) {
    case CloudFormat::kXyzText: {
      for (Eigen::Index i = 0; i < n; ++i) write_text_row(out, cloud, i);
      break;
    }
    case CloudFormat::kPlyAscii: {
      out << "ply\nformat ascii 1.0\n";
      out << "element vertex " << n << "\n";
      out << "property double x\nproperty double y\nproperty double z\n";
      for (Eigen::Index j = 0; j < cloud.feature_dim(); ++j)
        out << "property double f" << j << "\n";
      out << "end_header\n";
      for (Eigen::Index i = 0; i < n; ++i) write_text_row(out, cloud, i);
      break;
    }
    case CloudFormat::kPackedBinary: {
      out.write(kMagic, 4);
      const std::uint32_t un = static_cast<std::uint32_t>(n);
      const std::uint32_t ud = static_cast<std::uint32_t>(cloud.feature_dim());
      out.write(reinterpret_cast<const char*>(&un), 4);
      out.write(reinterpret_cast<const char*>(&ud), 4);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) {
          const double v = cloud.coords()(i, j);
          out.write(reinterpret_cast<const char*>(&v), 8);
        }
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < cloud.feature_dim(); ++j) {
          const double v = cloud.features()(i, j);
          out.write(reinterpret_cast<const char*>(&v), 8);
        }
      break;
    }
  }
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<std::uint32_t> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::uint32_t> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    errno = 0;
    char* end = nullptr;
    const unsigned long v = std::strtoul(tok[0].c_str(), &end, 10);
    if (end == tok[0].c_str() || *end != '\0' || errno == ERANGE ||
        tok[0][0] == '-')
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad label");
    if (v > kMaxLabel)
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": label exceeds 2^16 - 1");
    labels.push_back(static_cast<std::uint32_t>(v));
  }
  return labels;
}

void write_labels(const std::vector<std::uint32_t>& labels,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (std::uint32_t l : labels) out << l << '\n';
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

LabeledCloud subsample(const LabeledCloud& input, std::uint32_t m,
                       std::uint64_t seed) {
  const auto n = static_cast<std::uint32_t>(input.size());
  if (m < 1 || m > n)
    throw BadParams("subsample size must be in [1, N]");
  if (m == n) return input;

  // Partial Fisher-Yates: first m slots of a shuffled index array.
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  Rng rng(seed);
  for (std::uint32_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.uniform_index(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);

  std::vector<std::uint32_t> labels(m);
  for (std::uint32_t i = 0; i < m; ++i) labels[i] = input.labels()[idx[i]];
  return LabeledCloud(input.cloud().select(idx), std::move(labels));
}

}  // namespace percloud
