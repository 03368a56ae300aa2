#include "kess/chain_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace kess {

namespace {

std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line_no,
                       const std::string& message) {
  throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + message);
}

// parses "#% manifold=sphere dims=3" (dims comma-separated for grassmann)
std::pair<Manifold, std::vector<int>> parse_directive(const std::filesystem::path& path,
                                                      std::size_t line_no,
                                                      const std::string& line) {
  std::istringstream in(line.substr(2));
  std::string token;
  std::optional<Manifold> manifold;
  std::vector<int> dims;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) fail(path, line_no, "malformed directive token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "manifold") {
      manifold = manifold_from_name(value);
    } else if (key == "dims") {
      std::istringstream ds(value);
      std::string piece;
      while (std::getline(ds, piece, ',')) {
        try {
          dims.push_back(std::stoi(piece));
        } catch (const std::exception&) {
          fail(path, line_no, "bad dims entry '" + piece + "'");
        }
      }
    } else {
      fail(path, line_no, "unknown directive key '" + key + "'");
    }
  }
  if (!manifold) fail(path, line_no, "directive is missing manifold=");
  if (dims.empty()) fail(path, line_no, "directive is missing dims=");
  return {*manifold, dims};
}

std::vector<double> parse_row(const std::filesystem::path& path, std::size_t line_no,
                              const std::string& line) {
  std::vector<double> values;
  const char* ptr = line.data();
  const char* end = line.data() + line.size();
  while (ptr < end) {
    while (ptr < end && (*ptr == ' ' || *ptr == '\t')) ++ptr;
    double v = 0;
    const auto [next, ec] = std::from_chars(ptr, end, v);
    if (ec != std::errc()) {
      fail(path, line_no, "cannot parse a float starting at '" +
                              std::string(ptr, std::min<std::size_t>(8, end - ptr)) + "'");
    }
    values.push_back(v);
    ptr = next;
    while (ptr < end && (*ptr == ' ' || *ptr == '\t')) ++ptr;
    if (ptr < end) {
      if (*ptr != ',') fail(path, line_no, "expected ',' between values");
      ++ptr;
    }
  }
  return values;
}

}  // namespace

Chain read_chain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open chain file '" + path.string() + "'");

  std::string line;
  std::size_t line_no = 0;
  std::optional<Manifold> manifold;
  std::vector<int> dims;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;
  Eigen::Index width = -1;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = strip(line);
    if (text.empty()) continue;
    if (text.rfind("#%", 0) == 0) {
      if (manifold) fail(path, line_no, "duplicate directive");
      auto [m, d] = parse_directive(path, line_no, text);
      manifold = m;
      dims = std::move(d);
      width = point_row_width(*manifold, dims);
      continue;
    }
    if (text[0] == '#') continue;
    if (!manifold) {
      fail(path, line_no, "data before the '#% manifold=... dims=...' directive");
    }
    std::vector<double> values = parse_row(path, line_no, text);
    if (static_cast<Eigen::Index>(values.size()) != width) {
      fail(path, line_no, "row has " + std::to_string(values.size()) + " values, expected " +
                              std::to_string(width));
    }
    rows.push_back(std::move(values));
    row_lines.push_back(line_no);
  }
  if (!manifold) throw ValidationError(path.string() + ": missing directive line");
  if (rows.empty()) throw ValidationError(path.string() + ": no data rows");

  Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < width; ++j) points(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  // validate row-by-row so diagnostics carry file line numbers
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      Chain probe(*manifold, dims, points.row(static_cast<Eigen::Index>(i)));
    } catch (const ValidationError& e) {
      fail(path, row_lines[i], e.what());
    }
  }
  return Chain(*manifold, dims, std::move(points));
}

void write_chain(const std::filesystem::path& path, const Chain& chain) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    out << "#% manifold=" << manifold_name(chain.manifold()) << " dims=";
    for (std::size_t i = 0; i < chain.dims().size(); ++i) {
      out << (i ? "," : "") << chain.dims()[i];
    }
    out << "\n";
    char buf[32];
    for (Eigen::Index t = 0; t < chain.size(); ++t) {
      for (Eigen::Index j = 0; j < chain.row_width(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", chain.points()(t, j));
        out << (j ? "," : "") << buf;
      }
      out << "\n";
    }
    if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace kess
