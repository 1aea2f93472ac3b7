#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spin/cli.hpp"

namespace spin {

namespace {

std::string trimmed(const std::string& line) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  auto b = std::find_if_not(line.begin(), line.end(), is_space);
  auto e = std::find_if_not(line.rbegin(), line.rend(), is_space).base();
  return (b < e) ? std::string(b, e) : std::string();
}

// Full-token parse; rejects trailing junk and non-finite values.
bool parse_real(const std::string& tok, double* out) {
  const char* first = tok.data();
  const char* last = first + tok.size();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return false;
  *out = v;
  return true;
}

}  // namespace

std::vector<double> read_draws(std::istream& in, const std::string& source_name) {
  std::vector<double> draws;
  std::vector<std::string> bad;
  std::string line;
  long line_no = 0;
  bool seen_value = false;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string tok = trimmed(line);
    if (tok.empty()) continue;
    if (!tok.empty() && tok.back() == ',') tok.pop_back();  // single-column CSV rows
    double v = 0.0;
    if (parse_real(tok, &v)) {
      draws.push_back(v);
      seen_value = true;
      header_allowed = false;
      continue;
    }
    if (header_allowed && !seen_value) {  // first contentful line may be a header
      header_allowed = false;
      continue;
    }
    if (bad.size() < 5)
      bad.push_back("line " + std::to_string(line_no) + ": \"" + tok + "\"");
  }
  if (in.bad()) throw std::runtime_error(source_name + ": read error");
  if (!bad.empty()) {
    std::string msg = source_name + ": malformed draws";
    for (const auto& b : bad) msg += "\n  " + b;
    throw std::runtime_error(msg);
  }
  if (draws.empty()) throw std::runtime_error(source_name + ": no draws found");
  return draws;
}

std::vector<double> read_draws_file(const std::string& path) {
  if (path == "-") return read_draws(std::cin, "<stdin>");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  return read_draws(in, path);
}

}  // namespace spin
