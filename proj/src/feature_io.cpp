#include "decaygraph/feature_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "decaygraph/errors.hpp"

namespace decaygraph {

FeatureMatrix::FeatureMatrix(std::span<const LabeledEdge> edges) {
  for (auto& c : columns_) c.reserve(edges.size());
  labels_.reserve(edges.size());
  for (const auto& e : edges) {
    const auto v = e.features.values();
    for (std::size_t f = 0; f < kFeatureCount; ++f) columns_[f].push_back(v[f]);
    labels_.push_back(e.label);
  }
}

std::array<double, kFeatureCount> FeatureMatrix::row(std::size_t r) const {
  std::array<double, kFeatureCount> out;
  for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = columns_[f][r];
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw DataError("number formatting failed");
  return std::string(buf, ptr);
}

namespace {

constexpr std::string_view kHeader =
    "source,target,d_i,d_j,c_i,c_j,c_ij,c_ji,p_ij,p_ji,cn,in,jn,injn,jnin,fdate,edate,class";

bool is_fraction(std::size_t f) {
  const auto feat = static_cast<Feature>(f);
  return feat == Feature::p_ij || feat == Feature::p_ji || feat == Feature::fdate ||
         feat == Feature::edate;
}

}  // namespace

void write_features(std::ostream& out, std::span<const LabeledEdge> edges) {
  out << kHeader << '\n';
  std::string line;
  for (const auto& e : edges) {
    line.clear();
    line += e.source;
    line += ',';
    line += e.target;
    const auto v = e.features.values();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      line += ',';
      if (is_fraction(f)) {
        line += format_double(v[f]);
      } else {
        line += std::to_string(static_cast<std::int64_t>(v[f]));
      }
    }
    line += ',';
    line += e.label ? '1' : '0';
    line += '\n';
    out << line;
  }
}

void write_features_file(const std::string& path, std::span<const LabeledEdge> edges) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write feature file: " + path);
  write_features(out, edges);
  if (!out) throw DataError("write failed: " + path);
}

std::vector<LabeledEdge> read_features(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("feature file: empty input");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw DataError("feature file: unexpected header");
  std::vector<LabeledEdge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fail = [&]() -> void {
      throw DataError("feature file line " + std::to_string(line_no) + ": malformed row");
    };
    std::string_view rest = line;
    std::vector<std::string_view> f;
    while (true) {
      auto c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    if (f.size() != kFeatureCount + 3 || f[0].empty() || f[1].empty()) fail();
    LabeledEdge e;
    e.source = std::string(f[0]);
    e.target = std::string(f[1]);
    std::array<double, kFeatureCount> v{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      const auto s = f[k + 2];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v[k]);
      if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v[k])) fail();
    }
    e.features = EdgeFeatureVector::from_values(v);
    if (f.back() == "1") {
      e.label = 1;
    } else if (f.back() == "0") {
      e.label = 0;
    } else {
      fail();
    }
    edges.push_back(std::move(e));
  }
  return edges;
}

std::vector<LabeledEdge> read_features_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature file: " + path);
  return read_features(in);
}

}  // namespace decaygraph
