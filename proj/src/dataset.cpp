#include "rdopt/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "rdopt/csv.hpp"
#include "rdopt/errors.hpp"
#include "rdopt/util.hpp"

namespace rdopt {

bool Interval::valid() const {
  return std::isfinite(lo) && std::isfinite(hi) && hi > lo;
}

bool NormalizationMap::valid() const {
  return x1.valid() && x2.valid() && y1.valid() && y2.valid();
}

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw ValidationError(std::string(what) + ": non-finite value");
  }
}

void require_valid(const Interval& iv) {
  if (!iv.valid()) throw ValidationError("normalization interval with hi <= lo");
}

}  // namespace

double normalize(double v, const Interval& iv) {
  require_valid(iv);
  require_finite(v, "normalize");
  return (v - iv.lo) / (iv.hi - iv.lo);
}

double denormalize(double u, const Interval& iv) {
  require_valid(iv);
  require_finite(u, "denormalize");
  return iv.lo + u * (iv.hi - iv.lo);
}

std::vector<double> normalize(const std::vector<double>& values,
                              const std::vector<Interval>& intervals) {
  if (values.size() != intervals.size()) {
    throw ValidationError("normalize: component count mismatch");
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = normalize(values[i], intervals[i]);
  }
  return out;
}

std::vector<double> denormalize(const std::vector<double>& values,
                                const std::vector<Interval>& intervals) {
  if (values.size() != intervals.size()) {
    throw ValidationError("denormalize: component count mismatch");
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = denormalize(values[i], intervals[i]);
  }
  return out;
}

SampleRecord normalize(const SampleRecord& r, const NormalizationMap& map) {
  return {{normalize(r.point.x1, map.x1), normalize(r.point.x2, map.x2)},
          normalize(r.y1, map.y1),
          normalize(r.y2, map.y2)};
}

SampleRecord denormalize(const SampleRecord& r, const NormalizationMap& map) {
  return {{denormalize(r.point.x1, map.x1), denormalize(r.point.x2, map.x2)},
          denormalize(r.y1, map.y1),
          denormalize(r.y2, map.y2)};
}

NormalizationMap default_physical_map() {
  NormalizationMap map;
  map.x1 = {0.015, 0.5};   // channel width
  map.x2 = {0.05, 0.15};   // channel height
  map.y1 = {50.87, 1437};  // pressure drop (Pa)
  map.y2 = {12.87, 16.29}; // temperature deviation (degC)
  return map;
}

std::vector<DesignPoint> generate_design(int n_boundary, int n_interior,
                                         std::uint64_t seed) {
  if (n_boundary < 4 || n_boundary % 4 != 0) {
    throw ValidationError("generate_design: n_boundary must be >= 4 and divisible by 4");
  }
  if (n_interior < 0) {
    throw ValidationError("generate_design: n_interior must be >= 0");
  }

  std::vector<DesignPoint> points;
  points.reserve(static_cast<std::size_t>(n_boundary + n_interior));

  // Walk the perimeter counterclockwise from (0,0); total arc length 4, so a
  // step of 4/n_boundary puts each corner on a sample when 4 | n_boundary.
  const double step = 4.0 / static_cast<double>(n_boundary);
  for (int i = 0; i < n_boundary; ++i) {
    const double t = step * static_cast<double>(i);
    DesignPoint p;
    if (t < 1.0) {
      p = {t, 0.0};
    } else if (t < 2.0) {
      p = {1.0, t - 1.0};
    } else if (t < 3.0) {
      p = {3.0 - t, 1.0};
    } else {
      p = {0.0, 4.0 - t};
    }
    points.push_back(p);
  }

  std::mt19937_64 rng(seed);
  auto draw_open = [&rng] {
    double u = uniform01(rng);
    while (u == 0.0) u = uniform01(rng);
    return u;
  };
  for (int i = 0; i < n_interior; ++i) {
    const double a = draw_open();
    const double b = draw_open();
    points.push_back({a, b});
  }
  return points;
}

std::pair<double, double> synthetic_cht(const DesignPoint& p) {
  require_finite(p.x1, "synthetic_cht");
  require_finite(p.x2, "synthetic_cht");

  // y1: monotone cubic ramp in x1 (flat near x1 = 0, steep near x1 = 1) with
  // a weak x2 dependence.
  const double y1 =
      0.2 + 0.08 * p.x1 + 0.42 * p.x1 * p.x1 * p.x1 + 0.05 * p.x2 * p.x2;

  // y2: bowl centered at (0.42, 0.42), exactly symmetric under x1 <-> x2.
  const double u1 = p.x1 - 0.42;
  const double u2 = p.x2 - 0.42;
  const double r2 = u1 * u1 + u2 * u2;
  const double y2 = 0.14 + 1.05 * r2 * (0.8 + 0.35 * (u1 + u2));

  return {y1, y2};
}

namespace {

bool parse_double(const std::string& cell, double& out) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

// "# bounds: x1=[a,b] x2=[c,d] y1=[e,f] y2=[g,h]"
bool parse_bounds_comment(const std::string& line, NormalizationMap& map,
                          int line_no) {
  const auto pos = line.find("bounds:");
  if (pos == std::string::npos) return false;

  auto read_interval = [&](const char* name) {
    const std::string key = std::string(name) + "=[";
    const auto k = line.find(key, pos);
    if (k == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": bounds comment missing '" + name + "'");
    }
    const auto comma = line.find(',', k + key.size());
    const auto close = line.find(']', k + key.size());
    if (comma == std::string::npos || close == std::string::npos ||
        comma > close) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": malformed bounds for '" + name + "'");
    }
    Interval iv;
    if (!parse_double(line.substr(k + key.size(), comma - k - key.size()), iv.lo) ||
        !parse_double(line.substr(comma + 1, close - comma - 1), iv.hi)) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": non-numeric bounds for '" + name + "'");
    }
    if (!iv.valid()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": bounds for '" + name + "' need hi > lo");
    }
    return iv;
  };

  map.x1 = read_interval("x1");
  map.x2 = read_interval("x2");
  map.y1 = read_interval("y1");
  map.y2 = read_interval("y2");
  return true;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open samples file: " + path);

  SampleSet set;
  std::string line;
  int line_no = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!header_seen && parse_bounds_comment(line, set.map, line_no)) {
        set.bounds_from_metadata = true;
      }
      continue;
    }
    if (!header_seen) {
      if (line != "x1,x2,y1,y2") {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected header 'x1,x2,y1,y2', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }

    const auto cells = split_csv(line);
    if (cells.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 columns, got " +
                       std::to_string(cells.size()));
    }
    double v[4];
    for (int c = 0; c < 4; ++c) {
      if (!parse_double(cells[static_cast<std::size_t>(c)], v[c]) ||
          !std::isfinite(v[c])) {
        throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell in column " +
                         std::to_string(c + 1));
      }
    }
    for (const auto& r : set.records) {
      if (std::abs(r.point.x1 - v[0]) <= 1e-12 &&
          std::abs(r.point.x2 - v[1]) <= 1e-12) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": duplicate design point (within 1e-12)");
      }
    }
    set.records.push_back({{v[0], v[1]}, v[2], v[3]});
  }
  if (!header_seen) {
    throw ParseError(path + ": missing 'x1,x2,y1,y2' header");
  }

  if (!set.bounds_from_metadata) {
    if (set.records.empty()) {
      throw ParseError(path + ": no records and no bounds metadata");
    }
    auto span_of = [&](auto get) {
      Interval iv{get(set.records.front()), get(set.records.front())};
      for (const auto& r : set.records) {
        iv.lo = std::min(iv.lo, get(r));
        iv.hi = std::max(iv.hi, get(r));
      }
      return iv;
    };
    set.map.x1 = span_of([](const SampleRecord& r) { return r.point.x1; });
    set.map.x2 = span_of([](const SampleRecord& r) { return r.point.x2; });
    set.map.y1 = span_of([](const SampleRecord& r) { return r.y1; });
    set.map.y2 = span_of([](const SampleRecord& r) { return r.y2; });
    if (!set.map.valid()) {
      throw ParseError(path + ": degenerate column ranges, cannot infer bounds");
    }
  }
  return set;
}

void save_samples(const std::string& path, const SampleSet& set) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write samples file: " + path);

  const auto& m = set.map;
  out << "# bounds: x1=[" << fmt17(m.x1.lo) << "," << fmt17(m.x1.hi) << "] x2=["
      << fmt17(m.x2.lo) << "," << fmt17(m.x2.hi) << "] y1=[" << fmt17(m.y1.lo)
      << "," << fmt17(m.y1.hi) << "] y2=[" << fmt17(m.y2.lo) << ","
      << fmt17(m.y2.hi) << "]\n";
  out << "x1,x2,y1,y2\n";
  for (const auto& r : set.records) {
    out << fmt17(r.point.x1) << "," << fmt17(r.point.x2) << "," << fmt17(r.y1)
        << "," << fmt17(r.y2) << "\n";
  }
}

}  // namespace rdopt
