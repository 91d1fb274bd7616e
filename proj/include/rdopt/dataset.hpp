#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rdopt {

/// A point in the normalized 2-D design space. The optimization domain is
/// [0,1]^2; evaluation (and GPR extrapolation) extends to [-0.1,1.1]^2.
struct DesignPoint {
  double x1 = 0.0;
  double x2 = 0.0;

  friend bool operator==(const DesignPoint&, const DesignPoint&) = default;
};

/// Half-open is not needed here: a physical range [lo, hi] with hi > lo.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool valid() const;
};

/// Per-column physical bounds used to map samples to/from the unit range.
struct NormalizationMap {
  Interval x1, x2;  // design inputs (e.g. channel width/height)
  Interval y1, y2;  // outputs (pressure drop, temperature deviation)

  bool valid() const;
};

/// One simulation outcome: a design point plus the two scalar objectives.
struct SampleRecord {
  DesignPoint point;
  double y1 = 0.0;
  double y2 = 0.0;
};

struct SampleSet {
  std::vector<SampleRecord> records;
  NormalizationMap map;
  bool bounds_from_metadata = false;
};

// Scalar normalization: (v - lo)/(hi - lo). Values outside the interval map
// linearly outside [0,1]. Throws ValidationError on non-finite input or an
// invalid interval.
double normalize(double v, const Interval& iv);
double denormalize(double u, const Interval& iv);

std::vector<double> normalize(const std::vector<double>& values,
                              const std::vector<Interval>& intervals);
std::vector<double> denormalize(const std::vector<double>& values,
                                const std::vector<Interval>& intervals);

// Record-level convenience over the four columns of a sample.
SampleRecord normalize(const SampleRecord& r, const NormalizationMap& map);
SampleRecord denormalize(const SampleRecord& r, const NormalizationMap& map);

/// The physical ranges of the original device study: channel width/height
/// inputs and the observed pressure-drop / temperature-deviation spans.
NormalizationMap default_physical_map();

// n_boundary points evenly spaced on the perimeter of [0,1]^2 (corners
// included once each; n_boundary must be >= 4 and divisible by 4) followed by
// n_interior uniform points in the open square, reproducible from the seed.
std::vector<DesignPoint> generate_design(int n_boundary, int n_interior,
                                         std::uint64_t seed);

// Closed-form stand-in for the expensive simulation: smooth on the extended
// domain, y1 driven almost entirely by x1 (a gentle sigmoid ramp), y2 a bowl
// exactly symmetric under x1 <-> x2.
std::pair<double, double> synthetic_cht(const DesignPoint& p);

// CSV schema: optional leading '#' comment lines (a "# bounds:" line carries
// the normalization map), then a "x1,x2,y1,y2" header and one record per
// line. Parse failures throw ParseError naming the line.
SampleSet load_samples(const std::string& path);
void save_samples(const std::string& path, const SampleSet& set);

}  // namespace rdopt
