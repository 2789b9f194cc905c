#pragma once

// Synthetic intersection with two crossing flows: cars on a horizontal
// corridor and pedestrians on a vertical one.

#include <cstdint>
#include <vector>

#include "trajnorm/pipeline.hpp"

namespace trajnorm {

struct SyntheticSceneConfig {
  SceneBounds bounds{0, 0, 1280, 720};
  int cars = 6;
  int pedestrians = 6;
  /// Pixels per frame.
  double car_speed = 12.0;
  double pedestrian_speed = 3.0;
  /// Lateral lane offsets are uniform in +/- these half-widths.
  double car_corridor_half_width = 20.0;
  double pedestrian_corridor_half_width = 15.0;
  /// Where the corridors run, as fractions of the frame: the road at height
  /// `road_y`, the crosswalk at abscissa `crosswalk_x`. Off-center, as in
  /// most fixed camera views; a centered crossing makes a 90 degree turn about
  /// the frame center map each flow onto the other's corridor.
  double road_y = 0.7;
  double crosswalk_x = 0.75;
  /// Per-frame Gaussian jitter of the box center.
  double jitter_sigma = 1.0;
};

/// Annotation records; objects alternate direction within each flow.
std::vector<BoundingBoxRecord> synthesize_crossing_scene(const SyntheticSceneConfig& cfg, std::uint64_t seed);

struct SyntheticBenchmark {
  std::vector<ObjectTrack> tracks;
  Corpus normal;
  Corpus abnormal;
  std::vector<std::string> abnormal_provenance;
  SceneBounds bounds;
};

/// Normal corpus from the crossing scene with `augment` applied; abnormal set
/// = `straight_count` diagonal constant-velocity lines followed by
/// `rotated_count` tracks rotated 90 degrees about the scene center.
SyntheticBenchmark make_crossing_benchmark(std::uint64_t seed, const SyntheticSceneConfig& scene,
                                           const AugmentConfig& augment, int straight_count = 200,
                                           int rotated_count = 200);

}  // namespace trajnorm
