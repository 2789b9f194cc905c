#pragma once

// Trajectory extraction, augmentation, windowing and packing, plus the
// abnormal-trajectory generators used to build test sets.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trajnorm/common.hpp"

namespace trajnorm {

struct BoundingBoxRecord {
  std::int64_t frame_index = 0;
  std::int64_t object_id = 0;
  ClassLabel label = ClassLabel::pedestrian;
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};

/// One observation of a road user: time in frames, center position in
/// pixels, velocity in pixels per frame.
struct TrackPoint {
  double t = 0, x = 0, y = 0, vx = 0, vy = 0;
};

struct ObjectTrack {
  std::int64_t object_id = 0;
  ClassLabel label = ClassLabel::pedestrian;
  std::vector<TrackPoint> points;

  std::size_t size() const { return points.size(); }
};

/// Kinematic state of one window point.
struct WindowPoint {
  double x = 0, y = 0, vx = 0, vy = 0;
  friend bool operator==(const WindowPoint&, const WindowPoint&) = default;
};

struct TrajectoryWindow {
  ClassLabel label = ClassLabel::pedestrian;
  std::array<WindowPoint, kWindowLength> points{};
  friend bool operator==(const TrajectoryWindow&, const TrajectoryWindow&) = default;
};

struct AugmentConfig {
  int count_per_track = 50;
  double position_noise_sigma = 2.0;
  std::uint64_t rng_seed = 0;
};

struct ExtractResult {
  std::vector<ObjectTrack> tracks;
  /// Objects dropped because they were seen in a single frame.
  std::size_t skipped_single_frame = 0;
};

/// Groups records by object, takes box centers and backward finite-difference
/// velocities (per frame gap; the first point copies the second's velocity).
/// Throws when an object's frame indices are not strictly increasing in
/// record order, or when its class label changes.
ExtractResult extract_tracks(const std::vector<BoundingBoxRecord>& records);

/// Recomputes velocities in place from positions and times.
void recompute_velocities(ObjectTrack& track);

/// Smallest L' >= max(length, window) with (L' - window) divisible by stride.
std::size_t stretched_length(std::size_t length, int window = kWindowLength,
                             int stride = kWindowStride);

/// Resamples the track by linear interpolation over the point index to
/// stretched_length(); a track that is already decomposable is returned as is.
ObjectTrack stretch_track(const ObjectTrack& track, int window = kWindowLength,
                          int stride = kWindowStride);

/// Windows of a stretched track; window k covers points [k*stride, k*stride+window).
std::vector<TrajectoryWindow> decompose(const ObjectTrack& track, int window = kWindowLength,
                                        int stride = kWindowStride);

/// cfg.count_per_track copies with i.i.d. Gaussian position noise; velocities
/// are recomputed from the perturbed positions.
std::vector<ObjectTrack> augment_track(const ObjectTrack& track, const AugmentConfig& cfg);

PackedSample pack(const TrajectoryWindow& window);
/// Inverse of pack(); throws if the label slot is not 0, 1 or 2.
TrajectoryWindow unpack(const Eigen::Ref<const PackedSample>& sample);

/// Packs the windows of every track and of its augmented copies, in track
/// order, original first. Each track's augmentation seed is derived from
/// cfg.rng_seed and the object id.
Corpus build_corpus(const std::vector<ObjectTrack>& tracks, const AugmentConfig& cfg);
Corpus build_corpus(const std::vector<BoundingBoxRecord>& records, const AugmentConfig& cfg);

Corpus stack_samples(const std::vector<PackedSample>& samples);

struct SceneBounds {
  double x_min = 0, y_min = 0, x_max = 640, y_max = 480;

  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  bool valid() const { return x_min < x_max && y_min < y_max; }
};

/// Smallest box containing every point of every track.
SceneBounds bounds_of(const std::vector<ObjectTrack>& tracks);

struct StraightAbnormalConfig {
  SceneBounds bounds;
  int count = 0;
  double speed_min = 1.0;
  double speed_max = 10.0;
  /// Allowed headings in degrees; empty means uniform over the circle.
  std::vector<double> headings_deg;
};

/// Constant-velocity 31-point lines with random start, heading, speed and label.
Corpus gen_straight_abnormal(const StraightAbnormalConfig& cfg, std::uint64_t rng_seed);

enum class AbnormalTransform { label_swap, rotate, mirror, translate_offroad };

std::string_view transform_name(AbnormalTransform transform);
std::optional<AbnormalTransform> parse_transform(std::string_view name);

struct RealisticAbnormalConfig {
  std::vector<AbnormalTransform> transforms;
  int count = 0;
  /// Scene used for the rotation center and mirror axis.
  SceneBounds bounds;
  double rotation_deg = 90.0;
  double offroad_dx = 0.0;
  double offroad_dy = 200.0;
};

struct AbnormalSet {
  Corpus samples;
  /// Generator that produced each row, e.g. "straight" or "rotate".
  std::vector<std::string> provenance;
};

/// Each sample comes from a randomly chosen real track, a randomly chosen
/// transform, and a randomly chosen window of the transformed, stretched track.
AbnormalSet gen_realistic_abnormal(const std::vector<ObjectTrack>& tracks,
                                   const RealisticAbnormalConfig& cfg, std::uint64_t rng_seed);

ObjectTrack swap_label(const ObjectTrack& track, ClassLabel new_label);
/// Rigid rotation of positions about (cx, cy); velocities rotate identically.
ObjectTrack rotate_track(const ObjectTrack& track, double cx, double cy, double degrees);
/// Reflection across the vertical line x = axis_x.
ObjectTrack mirror_track(const ObjectTrack& track, double axis_x);
ObjectTrack translate_track(const ObjectTrack& track, double dx, double dy);

}  // namespace trajnorm
