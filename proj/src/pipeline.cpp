#include "trajnorm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace trajnorm {

ExtractResult extract_tracks(const std::vector<BoundingBoxRecord>& records) {
  if (records.empty()) throw Error("extract_tracks: no bounding-box records");

  std::map<std::int64_t, std::vector<const BoundingBoxRecord*>> by_object;
  for (const auto& r : records) {
    if (r.frame_index < 0) throw Error("negative frame index for object " + std::to_string(r.object_id));
    if (r.x_min > r.x_max || r.y_min > r.y_max) {
      throw Error("inverted bounding box for object " + std::to_string(r.object_id) + " at frame " +
                  std::to_string(r.frame_index));
    }
    by_object[r.object_id].push_back(&r);
  }

  ExtractResult result;
  for (const auto& [id, boxes] : by_object) {
    if (boxes.size() < 2) {
      ++result.skipped_single_frame;
      continue;
    }
    ObjectTrack track;
    track.object_id = id;
    track.label = boxes.front()->label;
    track.points.reserve(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const auto& b = *boxes[i];
      if (i > 0 && b.frame_index <= boxes[i - 1]->frame_index) {
        throw Error("object " + std::to_string(id) + ": frame indices not strictly increasing (" +
                    std::to_string(boxes[i - 1]->frame_index) + " then " +
                    std::to_string(b.frame_index) + ")");
      }
      if (b.label != track.label) {
        throw Error("object " + std::to_string(id) + ": class label changes at frame " +
                    std::to_string(b.frame_index));
      }
      TrackPoint p;
      p.t = static_cast<double>(b.frame_index);
      p.x = 0.5 * (b.x_min + b.x_max);
      p.y = 0.5 * (b.y_min + b.y_max);
      track.points.push_back(p);
    }
    recompute_velocities(track);
    result.tracks.push_back(std::move(track));
  }
  return result;
}

void recompute_velocities(ObjectTrack& track) {
  auto& pts = track.points;
  if (pts.size() < 2) throw Error("track " + std::to_string(track.object_id) + " has fewer than 2 points");
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dt = pts[i].t - pts[i - 1].t;
    pts[i].vx = (pts[i].x - pts[i - 1].x) / dt;
    pts[i].vy = (pts[i].y - pts[i - 1].y) / dt;
  }
  pts[0].vx = pts[1].vx;
  pts[0].vy = pts[1].vy;
}

std::size_t stretched_length(std::size_t length, int window, int stride) {
  if (window < 1 || stride < 1) throw Error("window and stride must be positive");
  const auto w = static_cast<std::size_t>(window);
  const auto s = static_cast<std::size_t>(stride);
  if (length <= w) return w;
  return w + (length - w + s - 1) / s * s;
}

ObjectTrack stretch_track(const ObjectTrack& track, int window, int stride) {
  const std::size_t n = track.size();
  if (n < 2) throw Error("stretch_track: track needs at least 2 points");
  const std::size_t target = stretched_length(n, window, stride);
  if (target == n) return track;

  ObjectTrack out;
  out.object_id = track.object_id;
  out.label = track.label;
  out.points.resize(target);
  const double scale = static_cast<double>(n - 1) / static_cast<double>(target - 1);
  for (std::size_t j = 0; j < target; ++j) {
    const double s = static_cast<double>(j) * scale;
    auto i0 = std::min(static_cast<std::size_t>(s), n - 2);
    const double f = s - static_cast<double>(i0);
    const auto& a = track.points[i0];
    const auto& b = track.points[i0 + 1];
    auto& p = out.points[j];
    p.t = a.t + f * (b.t - a.t);
    p.x = a.x + f * (b.x - a.x);
    p.y = a.y + f * (b.y - a.y);
  }
  recompute_velocities(out);
  return out;
}

std::vector<TrajectoryWindow> decompose(const ObjectTrack& track, int window, int stride) {
  if (window != kWindowLength) throw Error("decompose: window length must be 31");
  if (stride < 1) throw Error("decompose: stride must be positive");
  const std::size_t n = track.size();
  const auto w = static_cast<std::size_t>(window);
  const auto s = static_cast<std::size_t>(stride);
  if (n < w || (n - w) % s != 0) {
    throw Error("decompose: track of length " + std::to_string(n) +
                " is not decomposable; stretch it first");
  }
  std::vector<TrajectoryWindow> windows;
  windows.reserve((n - w) / s + 1);
  for (std::size_t start = 0; start + w <= n; start += s) {
    TrajectoryWindow tw;
    tw.label = track.label;
    for (std::size_t k = 0; k < w; ++k) {
      const auto& p = track.points[start + k];
      tw.points[k] = {p.x, p.y, p.vx, p.vy};
    }
    windows.push_back(tw);
  }
  return windows;
}

std::vector<ObjectTrack> augment_track(const ObjectTrack& track, const AugmentConfig& cfg) {
  if (cfg.count_per_track < 0) throw Error("augment: count_per_track must be non-negative");
  if (!(cfg.position_noise_sigma >= 0)) throw Error("augment: noise sigma must be non-negative");

  std::vector<ObjectTrack> out;
  out.reserve(static_cast<std::size_t>(cfg.count_per_track));
  if (cfg.position_noise_sigma == 0.0) {
    out.assign(static_cast<std::size_t>(cfg.count_per_track), track);
    return out;
  }
  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> noise(0.0, cfg.position_noise_sigma);
  for (int c = 0; c < cfg.count_per_track; ++c) {
    ObjectTrack copy = track;
    for (auto& p : copy.points) {
      p.x += noise(rng);
      p.y += noise(rng);
    }
    recompute_velocities(copy);
    out.push_back(std::move(copy));
  }
  return out;
}

PackedSample pack(const TrajectoryWindow& window) {
  PackedSample s;
  s(0) = static_cast<double>(static_cast<int>(window.label));
  for (int i = 0; i < kWindowLength; ++i) {
    const auto& p = window.points[static_cast<std::size_t>(i)];
    s(1 + 4 * i) = p.x;
    s(2 + 4 * i) = p.y;
    s(3 + 4 * i) = p.vx;
    s(4 + 4 * i) = p.vy;
  }
  return s;
}

TrajectoryWindow unpack(const Eigen::Ref<const PackedSample>& sample) {
  const double label = sample(0);
  if (label != std::floor(label) || !is_valid_label(static_cast<int>(label))) {
    throw Error("unpack: label slot must be 0, 1 or 2");
  }
  TrajectoryWindow w;
  w.label = static_cast<ClassLabel>(static_cast<int>(label));
  for (int i = 0; i < kWindowLength; ++i) {
    w.points[static_cast<std::size_t>(i)] = {sample(1 + 4 * i), sample(2 + 4 * i),
                                             sample(3 + 4 * i), sample(4 + 4 * i)};
  }
  return w;
}

namespace {

void append_windows(const ObjectTrack& track, std::vector<TrajectoryWindow>& out) {
  auto windows = decompose(stretch_track(track));
  out.insert(out.end(), windows.begin(), windows.end());
}

Corpus pack_all(const std::vector<TrajectoryWindow>& windows) {
  Corpus corpus(static_cast<Eigen::Index>(windows.size()), kPackedWidth);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    corpus.row(static_cast<Eigen::Index>(i)) = pack(windows[i]);
  }
  return corpus;
}

}  // namespace

Corpus build_corpus(const std::vector<ObjectTrack>& tracks, const AugmentConfig& cfg) {
  std::vector<TrajectoryWindow> windows;
  for (const auto& track : tracks) {
    append_windows(track, windows);
    AugmentConfig per_track = cfg;
    per_track.rng_seed = derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(track.object_id));
    for (const auto& copy : augment_track(track, per_track)) append_windows(copy, windows);
  }
  return pack_all(windows);
}

Corpus build_corpus(const std::vector<BoundingBoxRecord>& records, const AugmentConfig& cfg) {
  return build_corpus(extract_tracks(records).tracks, cfg);
}

Corpus stack_samples(const std::vector<PackedSample>& samples) {
  Corpus corpus(static_cast<Eigen::Index>(samples.size()), kPackedWidth);
  for (std::size_t i = 0; i < samples.size(); ++i) corpus.row(static_cast<Eigen::Index>(i)) = samples[i];
  return corpus;
}

SceneBounds bounds_of(const std::vector<ObjectTrack>& tracks) {
  SceneBounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& t : tracks) {
    for (const auto& p : t.points) {
      b.x_min = std::min(b.x_min, p.x);
      b.y_min = std::min(b.y_min, p.y);
      b.x_max = std::max(b.x_max, p.x);
      b.y_max = std::max(b.y_max, p.y);
    }
  }
  if (!b.valid()) throw Error("bounds_of: tracks do not span a two-dimensional area");
  return b;
}

Corpus gen_straight_abnormal(const StraightAbnormalConfig& cfg, std::uint64_t rng_seed) {
  if (cfg.count < 0) throw Error("straight abnormal: count must be non-negative");
  if (!cfg.bounds.valid()) throw Error("straight abnormal: invalid scene bounds");
  if (!(cfg.speed_min >= 0 && cfg.speed_min <= cfg.speed_max)) {
    throw Error("straight abnormal: speed range must satisfy 0 <= min <= max");
  }
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<int> label_dist(0, 2);
  std::uniform_real_distribution<double> x_dist(cfg.bounds.x_min, cfg.bounds.x_max);
  std::uniform_real_distribution<double> y_dist(cfg.bounds.y_min, cfg.bounds.y_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Corpus corpus(cfg.count, kPackedWidth);
  for (int n = 0; n < cfg.count; ++n) {
    TrajectoryWindow w;
    w.label = static_cast<ClassLabel>(label_dist(rng));
    const double x0 = x_dist(rng);
    const double y0 = y_dist(rng);
    double heading = 0.0;
    if (cfg.headings_deg.empty()) {
      heading = 2.0 * std::numbers::pi * unit(rng);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, cfg.headings_deg.size() - 1);
      heading = cfg.headings_deg[pick(rng)] * std::numbers::pi / 180.0;
    }
    const double speed = cfg.speed_min + (cfg.speed_max - cfg.speed_min) * unit(rng);
    const double vx = speed * std::cos(heading);
    const double vy = speed * std::sin(heading);
    for (int i = 0; i < kWindowLength; ++i) {
      w.points[static_cast<std::size_t>(i)] = {x0 + i * vx, y0 + i * vy, vx, vy};
    }
    corpus.row(n) = pack(w);
  }
  return corpus;
}

std::string_view transform_name(AbnormalTransform transform) {
  switch (transform) {
    case AbnormalTransform::label_swap:
      return "label_swap";
    case AbnormalTransform::rotate:
      return "rotate";
    case AbnormalTransform::mirror:
      return "mirror";
    case AbnormalTransform::translate_offroad:
      return "translate_offroad";
  }
  return "unknown";
}

std::optional<AbnormalTransform> parse_transform(std::string_view name) {
  for (auto t : {AbnormalTransform::label_swap, AbnormalTransform::rotate, AbnormalTransform::mirror,
                 AbnormalTransform::translate_offroad}) {
    if (transform_name(t) == name) return t;
  }
  return std::nullopt;
}

ObjectTrack swap_label(const ObjectTrack& track, ClassLabel new_label) {
  ObjectTrack out = track;
  out.label = new_label;
  return out;
}

ObjectTrack rotate_track(const ObjectTrack& track, double cx, double cy, double degrees) {
  const double a = degrees * std::numbers::pi / 180.0;
  double c = std::cos(a);
  double s = std::sin(a);
  // Snap quarter turns so that e.g. 90 degrees maps (1,0) to exactly (0,1).
  if (std::abs(c) < 1e-15) c = 0.0;
  if (std::abs(s) < 1e-15) s = 0.0;
  ObjectTrack out = track;
  for (auto& p : out.points) {
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    p.x = cx + c * dx - s * dy;
    p.y = cy + s * dx + c * dy;
    const double vx = p.vx;
    p.vx = c * vx - s * p.vy;
    p.vy = s * vx + c * p.vy;
  }
  return out;
}

ObjectTrack mirror_track(const ObjectTrack& track, double axis_x) {
  ObjectTrack out = track;
  for (auto& p : out.points) {
    p.x = 2.0 * axis_x - p.x;
    p.vx = -p.vx;
  }
  return out;
}

ObjectTrack translate_track(const ObjectTrack& track, double dx, double dy) {
  ObjectTrack out = track;
  for (auto& p : out.points) {
    p.x += dx;
    p.y += dy;
  }
  return out;
}

AbnormalSet gen_realistic_abnormal(const std::vector<ObjectTrack>& tracks,
                                   const RealisticAbnormalConfig& cfg, std::uint64_t rng_seed) {
  if (cfg.transforms.empty()) throw Error("realistic abnormal: transform set is empty");
  if (cfg.count < 0) throw Error("realistic abnormal: count must be non-negative");
  if (cfg.count > 0 && tracks.empty()) throw Error("realistic abnormal: no source tracks");

  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<std::size_t> pick_track(0, tracks.empty() ? 0 : tracks.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_transform(0, cfg.transforms.size() - 1);
  std::uniform_int_distribution<int> pick_other(1, 2);

  AbnormalSet set;
  set.samples.resize(cfg.count, kPackedWidth);
  set.provenance.reserve(static_cast<std::size_t>(cfg.count));
  for (int n = 0; n < cfg.count; ++n) {
    const auto& source = tracks[pick_track(rng)];
    const auto transform = cfg.transforms[pick_transform(rng)];
    ObjectTrack t;
    switch (transform) {
      case AbnormalTransform::label_swap: {
        const int other = (static_cast<int>(source.label) + pick_other(rng)) % 3;
        t = swap_label(source, static_cast<ClassLabel>(other));
        break;
      }
      case AbnormalTransform::rotate:
        t = rotate_track(source, cfg.bounds.center_x(), cfg.bounds.center_y(), cfg.rotation_deg);
        break;
      case AbnormalTransform::mirror:
        t = mirror_track(source, cfg.bounds.center_x());
        break;
      case AbnormalTransform::translate_offroad:
        t = translate_track(source, cfg.offroad_dx, cfg.offroad_dy);
        break;
    }
    const auto windows = decompose(stretch_track(t));
    std::uniform_int_distribution<std::size_t> pick_window(0, windows.size() - 1);
    set.samples.row(n) = pack(windows[pick_window(rng)]);
    set.provenance.emplace_back(transform_name(transform));
  }
  return set;
}

}  // namespace trajnorm
