#include "trajnorm/synthetic.hpp"

#include <cmath>
#include <random>

namespace trajnorm {

std::vector<BoundingBoxRecord> synthesize_crossing_scene(const SyntheticSceneConfig& cfg, std::uint64_t seed) {
  if (!cfg.bounds.valid()) throw Error("synthetic scene: invalid bounds");
  if (cfg.cars < 0 || cfg.pedestrians < 0) throw Error("synthetic scene: negative object count");
  if (!(cfg.road_y >= 0 && cfg.road_y <= 1 && cfg.crosswalk_x >= 0 && cfg.crosswalk_x <= 1))
    throw Error("synthetic scene: corridor positions must lie inside the frame");
  if (!(cfg.car_speed > 0 && cfg.pedestrian_speed > 0)) throw Error("synthetic scene: speeds must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, cfg.jitter_sigma > 0 ? cfg.jitter_sigma : 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& b = cfg.bounds;
  const double cx = b.x_min + cfg.crosswalk_x * (b.x_max - b.x_min);
  const double cy = b.y_min + cfg.road_y * (b.y_max - b.y_min);

  std::vector<BoundingBoxRecord> records;
  std::int64_t next_id = 1;

  auto emit_object = [&](ClassLabel label, bool horizontal, bool forward, double speed, double offset,
                         std::int64_t start_frame, double box_w, double box_h) {
    const double lo = horizontal ? b.x_min : b.y_min;
    const double hi = horizontal ? b.x_max : b.y_max;
    const auto frames = static_cast<std::int64_t>(std::floor((hi - lo) / speed));
    const std::int64_t id = next_id++;
    for (std::int64_t f = 0; f <= frames; ++f) {
      const double along = forward ? lo + speed * static_cast<double>(f) : hi - speed * static_cast<double>(f);
      double x = horizontal ? along : cx + offset;
      double y = horizontal ? cy + offset : along;
      if (cfg.jitter_sigma > 0) {
        x += jitter(rng);
        y += jitter(rng);
      }
      BoundingBoxRecord r;
      r.frame_index = start_frame + f;
      r.object_id = id;
      r.label = label;
      r.x_min = x - 0.5 * box_w;
      r.x_max = x + 0.5 * box_w;
      r.y_min = y - 0.5 * box_h;
      r.y_max = y + 0.5 * box_h;
      records.push_back(r);
    }
  };

  for (int i = 0; i < cfg.cars; ++i) {
    const double speed = cfg.car_speed * (0.9 + 0.2 * unit(rng));
    const double offset = cfg.car_corridor_half_width * (2.0 * unit(rng) - 1.0);
    emit_object(ClassLabel::car, true, i % 2 == 0, speed, offset, 15 * i, 40.0, 20.0);
  }
  for (int i = 0; i < cfg.pedestrians; ++i) {
    const double speed = cfg.pedestrian_speed * (0.9 + 0.2 * unit(rng));
    const double offset = cfg.pedestrian_corridor_half_width * (2.0 * unit(rng) - 1.0);
    emit_object(ClassLabel::pedestrian, false, i % 2 == 0, speed, offset, 20 * i, 10.0, 24.0);
  }
  return records;
}

SyntheticBenchmark make_crossing_benchmark(std::uint64_t seed, const SyntheticSceneConfig& scene,
                                           const AugmentConfig& augment, int straight_count, int rotated_count) {
  SyntheticBenchmark bench;
  bench.bounds = scene.bounds;
  bench.tracks = extract_tracks(synthesize_crossing_scene(scene, derive_seed(seed, "scene"))).tracks;

  AugmentConfig aug = augment;
  aug.rng_seed = derive_seed(seed, "augment");
  bench.normal = build_corpus(bench.tracks, aug);

  StraightAbnormalConfig straight;
  straight.bounds = scene.bounds;
  straight.count = straight_count;
  straight.speed_min = scene.pedestrian_speed;
  straight.speed_max = scene.car_speed;
  straight.headings_deg = {45.0, 135.0, 225.0, 315.0};
  const Corpus lines = gen_straight_abnormal(straight, derive_seed(seed, "straight"));

  RealisticAbnormalConfig realistic;
  realistic.transforms = {AbnormalTransform::rotate};
  realistic.count = rotated_count;
  realistic.bounds = scene.bounds;
  realistic.rotation_deg = 90.0;
  const auto rotated = gen_realistic_abnormal(bench.tracks, realistic, derive_seed(seed, "realistic"));

  bench.abnormal.resize(lines.rows() + rotated.samples.rows(), kPackedWidth);
  bench.abnormal.topRows(lines.rows()) = lines;
  bench.abnormal.bottomRows(rotated.samples.rows()) = rotated.samples;
  bench.abnormal_provenance.assign(static_cast<std::size_t>(lines.rows()), "straight");
  bench.abnormal_provenance.insert(bench.abnormal_provenance.end(), rotated.provenance.begin(),
                                   rotated.provenance.end());
  return bench;
}

}  // namespace trajnorm
