#include "mgp/datasets.hpp"

#include <cmath>

#include "mgp/parallel.hpp"
#include "mgp/rng.hpp"
#include "wire_io.hpp"

namespace mgp::data {

using nlohmann::json;

const char* to_string(Family f) {
  return f == Family::BouncingGlyphs ? "bouncing_glyphs" : "coloured_shapes";
}

Family family_from_string(const std::string& s) {
  if (s == "bouncing_glyphs") return Family::BouncingGlyphs;
  if (s == "coloured_shapes") return Family::ColouredShapes;
  raise(ErrorKind::ConfigError, "unknown dataset family '" + s + "'");
}

namespace {

// clang-format off
constexpr std::array<std::uint8_t, kGlyphSize * kGlyphSize> kGlyphs[kNumGlyphs] = {
    {0,0,1,0,0,   // plus
     0,0,1,0,0,
     1,1,1,1,1,
     0,0,1,0,0,
     0,0,1,0,0},
    {1,1,1,1,1,   // box
     1,0,0,0,1,
     1,0,0,0,1,
     1,0,0,0,1,
     1,1,1,1,1},
    {1,0,0,0,1,   // ex
     0,1,0,1,0,
     0,0,1,0,0,
     0,1,0,1,0,
     1,0,0,0,1},
    {1,1,1,1,1,   // tee
     0,0,1,0,0,
     0,0,1,0,0,
     0,0,1,0,0,
     0,0,1,0,0},
};
// clang-format on

constexpr std::array<std::pair<int, int>, kNumDirections> kCompass = {{
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1},
}};

// One bounce step along a single axis: specular reflection keeps the glyph
// inside [0, max]. |v| <= 2 <= max, so one reflection is always enough.
void bounce_step(int& p, int& v, int max) {
  p += v;
  if (p < 0) {
    p = -p;
    v = -v;
  } else if (p > max) {
    p = 2 * max - p;
    v = -v;
  }
}

}  // namespace

std::span<const std::uint8_t, kGlyphSize * kGlyphSize> glyph_bitmap(int glyph_id) {
  if (glyph_id < 0 || glyph_id >= kNumGlyphs)
    raise(ErrorKind::ConfigError, "glyph_id out of range");
  return std::span<const std::uint8_t, kGlyphSize * kGlyphSize>(kGlyphs[glyph_id]);
}

std::pair<int, int> compass_direction(int dir_id) {
  if (dir_id < 0 || dir_id >= kNumDirections)
    raise(ErrorKind::ConfigError, "dir_id out of range");
  return kCompass[static_cast<std::size_t>(dir_id)];
}

void render_glyph_sequence(const GlyphFactors& f, int n_frames, int frame_size,
                           std::span<float> out) {
  const int max_pos = frame_size - kGlyphSize;
  if (max_pos < 2)
    raise(ErrorKind::GlyphTooLarge,
          "frame size " + std::to_string(frame_size) + " too small for a bouncing 5x5 glyph");
  const std::int64_t fpx = static_cast<std::int64_t>(frame_size) * frame_size;
  if (out.size() != static_cast<std::size_t>(fpx * n_frames))
    raise(ErrorKind::DimensionMismatch, "render_glyph_sequence: bad output span");

  auto bitmap = glyph_bitmap(f.glyph_id);
  auto [ux, uy] = compass_direction(f.dir_id);
  int vx = ux * f.speed, vy = uy * f.speed;
  int x = f.x0, y = f.y0;

  for (float& p : out) p = -1.0f;
  for (int t = 0; t < n_frames; ++t) {
    float* frame = out.data() + t * fpx;
    for (int gy = 0; gy < kGlyphSize; ++gy)
      for (int gx = 0; gx < kGlyphSize; ++gx)
        if (bitmap[static_cast<std::size_t>(gy * kGlyphSize + gx)] != 0)
          frame[(y + gy) * frame_size + (x + gx)] = 1.0f;
    bounce_step(x, vx, max_pos);
    bounce_step(y, vy, max_pos);
  }
}

Dataset gen_bouncing_glyphs(const ToyVideoSpec& spec) {
  const int max_pos = spec.frame_size - kGlyphSize;
  if (max_pos < 2)
    raise(ErrorKind::GlyphTooLarge, "frame size too small for a bouncing 5x5 glyph");

  Dataset ds;
  ds.video = VideoBatch::zeros(spec.num_sequences, spec.n_frames, 1, spec.frame_size,
                               spec.frame_size);
  ds.labels.family = Family::BouncingGlyphs;
  ds.labels.glyphs.resize(static_cast<std::size_t>(spec.num_sequences));

  parallel_for(spec.num_sequences, [&](std::int64_t i) {
    auto rng = rng::Engine::derive(spec.seed, static_cast<std::uint64_t>(i));
    GlyphFactors f;
    f.glyph_id = static_cast<int>(rng.uniform_int(0, kNumGlyphs - 1));
    f.dir_id = static_cast<int>(rng.uniform_int(0, kNumDirections - 1));
    f.speed = static_cast<int>(rng.uniform_int(1, 2));
    f.x0 = static_cast<int>(rng.uniform_int(0, max_pos));
    f.y0 = static_cast<int>(rng.uniform_int(0, max_pos));
    ds.labels.glyphs[static_cast<std::size_t>(i)] = f;
    render_glyph_sequence(f, spec.n_frames, spec.frame_size,
                          ds.video.sequence(static_cast<int>(i)));
  });

  ds.labels.provenance = {{"family", to_string(spec.family)},
                          {"num_sequences", spec.num_sequences},
                          {"n_frames", spec.n_frames},
                          {"frame_size", spec.frame_size},
                          {"seed", spec.seed}};
  return ds;
}

int scale_notch_at(const ShapeFactors& f, int t) {
  int notch = f.scale0 + t * f.scale_dir;
  if (notch < 1) notch = 1;
  if (notch > kScaleNotches) notch = kScaleNotches;
  return notch;
}

double shape_radius(int notch) { return 1.2 + 0.6 * notch; }

namespace {

bool point_in_shape(int shape_id, double u, double v, double r) {
  switch (shape_id) {
    case 0: {  // square, half-side 0.70 r so the rotated diagonal stays within r
      double a = 0.70 * r;
      return std::fabs(u) <= a && std::fabs(v) <= a;
    }
    case 1: {  // ellipse with 0.6 aspect so rotation is visible
      double uu = u / r, vv = v / (0.6 * r);
      return uu * uu + vv * vv <= 1.0;
    }
    default: {  // triangle (heart proxy): apex up, circumradius r
      const double ax = 0.0, ay = -r;
      const double bx = 0.87 * r, by = 0.62 * r;
      const double cx = -0.87 * r, cy = 0.62 * r;
      auto side = [](double x1, double y1, double x2, double y2, double px, double py) {
        return (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1);
      };
      double s1 = side(ax, ay, bx, by, u, v);
      double s2 = side(bx, by, cx, cy, u, v);
      double s3 = side(cx, cy, ax, ay, u, v);
      bool neg = s1 < 0 || s2 < 0 || s3 < 0;
      bool pos = s1 > 0 || s2 > 0 || s3 > 0;
      return !(neg && pos);
    }
  }
}

}  // namespace

void render_shape_sequence(const ShapeFactors& f, int n_frames, int frame_size,
                           std::span<float> out) {
  const std::int64_t fpx = static_cast<std::int64_t>(frame_size) * frame_size;
  if (out.size() != static_cast<std::size_t>(3 * fpx * n_frames))
    raise(ErrorKind::DimensionMismatch, "render_shape_sequence: bad output span");
  for (float& p : out) p = -1.0f;

  for (int t = 0; t < n_frames; ++t) {
    const double r = shape_radius(scale_notch_at(f, t));
    const int rot = ((f.rot0 + t * f.rot_dir) % kRotNotches + kRotNotches) % kRotNotches;
    const double theta = 2.0 * 3.14159265358979323846 * rot / kRotNotches;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cx = f.x0 + (f.axis == 0 ? t * f.sign : 0);
    const double cy = f.y0 + (f.axis == 1 ? t * f.sign : 0);

    float* frame = out.data() + t * 3 * fpx;
    float* plane = frame + f.colour_id * fpx;
    for (int j = 0; j < frame_size; ++j) {
      for (int i = 0; i < frame_size; ++i) {
        const double px = i + 0.5 - cx;
        const double py = j + 0.5 - cy;
        const double u = ct * px + st * py;
        const double v = -st * px + ct * py;
        if (point_in_shape(f.shape_id, u, v, r)) plane[j * frame_size + i] = 1.0f;
      }
    }
  }
}

Dataset gen_coloured_shapes(const ToyVideoSpec& spec) {
  Dataset ds;
  ds.video = VideoBatch::zeros(spec.num_sequences, spec.n_frames, 3, spec.frame_size,
                               spec.frame_size);
  ds.labels.family = Family::ColouredShapes;
  ds.labels.shapes.resize(static_cast<std::size_t>(spec.num_sequences));

  parallel_for(spec.num_sequences, [&](std::int64_t idx) {
    auto rng = rng::Engine::derive(spec.seed, static_cast<std::uint64_t>(idx));
    ShapeFactors f;
    f.shape_id = static_cast<int>(rng.uniform_int(0, kNumShapes - 1));
    f.colour_id = static_cast<int>(rng.uniform_int(0, kNumColours - 1));
    f.scale_dir = rng.uniform_int(0, 1) == 0 ? -1 : 1;
    f.rot_dir = rng.uniform_int(0, 1) == 0 ? -1 : 1;
    f.axis = static_cast<int>(rng.uniform_int(0, 1));
    f.sign = rng.uniform_int(0, 1) == 0 ? -1 : 1;
    f.scale0 = static_cast<int>(rng.uniform_int(1, kScaleNotches));
    f.rot0 = static_cast<int>(rng.uniform_int(0, kRotNotches - 1));

    // Start centre chosen so the whole trajectory keeps the largest-reached
    // shape fully inside the frame.
    double r_need = 0.0;
    for (int t = 0; t < spec.n_frames; ++t)
      r_need = std::max(r_need, shape_radius(scale_notch_at(f, t)));
    const int lo = static_cast<int>(std::ceil(r_need));
    const int hi = static_cast<int>(std::floor(spec.frame_size - r_need));
    const int travel = (spec.n_frames - 1) * 1;  // 1 px/frame
    int mlo = lo, mhi = hi;
    if (f.sign > 0)
      mhi -= travel;
    else
      mlo += travel;
    if (mlo > mhi)
      raise(ErrorKind::ConfigError, "coloured_shapes: frame too small for motion span");
    const int along = static_cast<int>(rng.uniform_int(mlo, mhi));
    const int across = static_cast<int>(rng.uniform_int(lo, hi));
    f.x0 = f.axis == 0 ? along : across;
    f.y0 = f.axis == 1 ? along : across;

    ds.labels.shapes[static_cast<std::size_t>(idx)] = f;
    render_shape_sequence(f, spec.n_frames, spec.frame_size,
                          ds.video.sequence(static_cast<int>(idx)));
  });

  ds.labels.provenance = {{"family", to_string(spec.family)},
                          {"num_sequences", spec.num_sequences},
                          {"n_frames", spec.n_frames},
                          {"frame_size", spec.frame_size},
                          {"seed", spec.seed}};
  return ds;
}

Dataset generate(const ToyVideoSpec& spec) {
  if (spec.num_sequences < 1) raise(ErrorKind::EmptyDataset, "num_sequences must be >= 1");
  return spec.family == Family::BouncingGlyphs ? gen_bouncing_glyphs(spec)
                                               : gen_coloured_shapes(spec);
}

// ---- MGPD container ----

namespace {

constexpr char kMagic[4] = {'M', 'G', 'P', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

json factors_to_json(const DatasetLabels& labels) {
  json seqs = json::array();
  if (labels.family == Family::BouncingGlyphs) {
    for (const auto& f : labels.glyphs)
      seqs.push_back({{"glyph", f.glyph_id},
                      {"dir", f.dir_id},
                      {"speed", f.speed},
                      {"x0", f.x0},
                      {"y0", f.y0}});
  } else {
    for (const auto& f : labels.shapes)
      seqs.push_back({{"shape", f.shape_id},
                      {"colour", f.colour_id},
                      {"scale_dir", f.scale_dir},
                      {"rot_dir", f.rot_dir},
                      {"axis", f.axis},
                      {"sign", f.sign},
                      {"scale0", f.scale0},
                      {"rot0", f.rot0},
                      {"x0", f.x0},
                      {"y0", f.y0}});
  }
  return json{{"family", to_string(labels.family)},
              {"provenance", labels.provenance},
              {"sequences", seqs}};
}

DatasetLabels factors_from_json(const json& j) {
  DatasetLabels labels;
  labels.family = family_from_string(j.at("family").get<std::string>());
  labels.provenance = j.value("provenance", json::object());
  for (const auto& s : j.at("sequences")) {
    if (labels.family == Family::BouncingGlyphs) {
      labels.glyphs.push_back(GlyphFactors{s.at("glyph").get<int>(), s.at("dir").get<int>(),
                                           s.at("speed").get<int>(), s.at("x0").get<int>(),
                                           s.at("y0").get<int>()});
    } else {
      labels.shapes.push_back(ShapeFactors{
          s.at("shape").get<int>(), s.at("colour").get<int>(), s.at("scale_dir").get<int>(),
          s.at("rot_dir").get<int>(), s.at("axis").get<int>(), s.at("sign").get<int>(),
          s.at("scale0").get<int>(), s.at("rot0").get<int>(), s.at("x0").get<int>(),
          s.at("y0").get<int>()});
    }
  }
  return labels;
}

}  // namespace

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) raise(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  wire::put_u32(os, kFormatVersion);
  wire::put_u32(os, static_cast<std::uint32_t>(ds.video.batch));
  wire::put_u32(os, static_cast<std::uint32_t>(ds.video.n_frames));
  wire::put_u32(os, static_cast<std::uint32_t>(ds.video.channels));
  wire::put_u32(os, static_cast<std::uint32_t>(ds.video.height));
  wire::put_u32(os, static_cast<std::uint32_t>(ds.video.width));
  wire::put_f32(os, ds.video.pixels);
  const std::string labels = factors_to_json(ds.labels).dump();
  wire::put_u32(os, static_cast<std::uint32_t>(labels.size()));
  wire::put_bytes(os, labels);
  if (!os) raise(ErrorKind::IoError, "write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) raise(ErrorKind::IoError, "cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4) raise(ErrorKind::TruncatedFile, "dataset header: short read");
  if (std::memcmp(magic, kMagic, 4) != 0)
    raise(ErrorKind::BadMagic, "not an MGPD dataset file: " + path.string());
  const std::uint32_t version = wire::get_u32(is, "dataset version");
  if (version != kFormatVersion)
    raise(ErrorKind::VersionMismatch,
          "dataset format version " + std::to_string(version) + " (expected " +
              std::to_string(kFormatVersion) + ")");

  Dataset ds;
  const auto batch = wire::get_u32(is, "dataset dims");
  const auto frames = wire::get_u32(is, "dataset dims");
  const auto channels = wire::get_u32(is, "dataset dims");
  const auto height = wire::get_u32(is, "dataset dims");
  const auto width = wire::get_u32(is, "dataset dims");
  ds.video.batch = static_cast<int>(batch);
  ds.video.n_frames = static_cast<int>(frames);
  ds.video.channels = static_cast<int>(channels);
  ds.video.height = static_cast<int>(height);
  ds.video.width = static_cast<int>(width);
  ds.video.pixels.resize(static_cast<std::size_t>(ds.video.total_px()));
  wire::get_f32(is, ds.video.pixels, "dataset pixels");

  const auto labels_len = wire::get_u32(is, "dataset labels");
  const std::string labels = wire::get_bytes(is, labels_len, "dataset labels");
  try {
    ds.labels = factors_from_json(json::parse(labels));
  } catch (const json::exception& e) {
    raise(ErrorKind::TruncatedFile, std::string("dataset labels: bad JSON block: ") + e.what());
  }
  return ds;
}

}  // namespace mgp::data
