#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgp/video.hpp"

namespace mgp::data {

// Procedural desk-scale video families. Generation is a pure function of
// (spec, per-sequence factors); the emitted factor labels are sufficient to
// re-render any sequence bit-exactly, which the tests rely on.

enum class Family { BouncingGlyphs, ColouredShapes };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

struct ToyVideoSpec {
  Family family = Family::BouncingGlyphs;
  int num_sequences = 200;
  int n_frames = 8;
  int frame_size = 16;
  std::uint64_t seed = 0;

  int pixel_channels() const { return family == Family::BouncingGlyphs ? 1 : 3; }
};

// ---- BouncingGlyphs ----
// One 5x5 glyph from a fixed 4-glyph alphabet (static factor) translating at
// 1-2 px/frame along one of 8 compass directions (dynamic factor), with
// specular reflection at the frame walls. Background -1, glyph +1.

inline constexpr int kGlyphSize = 5;
inline constexpr int kNumGlyphs = 4;
inline constexpr int kNumDirections = 8;

std::span<const std::uint8_t, kGlyphSize * kGlyphSize> glyph_bitmap(int glyph_id);
std::pair<int, int> compass_direction(int dir_id);  // (dx, dy), unit steps

struct GlyphFactors {
  int glyph_id = 0;  // 0..3
  int dir_id = 0;    // 0..7
  int speed = 1;     // 1..2 px/frame
  int x0 = 0;        // initial top-left corner
  int y0 = 0;
};

// ---- ColouredShapes ----
// A coloured 2-D shape with per-frame monotone scale notching (clamped at
// notch 1..4), per-frame rotation notching (cyclic, 16 notches), and constant
// 1 px/frame horizontal-or-vertical motion. Background -1 on all channels,
// shape +1 on its colour channel only.

inline constexpr int kNumShapes = 3;   // square, ellipse, triangle
inline constexpr int kNumColours = 3;  // red, green, blue
inline constexpr int kScaleNotches = 4;
inline constexpr int kRotNotches = 16;

struct ShapeFactors {
  int shape_id = 0;   // 0 square, 1 ellipse, 2 triangle
  int colour_id = 0;  // 0 red, 1 green, 2 blue
  int scale_dir = 1;  // +1 grow, -1 shrink (clamped at the notch limits)
  int rot_dir = 1;    // +1 cw, -1 ccw, one notch per frame
  int axis = 0;       // 0 horizontal, 1 vertical
  int sign = 1;       // motion sign along the axis
  int scale0 = 1;     // starting scale notch, 1..4
  int rot0 = 0;       // starting rotation notch, 0..15
  int x0 = 0;         // initial centre (integer pixel coordinates)
  int y0 = 0;
};

int scale_notch_at(const ShapeFactors& f, int t);  // clamped notch schedule
double shape_radius(int notch);

struct DatasetLabels {
  Family family = Family::BouncingGlyphs;
  nlohmann::json provenance;  // generator parameters echoed for provenance
  std::vector<GlyphFactors> glyphs;
  std::vector<ShapeFactors> shapes;

  std::size_t size() const {
    return family == Family::BouncingGlyphs ? glyphs.size() : shapes.size();
  }
};

struct Dataset {
  VideoBatch video;
  DatasetLabels labels;
};

// Deterministic renderers used both by the generators and by the
// labels-are-sufficient-statistics test.
void render_glyph_sequence(const GlyphFactors& f, int n_frames, int frame_size,
                           std::span<float> out);
void render_shape_sequence(const ShapeFactors& f, int n_frames, int frame_size,
                           std::span<float> out);

Dataset gen_bouncing_glyphs(const ToyVideoSpec& spec);
Dataset gen_coloured_shapes(const ToyVideoSpec& spec);
Dataset generate(const ToyVideoSpec& spec);

// "MGPD" container: magic, u32 version, u32 dims header, float32 LE payload,
// length-prefixed JSON label block. Round-trips bit-exactly.
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace mgp::data
