#include "vxgan/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace vxgan {
namespace {

struct Harmonic {
  double kz, ky, kx, phase;
};

std::vector<Harmonic> draw_harmonics(Rng& rng, int count, double scale, bool planar) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> freq(0.75 / scale, 1.25 / scale);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<Harmonic> hs;
  for (int i = 0; i < count; ++i) {
    double z = planar ? 0.0 : normal(rng), y = normal(rng), x = normal(rng);
    const double norm = std::max(std::sqrt(z * z + y * y + x * x), 1e-12);
    const double f = 2.0 * std::numbers::pi * freq(rng);
    hs.push_back({f * z / norm, f * y / norm, f * x / norm, phase(rng)});
  }
  return hs;
}

double field(const std::vector<Harmonic>& hs, double z, double y, double x) {
  double s = 0.0;
  for (const auto& h : hs) s += std::cos(h.kz * z + h.ky * y + h.kx * x + h.phase);
  return s / std::sqrt(0.5 * static_cast<double>(hs.size()));
}

Index clamp_index(Index i, Index n) { return std::clamp<Index>(i, 0, n - 1); }

}  // namespace

PhantomTruth generate_phantom(const PhantomConfig& cfg) {
  if (cfg.jitter < 0 || cfg.noise_sigma < 0.0 || cfg.structure_scale < 2.0 || cfg.harmonics < 1 ||
      cfg.drop_count < 0)
    throw ConfigError("phantom: need jitter >= 0, noise_sigma >= 0, structure_scale >= 2, drop_count >= 0");
  const Dims d = cfg.dims;
  if (d.z < 1 || d.y < 1 || d.x < 1 || static_cast<double>(std::min(d.y, d.x)) < cfg.structure_scale)
    throw DegenerateVolume("phantom: in-plane extent smaller than structure_scale");
  if (cfg.drop_count > std::max<Index>(d.z - 2, 0)) throw ConfigError("phantom: too many dropped sections");

  Rng rng(cfg.seed);
  const auto sheets = draw_harmonics(rng, cfg.harmonics, cfg.structure_scale, false);
  const auto texture = draw_harmonics(rng, cfg.harmonics, 0.5 * cfg.structure_scale, false);

  Volume raw(d);
  constexpr double kMembraneWidth = 0.3;
  for (Index z = 0; z < d.z; ++z)
    for (Index y = 0; y < d.y; ++y)
      for (Index x = 0; x < d.x; ++x) {
        const double f = field(sheets, z, y, x);
        const double membrane = std::exp(-0.5 * (f / kMembraneWidth) * (f / kMembraneWidth));
        raw(z, y, x) = -membrane + 0.15 * field(texture, z, y, x);
      }

  PhantomTruth truth;
  truth.clean = normalize(raw);

  std::uniform_int_distribution<Index> shift(-cfg.jitter, cfg.jitter);
  truth.offsets.resize(static_cast<std::size_t>(d.z));
  for (auto& o : truth.offsets) {
    o.dy = shift(rng);
    o.dx = shift(rng);
  }
  truth.degraded = apply_jitter(truth.clean, truth.offsets);

  if (cfg.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (Index i = 0; i < truth.degraded.voxels().size(); ++i) truth.degraded.voxels()[i] += noise(rng);
  }

  if (cfg.drop_count > 0) {
    std::vector<Index> candidates;
    for (Index k = 1; k <= d.z - 2; ++k) candidates.push_back(k);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    truth.dropped_slices.assign(candidates.begin(), candidates.begin() + cfg.drop_count);
    std::sort(truth.dropped_slices.begin(), truth.dropped_slices.end());
    for (Index k : truth.dropped_slices) truth.degraded = drop_slice(truth.degraded, k).first;
  }
  return truth;
}

Volume apply_jitter(const Volume& v, const std::vector<SliceOffset>& offsets) {
  const Dims& d = v.dims();
  if (static_cast<Index>(offsets.size()) != d.z) throw ShapeMismatch("apply_jitter: need one offset per section");
  Volume out(d, Array(d.count()), v.voxel_size());
  for (Index z = 0; z < d.z; ++z) {
    const auto& o = offsets[static_cast<std::size_t>(z)];
    for (Index y = 0; y < d.y; ++y) {
      const Index sy = clamp_index(y - o.dy, d.y);
      for (Index x = 0; x < d.x; ++x) out(z, y, x) = v(z, sy, clamp_index(x - o.dx, d.x));
    }
  }
  return out;
}

std::pair<Volume, Image> drop_slice(const Volume& v, Index k) {
  if (k < 1 || k > v.dims().z - 2)
    throw IndexOutOfRange("drop_slice: section " + std::to_string(k) + " is not interior");
  Volume out = v;
  Image held = v.slice(k);
  out.set_slice(k, Image::Zero(v.dims().y, v.dims().x));
  return {std::move(out), std::move(held)};
}

Volume make_averaging_volume(Dims dims, double noise, std::uint64_t seed) {
  if (dims.z < 3 || dims.y < 4 || dims.x < 4) throw DegenerateVolume("averaging volume needs Z >= 3, Y,X >= 4");
  if (dims.z > 1024) throw ConfigError("averaging volume supports at most 1024 sections");
  Rng rng(seed);
  const double scale = std::clamp(static_cast<double>(std::min(dims.y, dims.x)) / 8.0, 2.0, 16.0);
  const auto base = draw_harmonics(rng, 16, scale, true);
  const auto slope = draw_harmonics(rng, 16, scale, true);
  // Dyadic quantization keeps A + t*B and the neighbour mean exact in double precision.
  constexpr double kGrid = 1.0 / (1 << 20);
  auto quantize = [](double v) { return std::round(std::clamp(v, -7.0, 7.0) / kGrid) * kGrid; };
  Image a(dims.y, dims.x), b(dims.y, dims.x);
  for (Index y = 0; y < dims.y; ++y)
    for (Index x = 0; x < dims.x; ++x) {
      a(y, x) = quantize(field(base, 0, y, x));
      b(y, x) = quantize(field(slope, 0, y, x));
    }
  Volume v(dims);
  std::normal_distribution<double> gauss(0.0, noise);
  for (Index z = 0; z < dims.z; ++z) {
    const double t = static_cast<double>(z - dims.z / 2) / 32.0;
    Image s = a + t * b;
    if (noise > 0.0)
      for (Index i = 0; i < s.size(); ++i) s.data()[i] += gauss(rng);
    v.set_slice(z, s);
  }
  return v;
}

void write_phantom_sidecar(const std::filesystem::path& path, const PhantomTruth& truth) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t z = 0; z < truth.offsets.size(); ++z)
    out << z << ' ' << truth.offsets[z].dy << ' ' << truth.offsets[z].dx << '\n';
  out << "dropped:";
  for (std::size_t i = 0; i < truth.dropped_slices.size(); ++i) out << (i ? "," : " ") << truth.dropped_slices[i];
  out << '\n';
}

std::pair<std::vector<SliceOffset>, std::vector<Index>> read_phantom_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<SliceOffset> offsets;
  std::vector<Index> dropped;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("dropped:", 0) == 0) {
      std::string list = line.substr(8);
      std::replace(list.begin(), list.end(), ',', ' ');
      std::istringstream ls(list);
      for (Index k; ls >> k;) dropped.push_back(k);
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ls(line);
    Index z, dy, dx;
    if (!(ls >> z >> dy >> dx) || z != static_cast<Index>(offsets.size()))
      throw FormatError(path.string() + ": malformed offset line '" + line + "'");
    offsets.push_back({dy, dx});
  }
  return {std::move(offsets), std::move(dropped)};
}

}  // namespace vxgan
