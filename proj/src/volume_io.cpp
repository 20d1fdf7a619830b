#include "vxgan/volume_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "binary_io.hpp"

namespace vxgan {

namespace detail {

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

void write_vxv(const std::filesystem::path& path, const Volume& v) {
  detail::ByteWriter w;
  w.bytes("VXV1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(v.dims().z));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(v.dims().y));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(v.dims().x));
  const VoxelSize vs = v.voxel_size().value_or(VoxelSize{});
  w.put<float>(static_cast<float>(vs.z));
  w.put<float>(static_cast<float>(vs.y));
  w.put<float>(static_cast<float>(vs.x));
  for (Index i = 0; i < v.voxels().size(); ++i) w.put<float>(static_cast<float>(v.voxels()[i]));
  detail::write_file_atomic(path, w.buffer());
}

Volume read_vxv(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path), path.string());
  if (r.remaining() < 4 || r.bytes(4) != "VXV1") throw FormatError(path.string() + ": not a VXV1 file");
  Dims d;
  d.z = r.get<std::uint32_t>();
  d.y = r.get<std::uint32_t>();
  d.x = r.get<std::uint32_t>();
  VoxelSize vs;
  vs.z = r.get<float>();
  vs.y = r.get<float>();
  vs.x = r.get<float>();
  if (d.z == 0 || d.y == 0 || d.x == 0) throw FormatError(path.string() + ": zero extent");
  if (r.remaining() != static_cast<std::size_t>(d.count()) * sizeof(float))
    throw FormatError(path.string() + ": voxel payload does not match header dims");
  Array voxels(d.count());
  for (Index i = 0; i < voxels.size(); ++i) voxels[i] = r.get<float>();
  std::optional<VoxelSize> size;
  if (vs.z != 0.0 || vs.y != 0.0 || vs.x != 0.0) size = vs;
  return Volume(d, std::move(voxels), size);
}

Volume import_raw_u8(const std::filesystem::path& path, Dims dims, std::optional<VoxelSize> voxel_size) {
  const auto bytes = detail::read_file(path);
  if (static_cast<Index>(bytes.size()) != dims.count())
    throw FormatError(path.string() + ": expected " + std::to_string(dims.count()) + " bytes, found " +
                      std::to_string(bytes.size()));
  Array voxels(dims.count());
  for (Index i = 0; i < voxels.size(); ++i)
    voxels[i] = static_cast<float>(static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)]) / 255.0);
  return Volume(dims, std::move(voxels), voxel_size);
}

std::vector<std::uint8_t> export_raw_u8(const Volume& v) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(v.voxels().size()));
  for (Index i = 0; i < v.voxels().size(); ++i)
    out[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(std::clamp(std::lround(v.voxels()[i] * 255.0), 0L, 255L));
  return out;
}

}  // namespace vxgan
