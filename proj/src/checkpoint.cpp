#include "vxgan/checkpoint.hpp"

#include "binary_io.hpp"

namespace vxgan {
namespace {

void put_tensor(detail::ByteWriter& w, const std::string& name, const Shape& shape, const Array& data) {
  if (name.size() > 0xFFFF) throw Error("tensor name too long: " + name);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
  w.bytes(name);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(shape.size()));
  for (Index e : shape) w.put<std::uint32_t>(static_cast<std::uint32_t>(e));
  for (Index i = 0; i < data.size(); ++i) w.put<double>(data[i]);
}

std::pair<std::string, Tensor> get_tensor(detail::ByteReader& r) {
  const auto len = r.get<std::uint16_t>();
  std::string name = r.bytes(len);
  const auto rank = r.get<std::uint8_t>();
  Shape shape(rank);
  for (auto& e : shape) {
    e = r.get<std::uint32_t>();
    if (e == 0) throw FormatError("checkpoint tensor '" + name + "' has a zero extent");
  }
  Array data(shape_size(shape));
  for (Index i = 0; i < data.size(); ++i) data[i] = r.get<double>();
  return {std::move(name), Tensor(std::move(shape), std::move(data), true)};
}

void put_moments(detail::ByteWriter& w, const std::map<std::string, Array>& moments, const ParamSet& params) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(moments.size()));
  for (const auto& [name, tensor] : params) {
    auto it = moments.find(name);
    if (it != moments.end()) put_tensor(w, name, tensor.shape(), it->second);
  }
}

std::map<std::string, Array> get_moments(detail::ByteReader& r) {
  std::map<std::string, Array> out;
  const auto n = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto [name, t] = get_tensor(r);
    out.emplace(std::move(name), t.value());
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const Adam* adam) {
  detail::ByteWriter w;
  w.bytes("VXCK");
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) put_tensor(w, name, t.shape(), t.value());
  if (adam) {
    for (const auto* moments : {&adam->first_moments(), &adam->second_moments()})
      for (const auto& [name, m] : *moments)
        if (!params.contains(name)) throw Error("optimizer state for unknown parameter '" + name + "'");
    w.bytes("ADAM");
    put_moments(w, adam->first_moments(), params);
    put_moments(w, adam->second_moments(), params);
    w.put<std::uint64_t>(adam->timestep());
  }
  detail::write_file_atomic(path, w.buffer());
}

ParamSet load_checkpoint(const std::filesystem::path& path, Adam* adam) {
  detail::ByteReader r(detail::read_file(path), path.string());
  if (r.remaining() < 4 || r.bytes(4) != "VXCK") throw FormatError(path.string() + ": not a VXCK checkpoint");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  ParamSet params;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto [name, t] = get_tensor(r);
    params.add(std::move(name), std::move(t));
  }
  if (!r.at_end()) {
    if (r.bytes(4) != "ADAM") throw FormatError(path.string() + ": unexpected trailing data");
    auto m = get_moments(r);
    auto v = get_moments(r);
    const auto t = r.get<std::uint64_t>();
    if (!r.at_end()) throw FormatError(path.string() + ": unexpected trailing data after ADAM block");
    if (adam) adam->restore(std::move(m), std::move(v), t);
  }
  return params;
}

}  // namespace vxgan
