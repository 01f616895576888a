#include "safemult/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace safemult::nn {

namespace {

constexpr char kMagic[8] = {'S', 'M', 'S', 'N', 'A', 'P', '1', '\0'};

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("snapshot: truncated file");
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint16_t>(os, static_cast<std::uint16_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto n = read_pod<std::uint16_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("snapshot: truncated file");
  return s;
}

}  // namespace

void Snapshot::put(const std::string& name, const Mlp& net) {
  nets_[name] = net;
}

void Snapshot::put(const std::string& name, double scalar) {
  scalars_[name] = scalar;
}

const Mlp& Snapshot::get_mlp(const std::string& name) const {
  auto it = nets_.find(name);
  if (it == nets_.end()) {
    throw std::out_of_range("snapshot: no network named '" + name + "'");
  }
  return it->second;
}

double Snapshot::get_scalar(const std::string& name) const {
  auto it = scalars_.find(name);
  if (it == scalars_.end()) {
    throw std::out_of_range("snapshot: no scalar named '" + name + "'");
  }
  return it->second;
}

bool Snapshot::has(const std::string& name) const {
  return nets_.count(name) > 0 || scalars_.count(name) > 0;
}

void Snapshot::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("snapshot: cannot open '" + path + "'");
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os,
                           static_cast<std::uint32_t>(nets_.size() +
                                                      scalars_.size()));
  for (const auto& [name, net] : nets_) {
    write_string(os, name);
    write_pod<std::uint8_t>(os, 0);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.sizes().size()));
    for (int s : net.sizes()) write_pod<std::int32_t>(os, s);
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(net.activation()));
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(net.head()));
    const Vector flat = net.flatten();
    os.write(reinterpret_cast<const char*>(flat.data()),
             static_cast<std::streamsize>(flat.size() * sizeof(double)));
  }
  for (const auto& [name, v] : scalars_) {
    write_string(os, name);
    write_pod<std::uint8_t>(os, 1);
    write_pod<double>(os, v);
  }
  if (!os) throw std::runtime_error("snapshot: write failed for '" + path + "'");
}

Snapshot Snapshot::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("snapshot: bad magic in '" + path + "'");
  }
  Snapshot snap;
  const auto n = read_pod<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string name = read_string(is);
    const auto kind = read_pod<std::uint8_t>(is);
    if (kind == 0) {
      const auto n_sizes = read_pod<std::uint32_t>(is);
      std::vector<int> sizes(n_sizes);
      for (auto& s : sizes) s = read_pod<std::int32_t>(is);
      const auto act = static_cast<Activation>(read_pod<std::uint8_t>(is));
      const auto head = static_cast<Head>(read_pod<std::uint8_t>(is));
      Rng dummy(0);
      Mlp net(sizes, act, head, dummy);
      Vector flat(net.param_count());
      is.read(reinterpret_cast<char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
      if (!is) throw std::runtime_error("snapshot: truncated parameters");
      net.set_from_flat(flat);
      snap.nets_[name] = std::move(net);
    } else if (kind == 1) {
      snap.scalars_[name] = read_pod<double>(is);
    } else {
      throw std::runtime_error("snapshot: unknown entry kind");
    }
  }
  return snap;
}

}  // namespace safemult::nn
