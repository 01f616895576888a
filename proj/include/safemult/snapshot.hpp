#pragma once

#include <map>
#include <string>

#include "safemult/mlp.hpp"

namespace safemult::nn {

// Named container of networks and scalars, written as a flat binary blob.
// Each network entry starts with its layer-size header followed by the
// parameters in flatten() order; see docs in the README. Writing the same
// contents always produces the same bytes.
class Snapshot {
 public:
  void put(const std::string& name, const Mlp& net);
  void put(const std::string& name, double scalar);

  const Mlp& get_mlp(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  bool has(const std::string& name) const;

  void save(const std::string& path) const;
  static Snapshot load(const std::string& path);

 private:
  std::map<std::string, Mlp> nets_;
  std::map<std::string, double> scalars_;
};

}  // namespace safemult::nn
