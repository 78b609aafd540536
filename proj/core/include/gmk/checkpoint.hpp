#ifndef GMK_CHECKPOINT_HPP
#define GMK_CHECKPOINT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gmk/codec.hpp"
#include "gmk/tensor.hpp"

namespace gmk {

struct CheckpointMeta {
  int64_t step = 0;
  uint64_t seed = 0;
  std::string config_hash;
  std::string model_kind;  // "dcgan", "vae", ...
  SignPlacement placement;
};

// Portable named-tensor container. File layout: magic "GMK1", u64
// little-endian header size, JSON header (meta + tensor directory with
// name/shape/offset), then contiguous little-endian float32 blobs.
class ModelCheckpoint {
 public:
  CheckpointMeta meta;

  void put(const std::string& name, Tensor t);
  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);
  std::vector<std::string> names() const;
  size_t tensor_count() const { return tensors_.size(); }

  bool equals(const ModelCheckpoint& other) const;  // tensors only, bit-exact

  void save(const std::string& path) const;
  static ModelCheckpoint load(const std::string& path);

 private:
  std::map<std::string, Tensor> tensors_;
};

}  // namespace gmk

#endif
