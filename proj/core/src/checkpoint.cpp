#include "gmk/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace gmk {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian float32");

void ModelCheckpoint::put(const std::string& name, Tensor t) {
  tensors_[name] = std::move(t);
}

bool ModelCheckpoint::has(const std::string& name) const {
  return tensors_.count(name) != 0;
}

const Tensor& ModelCheckpoint::get(const std::string& name) const {
  auto it = tensors_.find(name);
  require(it != tensors_.end(), ErrorKind::NotFound,
          "checkpoint: no tensor named " + name);
  return it->second;
}

Tensor& ModelCheckpoint::get(const std::string& name) {
  auto it = tensors_.find(name);
  require(it != tensors_.end(), ErrorKind::NotFound,
          "checkpoint: no tensor named " + name);
  return it->second;
}

std::vector<std::string> ModelCheckpoint::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [name, _] : tensors_) out.push_back(name);
  return out;
}

bool ModelCheckpoint::equals(const ModelCheckpoint& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (const auto& [name, t] : tensors_) {
    auto it = other.tensors_.find(name);
    if (it == other.tensors_.end() || !t.equals(it->second)) return false;
  }
  return true;
}

void ModelCheckpoint::save(const std::string& path) const {
  json dir = json::array();
  uint64_t offset = 0;
  for (const auto& [name, t] : tensors_) {
    dir.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size() * sizeof(float);
  }
  json header = {
      {"version", 1},
      {"meta",
       {{"step", meta.step},
        {"seed", meta.seed},
        {"config_hash", meta.config_hash},
        {"model_kind", meta.model_kind},
        {"placement",
         {{"layer_names", meta.placement.layer_names},
          {"channel_counts", meta.placement.channel_counts}}}}},
      {"tensors", dir},
  };
  std::string hstr = header.dump();

  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorKind::Io, "checkpoint save: cannot open " + path);
  os.write("GMK1", 4);
  uint64_t hsize = hstr.size();
  os.write(reinterpret_cast<const char*>(&hsize), 8);
  os.write(hstr.data(), static_cast<std::streamsize>(hstr.size()));
  for (const auto& [name, t] : tensors_) {
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
  require(os.good(), ErrorKind::Io, "checkpoint save: write failed for " + path);
}

ModelCheckpoint ModelCheckpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorKind::Io, "checkpoint load: cannot open " + path);

  char magic[4];
  is.read(magic, 4);
  require(is.gcount() == 4 && std::memcmp(magic, "GMK1", 4) == 0,
          ErrorKind::BadFormat, "checkpoint load: corrupt header (bad magic)");
  uint64_t hsize = 0;
  is.read(reinterpret_cast<char*>(&hsize), 8);
  require(is.gcount() == 8, ErrorKind::BadFormat,
          "checkpoint load: corrupt header (truncated size)");
  std::string hstr(hsize, '\0');
  is.read(hstr.data(), static_cast<std::streamsize>(hsize));
  require(static_cast<uint64_t>(is.gcount()) == hsize, ErrorKind::BadFormat,
          "checkpoint load: corrupt header (truncated json)");

  json header;
  try {
    header = json::parse(hstr);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::BadFormat,
                std::string("checkpoint load: corrupt header (") + e.what() + ")");
  }

  ModelCheckpoint ck;
  const json& meta = header.at("meta");
  ck.meta.step = meta.at("step").get<int64_t>();
  ck.meta.seed = meta.at("seed").get<uint64_t>();
  ck.meta.config_hash = meta.at("config_hash").get<std::string>();
  ck.meta.model_kind = meta.at("model_kind").get<std::string>();
  ck.meta.placement.layer_names =
      meta.at("placement").at("layer_names").get<std::vector<std::string>>();
  ck.meta.placement.channel_counts =
      meta.at("placement").at("channel_counts").get<std::vector<int>>();

  for (const auto& entry : header.at("tensors")) {
    std::string name = entry.at("name").get<std::string>();
    std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
    require(static_cast<size_t>(is.gcount()) == t.size() * sizeof(float),
            ErrorKind::BadFormat,
            "checkpoint load: truncated blob for tensor " + name);
    ck.tensors_[name] = std::move(t);
  }
  return ck;
}

}  // namespace gmk
