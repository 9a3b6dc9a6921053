#include "dapose/model/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "dapose/util/errors.hpp"

namespace dapose::model {

using util::DataError;
using util::json;

namespace {

constexpr char kMagic[] = "DAPOSE-CKPT-1\n";

json meta_to_json(const CheckpointMeta& m) {
  return {{"stage", m.stage},
          {"cycle", m.cycle},
          {"config_hash", m.config_hash},
          {"schema_name", m.schema_name}};
}

CheckpointMeta meta_from_json(const json& j) {
  CheckpointMeta m;
  m.stage = j.value("stage", "INIT");
  m.cycle = j.value("cycle", int64_t{0});
  m.config_hash = j.value("config_hash", "");
  m.schema_name = j.value("schema_name", "");
  return m;
}

void append_doubles(std::string& out, const std::vector<double>& v) {
  const size_t old = out.size();
  out.resize(old + v.size() * sizeof(double));
  std::memcpy(out.data() + old, v.data(), v.size() * sizeof(double));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const PoseModelBundle& bundle,
                     const CheckpointMeta& meta) {
  json index = json::array();
  std::string payload;
  for (const auto& block : bundle.block_names()) {
    for (const auto* p : bundle.block_params(block)) {
      index.push_back({{"name", p->name},
                       {"block", block},
                       {"shape", p->value.shape},
                       {"steps", p->steps},
                       {"offset", payload.size() / sizeof(double)}});
      append_doubles(payload, p->value.data);
      append_doubles(payload, p->m.data);
      append_doubles(payload, p->v.data);
    }
  }
  const json header = {{"meta", meta_to_json(meta)}, {"params", index}};
  const std::string header_str = header.dump();

  std::string out(kMagic);
  const uint64_t header_len = header_str.size();
  out.append(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out += header_str;
  out += payload;
  util::atomic_write(path, out);
}

namespace {

json read_header(std::ifstream& in, const std::filesystem::path& path) {
  std::string magic(sizeof(kMagic) - 1, '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) throw DataError(path.string() + ": not a checkpoint file");
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError(path.string() + ": truncated checkpoint header");
  return json::parse(header_str);
}

}  // namespace

CheckpointMeta load_checkpoint(const std::filesystem::path& path, PoseModelBundle& bundle) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const json header = read_header(in, path);
  const auto payload_start = in.tellg();

  std::map<std::string, nn::Parameter*> by_name;
  for (const auto& block : bundle.block_names()) {
    for (auto* p : bundle.block_params(block)) by_name[p->name] = p;
  }

  size_t restored = 0;
  for (const auto& entry : header.at("params")) {
    const auto name = entry.at("name").get<std::string>();
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw DataError(path.string() + ": checkpoint parameter '" + name +
                      "' does not exist in this model");
    }
    nn::Parameter* p = it->second;
    const auto shape = entry.at("shape").get<std::vector<int>>();
    if (shape != p->value.shape) {
      throw DataError(path.string() + ": shape mismatch for '" + name + "': checkpoint " +
                      nn::shape_str(shape) + " vs model " + nn::shape_str(p->value.shape));
    }
    p->steps = entry.at("steps").get<int64_t>();
    const auto offset = entry.at("offset").get<uint64_t>();
    in.seekg(payload_start + static_cast<std::streamoff>(offset * sizeof(double)));
    const auto n = static_cast<std::streamsize>(p->value.numel() * sizeof(double));
    in.read(reinterpret_cast<char*>(p->value.data.data()), n);
    in.read(reinterpret_cast<char*>(p->m.data.data()), n);
    in.read(reinterpret_cast<char*>(p->v.data.data()), n);
    if (!in) throw DataError(path.string() + ": truncated payload for '" + name + "'");
    ++restored;
  }
  if (restored != by_name.size()) {
    throw DataError(path.string() + ": checkpoint covers " + std::to_string(restored) + " of " +
                    std::to_string(by_name.size()) + " model parameters");
  }
  return meta_from_json(header.at("meta"));
}

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return meta_from_json(read_header(in, path).at("meta"));
}

}  // namespace dapose::model
