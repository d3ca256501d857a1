#include <cmath>

#include "binary_io.hpp"
#include "hotspot/model.hpp"
#include "json.hpp"

namespace hotspot {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "hotspot-mae-checkpoint";

}  // namespace

// Each tensor is stored row-major in its declared shape, tensors concatenated
// in registry order.
void save_checkpoint(const Params& params, const fs::path& dir) {
  if (!all_finite(params)) throw InvariantError("refusing to save a checkpoint with non-finite parameters");
  fs::create_directories(dir);

  json header;
  header["format"] = kFormat;
  header["version"] = 1;
  header["dtype"] = "float32";
  header["byte_order"] = "little";
  header["config"] = json::parse(model_config_to_json(params.config));
  json tensors = json::array();
  for (const auto& info : tensor_registry(params)) tensors.push_back({{"name", info.name}, {"shape", info.shape}});
  header["tensors"] = std::move(tensors);

  std::string blob;
  blob.reserve(parameter_count(params) * 4);
  for_each_tensor(params, [&](const std::string&, const auto& t) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        detail::append_u32_le(blob, std::bit_cast<std::uint32_t>(static_cast<float>(t(r, c))));
      }
    }
  });

  detail::write_file(dir / "header.json", header.dump(2) + "\n");
  detail::write_file(dir / "weights.bin", blob);
}

Params load_checkpoint(const fs::path& path) {
  const fs::path dir = fs::is_directory(path) ? path : path.parent_path();
  json header;
  try {
    header = json::parse(detail::read_file(dir / "header.json"));
    if (header.at("format").get<std::string>() != kFormat) throw FormatError("not a hotspot checkpoint");
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  }
  const ModelConfig config = model_config_from_json(header.at("config").dump());
  Params params = init_params(config, 0);

  const auto registry = tensor_registry(params);
  const auto& declared = header.at("tensors");
  if (declared.size() != registry.size()) throw FormatError("checkpoint tensor count does not match its config");
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (declared[i].at("name").get<std::string>() != registry[i].name ||
        declared[i].at("shape").get<std::vector<int>>() != registry[i].shape) {
      throw FormatError("checkpoint registry mismatch at tensor " + registry[i].name);
    }
  }

  const std::string blob = detail::read_file(dir / "weights.bin");
  if (blob.size() != parameter_count(params) * 4) throw FormatError("weights.bin length does not match the registry");
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  std::size_t pos = 0;
  for_each_tensor(params, [&](const std::string&, auto& t) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c, pos += 4) t(r, c) = static_cast<double>(detail::load_f32_le(p + pos));
    }
  });
  if (!all_finite(params)) throw FormatError("checkpoint holds non-finite weights");
  return params;
}

}  // namespace hotspot
