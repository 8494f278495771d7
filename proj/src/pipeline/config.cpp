#include "pipeline/config.hpp"

#include "core/error.hpp"
#include "geometry/mesh_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace drape {

MlpShape DrapeConfig::network_shape() const {
  return MlpShape{ProgressiveEncoder(encoder).width(), net_layers, net_width, 3};
}

void DrapeConfig::validate() const {
  if (iterations < 1) fail(ErrorCode::InvalidArgument, "iterations must be >= 1");
  if (encoder.blocks < 0) fail(ErrorCode::InvalidArgument, "encoder.blocks must be >= 0");
  if (encoder.reveal_iters < 0 || encoder.reveal_iters > iterations)
    fail(ErrorCode::InvalidArgument, "encoder.reveal_iters must lie in [0, iterations]");
  if (encoder.mode == EncoderMode::Progressive && encoder.blocks > 0 && encoder.reveal_iters == 0)
    fail(ErrorCode::InvalidArgument, "progressive encoding needs encoder.reveal_iters > 0");
  if (net_layers < 0 || net_width < 1) fail(ErrorCode::InvalidArgument, "invalid network dimensions");
  if (!(adam.learning_rate > 0.0)) fail(ErrorCode::InvalidArgument, "optim.lr must be positive");
  if (arap_iterations < 0) fail(ErrorCode::InvalidArgument, "arap.iterations must be >= 0");
  if (snapshot_stride < 1) fail(ErrorCode::InvalidArgument, "snapshot.stride must be >= 1");
  loss.validate();
  metrics.validate();
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& s) {
  T out{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc() || ptr != end) fail(ErrorCode::Parse, "config key '" + key + "': bad number '" + s + "'");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) fail(ErrorCode::Parse, "config key '" + key + "': non-finite value");
  return out;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  fail(ErrorCode::Parse, "config key '" + key + "': bad boolean '" + s + "'");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(*it, prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  if (j.is_string()) out[prefix] = j.get<std::string>();
  else if (j.is_boolean()) out[prefix] = j.get<bool>() ? "true" : "false";
  else if (j.is_number_integer() || j.is_number_unsigned()) out[prefix] = j.dump();
  else if (j.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << j.get<double>();
    out[prefix] = os.str();
  } else
    fail(ErrorCode::Parse, "config key '" + prefix + "' has an unsupported value");
}

}  // namespace

void set_config_value(DrapeConfig& c, const std::string& key, const std::string& v) {
  if (key == "iterations") c.iterations = parse_number<long>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "encoder.mode") c.encoder.mode = parse_encoder_mode(v);
  else if (key == "encoder.blocks") c.encoder.blocks = parse_number<int>(key, v);
  else if (key == "encoder.reveal_iters") c.encoder.reveal_iters = parse_number<long>(key, v);
  else if (key == "net.layers") c.net_layers = parse_number<int>(key, v);
  else if (key == "net.width") c.net_width = parse_number<int>(key, v);
  else if (key == "optim.lr") c.adam.learning_rate = parse_number<double>(key, v);
  else if (key == "optim.beta1") c.adam.beta1 = parse_number<double>(key, v);
  else if (key == "optim.beta2") c.adam.beta2 = parse_number<double>(key, v);
  else if (key == "optim.eps") c.adam.epsilon = parse_number<double>(key, v);
  else if (key == "arap.iterations") c.arap_iterations = parse_number<int>(key, v);
  else if (key == "snapshot.stride") c.snapshot_stride = parse_number<long>(key, v);
  else if (key == "loss.angle") c.loss.angle = parse_bool(key, v);
  else if (key == "loss.area_kl") c.loss.area_kl = parse_bool(key, v);
  else if (key == "loss.quality") c.loss.quality = parse_bool(key, v);
  else if (key == "loss.chamfer") c.loss.chamfer = parse_bool(key, v);
  else if (key == "loss.correspondence") c.loss.correspondence = parse_bool(key, v);
  else if (key == "loss.chamfer_samples") c.loss.chamfer_samples = parse_number<std::size_t>(key, v);
  else if (key == "loss.quality_threshold") c.loss.quality_threshold = parse_number<double>(key, v);
  else if (key == "loss.lambda_before") c.loss.lambda_before = parse_number<double>(key, v);
  else if (key == "loss.lambda_after") c.loss.lambda_after = parse_number<double>(key, v);
  else if (key == "loss.lambda_switch_iter") c.loss.lambda_switch_iter = parse_number<long>(key, v);
  else if (key == "metrics.tau") c.metrics.tau = parse_number<double>(key, v);
  else if (key == "metrics.w_a") c.metrics.w_a = parse_number<double>(key, v);
  else if (key == "metrics.samples") c.metrics.samples = parse_number<std::size_t>(key, v);
  else fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
}

DrapeConfig parse_config(std::string_view text, DrapeConfig base) {
  std::map<std::string, std::string> values;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Parse, std::string("config: ") + e.what());
    }
    flatten(j, "", values);
  } else {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string l = trim(line);
      if (l.empty()) continue;
      const auto eq = l.find('=');
      if (eq == std::string::npos)
        fail(ErrorCode::Parse, "config line " + std::to_string(lineno) + ": expected key = value");
      values[trim(std::string_view(l).substr(0, eq))] = trim(std::string_view(l).substr(eq + 1));
    }
  }
  for (const auto& [k, v] : values) set_config_value(base, k, v);
  base.validate();
  return base;
}

DrapeConfig load_config(const std::filesystem::path& path, DrapeConfig base) {
  return parse_config(read_text_file(path), base);
}

std::string format_config(const DrapeConfig& c) {
  const nlohmann::ordered_json j = {
      {"iterations", c.iterations},
      {"seed", c.seed},
      {"encoder.mode", to_string(c.encoder.mode)},
      {"encoder.blocks", c.encoder.blocks},
      {"encoder.reveal_iters", c.encoder.reveal_iters},
      {"net.layers", c.net_layers},
      {"net.width", c.net_width},
      {"optim.lr", c.adam.learning_rate},
      {"optim.beta1", c.adam.beta1},
      {"optim.beta2", c.adam.beta2},
      {"optim.eps", c.adam.epsilon},
      {"arap.iterations", c.arap_iterations},
      {"snapshot.stride", c.snapshot_stride},
      {"loss.angle", c.loss.angle},
      {"loss.area_kl", c.loss.area_kl},
      {"loss.quality", c.loss.quality},
      {"loss.chamfer", c.loss.chamfer},
      {"loss.correspondence", c.loss.correspondence},
      {"loss.chamfer_samples", c.loss.chamfer_samples},
      {"loss.quality_threshold", c.loss.quality_threshold},
      {"loss.lambda_before", c.loss.lambda_before},
      {"loss.lambda_after", c.loss.lambda_after},
      {"loss.lambda_switch_iter", c.loss.lambda_switch_iter},
      {"metrics.tau", c.metrics.tau},
      {"metrics.w_a", c.metrics.w_a},
      {"metrics.samples", c.metrics.samples},
  };
  return j.dump(2);
}

}  // namespace drape
