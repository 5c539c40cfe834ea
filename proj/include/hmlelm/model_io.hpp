#pragma once

// Pipeline config JSON and the binary model file.
//
// Model file layout:
//   "HMLELM01"            8 bytes
//   version               uint32 little-endian
//   header length         uint64 little-endian
//   header                JSON, keys sorted, no timings
//   payload               float64 little-endian, arrays in header order

#include <bit>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "hmlelm/data_io.hpp"
#include "hmlelm/hml.hpp"

namespace hml {

using Json = nlohmann::json;

inline Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["layer_sizes"] = c.layer_sizes;
  j["Cs"] = Json::array();
  for (double v : c.Cs) j["Cs"].push_back(std::isinf(v) ? Json("inf") : Json(v));
  j["head"] = to_string(c.head);
  j["head_size"] = c.head_size;
  j["seed"] = c.seed;
  if (c.head_seed) j["head_seed"] = *c.head_seed;
  j["centers"] = to_string(c.centers);
  j["width_scale"] = c.width_scale;
  return j;
}

// Unknown keys are rejected. "input_size" is accepted and checked by callers
// against the data width.
inline PipelineConfig config_from_json(const Json& j, int* input_size = nullptr) {
  require(j.is_object(), ErrorKind::kInvalidArgument, "config: expected a JSON object");
  static const std::vector<std::string> known = {"layer_sizes", "Cs",      "head",        "head_size", "seed",
                                                 "head_seed",   "centers", "width_scale", "input_size"};
  for (const auto& [key, _] : j.items())
    require(std::find(known.begin(), known.end(), key) != known.end(), ErrorKind::kInvalidArgument,
            "config: unknown key " + key);
  PipelineConfig c;
  try {
    c.layer_sizes = j.value("layer_sizes", std::vector<int>{});
    require(j.contains("Cs"), ErrorKind::kInvalidArgument, "config: Cs is required");
    for (const auto& v : j.at("Cs")) c.Cs.push_back(v.is_string() && v.get<std::string>() == "inf" ? kInfinity : v.get<double>());
    c.head = head_from_string(j.value("head", std::string("sit2")));
    c.head_size = j.value("head_size", 40);
    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("head_seed")) c.head_seed = j.at("head_seed").get<std::uint64_t>();
    c.centers = center_init_from_string(j.value("centers", std::string("samples")));
    c.width_scale = j.value("width_scale", 0.0);
    if (input_size) *input_size = j.value("input_size", 0);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline constexpr char kModelMagic[8] = {'H', 'M', 'L', 'E', 'L', 'M', '0', '1'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

class PayloadWriter {
 public:
  Json add(const Matrix& m) {
    Json d = {{"offset", values_.size()}, {"rows", m.rows()}, {"cols", m.cols()}};
    values_.insert(values_.end(), m.data(), m.data() + m.size());
    return d;
  }
  Json add(const Vector& v) { return add(Matrix(Eigen::Map<const Matrix>(v.data(), v.size(), 1))); }
  Json add(const RowVector& v) { return add(Matrix(Eigen::Map<const Matrix>(v.data(), 1, v.size()))); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

class PayloadReader {
 public:
  explicit PayloadReader(std::vector<double> values) : values_(std::move(values)) {}

  Matrix matrix(const Json& d) const {
    const auto off = d.at("offset").get<std::size_t>();
    const auto rows = d.at("rows").get<Eigen::Index>();
    const auto cols = d.at("cols").get<Eigen::Index>();
    require(rows >= 0 && cols >= 0 && off + static_cast<std::size_t>(rows * cols) <= values_.size(), ErrorKind::kDataFormat,
            "model file: array out of range");
    return Eigen::Map<const Matrix>(values_.data() + off, rows, cols);
  }
  Vector vector(const Json& d) const {
    const Matrix m = matrix(d);
    return Eigen::Map<const Vector>(m.data(), m.size());
  }
  RowVector row(const Json& d) const {
    const Matrix m = matrix(d);
    return Eigen::Map<const RowVector>(m.data(), m.size());
  }

 private:
  std::vector<double> values_;
};

inline Json scaler_json(const MinMaxScaler& s, PayloadWriter& w) { return {{"lo", w.add(s.lo)}, {"scale", w.add(s.scale)}}; }

inline MinMaxScaler scaler_from(const Json& j, const PayloadReader& r) { return {r.row(j.at("lo")), r.row(j.at("scale"))}; }

inline AeMode ae_mode_from_string(const std::string& s) {
  for (auto m : {AeMode::kCompressed, AeMode::kEqual, AeMode::kSparse})
    if (to_string(m) == s) return m;
  throw Error(ErrorKind::kDataFormat, "model file: unknown autoencoder mode " + s);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_model(const HmlModel& model) {
  detail::PayloadWriter w;
  Json h;
  h["config"] = config_to_json(model.config);
  h["n_classes"] = model.n_classes;
  h["class_names"] = model.class_names;
  h["train_accuracy"] = model.record.train_accuracy;
  h["input_scaler"] = detail::scaler_json(model.input_scaler, w);
  h["head_scaler"] = detail::scaler_json(model.head_scaler, w);
  if (model.stack) {
    Json layers = Json::array();
    for (const auto& ae : model.stack->layers) {
      layers.push_back({{"weights", w.add(ae.weights)},
                        {"bias", w.add(ae.bias)},
                        {"beta", w.add(ae.beta)},
                        {"mode", to_string(ae.mode)},
                        {"activation", to_string(ae.encode_activation)},
                        {"C", std::isinf(ae.C) ? Json("inf") : Json(ae.C)}});
    }
    h["stack"] = {{"layer_sizes", model.stack->layer_sizes}, {"layers", layers}};
  }
  std::visit(
      [&](const auto& head) {
        using H = std::decay_t<decltype(head)>;
        if constexpr (std::is_same_v<H, Sit2Model>) {
          h["head"] = {{"kind", "sit2"},
                       {"centers", w.add(head.rules.centers)},
                       {"sigma_lower", w.add(head.rules.sigma_lower)},
                       {"sigma_upper", w.add(head.rules.sigma_upper)},
                       {"consequents", w.add(head.consequents)},
                       {"refined", head.stage == Sit2Stage::kRefined}};
        } else if constexpr (std::is_same_v<H, ElmModel>) {
          h["head"] = {{"kind", "elm"},
                       {"input_weights", w.add(head.input_weights)},
                       {"biases", w.add(head.biases)},
                       {"output_weights", w.add(head.output_weights)},
                       {"activation", to_string(head.activation)}};
        } else {
          h["head"] = {{"kind", "ridge"}, {"weights", w.add(head.weights)}};
        }
      },
      model.head);
  h["payload_values"] = w.values().size();

  const std::string header = h.dump();
  std::vector<std::uint8_t> out(kModelMagic, kModelMagic + 8);
  auto put = [&out](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  };
  const std::uint32_t version = kModelVersion;
  const std::uint64_t header_len = header.size();
  put(&version, sizeof version);
  put(&header_len, sizeof header_len);
  put(header.data(), header.size());
  put(w.values().data(), w.values().size() * sizeof(double));
  return out;
}

inline HmlModel decode_model(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 20 && std::memcmp(bytes.data(), kModelMagic, 8) == 0, ErrorKind::kDataFormat,
          "model file: bad magic");
  std::uint32_t version = 0;
  std::uint64_t header_len = 0;
  std::memcpy(&version, bytes.data() + 8, sizeof version);
  std::memcpy(&header_len, bytes.data() + 12, sizeof header_len);
  require(version == kModelVersion, ErrorKind::kDataFormat, "model file: unsupported version");
  require(bytes.size() - 20 >= header_len, ErrorKind::kDataFormat, "model file: truncated header");

  HmlModel model;
  try {
    const Json h = Json::parse(bytes.begin() + 20, bytes.begin() + 20 + static_cast<std::ptrdiff_t>(header_len));
    const auto n_values = h.at("payload_values").get<std::size_t>();
    const std::size_t payload_at = 20 + header_len;
    require(bytes.size() - payload_at == n_values * sizeof(double), ErrorKind::kDataFormat, "model file: truncated payload");
    std::vector<double> values(n_values);
    std::memcpy(values.data(), bytes.data() + payload_at, n_values * sizeof(double));
    const detail::PayloadReader r(std::move(values));

    model.config = config_from_json(h.at("config"));
    model.n_classes = h.at("n_classes").get<int>();
    model.class_names = h.at("class_names").get<std::vector<std::string>>();
    model.record.train_accuracy = h.at("train_accuracy").get<double>();
    model.input_scaler = detail::scaler_from(h.at("input_scaler"), r);
    model.head_scaler = detail::scaler_from(h.at("head_scaler"), r);
    if (h.contains("stack")) {
      FeatureStack stack;
      stack.layer_sizes = h.at("stack").at("layer_sizes").get<std::vector<int>>();
      for (const auto& l : h.at("stack").at("layers")) {
        Autoencoder ae;
        ae.weights = r.matrix(l.at("weights"));
        ae.bias = r.row(l.at("bias"));
        ae.beta = r.matrix(l.at("beta"));
        ae.mode = detail::ae_mode_from_string(l.at("mode").get<std::string>());
        ae.encode_activation = activation_from_string(l.at("activation").get<std::string>());
        ae.C = l.at("C").is_string() ? kInfinity : l.at("C").get<double>();
        stack.layers.push_back(std::move(ae));
      }
      model.stack = std::move(stack);
    }
    const Json& hj = h.at("head");
    const auto kind = hj.at("kind").get<std::string>();
    if (kind == "sit2") {
      Sit2Model s;
      s.rules.centers = r.matrix(hj.at("centers"));
      s.rules.sigma_lower = r.vector(hj.at("sigma_lower"));
      s.rules.sigma_upper = r.vector(hj.at("sigma_upper"));
      s.rules.validate();
      s.consequents = r.matrix(hj.at("consequents"));
      s.stage = hj.at("refined").get<bool>() ? Sit2Stage::kRefined : Sit2Stage::kInitialized;
      model.head = std::move(s);
    } else if (kind == "elm") {
      ElmModel e;
      e.input_weights = r.matrix(hj.at("input_weights"));
      e.biases = r.row(hj.at("biases"));
      e.output_weights = r.matrix(hj.at("output_weights"));
      e.activation = activation_from_string(hj.at("activation").get<std::string>());
      model.head = std::move(e);
    } else if (kind == "ridge") {
      model.head = RidgeHead{r.matrix(hj.at("weights"))};
    } else {
      throw Error(ErrorKind::kDataFormat, "model file: unknown head kind " + kind);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kDataFormat, std::string("model file: ") + e.what());
  }
  return model;
}

inline void save_model(const std::filesystem::path& path, const HmlModel& model) {
  const auto bytes = encode_model(model);
  write_file_atomic(path, bytes.data(), bytes.size());
}

inline HmlModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

}  // namespace hml
