#include "psa/serialize.hpp"

#include <bit>
#include <boost/crc.hpp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "psa/errors.hpp"

namespace psa {

using nlohmann::json;

std::uint32_t crc32c(std::span<const std::uint8_t> bytes) noexcept {
  boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view text(std::size_t n) {
    need(n);
    std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) throw Error(ErrorKind::ShapeHeaderMismatch, "model payload is too short");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

json history_to_json(const std::vector<EpochRecord>& history) {
  json arr = json::array();
  for (const auto& r : history) {
    json row = {r.train_loss, r.valid_loss, nullptr};
    if (r.valid_accuracy) row[2] = *r.valid_accuracy;
    arr.push_back(std::move(row));
  }
  return arr;
}

std::vector<EpochRecord> history_from_json(const json& arr) {
  std::vector<EpochRecord> out;
  for (const auto& row : arr) {
    EpochRecord r;
    r.train_loss = row.at(0).get<double>();
    r.valid_loss = row.at(1).get<double>();
    if (!row.at(2).is_null()) r.valid_accuracy = row.at(2).get<double>();
    out.push_back(r);
  }
  return out;
}

json layer_to_json(const LayerSpec& l) {
  json j = {{"type", to_string(l.kind)}};
  switch (l.kind) {
    case LayerKind::dense:
      j["in"] = l.in;
      j["out"] = l.out;
      j["activation"] = to_string(l.activation);
      break;
    case LayerKind::conv1d:
      j["filters"] = l.filters;
      j["width"] = l.width;
      j["channels"] = l.channels;
      j["activation"] = to_string(l.activation);
      break;
    case LayerKind::maxpool1d:
      j["window"] = l.window;
      break;
    case LayerKind::flatten:
      break;
  }
  return j;
}

LayerSpec layer_from_json(const json& j) {
  const auto kind = parse_layer_kind(j.at("type").get<std::string>());
  if (!kind) throw Error(ErrorKind::ShapeHeaderMismatch, "unknown layer type in header");
  const auto activation = [&]() {
    const auto a = parse_activation(j.at("activation").get<std::string>());
    if (!a) throw Error(ErrorKind::ShapeHeaderMismatch, "unknown activation in header");
    return *a;
  };
  switch (*kind) {
    case LayerKind::dense:
      return LayerSpec::dense(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>(), activation());
    case LayerKind::conv1d:
      return LayerSpec::conv1d(j.at("filters").get<std::size_t>(), j.at("width").get<std::size_t>(),
                               j.at("channels").get<std::size_t>(), activation());
    case LayerKind::maxpool1d:
      return LayerSpec::maxpool1d(j.at("window").get<std::size_t>());
    case LayerKind::flatten:
      return LayerSpec::flatten();
  }
  throw Error(ErrorKind::ShapeHeaderMismatch, "unknown layer type in header");
}

std::string header_text(const TrainedModel& m) {
  json layers = json::array();
  for (const auto& l : m.spec.layers) layers.push_back(layer_to_json(l));
  // nlohmann::json objects keep keys sorted, so the text is deterministic.
  json h = {
      {"format", kModelFormat},
      {"kind", to_string(m.spec.kind)},
      {"input",
       {{"kind", m.spec.input.kind == InputKind::sequence ? "sequence" : "mean_vector"},
        {"dim", m.spec.input.dim},
        {"max_len", m.spec.input.max_len}}},
      {"layers", std::move(layers)},
      {"num_classes", m.spec.num_classes},
      {"frozen_layers", m.spec.frozen_layers},
      {"encoder_layers", m.spec.encoder_layers},
      {"seed", m.seed},
      {"epochs", m.history.size()},
      {"best_epoch", m.best_epoch},
      {"history", history_to_json(m.history)},
      {"pretrain_history", history_to_json(m.pretrain_history)},
      {"tensors", m.parameters.size()},
  };
  return h.dump();
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const TrainedModel& model) {
  std::vector<std::uint8_t> out(kModelMagic.begin(), kModelMagic.end());
  const std::string header = header_text(model);
  put_u64(out, header.size());
  out.insert(out.end(), header.begin(), header.end());
  for (const Tensor& t : model.parameters) {
    put_u64(out, t.rank());
    for (std::size_t d : t.shape()) put_u64(out, d);
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  put_u32(out, crc32c(out));
  return out;
}

TrainedModel deserialize_model(std::span<const std::uint8_t> bytes) {
  const std::string_view prefix(reinterpret_cast<const char*>(bytes.data()),
                                std::min(bytes.size(), kModelMagic.size()));
  if (prefix != kModelMagic) {
    if (prefix.size() == kModelMagic.size() && prefix.substr(0, 4) == "PSAM") {
      throw Error(ErrorKind::VersionUnsupported,
                  "model format version '" + std::string(prefix.substr(4)) + "' is not supported");
    }
    throw Error(ErrorKind::BadMagic, "not a PSAM model file");
  }
  if (bytes.size() < kModelMagic.size() + 8 + 4) {
    throw Error(ErrorKind::ChecksumMismatch, "model file is truncated");
  }
  const auto body = bytes.first(bytes.size() - 4);
  const auto tail = bytes.last(4);
  const std::uint32_t stored = static_cast<std::uint32_t>(tail[0]) |
                               (static_cast<std::uint32_t>(tail[1]) << 8) |
                               (static_cast<std::uint32_t>(tail[2]) << 16) |
                               (static_cast<std::uint32_t>(tail[3]) << 24);
  if (stored != crc32c(body)) throw Error(ErrorKind::ChecksumMismatch, "model checksum mismatch");

  Reader in(body.subspan(kModelMagic.size()));
  const std::uint64_t header_len = in.u64();
  if (header_len > in.remaining()) throw Error(ErrorKind::ShapeHeaderMismatch, "header length overruns file");
  const std::string_view header_text = in.text(header_len);

  TrainedModel model;
  try {
    const json h = json::parse(header_text);
    if (h.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorKind::VersionUnsupported, "header format " + h.at("format").get<std::string>());
    }
    const auto kind = parse_model_kind(h.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorKind::ShapeHeaderMismatch, "unknown model kind");
    model.spec.kind = *kind;
    const json& input = h.at("input");
    model.spec.input.kind = input.at("kind").get<std::string>() == "sequence" ? InputKind::sequence
                                                                              : InputKind::mean_vector;
    model.spec.input.dim = input.at("dim").get<std::size_t>();
    model.spec.input.max_len = input.at("max_len").get<std::size_t>();
    for (const auto& l : h.at("layers")) model.spec.layers.push_back(layer_from_json(l));
    model.spec.num_classes = h.at("num_classes").get<std::size_t>();
    model.spec.frozen_layers = h.at("frozen_layers").get<std::size_t>();
    model.spec.encoder_layers = h.at("encoder_layers").get<std::size_t>();
    model.seed = h.at("seed").get<std::uint64_t>();
    model.best_epoch = h.at("best_epoch").get<std::size_t>();
    model.history = history_from_json(h.at("history"));
    model.pretrain_history = history_from_json(h.at("pretrain_history"));
    if (h.at("epochs").get<std::size_t>() != model.history.size()) {
      throw Error(ErrorKind::ShapeHeaderMismatch, "epoch count disagrees with history");
    }
    if (h.at("tensors").get<std::size_t>() != model.spec.parameter_shapes().size()) {
      throw Error(ErrorKind::ShapeHeaderMismatch, "tensor count disagrees with architecture");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ShapeHeaderMismatch, std::string("bad model header: ") + e.what());
  }
  try {
    model.spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ShapeHeaderMismatch, std::string("invalid architecture: ") + e.what());
  }

  for (const Shape& expected : model.spec.parameter_shapes()) {
    const std::uint64_t rank = in.u64();
    if (rank != expected.size()) {
      throw Error(ErrorKind::ShapeHeaderMismatch, "tensor rank " + std::to_string(rank) +
                                                      ", expected " + std::to_string(expected.size()));
    }
    Shape shape(rank);
    for (auto& d : shape) d = in.u64();
    if (shape != expected) {
      throw Error(ErrorKind::ShapeHeaderMismatch, "tensor shape " + shape_string(shape) +
                                                      ", expected " + shape_string(expected));
    }
    std::vector<double> values(shape_size(shape));
    for (double& v : values) v = in.f64();
    model.parameters.emplace_back(std::move(shape), std::move(values));
  }
  if (in.remaining() != 0) throw Error(ErrorKind::ShapeHeaderMismatch, "trailing bytes after tensors");
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write model " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing model " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open model " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace psa
