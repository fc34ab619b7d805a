#include "commands.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>
#include <sstream>

#include "psa/embed.hpp"
#include "psa/errors.hpp"
#include "psa/eval.hpp"
#include "psa/preprocess.hpp"
#include "psa/serialize.hpp"

namespace psa::cli {

namespace fs = std::filesystem;

namespace {

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto logger = std::make_shared<spdlog::logger>("psa", std::move(sink));
  logger->set_pattern("psa: %l: %v");
  auto level = spdlog::level::info;
  if (const char* env = std::getenv("PSA_LOG")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    if (v == "debug") level = spdlog::level::debug;
  }
  logger->set_level(level);
  return logger;
}

int report_error(std::ostream& err, const std::string& kind, int code, const std::string& message) {
  std::string flat = message;
  for (char& c : flat) {
    if (c == '\n' || c == '\t') c = ' ';
  }
  err << "psa: error kind=" << kind << " exit=" << code << " message=" << flat << std::endl;
  return code;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidSplit:
    case ErrorKind::InvalidOptimizer:
      return kExitConfig;
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::NonFiniteGradient:
    case ErrorKind::NonFiniteInput:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "seed",
      "data.dataset", "data.embeddings",
      "split.train", "split.test", "split.valid", "split.seed",
      "model.kind", "model.num_classes", "model.max_len", "model.hidden",
      "model.autoencoder_hidden", "model.head_hidden", "model.cnn_filters", "model.cnn_width",
      "model.cnn_pool", "model.cnn_stages", "model.cnn_dense",
      "optimizer.algorithm", "optimizer.learning_rate", "optimizer.momentum", "optimizer.beta1",
      "optimizer.beta2", "optimizer.epsilon", "optimizer.batch_size", "optimizer.epochs",
      "autoencoder_optimizer.algorithm", "autoencoder_optimizer.learning_rate",
      "autoencoder_optimizer.momentum", "autoencoder_optimizer.beta1",
      "autoencoder_optimizer.beta2", "autoencoder_optimizer.epsilon",
      "autoencoder_optimizer.batch_size", "autoencoder_optimizer.epochs",
      "output.model", "output.report",
  };
  return keys;
}

void read_optimizer(const ConfigFile& file, const std::string& table, OptimizerConfig& opt) {
  if (auto a = file.string(table + ".algorithm")) {
    const auto alg = parse_algorithm(*a);
    if (!alg) throw Error(ErrorKind::InvalidConfig, "unknown optimizer algorithm '" + *a + "'");
    opt.algorithm = *alg;
  }
  if (auto v = file.number(table + ".learning_rate")) opt.learning_rate = *v;
  if (auto v = file.number(table + ".momentum")) opt.momentum = *v;
  if (auto v = file.number(table + ".beta1")) opt.beta1 = *v;
  if (auto v = file.number(table + ".beta2")) opt.beta2 = *v;
  if (auto v = file.number(table + ".epsilon")) opt.epsilon = *v;
  if (auto v = file.unsigned_integer(table + ".batch_size")) opt.batch_size = *v;
  if (auto v = file.unsigned_integer(table + ".epochs")) opt.epochs = *v;
}

std::size_t checked_size(std::optional<std::uint64_t> v, std::size_t fallback) {
  return v ? static_cast<std::size_t>(*v) : fallback;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

std::vector<TokenSeq> preprocess_all(const Dataset& dataset, const Preprocessor& pre) {
  std::vector<TokenSeq> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.reviews) out.push_back(pre.run(r.text));
  return out;
}

Tensor encode_for(const InputSpec& input, std::span<const TokenSeq> tokens, const EmbeddingTable& table) {
  if (table.dim() != input.dim) {
    throw Error(ErrorKind::EncodingMismatch, "embedding dim " + std::to_string(table.dim()) +
                                                 " does not match model input dim " +
                                                 std::to_string(input.dim));
  }
  if (input.kind == InputKind::sequence) return encode_sequence_batch(tokens, table, input.max_len);
  return encode_mean_batch(tokens, table);
}

InputSpec input_for(const RunConfig& cfg, std::size_t dim) {
  if (cfg.kind == ModelKind::cnn1d) return {InputKind::sequence, dim, cfg.max_len};
  return {InputKind::mean_vector, dim, 0};
}

std::vector<std::size_t> labels_of(const Dataset& d) {
  std::vector<std::size_t> labels;
  for (const auto& r : d.reviews) labels.push_back(class_index(*r.label));
  return labels;
}

std::vector<Polarity> golds_of(const Dataset& d) {
  std::vector<Polarity> out;
  for (const auto& r : d.reviews) out.push_back(*r.label);
  return out;
}

// Classes beyond the two polarities can exist when num_classes is raised;
// a prediction of such a class counts as neither polarity, so it is scored
// as the opposite of the gold label.
std::vector<Polarity> as_polarities(const std::vector<Prediction>& preds, const std::vector<Polarity>& golds) {
  std::vector<Polarity> out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].label < kNumPolarities) {
      out.push_back(polarity_from_index(preds[i].label));
    } else {
      out.push_back(golds[i] == Polarity::positive ? Polarity::negative : Polarity::positive);
    }
  }
  return out;
}

std::string label_token(std::size_t label) {
  if (label < kNumPolarities) return std::string(to_token(polarity_from_index(label)));
  return "class" + std::to_string(label);
}

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Fn>
int guarded(std::ostream& err, int default_code, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    const int code = default_code == kExitConfig ? kExitConfig : exit_code_for(e.kind());
    return report_error(err, std::string(to_string(e.kind())), code, e.what());
  } catch (const std::exception& e) {
    return report_error(err, "Internal", default_code, e.what());
  }
}

}  // namespace

std::string display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::mlp: return "MLP";
    case ModelKind::autoencoder: return "Autoencoder";
    case ModelKind::autoencoder_classifier: return "MLP-Autoencoder";
    case ModelKind::cnn1d: return "1D-CNN";
  }
  return "model";
}

RunConfig resolve_config(const CliOptions& options) {
  RunConfig cfg;
  fs::path base = fs::current_path();
  if (options.config) {
    const ConfigFile file = ConfigFile::load(*options.config);
    for (const auto& [key, _] : file.values()) {
      if (!known_keys().count(key)) throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
    }
    base = fs::absolute(*options.config).parent_path();
    const auto path = [&](const std::string& key) -> std::optional<fs::path> {
      auto s = file.string(key);
      if (!s) return std::nullopt;
      return base / fs::path(*s);
    };
    if (auto p = path("data.dataset")) cfg.dataset = *p;
    if (auto p = path("data.embeddings")) cfg.embeddings = *p;
    if (auto p = path("output.model")) cfg.model_path = *p;
    if (auto p = path("output.report")) cfg.report_path = *p;

    if (auto v = file.unsigned_integer("seed")) cfg.seed = *v;
    if (auto v = file.number("split.train")) cfg.split.train_fraction = *v;
    if (auto v = file.number("split.test")) cfg.split.test_fraction = *v;
    if (auto v = file.number("split.valid")) cfg.split.valid_fraction = *v;

    if (auto k = file.string("model.kind")) {
      auto kind = parse_model_kind(*k);
      if (*k == "autoencoder") kind = ModelKind::autoencoder_classifier;
      if (!kind) throw Error(ErrorKind::InvalidConfig, "unknown model kind '" + *k + "'");
      cfg.kind = *kind;
    }
    cfg.num_classes = checked_size(file.unsigned_integer("model.num_classes"), cfg.num_classes);
    cfg.max_len = checked_size(file.unsigned_integer("model.max_len"), cfg.max_len);
    if (file.has("model.hidden")) {
      // An empty list is allowed: the MLP degenerates to a softmax layer.
      const auto* arr = std::get_if<std::vector<double>>(&file.values().at("model.hidden"));
      cfg.mlp_hidden = arr && arr->empty() ? std::vector<std::size_t>{} : *file.size_list("model.hidden");
    }
    if (auto v = file.size_list("model.autoencoder_hidden")) cfg.autoencoder_hidden = *v;
    if (auto v = file.size_list("model.head_hidden")) cfg.head_hidden = *v;
    if (auto v = file.size_list("model.cnn_dense")) cfg.cnn.dense = *v;
    cfg.cnn.filters = checked_size(file.unsigned_integer("model.cnn_filters"), cfg.cnn.filters);
    cfg.cnn.width = checked_size(file.unsigned_integer("model.cnn_width"), cfg.cnn.width);
    cfg.cnn.pool = checked_size(file.unsigned_integer("model.cnn_pool"), cfg.cnn.pool);
    cfg.cnn.stages = checked_size(file.unsigned_integer("model.cnn_stages"), cfg.cnn.stages);

    read_optimizer(file, "optimizer", cfg.optimizer);
    cfg.autoencoder_optimizer = cfg.optimizer;
    read_optimizer(file, "autoencoder_optimizer", cfg.autoencoder_optimizer);

    if (auto v = file.unsigned_integer("split.seed")) {
      cfg.split.seed = *v;
    } else {
      cfg.split.seed = cfg.seed;
    }
  }

  if (options.seed) {
    cfg.seed = *options.seed;
    cfg.split.seed = *options.seed;
  }
  if (!options.config) cfg.split.seed = cfg.seed;
  cfg.optimizer.seed = cfg.seed;
  cfg.autoencoder_optimizer.seed = cfg.seed;
  cfg.cnn.max_len = cfg.max_len;
  cfg.cnn.num_classes = cfg.num_classes;

  if (options.dataset) cfg.dataset = *options.dataset;
  if (options.embeddings) cfg.embeddings = *options.embeddings;
  if (options.model) cfg.model_path = *options.model;
  return cfg;
}

void validate_for(const std::string& command, const RunConfig& cfg) {
  const auto require_file = [](const fs::path& p, const char* what) {
    if (p.empty()) throw Error(ErrorKind::InvalidConfig, std::string("no ") + what + " path given");
    if (!fs::is_regular_file(p)) {
      throw Error(ErrorKind::InvalidConfig, std::string(what) + " '" + p.string() + "' does not exist");
    }
  };
  if (command == "train") {
    require_file(cfg.dataset, "dataset");
    require_file(cfg.embeddings, "embeddings");
    if (cfg.model_path.empty()) throw Error(ErrorKind::InvalidConfig, "no model output path given");
    cfg.split.validate();
    cfg.optimizer.validate();
    if (cfg.kind == ModelKind::autoencoder_classifier) cfg.autoencoder_optimizer.validate();
    if (cfg.num_classes < 2) throw Error(ErrorKind::InvalidConfig, "num_classes must be >= 2");
    if (cfg.max_len == 0) throw Error(ErrorKind::InvalidConfig, "max_len must be >= 1");
    if (cfg.kind == ModelKind::cnn1d) {
      try {
        cnn_length_chain(cfg.cnn);
      } catch (const Error& e) {
        throw Error(ErrorKind::InvalidConfig, e.what());
      }
    }
    if (cfg.kind == ModelKind::autoencoder_classifier && cfg.autoencoder_hidden.size() % 2 == 0) {
      throw Error(ErrorKind::InvalidConfig, "autoencoder_hidden needs an odd number of layers");
    }
  } else if (command == "evaluate") {
    require_file(cfg.model_path, "model");
    require_file(cfg.dataset, "dataset");
    require_file(cfg.embeddings, "embeddings");
  } else if (command == "predict") {
    require_file(cfg.model_path, "model");
    require_file(cfg.embeddings, "embeddings");
  } else if (command == "preprocess") {
    require_file(cfg.dataset, "dataset");
  }
}

int cmd_train(const CliOptions& options, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  RunConfig cfg;
  if (const int rc = guarded(err, kExitConfig, [&] {
        cfg = resolve_config(options);
        validate_for("train", cfg);
        return kExitOk;
      })) {
    return rc;
  }

  return guarded(err, kExitData, [&] {
    const Dataset dataset = load_dataset(cfg.dataset);
    const EmbeddingTable table = load_embeddings(cfg.embeddings);
    log->info("loaded {} reviews and {} word vectors of dim {}", dataset.size(), table.size(), table.dim());
    if (!table.is_default_dim()) log->info("embedding dim {} differs from the 300-d configuration", table.dim());
    if (table.duplicates() > 0) log->warn("{} duplicate tokens in embeddings; last occurrence kept", table.duplicates());

    const Split parts = split(dataset, cfg.split);
    log->info("split sizes train={} test={} valid={}", parts.train.size(), parts.test.size(), parts.valid.size());

    const Preprocessor pre;
    const InputSpec input = input_for(cfg, table.dim());
    const auto encode = [&](const Dataset& d) {
      const auto tokens = preprocess_all(d, pre);
      return Examples{encode_for(input, tokens, table), labels_of(d)};
    };
    const Examples train_set = encode(parts.train);
    const Examples valid_set = encode(parts.valid);
    const Examples test_set = encode(parts.test);

    const EpochCallback progress = [&](std::size_t epoch, const EpochRecord& r) {
      log->debug("epoch {} train_loss={:.6f} valid_loss={:.6f} valid_acc={:.4f}", epoch, r.train_loss,
                 r.valid_loss, r.valid_accuracy.value_or(0.0));
    };

    TrainedModel model;
    switch (cfg.kind) {
      case ModelKind::mlp:
        model = train(build_mlp(table.dim(), cfg.mlp_hidden, cfg.num_classes, cfg.seed), train_set, valid_set,
                      cfg.optimizer, Objective::classification, progress);
        break;
      case ModelKind::autoencoder_classifier: {
        AutoencoderClassifierOptions ae;
        ae.autoencoder_hidden = cfg.autoencoder_hidden;
        ae.head_hidden = cfg.head_hidden;
        ae.num_classes = cfg.num_classes;
        ae.seed = cfg.seed;
        model = train_autoencoder_classifier(train_set, valid_set, cfg.autoencoder_optimizer, cfg.optimizer,
                                             ae, progress);
        break;
      }
      case ModelKind::cnn1d: {
        CnnOptions cnn = cfg.cnn;
        cnn.dim = table.dim();
        model = train(build_cnn(cnn, cfg.seed), train_set, valid_set, cfg.optimizer,
                      Objective::classification, progress);
        break;
      }
      case ModelKind::autoencoder:
        throw Error(ErrorKind::InvalidConfig, "plain autoencoders are not classifiers");
    }
    log->info("best epoch {} of {}", model.best_epoch, model.history.size());

    const auto golds = golds_of(parts.test);
    const auto preds = as_polarities(Predictor(model).predict(test_set.inputs), golds);
    const std::vector<NamedReport> reports{{display_name(cfg.kind), evaluate_per_class(preds, golds)}};

    save_model(model, cfg.model_path);
    fs::path report_path = options.out ? *options.out : cfg.report_path;
    if (!report_path.empty()) write_text(report_path, render_report_json(reports));
    out << render_report(reports);
    return kExitOk;
  });
}

int cmd_evaluate(const CliOptions& options, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  RunConfig cfg;
  if (const int rc = guarded(err, kExitConfig, [&] {
        cfg = resolve_config(options);
        validate_for("evaluate", cfg);
        return kExitOk;
      })) {
    return rc;
  }
  return guarded(err, kExitData, [&] {
    const TrainedModel model = load_model(cfg.model_path);
    const Dataset dataset = load_dataset(cfg.dataset);
    const EmbeddingTable table = load_embeddings(cfg.embeddings);
    const Preprocessor pre;
    const auto tokens = preprocess_all(dataset, pre);
    const Tensor inputs = encode_for(model.spec.input, tokens, table);
    const auto golds = golds_of(dataset);
    const auto preds = as_polarities(Predictor(model).predict(inputs), golds);
    const std::vector<NamedReport> reports{{display_name(model.spec.kind), evaluate_per_class(preds, golds)}};
    fs::path report_path = options.out ? *options.out : cfg.report_path;
    if (!report_path.empty()) {
      write_text(report_path, render_report_json(reports));
    } else {
      log->warn("no report path given; writing the table only");
    }
    out << render_report(reports);
    return kExitOk;
  });
}

int cmd_predict(const CliOptions& options, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  RunConfig cfg;
  if (const int rc = guarded(err, kExitConfig, [&] {
        cfg = resolve_config(options);
        validate_for("predict", cfg);
        if (options.text.has_value() == options.input.has_value()) {
          throw Error(ErrorKind::InvalidConfig, "predict needs exactly one of --text or --input");
        }
        if (options.input && !fs::is_regular_file(*options.input)) {
          throw Error(ErrorKind::InvalidConfig, "input '" + options.input->string() + "' does not exist");
        }
        return kExitOk;
      })) {
    return rc;
  }
  return guarded(err, kExitData, [&] {
    const TrainedModel model = load_model(cfg.model_path);
    const EmbeddingTable table = load_embeddings(cfg.embeddings);

    std::vector<std::string> lines;
    if (options.text) {
      std::istringstream in(*options.text);
      for (std::string line; std::getline(in, line);) lines.push_back(line);
      if (lines.empty()) lines.emplace_back();
    } else {
      std::ifstream in(*options.input, std::ios::binary);
      for (std::string line; std::getline(in, line);) lines.push_back(line);
    }
    if (lines.empty()) return kExitOk;

    const Preprocessor pre;
    std::vector<TokenSeq> tokens;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      tokens.push_back(pre.run(lines[i]));
      if (tokens.back().empty()) log->warn("input line {} is empty after preprocessing", i + 1);
    }
    const auto preds = Predictor(model).predict(encode_for(model.spec.input, tokens, table));

    std::ostringstream text;
    for (const auto& p : preds) {
      text << label_token(p.label);
      for (double prob : p.distribution) text << '\t' << full_precision(prob);
      text << '\n';
    }
    if (options.out) {
      write_text(*options.out, text.str());
    } else {
      out << text.str();
    }
    return kExitOk;
  });
}

int cmd_preprocess(const CliOptions& options, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  RunConfig cfg;
  if (const int rc = guarded(err, kExitConfig, [&] {
        cfg = resolve_config(options);
        validate_for("preprocess", cfg);
        return kExitOk;
      })) {
    return rc;
  }
  return guarded(err, kExitData, [&] {
    const Dataset dataset = load_dataset(cfg.dataset);
    const Preprocessor pre;
    std::ostringstream dump;
    for (const auto& r : dataset.reviews) {
      const TokenSeq seq = pre.run(r.text);
      if (seq.empty()) log->warn("review '{}' is empty after preprocessing", r.id);
      dump << r.id << '\t';
      for (std::size_t i = 0; i < seq.size(); ++i) dump << (i ? " " : "") << seq.tokens[i];
      dump << '\n';
    }
    if (options.out) {
      write_text(*options.out, dump.str());
    } else {
      out << dump.str();
    }
    return kExitOk;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Persian sentiment analysis toolkit", "psa"};
  CliOptions options;
  std::string config, model, dataset, embeddings, out_path, input;
  std::string text;
  std::uint64_t seed = 0;

  app.add_option("command", options.command, "train | evaluate | predict | preprocess")
      ->required()
      ->check(CLI::IsMember({"train", "evaluate", "predict", "preprocess"}));
  auto* o_config = app.add_option("--config", config, "run configuration (TOML)");
  auto* o_seed = app.add_option("--seed", seed, "seed for splitting, initialisation and shuffling");
  auto* o_model = app.add_option("--model", model, "model file (written by train, read otherwise)");
  auto* o_dataset = app.add_option("--dataset", dataset, "dataset TSV");
  auto* o_embed = app.add_option("--embeddings", embeddings, "word-vector text file");
  auto* o_out = app.add_option("--out", out_path, "output file (report, predictions or token dump)");
  auto* o_input = app.add_option("--input", input, "predict: file with one review per line");
  auto* o_text = app.add_option("--text", text, "predict: review text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "InvalidArguments", kExitConfig, e.what());
  }

  if (*o_config) options.config = config;
  if (*o_seed) options.seed = seed;
  if (*o_model) options.model = model;
  if (*o_dataset) options.dataset = dataset;
  if (*o_embed) options.embeddings = embeddings;
  if (*o_out) options.out = out_path;
  if (*o_input) options.input = input;
  if (*o_text) options.text = text;

  if (options.command == "train") return cmd_train(options, out, err);
  if (options.command == "evaluate") return cmd_evaluate(options, out, err);
  if (options.command == "predict") return cmd_predict(options, out, err);
  return cmd_preprocess(options, out, err);
}

}  // namespace psa::cli
