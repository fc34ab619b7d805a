#pragma once

// The bundled 20-review separable fixture, encoded for each model family.

#include <string>
#include <vector>

#include "psa/corpus.hpp"
#include "psa/embed.hpp"
#include "psa/models.hpp"
#include "psa/preprocess.hpp"

namespace psa::testing {

inline std::string fixture_path(const std::string& name) { return std::string(PSA_FIXTURE_DIR) + "/" + name; }

struct Fixture {
  Dataset dataset;
  EmbeddingTable table{1, 0};
  std::vector<TokenSeq> tokens;
  std::vector<std::size_t> labels;

  Examples mean() const { return {encode_mean_batch(tokens, table), labels}; }
  Examples sequence(std::size_t max_len) const {
    return {encode_sequence_batch(tokens, table, max_len), labels};
  }
};

inline const Fixture& separable() {
  static const Fixture f = [] {
    Fixture out;
    out.dataset = load_dataset(fixture_path("separable.tsv"));
    out.table = load_embeddings(fixture_path("embeddings-300.vec"));
    const Preprocessor pre;
    for (const auto& r : out.dataset.reviews) {
      out.tokens.push_back(pre.run(r.text));
      out.labels.push_back(class_index(*r.label));
    }
    return out;
  }();
  return f;
}

inline double accuracy(const TrainedModel& model, const Examples& data) {
  const auto preds = predict(model, data.inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i].label == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

// Scaled presets: same topology as the full-size presets, narrower layers.
inline const std::vector<std::size_t> kScaledAutoencoderHidden{40, 5, 40};

inline CnnOptions scaled_cnn(std::size_t dim) {
  CnnOptions o;
  o.max_len = 32;
  o.dim = dim;
  o.filters = 4;
  o.dense = {32, 16};
  return o;
}

}  // namespace psa::testing
