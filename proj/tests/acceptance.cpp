// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "psa/corpus.hpp"
#include "psa/errors.hpp"
#include "psa/eval.hpp"
#include "psa/preprocess.hpp"
#include "psa/serialize.hpp"
#include "psa/utf8.hpp"
#include "support/fixture.hpp"
#include "support/gradcheck.hpp"

namespace {

using namespace psa;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
};

int failures = 0;

void criterion(int number, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.fail(std::string("exception: ") + e.what());
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", number, title, o.detail.c_str());
  std::fflush(stdout);
}

Outcome gradient_suite() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0;
  std::size_t params = 0;
  std::set<std::string> kinds;
  const std::size_t cases = 24;
  for (std::size_t i = 0; i < cases; ++i) {
    auto c = testing::random_case(i, 0xACCE97 + i);
    const auto r = testing::grad_check(c.net, c.input, c.target());
    worst = std::max(worst, r.max_rel_error);
    params += r.checked;
    kinds.insert(c.name);
    if (r.max_rel_error > 1e-4) o.fail(c.name + " #" + std::to_string(i) + " rel err " + std::to_string(r.max_rel_error));
  }
  const double secs = seconds_since(start);
  if (kinds.size() < 4) o.fail("not every network family covered");
  if (secs >= 30) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu networks, %zu parameters, max rel err %.3g, %.2f s", cases, params, worst, secs);
    o.detail = buf;
  }
  return o;
}

Outcome metrics_oracle() {
  Outcome o;
  Xoshiro256 rng(0x7AB1E1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<Polarity> preds, golds;
    for (std::size_t i = 0; i < n; ++i) {
      preds.push_back(rng.below(2) ? Polarity::positive : Polarity::negative);
      golds.push_back(rng.below(2) ? Polarity::positive : Polarity::negative);
    }
    const auto report = evaluate_per_class(preds, golds);
    for (Polarity c : {Polarity::negative, Polarity::positive}) {
      double tp = 0, fp = 0, fn = 0, hit = 0;
      for (std::size_t i = 0; i < n; ++i) {
        hit += preds[i] == golds[i];
        tp += preds[i] == c && golds[i] == c;
        fp += preds[i] == c && golds[i] != c;
        fn += preds[i] != c && golds[i] == c;
      }
      const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      const double f = p + r > 0 ? 2 * (p * r) / (p + r) : 0.0;
      const auto& got = report.of(c);
      if (got.precision != p || got.recall != r || got.f_measure != f || report.accuracy != hit / n) {
        o.fail("trial " + std::to_string(trial) + " disagrees with recount");
        return o;
      }
    }
  }
  // Reference MLP block: 66/21/19/80 is the smallest confusion layout that
  // renders to the reference precision, recall and accuracy.
  std::vector<Polarity> preds, golds;
  const auto add = [&](int count, Polarity pred, Polarity gold) {
    for (int i = 0; i < count; ++i) {
      preds.push_back(pred);
      golds.push_back(gold);
    }
  };
  add(66, Polarity::negative, Polarity::negative);
  add(21, Polarity::positive, Polarity::negative);
  add(19, Polarity::negative, Polarity::positive);
  add(80, Polarity::positive, Polarity::positive);
  const std::vector<NamedReport> named{{"MLP", evaluate_per_class(preds, golds)}};
  const std::string table = render_report(named);
  if (format_metric(f_measure(0.78, 0.76)) != "0.77") o.fail("F(0.78, 0.76) does not display as 0.77");
  if (table.find("Negative   0.78       0.76     0.77\n") == std::string::npos) o.fail("negative row differs");
  if (table.find("AVG        0.78       0.78     0.78       78.49\n") == std::string::npos) o.fail("AVG row differs");
  if (o.pass) o.detail = "1000 random sets match the recount; reference MLP block reproduced";
  return o;
}

Outcome shape_audit() {
  Outcome o;
  const CnnOptions preset;
  const auto chain = cnn_length_chain(preset);
  if (chain != std::vector<std::size_t>{99, 49, 48, 24, 23, 11, 10, 5}) o.fail("length chain differs");
  const ModelSpec spec = build_cnn(preset, 1).spec;
  const auto acts = spec.activation_shapes();
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind == LayerKind::flatten && acts[i] != Shape{75}) o.fail("flatten size " + shape_string(acts[i]));
  }
  if (spec.weighted_or_pooling_layers() != 11) o.fail("layer count");
  CnnOptions short_opts;
  short_opts.max_len = 16;
  try {
    build_cnn(short_opts, 1);
    o.fail("max_len 16 accepted");
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SequenceTooShort) o.fail(std::string("wrong error ") + std::string(to_string(e.kind())));
  }
  if (o.pass) o.detail = "99,49,48,24,23,11,10,5 -> flatten 75; max_len 16 -> SequenceTooShort";
  return o;
}

OptimizerConfig adam(std::size_t epochs, std::size_t batch, double lr) {
  OptimizerConfig c;
  c.epochs = epochs;
  c.batch_size = batch;
  c.learning_rate = lr;
  c.seed = 11;
  return c;
}

Outcome overfit_oracle() {
  Outcome o;
  const auto& f = testing::separable();
  const Examples mean = f.mean();
  const auto start = Clock::now();
  std::ostringstream detail;

  const auto check = [&](const char* name, const TrainedModel& m, const Examples& data) {
    const double acc = testing::accuracy(m, data);
    detail << name << " " << acc << " (" << m.history.size() << " epochs) ";
    if (acc != 1.0) o.fail(std::string(name) + " train accuracy " + std::to_string(acc));
  };

  check("mlp", train(build_mlp(f.table.dim(), kDefaultMlpHidden, 2, 1), mean, mean, adam(200, 32, 1e-3),
                     Objective::classification),
        mean);

  // Full-size presets: 1500-512-1500 autoencoder with a [100] head, and the
  // 4-stage CNN at max_len 100 with dense 5000, 500.
  AutoencoderClassifierOptions ae;
  ae.seed = 1;
  check("autoencoder_classifier",
        train_autoencoder_classifier(mean, mean, adam(100, 32, 1e-3), adam(100, 32, 1e-3), ae), mean);

  const CnnOptions cnn;
  const Examples seq = f.sequence(cnn.max_len);
  check("cnn1d", train(build_cnn(cnn, 1), seq, seq, adam(60, 32, 1e-3), Objective::classification), seq);

  const double secs = seconds_since(start);
  if (secs >= 60) o.fail("took " + std::to_string(secs) + " s");
  detail << "in " << secs << " s";
  if (o.pass) o.detail = detail.str();
  return o;
}

Outcome autoencoder_compression() {
  Outcome o;
  const auto& f = testing::separable();
  const Examples data{f.mean().inputs, {}};
  const auto m = train(build_autoencoder(f.table.dim(), testing::kScaledAutoencoderHidden, 1), data, data,
                       adam(100, 4, 1e-3), Objective::reconstruction);
  const double first = m.history.front().train_loss, last = m.history.back().train_loss;
  if (!(last <= 0.5 * first)) o.fail("epoch-100 MSE " + std::to_string(last) + " vs epoch-1 " + std::to_string(first));
  const auto code = encode_bottleneck(m, data.inputs);
  if (code.dim(1) != 5) o.fail("scaled bottleneck width " + std::to_string(code.dim(1)));
  const auto full = train(build_autoencoder(f.table.dim(), kDefaultAutoencoderHidden, 1), data, data,
                           adam(100, 32, 1e-3), Objective::reconstruction);
  const double full_first = full.history.front().train_loss, full_last = full.history.back().train_loss;
  if (!(full_last <= 0.5 * full_first)) o.fail("full-size preset MSE did not halve");
  const auto full_code = encode_bottleneck(full, data.inputs);
  if (full_code.dim(1) != 512) o.fail("full-size bottleneck width " + std::to_string(full_code.dim(1)));
  if (o.pass) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "scaled 40-5-40 MSE ratio %.3f, bottleneck 5; full-size 1500-512-1500 MSE ratio %.2g, bottleneck 512",
                  last / first, full_last / full_first);
    o.detail = buf;
  }
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism_round_trip() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "psa-acceptance";
  fs::create_directories(dir);
  for (const char* preset : {"train-mlp.toml", "train-autoencoder.toml", "train-cnn.toml"}) {
    std::string models[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path model = dir / ("run" + std::to_string(run) + ".psam");
      const std::string cmd = std::string("\"") + PSA_CLI_PATH + "\" train --config \"" +
                              testing::fixture_path(preset) + "\" --seed 42 --model \"" + model.string() +
                              "\" > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) o.fail(std::string(preset) + ": psa train failed");
      models[run] = slurp(model);
    }
    if (models[0].empty() || models[0] != models[1]) o.fail(std::string(preset) + ": model files differ");
  }

  Xoshiro256 rng(64);
  const auto& f = testing::separable();
  const CnnOptions cnn = testing::scaled_cnn(f.table.dim());
  const std::vector<std::pair<TrainedModel, Shape>> cases = {
      {build_mlp(f.table.dim(), {100}, 2, 3), Shape{64, f.table.dim()}},
      {build_cnn(cnn, 3), Shape{64, cnn.max_len, f.table.dim()}},
  };
  for (const auto& [model, shape] : cases) {
    const Tensor probe = testing::random_tensor(shape, rng);
    const auto before = predict(model, probe);
    const fs::path path = dir / "probe.psam";
    save_model(model, path);
    const auto after = predict(load_model(path), probe);
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (before[i].label != after[i].label || before[i].distribution != after[i].distribution) {
        o.fail(std::string(to_string(model.spec.kind)) + " prediction " + std::to_string(i) + " changed");
        break;
      }
    }
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = "3 presets byte-identical across runs; 64-example probes bit-identical after reload";
  return o;
}

Outcome preprocessing_properties() {
  Outcome o;
  Xoshiro256 rng(0x1D3);
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    for (std::size_t k = rng.below(20); k > 0; --k) {
      char32_t cp;
      switch (rng.below(4)) {
        case 0: cp = static_cast<char32_t>(0x20 + rng.below(0x5F)); break;
        case 1: cp = static_cast<char32_t>(0x0600 + rng.below(0x100)); break;
        case 2: cp = static_cast<char32_t>(0x2000 + rng.below(0x30)); break;
        default: cp = static_cast<char32_t>(rng.below(0x110000)); break;
      }
      if (cp >= 0xD800 && cp <= 0xDFFF) cp = 0xFFFD;
      const std::size_t reps = rng.below(5) == 0 ? 3 : 1;
      for (std::size_t r = 0; r < reps; ++r) utf8::append(s, cp);
    }
    const std::string once = normalize(s);
    if (normalize(once) != once) {
      o.fail("not idempotent on random string #" + std::to_string(i));
      break;
    }
  }
  if (normalize("gr8") != "great") o.fail("gr8");
  if (normalize("gooood") != "good") o.fail("gooood");
  if (preprocess_pipeline("going").tokens != std::vector<std::string>{"go"}) o.fail("going");
  if (tokenize("The movie is great").tokens != std::vector<std::string>{"The", "movie", "is", "great"}) o.fail("tokenize");
  if (o.pass) o.detail = "10000 random strings idempotent; gr8, gooood, going and tokenization hold";
  return o;
}

Outcome split_contract() {
  Outcome o;
  for (std::size_t n : {10u, 100u, 1000u}) {
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
      d.reviews.push_back({"id" + std::to_string(i), "t", {}, i % 2 ? Polarity::positive : Polarity::negative});
    }
    SplitSpec spec;
    spec.seed = n;
    const Split s = split(d, spec);
    const std::size_t tr = static_cast<std::size_t>(0.6 * n + 1e-9), te = static_cast<std::size_t>(0.3 * n + 1e-9);
    if (s.train.size() != tr || s.test.size() != te || s.valid.size() != n - tr - te) {
      o.fail("sizes for N=" + std::to_string(n));
    }
    std::multiset<std::string> ids;
    for (const auto* part : {&s.train, &s.test, &s.valid}) {
      for (const auto& r : part->reviews) ids.insert(r.id);
    }
    std::set<std::string> unique(ids.begin(), ids.end());
    if (ids.size() != n || unique.size() != n) o.fail("not a partition for N=" + std::to_string(n));
  }
  if (o.pass) o.detail = "(6,3,1), (60,30,10), (600,300,100); parts partition by id";
  return o;
}

}  // namespace

int main() {
  criterion(1, "gradient suite", gradient_suite);
  criterion(2, "metrics oracle", metrics_oracle);
  criterion(3, "shape audit", shape_audit);
  criterion(4, "overfit oracle", overfit_oracle);
  criterion(5, "autoencoder compression", autoencoder_compression);
  criterion(6, "determinism and round-trip", determinism_round_trip);
  criterion(7, "preprocessing properties", preprocessing_properties);
  criterion(8, "split contract", split_contract);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
