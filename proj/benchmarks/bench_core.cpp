#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "psa/embed.hpp"
#include "psa/layers.hpp"
#include "psa/models.hpp"
#include "psa/network.hpp"
#include "psa/optimizer.hpp"
#include "psa/preprocess.hpp"
#include "psa/rng.hpp"
#include "psa/serialize.hpp"

namespace {

using namespace psa;

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-1, 1);
  return t;
}

std::string review_text() {
  std::string s;
  for (int i = 0; i < 20; ++i) s += "فيلم خووووب بود، کتاب‌ها بهترین gr8 going ";
  return s;
}

void BM_Preprocess(benchmark::State& st) {
  const Preprocessor pre;
  const std::string text = review_text();
  for (auto _ : st) benchmark::DoNotOptimize(pre.run(text));
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * text.size()));
}
BENCHMARK(BM_Preprocess);

void BM_DenseForward(benchmark::State& st) {
  const auto batch = static_cast<std::size_t>(st.range(0));
  DenseLayer layer(300, 1500, Activation::relu);
  const Tensor x = random_tensor({batch, 300}, 1);
  for (auto _ : st) benchmark::DoNotOptimize(layer.forward(x));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * batch));
}
BENCHMARK(BM_DenseForward)->Arg(1)->Arg(32);

void BM_Conv1DForward(benchmark::State& st) {
  Conv1DLayer layer(15, 2, 300);
  const Tensor x = random_tensor({32, 100, 300}, 2);
  for (auto _ : st) benchmark::DoNotOptimize(layer.forward(x));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * 32));
}
BENCHMARK(BM_Conv1DForward);

// One forward/backward/Adam step of a full-size preset model on a batch of 32.
void train_step(benchmark::State& st, const TrainedModel& model, const Tensor& x) {
  Network net = model.network();
  Optimizer opt(OptimizerConfig{});
  std::vector<std::size_t> labels(x.dim(0));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
  const auto params = net.parameters();
  const auto grads = net.gradients();
  for (auto _ : st) {
    const Tensor out = net.forward_train(x);
    benchmark::DoNotOptimize(backward(net, out, LossTarget::classes(labels)));
    opt.step(params, grads);
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * x.dim(0)));
}

void BM_TrainStepMlp(benchmark::State& st) {
  train_step(st, build_mlp(300, kDefaultMlpHidden, 2, 1), random_tensor({32, 300}, 3));
}
BENCHMARK(BM_TrainStepMlp);

void BM_TrainStepCnn(benchmark::State& st) {
  train_step(st, build_cnn(CnnOptions{}, 1), random_tensor({32, 100, 300}, 4));
}
BENCHMARK(BM_TrainStepCnn)->Unit(benchmark::kMillisecond);

void BM_SerializeCnn(benchmark::State& st) {
  const TrainedModel model = build_cnn(CnnOptions{}, 1);
  std::size_t bytes = 0;
  for (auto _ : st) {
    const auto out = serialize_model(model);
    bytes = out.size();
    benchmark::DoNotOptimize(out.data());
  }
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * bytes));
}
BENCHMARK(BM_SerializeCnn)->Unit(benchmark::kMillisecond);

void BM_Crc32c(benchmark::State& st) {
  const std::vector<std::uint8_t> data(1 << 20, 0xA5);
  for (auto _ : st) benchmark::DoNotOptimize(crc32c(data));
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * data.size()));
}
BENCHMARK(BM_Crc32c);

}  // namespace

BENCHMARK_MAIN();
