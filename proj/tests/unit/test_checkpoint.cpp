#include <doctest.h>

#include <fstream>

#include "support/gradcheck.hpp"
#include "support/tempdir.hpp"
#include "tain/checkpoint.hpp"

using namespace tain;
using tain::testing::random_tensor_f;

namespace {

bool bit_equal(const Tensor<float>& a, const Tensor<float>& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

void perturb(TainModel<float>& model, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& e : model.parameters().entries())
    for (auto& v : e.tensor.mutable_data()) v += static_cast<float>(rng.uniform(-0.05, 0.05));
}

}  // namespace

TEST_CASE("save and load reproduce the forward pass bit for bit") {
  tain::testing::TempDir tmp;
  auto cfg = ModelConfig::toy();
  cfg.seed = 4;
  TainModel<float> model(cfg);
  perturb(model, 1);
  auto i0 = random_tensor_f({32, 32, 3}, 1), i1 = random_tensor_f({32, 32, 3}, 2);
  const auto before = model.forward(i0, i1);

  AdamState<float> adam;
  adam.step = 7;
  adam.skipped = 2;
  for (const auto& e : model.parameters().entries()) {
    adam.m.emplace_back(e.tensor.numel(), 0.25f);
    adam.v.emplace_back(e.tensor.numel(), 0.5f);
  }
  save_checkpoint(tmp.path() / "m.tain", make_checkpoint(model, 123, &adam));
  auto ckpt = load_checkpoint(tmp.path() / "m.tain");
  CHECK(ckpt.config == cfg);
  CHECK(ckpt.step == 123);
  REQUIRE(ckpt.adam.has_value());
  CHECK(ckpt.adam->step == 7);
  CHECK(ckpt.adam->skipped == 2);
  CHECK(ckpt.adam->m == adam.m);
  CHECK(ckpt.adam->v == adam.v);

  auto restored = model_from_checkpoint(ckpt);
  CHECK(bit_equal(restored.forward(i0, i1), before));

  // Restoring into a differently initialized model of the same shape also works.
  cfg.seed = 99;
  TainModel<float> other(cfg);
  restore_parameters(other, ckpt);
  CHECK(bit_equal(other.forward(i0, i1), before));
}

TEST_CASE("serialization round trip is byte-stable") {
  auto cfg = ModelConfig::toy();
  cfg.enable_ia = false;
  cfg.normalize_qk = false;
  cfg.mean_shift = false;
  TainModel<float> model(cfg);
  auto bytes = serialize_checkpoint(make_checkpoint(model, 5));
  auto back = deserialize_checkpoint(bytes);
  CHECK(back.config == cfg);
  CHECK_FALSE(back.adam.has_value());
  CHECK(serialize_checkpoint(back) == bytes);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "TAIN");
}

TEST_CASE("corrupt checkpoints are rejected") {
  TainModel<float> model(ModelConfig::toy());
  auto bytes = serialize_checkpoint(make_checkpoint(model, 1));

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(bad_magic), doctest::Contains("magic"), IoError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(bad_version), doctest::Contains("version"), IoError);
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(truncated), doctest::Contains("truncated"), IoError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(trailing), doctest::Contains("trailing"), IoError);

  tain::testing::TempDir tmp;
  CHECK_THROWS_AS(load_checkpoint(tmp.path() / "missing.tain"), IoError);
}

TEST_CASE("restoring into a mismatched model names the problem") {
  TainModel<float> toy(ModelConfig::toy());
  auto ckpt = make_checkpoint(toy, 0);
  auto cfg = ModelConfig::toy();
  cfg.d = 8;
  TainModel<float> narrow(cfg);
  CHECK_THROWS_WITH_AS(restore_parameters(narrow, ckpt), doctest::Contains("shape"), IoError);
  cfg = ModelConfig::toy();
  cfg.enable_ia = false;
  TainModel<float> no_ia(cfg);
  CHECK_THROWS_AS(restore_parameters(no_ia, ckpt), IoError);
}

TEST_CASE("saving replaces an existing file") {
  tain::testing::TempDir tmp;
  const auto path = tmp.path() / "a.tain";
  std::ofstream(path) << "old";
  TainModel<float> model(ModelConfig::toy());
  save_checkpoint(path, make_checkpoint(model, 3));
  CHECK(load_checkpoint(path).step == 3);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(tmp.path())) ++files;
  CHECK(files == 1);
}
