#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "helpers.hpp"
#include "knnft/data.hpp"
#include "knnft/rng.hpp"

using namespace knnft;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("load_dataset parses labels and text in file order") {
  const auto path = write_temp("knnft_basic.tsv", "0\thello\n1\tworld\n");
  const Dataset d = load_dataset(path, 2);
  REQUIRE(d.size() == 2);
  CHECK(d.examples[0].label == 0);
  CHECK(d.examples[0].text == "hello");
  CHECK(d.examples[1].label == 1);
  CHECK(d.num_classes == 2);
}

TEST_CASE("load_dataset rejects out-of-range labels") {
  const auto path = write_temp("knnft_range.tsv", "2\tx\n");
  CHECK_THROWS_AS(load_dataset(path, 2), std::out_of_range);
}

TEST_CASE("load_dataset rejects malformed lines and empty files") {
  CHECK_THROWS(load_dataset(write_temp("knnft_malformed.tsv", "no tab here\n"), 2));
  CHECK_THROWS(load_dataset(write_temp("knnft_badlabel.tsv", "x\ttext\n"), 2));
  CHECK_THROWS(load_dataset(write_temp("knnft_empty.tsv", ""), 2));
}

TEST_CASE("ids follow file order (line-by-line oracle)") {
  std::string content;
  std::vector<std::string> expected_texts;
  for (int i = 0; i < 10; ++i) {
    const std::string text = "line number " + std::to_string(i);
    content += std::to_string(i % 3) + "\t" + text + "\n";
    expected_texts.push_back(text);
  }
  const Dataset d = load_dataset(write_temp("knnft_order.tsv", content), 3);
  REQUIRE(d.size() == 10);
  for (std::int64_t i = 0; i < 10; ++i) {
    CHECK(d.examples[i].id == i);
    CHECK(d.examples[i].text == expected_texts[i]);
  }
}

TEST_CASE("save/load round-trips") {
  const auto path = write_temp("knnft_rt_in.tsv", "0\tfoo bar\n1\tbaz\n0\tqux\n");
  const Dataset d = load_dataset(path, 2);
  const auto out = (fs::temp_directory_path() / "knnft_rt_out.tsv").string();
  save_dataset(d, out);
  const Dataset d2 = load_dataset(out, 2);
  REQUIRE(d2.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d2.examples[i].text == d.examples[i].text);
    CHECK(d2.examples[i].label == d.examples[i].label);
    CHECK(d2.examples[i].id == d.examples[i].id);
  }
}

TEST_CASE("featurize: empty text is the zero vector") {
  FeaturizerConfig cfg{16, {1, 2}, 0};
  CHECK(featurize("", cfg).isZero());
  CHECK(featurize("  \t \n", cfg).isZero());
}

TEST_CASE("featurize is deterministic and case/whitespace-normalizing") {
  FeaturizerConfig cfg{64, {1, 2}, 7};
  CHECK(featurize("Hello World", cfg) == featurize("hello   world", cfg));
  CHECK(featurize("some text here", cfg) == featurize("some text here", cfg));
}

TEST_CASE("featurize matches the standalone hash oracle") {
  // Independent recomputation of the documented scheme for "a b":
  // unigrams "a", "b" and the bigram "a b".
  FeaturizerConfig cfg{16, {1, 2}, 0};
  auto fnv = [](const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;  // hash_seed 0 leaves the basis
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  };
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(16);
  for (const std::string& gram : {std::string("a"), std::string("b"), std::string("a b")}) {
    const std::uint64_t h = fnv(gram);
    expected[static_cast<Eigen::Index>((h >> 1) % 16)] += (h & 1) ? 1.0 : -1.0;
  }
  expected /= 2.0;  // two tokens
  CHECK(featurize("a b", cfg) == expected);
}

TEST_CASE("few_shot_sample draws exact class-balanced quotas") {
  Dataset d;
  d.num_classes = 2;
  for (int i = 0; i < 400; ++i)
    d.examples.push_back({i, "text " + std::to_string(i), i % 2});

  const Dataset sub = few_shot_sample(d, 100, 42);
  REQUIRE(sub.size() == 100);
  std::map<int, int> counts;
  for (const auto& ex : sub.examples) ++counts[ex.label];
  CHECK(counts[0] == 50);
  CHECK(counts[1] == 50);

  // determinism
  const Dataset again = few_shot_sample(d, 100, 42);
  for (std::size_t i = 0; i < 100; ++i)
    CHECK(again.examples[i].id == sub.examples[i].id);
}

TEST_CASE("few_shot_sample remainder goes to the lowest classes") {
  Dataset d;
  d.num_classes = 3;
  for (int i = 0; i < 90; ++i) d.examples.push_back({i, "t", i % 3});
  const Dataset sub = few_shot_sample(d, 10, 1);
  std::map<int, int> counts;
  for (const auto& ex : sub.examples) ++counts[ex.label];
  CHECK(counts[0] == 4);  // 10 = 3+3+3 with remainder 1 to class 0
  CHECK(counts[1] == 3);
  CHECK(counts[2] == 3);
}

TEST_CASE("few_shot_sample with n = |dataset| is a permutation") {
  Dataset d;
  d.num_classes = 2;
  for (int i = 0; i < 20; ++i) d.examples.push_back({i, "t", i % 2});
  const Dataset sub = few_shot_sample(d, 20, 3);
  std::set<std::int64_t> ids;
  for (const auto& ex : sub.examples) ids.insert(ex.id);
  CHECK(ids.size() == 20);
}

TEST_CASE("few_shot_sample names the starved class") {
  Dataset d;
  d.num_classes = 2;
  for (int i = 0; i < 10; ++i) d.examples.push_back({i, "t", 0});
  d.examples.push_back({10, "t", 1});
  CHECK_THROWS_WITH_AS(few_shot_sample(d, 8, 1),
                       doctest::Contains("class 1"), std::runtime_error);
  CHECK_THROWS_AS(few_shot_sample(d, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(few_shot_sample(d, 12, 1), std::invalid_argument);
}
