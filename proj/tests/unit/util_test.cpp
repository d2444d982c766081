#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipeval/util.hpp"
#include "test_support.hpp"

using namespace ipeval;
namespace fs = std::filesystem;

TEST_CASE("sha256_hex matches known vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("trim and case helpers") {
  CHECK(trim("  a b \t\n") == "a b");
  CHECK(trim("") == "");
  CHECK(trim("   ") == "");
  CHECK(to_lower_ascii("AbC-9") == "abc-9");
  CHECK(iequals_ascii("Correct Answer", "correct answer"));
  CHECK_FALSE(iequals_ascii("abc", "abcd"));
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("DeterministicRng reproduces and stays in range") {
  DeterministicRng a(42);
  DeterministicRng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  DeterministicRng r(7);
  for (int i = 0; i < 1000; ++i) {
    auto v = r.below(10);
    CHECK(v < 10);
  }
  CHECK(DeterministicRng(1).below(1) == 0);
}

TEST_CASE("deterministic_shuffle is a seeded permutation") {
  std::vector<int> base{0, 1, 2, 3, 4, 5, 6, 7};
  auto once = base;
  auto twice = base;
  DeterministicRng r1(99);
  DeterministicRng r2(99);
  deterministic_shuffle(once, r1);
  deterministic_shuffle(twice, r2);
  CHECK(once == twice);
  CHECK(std::set<int>(once.begin(), once.end()) ==
        std::set<int>(base.begin(), base.end()));

  auto other = base;
  DeterministicRng r3(100);
  deterministic_shuffle(other, r3);
  // different seeds almost surely disagree on 8 elements
  CHECK(other != once);
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<std::atomic<int>> hits(500);
  parallel_for(hits.size(), 8, [&](size_t i) { hits[i].fetch_add(1); });
  for (auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("parallel_for rethrows a worker exception") {
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("atomic_write_file creates parents and overwrites") {
  testing::TempDir tmp;
  auto p = tmp.path / "a" / "b" / "f.txt";
  atomic_write_file(p, "one");
  CHECK(read_text_file(p) == "one");
  atomic_write_file(p, "two");
  CHECK(read_text_file(p) == "two");
  // no temp droppings left behind
  size_t entries = 0;
  for (auto& e : fs::directory_iterator(p.parent_path())) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("read_text_file reports the missing path") {
  testing::TempDir tmp;
  CHECK_THROWS_WITH_AS(read_text_file(tmp.path / "nope.txt"),
                       doctest::Contains("nope.txt"), std::runtime_error);
}

TEST_CASE("slugify") {
  CHECK(slugify("GPT-4o Mini") == "gpt_4o_mini");
  CHECK(slugify("  weird__ Name!! ") == "weird_name");
  CHECK(slugify("...") == "x");
}
