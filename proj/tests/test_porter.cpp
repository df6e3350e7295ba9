#include <fstream>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "themetrek/porter.hpp"

// Words and stems produced by an independent implementation of the original
// algorithm, frozen as a TSV.
TEST_CASE("stems match the frozen oracle word for word") {
  std::ifstream in(test::data_dir() / "porter_oracle.tsv");
  REQUIRE(in.good());
  std::string line;
  std::size_t total = 0, mismatches = 0;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const std::string word = line.substr(0, tab), stem = line.substr(tab + 1);
    ++total;
    if (themetrek::porter_stem(word) != stem) {
      ++mismatches;
      INFO(word << " -> " << themetrek::porter_stem(word) << " (expected " << stem << ")");
      CHECK(themetrek::porter_stem(word) == stem);
    }
  }
  CHECK(total == 1982);
  CHECK(mismatches == 0);
}

TEST_CASE("classic examples") {
  using themetrek::porter_stem;
  CHECK(porter_stem("caresses") == "caress");
  CHECK(porter_stem("ponies") == "poni");
  CHECK(porter_stem("relational") == "relat");
  CHECK(porter_stem("running") == "run");
  CHECK(porter_stem("runs") == "run");
  CHECK(porter_stem("runner") == "runner");
  CHECK(porter_stem("ran") == "ran");
  CHECK(porter_stem("generalizations") == "gener");
  CHECK(porter_stem("a") == "a");
  CHECK(porter_stem("") == "");
}
