#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "support.hpp"
#include "themetrek/error.hpp"
#include "themetrek/textsim.hpp"

using namespace themetrek;

namespace {

TranscriptCorpus corpus(std::initializer_list<std::pair<const char*, const char*>> docs) {
  TranscriptCorpus c;
  for (const auto& [id, text] : docs) c.add(id, text);
  return c;
}

const std::unordered_set<std::string> kNoStopwords;

TranscriptCorpus four_docs() {
  return corpus({{"d0", "alpha alpha alpha beta gamma"},
                 {"d1", "Alpha, beta; delta!"},
                 {"d2", "gamma delta beta"},
                 {"d3", "delta beta gamma"}});
}

TranscriptCorpus random_corpus(std::uint64_t seed, std::size_t docs, std::size_t vocab) {
  static const char* syllables[] = {"ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ze", "po"};
  std::mt19937_64 rng(seed);
  std::vector<std::string> words;
  for (std::size_t w = 0; w < vocab; ++w) {
    words.push_back(std::string(syllables[w % 10]) + syllables[(w / 10) % 10] + syllables[(w / 100) % 10] + "x");
  }
  TranscriptCorpus c;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    const std::size_t len = 20 + rng() % 30;
    for (std::size_t t = 0; t < len; ++t) text += words[rng() % vocab] + " ";
    c.add("doc" + std::to_string(100 + d), text);
  }
  return c;
}

}  // namespace

TEST_CASE("tokenizer splits on non-letters, lowercases and drops short tokens") {
  CHECK(tokenize("Hello, WORLD! a b2c it's") == std::vector<std::string>{"hello", "world", "it"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("x y z").empty());
}

TEST_CASE("stop-word list loads and the shipped list is pinned") {
  const auto sw = load_stopwords(THEMETREK_DEFAULT_DATA_DIR "/stopwords_en.txt");
  CHECK(sw.size() == 515);
  CHECK(sw.contains("the"));
  CHECK_FALSE(sw.contains("greed"));
  CHECK_THROWS_AS(load_stopwords("/nonexistent/stop.txt"), IoError);
}

TEST_CASE("stemming happens before the document-frequency filter") {
  const auto two = corpus({{"a", "running runs"}, {"b", "runner ran"}});
  const auto loose = preprocess(two, kNoStopwords, 1);
  CHECK(loose.vocabulary == std::vector<std::string>{"ran", "run", "runner"});
  REQUIRE(loose.doc_terms[0].size() == 1);
  CHECK(loose.vocabulary[loose.doc_terms[0][0].stem] == "run");
  CHECK(loose.doc_terms[0][0].count == 2);
  // with min-DF 2 every stem occurs in one document only, so both documents empty out
  CHECK_THROWS_AS(preprocess(two, kNoStopwords), ValidationError);

  const auto three = corpus({{"a", "running runs"}, {"b", "runner ran"}, {"c", "run runners ran"}});
  const auto pc = preprocess(three, kNoStopwords);
  CHECK(pc.vocabulary == std::vector<std::string>{"ran", "run", "runner"});
  CHECK(pc.doc_freq == std::vector<std::uint32_t>{2, 2, 2});
  CHECK(pc.token_count(0) == 2);
  CHECK(pc.token_count(2) == 3);
}

TEST_CASE("stop-words are removed before stemming") {
  const std::unordered_set<std::string> sw{"the", "and"};
  const auto pc = preprocess(corpus({{"a", "the cats and dogs"}, {"b", "The cat and the dog"}}), sw);
  CHECK(pc.vocabulary == std::vector<std::string>{"cat", "dog"});
  CHECK_THROWS_AS(preprocess(corpus({{"a", "the and"}, {"b", "cat"}, {"c", "cat"}}), sw), ValidationError);
  CHECK_THROWS_AS(preprocess(TranscriptCorpus{}, sw), ValidationError);
}

TEST_CASE("tf-idf weights are f times ln(N / n_w)") {
  const auto m = build_tfidf(preprocess(four_docs(), kNoStopwords));
  REQUIRE(m.vocabulary == std::vector<std::string>{"alpha", "beta", "delta", "gamma"});
  CHECK(m.row(0)[0] == doctest::Approx(3.0 * std::log(2.0)));
  CHECK(m.row(0)[0] == doctest::Approx(2.0794).epsilon(1e-4));
  for (std::size_t i = 0; i < 4; ++i) CHECK(m.row(i)[1] == 0.0);  // beta is everywhere
  CHECK(m.row(0)[3] == doctest::Approx(std::log(4.0 / 3.0)));
  CHECK(m.row(1)[3] == 0.0);
}

TEST_CASE("tf-idf cosine on a hand-computed pair") {
  const auto sim = build_text_similarity(preprocess(four_docs(), kNoStopwords), {});
  const double l2 = std::log(2.0), l43 = std::log(4.0 / 3.0);
  CHECK(sim.score("d1", "d2") == doctest::Approx(l43 / (std::sqrt(2.0) * std::sqrt(l2 * l2 + l43 * l43))));
  CHECK(sim.score("d2", "d3") == doctest::Approx(1.0));
  CHECK(sim.score("d0", "d0") == 1.0);
}

TEST_CASE("cosine_items basic values") {
  const std::vector<double> a{1, 1, 0}, b{0, 1, 1}, z{0, 0, 0}, neg{-1, -1, 0};
  CHECK(cosine_items(a, b) == doctest::Approx(0.5));
  CHECK(cosine_items(a, a) == doctest::Approx(1.0));
  CHECK(cosine_items(a, z) == 0.0);
  CHECK(cosine_items(a, neg) == 0.0);
  CHECK_THROWS_AS(cosine_items(a, std::vector<double>{1.0}), ArgumentError);
}

TEST_CASE("identical transcripts are fully similar and disjoint ones are not") {
  const auto pc = preprocess(corpus({{"a", "ship captain ship"},
                                     {"b", "ship captain ship"},
                                     {"c", "planet storm"},
                                     {"d", "planet storm storm"}}),
                             kNoStopwords);
  const auto sim = build_text_similarity(pc, {});
  CHECK(sim.score("a", "b") == doctest::Approx(1.0));
  CHECK(sim.score("a", "c") == 0.0);
}

TEST_CASE("thin SVD reconstructs the matrix and orders singular values") {
  const auto m = build_tfidf(preprocess(random_corpus(5, 12, 40), kNoStopwords));
  const auto f = thin_svd(m);
  REQUIRE(f.rank == std::min(m.rows(), m.cols()));
  for (std::size_t k = 1; k < f.rank; ++k) CHECK(f.singular_values[k - 1] >= f.singular_values[k]);
  Eigen::MatrixXd M(m.rows(), m.cols()), R = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) M(i, j) = m.row(i)[j];
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      for (std::size_t k = 0; k < f.rank; ++k) {
        R(i, j) += f.item_factors[i * f.rank + k] * f.singular_values[k] * f.term_factors[j * f.rank + k];
      }
    }
  }
  CHECK((M - R).norm() / M.norm() < 1e-8);

  double previous = 0.0;
  for (std::size_t p = 1; p <= f.rank; ++p) {
    const auto lv = truncated_svd(f, m.item_ids, p);
    double energy = 0.0;
    for (double s : lv.singular_values) energy += s * s;
    CHECK(energy >= previous);
    previous = energy;
  }
  CHECK_THROWS_AS(truncated_svd(m, 0), ArgumentError);
  CHECK_THROWS_AS(truncated_svd(m, f.rank + 1), ArgumentError);
}

TEST_CASE("rank-one matrix is reproduced by a single factor") {
  TfIdfMatrix m;
  m.item_ids = {"a", "b", "c"};
  m.vocabulary = {"x", "y"};
  m.weights = {1, 2, 2, 4, 3, 6};
  const auto lv = truncated_svd(m, 1);
  const auto f = thin_svd(m);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(std::abs(lv.row(i)[0] * f.term_factors[j * f.rank] - m.weights[i * 2 + j]) < 1e-10);
    }
  }
}

TEST_CASE("full-rank LSI cosines equal tf-idf cosines") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto pc = preprocess(random_corpus(seed, 15, 30), kNoStopwords);
    const auto rank = std::min(pc.doc_count(), pc.vocabulary.size());
    const auto tfidf = build_text_similarity(pc, {});
    const auto lsi = build_text_similarity(pc, {TextBackend::Kind::lsi, rank});
    for (std::size_t i = 0; i < tfidf.size(); ++i) {
      for (std::size_t j = 0; j < tfidf.size(); ++j) CHECK(std::abs(tfidf.score(i, j) - lsi.score(i, j)) < 1e-6);
    }
  }
}

TEST_CASE("preprocessing is deterministic and the vocabulary is sorted") {
  const auto c = random_corpus(9, 10, 25);
  const auto a = preprocess(c, kNoStopwords), b = preprocess(c, kNoStopwords);
  CHECK(a.vocabulary == b.vocabulary);
  CHECK(std::is_sorted(a.vocabulary.begin(), a.vocabulary.end()));
  for (std::size_t d = 0; d < a.doc_count(); ++d) CHECK(a.token_count(d) == b.token_count(d));
}

TEST_CASE("min-DF filtering never changes surviving weights") {
  const auto c = random_corpus(4, 10, 60);
  const auto loose = build_tfidf(preprocess(c, kNoStopwords, 1));
  const auto strict = build_tfidf(preprocess(c, kNoStopwords, 2));
  for (std::size_t w = 0; w < strict.cols(); ++w) {
    const auto it = std::find(loose.vocabulary.begin(), loose.vocabulary.end(), strict.vocabulary[w]);
    REQUIRE(it != loose.vocabulary.end());
    const auto lw = static_cast<std::size_t>(it - loose.vocabulary.begin());
    for (std::size_t i = 0; i < strict.rows(); ++i) CHECK(strict.row(i)[w] == loose.row(i)[lw]);
  }
}

TEST_CASE("latent vectors export as item id plus p reals") {
  test::ScratchDir dir("lsi");
  const auto lv = truncated_svd(build_tfidf(preprocess(four_docs(), kNoStopwords)), 2);
  export_latent_vectors(lv, dir / "v.tsv");
  std::ifstream in(dir / "v.tsv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with("item_id")) continue;
    ++rows;
    CHECK(std::count(line.begin(), line.end(), '\t') == 2);
  }
  CHECK(rows == 4);
}
