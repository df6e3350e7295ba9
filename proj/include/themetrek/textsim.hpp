#pragma once
// Transcript preprocessing and content-based item similarity: TF-IDF vectors
// compared by cosine, and LSI latent vectors from a truncated SVD.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "themetrek/corpus_io.hpp"

namespace themetrek {

/// Lowercased maximal alphabetic runs of length >= 2.
std::vector<std::string> tokenize(std::string_view text);

/// One word per line; blank lines and lines starting with '#' are skipped.
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);

struct ProcessedCorpus {
  struct Term {
    std::uint32_t stem;  // index into vocabulary
    std::uint32_t count;
  };
  std::vector<std::string> vocabulary;          // sorted; every stem has doc_freq >= min_df
  std::vector<std::string> item_ids;            // sorted
  std::vector<std::vector<Term>> doc_terms;     // per item, sorted by stem
  std::vector<std::uint32_t> doc_freq;          // n_w per stem

  std::size_t doc_count() const { return item_ids.size(); }
  std::size_t token_count(std::size_t doc) const;
};

/// Tokenize, drop stop-words, Porter-stem, then keep stems that occur in at
/// least `min_doc_freq` documents. A document left empty is a ValidationError.
ProcessedCorpus preprocess(const TranscriptCorpus& corpus, const std::unordered_set<std::string>& stopwords,
                           std::size_t min_doc_freq = 2);

/// Dense item-major weight matrix, m[i][w] = f_{i,w} * ln(N / n_w).
struct TfIdfMatrix {
  std::vector<std::string> item_ids;
  std::vector<std::string> vocabulary;
  std::vector<double> weights;  // item_ids.size() x vocabulary.size()

  std::size_t rows() const { return item_ids.size(); }
  std::size_t cols() const { return vocabulary.size(); }
  std::span<const double> row(std::size_t i) const { return {weights.data() + i * cols(), cols()}; }
};

TfIdfMatrix build_tfidf(const ProcessedCorpus& pc);

/// Thin SVD of the item x term matrix: weights = item_factors * diag(sigma) * term_factorsᵀ.
struct SvdFactors {
  std::size_t rows = 0, cols = 0, rank = 0;  // rank = min(rows, cols)
  std::vector<double> item_factors;          // rows x rank, row-major
  std::vector<double> singular_values;       // descending
  std::vector<double> term_factors;          // cols x rank, row-major
};

SvdFactors thin_svd(const TfIdfMatrix& m);

struct LatentItemVectors {
  std::size_t p = 0;
  std::vector<std::string> item_ids;
  std::vector<double> vectors;          // item_ids.size() x p; item row of U_p * Sigma_p
  std::vector<double> singular_values;  // top p, descending

  std::span<const double> row(std::size_t i) const { return {vectors.data() + i * p, p}; }
};

/// Requires 1 <= p <= min(|W|, N); ArgumentError otherwise.
LatentItemVectors truncated_svd(const TfIdfMatrix& m, std::size_t p);
LatentItemVectors truncated_svd(const SvdFactors& f, std::span<const std::string> item_ids, std::size_t p);

/// `item_id<TAB>v_1 ... v_p`, one line per item.
void export_latent_vectors(const LatentItemVectors& lv, const std::filesystem::path& path);

/// Cosine clamped to [0, 1]; 0 when either vector is zero. Throws
/// ArgumentError on a length mismatch.
double cosine_items(std::span<const double> a, std::span<const double> b);

struct TextBackend {
  enum class Kind { tfidf, lsi } kind = Kind::tfidf;
  std::size_t p = 0;  // LSI factors
};

SimilarityMatrix build_text_similarity(const ProcessedCorpus& pc, TextBackend backend);

/// All-pairs cosine over the rows of an item-major dense matrix.
SimilarityMatrix all_pairs_cosine(std::vector<std::string> item_ids, std::span<const double> rows,
                                  std::size_t dim);

}  // namespace themetrek
