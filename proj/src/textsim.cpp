#include "themetrek/textsim.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "text_util.hpp"
#include "themetrek/error.hpp"
#include "themetrek/kernels.hpp"
#include "themetrek/porter.hpp"

namespace themetrek {

namespace {
bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
char lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c); }
}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (is_alpha(c)) {
      cur.push_back(lower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("stop-word list not found: " + path.string());
  std::unordered_set<std::string> words;
  detail::for_each_line(detail::read_file(path), [&](std::size_t, std::string_view line) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') return;
    std::string w(line);
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return lower(c); });
    words.insert(std::move(w));
  });
  return words;
}

std::size_t ProcessedCorpus::token_count(std::size_t doc) const {
  std::size_t n = 0;
  for (const Term& t : doc_terms.at(doc)) n += t.count;
  return n;
}

ProcessedCorpus preprocess(const TranscriptCorpus& corpus, const std::unordered_set<std::string>& stopwords,
                           std::size_t min_doc_freq) {
  if (corpus.size() == 0) throw ValidationError("transcript corpus is empty");

  // Stemming dominates; memoize per surface form.
  std::unordered_map<std::string, std::string> stem_cache;
  std::vector<std::map<std::string, std::uint32_t>> counts;
  std::map<std::string, std::uint32_t> df;
  ProcessedCorpus pc;
  for (const auto& [item, text] : corpus.per_item()) {
    pc.item_ids.push_back(item);
    std::map<std::string, std::uint32_t> c;
    for (const std::string& tok : tokenize(text)) {
      if (stopwords.contains(tok)) continue;
      auto it = stem_cache.find(tok);
      if (it == stem_cache.end()) it = stem_cache.emplace(tok, porter_stem(tok)).first;
      ++c[it->second];
    }
    for (const auto& [stem, n] : c) ++df[stem];
    counts.push_back(std::move(c));
  }

  std::unordered_map<std::string, std::uint32_t> index;
  for (const auto& [stem, n] : df) {
    if (n < min_doc_freq) continue;
    index.emplace(stem, static_cast<std::uint32_t>(pc.vocabulary.size()));
    pc.vocabulary.push_back(stem);
    pc.doc_freq.push_back(n);
  }

  pc.doc_terms.resize(counts.size());
  for (std::size_t d = 0; d < counts.size(); ++d) {
    for (const auto& [stem, n] : counts[d]) {
      const auto it = index.find(stem);
      if (it != index.end()) pc.doc_terms[d].push_back({it->second, n});
    }
    if (pc.doc_terms[d].empty()) {
      throw ValidationError("transcript of '" + pc.item_ids[d] + "' has no tokens left after preprocessing");
    }
  }
  return pc;
}

TfIdfMatrix build_tfidf(const ProcessedCorpus& pc) {
  TfIdfMatrix m;
  m.item_ids = pc.item_ids;
  m.vocabulary = pc.vocabulary;
  const std::size_t w = pc.vocabulary.size();
  const double n = static_cast<double>(pc.doc_count());
  std::vector<double> idf(w);
  for (std::size_t t = 0; t < w; ++t) idf[t] = std::log(n / pc.doc_freq[t]);
  m.weights.assign(pc.doc_count() * w, 0.0);
  for (std::size_t d = 0; d < pc.doc_count(); ++d) {
    double* row = m.weights.data() + d * w;
    for (const auto& term : pc.doc_terms[d]) row[term.stem] = term.count * idf[term.stem];
  }
  return m;
}

SvdFactors thin_svd(const TfIdfMatrix& m) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> a(m.weights.data(), static_cast<Eigen::Index>(m.rows()),
                                     static_cast<Eigen::Index>(m.cols()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(a), Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdFactors f;
  f.rows = m.rows();
  f.cols = m.cols();
  f.rank = static_cast<std::size_t>(svd.singularValues().size());
  f.singular_values.assign(svd.singularValues().data(), svd.singularValues().data() + f.rank);
  const RowMajor u = svd.matrixU();
  const RowMajor v = svd.matrixV();
  f.item_factors.assign(u.data(), u.data() + u.size());
  f.term_factors.assign(v.data(), v.data() + v.size());
  return f;
}

LatentItemVectors truncated_svd(const SvdFactors& f, std::span<const std::string> item_ids, std::size_t p) {
  if (p < 1 || p > f.rank) {
    throw ArgumentError("LSI factors must lie in [1, " + std::to_string(f.rank) + "], got " + std::to_string(p));
  }
  if (item_ids.size() != f.rows) throw ArgumentError("item id count does not match SVD rows");
  LatentItemVectors lv;
  lv.p = p;
  lv.item_ids.assign(item_ids.begin(), item_ids.end());
  lv.singular_values.assign(f.singular_values.begin(), f.singular_values.begin() + static_cast<std::ptrdiff_t>(p));
  lv.vectors.resize(f.rows * p);
  for (std::size_t i = 0; i < f.rows; ++i) {
    for (std::size_t k = 0; k < p; ++k) lv.vectors[i * p + k] = f.item_factors[i * f.rank + k] * f.singular_values[k];
  }
  return lv;
}

LatentItemVectors truncated_svd(const TfIdfMatrix& m, std::size_t p) {
  const std::size_t limit = std::min(m.rows(), m.cols());
  if (p < 1 || p > limit) {
    throw ArgumentError("LSI factors must lie in [1, " + std::to_string(limit) + "], got " + std::to_string(p));
  }
  return truncated_svd(thin_svd(m), m.item_ids, p);
}

void export_latent_vectors(const LatentItemVectors& lv, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < lv.item_ids.size(); ++i) {
    out << lv.item_ids[i];
    for (double v : lv.row(i)) out << '\t' << format_real(v);
    out << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

double cosine_items(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("cosine of vectors with different lengths");
  return std::clamp(kernels::cosine(a, b), 0.0, 1.0);
}

SimilarityMatrix all_pairs_cosine(std::vector<std::string> item_ids, std::span<const double> rows,
                                  std::size_t dim) {
  const std::size_t n = item_ids.size();
  if (rows.size() != n * dim) throw ArgumentError("matrix size does not match item count");
  std::vector<double> norm(n);
  for (std::size_t i = 0; i < n; ++i) norm[i] = std::sqrt(kernels::squared_norm(rows.subspan(i * dim, dim)));
  std::vector<double> upper;
  upper.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = rows.subspan(i * dim, dim);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norm[i] == 0.0 || norm[j] == 0.0) {
        upper.push_back(0.0);
        continue;
      }
      const double c = kernels::dot(ri, rows.subspan(j * dim, dim)) / (norm[i] * norm[j]);
      upper.push_back(std::clamp(c, 0.0, 1.0));
    }
  }
  return SimilarityMatrix::from_upper_triangle(std::move(item_ids), upper);
}

SimilarityMatrix build_text_similarity(const ProcessedCorpus& pc, TextBackend backend) {
  const TfIdfMatrix m = build_tfidf(pc);
  if (backend.kind == TextBackend::Kind::tfidf) return all_pairs_cosine(m.item_ids, m.weights, m.cols());
  const LatentItemVectors lv = truncated_svd(m, backend.p);
  return all_pairs_cosine(lv.item_ids, lv.vectors, lv.p);
}

}  // namespace themetrek
