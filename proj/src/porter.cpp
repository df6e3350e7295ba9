#include "themetrek/porter.hpp"


namespace themetrek {

namespace {

bool is_vowel_letter(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// y is a consonant at the start or after a vowel.
bool is_consonant(std::string_view w, std::size_t i) {
  const char c = w[i];
  if (is_vowel_letter(c)) return false;
  if (c != 'y') return true;
  return i == 0 ? true : !is_consonant(w, i - 1);
}

int measure(std::string_view stem) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < stem.size(); ++i) {
    const bool cons = is_consonant(stem, i);
    if (cons && prev_vowel) ++m;
    prev_vowel = !cons;
  }
  return m;
}

bool contains_vowel(std::string_view stem) {
  for (std::size_t i = 0; i < stem.size(); ++i) {
    if (!is_consonant(stem, i)) return true;
  }
  return false;
}

bool ends_double_consonant(std::string_view w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

bool ends_cvc(std::string_view w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  const char last = w[n - 1];
  return is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) && last != 'w' &&
         last != 'x' && last != 'y';
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

enum class Cond { none, m_gt0, m_gt1, m_gt1_st };

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
  Cond cond;
};

bool holds(Cond c, std::string_view stem) {
  switch (c) {
    case Cond::none:
      return true;
    case Cond::m_gt0:
      return measure(stem) > 0;
    case Cond::m_gt1:
      return measure(stem) > 1;
    case Cond::m_gt1_st:
      return measure(stem) > 1 && !stem.empty() && (stem.back() == 's' || stem.back() == 't');
  }
  return false;
}

// The first rule whose suffix matches decides; a failed condition stops the step.
std::string apply(std::string word, std::initializer_list<Rule> rules) {
  for (const Rule& r : rules) {
    if (!ends_with(word, r.suffix)) continue;
    const std::string_view stem = std::string_view(word).substr(0, word.size() - r.suffix.size());
    if (!holds(r.cond, stem)) return word;
    return std::string(stem) + std::string(r.replacement);
  }
  return word;
}

std::string step1a(std::string w) {
  return apply(std::move(w), {{"sses", "ss", Cond::none},
                              {"ies", "i", Cond::none},
                              {"ss", "ss", Cond::none},
                              {"s", "", Cond::none}});
}

std::string step1b(std::string w) {
  if (ends_with(w, "eed")) {
    const std::string_view stem = std::string_view(w).substr(0, w.size() - 3);
    return measure(stem) > 0 ? std::string(stem) + "ee" : w;
  }
  std::string stem;
  bool stripped = false;
  for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
    if (!ends_with(w, suffix)) continue;
    std::string_view candidate = std::string_view(w).substr(0, w.size() - suffix.size());
    if (contains_vowel(candidate)) {
      stem = std::string(candidate);
      stripped = true;
      break;
    }
  }
  if (!stripped) return w;
  if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz")) return stem + "e";
  if (ends_double_consonant(stem)) {
    const char last = stem.back();
    if (last != 'l' && last != 's' && last != 'z') stem.pop_back();
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) stem += 'e';
  return stem;
}

std::string step1c(std::string w) {
  if (ends_with(w, "y") && contains_vowel(std::string_view(w).substr(0, w.size() - 1))) w.back() = 'i';
  return w;
}

std::string step2(std::string w) {
  return apply(std::move(w), {{"ational", "ate", Cond::m_gt0}, {"tional", "tion", Cond::m_gt0},
                              {"enci", "ence", Cond::m_gt0},   {"anci", "ance", Cond::m_gt0},
                              {"izer", "ize", Cond::m_gt0},    {"abli", "able", Cond::m_gt0},
                              {"alli", "al", Cond::m_gt0},     {"entli", "ent", Cond::m_gt0},
                              {"eli", "e", Cond::m_gt0},       {"ousli", "ous", Cond::m_gt0},
                              {"ization", "ize", Cond::m_gt0}, {"ation", "ate", Cond::m_gt0},
                              {"ator", "ate", Cond::m_gt0},    {"alism", "al", Cond::m_gt0},
                              {"iveness", "ive", Cond::m_gt0}, {"fulness", "ful", Cond::m_gt0},
                              {"ousness", "ous", Cond::m_gt0}, {"aliti", "al", Cond::m_gt0},
                              {"iviti", "ive", Cond::m_gt0},   {"biliti", "ble", Cond::m_gt0}});
}

std::string step3(std::string w) {
  return apply(std::move(w), {{"icate", "ic", Cond::m_gt0},
                              {"ative", "", Cond::m_gt0},
                              {"alize", "al", Cond::m_gt0},
                              {"iciti", "ic", Cond::m_gt0},
                              {"ical", "ic", Cond::m_gt0},
                              {"ful", "", Cond::m_gt0},
                              {"ness", "", Cond::m_gt0}});
}

std::string step4(std::string w) {
  return apply(std::move(w), {{"al", "", Cond::m_gt1},    {"ance", "", Cond::m_gt1},  {"ence", "", Cond::m_gt1},
                              {"er", "", Cond::m_gt1},    {"ic", "", Cond::m_gt1},    {"able", "", Cond::m_gt1},
                              {"ible", "", Cond::m_gt1},  {"ant", "", Cond::m_gt1},   {"ement", "", Cond::m_gt1},
                              {"ment", "", Cond::m_gt1},  {"ent", "", Cond::m_gt1},   {"ion", "", Cond::m_gt1_st},
                              {"ou", "", Cond::m_gt1},    {"ism", "", Cond::m_gt1},   {"ate", "", Cond::m_gt1},
                              {"iti", "", Cond::m_gt1},   {"ous", "", Cond::m_gt1},   {"ive", "", Cond::m_gt1},
                              {"ize", "", Cond::m_gt1}});
}

std::string step5a(std::string w) {
  if (!ends_with(w, "e")) return w;
  const std::string_view stem = std::string_view(w).substr(0, w.size() - 1);
  const int m = measure(stem);
  if (m > 1 || (m == 1 && !ends_cvc(stem))) return std::string(stem);
  return w;
}

std::string step5b(std::string w) {
  if (ends_with(w, "ll") && measure(std::string_view(w).substr(0, w.size() - 1)) > 1) w.pop_back();
  return w;
}

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string w(word);
  w = step1a(std::move(w));
  w = step1b(std::move(w));
  w = step1c(std::move(w));
  w = step2(std::move(w));
  w = step3(std::move(w));
  w = step4(std::move(w));
  w = step5a(std::move(w));
  w = step5b(std::move(w));
  return w;
}

}  // namespace themetrek
