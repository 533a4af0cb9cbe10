#include "bisense/weaklabel.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bisense::weaklabel {

using corpus::Token;
using corpus::TokenKind;

std::string Lexicon::normalize(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (char c : word) {
    if (c == '\'') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

Lexicon Lexicon::load(const std::string& lexicon_path,
                      const std::string& modifiers_path) {
  Lexicon lex;
  {
    std::ifstream in(lexicon_path);
    if (!in) throw std::runtime_error("cannot open lexicon: " + lexicon_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string word, val;
      if (!std::getline(ls, word, '\t') || !std::getline(ls, val, '\t'))
        throw std::runtime_error("bad lexicon line: " + line);
      double v = std::stod(val);
      if (!std::isfinite(v) || v < -4.0 || v > 4.0)
        throw std::runtime_error("lexicon valence out of range: " + line);
      lex.valence[normalize(word)] = v;
    }
  }
  {
    std::ifstream in(modifiers_path);
    if (!in) throw std::runtime_error("cannot open modifiers: " + modifiers_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string kind, word, val;
      if (!std::getline(ls, kind, '\t') || !std::getline(ls, word, '\t') ||
          !std::getline(ls, val, '\t'))
        throw std::runtime_error("bad modifiers line: " + line);
      if (kind == "booster") {
        double v = std::stod(val);
        if (std::abs(v) >= 1.0)
          throw std::runtime_error("booster increment out of range: " + line);
        lex.boosters[normalize(word)] = v;
      } else if (kind == "negator") {
        lex.negators.insert(normalize(word));
      } else {
        throw std::runtime_error("unknown modifier kind: " + line);
      }
    }
  }
  return lex;
}

namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

bool is_all_caps(const std::string& raw) {
  int letters = 0;
  for (unsigned char c : raw) {
    if (std::isalpha(c)) {
      if (!std::isupper(c)) return false;
      ++letters;
    }
  }
  return letters >= 2;
}

bool is_punct_token(const Token& t) {
  if (t.kind != TokenKind::Word) return false;
  for (unsigned char c : t.surface)
    if (std::isalnum(c) || c >= 0x80) return false;
  return !t.surface.empty();
}

// count '!' characters in the trailing punctuation run
int trailing_exclaims(std::span<const Token> tokens) {
  int n = 0;
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    if (!is_punct_token(*it)) break;
    for (char c : it->surface)
      if (c == '!') ++n;
  }
  return n;
}

}  // namespace

double score(std::span<const corpus::Token> tokens, const Lexicon& lex) {
  // word stream with original casing; emoji and punctuation carry no valence
  std::vector<size_t> words;
  for (size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i].kind == TokenKind::Word && !is_punct_token(tokens[i]))
      words.push_back(i);

  double sum = 0.0;
  for (size_t wi = 0; wi < words.size(); ++wi) {
    const Token& tok = tokens[words[wi]];
    std::string key = Lexicon::normalize(tok.raw);
    auto it = lex.valence.find(key);
    if (it == lex.valence.end()) continue;
    double v = it->second;

    // emphasis first, then negation flips the emphasized value
    if (is_all_caps(tok.raw)) v += sign(it->second) * kAllCapsBoost;
    if (wi > 0) {
      const Token& prev = tokens[words[wi - 1]];
      auto b = lex.boosters.find(Lexicon::normalize(prev.raw));
      if (b != lex.boosters.end() && v != 0.0) v += sign(it->second) * b->second;
    }
    for (size_t back = 1; back <= kNegationWindow && back <= wi; ++back) {
      const Token& prev = tokens[words[wi - back]];
      if (lex.negators.count(Lexicon::normalize(prev.raw))) {
        v *= kNegationDamp;
        break;
      }
    }
    sum += v;
  }

  int excl = trailing_exclaims(tokens);
  if (excl >= 2) sum += sign(sum) * kExclaimBoost * std::min(excl, 3);

  return sum / std::sqrt(sum * sum + kNormAlpha);
}

std::string_view to_string(WeakLabel w) {
  switch (w) {
    case WeakLabel::AutoPositive: return "AutoPositive";
    case WeakLabel::AutoNegative: return "AutoNegative";
    case WeakLabel::ManualPool: return "ManualPool";
    case WeakLabel::Discard: return "Discard";
  }
  return "?";
}

void WeakLabelPolicy::validate() const {
  if (!(discard_band > 0 && discard_band <= auto_threshold &&
        auto_threshold <= 1.0))
    throw std::invalid_argument("weak label policy bands out of order");
}

WeakLabel weak_label(double s, const WeakLabelPolicy& policy) {
  policy.validate();
  if (!(s >= -1.0 && s <= 1.0))
    throw std::domain_error("weak_label: score outside [-1, 1]");
  double a = std::abs(s);
  if (a < policy.discard_band) return WeakLabel::Discard;
  if (a < policy.auto_threshold) return WeakLabel::ManualPool;
  return s >= 0 ? WeakLabel::AutoPositive : WeakLabel::AutoNegative;
}

}  // namespace bisense::weaklabel
