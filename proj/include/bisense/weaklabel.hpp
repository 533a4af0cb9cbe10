#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "bisense/corpus.hpp"

namespace bisense::weaklabel {

// Rule-based lexicon scorer. Constants follow the published Vader heuristics;
// this scorer is the ground-truth labeler for the pipeline by definition.
inline constexpr double kNegationDamp = -0.74;
inline constexpr double kExclaimBoost = 0.292;
inline constexpr double kAllCapsBoost = 0.733;
inline constexpr double kNormAlpha = 15.0;
inline constexpr int kNegationWindow = 3;

struct Lexicon {
  std::unordered_map<std::string, double> valence;   // word -> [-4, 4]
  std::unordered_map<std::string, double> boosters;  // word -> increment
  std::unordered_set<std::string> negators;

  // lexicon TSV: word<TAB>valence; modifiers TSV: kind<TAB>word<TAB>value
  static Lexicon load(const std::string& lexicon_path,
                      const std::string& modifiers_path);

  // lookup key: lowercased, apostrophes removed ("Don't" -> "dont")
  static std::string normalize(std::string_view word);
};

// Emoji tokens are ignored; labels must come from text only, since sense
// assignment consumes the emojis afterwards. Word valences are summed with
// the negation / booster / punctuation-emphasis / all-caps rules applied,
// then the raw sum x is normalized to x / sqrt(x^2 + 15).
double score(std::span<const corpus::Token> tokens, const Lexicon& lex);

enum class WeakLabel { AutoPositive, AutoNegative, ManualPool, Discard };
std::string_view to_string(WeakLabel w);

struct WeakLabelPolicy {
  double discard_band = 0.60;    // |score| <  0.60 -> Discard
  double auto_threshold = 0.70;  // |score| >= 0.70 -> Auto by sign
  void validate() const;         // 0 < discard_band <= auto_threshold <= 1
};

// Throws std::domain_error when score is outside [-1, 1].
WeakLabel weak_label(double score, const WeakLabelPolicy& policy = {});

}  // namespace bisense::weaklabel
