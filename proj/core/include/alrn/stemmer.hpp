#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace alrn {

/// Table-driven Porter-style suffix stripper. The rule file format is
/// documented at the top of data/stemmer_rules_v1.txt.
class Stemmer {
 public:
  static Stemmer parse(std::string_view rules_text);
  static Stemmer from_file(const std::filesystem::path& path);
  /// The shipped rule set (stemmer_rules_v1.txt).
  static const Stemmer& builtin();

  /// Words that are not all ASCII lowercase letters, or are shorter than
  /// three letters, come back unchanged.
  std::string stem(std::string_view word) const;

  std::size_t rule_count() const noexcept;

 private:
  struct Atom {
    enum class Kind { measure_gt, measure_eq, has_vowel, double_consonant, cvc, ends_with };
    Kind kind;
    int value = 0;
    char letter = 0;
    bool negate = false;
  };
  // Disjunction of conjunctions; empty means "always".
  using Condition = std::vector<std::vector<Atom>>;

  struct Rule {
    std::string suffix;
    bool double_consonant = false;
    std::string replacement;
    Condition condition;
    int then_step = -1;
  };

  struct Step {
    std::string name;
    std::vector<Rule> rules;
    bool subroutine = false;
  };

  static Condition parse_condition(std::string_view text, std::size_t line);
  static bool holds(const Condition& condition, std::string_view stem);
  void apply_step(const Step& step, std::string& word) const;

  std::vector<Step> steps_;
};

}  // namespace alrn
