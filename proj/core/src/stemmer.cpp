#include "alrn/stemmer.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "alrn/embedded_data.hpp"
#include "alrn/error.hpp"

namespace alrn {
namespace {

bool is_consonant(std::string_view w, std::size_t i) {
  switch (w[i]) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return false;
    case 'y':
      return i == 0 ? true : !is_consonant(w, i - 1);
    default:
      return true;
  }
}

// m in [C](VC)^m[V].
int measure(std::string_view w) {
  int m = 0;
  std::size_t i = 0;
  const std::size_t n = w.size();
  while (i < n && is_consonant(w, i)) ++i;
  while (i < n) {
    while (i < n && !is_consonant(w, i)) ++i;
    if (i >= n) break;
    while (i < n && is_consonant(w, i)) ++i;
    ++m;
  }
  return m;
}

bool has_vowel(std::string_view w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!is_consonant(w, i)) return true;
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
  if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) || !is_consonant(w, n - 1)) return false;
  char last = w[n - 1];
  return last != 'w' && last != 'x' && last != 'y';
}

bool all_lower_ascii(std::string_view s) {
  for (char c : s) {
    if (c < 'a' || c > 'z') return false;
  }
  return true;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

Stemmer::Condition Stemmer::parse_condition(std::string_view text, std::size_t line) {
  Condition cond;
  if (text == "-") return cond;
  for (std::string_view alt : split_on(text, '|')) {
    std::vector<Atom> conj;
    for (std::string_view tok : split_on(alt, '&')) {
      Atom atom{};
      if (!tok.empty() && tok.front() == '!') {
        atom.negate = true;
        tok.remove_prefix(1);
      }
      auto bad = [&] { return ParseError(line, fmt::format("bad condition atom '{}'", tok)); };
      if (tok.size() >= 3 && tok[0] == 'm' && (tok[1] == '>' || tok[1] == '=')) {
        atom.kind = tok[1] == '>' ? Atom::Kind::measure_gt : Atom::Kind::measure_eq;
        try {
          atom.value = std::stoi(std::string(tok.substr(2)));
        } catch (const std::exception&) {
          throw bad();
        }
      } else if (tok == "*v*") {
        atom.kind = Atom::Kind::has_vowel;
      } else if (tok == "*d") {
        atom.kind = Atom::Kind::double_consonant;
      } else if (tok == "*o") {
        atom.kind = Atom::Kind::cvc;
      } else if (tok.size() == 2 && tok[0] == '*' && tok[1] >= 'a' && tok[1] <= 'z') {
        atom.kind = Atom::Kind::ends_with;
        atom.letter = tok[1];
      } else {
        throw bad();
      }
      conj.push_back(atom);
    }
    cond.push_back(std::move(conj));
  }
  return cond;
}

bool Stemmer::holds(const Condition& condition, std::string_view stem) {
  if (condition.empty()) return true;
  for (const auto& conj : condition) {
    bool all = true;
    for (const Atom& a : conj) {
      bool v = false;
      switch (a.kind) {
        case Atom::Kind::measure_gt: v = measure(stem) > a.value; break;
        case Atom::Kind::measure_eq: v = measure(stem) == a.value; break;
        case Atom::Kind::has_vowel: v = has_vowel(stem); break;
        case Atom::Kind::double_consonant: v = ends_double_consonant(stem); break;
        case Atom::Kind::cvc: v = ends_cvc(stem); break;
        case Atom::Kind::ends_with: v = !stem.empty() && stem.back() == a.letter; break;
      }
      if (v == a.negate) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

Stemmer Stemmer::parse(std::string_view rules_text) {
  Stemmer s;
  std::vector<std::pair<std::size_t, std::string>> pending_then;  // (rule slot, step name)
  std::vector<std::pair<std::size_t, std::size_t>> then_slots;     // (step idx, rule idx)
  auto step_index = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < s.steps_.size(); ++i) {
      if (s.steps_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  };

  std::istringstream in{std::string(rules_text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream fields(raw);
    std::vector<std::string> f;
    for (std::string tok; fields >> tok;) f.push_back(tok);
    if (f.empty()) continue;
    if (f.size() < 4 || f.size() > 5) {
      throw ParseError(line, "expected: <step> <suffix> <replacement> <condition> [then=<step>]");
    }
    Rule rule;
    if (f[1] == "{dd}") {
      rule.double_consonant = true;
    } else if (f[1] != "_") {
      if (!all_lower_ascii(f[1])) throw ParseError(line, fmt::format("bad suffix '{}'", f[1]));
      rule.suffix = f[1];
    }
    if (f[2] != "_") {
      if (!all_lower_ascii(f[2])) throw ParseError(line, fmt::format("bad replacement '{}'", f[2]));
      rule.replacement = f[2];
    }
    rule.condition = parse_condition(f[3], line);
    int idx = step_index(f[0]);
    if (idx < 0) {
      s.steps_.push_back(Step{f[0], {}, false});
      idx = static_cast<int>(s.steps_.size()) - 1;
    }
    if (f.size() == 5) {
      if (f[4].rfind("then=", 0) != 0) throw ParseError(line, fmt::format("bad option '{}'", f[4]));
      pending_then.emplace_back(line, f[4].substr(5));
      then_slots.emplace_back(static_cast<std::size_t>(idx), s.steps_[idx].rules.size());
    }
    s.steps_[idx].rules.push_back(std::move(rule));
  }
  for (std::size_t i = 0; i < pending_then.size(); ++i) {
    int target = step_index(pending_then[i].second);
    if (target < 0) {
      throw ParseError(pending_then[i].first, fmt::format("unknown step '{}'", pending_then[i].second));
    }
    auto [step, rule] = then_slots[i];
    s.steps_[step].rules[rule].then_step = target;
    s.steps_[target].subroutine = true;
  }
  if (s.steps_.empty()) throw ParseError(line, "rule file defines no rules");
  return s;
}

Stemmer Stemmer::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read stemmer rules '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const Stemmer& Stemmer::builtin() {
  static const Stemmer instance = parse(embedded::stemmer_rules_v1());
  return instance;
}

std::size_t Stemmer::rule_count() const noexcept {
  std::size_t n = 0;
  for (const auto& st : steps_) n += st.rules.size();
  return n;
}

void Stemmer::apply_step(const Step& step, std::string& word) const {
  const Rule* best = nullptr;
  std::size_t best_len = 0;
  for (const Rule& r : step.rules) {
    std::size_t len = 0;
    if (r.double_consonant) {
      if (!ends_double_consonant(word)) continue;
      len = 1;
    } else {
      if (word.size() < r.suffix.size() ||
          word.compare(word.size() - r.suffix.size(), r.suffix.size(), r.suffix) != 0) {
        continue;
      }
      len = r.suffix.size();
    }
    if (best == nullptr || len > best_len) {
      best = &r;
      best_len = len;
    }
  }
  if (best == nullptr) return;
  std::string_view stem(word.data(), word.size() - best_len);
  if (!holds(best->condition, stem)) return;
  word.resize(word.size() - best_len);
  word += best->replacement;
  if (best->then_step >= 0) apply_step(steps_[best->then_step], word);
}

std::string Stemmer::stem(std::string_view word) const {
  std::string w(word);
  if (w.size() <= 2 || !all_lower_ascii(w)) return w;
  for (const Step& step : steps_) {
    if (!step.subroutine) apply_step(step, w);
  }
  return w;
}

}  // namespace alrn
