#include "alrn/insights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <json.hpp>

#include "alrn/error.hpp"
#include "alrn/rng.hpp"
#include "alrn/text.hpp"

namespace alrn {

namespace {

constexpr std::array<std::string_view, 6> kPalette = {"#1b4965", "#5fa8d3", "#2a9d8f", "#e76f51", "#6d597a", "#bc6c25"};
constexpr double kSpiralSpacing = 1.5;  // radius gained per radian
constexpr std::size_t kMaxProbes = 2'000'000;

struct Box {
  double x0, y0, x1, y1;
};

bool overlaps(const Box& a, const Box& b) noexcept {
  return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

double round2(double v) {
  const double r = std::round(v * 100.0) / 100.0;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

}  // namespace

WordCloud render_wordcloud(const FrequencyTable& table, std::size_t k, std::uint64_t seed,
                           const WordCloudOptions& o) {
  if (k < 1) throw ValidationError("render_wordcloud: k must be at least 1");
  if (!(o.min_font > 0) || o.max_font < o.min_font) throw ConfigError("word cloud: need 0 < min_font <= max_font");
  WordCloud cloud;
  const auto entries = top_k(table, k);
  Rng rng = Rng(seed).split(0xc10d);
  std::vector<Box> boxes;
  const double top = entries.empty() ? 1.0 : static_cast<double>(entries.front().second);
  for (const auto& [ngram, count] : entries) {
    WordPlacement p;
    p.ngram = ngram;
    p.count = count;
    p.font_size = std::max(o.min_font, o.max_font * std::sqrt(static_cast<double>(count) / top));
    const double glyphs = static_cast<double>(text::decode_utf8(ngram).size());
    p.box_width = glyphs * o.char_width * p.font_size + 2 * o.padding;
    p.box_height = o.line_height * p.font_size + 2 * o.padding;

    const double start = rng.uniform() * 2 * std::numbers::pi;
    bool placed = false;
    for (std::size_t probe = 0; probe < kMaxProbes && !placed; ++probe) {
      const double t = static_cast<double>(probe) * o.spiral_step;
      const double r = kSpiralSpacing * t;
      const double cx = o.width / 2 + r * std::cos(start + t);
      const double cy = o.height / 2 + r * std::sin(start + t);
      const Box b{cx - p.box_width / 2, cy - p.box_height / 2, cx + p.box_width / 2, cy + p.box_height / 2};
      if (std::none_of(boxes.begin(), boxes.end(), [&](const Box& other) { return overlaps(b, other); })) {
        p.x = cx;
        p.y = cy;
        boxes.push_back(b);
        placed = true;
      }
    }
    if (!placed) throw ValidationError(fmt::format("word cloud: could not place '{}'", ngram));
    cloud.words.push_back(std::move(p));
  }

  double x0 = 0, y0 = 0, x1 = o.width, y1 = o.height;
  for (const Box& b : boxes) {
    x0 = std::min(x0, b.x0);
    y0 = std::min(y0, b.y0);
    x1 = std::max(x1, b.x1);
    y1 = std::max(y1, b.y1);
  }
  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.2f}\" height=\"{:.2f}\" "
      "viewBox=\"{:.2f} {:.2f} {:.2f} {:.2f}\">\n"
      "<title>{} comments: top {} n-grams</title>\n"
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#ffffff\"/>\n",
      round2(x1 - x0), round2(y1 - y0), round2(x0), round2(y0), round2(x1 - x0), round2(y1 - y0),
      label_name(table.sentiment), entries.size(), round2(x0), round2(y0), round2(x1 - x0), round2(y1 - y0));
  for (std::size_t i = 0; i < cloud.words.size(); ++i) {
    const WordPlacement& w = cloud.words[i];
    svg += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"{:.2f}\" font-family=\"{}\" text-anchor=\"middle\" "
        "dominant-baseline=\"central\" fill=\"{}\">{}</text>\n",
        round2(w.x), round2(w.y), round2(w.font_size), xml_escape(o.font_family), kPalette[i % kPalette.size()],
        xml_escape(w.ngram));
  }
  svg += "</svg>\n";
  cloud.svg = std::move(svg);

  nlohmann::ordered_json side;
  side["sentiment"] = label_key(table.sentiment);
  side["total_comments"] = table.total_comments;
  side["k"] = k;
  side["seed"] = seed;
  side["words"] = nlohmann::ordered_json::array();
  for (const WordPlacement& w : cloud.words) {
    side["words"].push_back({{"ngram", w.ngram},
                             {"count", w.count},
                             {"font_size", round2(w.font_size)},
                             {"x", round2(w.x)},
                             {"y", round2(w.y)}});
  }
  cloud.sidecar_json = side.dump(2) + "\n";
  return cloud;
}

}  // namespace alrn
