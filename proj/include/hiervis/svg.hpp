#ifndef HIERVIS_SVG_HPP
#define HIERVIS_SVG_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "hiervis/error.hpp"

namespace hiervis {

// Scene primitives carry resolved hex colours; role lookup happens at
// construction time in the render layer, never here.

struct RectElem {
  double x = 0, y = 0, w = 0, h = 0;
  std::string fill = "none";
  std::string stroke = "none";
  double stroke_width = 1.0;
};

struct LineElem {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  std::string stroke = "#000000";
  double width = 1.0;
  bool dashed = false;
};

struct CircleElem {
  double cx = 0, cy = 0, r = 1.0;
  std::string fill = "#000000";
};

enum class TextAnchor { start, middle, end };

struct TextElem {
  double x = 0, y = 0;
  std::string content;
  std::string fill = "#000000";
  double size = 10.0;
  TextAnchor anchor = TextAnchor::start;
};

using SceneElement = std::variant<RectElem, LineElem, CircleElem, TextElem>;

struct SceneGroup {
  std::string id;
  std::vector<SceneElement> elements;
};

// Ordered drawing list; element order defines z-order. Panel marks live in
// one group per panel so documents stay auditable.
class Scene {
 public:
  Scene(double width, double height) : width_(width), height_(height) {
    if (!(width > 0) || !(height > 0)) fail("config", "canvas must be positive");
  }

  double width() const { return width_; }
  double height() const { return height_; }

  void add_background(SceneElement e) {
    check(e);
    background_.push_back(std::move(e));
  }

  SceneGroup& begin_group(const std::string& id) {
    groups_.push_back({id, {}});
    return groups_.back();
  }

  void add(SceneGroup& group, SceneElement e) {
    check(e);
    group.elements.push_back(std::move(e));
  }

  const std::vector<SceneElement>& background() const { return background_; }
  const std::vector<SceneGroup>& groups() const { return groups_; }

 private:
  void check_point(double x, double y) const {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      fail("numeric", "non-finite scene coordinate");
    }
    const double eps = 0.5;  // hairline overshoot from stroke widths
    if (x < -eps || x > width_ + eps || y < -eps || y > height_ + eps) {
      fail("numeric", "scene coordinate outside canvas");
    }
  }

  void check(const SceneElement& e) const {
    if (const auto* r = std::get_if<RectElem>(&e)) {
      check_point(r->x, r->y);
      check_point(r->x + r->w, r->y + r->h);
    } else if (const auto* l = std::get_if<LineElem>(&e)) {
      check_point(l->x1, l->y1);
      check_point(l->x2, l->y2);
    } else if (const auto* c = std::get_if<CircleElem>(&e)) {
      check_point(c->cx, c->cy);
    } else if (const auto* t = std::get_if<TextElem>(&e)) {
      check_point(t->x, t->y);
    }
  }

  double width_;
  double height_;
  std::vector<SceneElement> background_;
  std::vector<SceneGroup> groups_;
};

namespace detail {

// Locale-proof fixed 3-decimal formatting; all coordinates go through here
// so documents are byte-deterministic.
inline std::string fmt3(double v) {
  if (!std::isfinite(v)) fail("numeric", "non-finite value in SVG output");
  const bool neg = v < 0;
  const double scaled = std::round(std::abs(v) * 1000.0);
  auto whole = static_cast<std::uint64_t>(scaled / 1000.0);
  auto frac = static_cast<std::uint64_t>(scaled) % 1000;
  std::string f = std::to_string(frac);
  while (f.size() < 3) f.insert(f.begin(), '0');
  std::string out = (neg && (whole || frac) ? "-" : "") +
                    std::to_string(whole) + "." + f;
  return out;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline void emit_element(const SceneElement& e, std::string* out) {
  if (const auto* r = std::get_if<RectElem>(&e)) {
    *out += "<rect x=\"" + fmt3(r->x) + "\" y=\"" + fmt3(r->y) + "\" width=\"" +
            fmt3(r->w) + "\" height=\"" + fmt3(r->h) + "\" fill=\"" + r->fill +
            "\" stroke=\"" + r->stroke + "\" stroke-width=\"" +
            fmt3(r->stroke_width) + "\"/>\n";
  } else if (const auto* l = std::get_if<LineElem>(&e)) {
    *out += "<line x1=\"" + fmt3(l->x1) + "\" y1=\"" + fmt3(l->y1) +
            "\" x2=\"" + fmt3(l->x2) + "\" y2=\"" + fmt3(l->y2) +
            "\" stroke=\"" + l->stroke + "\" stroke-width=\"" +
            fmt3(l->width) + "\"";
    if (l->dashed) *out += " stroke-dasharray=\"4 3\"";
    *out += "/>\n";
  } else if (const auto* c = std::get_if<CircleElem>(&e)) {
    *out += "<circle cx=\"" + fmt3(c->cx) + "\" cy=\"" + fmt3(c->cy) +
            "\" r=\"" + fmt3(c->r) + "\" fill=\"" + c->fill + "\"/>\n";
  } else if (const auto* t = std::get_if<TextElem>(&e)) {
    const char* anchor = t->anchor == TextAnchor::start ? "start"
                         : t->anchor == TextAnchor::middle ? "middle"
                                                           : "end";
    *out += "<text x=\"" + fmt3(t->x) + "\" y=\"" + fmt3(t->y) +
            "\" font-family=\"sans-serif\" font-size=\"" + fmt3(t->size) +
            "\" text-anchor=\"" + std::string(anchor) + "\" fill=\"" +
            t->fill + "\">" + xml_escape(t->content) + "</text>\n";
  }
}

}  // namespace detail

// Serialises a scene to a standalone SVG document. Attribute order and
// numeric precision are fixed, so the same scene always yields the same
// bytes. `metadata` becomes a leading XML comment when non-empty.
inline std::string emit_svg(const Scene& scene,
                            const std::string& metadata = "") {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!metadata.empty()) {
    out += "<!-- " + detail::xml_escape(metadata) + " -->\n";
  }
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         detail::fmt3(scene.width()) + "\" height=\"" +
         detail::fmt3(scene.height()) + "\" viewBox=\"0 0 " +
         detail::fmt3(scene.width()) + " " + detail::fmt3(scene.height()) +
         "\">\n";
  for (const auto& e : scene.background()) detail::emit_element(e, &out);
  for (const auto& g : scene.groups()) {
    out += "<g id=\"" + detail::xml_escape(g.id) + "\" class=\"panel\">\n";
    for (const auto& e : g.elements) detail::emit_element(e, &out);
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace hiervis

#endif  // HIERVIS_SVG_HPP
