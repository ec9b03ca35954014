// Dumbbell-like domains on a masked uniform grid.
//
// A domain is the union of k disjoint core rectangles and a set of channel
// rectangles joining them. Cells are cell-centered: a cell belongs to the
// domain iff its center lies in one of the rectangles.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coexist {

struct Rect {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  [[nodiscard]] double x_max() const noexcept { return x + width; }
  [[nodiscard]] double y_max() const noexcept { return y + height; }
  [[nodiscard]] double area() const noexcept { return width * height; }
  [[nodiscard]] double thickness() const noexcept { return std::min(width, height); }
  [[nodiscard]] bool contains(double px, double py) const noexcept {
    return px >= x && px <= x_max() && py >= y && py <= y_max();
  }
};

/// Separation between two rectangles (0 when the closures touch or overlap).
inline double rect_gap(const Rect& a, const Rect& b) noexcept {
  const double gx = std::max(a.x - b.x_max(), b.x - a.x_max());
  const double gy = std::max(a.y - b.y_max(), b.y - a.y_max());
  return std::max({gx, gy, 0.0});
}

struct DomainSpec {
  std::vector<Rect> cores;
  std::vector<Rect> channels;
  double h = 0.025;
};

/// Channels must span at least this many cells across their thin direction.
inline constexpr double kMinChannelCells = 2.0;

enum class ViolationKind {
  NoCores,
  BadSpacing,
  DegenerateRect,
  CoresNotDisjoint,
  ChannelTooThin,
  CoreNotResolved,
  ChannelDangling,
  NotConnected,
  GridTooLarge,
};

inline const char* to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::NoCores: return "no cores";
    case ViolationKind::BadSpacing: return "grid spacing not positive";
    case ViolationKind::DegenerateRect: return "rectangle has non-positive size";
    case ViolationKind::CoresNotDisjoint: return "cores not disjoint";
    case ViolationKind::ChannelTooThin: return "channel too thin";
    case ViolationKind::CoreNotResolved: return "core not resolved by grid";
    case ViolationKind::ChannelDangling: return "channel does not join two sets";
    case ViolationKind::NotConnected: return "not connected";
    case ViolationKind::GridTooLarge: return "grid too large";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::string message;
  std::vector<std::string> rectangles;  // e.g. "core 1", "channel 2" (1-based)
};

/// Per-cell tag: core index (0-based), channel, or outside.
class Label {
 public:
  static constexpr std::int32_t kChannelTag = -1;
  static constexpr std::int32_t kOutsideTag = -2;

  constexpr Label() = default;
  static constexpr Label core(int index) noexcept { return Label(index); }
  static constexpr Label channel() noexcept { return Label(kChannelTag); }
  static constexpr Label outside() noexcept { return Label(kOutsideTag); }

  [[nodiscard]] constexpr bool is_core() const noexcept { return tag_ >= 0; }
  [[nodiscard]] constexpr bool is_channel() const noexcept { return tag_ == kChannelTag; }
  [[nodiscard]] constexpr bool is_outside() const noexcept { return tag_ == kOutsideTag; }
  [[nodiscard]] constexpr bool in_domain() const noexcept { return tag_ != kOutsideTag; }
  [[nodiscard]] constexpr int core_index() const noexcept { return tag_; }
  [[nodiscard]] constexpr std::int32_t tag() const noexcept { return tag_; }

  [[nodiscard]] std::string name() const {
    if (is_core()) return "core_" + std::to_string(tag_ + 1);
    if (is_channel()) return "channel";
    return "outside";
  }

  friend constexpr bool operator==(Label, Label) = default;

 private:
  constexpr explicit Label(std::int32_t tag) noexcept : tag_(tag) {}
  std::int32_t tag_ = kOutsideTag;
};

class InvalidDomain : public std::invalid_argument {
 public:
  explicit InvalidDomain(std::vector<Violation> violations)
      : std::invalid_argument(summarize(violations)), violations_(std::move(violations)) {}
  [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string summarize(const std::vector<Violation>& vs) {
    std::string out = "invalid domain:";
    for (const auto& v : vs) out += " [" + std::string(to_string(v.kind)) + ": " + v.message + "]";
    return out;
  }
  std::vector<Violation> violations_;
};

/// Immutable masked grid. Active (mask-true) cells are numbered 0..size()-1
/// in row-major order of the underlying nx-by-ny raster.
class DomainGrid {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  struct Face {
    std::uint32_t a;
    std::uint32_t b;
  };

  [[nodiscard]] int nx() const noexcept { return nx_; }
  [[nodiscard]] int ny() const noexcept { return ny_; }
  [[nodiscard]] double h() const noexcept { return h_; }
  [[nodiscard]] double cell_area() const noexcept { return h_ * h_; }
  [[nodiscard]] double x0() const noexcept { return x0_; }
  [[nodiscard]] double y0() const noexcept { return y0_; }
  [[nodiscard]] int num_cores() const noexcept { return num_cores_; }

  /// Number of active cells.
  [[nodiscard]] std::size_t size() const noexcept { return active_.size(); }

  [[nodiscard]] Label raster_label(int ix, int iy) const { return raster_[flat(ix, iy)]; }
  [[nodiscard]] Label label(std::size_t cell) const { return labels_[cell]; }
  [[nodiscard]] std::span<const Label> labels() const noexcept { return labels_; }

  [[nodiscard]] int ix(std::size_t cell) const noexcept { return static_cast<int>(active_[cell] % nx_); }
  [[nodiscard]] int iy(std::size_t cell) const noexcept { return static_cast<int>(active_[cell] / nx_); }
  [[nodiscard]] double center_x(int ix) const noexcept { return x0_ + (ix + 0.5) * h_; }
  [[nodiscard]] double center_y(int iy) const noexcept { return y0_ + (iy + 0.5) * h_; }
  [[nodiscard]] double cell_x(std::size_t cell) const noexcept { return center_x(ix(cell)); }
  [[nodiscard]] double cell_y(std::size_t cell) const noexcept { return center_y(iy(cell)); }

  /// Active index of raster cell (ix, iy), or kNone.
  [[nodiscard]] std::uint32_t index(int ix, int iy) const noexcept {
    if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return kNone;
    return index_[flat(ix, iy)];
  }

  /// Each interior face once, a < b.
  [[nodiscard]] std::span<const Face> faces() const noexcept { return faces_; }

  /// Active neighbours of a cell (at most 4).
  [[nodiscard]] std::span<const std::uint32_t> neighbors(std::size_t cell) const noexcept {
    return {neighbors_.data() + 4 * cell, degree_[cell]};
  }

  friend DomainGrid build_domain(const DomainSpec& spec);
  friend DomainGrid build_domain_unchecked(const DomainSpec& spec);

 private:
  [[nodiscard]] std::size_t flat(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(ix);
  }

  int nx_ = 0;
  int ny_ = 0;
  double h_ = 0.0;
  double x0_ = 0.0;
  double y0_ = 0.0;
  int num_cores_ = 0;
  std::vector<Label> raster_;
  std::vector<std::uint32_t> index_;
  std::vector<std::size_t> active_;
  std::vector<Label> labels_;
  std::vector<Face> faces_;
  std::vector<std::uint32_t> neighbors_;
  std::vector<std::uint8_t> degree_;
};

namespace detail {

struct Raster {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
};

inline Raster raster_for(const DomainSpec& spec) {
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = xmin;
  double xmax = -xmin;
  double ymax = -xmin;
  auto grow = [&](const Rect& r) {
    xmin = std::min(xmin, r.x);
    ymin = std::min(ymin, r.y);
    xmax = std::max(xmax, r.x_max());
    ymax = std::max(ymax, r.y_max());
  };
  for (const auto& r : spec.cores) grow(r);
  for (const auto& r : spec.channels) grow(r);
  Raster out;
  out.x0 = xmin;
  out.y0 = ymin;
  out.nx = static_cast<int>(std::ceil((xmax - xmin) / spec.h - 1e-9));
  out.ny = static_cast<int>(std::ceil((ymax - ymin) / spec.h - 1e-9));
  return out;
}

inline std::string rect_name(const char* kind, std::size_t i) {
  return std::string(kind) + " " + std::to_string(i + 1);
}

inline Label classify(const DomainSpec& spec, double px, double py) {
  for (std::size_t i = 0; i < spec.cores.size(); ++i) {
    if (spec.cores[i].contains(px, py)) return Label::core(static_cast<int>(i));
  }
  for (const auto& c : spec.channels) {
    if (c.contains(px, py)) return Label::channel();
  }
  return Label::outside();
}

}  // namespace detail

/// Builds the grid without validating the spec. Only for specs already known
/// to be well-formed (positive sizes and spacing).
inline DomainGrid build_domain_unchecked(const DomainSpec& spec) {
  const auto raster = detail::raster_for(spec);
  DomainGrid g;
  g.nx_ = raster.nx;
  g.ny_ = raster.ny;
  g.h_ = spec.h;
  g.x0_ = raster.x0;
  g.y0_ = raster.y0;
  g.num_cores_ = static_cast<int>(spec.cores.size());
  const std::size_t n = static_cast<std::size_t>(g.nx_) * static_cast<std::size_t>(g.ny_);
  g.raster_.resize(n);
  g.index_.assign(n, DomainGrid::kNone);
  for (int iy = 0; iy < g.ny_; ++iy) {
    for (int ix = 0; ix < g.nx_; ++ix) {
      const auto lab = detail::classify(spec, g.center_x(ix), g.center_y(iy));
      const auto f = g.flat(ix, iy);
      g.raster_[f] = lab;
      if (lab.in_domain()) {
        g.index_[f] = static_cast<std::uint32_t>(g.active_.size());
        g.active_.push_back(f);
        g.labels_.push_back(lab);
      }
    }
  }
  const std::size_t m = g.active_.size();
  g.neighbors_.assign(4 * m, DomainGrid::kNone);
  g.degree_.assign(m, 0);
  constexpr std::array<std::array<int, 2>, 4> offsets{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  for (std::size_t c = 0; c < m; ++c) {
    const int cx = g.ix(c);
    const int cy = g.iy(c);
    for (const auto& [dx, dy] : offsets) {
      const auto nb = g.index(cx + dx, cy + dy);
      if (nb == DomainGrid::kNone) continue;
      g.neighbors_[4 * c + g.degree_[c]++] = nb;
      if (nb > c) g.faces_.push_back({static_cast<std::uint32_t>(c), nb});
    }
  }
  return g;
}

/// Number of 4-connected components of the active cells.
inline std::size_t count_components(const DomainGrid& grid) {
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::size_t components = 0;
  std::queue<std::uint32_t> todo;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = 1;
    todo.push(static_cast<std::uint32_t>(s));
    while (!todo.empty()) {
      const auto c = todo.front();
      todo.pop();
      for (auto nb : grid.neighbors(c)) {
        if (!seen[nb]) {
          seen[nb] = 1;
          todo.push(nb);
        }
      }
    }
  }
  return components;
}

inline std::vector<Violation> validate_spec(const DomainSpec& spec) {
  std::vector<Violation> out;
  if (spec.cores.empty()) out.push_back({ViolationKind::NoCores, "at least one core is required", {}});
  if (!(spec.h > 0.0) || !std::isfinite(spec.h)) {
    out.push_back({ViolationKind::BadSpacing, "h = " + std::to_string(spec.h), {}});
    return out;
  }
  bool sizes_ok = true;
  auto check_size = [&](const Rect& r, const char* kind, std::size_t i) {
    if (!(r.width > 0.0) || !(r.height > 0.0)) {
      sizes_ok = false;
      out.push_back({ViolationKind::DegenerateRect, detail::rect_name(kind, i) + " has width or height <= 0",
                     {detail::rect_name(kind, i)}});
    }
  };
  for (std::size_t i = 0; i < spec.cores.size(); ++i) check_size(spec.cores[i], "core", i);
  for (std::size_t i = 0; i < spec.channels.size(); ++i) check_size(spec.channels[i], "channel", i);
  if (!sizes_ok || spec.cores.empty()) return out;

  for (std::size_t i = 0; i < spec.cores.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.cores.size(); ++j) {
      const double gap = rect_gap(spec.cores[i], spec.cores[j]);
      if (gap < spec.h * (1.0 - 1e-9)) {
        out.push_back({ViolationKind::CoresNotDisjoint,
                       "gap " + std::to_string(gap) + " is below one cell (h = " + std::to_string(spec.h) + ")",
                       {detail::rect_name("core", i), detail::rect_name("core", j)}});
      }
    }
  }
  for (std::size_t i = 0; i < spec.channels.size(); ++i) {
    if (spec.channels[i].thickness() < kMinChannelCells * spec.h * (1.0 - 1e-9)) {
      out.push_back({ViolationKind::ChannelTooThin,
                     "thickness " + std::to_string(spec.channels[i].thickness()) + " < " +
                         std::to_string(kMinChannelCells) + "h",
                     {detail::rect_name("channel", i)}});
    }
  }

  const auto raster = detail::raster_for(spec);
  if (static_cast<double>(raster.nx) * raster.ny > 5e7) {
    out.push_back({ViolationKind::GridTooLarge,
                   std::to_string(raster.nx) + "x" + std::to_string(raster.ny) + " cells", {}});
    return out;
  }
  const auto grid = build_domain_unchecked(spec);

  std::vector<std::size_t> core_cells(spec.cores.size(), 0);
  for (auto lab : grid.labels()) {
    if (lab.is_core()) ++core_cells[static_cast<std::size_t>(lab.core_index())];
  }
  for (std::size_t i = 0; i < core_cells.size(); ++i) {
    if (core_cells[i] == 0) {
      out.push_back({ViolationKind::CoreNotResolved, "no cell center lies in the core",
                     {detail::rect_name("core", i)}});
    }
  }

  // Each channel must touch at least two distinct sets (cores or other channels).
  const int ncores = static_cast<int>(spec.cores.size());
  for (std::size_t c = 0; c < spec.channels.size(); ++c) {
    std::set<int> touched;  // cores as i, channels as ncores + j
    for (std::size_t cell = 0; cell < grid.size(); ++cell) {
      if (!grid.label(cell).is_channel()) continue;
      const double px = grid.cell_x(cell);
      const double py = grid.cell_y(cell);
      if (!spec.channels[c].contains(px, py)) continue;
      for (std::size_t o = 0; o < spec.channels.size(); ++o) {
        if (o != c && spec.channels[o].contains(px, py)) touched.insert(ncores + static_cast<int>(o));
      }
      for (auto nb : grid.neighbors(cell)) {
        const auto lab = grid.label(nb);
        if (lab.is_core()) {
          touched.insert(lab.core_index());
          continue;
        }
        const double qx = grid.cell_x(nb);
        const double qy = grid.cell_y(nb);
        for (std::size_t o = 0; o < spec.channels.size(); ++o) {
          if (o != c && spec.channels[o].contains(qx, qy)) touched.insert(ncores + static_cast<int>(o));
        }
      }
    }
    if (touched.size() < 2) {
      out.push_back({ViolationKind::ChannelDangling,
                     "touches " + std::to_string(touched.size()) + " set(s)", {detail::rect_name("channel", c)}});
    }
  }

  if (grid.size() > 0 && count_components(grid) != 1) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < spec.cores.size(); ++i) names.push_back(detail::rect_name("core", i));
    out.push_back({ViolationKind::NotConnected,
                   std::to_string(count_components(grid)) + " connected components in the mask", names});
  }
  return out;
}

inline DomainGrid build_domain(const DomainSpec& spec) {
  auto violations = validate_spec(spec);
  if (!violations.empty()) throw InvalidDomain(std::move(violations));
  return build_domain_unchecked(spec);
}

/// Area of the cells carrying any of the given labels. Outside cells count 0.
inline double measure(const DomainGrid& grid, std::span<const Label> region) {
  for (auto lab : region) {
    const bool known = lab.is_channel() || lab.is_outside() ||
                       (lab.is_core() && lab.core_index() < grid.num_cores());
    if (!known) throw std::out_of_range("unknown label tag " + std::to_string(lab.tag()));
  }
  std::size_t count = 0;
  for (auto lab : grid.labels()) {
    if (std::find(region.begin(), region.end(), lab) != region.end()) ++count;
  }
  return grid.cell_area() * static_cast<double>(count);
}

inline double measure(const DomainGrid& grid, Label region) {
  return measure(grid, std::span<const Label>(&region, 1));
}

/// |Ω_ε|: every active cell.
inline double measure_domain(const DomainGrid& grid) {
  return grid.cell_area() * static_cast<double>(grid.size());
}

/// |Ω_0|: union of the cores.
inline double measure_cores(const DomainGrid& grid) {
  std::size_t count = 0;
  for (auto lab : grid.labels()) count += lab.is_core() ? 1 : 0;
  return grid.cell_area() * static_cast<double>(count);
}

/// Every raster cell as `x,y,label`.
inline void write_domain_csv(std::ostream& os, const DomainGrid& grid) {
  os << "x,y,label\n";
  char buf[64];
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,", grid.center_x(ix), grid.center_y(iy));
      os << buf << grid.raster_label(ix, iy).name() << '\n';
    }
  }
}

/// Sets the thin dimension of every channel to `width`, keeping its centerline.
inline DomainSpec with_channel_width(DomainSpec spec, double width) {
  for (auto& c : spec.channels) {
    if (c.height <= c.width) {
      c.y += 0.5 * (c.height - width);
      c.height = width;
    } else {
      c.x += 0.5 * (c.width - width);
      c.width = width;
    }
  }
  return spec;
}

/// Two unit squares one unit apart joined by a horizontal channel of the given width.
inline DomainSpec canonical_dumbbell(double h = 0.025, double channel_width = 0.1) {
  DomainSpec spec;
  spec.h = h;
  spec.cores = {{0.0, 0.0, 1.0, 1.0}, {2.0, 0.0, 1.0, 1.0}};
  spec.channels = {{1.0, 0.5 - 0.5 * channel_width, 1.0, channel_width}};
  return spec;
}

}  // namespace coexist
