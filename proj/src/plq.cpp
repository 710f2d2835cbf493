#include "bolza/plq.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace bolza {

namespace {

// Tolerance for accepting user-supplied piece data as continuous/convex.
constexpr double kJoinTol = 1e-8;

std::string describe(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Plq Plq::linear(double p, double q) {
  Plq f;
  f.pieces_[0] = {0.0, p, q};
  return f;
}

Plq Plq::quadratic(double a, double p, double q) {
  if (a < 0.0) throw std::invalid_argument("Plq::quadratic: negative curvature");
  Plq f;
  f.pieces_[0] = {a, p, q};
  return f;
}

Plq Plq::abs_value(double scale) {
  if (scale <= 0.0) throw std::invalid_argument("Plq::abs_value: scale must be positive");
  Plq f;
  f.breaks_ = {0.0};
  f.pieces_ = {{0.0, -scale, 0.0}, {0.0, scale, 0.0}};
  return f;
}

Plq Plq::indicator(double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("Plq::indicator: empty interval");
  Plq f;
  f.lo_ = lo;
  f.hi_ = hi;
  f.canonicalize();
  return f;
}

Plq Plq::point(double z0, double value) {
  if (!std::isfinite(z0) || !std::isfinite(value))
    throw std::invalid_argument("Plq::point: non-finite data");
  Plq f;
  f.lo_ = f.hi_ = z0;
  f.pieces_ = {{0.0, 0.0, value}};
  return f;
}

Plq Plq::from_parts(double lo, double hi, std::vector<double> breaks,
                    std::vector<Piece> pieces) {
  Plq f;
  f.lo_ = lo;
  f.hi_ = hi;
  f.breaks_ = std::move(breaks);
  f.pieces_ = std::move(pieces);
  f.canonicalize();
  f.validate();
  return f;
}

void Plq::validate() const {
  if (std::isnan(lo_) || std::isnan(hi_) || lo_ > hi_ || lo_ == kInf || hi_ == -kInf)
    throw std::invalid_argument("Plq: empty or invalid domain [" + describe(lo_) +
                                ", " + describe(hi_) + "]");
  if (pieces_.size() != breaks_.size() + 1)
    throw std::invalid_argument("Plq: piece/breakpoint count mismatch");
  for (const Piece& pc : pieces_) {
    if (!std::isfinite(pc.a) || !std::isfinite(pc.p) || !std::isfinite(pc.q))
      throw std::invalid_argument("Plq: non-finite piece coefficients");
    if (pc.a < 0.0)
      throw std::invalid_argument("Plq: negative quadratic coefficient " + describe(pc.a));
  }
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    double b = breaks_[i];
    if (!std::isfinite(b)) throw std::invalid_argument("Plq: non-finite breakpoint");
    if (i > 0 && !(breaks_[i - 1] < b))
      throw std::invalid_argument("Plq: breakpoints not strictly increasing");
    if (!(b > lo_ && b < hi_))
      throw std::invalid_argument("Plq: breakpoint outside the domain interior");
    double vl = pieces_[i].eval(b), vr = pieces_[i + 1].eval(b);
    double scale = 1.0 + std::abs(vl) + std::abs(vr);
    if (std::abs(vl - vr) > kJoinTol * scale)
      throw std::invalid_argument("Plq: discontinuity at breakpoint " + describe(b));
    double sl = pieces_[i].slope(b), sr = pieces_[i + 1].slope(b);
    double sscale = 1.0 + std::abs(sl) + std::abs(sr);
    if (sl > sr + kJoinTol * sscale)
      throw std::invalid_argument("Plq: slope decreases at breakpoint " + describe(b) +
                                  " (not convex)");
  }
}

std::size_t Plq::piece_index_right(double z) const {
  return static_cast<std::size_t>(
      std::upper_bound(breaks_.begin(), breaks_.end(), z) - breaks_.begin());
}

std::size_t Plq::piece_index_left(double z) const {
  return static_cast<std::size_t>(
      std::lower_bound(breaks_.begin(), breaks_.end(), z) - breaks_.begin());
}

double Plq::operator()(double z) const {
  if (std::isnan(z)) throw std::invalid_argument("Plq: NaN argument");
  // Points within representation noise of the domain sit on it: prefix-sum
  // state evaluation must not turn an active box constraint into +inf over a
  // final-ulp rounding difference.
  double snap = 4e-16 * (1.0 + std::abs(z));
  if (z < lo_ - snap || z > hi_ + snap) return kInf;
  z = std::min(std::max(z, lo_), hi_);
  return pieces_[piece_index_right(z)].eval(z);
}

double Plq::slope_left(double z) const { return pieces_[piece_index_left(z)].slope(z); }

double Plq::slope_right(double z) const { return pieces_[piece_index_right(z)].slope(z); }

double Plq::asymptotic_slope_pos() const {
  if (hi_ < kInf || pieces_.back().a > 0.0) return kInf;
  return pieces_.back().p;
}

double Plq::asymptotic_slope_neg() const {
  if (lo_ > -kInf || pieces_.front().a > 0.0) return -kInf;
  return pieces_.front().p;
}

std::optional<Interval> Plq::subdifferential(double z, double snap) const {
  if (std::isnan(z)) throw std::invalid_argument("Plq::subdifferential: NaN argument");
  if (z < lo_ - snap || z > hi_ + snap) return std::nullopt;
  if (lo_ == hi_) return Interval::all();
  double zz = std::min(std::max(z, lo_), hi_);
  if (snap > 0.0 && !breaks_.empty()) {
    auto it = std::lower_bound(breaks_.begin(), breaks_.end(), zz);
    double best = kInf, at = zz;
    if (it != breaks_.end() && std::abs(*it - zz) < best) {
      best = std::abs(*it - zz);
      at = *it;
    }
    if (it != breaks_.begin() && std::abs(*(it - 1) - zz) < best) {
      best = std::abs(*(it - 1) - zz);
      at = *(it - 1);
    }
    if (best <= snap) zz = at;
  }
  if (zz <= lo_ + snap && lo_ > -kInf) return Interval{-kInf, slope_right(lo_)};
  if (zz >= hi_ - snap && hi_ < kInf) return Interval{slope_left(hi_), kInf};
  return Interval{slope_left(zz), slope_right(zz)};
}

Plq Plq::conjugate() const {
  Plq f = *this;
  f.canonicalize();
  if (f.lo_ == f.hi_) {
    // Indicator of a point plus a constant: conjugate is affine.
    return linear(f.lo_, -f.pieces_[0].eval(f.lo_));
  }

  struct Segment {
    double wlo, whi;
    Piece pc;
  };
  std::vector<Segment> segs;

  std::vector<double> knots;
  knots.reserve(f.breaks_.size() + 2);
  knots.push_back(f.lo_);
  for (double b : f.breaks_) knots.push_back(b);
  knots.push_back(f.hi_);

  if (f.lo_ > -kInf) {
    double s0 = f.pieces_.front().slope(f.lo_);
    segs.push_back({-kInf, s0, {0.0, f.lo_, -f(f.lo_)}});
  }
  for (std::size_t i = 0; i < f.pieces_.size(); ++i) {
    double zl = knots[i], zr = knots[i + 1];
    const Piece& pc = f.pieces_[i];
    if (i >= 1) {
      // Slope jump at an interior breakpoint maps to a linear stretch of the
      // conjugate with slope equal to the breakpoint location.
      double sl = f.pieces_[i - 1].slope(zl);
      double sr = pc.slope(zl);
      if (sr > sl) segs.push_back({sl, sr, {0.0, zl, -f(zl)}});
    }
    if (pc.a > 0.0) {
      double wl = (zl == -kInf) ? -kInf : pc.slope(zl);
      double wr = (zr == kInf) ? kInf : pc.slope(zr);
      if (wr > wl) {
        double inv = 1.0 / (4.0 * pc.a);
        segs.push_back({wl, wr, {inv, -pc.p / (2.0 * pc.a), pc.p * pc.p * inv - pc.q}});
      }
    }
  }
  if (f.hi_ < kInf) {
    double s1 = f.pieces_.back().slope(f.hi_);
    segs.push_back({s1, kInf, {0.0, f.hi_, -f(f.hi_)}});
  }

  if (segs.empty()) {
    // Affine with an unbounded domain: conjugate has a one-point domain.
    double w = f.pieces_.front().p;
    double zbar = std::isfinite(f.lo_) ? f.lo_ : (std::isfinite(f.hi_) ? f.hi_ : 0.0);
    return point(w, w * zbar - f(zbar));
  }

  Plq g;
  g.lo_ = segs.front().wlo;
  g.hi_ = segs.back().whi;
  g.pieces_.clear();
  double cursor = g.lo_;
  for (const Segment& s : segs) {
    double wl = std::max(s.wlo, cursor);
    if (!(s.whi > wl)) continue;  // roundoff sliver
    if (!g.pieces_.empty()) g.breaks_.push_back(wl);
    g.pieces_.push_back(s.pc);
    cursor = s.whi;
  }
  g.hi_ = cursor;
  if (g.pieces_.empty()) {
    double w = segs.front().wlo;
    double zbar = std::isfinite(f.lo_) ? f.lo_ : (std::isfinite(f.hi_) ? f.hi_ : 0.0);
    return point(w, w * zbar - f(zbar));
  }
  g.canonicalize();
  g.validate();
  return g;
}

Plq Plq::recession() const {
  double sp = asymptotic_slope_pos();
  double sn = asymptotic_slope_neg();
  bool pos = sp < kInf;
  bool neg = sn > -kInf;
  if (pos && neg) {
    if (sn == sp) return linear(sp, 0.0);
    Plq h;
    h.breaks_ = {0.0};
    h.pieces_ = {{0.0, sn, 0.0}, {0.0, sp, 0.0}};
    return h;
  }
  if (pos) {
    Plq h;
    h.lo_ = 0.0;
    h.pieces_ = {{0.0, sp, 0.0}};
    return h;
  }
  if (neg) {
    Plq h;
    h.hi_ = 0.0;
    h.pieces_ = {{0.0, sn, 0.0}};
    return h;
  }
  return point(0.0, 0.0);
}

double Plq::prox(double z, double step) const {
  if (!(step > 0.0)) throw std::invalid_argument("Plq::prox: step must be positive");
  if (!std::isfinite(z)) throw std::invalid_argument("Plq::prox: non-finite argument");
  if (lo_ == hi_) return lo_;
  double best_w = 0.0, best_obj = kInf;
  double zl = lo_;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    double zr = (i < breaks_.size()) ? breaks_[i] : hi_;
    const Piece& pc = pieces_[i];
    double w = (z - step * pc.p) / (1.0 + 2.0 * step * pc.a);
    w = std::min(std::max(w, zl), zr);
    double obj = pc.eval(w) + (w - z) * (w - z) / (2.0 * step);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
    }
    zl = zr;
  }
  return best_w;
}

Plq Plq::precompose_affine(double alpha, double beta) const {
  if (alpha == 0.0 || !std::isfinite(alpha) || !std::isfinite(beta))
    throw std::invalid_argument("Plq::precompose_affine: bad coefficients");
  auto map_piece = [&](const Piece& pc) -> Piece {
    return {pc.a * alpha * alpha, 2.0 * pc.a * alpha * beta + pc.p * alpha,
            (pc.a * beta + pc.p) * beta + pc.q};
  };
  Plq g;
  g.pieces_.clear();
  if (alpha > 0.0) {
    g.lo_ = (lo_ == -kInf) ? -kInf : (lo_ - beta) / alpha;
    g.hi_ = (hi_ == kInf) ? kInf : (hi_ - beta) / alpha;
    for (double b : breaks_) g.breaks_.push_back((b - beta) / alpha);
    for (const Piece& pc : pieces_) g.pieces_.push_back(map_piece(pc));
  } else {
    g.lo_ = (hi_ == kInf) ? -kInf : (hi_ - beta) / alpha;
    g.hi_ = (lo_ == -kInf) ? kInf : (lo_ - beta) / alpha;
    for (auto it = breaks_.rbegin(); it != breaks_.rend(); ++it)
      g.breaks_.push_back((*it - beta) / alpha);
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
      g.pieces_.push_back(map_piece(*it));
  }
  g.canonicalize();
  return g;
}

Plq Plq::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("Plq::scaled: factor must be positive and finite");
  Plq g = *this;
  for (Piece& pc : g.pieces_) pc = {c * pc.a, c * pc.p, c * pc.q};
  return g;
}

void Plq::canonicalize(double tol) {
  // Point domain collapses to a single constant piece.
  if (lo_ == hi_) {
    double v = pieces_[piece_index_right(lo_)].eval(lo_);
    breaks_.clear();
    pieces_ = {{0.0, 0.0, v}};
    return;
  }
  // Drop breakpoints outside the open domain together with the piece that
  // becomes unreachable.
  std::vector<double> nb;
  std::vector<Piece> np;
  std::size_t first = 0;
  while (first < breaks_.size() && breaks_[first] <= lo_) ++first;
  std::size_t last = breaks_.size();
  while (last > first && breaks_[last - 1] >= hi_) --last;
  np.push_back(pieces_[first]);
  for (std::size_t i = first; i < last; ++i) {
    nb.push_back(breaks_[i]);
    np.push_back(pieces_[i + 1]);
  }
  breaks_ = std::move(nb);
  pieces_ = std::move(np);
  // Drop pieces whose span is at roundoff scale (conjugation can place a
  // breakpoint a few ulps from a domain end); the neighbour takes over and
  // values move by at most the slope gap times the span.
  auto sliver = [](double l, double r) {
    return std::isfinite(l) && std::isfinite(r) &&
           r - l <= 1e-13 * (1.0 + std::abs(l) + std::abs(r));
  };
  while (!breaks_.empty() && sliver(lo_, breaks_.front())) {
    breaks_.erase(breaks_.begin());
    pieces_.erase(pieces_.begin());
  }
  while (!breaks_.empty() && sliver(breaks_.back(), hi_)) {
    breaks_.pop_back();
    pieces_.pop_back();
  }
  std::size_t i = 0;
  while (i + 1 < breaks_.size()) {
    if (sliver(breaks_[i], breaks_[i + 1])) {
      breaks_.erase(breaks_.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      pieces_.erase(pieces_.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    } else {
      ++i;
    }
  }
  // Merge neighbouring pieces with matching coefficients.
  i = 0;
  while (i < breaks_.size()) {
    const Piece& a = pieces_[i];
    const Piece& b = pieces_[i + 1];
    if (approx(a.a, b.a, tol) && approx(a.p, b.p, tol) && approx(a.q, b.q, tol)) {
      breaks_.erase(breaks_.begin() + static_cast<std::ptrdiff_t>(i));
      pieces_.erase(pieces_.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    } else {
      ++i;
    }
  }
}

Plq operator+(const Plq& f, const Plq& g) {
  double lo = std::max(f.lo(), g.lo());
  double hi = std::min(f.hi(), g.hi());
  if (lo > hi) throw std::invalid_argument("Plq: sum has empty domain");
  if (lo == hi) return Plq::point(lo, f(lo) + g(lo));

  std::vector<double> breaks;
  for (double b : f.breaks())
    if (b > lo && b < hi) breaks.push_back(b);
  for (double b : g.breaks())
    if (b > lo && b < hi) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // Representative point strictly inside each merged piece, used to pick the
  // covering piece of each summand.
  auto inside = [&](double a, double b) {
    if (std::isfinite(a) && std::isfinite(b)) return 0.5 * (a + b);
    if (std::isfinite(a)) return a + 1.0;
    if (std::isfinite(b)) return b - 1.0;
    return 0.0;
  };
  auto piece_at = [](const Plq& h, double z) -> const Plq::Piece& {
    const auto& br = h.breaks();
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(br.begin(), br.end(), z) - br.begin());
    return h.pieces()[i];
  };

  std::vector<Plq::Piece> pieces;
  pieces.reserve(breaks.size() + 1);
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    double a = i == 0 ? lo : breaks[i - 1];
    double b = i == breaks.size() ? hi : breaks[i];
    double z = inside(a, b);
    const Plq::Piece& pf = piece_at(f, z);
    const Plq::Piece& pg = piece_at(g, z);
    pieces.push_back({pf.a + pg.a, pf.p + pg.p, pf.q + pg.q});
  }
  Plq s = Plq::from_parts(lo, hi, std::move(breaks), std::move(pieces));
  s.canonicalize();
  return s;
}

bool Plq::approx_equal(const Plq& other, double tol) const {
  Plq a = *this, b = other;
  a.canonicalize(tol);
  b.canonicalize(tol);
  if (!approx(a.lo_, b.lo_, tol) || !approx(a.hi_, b.hi_, tol)) return false;
  if (a.breaks_.size() != b.breaks_.size()) return false;
  for (std::size_t i = 0; i < a.breaks_.size(); ++i)
    if (!approx(a.breaks_[i], b.breaks_[i], tol)) return false;
  for (std::size_t i = 0; i < a.pieces_.size(); ++i) {
    if (!approx(a.pieces_[i].a, b.pieces_[i].a, tol)) return false;
    if (!approx(a.pieces_[i].p, b.pieces_[i].p, tol)) return false;
    if (!approx(a.pieces_[i].q, b.pieces_[i].q, tol)) return false;
  }
  return true;
}

}  // namespace bolza
