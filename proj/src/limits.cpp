#include "mathdsl/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace mathdsl {

std::vector<double> NumericConfig::default_deltas() {
  std::vector<double> out;
  for (int i = 0; i < 24; ++i) out.push_back(std::pow(10.0, -9.0 * i / 23.0));
  return out;
}

void NumericConfig::validate() const {
  auto descending = [](const std::vector<double>& v, std::string_view what) {
    if (v.empty()) fail(DiagKind::SyntaxError, fmt::format("{} must not be empty", what));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0) || !std::isfinite(v[i])) {
        fail(DiagKind::SyntaxError, fmt::format("{} values must be positive", what));
      }
      if (i && !(v[i] < v[i - 1])) {
        fail(DiagKind::SyntaxError, fmt::format("{} must be strictly descending", what));
      }
    }
  };
  descending(eps_grid, "eps grid");
  descending(delta_candidates, "delta candidates");
  if (samples_per_delta == 0 || equality_samples == 0) {
    fail(DiagKind::SyntaxError, "sample counts must be positive");
  }
  if (!(tol > 0) || !(fd_step > 0)) fail(DiagKind::SyntaxError, "tol and fd-step must be positive");
}

std::string_view to_string(LimitVerdict::Kind k) {
  switch (k) {
    case LimitVerdict::Kind::Verified: return "Verified";
    case LimitVerdict::Kind::Refuted: return "Refuted";
    case LimitVerdict::Kind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Sampling

SampleStream::SampleStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  rng_.seed(seq);
}

double SampleStream::uniform() {
  // 53 random bits; the std distributions are not specified bit-exactly.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::optional<double> sample_domain(const DomainSet& dom, SampleStream& s, double window) {
  struct Piece {
    double lo, hi;
  };
  std::vector<Piece> pieces;
  double total = 0;
  for (const auto& iv : dom.intervals()) {
    const double lo = std::max(iv.lo, -window);
    const double hi = std::min(iv.hi, window);
    if (hi > lo) {
      pieces.push_back({lo, hi});
      total += hi - lo;
    }
  }
  if (pieces.empty()) {
    // Nothing inside the window: fall back to finite stretches of each piece.
    for (const auto& iv : dom.intervals()) {
      double lo = iv.lo, hi = iv.hi;
      if (std::isinf(lo) && std::isinf(hi)) lo = -window, hi = window;
      else if (std::isinf(lo)) lo = hi - 2 * window;
      else if (std::isinf(hi)) hi = lo + 2 * window;
      if (hi > lo) {
        pieces.push_back({lo, hi});
        total += hi - lo;
      } else if (hi == lo && dom.contains(lo)) {
        return lo;
      }
    }
  }
  if (pieces.empty()) return std::nullopt;
  for (int attempt = 0; attempt < 64; ++attempt) {
    double pick = s.uniform() * total;
    const Piece* chosen = &pieces.back();
    for (const auto& p : pieces) {
      if (pick < p.hi - p.lo) {
        chosen = &p;
        break;
      }
      pick -= p.hi - p.lo;
    }
    const double x = chosen->lo + s.uniform() * (chosen->hi - chosen->lo);
    if (dom.contains(x)) return x;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Epsilon-delta checking

namespace {

constexpr double kLogDecades = 6.0;
constexpr int kRedraws = 16;

struct DeltaSamples {
  std::vector<double> xs;
  std::vector<double> deviations;
  bool thin = false;
};

DeltaSamples draw(const Value& f, double a, double L, double delta, std::size_t j,
                  const DomainSet& dom, const NumericConfig& cfg) {
  DeltaSamples out;
  SampleStream s(cfg.seed, j);
  const std::size_t m = cfg.samples_per_delta;
  const std::size_t half = m / 2;
  const std::size_t strata = std::max<std::size_t>(1, half / 2);
  for (std::size_t k = 0; k < m; ++k) {
    for (int attempt = 0; attempt < kRedraws; ++attempt) {
      double x;
      if (k < half) {
        // Log-spaced offsets toward a, alternating sides.
        const double side = k % 2 == 0 ? 1.0 : -1.0;
        const double stratum = static_cast<double>((k / 2) % strata);
        const double t = (stratum + s.uniform()) / static_cast<double>(strata);
        x = a + side * delta * std::pow(10.0, -kLogDecades * t);
      } else {
        x = a + delta * (2 * s.uniform() - 1);
      }
      const double gap = std::fabs(x - a);
      if (gap == 0 || !(gap < delta) || !dom.contains(x)) continue;
      double dev;
      try {
        dev = std::fabs(apply_real(f, x, cfg) - L);
      } catch (const DiagnosticError&) {
        dev = std::numeric_limits<double>::infinity();
      }
      out.xs.push_back(x);
      out.deviations.push_back(dev);
      break;
    }
  }
  out.thin = out.xs.size() < std::max<std::size_t>(1, m / 4);
  return out;
}

}  // namespace

LimitVerdict check_limit(const Value& f, double a, double L, const DomainSet& dom,
                         const NumericConfig& cfg) {
  cfg.validate();
  if (!f.is_fun()) fail(DiagKind::EvaluationError, "check_limit needs a function");

  std::vector<DeltaSamples> table;
  for (std::size_t j = 0; j < cfg.delta_candidates.size(); ++j) {
    table.push_back(draw(f, a, L, cfg.delta_candidates[j], j, dom, cfg));
  }
  const bool all_thin =
      std::all_of(table.begin(), table.end(), [](const DeltaSamples& d) { return d.thin; });

  LimitVerdict verdict;
  if (all_thin) {
    verdict.kind = LimitVerdict::Kind::Inconclusive;
    verdict.reason = fmt::format(
        "too few sample points of the domain near {} (needed {} per delta)", a,
        std::max<std::size_t>(1, cfg.samples_per_delta / 4));
    return verdict;
  }

  for (const double eps : cfg.eps_grid) {
    std::optional<double> chosen;
    for (std::size_t j = 0; j < table.size() && !chosen; ++j) {
      const auto& d = table[j];
      if (d.thin) continue;
      const bool works = std::all_of(d.deviations.begin(), d.deviations.end(),
                                     [&](double dev) { return dev < eps; });
      if (works) chosen = cfg.delta_candidates[j];
    }
    if (chosen) {
      verdict.deltas.push_back({eps, *chosen});
      continue;
    }
    // No candidate works: report the worst point at the smallest usable delta.
    std::size_t last = table.size();
    while (last > 0 && table[last - 1].thin) --last;
    const auto& d = table[last - 1];
    const auto worst = std::max_element(d.deviations.begin(), d.deviations.end());
    verdict.kind = LimitVerdict::Kind::Refuted;
    verdict.deltas.clear();
    verdict.eps = eps;
    verdict.witness = d.xs[static_cast<std::size_t>(worst - d.deviations.begin())];
    verdict.deviation = *worst;
    return verdict;
  }
  verdict.kind = LimitVerdict::Kind::Verified;
  return verdict;
}

LimitVerdict check_limit(const Expr& f, double a, double L, const DomainSet& dom,
                         const NumericConfig& cfg, const Env& env) {
  return check_limit(eval(f, env, cfg), a, L, dom, cfg);
}

// ---------------------------------------------------------------------------
// Limits by extrapolation

namespace {

constexpr int kSteps = 21;
constexpr int kRichardsonLevels = 5;
constexpr std::size_t kMinPoints = 4;

struct SideLimit {
  bool available = false;
  std::optional<double> value;
};

SideLimit one_side(const Value& f, double a, double side, const DomainSet& dom,
                   const NumericConfig& cfg) {
  const double h0 = std::max(1.0, std::fabs(a)) / 8;
  // Longest run of evaluable points ending at the smallest step.
  std::vector<double> values;
  for (int k = 0; k < kSteps; ++k) {
    const double x = a + side * std::ldexp(h0, -k);
    std::optional<double> v;
    if (x != a && dom.contains(x)) {
      try {
        v = apply_real(f, x, cfg);
      } catch (const DiagnosticError&) {
      }
    }
    if (v) {
      values.push_back(*v);
    } else {
      values.clear();
    }
  }
  SideLimit out;
  if (values.size() < kMinPoints) return out;
  out.available = true;

  std::vector<std::vector<double>> t(values.size());
  std::vector<double> estimates;
  for (std::size_t i = 0; i < values.size(); ++i) {
    t[i].push_back(values[i]);
    const std::size_t levels = std::min<std::size_t>(i, kRichardsonLevels);
    for (std::size_t m = 1; m <= levels; ++m) {
      const double factor = std::ldexp(1.0, static_cast<int>(m)) - 1;
      t[i].push_back(t[i][m - 1] + (t[i][m - 1] - t[i - 1][m - 1]) / factor);
    }
    estimates.push_back(t[i].back());
  }
  for (std::size_t i = 2; i < estimates.size(); ++i) {
    const double scale = std::max({1.0, std::fabs(estimates[i]), std::fabs(estimates[i - 1])});
    if (std::isfinite(estimates[i]) &&
        std::fabs(estimates[i] - estimates[i - 1]) <= cfg.tol * scale) {
      out.value = estimates[i];
      return out;
    }
  }
  return out;
}

}  // namespace

double numeric_limit(const Value& f, double a, const DomainSet& dom, const NumericConfig& cfg) {
  if (!f.is_fun()) fail(DiagKind::EvaluationError, "lim needs a function");
  const SideLimit right = one_side(f, a, 1.0, dom, cfg);
  const SideLimit left = one_side(f, a, -1.0, dom, cfg);
  if (!right.available && !left.available) {
    fail(DiagKind::NonConvergence,
         fmt::format("no evaluable points of the function near {}", a));
  }
  if ((right.available && !right.value) || (left.available && !left.value)) {
    fail(DiagKind::NonConvergence,
         fmt::format("the values near {} do not settle (oscillation or divergence)", a));
  }
  if (right.value && left.value) {
    const double scale = std::max({1.0, std::fabs(*right.value), std::fabs(*left.value)});
    if (std::fabs(*right.value - *left.value) > 10 * cfg.tol * scale) {
      fail(DiagKind::NonConvergence,
           fmt::format("one-sided limits at {} differ: {} from the right, {} from the left", a,
                       *right.value, *left.value));
    }
    return (*right.value + *left.value) / 2;
  }
  return right.value ? *right.value : *left.value;
}

double numeric_limit(const Expr& f, double a, const DomainSet& dom, const NumericConfig& cfg,
                     const Env& env) {
  return numeric_limit(eval(f, env, cfg), a, dom, cfg);
}

// ---------------------------------------------------------------------------
// Function equality

FuncEquality func_equal_numeric(const Expr& a, const Expr& b, const DomainSet& dom,
                                const NumericConfig& cfg, const Env& env) {
  const Value fa = eval(a, env, cfg);
  const Value fb = eval(b, env, cfg);
  FuncEquality out;
  SampleStream s(cfg.seed, 0xE0E0);
  for (std::size_t k = 0; k < cfg.equality_samples; ++k) {
    const auto x = sample_domain(dom, s);
    if (!x) break;
    double ya, yb;
    try {
      ya = apply_real(fa, *x, cfg);
      yb = apply_real(fb, *x, cfg);
    } catch (const DiagnosticError& err) {
      out.pass = false;
      out.witness = *x;
      out.reason = fmt::format("evaluation failed at {}: {}", *x, err.what());
      return out;
    }
    const double diff = std::fabs(ya - yb) / std::max({1.0, std::fabs(ya), std::fabs(yb)});
    out.max_diff = std::max(out.max_diff, diff);
    ++out.compared;
    if (diff > cfg.tol) {
      out.pass = false;
      out.witness = *x;
      out.reason = fmt::format("sides differ at {}: {} vs {}", *x, ya, yb);
      return out;
    }
  }
  if (out.compared == 0) {
    out.reason = "no sample points in the domain";
    return out;
  }
  out.pass = true;
  return out;
}

}  // namespace mathdsl
