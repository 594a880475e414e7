#include "mathdsl/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace mathdsl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool interval_empty(const Interval& iv) {
  if (iv.lo > iv.hi) return true;
  if (iv.lo == iv.hi) return !(iv.lo_closed && iv.hi_closed);
  return false;
}

bool interval_contains(const Interval& iv, double x) {
  if (x < iv.lo || x > iv.hi) return false;
  if (x == iv.lo && !iv.lo_closed) return false;
  if (x == iv.hi && !iv.hi_closed) return false;
  return true;
}

std::string format_bound(double x) {
  if (x == kInf) return "inf";
  if (x == -kInf) return "-inf";
  return fmt::format("{}", x);
}

}  // namespace

DomainSet::DomainSet(std::vector<Interval> intervals, std::vector<double> punctures) {
  for (auto& iv : intervals) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) continue;
    if (std::isinf(iv.lo)) iv.lo_closed = false;
    if (std::isinf(iv.hi)) iv.hi_closed = false;
    if (!interval_empty(iv)) intervals_.push_back(iv);
  }
  std::sort(intervals_.begin(), intervals_.end(), [](const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.lo_closed && !b.lo_closed;
  });
  std::vector<Interval> merged;
  for (const auto& iv : intervals_) {
    if (!merged.empty()) {
      auto& last = merged.back();
      const bool overlaps = iv.lo < last.hi || (iv.lo == last.hi && (iv.lo_closed || last.hi_closed));
      if (overlaps) {
        if (iv.hi > last.hi) {
          last.hi = iv.hi;
          last.hi_closed = iv.hi_closed;
        } else if (iv.hi == last.hi) {
          last.hi_closed = last.hi_closed || iv.hi_closed;
        }
        continue;
      }
    }
    merged.push_back(iv);
  }
  intervals_ = std::move(merged);

  for (double p : punctures) {
    if (std::isnan(p)) continue;
    const bool inside = std::any_of(intervals_.begin(), intervals_.end(),
                                    [&](const Interval& iv) { return interval_contains(iv, p); });
    if (inside) punctures_.push_back(p);
  }
  std::sort(punctures_.begin(), punctures_.end());
  punctures_.erase(std::unique(punctures_.begin(), punctures_.end()), punctures_.end());
}

DomainSet DomainSet::reals() { return DomainSet({{-kInf, kInf, false, false}}, {}); }

DomainSet DomainSet::reals_except(std::vector<double> punctures) {
  return DomainSet({{-kInf, kInf, false, false}}, std::move(punctures));
}

DomainSet DomainSet::interval(double lo, double hi, bool lo_closed, bool hi_closed) {
  return DomainSet({{lo, hi, lo_closed, hi_closed}}, {});
}

bool DomainSet::contains(double x) const {
  if (std::isnan(x)) return false;
  if (std::binary_search(punctures_.begin(), punctures_.end(), x)) return false;
  return std::any_of(intervals_.begin(), intervals_.end(),
                     [&](const Interval& iv) { return interval_contains(iv, x); });
}

bool in_domain(double x, const DomainSet& dom) { return dom.contains(x); }

std::string DomainSet::to_string() const {
  if (intervals_.empty()) return "{}";
  std::string out;
  if (intervals_.size() == 1 && intervals_[0].lo == -kInf && intervals_[0].hi == kInf) {
    out = "R";
  } else {
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      const auto& iv = intervals_[i];
      if (i > 0) out += " U ";
      out += fmt::format("{}{},{}{}", iv.lo_closed ? '[' : '(', format_bound(iv.lo),
                         format_bound(iv.hi), iv.hi_closed ? ']' : ')');
    }
  }
  if (!punctures_.empty()) {
    out += "\\{";
    for (std::size_t i = 0; i < punctures_.size(); ++i) {
      if (i > 0) out += ",";
      out += format_bound(punctures_[i]);
    }
    out += "}";
  }
  return out;
}

namespace {

class DomainParser {
 public:
  explicit DomainParser(std::string_view text) : text_(text) {}

  DomainSet parse() {
    std::vector<Interval> pieces;
    pieces.push_back(piece());
    while (true) {
      skip_ws();
      if (accept("U") || accept("\xE2\x88\xAA")) {  // U or ∪
        pieces.push_back(piece());
        continue;
      }
      break;
    }
    std::vector<double> punctures;
    skip_ws();
    if (accept("\\")) {
      expect("{");
      skip_ws();
      if (!accept("}")) {
        punctures.push_back(number());
        while (accept(",")) punctures.push_back(number());
        expect("}");
      }
    }
    skip_ws();
    if (pos_ != text_.size()) error("unexpected trailing input");
    return DomainSet(std::move(pieces), std::move(punctures));
  }

 private:
  Interval piece() {
    skip_ws();
    if (accept("R") || accept("\xE2\x84\x9D")) return {-kInf, kInf, false, false};  // ℝ
    bool lo_closed;
    if (accept("[")) {
      lo_closed = true;
    } else if (accept("(")) {
      lo_closed = false;
    } else {
      error("expected `R`, `(` or `[`");
    }
    const double lo = number();
    expect(",");
    const double hi = number();
    skip_ws();
    bool hi_closed;
    if (accept("]")) {
      hi_closed = true;
    } else if (accept(")")) {
      hi_closed = false;
    } else {
      error("expected `)` or `]`");
    }
    if (lo > hi) error("empty interval: lower bound exceeds upper bound");
    return {lo, hi, lo_closed, hi_closed};
  }

  double number() {
    skip_ws();
    bool negative = false;
    if (accept("-")) negative = true;
    else accept("+");
    skip_ws();
    if (accept("inf")) return negative ? -kInf : kInf;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) error("expected a number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return negative ? -value : value;
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!accept(token)) error(fmt::format("expected `{}`", token));
  }

  [[noreturn]] void error(const std::string& what) {
    SourceSpan span{pos_, pos_, 1, static_cast<std::uint32_t>(pos_ + 1), 1,
                    static_cast<std::uint32_t>(pos_ + 1)};
    fail(DiagKind::SyntaxError, fmt::format("domain spec: {}", what), span);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

DomainSet DomainSet::parse(std::string_view text) { return DomainParser(text).parse(); }

}  // namespace mathdsl
