#include "mathdsl/binding.hpp"
#include "mathdsl/calculus.hpp"
#include "mathdsl/parser.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace mathdsl {

// ---------------------------------------------------------------------------
// NormalForm

NormalForm NormalForm::poly(Polynomial p) {
  NormalForm nf;
  nf.kind_ = Kind::Poly;
  for (auto it = p.begin(); it != p.end();) {
    it = it->second == 0 ? p.erase(it) : std::next(it);
  }
  nf.poly_ = std::move(p);
  return nf;
}

NormalForm NormalForm::lambda(std::string param, std::size_t arity, std::vector<std::string> names,
                              NormalForm body) {
  NormalForm nf;
  nf.kind_ = Kind::Lambda;
  nf.param_ = std::move(param);
  nf.arity_ = arity;
  nf.names_ = std::move(names);
  nf.items_.push_back(std::move(body));
  return nf;
}

NormalForm NormalForm::tuple(std::vector<NormalForm> items) {
  NormalForm nf;
  nf.kind_ = Kind::Tuple;
  nf.items_ = std::move(items);
  return nf;
}

std::optional<Rational> NormalForm::constant() const {
  if (kind_ != Kind::Poly) return std::nullopt;
  if (poly_.empty()) return Rational(0);
  if (poly_.size() == 1 && poly_.begin()->first.empty()) return poly_.begin()->second;
  return std::nullopt;
}

bool NormalForm::has_residual() const {
  if (kind_ != Kind::Poly) {
    return std::any_of(items_.begin(), items_.end(),
                       [](const NormalForm& n) { return n.has_residual(); });
  }
  for (const auto& [mono, coeff] : poly_) {
    for (const auto& [gen, power] : mono) {
      if (gen.residual()) return true;
    }
  }
  return false;
}

bool operator==(const NormalForm& a, const NormalForm& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case NormalForm::Kind::Poly:
      return a.poly_ == b.poly_;
    case NormalForm::Kind::Lambda:
      return a.arity_ == b.arity_ && a.param_ == b.param_ && a.items_ == b.items_;
    case NormalForm::Kind::Tuple:
      return a.items_ == b.items_;
  }
  return false;
}

namespace {

// ---------------------------------------------------------------------------
// Polynomial arithmetic

Polynomial constant_poly(const Rational& c) {
  Polynomial p;
  if (c != 0) p[{}] = c;
  return p;
}

Polynomial generator_poly(Generator g, int power = 1) {
  Polynomial p;
  p[{{std::move(g), power}}] = 1;
  return p;
}

Monomial mul_mono(const Monomial& a, const Monomial& b) {
  Monomial out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

Polynomial add(const Polynomial& a, const Polynomial& b, const Rational& scale_b = 1) {
  Polynomial out = a;
  for (const auto& [m, c] : b) {
    Rational& slot = out[m];
    slot += c * scale_b;
    if (slot == 0) out.erase(m);
  }
  return out;
}

Polynomial scale(const Polynomial& a, const Rational& c) {
  Polynomial out;
  if (c == 0) return out;
  for (const auto& [m, v] : a) out[m] = v * c;
  return out;
}

Polynomial mul(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      const Monomial m = mul_mono(ma, mb);
      Rational& slot = out[m];
      slot += ca * cb;
      if (slot == 0) out.erase(m);
    }
  }
  return out;
}

Polynomial power(const Polynomial& a, unsigned long k) {
  Polynomial out = constant_poly(1);
  Polynomial base = a;
  while (k) {
    if (k & 1) out = mul(out, base);
    k >>= 1;
    if (k) base = mul(base, base);
  }
  return out;
}

Rational rational_pow(const Rational& c, long k) {
  Rational out = 1;
  Rational base = k < 0 ? Rational(1) / c : c;
  for (long i = 0; i < std::abs(k); ++i) out *= base;
  return out;
}

std::optional<Rational> constant_of(const Polynomial& p) {
  if (p.empty()) return Rational(0);
  if (p.size() == 1 && p.begin()->first.empty()) return p.begin()->second;
  return std::nullopt;
}

int degree(const Monomial& m) {
  int d = 0;
  for (const auto& [g, k] : m) d += k;
  return d;
}

// ---------------------------------------------------------------------------
// Reconstruction

Expr reconstruct_poly(const Polynomial& p) {
  if (p.empty()) return Expr::lit(0);
  std::vector<std::pair<const Monomial*, Rational>> terms;
  for (const auto& [m, c] : p) terms.emplace_back(&m, c);
  std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    return degree(*a.first) > degree(*b.first);
  });

  std::optional<Expr> sum;
  for (const auto& [mono, coeff] : terms) {
    const bool negative = coeff < 0;
    const Rational magnitude = negative ? Rational(-coeff) : coeff;
    // Left-nested with the coefficient first, so it prints without parentheses.
    std::optional<Expr> product;
    if (magnitude != 1) product = Expr::lit(magnitude);
    std::vector<std::pair<Expr, int>> denominators;
    for (const auto& [gen, k] : *mono) {
      if (gen.kind == Generator::Kind::Inv) {
        denominators.emplace_back(gen.expr, k);
        continue;
      }
      Expr factor = k == 1 ? gen.expr : Expr::pow(gen.expr, Expr::lit(k));
      product = product ? Expr::mul(*product, factor) : factor;
    }
    Expr term = product ? *product : Expr::lit(magnitude);
    for (const auto& [den, k] : denominators) {
      for (int i = 0; i < k; ++i) term = Expr::div(term, den);
    }
    if (!sum) {
      sum = negative ? Expr::neg(term) : term;
    } else {
      sum = negative ? Expr::sub(*sum, term) : Expr::add(*sum, term);
    }
  }
  return *sum;
}

Expr reconstruct_impl(const NormalForm& nf, bool display) {
  switch (nf.kind()) {
    case NormalForm::Kind::Poly:
      return reconstruct_poly(nf.polynomial());
    case NormalForm::Kind::Tuple: {
      std::vector<Expr> items;
      for (const auto& item : nf.items()) items.push_back(reconstruct_impl(item, display));
      return Expr::tuple(std::move(items));
    }
    case NormalForm::Kind::Lambda: {
      const Expr body = reconstruct_impl(nf.body(), display);
      if (!display) {
        std::vector<std::string> pattern;
        if (nf.arity() > 0) pattern = nf.names();
        return Expr::lam(nf.param(), body, std::nullopt, pattern);
      }
      NameSet avoid = all_names(body);
      avoid.erase(nf.param());
      if (nf.arity() == 0) {
        std::string name = nf.names().empty() ? "x" : nf.names().front();
        if (!is_identifier(name) || is_reserved(name)) name = "x";
        if (avoid.count(name)) name = fresh_name(name, avoid);
        return Expr::lam(name, subst(body, nf.param(), Expr::var(name)));
      }
      const std::string name = fresh_name("s", avoid);
      return Expr::lam(name, subst(body, nf.param(), Expr::var(name)), std::nullopt, nf.names());
    }
  }
  return Expr::lit(0);
}

Expr canonical(const NormalForm& nf) { return reconstruct_impl(nf, false); }

// ---------------------------------------------------------------------------
// Normalization of reduced expressions

class Normalizer {
 public:
  NormalForm run(const Expr& e) {
    switch (e.kind()) {
      case Expr::Kind::Lit:
        return NormalForm::poly(constant_poly(e.as<expr::Lit>()->value));
      case Expr::Kind::Var: {
        const std::string name = lookup(e.as<expr::Var>()->name);
        return NormalForm::poly(generator_poly({Generator::Kind::Var, name, Expr::var(name)}));
      }
      case Expr::Kind::Lam: {
        const auto& l = *e.as<expr::Lam>();
        const std::string param = fmt::format("%{}", scope_.size());
        scope_.emplace_back(l.param, param);
        NormalForm body = run(l.body);
        scope_.pop_back();
        std::vector<std::string> names = l.pattern.empty() ? std::vector<std::string>{l.param}
                                                           : l.pattern;
        return NormalForm::lambda(param, l.pattern.size(), std::move(names), std::move(body));
      }
      case Expr::Kind::Tuple: {
        std::vector<NormalForm> items;
        for (const auto& item : e.as<expr::Tuple>()->items) items.push_back(run(item));
        return NormalForm::tuple(std::move(items));
      }
      case Expr::Kind::Proj: {
        const auto& p = *e.as<expr::Proj>();
        NormalForm t = run(p.tuple);
        if (t.kind() == NormalForm::Kind::Tuple && p.index <= t.items().size()) {
          return t.items()[p.index - 1];
        }
        const Expr proj = Expr::proj(p.index, canonical(t));
        const bool variable = p.tuple.as<expr::Var>() != nullptr;
        return generator(variable ? Generator::Kind::Var : Generator::Kind::Opaque, proj);
      }
      case Expr::Kind::BinOp:
        return binop(e);
      case Expr::Kind::Neg: {
        NormalForm x = run(e.as<expr::Neg>()->operand);
        if (x.kind() != NormalForm::Kind::Poly) {
          return generator(Generator::Kind::Opaque, Expr::neg(canonical(x)));
        }
        return NormalForm::poly(scale(x.polynomial(), -1));
      }
      case Expr::Kind::Prim:
        return primitive(*e.as<expr::Prim>());
      default: {
        auto kids = children(e);
        for (auto& k : kids) k = canonical(run(k));
        return generator(Generator::Kind::Opaque, with_children(e, std::move(kids)).with_span({}));
      }
    }
  }

 private:
  std::string lookup(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->first == name) return it->second;
    }
    return name;
  }

  static NormalForm generator(Generator::Kind kind, const Expr& e) {
    return NormalForm::poly(generator_poly({kind, pretty(e), e}));
  }

  // 1 / p as a polynomial when p is a single term, otherwise an Inv
  // generator holding the whole denominator.
  Polynomial invert(const Polynomial& p) {
    if (p.size() == 1) {
      const auto& [mono, coeff] = *p.begin();
      Polynomial out = constant_poly(Rational(1) / coeff);
      for (const auto& [gen, k] : mono) {
        Polynomial factor;
        if (gen.kind == Generator::Kind::Inv) {
          factor = run(gen.expr).polynomial();
        } else {
          factor = generator_poly({Generator::Kind::Inv, pretty(gen.expr), gen.expr});
        }
        out = mul(out, power(factor, static_cast<unsigned long>(k)));
      }
      return out;
    }
    const Expr den = reconstruct_poly(p);
    return generator_poly({Generator::Kind::Inv, pretty(den), den});
  }

  NormalForm binop(const Expr& e) {
    const auto& b = *e.as<expr::BinOp>();
    NormalForm l = run(b.lhs);
    NormalForm r = run(b.rhs);
    if (l.kind() != NormalForm::Kind::Poly || r.kind() != NormalForm::Kind::Poly) {
      return generator(Generator::Kind::Opaque, Expr::binop(b.op, canonical(l), canonical(r)));
    }
    const Polynomial& a = l.polynomial();
    const Polynomial& c = r.polynomial();
    switch (b.op) {
      case BinaryOp::Add: return NormalForm::poly(add(a, c));
      case BinaryOp::Sub: return NormalForm::poly(add(a, c, -1));
      case BinaryOp::Mul: return NormalForm::poly(mul(a, c));
      case BinaryOp::Div:
        if (c.empty()) {
          return generator(Generator::Kind::Opaque, Expr::div(canonical(l), Expr::lit(0)));
        }
        return NormalForm::poly(mul(a, invert(c)));
      case BinaryOp::Pow: {
        const auto k = constant_of(c);
        if (k && is_integer(*k) && abs(*k) <= 64) {
          const long n = static_cast<long>(boost::multiprecision::numerator(*k));
          if (auto base = constant_of(a)) {
            if (*base == 0 && n <= 0) break;
            return NormalForm::poly(constant_poly(rational_pow(*base, n)));
          }
          if (n >= 0) return NormalForm::poly(power(a, static_cast<unsigned long>(n)));
          return NormalForm::poly(power(invert(a), static_cast<unsigned long>(-n)));
        }
        break;
      }
    }
    return generator(Generator::Kind::Pow, Expr::pow(canonical(l), canonical(r)));
  }

  NormalForm primitive(const expr::Prim& p) {
    NormalForm x = run(p.arg);
    if (x.kind() != NormalForm::Kind::Poly) {
      return generator(Generator::Kind::Opaque, Expr::prim(p.fn, canonical(x)));
    }
    const auto c = x.constant();
    switch (p.fn) {
      case Primitive::Sin:
        if (c && *c == 0) return NormalForm::poly({});
        return generator(Generator::Kind::Sin, Expr::prim(p.fn, canonical(x)));
      case Primitive::Cos:
        if (c && *c == 0) return NormalForm::poly(constant_poly(1));
        return generator(Generator::Kind::Cos, Expr::prim(p.fn, canonical(x)));
      case Primitive::Exp:
        if (c && *c == 0) return NormalForm::poly(constant_poly(1));
        return generator(Generator::Kind::Exp, Expr::prim(p.fn, canonical(x)));
      case Primitive::Ln:
        if (c && *c == 1) return NormalForm::poly({});
        return generator(Generator::Kind::Ln, Expr::prim(p.fn, canonical(x)));
      case Primitive::Sqrt:
        if (c && (*c == 0 || *c == 1)) return x;
        return generator(Generator::Kind::Sqrt, Expr::prim(p.fn, canonical(x)));
      case Primitive::Abs:
        if (c) return NormalForm::poly(constant_poly(abs(*c)));
        return generator(Generator::Kind::Abs, Expr::prim(p.fn, canonical(x)));
    }
    return x;
  }

  std::vector<std::pair<std::string, std::string>> scope_;
};

}  // namespace

NormalForm normalize(const Expr& e) { return Normalizer().run(reduce(e)); }

Expr reconstruct(const NormalForm& nf) { return reconstruct_impl(nf, true); }

Expr simplify(const Expr& e) { return reconstruct(normalize(e)); }

}  // namespace mathdsl
