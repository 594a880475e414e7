#pragma once

// Interpreter, finite differences, sampled epsilon-delta limit checks and
// numeric function equality.

#include "mathdsl/core.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mathdsl {

struct NumericConfig {
  std::vector<double> eps_grid{1e-1, 1e-2, 1e-3, 1e-4};
  // 24 values log-spaced from 1 down to 1e-9.
  std::vector<double> delta_candidates = default_deltas();
  std::size_t samples_per_delta = 128;
  std::uint64_t seed = 0xD51;
  double tol = 1e-9;
  double fd_step = 1e-5;
  // Sample count for numeric function equality.
  std::size_t equality_samples = 64;

  static std::vector<double> default_deltas();
  // Throws DiagnosticError unless every value is positive and both grids
  // are strictly descending.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Evaluation

// Call-by-value. Lim evaluates through numeric_limit, D and D[i] through
// symbolic differentiation of the closed function. Throws DiagnosticError
// (EvaluationError, NonConvergence, NonDifferentiable, ...).
Value eval(const Expr& e, const Env& env = {}, const NumericConfig& cfg = {});

// Applies a function value. `site` locates errors.
Value apply(const Value& f, const Value& arg, const NumericConfig& cfg = {},
            const SourceSpan& site = {});

double apply_real(const Value& f, double x, const NumericConfig& cfg = {});

// Closed expression denoting a value: numbers become exact literals and
// closures their lambdas with the captured environment substituted.
Expr quote(const Value& v);

// Closes e over env by substituting quoted values for its free names.
Expr close_over(const Expr& e, const Env& env);

// Central difference at h = cfg.fd_step.
double numeric_derivative(const Value& f, double x, const NumericConfig& cfg);

// ---------------------------------------------------------------------------
// Limits

struct DeltaChoice {
  double eps;
  double delta;
};

struct LimitVerdict {
  enum class Kind { Verified, Refuted, Inconclusive };
  Kind kind = Kind::Inconclusive;
  // Verified: the first working delta for each epsilon.
  std::vector<DeltaChoice> deltas;
  // Refuted: the failing epsilon, the witness point and |f x - L|
  // (infinite when f fails to evaluate at x).
  double eps = 0;
  double witness = 0;
  double deviation = 0;
  // Inconclusive
  std::string reason;
};

std::string_view to_string(LimitVerdict::Kind k);

// Sampled check of: for every eps in the grid there is a delta among the
// candidates with |f x - L| < eps whenever 0 < |x - a| < delta, x in dom.
// Samples depend only on (seed, delta index, sample index).
LimitVerdict check_limit(const Expr& f, double a, double L, const DomainSet& dom,
                         const NumericConfig& cfg, const Env& env = {});
LimitVerdict check_limit(const Value& f, double a, double L, const DomainSet& dom,
                         const NumericConfig& cfg);

// One-sided sequences at a +- h 2^-k (k = 0..20), accelerated by Richardson
// extrapolation. Throws DiagnosticError(NonConvergence).
double numeric_limit(const Value& f, double a, const DomainSet& dom, const NumericConfig& cfg);
double numeric_limit(const Expr& f, double a, const DomainSet& dom, const NumericConfig& cfg,
                     const Env& env = {});

// ---------------------------------------------------------------------------
// Function equality

struct FuncEquality {
  bool pass = false;
  std::size_t compared = 0;
  // Largest relative difference seen.
  double max_diff = 0;
  // Fail: the first point where the sides disagree or fail to evaluate.
  double witness = 0;
  std::string reason;
};

// Samples cfg.equality_samples points of dom (clipped to [-10, 10] when
// unbounded).
FuncEquality func_equal_numeric(const Expr& a, const Expr& b, const DomainSet& dom,
                                const NumericConfig& cfg, const Env& env = {});

// ---------------------------------------------------------------------------
// Deterministic sampling

// Uniform doubles in [0, 1) from a stream keyed by the seed and indices.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t stream);
  double uniform();

 private:
  std::mt19937_64 rng_;
};

// A point of dom, preferring [-window, window]; nullopt for an empty domain
// or when the redraw budget runs out.
std::optional<double> sample_domain(const DomainSet& dom, SampleStream& s, double window = 10.0);

}  // namespace mathdsl
