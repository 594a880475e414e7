#include "mathdsl/cli.hpp"

#include "mathdsl/binding.hpp"
#include "mathdsl/calculus.hpp"
#include "mathdsl/lagrange.hpp"
#include "mathdsl/parser.hpp"
#include "mathdsl/serialize.hpp"
#include "mathdsl/types.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "CLI11.hpp"

namespace mathdsl {

namespace {

// Thrown for exit-code-2 conditions after parsing succeeded.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::string_view what) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw std::invalid_argument(fmt::format("{}: `{}` is not a number", what, s));
  }
  return x;
}

std::uint64_t parse_seed(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t x = 0;
  try {
    x = std::stoull(s, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw std::invalid_argument(fmt::format("seed: `{}` is not an integer", s));
  }
  return x;
}

std::vector<double> parse_list(std::string s, std::string_view what) {
  s = trim(s);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_double(item, what));
  return out;
}

struct Options {
  std::string expr;
  std::string file;
  std::string format = "text";
  bool json = false;

  std::optional<double> tol;
  std::optional<std::string> seed;
  std::optional<std::size_t> samples;
  std::optional<std::string> eps_grid;
  std::optional<double> fd_step;
  std::string config;

  std::vector<std::string> decls;
  std::string ambient;
  bool traditional = false;
  std::string state = "t,q,qdot";
  std::string repair;
  std::string path_name = "w";

  std::size_t index = 0;

  std::optional<double> at;
  std::optional<double> value;
  std::string dom = "R";

  std::string lagrangian;
  std::string path;
  std::string window = "0:1";
  std::size_t grid = 201;
  double threshold = 1e-6;
  bool fd = false;
  bool table = false;
};

// One top-level input: an `-e` term or a file binding.
struct Item {
  std::string name;  // empty for -e
  Term term;
};

// Collects findings and results; in JSON mode each finding is one line and
// a summary object closes the output.
class Reporter {
 public:
  Reporter(bool json, std::ostream& out, std::string origin, std::string command)
      : json_(json), out_(out), origin_(std::move(origin)), command_(std::move(command)) {}

  void diagnostic(const Diagnostic& d) {
    ++findings_;
    if (json_) {
      out_ << to_json(d).dump() << '\n';
    } else {
      out_ << format_diagnostic(d, origin_);
    }
  }

  void result(Json j, const std::string& text) {
    if (json_) {
      results_.push_back(std::move(j));
    } else {
      out_ << text;
    }
  }

  std::size_t findings() const { return findings_; }

  int finish(int code) {
    if (json_) {
      Json summary{{"type", "summary"},
                   {"command", command_},
                   {"exit_code", code},
                   {"findings", findings_},
                   {"results", results_}};
      out_ << summary.dump() << '\n';
    }
    return code;
  }

 private:
  bool json_;
  std::ostream& out_;
  std::string origin_;
  std::string command_;
  std::size_t findings_ = 0;
  Json results_ = Json::array();
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot read `{}`", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

NumericConfig numeric_config(const Options& o) {
  NumericConfig cfg;
  try {
    if (!o.config.empty()) apply_config_text(read_file(o.config), cfg);
    if (o.tol) cfg.tol = *o.tol;
    if (o.seed) cfg.seed = parse_seed(*o.seed);
    if (o.samples) cfg.samples_per_delta = *o.samples;
    if (o.eps_grid) cfg.eps_grid = parse_list(*o.eps_grid, "eps-grid");
    if (o.fd_step) cfg.fd_step = *o.fd_step;
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const DiagnosticError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

TypeEnv declarations(const Options& o) {
  TypeEnv env;
  for (const auto& d : o.decls) {
    try {
      auto [name, ty] = parse_declaration(d);
      env.insert_or_assign(std::move(name), std::move(ty));
    } catch (const DiagnosticError& e) {
      throw UsageError(fmt::format("--decl `{}`: {}", d, e.what()));
    }
  }
  return env;
}

std::string origin_of(const Options& o) { return o.file.empty() ? "<expr>" : o.file; }

void require_one_input(const Options& o) {
  if (o.expr.empty() == o.file.empty()) {
    throw UsageError("give exactly one input: -e EXPR or a FILE");
  }
}

// Inputs with earlier expression bindings substituted into later ones.
// Throws DiagnosticError on syntax errors.
std::vector<Item> load_items(const Options& o) {
  if (!o.expr.empty()) return {Item{{}, parse_term(o.expr)}};
  std::vector<Item> items;
  for (auto& b : parse_bindings(read_file(o.file))) {
    Term t = b.value;
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
      const auto* def = std::get_if<Expr>(&it->term);
      if (!def) continue;
      std::visit([&](auto& x) { x = subst(x, it->name, *def); }, t);
    }
    items.push_back(Item{b.name, std::move(t)});
  }
  return items;
}

std::string label(const Item& item) {
  if (item.name.empty()) return {};
  return item.name + (std::holds_alternative<Formula>(item.term) ? " :: " : " = ");
}

Json item_json(const Item& item) {
  Json j = Json::object();
  if (!item.name.empty()) j["name"] = item.name;
  return j;
}

const Expr* expect_expr(const Item& item, Reporter& rep) {
  if (const auto* e = std::get_if<Expr>(&item.term)) return e;
  rep.diagnostic(make_diagnostic(Severity::Error, DiagKind::Unsupported,
                                 "this command takes an expression, not a formula",
                                 std::get<Formula>(item.term).span()));
  return nullptr;
}

// ---------------------------------------------------------------------------

int cmd_parse(const Options& o, Reporter& rep) {
  require_one_input(o);
  NameSet ambient;
  for (const auto& n : split(o.ambient, ',')) {
    if (!n.empty()) ambient.insert(n);
  }
  for (const auto& [name, ty] : declarations(o)) ambient.insert(name);
  for (const auto& item : load_items(o)) {
    Json j = item_json(item);
    j["kind"] = std::holds_alternative<Formula>(item.term) ? "formula" : "expr";
    j["pretty"] = pretty(item.term);
    std::string text = label(item) + pretty(item.term) + "\n";
    if (const auto* f = std::get_if<Formula>(&item.term)) {
      const ScopeReport report = diagnose_implicit_binders(*f, ambient);
      for (const auto& d : report.suggestions) rep.diagnostic(d);
      for (const auto& d : report.errors) rep.diagnostic(d);
      if (report.repaired) j["repaired"] = pretty(*report.repaired);
    }
    rep.result(std::move(j), text);
    if (!item.name.empty()) ambient.insert(item.name);
  }
  return rep.findings() ? 1 : 0;
}

int cmd_typecheck_traditional(const Options& o, Reporter& rep) {
  if (o.expr.empty() || !o.file.empty()) throw UsageError("--traditional takes one -e input");
  if (!o.repair.empty() && o.repair != "expand") {
    throw UsageError(fmt::format("unknown repair `{}` (only `expand`)", o.repair));
  }
  const TypeEnv env = declarations(o);
  std::optional<StateSignature> sig;
  try {
    sig = StateSignature::parse(o.state);
  } catch (const DiagnosticError& e) {
    throw UsageError(fmt::format("--state: {}", e.what()));
  }
  const Elaboration el = elaborate_traditional(o.expr, env, *sig, !o.repair.empty(), o.path_name);
  for (const auto& d : el.diagnostics) rep.diagnostic(d);
  if (!el.diagnostics.empty()) return 1;

  Json j{{"formula", pretty(el.formula)}};
  std::string text = pretty(el.formula) + "\n";
  if (const auto* eq = el.formula.as<formula::FunEq>()) {
    const std::string lt = pretty(infer(eq->lhs, env));
    const std::string rt = pretty(infer(eq->rhs, env));
    j["lhs_type"] = lt;
    j["rhs_type"] = rt;
    text += fmt::format("  lhs : {}\n  rhs : {}\n", lt, rt);
  }
  rep.result(std::move(j), text);
  return 0;
}

int cmd_typecheck(const Options& o, Reporter& rep) {
  if (o.traditional) return cmd_typecheck_traditional(o, rep);
  require_one_input(o);
  const TypeEnv env = declarations(o);
  for (const auto& item : load_items(o)) {
    Json j = item_json(item);
    j["pretty"] = pretty(item.term);
    try {
      std::string ty;
      if (const auto* e = std::get_if<Expr>(&item.term)) {
        ty = pretty(infer(*e, env));
      } else if (auto d = check_formula(std::get<Formula>(item.term), env)) {
        throw DiagnosticError(*d);
      } else {
        ty = "Prop";
      }
      j["type"] = ty;
      rep.result(std::move(j), fmt::format("{}{} : {}\n", label(item), pretty(item.term), ty));
    } catch (const DiagnosticError& e) {
      rep.diagnostic(e.diagnostic());
    }
  }
  return rep.findings() ? 1 : 0;
}

int cmd_diff(const Options& o, Reporter& rep) {
  require_one_input(o);
  InferOptions open;
  open.allow_open = true;
  for (const auto& item : load_items(o)) {
    const Expr* f = expect_expr(item, rep);
    if (!f) continue;
    try {
      const Expr op = o.index ? Expr::partial_d(o.index, *f) : Expr::total_d(*f);
      infer(op, {}, open);
      const Expr d = simplify(o.index ? partial_derivative(o.index, *f) : differentiate(*f));
      Json j = item_json(item);
      j["derivative"] = pretty(d);
      rep.result(std::move(j), label(item) + pretty(d) + "\n");
    } catch (const DiagnosticError& e) {
      rep.diagnostic(e.diagnostic());
    }
  }
  return rep.findings() ? 1 : 0;
}

int cmd_eval(const Options& o, Reporter& rep) {
  require_one_input(o);
  const NumericConfig cfg = numeric_config(o);
  InferOptions open;
  open.allow_open = true;
  for (const auto& item : load_items(o)) {
    const Expr* e = expect_expr(item, rep);
    if (!e) continue;
    try {
      infer(*e, {}, open);
      const Value v = eval(*e, {}, cfg);
      Json j = item_json(item);
      j["value"] = format_value(v);
      if (v.is_num()) j["number"] = v.as_num();
      rep.result(std::move(j), label(item) + format_value(v) + "\n");
    } catch (const DiagnosticError& e) {
      rep.diagnostic(e.diagnostic());
    }
  }
  return rep.findings() ? 1 : 0;
}

int cmd_limit(const Options& o, Reporter& rep) {
  require_one_input(o);
  if (!o.at) throw UsageError("limit needs --at");
  const NumericConfig cfg = numeric_config(o);
  DomainSet dom;
  try {
    dom = DomainSet::parse(o.dom);
  } catch (const DiagnosticError& e) {
    throw UsageError(fmt::format("--dom: {}", e.what()));
  }
  int code = 0;
  for (const auto& item : load_items(o)) {
    const Expr* f = expect_expr(item, rep);
    if (!f) continue;
    try {
      if (auto d = check(*f, parse_type("R -> R"))) throw DiagnosticError(*d);
      Json j = item_json(item);
      j["at"] = *o.at;
      if (o.value) {
        const LimitVerdict v = check_limit(*f, *o.at, *o.value, dom, cfg);
        j["value"] = *o.value;
        j.update(to_json(v));
        if (v.kind != LimitVerdict::Kind::Verified) code = 1;
        rep.result(std::move(j), label(item) + format_limit(v));
      } else {
        const double L = numeric_limit(*f, *o.at, dom, cfg);
        j["limit"] = L;
        rep.result(std::move(j), label(item) + format_number(L) + "\n");
      }
    } catch (const DiagnosticError& e) {
      Diagnostic d = e.diagnostic();
      if (!d.span.valid()) d.span = f->span();
      rep.diagnostic(d);
    }
  }
  return rep.findings() ? 1 : code;
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw UsageError(fmt::format("--window `{}`: expected LO:HI", text));
  auto endpoint = [&](const std::string& s) {
    try {
      const Value v = eval(parse_expr(s));
      if (v.is_num()) return v.as_num();
    } catch (const DiagnosticError&) {
    }
    throw UsageError(fmt::format("--window `{}`: `{}` is not a number", text, s));
  };
  return {endpoint(parts[0]), endpoint(parts[1])};
}

int cmd_lagrange(const Options& o, Reporter& rep) {
  if (o.lagrangian.empty() || o.path.empty()) {
    throw UsageError("lagrange needs --lagrangian and --path");
  }
  PathCheckOptions opts;
  opts.cfg = numeric_config(o);
  opts.threshold = o.threshold;
  opts.finite_difference = o.fd;
  const auto [t0, t1] = parse_window(o.window);
  try {
    const LagrangianSystem sys{parse_expr(o.lagrangian), parse_expr(o.path), t0, t1, o.grid};
    const LagrangeSides sides = lagrange_sides(sys);
    const ResidualReport report = check_path(sys, opts);
    const Formula predicate = Formula::fun_eq(sides.lhs, sides.rhs);
    Json j{{"predicate", pretty(predicate)},
           {"lhs", pretty(simplify(sides.lhs))},
           {"rhs", pretty(simplify(sides.rhs))}};
    j.update(to_json(report));
    std::string text = fmt::format("{}\n  lhs = {}\n  rhs = {}\n", pretty(predicate),
                                   pretty(simplify(sides.lhs)), pretty(simplify(sides.rhs)));
    text += format_report(report, o.table);
    rep.result(std::move(j), text);
    return report.verdict == ResidualReport::Verdict::Admissible ? 0 : 1;
  } catch (const DiagnosticError& e) {
    rep.diagnostic(e.diagnostic());
    return 1;
  }
}

int cmd_grammar(const Options&, Reporter& rep) {
  rep.result(Json{{"grammar", grammar_text()}}, std::string(grammar_text()));
  return 0;
}

// ---------------------------------------------------------------------------

void add_input(CLI::App* sub, Options& o) {
  sub->add_option("-e,--expr", o.expr, "Inline expression or formula");
  sub->add_option("file", o.file, "Binding file (`name = expr` or `name :: formula` per line)");
}

void add_format(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "Output mode")->check(CLI::IsMember({"text", "json"}));
  sub->add_flag("--json", o.json, "Same as --format json");
}

void add_numeric(CLI::App* sub, Options& o) {
  sub->add_option("--tol", o.tol, "Relative tolerance (default 1e-9)");
  sub->add_option("--seed", o.seed, "Sampling seed (default 0xD51)");
  sub->add_option("--samples", o.samples, "Samples per delta candidate (default 128)");
  sub->add_option("--eps-grid", o.eps_grid, "Descending epsilons, e.g. 0.1,0.01");
  sub->add_option("--fd-step", o.fd_step, "Central difference step (default 1e-5)");
  sub->add_option("--config", o.config, "key = value file; flags override it");
}

}  // namespace

void apply_config_text(std::string_view text, NumericConfig& cfg) {
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(fmt::format("config line {}: expected key = value", lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key == "tol") {
      cfg.tol = parse_double(value, key);
    } else if (key == "seed") {
      cfg.seed = parse_seed(value);
    } else if (key == "samples" || key == "samples_per_delta") {
      cfg.samples_per_delta = static_cast<std::size_t>(parse_seed(value));
    } else if (key == "eps_grid") {
      cfg.eps_grid = parse_list(value, key);
    } else if (key == "deltas" || key == "delta_candidates") {
      cfg.delta_candidates = parse_list(value, key);
    } else if (key == "fd_step") {
      cfg.fd_step = parse_double(value, key);
    } else if (key == "equality_samples") {
      cfg.equality_samples = static_cast<std::size_t>(parse_seed(value));
    } else {
      throw std::invalid_argument(fmt::format("config line {}: unknown key `{}`", lineno, key));
    }
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Typed notation for calculus: parse, typecheck, differentiate, check limits "
               "and Euler-Lagrange paths.",
               "mathdsl"};
  app.require_subcommand(1);

  auto* parse = app.add_subcommand("parse", "Parse and pretty-print; flag implicit binders");
  add_input(parse, o);
  add_format(parse, o);
  parse->add_option("--ambient", o.ambient, "Comma-separated names bound outside the input");
  parse->add_option("--decl", o.decls, "Declaration `name : type` (its name is ambient)");

  auto* typecheck = app.add_subcommand("typecheck", "Infer types");
  add_input(typecheck, o);
  add_format(typecheck, o);
  typecheck->add_option("--decl", o.decls, "Declaration `name : type`");
  typecheck->add_flag("--traditional", o.traditional,
                      "Read d/dt and partial(L)/partial(x) notation");
  typecheck->add_option("--state", o.state, "State signature, e.g. t,q,qdot");
  typecheck->add_option("--repair", o.repair, "Repair strategy (expand)");
  typecheck->add_option("--path-name", o.path_name, "Path used by the expand repair");

  auto* diff = app.add_subcommand("diff", "Symbolic derivative, simplified");
  add_input(diff, o);
  add_format(diff, o);
  diff->add_option("--index", o.index, "Partial derivative in this argument slot")
      ->check(CLI::PositiveNumber);

  auto* evalc = app.add_subcommand("eval", "Evaluate closed expressions");
  add_input(evalc, o);
  add_format(evalc, o);
  add_numeric(evalc, o);

  auto* limit = app.add_subcommand("limit", "Check or compute a limit");
  add_input(limit, o);
  add_format(limit, o);
  add_numeric(limit, o);
  limit->add_option("--at", o.at, "Point a");
  limit->add_option("--value", o.value, "Candidate limit L; omit to compute one");
  limit->add_option("--dom", o.dom, "Domain, e.g. R, R\\{1}, (0,1], [0,1) U (2,inf)");

  auto* lagrange = app.add_subcommand("lagrange", "Euler-Lagrange residual of a path");
  add_format(lagrange, o);
  add_numeric(lagrange, o);
  lagrange->add_option("--lagrangian", o.lagrangian, "L : (T, Q, V) -> R");
  lagrange->add_option("--path", o.path, "w : T -> Q");
  lagrange->add_option("--window", o.window, "Time window LO:HI (default 0:1)");
  lagrange->add_option("--grid", o.grid, "Grid points (default 201)");
  lagrange->add_option("--threshold", o.threshold, "Absolute residual bound (default 1e-6)");
  lagrange->add_flag("--fd", o.fd, "Outer derivative by central differences");
  lagrange->add_flag("--table", o.table, "Print every grid point");

  auto* grammar = app.add_subcommand("grammar", "Print the surface grammar (EBNF)");
  add_format(grammar, o);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const bool json = o.json || o.format == "json";
  CLI::App* sub = app.get_subcommands().front();
  Reporter rep(json, out, origin_of(o), sub->get_name());
  try {
    int code = 0;
    if (sub == parse) code = cmd_parse(o, rep);
    if (sub == typecheck) code = cmd_typecheck(o, rep);
    if (sub == diff) code = cmd_diff(o, rep);
    if (sub == evalc) code = cmd_eval(o, rep);
    if (sub == limit) code = cmd_limit(o, rep);
    if (sub == lagrange) code = cmd_lagrange(o, rep);
    if (sub == grammar) code = cmd_grammar(o, rep);
    return rep.finish(code);
  } catch (const UsageError& e) {
    err << "mathdsl: " << e.what() << '\n';
    return 2;
  } catch (const DiagnosticError& e) {
    // Syntax errors while loading inputs.
    rep.diagnostic(e.diagnostic());
    return rep.finish(1);
  }
}

}  // namespace mathdsl
