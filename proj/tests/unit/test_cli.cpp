#include "doctest.h"

#include "json.hpp"
#include "mathdsl/cli.hpp"
#include "mathdsl/numeric.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace mathdsl;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mathdsl");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// MATHDSL_UPDATE_GOLDEN=1 rewrites the files instead of comparing.
void golden(const std::string& name, const std::string& actual) {
  const std::filesystem::path path = std::filesystem::path(MATHDSL_GOLDEN_DIR) / name;
  if (std::getenv("MATHDSL_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing golden file " << path);
  std::stringstream want;
  want << in.rdbuf();
  CHECK(actual == want.str());
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("mathdsl_test_" + name);
  std::ofstream(path) << content;
  return path;
}

const char* kTraditional = "d/dt(partial(L)/partial(qdot)) - partial(L)/partial(q) = 0";
const char* kNaiveLimit =
    "forall eps > 0. exists delta > 0. "
    "(0 < abs(x - a) < delta => x in dom(f) && abs(f x - L) < eps)";

}  // namespace

TEST_CASE("diff and eval") {
  const Run d = run({"diff", "-e", "\\x -> x^2"});
  CHECK(d.code == 0);
  CHECK(d.out == "\\x -> 2 * x\n");
  CHECK(run({"diff", "--index", "2", "-e", "\\(a, b) -> a * b^2"}).out == "\\(a, b) -> 2 * a * b\n");
  CHECK(run({"diff", "-e", "abs"}).code == 1);
  CHECK(run({"eval", "-e", "(\\x -> x^2) 3"}).out == "9\n");
  CHECK(run({"eval", "-e", "expand(\\t -> t^2) 1"}).out == "(1, 1, 2)\n");
  const Run bad = run({"eval", "-e", "1/0"});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("error[EvaluationError]") != std::string::npos);
}

TEST_CASE("binding files") {
  const auto path = temp_file("bindings.dsl",
                              "# squares\nsq = \\x -> x^2\nd = D(sq)\nv = d 3\n");
  const Run r = run({"eval", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out == "sq = \\x -> x^2\nd = \\x -> 2 * x\nv = 6\n");
  const Run t = run({"typecheck", path.string()});
  CHECK(t.code == 0);
  CHECK(t.out.find("v = D(\\x -> x^2) 3 : R") != std::string::npos);

  const auto broken = temp_file("broken.dsl", "a = 1\nb = a +\n");
  const Run e = run({"parse", broken.string()});
  CHECK(e.code == 1);
  CHECK(e.out.find(broken.string() + ":2:") == 0);
}

TEST_CASE("traditional Lagrange notation") {
  const std::vector<std::string> base{"typecheck", "--traditional", "--decl", "L:(R,R,R)->R",
                                      "--state",   "t,q,qdot",      "-e",     kTraditional};
  SUBCASE("json golden") {
    auto args = base;
    args.push_back("--json");
    const Run r = run(args);
    CHECK(r.code == 1);
    golden("traditional_naive.jsonl", r.out);
    const auto lines = json_lines(r.out);
    int mismatch = 0, note = 0;
    for (const auto& j : lines) {
      if (j["type"] != "diagnostic") continue;
      if (j["kind"] == "TypeMismatch") {
        ++mismatch;
        CHECK(j["expected"] == "R -> R");
        CHECK(j["found"] == "(R, R, R) -> R");
      }
      if (j["kind"] == "NotAVariable") ++note;
    }
    CHECK(mismatch == 1);
    CHECK(note == 1);
    CHECK(lines.back()["type"] == "summary");
    CHECK(lines.back()["exit_code"] == 1);
  }
  SUBCASE("text diagnostics have json twins") {
    const Run text = run(base);
    auto args = base;
    args.push_back("--json");
    const auto lines = json_lines(run(args).out);
    const std::regex head(R"(^<expr>:(\d+):(\d+): (\w+)\[(\w+)\])");
    std::vector<std::tuple<int, int, std::string>> from_text, from_json;
    std::istringstream in(text.out);
    for (std::string line; std::getline(in, line);) {
      std::smatch m;
      if (std::regex_search(line, m, head)) {
        from_text.emplace_back(std::stoi(m[1]), std::stoi(m[2]), m[4]);
      }
    }
    for (const auto& j : lines) {
      if (j["type"] != "diagnostic") continue;
      from_json.emplace_back(j["span"]["line"].get<int>(), j["span"]["column"].get<int>(),
                             j["kind"].get<std::string>());
    }
    CHECK(from_text.size() == 2);
    CHECK(from_text == from_json);
  }
  SUBCASE("repair") {
    auto args = base;
    for (const char* a : {"--repair", "expand", "--decl", "w:R->R"}) args.emplace_back(a);
    const Run r = run(args);
    CHECK(r.code == 0);
    CHECK(r.out.find("D(D[3](L) . expand(w)) == D[2](L) . expand(w)") != std::string::npos);
    CHECK(r.out.find("lhs : R -> R") != std::string::npos);
    CHECK(r.out.find("rhs : R -> R") != std::string::npos);
  }
}

TEST_CASE("implicit binders") {
  const Run r = run({"parse", "--ambient", "f,a,L", "--json", "-e", kNaiveLimit});
  CHECK(r.code == 1);
  golden("implicit_binder.jsonl", r.out);
  const auto lines = json_lines(r.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0]["kind"] == "ImplicitBinder");
  CHECK(lines[0]["suggestion"] ==
        "forall eps > 0. exists delta > 0. forall x. 0 < abs(x - a) < delta => x in dom(f) && "
        "abs(f x - L) < eps");
  const Run closed = run({"parse", "--ambient", "f,a,L", "-e",
                          "forall eps > 0. exists delta > 0. forall x. "
                          "(0 < abs(x - a) < delta => x in dom(f) && abs(f x - L) < eps)"});
  CHECK(closed.code == 0);
  CHECK(closed.out.find("ImplicitBinder") == std::string::npos);
}

TEST_CASE("limits") {
  SUBCASE("verified with a delta table") {
    const Run r = run({"limit", "-e", "\\x -> (x^2-1)/(x-1)", "--at", "1", "--value", "2",
                       "--dom", "R\\{1}"});
    CHECK(r.code == 0);
    golden("limit_removable.txt", r.out);
  }
  SUBCASE("refuted") {
    const Run r = run({"limit", "-e", "\\x -> abs(x)/x", "--at", "0", "--value", "1", "--json"});
    CHECK(r.code == 1);
    golden("limit_jump.jsonl", r.out);
    const auto s = json_lines(r.out).back();
    CHECK(s["results"][0]["verdict"] == "Refuted");
    CHECK(s["results"][0]["witness"].get<double>() < 0);
  }
  SUBCASE("computed") {
    const Run r = run({"limit", "-e", "\\h -> ((3+h)^2-9)/h", "--at", "0", "--json"});
    CHECK(r.code == 0);
    CHECK(std::fabs(json_lines(r.out).back()["results"][0]["limit"].get<double>() - 6) <= 1e-6);
    CHECK(run({"limit", "-e", "\\x -> sin(1/x)", "--at", "0"}).code == 1);
  }
  SUBCASE("domain specs") {
    std::string table;
    for (const char* spec : {"R", "R\\{1}", "R\\{2,1,1}", "(0,1]", "[0,1) U (2,inf)",
                             "(-inf,0) U (0,inf)", "[0,1] U [0.5,2]", "[0,inf)\\{3}"}) {
      table += std::string(spec) + "  =>  " + DomainSet::parse(spec).to_string() + "\n";
    }
    golden("domains.txt", table);
    for (const char* bad : {"[1,", "(1,0)", "R\\{x}", "Q"}) {
      CHECK(run({"limit", "-e", "\\x -> x", "--at", "0", "--value", "0", "--dom", bad}).code == 2);
    }
    const Run empty = run({"limit", "-e", "\\x -> x", "--at", "5", "--value", "5", "--dom", "[0,1]"});
    CHECK(empty.code == 1);
    CHECK(empty.out.find("Inconclusive") != std::string::npos);
  }
}

TEST_CASE("lagrange") {
  const Run ok = run({"lagrange", "--lagrangian", "\\(t,q,v) -> v^2/2 - q^2/2", "--path",
                      "\\t -> cos(t)", "--window", "0:6.2832"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("\nAdmissible\n") != std::string::npos);
  const Run bad = run({"lagrange", "--lagrangian", "\\(t,q,v) -> v^2/2 - q^2/2", "--path",
                       "\\t -> t^2", "--window", "0:1", "--json", "--grid", "11", "--table"});
  CHECK(bad.code == 1);
  golden("lagrange_parabola.jsonl", bad.out);
  CHECK(run({"lagrange", "--lagrangian", "\\(t,q,v) -> v", "--path", "cos", "--window", "0:4/2"})
            .code == 0);
  CHECK(run({"lagrange", "--lagrangian", "\\(t,q,v) -> v", "--path", "cos", "--window", "1"})
            .code == 2);
}

TEST_CASE("configuration") {
  const auto witness = [](const Run& r) {
    return json_lines(r.out).back()["results"][0]["witness"].get<double>();
  };
  const std::vector<std::string> base{"limit", "-e", "\\x -> abs(x)/x", "--at", "0",
                                      "--value", "1", "--json"};
  const double w0 = witness(run(base));
  const auto cfg = temp_file("cfg.toml", "# sampling\n[numeric]\nseed = 7\ntol = 1e-9\n");
  auto with_file = base;
  with_file.insert(with_file.end(), {"--config", cfg.string()});
  const double w7 = witness(run(with_file));
  CHECK(w7 != w0);
  auto flag_wins = with_file;
  flag_wins.insert(flag_wins.end(), {"--seed", "0xD51"});
  CHECK(witness(run(flag_wins)) == w0);

  NumericConfig parsed;
  apply_config_text("eps_grid = 0.5, 0.05\nsamples = 16\nfd_step = 1e-4\n", parsed);
  CHECK(parsed.eps_grid == std::vector<double>{0.5, 0.05});
  CHECK(parsed.samples_per_delta == 16);
  CHECK(parsed.fd_step == 1e-4);
  CHECK_THROWS(apply_config_text("colour = blue\n", parsed));

  const auto bad = temp_file("bad.toml", "seed = banana\n");
  auto bad_args = base;
  bad_args.insert(bad_args.end(), {"--config", bad.string()});
  CHECK(run(bad_args).code == 2);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"diff", "-e", "sin", "--frob"}).code == 2);
  CHECK(run({"diff"}).code == 2);
  CHECK(run({"diff", "-e", "sin", "/no/such/file"}).code == 2);
  CHECK(run({"eval", "/no/such/file"}).code == 2);
  CHECK(run({"limit", "-e", "sin"}).code == 2);
  CHECK(run({"eval", "-e", "1", "--format", "yaml"}).code == 2);
  CHECK(run({"eval", "-e", "1", "--eps-grid", "0.01,0.1"}).code == 2);
  const Run g = run({"grammar"});
  CHECK(g.code == 0);
  CHECK(g.out.find("formula") != std::string::npos);
}
