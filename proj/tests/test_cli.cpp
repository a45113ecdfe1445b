#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "needlab/cli.hpp"

using namespace needlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  RunResult r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Each test writes its inputs under a scratch directory so the binary can be
// driven exactly as a user would drive it: files in, streams out.
fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "needlab_cli_scratch";
  fs::create_directories(dir);
  return dir;
}

std::string write_input(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream f(p);
  f << text << "\n";
  return p.string();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

// --- eval --------------------------------------------------------------------

TEST_CASE("eval replays the copy/merge trace exactly") {
  const std::string file =
      write_input("golden.l", "letrec x = (y \\u. u), y = \\z. z in x");
  const RunResult r = run({"eval", "--calculus", "lr", file});
  CHECK(r.code == 0);
  const std::vector<std::string> ls = lines_of(r.out);
  REQUIRE(ls.size() == 6);
  CHECK(ls[0] == "step 1: cp-e at 1.1");
  CHECK(ls[1] == "step 2: lbeta at 1");
  CHECK(ls[2] == "step 3: llet-e at ε");
  CHECK(ls[3] == "step 4: cp-in at 4");
  CHECK(contains(ls[5], "Converged"));
  CHECK(contains(ls[5], "4 steps"));
  CHECK(r.err.empty());
}

TEST_CASE("eval rejects binder groups outside the full calculus") {
  const std::string file = write_input("letbody.l", "letrec x = True in x");
  const RunResult r = run({"eval", "--calculus", "lcc", file});
  CHECK(r.code == 2);
  CHECK(contains(r.err, "error:"));
  const RunResult name_r = run({"eval", "--calculus", "name", file});
  CHECK(name_r.code == 0);
}

TEST_CASE("eval exhausts the budget on the self-application loop") {
  const std::string file =
      write_input("loop.l", "((\\z. (z z)) (\\x. (x x)))");
  const RunResult r =
      run({"eval", "--calculus", "lcc", "--max-steps", "100", file});
  CHECK(r.code == 4);
  CHECK(contains(r.out, "Budget in 100 steps"));

  // Opting in to repeated-state detection turns the loop into a definitive
  // non-convergence verdict instead.
  const RunResult cyc = run({"eval", "--calculus", "lcc", "--max-steps", "100",
                             "--detect-cycles", file});
  CHECK(cyc.code == 3);
  CHECK(contains(cyc.out, "state-cycle"));
}

TEST_CASE("eval drives the tree rewriter") {
  const std::string file =
      write_input("golden.l", "letrec x = (y \\u. u), y = \\z. z in x");
  const RunResult r = run({"eval", "--calculus", "tree", file});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "betaTr"));
  CHECK(contains(r.out, "Converged (answer)"));

  // A tree whose head is already the undefined label has no redex at all.
  const std::string loop = write_input("selfdep.l", "letrec x = x in x");
  const RunResult stuck = run({"eval", "--calculus", "tree", loop});
  CHECK(stuck.code == 3);
  CHECK(contains(stuck.out, "no-redex"));
}

TEST_CASE("eval summary mode suppresses the step lines") {
  const std::string file = write_input("pair.l", "(Cons True Nil)");
  const std::string rec =
      write_input("recsum.l", "letrec x = (y \\u. u), y = \\z. z in x");
  const RunResult traced = run({"eval", rec});
  const RunResult summary = run({"eval", "--output", "summary", rec});
  CHECK(traced.code == 0);
  CHECK(summary.code == 0);
  CHECK(contains(traced.out, "step 1:"));
  CHECK(!contains(summary.out, "step 1:"));
  CHECK(contains(summary.out, "Converged"));
  const RunResult r = run({"eval", "--output", "summary", file});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "Converged"));
}

TEST_CASE("eval json mode emits one well-formed record") {
  const std::string file =
      write_input("golden.l", "letrec x = (y \\u. u), y = \\z. z in x");
  const RunResult r = run({"eval", "--output", "json", file});
  CHECK(r.code == 0);
  const json rec = json::parse(r.out);
  CHECK(rec["verdict"] == "Converged");
  CHECK(rec["steps"] == 4);
  CHECK(rec["calculus"] == "lr");
  CHECK(rec.contains("final"));
  REQUIRE(rec.contains("rules"));
  CHECK(rec["rules"] ==
        json::array({"cp-e", "lbeta", "llet-e", "cp-in"}));
}

// --- translate ---------------------------------------------------------------

TEST_CASE("translate is the identity on binder-free input") {
  const std::string file = write_input("plain.l", "(\\x. (Cons x Nil)) True");
  for (const std::string target : {"name", "lcc", "lcc-prime"}) {
    const RunResult r = run({"translate", file, "--to", target});
    CHECK(r.code == 0);
    CHECK(r.out == "((\\v0. Cons v0 Nil) True)\n");
  }
}

TEST_CASE("translate eliminates binder groups for the small fragment") {
  const std::string file =
      write_input("rec.l", "letrec x = (y \\u. u), y = \\z. z in x");
  for (const std::string target : {"lcc", "lcc-prime"}) {
    const RunResult r = run({"translate", file, "--to", target});
    CHECK(r.code == 0);
    CHECK(!contains(r.out, "letrec"));
  }
  // The by-name target keeps the binder group: that translation only
  // relabels, it does not restructure.
  const RunResult w = run({"translate", file, "--to", "name"});
  CHECK(w.code == 0);
  CHECK(contains(w.out, "letrec"));
}

TEST_CASE("translate output pipes back into eval with the same verdict") {
  const std::string file =
      write_input("rec.l", "letrec x = (y \\u. u), y = \\z. z in x");
  const RunResult t = run({"translate", file, "--to", "lcc"});
  REQUIRE(t.code == 0);
  const std::string image =
      write_input("rec_image.l", t.out.substr(0, t.out.size() - 1));
  const RunResult src = run({"eval", "--calculus", "lr", "--output", "summary",
                             file});
  const RunResult img = run({"eval", "--calculus", "lcc", "--output",
                             "summary", image});
  CHECK(src.code == 0);
  CHECK(img.code == 0);
  CHECK(contains(src.out, "Converged"));
  CHECK(contains(img.out, "Converged"));
}

TEST_CASE("translate rejects unknown targets") {
  const std::string file = write_input("plain2.l", "True");
  const RunResult r = run({"translate", file, "--to", "opt"});
  CHECK(r.code == 2);
}

// --- tree --------------------------------------------------------------------

TEST_CASE("tree prints single labels and bounded prefixes") {
  const std::string file =
      write_input("treeex.l", "letrec x = x, y = ((\\z. z) x y) in y");
  const RunResult at = run({"tree", file, "--pos", "1.2"});
  CHECK(at.code == 0);
  CHECK(at.out == "1.2: Bot\n");

  const RunResult root = run({"tree", file, "--pos", "ε"});
  CHECK(root.code == 0);
  CHECK(root.out == "ε: @\n");

  const RunResult prefix = run({"tree", file, "--depth", "2"});
  CHECK(prefix.code == 0);
  const std::vector<std::string> ls = lines_of(prefix.out);
  REQUIRE(ls.size() >= 5);
  CHECK(ls[0] == "ε: @");
  CHECK(contains(prefix.out, "1.1: \\z"));
  CHECK(contains(prefix.out, "1.2: Bot"));
}

TEST_CASE("tree reports positions outside the tree as undefined") {
  const std::string file = write_input("tt.l", "True");
  const RunResult r = run({"tree", file, "--pos", "9.9.9"});
  CHECK(r.code == 0);
  CHECK(r.out == "9.9.9: undefined\n");

  const RunResult depth0 = run({"tree", file, "--depth", "0"});
  CHECK(depth0.code == 0);
  CHECK(depth0.out == "ε: True\n");
}

TEST_CASE("tree rejects malformed positions") {
  const std::string file = write_input("tt.l", "True");
  const RunResult r = run({"tree", file, "--pos", "1.x.2"});
  CHECK(r.code == 2);
  CHECK(contains(r.err, "error:"));
}

// --- sim ---------------------------------------------------------------------

TEST_CASE("sim confirms the mapped constant stream both ways") {
  const std::string lhs = write_input(
      "mapped.l",
      "letrec repeat = \\x. (Cons x (repeat x)), "
      "map = \\f. \\xs. case List xs of { Nil -> Nil ; "
      "Cons y ys -> (Cons (f y) (map f ys)) } "
      "in (map (\\x. True) (repeat True))");
  const std::string rhs =
      write_input("stream.l", "letrec repeat = \\x. (Cons x (repeat x)) "
                              "in (repeat True)");
  const RunResult r = run({"sim", lhs, rhs, "--k", "3"});
  CHECK(r.code == 0);
  const std::vector<std::string> ls = lines_of(r.out);
  REQUIRE(ls.size() == 2);
  CHECK(contains(ls[0], "left<=right: HoldsToDepth k=3"));
  CHECK(contains(ls[1], "right<=left: HoldsToDepth k=3"));
}

TEST_CASE("sim refutes distinct constructors with a probe witness") {
  const std::string t = write_input("t.l", "True");
  const std::string f = write_input("f.l", "False");
  const RunResult r = run({"sim", t, f});
  CHECK(r.code == 1);
  CHECK(contains(r.out, "left<=right: Refuted"));
  CHECK(contains(r.out, "witness=probe_Bool(True)"));

  const RunResult j = run({"sim", t, f, "--output", "json"});
  CHECK(j.code == 1);
  const json rec = json::parse(j.out);
  CHECK(rec["le"]["verdict"] == "Refuted");
  CHECK(rec["le"]["witness"] == json::array({"probe_Bool(True)"}));
  CHECK(rec["ge"]["verdict"] == "Refuted");
}

TEST_CASE("sim agrees between the chain search and the iterate checker") {
  const std::string a = write_input("lam_bot.l", "\\x. ((\\z. (z z)) (\\w. (w w)))");
  const std::string b = write_input("one_cons.l", "(Cons True Nil)");
  const RunResult iter = run({"sim", a, b});
  const RunResult chain = run({"sim", a, b, "--chains"});
  CHECK(iter.code == 1);
  CHECK(chain.code == 1);
  // Left-to-right holds (every application diverges, every case probe on a
  // lambda is stuck); right-to-left is refuted by probing for Cons.
  for (const RunResult* r : {&iter, &chain}) {
    CHECK(contains(r->out, "left<=right: HoldsToDepth"));
    CHECK(contains(r->out, "right<=left: Refuted"));
    CHECK(contains(r->out, "witness=probe_List(Cons)"));
  }
}

TEST_CASE("sim requires --open for terms with free variables") {
  const std::string open_file = write_input("openx.l", "x");
  const std::string closed = write_input("t.l", "True");
  const RunResult refused = run({"sim", open_file, closed});
  CHECK(refused.code == 2);
  CHECK(contains(refused.err, "--open"));

  const RunResult sampled = run({"sim", open_file, closed, "--open"});
  CHECK(sampled.code == 1);
  CHECK(contains(sampled.out, "Refuted"));

  const RunResult refl = run({"sim", open_file, open_file, "--open"});
  CHECK(refl.code == 0);
}

// --- check -------------------------------------------------------------------

TEST_CASE("check passes garbage collection on a generated corpus") {
  const RunResult r = run({"check", "gc", "--seed", "7", "--count", "40",
                           "--size", "25"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "rule=gc"));
  CHECK(contains(r.out, "counterexamples=0"));
}

TEST_CASE("check refutes the broken strictness rule on a planted corpus") {
  const fs::path dir = scratch_dir() / "planted";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "a.l")
        << "seq ((\\z. (z z)) (\\x. (x x))) True\n";
    std::ofstream(dir / "b.l") << "seq True Nil\n";
  }
  const RunResult r = run({"check", "bad-seq", dir.string(), "--calculus",
                           "name", "--count", "1"});
  CHECK(r.code == 1);
  CHECK(contains(r.out, "counterexamples=1"));
  CHECK(contains(r.out, "z z"));

  const RunResult unknown = run({"check", "no-such-rule", "--count", "1"});
  CHECK(unknown.code == 2);
}

// --- corpus ------------------------------------------------------------------

TEST_CASE("corpus gen is reproducible byte for byte") {
  const RunResult a = run({"corpus", "gen", "--seed", "7", "--count", "200"});
  const RunResult b = run({"corpus", "gen", "--seed", "7", "--count", "200"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines_of(a.out).size() == 200);

  const RunResult c = run({"corpus", "gen", "--seed", "8", "--count", "200"});
  CHECK(a.out != c.out);
}

TEST_CASE("corpus gen output parses back through eval") {
  const RunResult a = run({"corpus", "gen", "--seed", "3", "--count", "5"});
  REQUIRE(a.code == 0);
  int i = 0;
  for (const std::string& line : lines_of(a.out)) {
    const std::string f = write_input("gen" + std::to_string(i++) + ".l", line);
    const RunResult r =
        run({"eval", "--output", "summary", "--max-steps", "500", f});
    CHECK((r.code == 0 || r.code == 3 || r.code == 4));
  }
}

// --- argument handling ---------------------------------------------------------

TEST_CASE("usage errors exit 2 and help exits 0") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"eval"}).code == 2);                      // missing file
  CHECK(run({"eval", "--calculus", "qq", "x.l"}).code == 2);
  CHECK(run({"eval", "/no/such/file.l"}).code == 2);
  CHECK(run({"translate", "x.l"}).code == 2);          // missing --to
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"sim", "--help"}).code == 0);
  const RunResult help = run({"--help"});
  CHECK(contains(help.out, "eval"));
  CHECK(contains(help.out, "sim"));
}

TEST_CASE("signature files extend the constructor universe") {
  const fs::path sig_path = scratch_dir() / "custom.sig";
  {
    std::ofstream f(sig_path);
    f << "data Pair = MkPair/2 ;\n";
  }
  const std::string file = write_input("p.l", "(MkPair True True)");
  // Without the extra declaration the constructor is unknown...
  const RunResult bad = run({"eval", file});
  CHECK(bad.code == 2);
  // ...with it, the application is already a constructor value.
  const RunResult ok = run({"eval", "--sig", sig_path.string(), file});
  CHECK(ok.code == 0);
  CHECK(contains(ok.out, "Converged"));
  // Every subcommand accepts the same flag.
  const RunResult probe =
      run({"sim", file, file, "--sig", sig_path.string()});
  CHECK(probe.code == 0);
}
