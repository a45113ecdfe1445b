#include "needlab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "needlab/inftree.hpp"
#include "needlab/machine_lcc.hpp"
#include "needlab/machine_lr.hpp"
#include "needlab/machine_name.hpp"
#include "needlab/parse.hpp"
#include "needlab/print.hpp"
#include "needlab/simcheck.hpp"
#include "needlab/translate.hpp"

namespace needlab {
namespace {

using nlohmann::json;

// Input/usage failures that should terminate with exit code 2.
struct CliError {
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{"cannot open file: " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SignatureTable load_signature(const std::string& path) {
  if (path.empty()) return default_signature();
  return SignatureTable::parse_signatures(read_file(path));
}

ExprPtr parse_file(const std::string& path, const SignatureTable& sig) {
  return parse_expr(read_file(path), sig);
}

Calculus to_calculus(const std::string& name) {
  if (name == "lr") return Calculus::LR;
  if (name == "name") return Calculus::Name;
  if (name == "lcc") return Calculus::Lcc;
  throw CliError{"unknown calculus: " + name};
}

std::string verdict_word(const EvalOutcome& out) {
  switch (out.kind) {
    case EvalOutcome::Kind::Converged: return "Converged";
    case EvalOutcome::Kind::Stuck: return "Stuck";
    case EvalOutcome::Kind::BudgetExhausted: return "Budget";
  }
  return "?";
}

int verdict_exit(const EvalOutcome& out) {
  switch (out.kind) {
    case EvalOutcome::Kind::Converged: return 0;
    case EvalOutcome::Kind::Stuck: return 3;
    case EvalOutcome::Kind::BudgetExhausted: return 4;
  }
  return 2;
}

// Shared per-run options.
struct Options {
  std::string sig_path;
  std::string calculus = "lr";
  int max_steps = 10000;
  int descent_limit = 2000;
  int size_limit = 200000;
  std::string output = "trace";  // trace | summary | json
  int k = 3;
  int arg_size = 3;
  int samples = 6;
  bool chains = false;
  bool open = false;
  std::uint64_t seed = 1;
  int count = 100;
  int size_bound = 30;
  bool detect_cycles = false;  // eval shows raw budget behaviour unless asked

  EvalLimits limits() const {
    return EvalLimits{max_steps, size_limit, detect_cycles};
  }
  bool json_mode() const { return output == "json"; }
  bool trace_mode() const { return output == "trace"; }
  bool summary_mode() const { return output == "summary"; }
};

// --- eval ------------------------------------------------------------------

int eval_tree(const ExprPtr& e, const Options& opt, std::ostream& out) {
  TreeHandle t = tree_of(e);
  std::vector<std::string> rules;
  int steps = 0;
  std::string verdict = "Budget", reason = "step-budget";
  while (steps < opt.max_steps) {
    TreeStepResult r = tree_step(t, opt.descent_limit);
    if (r.kind == TreeStepResult::Kind::Answer) {
      verdict = "Converged";
      reason = "answer";
      break;
    }
    if (r.kind == TreeStepResult::Kind::NoRedexFound) {
      verdict = "Stuck";
      reason = "no-redex";
      break;
    }
    if (r.kind == TreeStepResult::Kind::DescentLimit) {
      reason = "descent-limit";
      break;
    }
    ++steps;
    rules.push_back(r.rule);
    if (opt.trace_mode()) out << "step " << steps << ": " << r.rule << "\n";
    t = *r.next;
  }
  if (opt.json_mode()) {
    json rec{{"calculus", "tree"},
             {"verdict", verdict},
             {"steps", steps},
             {"reason", reason},
             {"rules", rules}};
    out << rec.dump() << "\n";
  } else {
    out << verdict << " (" << reason << ") in " << steps << " steps\n";
  }
  if (verdict == "Converged") return 0;
  if (verdict == "Stuck") return 3;
  return 4;
}

int cmd_eval(const std::string& file, const Options& opt, std::ostream& out) {
  const SignatureTable sig = load_signature(opt.sig_path);
  const ExprPtr e = parse_file(file, sig);
  if (opt.calculus == "tree") return eval_tree(e, opt, out);

  Trace trace;
  Trace* tp = !opt.summary_mode() ? &trace : nullptr;
  const EvalOutcome res = [&] {
    switch (to_calculus(opt.calculus)) {
      case Calculus::LR: return evaluate_lr(e, opt.limits(), tp);
      case Calculus::Name: return evaluate_name(e, opt.limits(), tp);
      default: return evaluate_lcc(e, opt.limits(), tp);
    }
  }();
  if (opt.trace_mode())
    for (const TraceEntry& en : trace)
      out << "step " << en.index << ": " << en.rule << " at "
          << position_to_string(en.redex) << "\n";
  if (opt.json_mode()) {
    std::vector<std::string> rules;
    for (const TraceEntry& en : trace) rules.push_back(en.rule);
    json rec{{"calculus", opt.calculus},
             {"verdict", verdict_word(res)},
             {"steps", res.steps},
             {"final", print(res.final_expr)},
             {"rules", rules}};
    if (res.whnf) rec["whnf"] = whnf_to_string(*res.whnf);
    if (!res.reason.empty()) rec["reason"] = res.reason;
    out << rec.dump() << "\n";
  } else {
    out << print(res.final_expr) << "\n";
    out << verdict_word(res);
    if (res.whnf) out << " (" << whnf_to_string(*res.whnf) << ")";
    if (!res.reason.empty()) out << " (" << res.reason << ")";
    out << " in " << res.steps << " steps\n";
  }
  return verdict_exit(res);
}

// --- translate ---------------------------------------------------------------

int cmd_translate(const std::string& file, const std::string& target,
                  const Options& opt, std::ostream& out) {
  const SignatureTable sig = load_signature(opt.sig_path);
  const ExprPtr e = parse_file(file, sig);
  ExprPtr result;
  if (target == "name") {
    result = translate_W(e);
  } else if (target == "lcc") {
    result = translate_N(translate_W(e));
  } else if (target == "lcc-prime") {
    result = translate_Nprime(translate_W(e));
  } else {
    throw CliError{"unknown translation target: " + target};
  }
  // Canonical names keep the output inside the surface grammar, so the
  // printed expression can be fed straight back into `eval`.
  out << print(canonicalize(result)) << "\n";
  return 0;
}

// --- tree --------------------------------------------------------------------

int cmd_tree(const std::string& file, int depth, const std::string& pos,
             const Options& opt, std::ostream& out) {
  const SignatureTable sig = load_signature(opt.sig_path);
  const ExprPtr e = parse_file(file, sig);
  if (!pos.empty()) {
    Position p;
    try {
      p = parse_position(pos);
    } catch (const BadExpr& ex) {
      throw CliError{ex.what()};
    }
    std::optional<TreeLabel> l = it_label(e, p);
    out << position_to_string(p) << ": "
        << (l ? print_label(*l) : "undefined") << "\n";
    return 0;
  }
  out << print_prefix(prefix(tree_of(e), depth));
  return 0;
}

// --- sim ---------------------------------------------------------------------

SimConfig sim_config(const Options& opt) {
  SimConfig cfg;
  cfg.calculus = to_calculus(opt.calculus);
  cfg.k = opt.k;
  cfg.arg_size = opt.arg_size;
  cfg.args_per_level = opt.samples;
  cfg.max_steps = opt.max_steps;
  cfg.size_limit = opt.size_limit;
  cfg.use_chains = opt.chains;
  return cfg;
}

std::string verdict_name(const SimVerdict& v) {
  switch (v.kind) {
    case SimVerdict::Kind::HoldsToDepth: return "HoldsToDepth";
    case SimVerdict::Kind::Refuted: return "Refuted";
    case SimVerdict::Kind::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

void report_direction(const char* direction, const SimVerdict& v,
                      const SimConfig& cfg, std::ostream& out) {
  out << direction << ": " << verdict_name(v) << " k=" << cfg.k
      << " args=" << cfg.arg_size << " witness=" << print_q_chain(v.witness)
      << "\n";
}

json verdict_json(const SimVerdict& v) {
  json rec{{"verdict", verdict_name(v)}};
  std::vector<std::string> w;
  for (const QContext& q : v.witness) w.push_back(print_q(q));
  rec["witness"] = w;
  if (!v.detail.empty()) rec["detail"] = v.detail;
  return rec;
}

int cmd_sim(const std::string& file_a, const std::string& file_b,
            const Options& opt, std::ostream& out) {
  SignatureTable sig = load_signature(opt.sig_path);
  const ExprPtr a = parse_file(file_a, sig);
  const ExprPtr b = parse_file(file_b, sig);
  SimConfig cfg = sim_config(opt);
  cfg.sig = &sig;

  SimVerdict le, ge;
  if (!is_closed(a) || !is_closed(b)) {
    if (!opt.open)
      throw CliError{"input is open; pass --open to sample substitutions"};
    le = open_extension_check(a, b, cfg, opt.samples);
    ge = open_extension_check(b, a, cfg, opt.samples);
  } else {
    std::tie(le, ge) = check_mutual_sim(a, b, cfg);
  }

  if (opt.json_mode()) {
    json rec{{"left", file_a},
             {"right", file_b},
             {"k", cfg.k},
             {"args", cfg.arg_size},
             {"le", verdict_json(le)},
             {"ge", verdict_json(ge)}};
    out << rec.dump() << "\n";
  } else {
    report_direction("left<=right", le, cfg, out);
    report_direction("right<=left", ge, cfg, out);
  }
  return (le.refuted() || ge.refuted()) ? 1 : 0;
}

// --- check -------------------------------------------------------------------

int cmd_check(const std::string& rule, const std::string& corpus_dir,
              const Options& opt, std::ostream& out) {
  SignatureTable sig = load_signature(opt.sig_path);
  std::vector<ExprPtr> corpus;
  if (!corpus_dir.empty()) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(corpus_dir))
      throw CliError{"not a directory: " + corpus_dir};
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(corpus_dir))
      if (entry.path().extension() == ".l") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const std::string& f : files) corpus.push_back(parse_file(f, sig));
  }
  for (ExprPtr& e : gen_corpus(sig, opt.seed, opt.count, opt.size_bound))
    corpus.push_back(std::move(e));

  SimConfig cfg = sim_config(opt);
  cfg.sig = &sig;
  const TransformReport rep = check_transformation(rule, corpus, cfg);
  if (opt.json_mode()) {
    json rec{{"rule", rep.rule},
             {"instances", rep.instances},
             {"counterexamples", rep.counterexamples},
             {"inconclusive", rep.inconclusive},
             {"witnesses", rep.witnesses}};
    out << rec.dump() << "\n";
  } else {
    out << print_report(rep) << "\n";
    for (const std::string& w : rep.witnesses)
      out << "counterexample: " << w << "\n";
  }
  return rep.ok() ? 0 : 1;
}

// --- corpus ------------------------------------------------------------------

int cmd_corpus_gen(const Options& opt, std::ostream& out) {
  const SignatureTable sig = load_signature(opt.sig_path);
  for (const ExprPtr& e :
       gen_corpus(sig, opt.seed, opt.count, opt.size_bound, !opt.open))
    out << print(e) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"workbench for three lazy lambda calculi"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--sig", opt.sig_path, "signature file (data T = C/2 ...)");
    cmd->add_option("--max-steps", opt.max_steps, "step budget")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--size-limit", opt.size_limit, "state size cap")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--output", opt.output, "trace | summary | json")
        ->check(CLI::IsMember({"trace", "summary", "json"}));
  };

  std::string file_a, file_b, target, rule, corpus_dir, pos;
  int depth = 3;

  CLI::App* eval = app.add_subcommand("eval", "evaluate a file to WHNF");
  eval->add_option("file", file_a, "expression file")->required();
  eval->add_option("--calculus", opt.calculus, "lr | name | lcc | tree")
      ->check(CLI::IsMember({"lr", "name", "lcc", "tree"}));
  eval->add_option("--descent-limit", opt.descent_limit,
                   "tree spine descent cap")
      ->check(CLI::PositiveNumber);
  eval->add_flag("--detect-cycles", opt.detect_cycles,
                 "stop early when a machine state repeats");
  add_common(eval);

  CLI::App* translate = app.add_subcommand("translate", "translate a file");
  translate->add_option("file", file_a, "expression file")->required();
  translate->add_option("--to", target, "name | lcc | lcc-prime")->required();
  add_common(translate);

  CLI::App* tree = app.add_subcommand("tree", "inspect the unfolded tree");
  tree->add_option("file", file_a, "expression file")->required();
  CLI::Option* dopt = tree->add_option("--depth", depth, "prefix depth");
  tree->add_option("--pos", pos, "single position, e.g. 1.2")->excludes(dopt);
  add_common(tree);

  CLI::App* sim = app.add_subcommand("sim", "bounded mutual similarity");
  sim->add_option("fileA", file_a, "left expression file")->required();
  sim->add_option("fileB", file_b, "right expression file")->required();
  sim->add_option("--calculus", opt.calculus, "lr | name | lcc")
      ->check(CLI::IsMember({"lr", "name", "lcc"}));
  sim->add_option("--k", opt.k, "observation depth")->check(CLI::PositiveNumber);
  sim->add_option("--arg-size", opt.arg_size, "argument size bound")
      ->check(CLI::PositiveNumber);
  sim->add_option("--samples", opt.samples,
                  "arguments per level / closing substitutions");
  sim->add_flag("--chains", opt.chains, "use the literal chain search");
  sim->add_flag("--open", opt.open, "allow open inputs (sampled closing)");
  add_common(sim);

  CLI::App* check = app.add_subcommand("check", "transformation correctness");
  std::string rule_help = "rewrite rule:";
  for (const std::string& r : transformation_rules()) rule_help += " " + r;
  check->add_option("rule", rule, rule_help)->required();
  check->add_option("corpus", corpus_dir, "directory of .l files");
  check->add_option("--calculus", opt.calculus, "lr | name | lcc")
      ->check(CLI::IsMember({"lr", "name", "lcc"}));
  check->add_option("--seed", opt.seed, "generator seed");
  check->add_option("--count", opt.count, "generated corpus size");
  check->add_option("--size", opt.size_bound, "generated term size bound");
  add_common(check);

  CLI::App* corpus = app.add_subcommand("corpus", "corpus utilities");
  corpus->require_subcommand(1);
  CLI::App* gen = corpus->add_subcommand("gen", "print generated terms");
  gen->add_option("--seed", opt.seed, "generator seed");
  gen->add_option("--count", opt.count, "number of terms");
  gen->add_option("--size", opt.size_bound, "term size bound");
  gen->add_flag("--open", opt.open, "allow free variables");
  gen->add_option("--sig", opt.sig_path, "signature file");

  std::vector<const char*> argv;
  argv.push_back("needlab");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;  // --help is a success; usage errors exit 2
  }

  try {
    if (eval->parsed()) return cmd_eval(file_a, opt, out);
    if (translate->parsed()) return cmd_translate(file_a, target, opt, out);
    if (tree->parsed()) return cmd_tree(file_a, depth, pos, opt, out);
    if (sim->parsed()) {
      // similarity defaults: by-name machine, tighter per-evaluation budget
      if (!sim->get_option("--calculus")->count()) opt.calculus = "name";
      if (!sim->get_option("--max-steps")->count()) opt.max_steps = 2000;
      return cmd_sim(file_a, file_b, opt, out);
    }
    if (check->parsed()) {
      if (!check->get_option("--max-steps")->count()) opt.max_steps = 2000;
      return cmd_check(rule, corpus_dir, opt, out);
    }
    if (gen->parsed()) return cmd_corpus_gen(opt, out);
  } catch (const CliError& e) {
    err << "error: " << e.message << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const BadExpr& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace needlab
