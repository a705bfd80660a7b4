// Command-line front end: simulate, slice, check, mine-sat, mine-pfsa,
// crossval, rulespace, report.
//
// Exit codes: 0 success, 2 validation error, 3 budget exhausted.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lifestate/error.hpp"
#include "lifestate/life/machine.hpp"
#include "lifestate/life/parser.hpp"
#include "lifestate/lifestate.hpp"
#include "lifestate/pfsa.hpp"
#include "lifestate/pipeline.hpp"
#include "lifestate/sat_miner.hpp"
#include "lifestate/slicer.hpp"
#include "lifestate/trace.hpp"

namespace fs = std::filesystem;
using namespace lifestate;

namespace {

constexpr int kValidationError = 2;
constexpr int kBudgetError = 3;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
}

long double parse_delta(const std::string& text) {
  Rational r = parse_rational(text);
  return numerator(r).convert_to<long double>() / denominator(r).convert_to<long double>();
}

MatchState parse_match(const std::string& text) {
  if (text == "post") return MatchState::post;
  if (text == "pre") return MatchState::pre;
  throw Error(ErrorCode::InvalidArgument, "match must be post or pre");
}

struct SimulateArgs {
  std::string program;
  std::uint64_t seed = 0;
  std::uint64_t fuel = 0;
  std::uint64_t max_steps = 5'000'000;
  bool round_robin = false;
  std::string out;
};

int simulate(const SimulateArgs& a) {
  auto program = life::parse_program_file(a.program);
  life::SchedulerPolicy policy{a.round_robin ? life::SchedulerMode::round_robin : life::SchedulerMode::seeded_random,
                               a.seed};
  Trace trace = life::run(program, policy, {a.fuel, a.max_steps});
  std::ostringstream out;
  write_trace(trace, out);
  write_text(a.out, out.str());
  std::cerr << trace.records.size() << " records, " << to_string(trace.completion) << '\n';
  return 0;
}

struct SliceArgs {
  std::vector<std::string> inputs;
  std::string out_dir;
};

int slice_cmd(const SliceArgs& a) {
  std::map<std::string, std::vector<SignatureTrace>> groups;
  for (const auto& in : a.inputs) {
    Trace trace = read_trace(fs::path(in));
    SliceSet set = slice(trace);
    const std::string stem = fs::path(in).stem().string();
    for (const auto& [obj, st] : set.abstract) {
      fs::path dir = fs::path(a.out_dir) / obj.fwk_type;
      fs::create_directories(dir);
      write_signature_trace(st, dir / (stem + ".o" + std::to_string(obj.id) + ".sig"));
    }
    merge_groups(groups, set.groups);
  }
  std::vector<RulespaceRow> rows;
  for (const auto& [type, st] : group_stats(groups)) {
    rows.push_back({type, st.traces, st.mean_length, st.evt_signatures, st.ci_signatures});
  }
  fs::create_directories(a.out_dir);
  write_text((fs::path(a.out_dir) / "groups.tsv").string(), render_rulespace(rows));
  return 0;
}

struct CheckArgs {
  std::string spec;
  std::string traces;
  std::string report;
};

int check_cmd(const CheckArgs& a) {
  LifestateSpec spec = read_spec(a.spec);
  Corpus corpus = read_corpus(a.traces);
  std::vector<SignatureTrace> traces;
  std::ostringstream out;
  out << "trace\tverdict\tindex\treason\n";
  for (const auto& c : corpus) {
    CheckResult r = check_trace(spec, c.trace);
    out << fs::relative(c.source, a.traces).generic_string() << '\t'
        << (r.verdict == Verdict::Sound ? "Sound" : "Stuck") << '\t';
    if (r.verdict == Verdict::Stuck) out << r.stuck_index << '\t' << to_string(*r.stuck_reason);
    else out << "-\t-";
    out << '\n';
    traces.push_back(c.trace);
  }
  Sufficiency s = sufficiency(spec, traces);
  out << "# sufficiency " << s.sound << '/' << s.total << ' ' << render_decimal(s.ratio) << '\n';
  write_text(a.report, out.str());
  return 0;
}

struct MineSatArgs {
  std::string traces;
  std::string w = "0.6";
  std::string delta = "0.5";
  std::string match = "post";
  int max_vars = 50'000;
  std::string out;
  std::string freq_table;
};

int mine_sat_cmd(const MineSatArgs& a) {
  Corpus corpus = read_corpus(a.traces);
  const Rational w = parse_rational(a.w);
  const long double delta = parse_delta(a.delta);
  FreqOptions options{parse_match(a.match), CountOptions{a.max_vars}};
  LifestateSpec spec;
  std::ostringstream table;
  for (const auto& [group, traces] : by_group(corpus)) {
    MineResult r = mine_sat(traces, w, delta, options);
    spec.insert(r.spec.begin(), r.spec.end());
    table << "# group=" << (group.empty() ? "." : group) << '\n';
    write_freq_table(r.table, table);
  }
  write_text(a.out, render_spec(spec));
  if (!a.freq_table.empty()) write_text(a.freq_table, table.str());
  return 0;
}

struct MinePfsaArgs {
  std::string traces;
  std::string import;
  double alpha = 0.05;
  std::size_t top = 20;
  std::string out;
  std::string weights;
  std::string automaton_out;
};

int mine_pfsa_cmd(const MinePfsaArgs& a) {
  std::vector<WeightedRule> all;
  std::ostringstream automata;
  if (!a.import.empty()) {
    all = extract_rules(read_automaton(fs::path(a.import)));
  } else {
    if (a.traces.empty()) throw Error(ErrorCode::InvalidArgument, "mine-pfsa needs --traces or --import");
    for (const auto& [group, traces] : by_group(read_corpus(a.traces))) {
      ProbAutomaton pa = train_pfsa(traces, a.alpha);
      automata << "# group=" << (group.empty() ? "." : group) << '\n';
      write_automaton(pa, automata);
      auto rules = extract_rules(pa);
      all.insert(all.end(), rules.begin(), rules.end());
    }
  }
  auto ranked = top_k(all, a.top);
  write_text(a.out, render_spec(spec_of(ranked)));
  if (!a.weights.empty()) {
    std::ostringstream w;
    w << "rule\tkind\tweight\n";
    for (const auto& r : ranked) {
      w << to_string(r.rule) << '\t' << to_string(kind_of(r.rule)) << '\t' << render_decimal(r.weight) << '\n';
    }
    write_text(a.weights, w.str());
  }
  if (!a.automaton_out.empty()) write_text(a.automaton_out, automata.str());
  return 0;
}

struct CrossvalArgs {
  std::string traces;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::string miner = "sat";
  std::string w = "0.6";
  std::string delta = "0.5";
  double alpha = 0.05;
  std::string match = "post";
  std::string baseline;
  std::string out;
};

int crossval_cmd(const CrossvalArgs& a) {
  PipelineConfig config;
  config.seed = a.seed;
  config.folds = a.folds;
  if (a.miner == "sat") config.miner = MinerKind::sat;
  else if (a.miner == "pfsa") config.miner = MinerKind::pfsa;
  else throw Error(ErrorCode::InvalidArgument, "miner must be sat or pfsa");
  config.w = parse_rational(a.w);
  config.delta = parse_delta(a.delta);
  config.alpha = a.alpha;
  config.match = parse_match(a.match);
  Corpus corpus = read_corpus(a.traces);
  std::optional<LifestateSpec> baseline;
  if (!a.baseline.empty()) baseline = read_spec(a.baseline);
  Report report = crossval(corpus, config, baseline ? &*baseline : nullptr);
  write_text(a.out, render_report(report));
  return 0;
}

struct RulespaceArgs {
  std::string traces;
  std::vector<std::string> counts;
  std::string out;
};

int rulespace_cmd(const RulespaceArgs& a) {
  std::vector<RulespaceRow> rows;
  if (!a.traces.empty()) {
    for (const auto& [type, st] : group_stats(by_group(read_corpus(a.traces)))) {
      rows.push_back({type.empty() ? "." : type, st.traces, st.mean_length, st.evt_signatures, st.ci_signatures});
    }
  }
  for (const auto& spec : a.counts) {
    // evt,ci[,traces,mean_len[,name]]
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
    if (parts.size() < 2) throw Error(ErrorCode::InvalidArgument, "--counts expects evt,ci[,traces,mean_len[,name]]");
    RulespaceRow row;
    try {
      row.evt = std::stoul(parts[0]);
      row.ci = std::stoul(parts[1]);
      if (parts.size() > 2) row.traces = std::stoul(parts[2]);
      if (parts.size() > 3) row.mean_length = std::stod(parts[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad --counts value '" + spec + "'");
    }
    row.name = parts.size() > 4 ? parts[4] : "-";
    rows.push_back(row);
  }
  write_text(a.out, render_rulespace(rows));
  return 0;
}

struct ReportArgs {
  std::string spec;
  std::string out;
};

int report_cmd(const ReportArgs& a) {
  write_text(a.out, render_kind_counts(read_spec(a.spec)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lifestate: simulate event-driven programs, slice traces, check and mine lifestate rules"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "run a program and record its trace");
  c_sim->add_option("--program", sim.program, "program file")->required();
  c_sim->add_option("--seed", sim.seed, "scheduler seed");
  c_sim->add_option("--fuel", sim.fuel, "maximum event dispatches")->required();
  c_sim->add_option("--max-steps", sim.max_steps, "reduction budget");
  c_sim->add_flag("--round-robin", sim.round_robin, "round-robin instead of seeded scheduling");
  c_sim->add_option("--out", sim.out, "trace file (default stdout)");

  SliceArgs sl;
  auto* c_slice = app.add_subcommand("slice", "slice traces per object and abstract them");
  c_slice->add_option("--in", sl.inputs, "trace file(s)")->required();
  c_slice->add_option("--out-dir", sl.out_dir, "output directory")->required();

  CheckArgs ck;
  auto* c_check = app.add_subcommand("check", "check signature traces against a spec");
  c_check->add_option("--spec", ck.spec, "rule file")->required();
  c_check->add_option("--traces", ck.traces, "directory of .sig files")->required();
  c_check->add_option("--report", ck.report, "report file (default stdout)");

  MineSatArgs ms;
  auto* c_ms = app.add_subcommand("mine-sat", "mine rules by path counting");
  c_ms->add_option("--traces", ms.traces, "directory of .sig files")->required();
  c_ms->add_option("--w", ms.w, "match ratio threshold in (0,1]");
  c_ms->add_option("--delta", ms.delta, "selection threshold in (0,1]");
  c_ms->add_option("--match", ms.match, "state read by a rule match: post or pre");
  c_ms->add_option("--max-vars", ms.max_vars, "variable budget per formula");
  c_ms->add_option("--out", ms.out, "rule file (default stdout)");
  c_ms->add_option("--freq-table", ms.freq_table, "frequency table file");

  MinePfsaArgs mp;
  auto* c_mp = app.add_subcommand("mine-pfsa", "mine rules from a probabilistic automaton");
  c_mp->add_option("--traces", mp.traces, "directory of .sig files");
  c_mp->add_option("--import", mp.import, "score an externally trained automaton instead");
  c_mp->add_option("--alpha", mp.alpha, "merge significance level");
  c_mp->add_option("--top", mp.top, "number of rules kept");
  c_mp->add_option("--out", mp.out, "rule file (default stdout)");
  c_mp->add_option("--weights", mp.weights, "weighted rule table");
  c_mp->add_option("--automaton-out", mp.automaton_out, "learned automata");

  CrossvalArgs cv;
  auto* c_cv = app.add_subcommand("crossval", "k-fold cross-validation of a miner");
  c_cv->add_option("--traces", cv.traces, "directory of .sig files")->required();
  c_cv->add_option("--seed", cv.seed, "shuffle seed");
  c_cv->add_option("--folds", cv.folds, "fold count");
  c_cv->add_option("--miner", cv.miner, "sat or pfsa");
  c_cv->add_option("--w", cv.w, "match ratio threshold");
  c_cv->add_option("--delta", cv.delta, "selection threshold");
  c_cv->add_option("--alpha", cv.alpha, "merge significance level");
  c_cv->add_option("--match", cv.match, "post or pre");
  c_cv->add_option("--baseline", cv.baseline, "reference rule file scored on every fold");
  c_cv->add_option("--out", cv.out, "report file (default stdout)");

  RulespaceArgs rs;
  auto* c_rs = app.add_subcommand("rulespace", "rule-space sizes per type");
  c_rs->add_option("--traces", rs.traces, "directory of .sig files grouped by type");
  c_rs->add_option("--counts", rs.counts, "evt,ci[,traces,mean_len[,name]]");
  c_rs->add_option("--out", rs.out, "table file (default stdout)");

  ReportArgs rp;
  auto* c_rp = app.add_subcommand("report", "rule counts of a spec by kind");
  c_rp->add_option("--spec", rp.spec, "rule file")->required();
  c_rp->add_option("--out", rp.out, "table file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationError;
  }

  try {
    if (*c_sim) return simulate(sim);
    if (*c_slice) return slice_cmd(sl);
    if (*c_check) return check_cmd(ck);
    if (*c_ms) return mine_sat_cmd(ms);
    if (*c_mp) return mine_pfsa_cmd(mp);
    if (*c_cv) return crossval_cmd(cv);
    if (*c_rs) return rulespace_cmd(rs);
    if (*c_rp) return report_cmd(rp);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return is_budget_error(e.code()) ? kBudgetError : kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  }
  return kValidationError;
}
