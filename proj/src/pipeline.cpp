#include "lifestate/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "lifestate/error.hpp"
#include "lifestate/hash.hpp"
#include "lifestate/pfsa.hpp"

namespace lifestate {

namespace fs = std::filesystem;

Corpus read_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".sig") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Corpus out;
  for (const auto& f : files) {
    std::string group = fs::relative(f.parent_path(), dir).generic_string();
    if (group == ".") group.clear();
    out.push_back({std::move(group), read_signature_trace(f), f});
  }
  return out;
}

std::map<std::string, std::vector<SignatureTrace>> by_group(const Corpus& corpus) {
  std::map<std::string, std::vector<SignatureTrace>> out;
  for (const auto& c : corpus) out[c.group].push_back(c.trace);
  return out;
}

std::string_view to_string(MinerKind kind) { return kind == MinerKind::sat ? "sat" : "pfsa"; }

namespace {

std::string render_rational(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace

std::string config_header(const PipelineConfig& config) {
  char delta[32];
  std::snprintf(delta, sizeof delta, "%.6Lf", config.delta);
  char alpha[32];
  std::snprintf(alpha, sizeof alpha, "%g", config.alpha);
  std::ostringstream out;
  out << "# seed=" << config.seed << " folds=" << config.folds << " miner=" << to_string(config.miner)
      << " w=" << render_rational(config.w) << " delta=" << delta << " alpha=" << alpha
      << " match=" << (config.match == MatchState::post ? "post" : "pre");
  return out.str();
}

LifestateSpec mine_corpus(const Corpus& corpus, const PipelineConfig& config) {
  LifestateSpec spec;
  for (const auto& [group, traces] : by_group(corpus)) {
    if (config.miner == MinerKind::sat) {
      auto mined = mine_sat(traces, config.w, config.delta, FreqOptions{config.match, config.count});
      spec.insert(mined.spec.begin(), mined.spec.end());
    } else {
      auto rules = extract_rules(train_pfsa(traces, config.alpha));
      auto s = spec_of(rules);
      spec.insert(s.begin(), s.end());
    }
  }
  return spec;
}

KindCounts kind_counts(const LifestateSpec& spec) {
  KindCounts k;
  for (const auto& r : spec) {
    switch (kind_of(r)) {
      case RuleKind::enable: ++k.enable; break;
      case RuleKind::disable: ++k.disable; break;
      case RuleKind::allow: ++k.allow; break;
      case RuleKind::disallow: ++k.disallow; break;
    }
  }
  return k;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::uint64_t state = splitmix64(seed);
  for (std::size_t i = n; i > 1; --i) {
    state = splitmix64(state);
    std::size_t j = static_cast<std::size_t>(state % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds == 0) throw Error(ErrorCode::InvalidArgument, "fold count must be positive");
  auto order = shuffled_indices(n, seed);
  std::vector<std::vector<std::size_t>> out(folds);
  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    out[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return out;
}

Report crossval(const Corpus& corpus, const PipelineConfig& config, const LifestateSpec* baseline) {
  if (config.folds < 2) throw Error(ErrorCode::InvalidArgument, "crossval needs at least two folds");
  if (corpus.size() < config.folds) {
    throw Error(ErrorCode::TooFewTraces, std::to_string(corpus.size()) + " traces cannot fill " +
                                             std::to_string(config.folds) + " folds");
  }
  Report report;
  report.config = config;
  report.traces = corpus.size();
  auto parts = fold_partition(corpus.size(), config.folds, config.seed);
  Rational sum = 0;
  Rational baseline_sum = 0;
  for (std::size_t f = 0; f < parts.size(); ++f) {
    std::vector<bool> held(corpus.size(), false);
    for (std::size_t i : parts[f]) held[i] = true;
    Corpus train;
    std::vector<SignatureTrace> test;
    for (std::size_t g = 0; g < parts.size(); ++g) {
      for (std::size_t i : parts[g]) {
        if (held[i]) test.push_back(corpus[i].trace);
        else train.push_back(corpus[i]);
      }
    }
    FoldResult fr;
    fr.fold = f;
    fr.train = train.size();
    fr.test = test.size();
    LifestateSpec spec = mine_corpus(train, config);
    fr.mined = sufficiency(spec, test);
    fr.rules = kind_counts(spec);
    sum += fr.mined.ratio;
    if (baseline) {
      fr.baseline = sufficiency(*baseline, test);
      baseline_sum += fr.baseline->ratio;
    }
    report.folds.push_back(std::move(fr));
  }
  report.mean_sufficiency = sum / static_cast<long long>(parts.size());
  if (baseline) report.mean_baseline = baseline_sum / static_cast<long long>(parts.size());
  return report;
}

std::string render_report(const Report& report) {
  std::ostringstream out;
  out << config_header(report.config) << " traces=" << report.traces << '\n';
  const bool with_baseline = report.mean_baseline.has_value();
  out << "fold\ttrain\ttest\tsound\tsufficiency\trules\t->evt\t-/>evt\t->ci\t-/>ci";
  if (with_baseline) out << "\tbaseline_sound\tbaseline_sufficiency";
  out << '\n';
  for (const auto& f : report.folds) {
    out << f.fold << '\t' << f.train << '\t' << f.test << '\t' << f.mined.sound << '\t'
        << render_decimal(f.mined.ratio) << '\t' << f.rules.total() << '\t' << f.rules.enable << '\t'
        << f.rules.disable << '\t' << f.rules.allow << '\t' << f.rules.disallow;
    if (with_baseline) out << '\t' << f.baseline->sound << '\t' << render_decimal(f.baseline->ratio);
    out << '\n';
  }
  out << "mean\t\t\t\t" << render_decimal(report.mean_sufficiency) << "\t\t\t\t\t";
  if (with_baseline) out << "\t\t" << render_decimal(*report.mean_baseline);
  out << '\n';
  return out.str();
}

std::string render_rulespace(std::span<const RulespaceRow> rows) {
  std::ostringstream out;
  out << "type\ttraces\tmean_len\tevt\tci\tlifespec\n";
  for (const auto& r : rows) {
    char len[32];
    std::snprintf(len, sizeof len, "%.1f", r.mean_length);
    out << r.name << '\t' << r.traces << '\t' << len << '\t' << r.evt << '\t' << r.ci << '\t' << r.rule_space()
        << '\n';
  }
  return out.str();
}

std::string render_kind_counts(const LifestateSpec& spec) {
  KindCounts k = kind_counts(spec);
  std::ostringstream out;
  out << "kind\tcount\n"
      << "->evt\t" << k.enable << "\n-/>evt\t" << k.disable << "\n->ci\t" << k.allow << "\n-/>ci\t" << k.disallow
      << "\ntotal\t" << k.total() << '\n';
  return out.str();
}

}  // namespace lifestate
