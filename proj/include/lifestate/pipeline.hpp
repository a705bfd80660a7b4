#pragma once

// Corpus handling, per-type mining, cross-validation and tabular reports.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lifestate/lifestate.hpp"
#include "lifestate/sat_miner.hpp"
#include "lifestate/signature.hpp"
#include "lifestate/slicer.hpp"

namespace lifestate {

/// A signature trace and the framework type whose slice it is.
struct CorpusTrace {
  std::string group;
  SignatureTrace trace;
  std::filesystem::path source;  // empty for traces built in memory
};

using Corpus = std::vector<CorpusTrace>;

/// Every `*.sig` file under `dir`, in path order; the group is the parent
/// directory relative to `dir` ("" for files directly inside it).
Corpus read_corpus(const std::filesystem::path& dir);

std::map<std::string, std::vector<SignatureTrace>> by_group(const Corpus& corpus);

enum class MinerKind { sat, pfsa };

std::string_view to_string(MinerKind kind);

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  MinerKind miner = MinerKind::sat;
  Rational w{3, 5};
  long double delta = 0.5L;
  double alpha = 0.05;
  MatchState match = MatchState::post;
  CountOptions count;
};

/// "# seed=0 folds=5 miner=sat w=3/5 delta=0.500000 alpha=0.05 match=post"
std::string config_header(const PipelineConfig& config);

/// Mines each group separately and returns the union of the specs.
LifestateSpec mine_corpus(const Corpus& corpus, const PipelineConfig& config);

struct KindCounts {
  std::size_t enable = 0;
  std::size_t disable = 0;
  std::size_t allow = 0;
  std::size_t disallow = 0;

  std::size_t total() const { return enable + disable + allow + disallow; }
};

KindCounts kind_counts(const LifestateSpec& spec);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train = 0;
  std::size_t test = 0;
  Sufficiency mined;
  KindCounts rules;
  std::optional<Sufficiency> baseline;
};

struct Report {
  PipelineConfig config;
  std::size_t traces = 0;
  std::vector<FoldResult> folds;
  Rational mean_sufficiency;
  std::optional<Rational> mean_baseline;
};

/// Deterministic permutation of 0..n-1 drawn from `seed`.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

/// Contiguous folds over the shuffled order; the first n % folds folds hold
/// one extra trace.
std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Throws Error{TooFewTraces} when the corpus is smaller than the fold count
/// and Error{InvalidArgument} for fewer than two folds.
Report crossval(const Corpus& corpus, const PipelineConfig& config, const LifestateSpec* baseline = nullptr);

std::string render_report(const Report& report);

struct RulespaceRow {
  std::string name;
  std::size_t traces = 0;
  double mean_length = 0.0;
  std::size_t evt = 0;
  std::size_t ci = 0;

  std::uint64_t rule_space() const { return rule_space_size(evt + ci); }
};

std::string render_rulespace(std::span<const RulespaceRow> rows);

std::string render_kind_counts(const LifestateSpec& spec);

}  // namespace lifestate
