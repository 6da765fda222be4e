#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hdlmutant/ast.hpp"
#include "hdlmutant/rng.hpp"

namespace hdlmutant {

/// Complexity weight of every known syntax element. Operator elements use
/// their Verilog spelling; unary operators are prefixed `u` (`u+`, `u-`) and
/// reductions `r` (`r&`, `r~^`); control elements are `if-else`, `case`,
/// `for`; the conditional operator is `?:`.
const std::map<std::string, double>& default_weights();

bool is_control_element(const std::string& z);

/// Pre-order element stream of a design.
std::vector<std::string> linearize(const ModuleAst& ast);
std::vector<std::string> linearize(const Stmt& stmt);

struct CorpusStats {
  std::size_t files_ingested = 0;
  std::size_t files_rejected = 0;
  std::vector<std::filesystem::path> files;
  std::vector<std::vector<std::string>> sequences;
};

struct FragmentModel {
  std::map<std::string, double> freq;
  std::map<std::string, double> weight;
  std::map<std::pair<std::string, std::string>, double> transitions;
  double threshold_T = 0.0;
  int max_len_L = 8;

  bool operator==(const FragmentModel&) const = default;
};

/// Parses every path; unparseable files are counted and skipped. Throws
/// EmptyCorpus when nothing parses.
CorpusStats ingest_corpus(const std::vector<std::filesystem::path>& paths);

/// Recursively collects `*.v` files under `dir`, sorted.
std::vector<std::filesystem::path> list_verilog_files(const std::filesystem::path& dir);

/// Frequencies and transitions from `stats`; weights from the table;
/// threshold_T = median of the observed conditional probabilities.
FragmentModel build_model(const CorpusStats& stats, int max_len_L = 8);

/// P(z) = C(z) f(z) / sum C f. Throws EmptyModel.
std::map<std::string, double> element_probability(const FragmentModel& model);

/// Direct estimate count(prev, next) / sum_w count(prev, w). Throws
/// UnseenContext when `prev` never precedes anything.
double transition_probability(const FragmentModel& model, const std::string& next,
                              const std::string& prev);

/// Same quantity through P(prev | next) P(next) / P(prev) with count-based
/// marginals over transitions.
double transition_probability_bayes(const FragmentModel& model, const std::string& next,
                                    const std::string& prev);

/// Median of all observed conditional probabilities (0 if none).
double median_conditional(const FragmentModel& model);

struct ScopeSignal {
  std::string name;
  int width = 1;
  bool is_signed = false;
};

struct FragmentOptions {
  /// Temporary names are `<prefix><n>`; names in `taken` are skipped.
  std::string temp_prefix = "hm_t";
  std::set<std::string>* taken = nullptr;
  /// Shared numbering across calls; the search for a free name starts here.
  std::size_t* next_temp = nullptr;
  /// Use non-blocking assignments for temporaries (edge-triggered context).
  bool nonblocking = false;
  int max_depth = 2;
};

struct Fragment {
  std::vector<std::string> elements;
  std::vector<Stmt> stmts;
  std::vector<NetDecl> temps;
};

/// Samples an element sequence and realizes it as statements that read only
/// `scope` signals and write only fresh temporaries. Throws NoViableFragment
/// for an empty scope.
Fragment sample_fragment(const FragmentModel& model, const std::vector<ScopeSignal>& scope,
                         SplitMix64& rng, const FragmentOptions& opts = {});

/// Only the element sequence: a start drawn from element_probability, then
/// successors restricted to P(z | prev) >= threshold_T.
std::vector<std::string> sample_elements(const FragmentModel& model, SplitMix64& rng);

struct FeedbackOutcome {
  std::vector<std::string> elements;
  bool success = false;
};

/// Success: C(z) *= 1 + eta for each distinct element and the fragment's
/// transitions gain one count. Failure: C(z) = max(c_min, C(z) * (1 - eta)).
FragmentModel feedback_update(const FragmentModel& model,
                              const std::vector<FeedbackOutcome>& outcomes,
                              double eta = 0.1, double c_min = 0.1);

nlohmann::json model_to_json(const FragmentModel& model);
FragmentModel model_from_json(const nlohmann::json& j);
void save_model(const FragmentModel& model, const std::filesystem::path& path);
FragmentModel load_model(const std::filesystem::path& path);

}  // namespace hdlmutant
