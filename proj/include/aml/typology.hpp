#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aml/subgraph.hpp"

namespace aml {

/// Thresholds for the typology rules. Every rule and threshold is an
/// artifact choice; see docs/typologies.md for the rule set.
struct DetectorConfig {
  unsigned min_fan = 3;
  std::int64_t window_minutes = 72 * 60;
  double conservation_tol = 0.15;
  unsigned max_cycle_len = 6;
  unsigned bipartite_min_side = 3;
  double bipartite_min_density = 0.6;
  /// Upper bound on reported cycles, so dense subgraphs cannot blow up
  /// the enumeration.
  std::size_t max_cycles = 10000;

  /// Throws InvalidArgument when a threshold is out of range.
  void validate() const;
};

struct PatternMatch {
  PatternKind kind = PatternKind::None;
  std::vector<AccountId> participants;  // sorted
  std::vector<EdgeId> evidence;         // sorted transfer ids
  double score = 0.0;                   // [0, 1]

  bool operator==(const PatternMatch&) const = default;
};

/// Canonical match order: kind, participants, evidence.
bool match_less(const PatternMatch& a, const PatternMatch& b);

/// Every match of every detectable kind (Random is never detected).
///
/// FanOut / FanIn: an account with >= min_fan distinct counterparties within
///   one window; evidence is the earliest edge per counterparty in the first
///   best window.
/// ScatterGather: source s, sink t, >= min_fan intermediaries m with s->m
///   strictly before m->t.
/// GatherScatter: middle m with >= min_fan sources, all received strictly
///   before >= min_fan disjoint destinations are paid, and the in/out sums
///   of the evidence within conservation_tol (same currency only; mixed
///   currencies skip the check and halve the score).
/// SimpleCycle: directed cycle of 3..max_cycle_len distinct accounts whose
///   transfers can be taken with strictly increasing timestamps starting
///   from some account on the cycle.
/// Bipartite: disjoint sides A, B each >= bipartite_min_side, A->B pair
///   density >= bipartite_min_density, no transfers within a side or from
///   B to A. Evidence is a minimal subset that covers every participant and
///   meets the density threshold.
/// Stack: two Bipartite matches A->B and B->C sharing B, every A->B
///   transfer strictly before every B->C transfer.
std::vector<PatternMatch> detect(const Subgraph& sub, const DetectorConfig& cfg = {});

/// detect over many subgraphs; OpenMP-parallel, same results as serial.
std::vector<std::vector<PatternMatch>> detect_batch(std::span<const Subgraph> subs,
                                                    const DetectorConfig& cfg = {});
std::vector<std::vector<PatternMatch>> detect_batch_serial(std::span<const Subgraph> subs,
                                                           const DetectorConfig& cfg = {});

/// Distinct kinds among matches, ascending.
std::vector<PatternKind> detected_kinds(std::span<const PatternMatch> matches);

/// Re-checks a match's defining rule using only its evidence edges (plus
/// the surrounding subgraph for the "no other transfers" conditions). Used
/// to verify that reported evidence is minimal.
bool match_holds(const PatternMatch& m, const Subgraph& sub, const DetectorConfig& cfg = {});

struct GenConfig {
  PatternKind kind = PatternKind::FanOut;
  /// Branch factor; cycle length for SimpleCycle, side size for Bipartite
  /// and Stack, extra edges for Random.
  unsigned fan = 4;
  /// Number of bipartite stages for Stack.
  unsigned layers = 2;
  Money amount_base{1'000'000, "US Dollar"};
  double jitter = 0.1;
  std::int64_t span_minutes = 48 * 60;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A labelled synthetic instance of one typology. Deterministic per seed.
/// Truth is {true, {kind}}. Throws InvalidArgument for kind None.
Subgraph generate(const GenConfig& cfg);

struct BenignParams {
  unsigned n_accounts = 4;
  unsigned n_edges = 8;
  std::int64_t span_minutes = 90 * 1440;
  std::uint64_t seed = 0;
};

/// Regular-schedule transfers between fixed pairs with stable amounts. The
/// result has no matches at the default DetectorConfig; seeds are retried
/// up to 100 times, after which Error is thrown. Truth is {false, {None}}.
Subgraph generate_benign(const BenignParams& params);

}  // namespace aml
