#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "cab/model.hpp"

namespace cab {

// Raw interaction stream: one served item per event, no candidate lists.
struct RawEvent {
  double timestamp = 0.0;
  int user = 0;   // dense index into user_ids
  int item = 0;   // dense index into item_ids
  double payoff = 0.0;
};

struct RawEventLog {
  std::vector<RawEvent> events;
  std::vector<std::string> user_ids;  // appearance order
  std::vector<std::string> item_ids;  // appearance order
};

struct ItemCatalog {
  std::vector<std::string> ids;  // row i of features belongs to ids[i]
  Eigen::MatrixXd features;
  std::unordered_map<std::string, int> index;

  int dim() const { return static_cast<int>(features.cols()); }
  int size() const { return static_cast<int>(ids.size()); }
};

// Replayable event: served item plus the candidate list it competed in.
struct LogEvent {
  double timestamp = 0.0;
  int user = 0;
  int served = 0;                // catalog index
  double payoff = 0.0;
  std::vector<int> candidates;   // catalog indices; contains served
};

struct ReplayLog {
  std::vector<LogEvent> events;
  ItemCatalog catalog;
  std::vector<std::string> user_ids;

  int n_users() const { return static_cast<int>(user_ids.size()); }
};

// CSV ingestion. Headers are required and validated; malformed rows raise a
// config error naming the offending line.
RawEventLog ingest_raw(const std::string& path);
ItemCatalog ingest_catalog(const std::string& path);
// With a null catalog the items appearing in the file get one-hot features
// (dimension = distinct item count, appearance order).
ReplayLog ingest_replay(const std::string& path, const ItemCatalog* catalog);

void write_replay_csv(const ReplayLog& log, const std::string& path);

struct SynthOptions {
  int c = 15;               // target candidate-list length
  bool strict = false;      // error instead of emitting shorter early lists
  bool force_positive = false;  // keep one known payoff-1 item of the user in
                                // the list when the served payoff is not 1
};

// Builds candidate lists for a raw stream: the served item plus uniform
// distinct padding drawn from items seen so far, with the served item placed
// at a uniform slot. Payoffs are never consulted for padding, so a uniform
// policy retains ~1/c of events.
ReplayLog synthesize_random_log(const RawEventLog& raw, const SynthOptions& opts,
                                std::mt19937_64& rng);

struct RetainedEvent {
  std::int64_t event_index = 0;  // 0-based position in the source log
  double payoff = 0.0;
};

// Rejection replay over events [begin, end): the policy sees round t equal to
// its retained count + 1; events where its choice differs from the logged
// served item are discarded without any policy update.
std::vector<RetainedEvent> replay(Policy& policy, const ReplayLog& log,
                                  std::size_t begin, std::size_t end);
std::vector<RetainedEvent> replay(Policy& policy, const ReplayLog& log);

struct TuneOutcome {
  int best_cell = 0;
  std::vector<double> cell_scores;       // mean retained payoff per cell
  std::size_t tune_events = 0;           // size of the tuning segment
  std::vector<RetainedEvent> test_retained;  // fresh best-cell run on the rest
};

// Grid search on the first floor(split * event count) events, then a fresh
// run of the winning cell on the remainder. Ties keep the first cell.
TuneOutcome tune(const std::function<std::unique_ptr<Policy>(int)>& make_policy,
                 int n_cells, const ReplayLog& log, double split);

}  // namespace cab
