#include "cab/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cab {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

std::string location(const std::string& path, std::size_t line_no) {
  return path + ":" + std::to_string(line_no);
}

double parse_double(const std::string& s, const std::string& path,
                    std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(location(path, line_no) + ": cannot parse " + what +
                      " '" + s + "'");
  }
}

double parse_payoff(const std::string& s, const std::string& path,
                    std::size_t line_no) {
  const double v = parse_double(s, path, line_no, "payoff");
  if (v < -1.0 || v > 1.0)
    throw ConfigError(location(path, line_no) + ": payoff " + s +
                      " outside [-1, 1]");
  return v;
}

std::string read_line(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void expect_header(const std::string& got, const std::string& want,
                   const std::string& path) {
  if (got != want)
    throw ConfigError(path + ":1: expected header '" + want + "', got '" +
                      got + "'");
}

int intern(const std::string& id, std::vector<std::string>& ids,
           std::unordered_map<std::string, int>& index) {
  auto it = index.find(id);
  if (it != index.end()) return it->second;
  const int v = static_cast<int>(ids.size());
  ids.push_back(id);
  index.emplace(id, v);
  return v;
}

}  // namespace

RawEventLog ingest_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open raw log file: " + path);
  expect_header(read_line(in), "timestamp,user_id,item_id,payoff", path);

  RawEventLog log;
  std::unordered_map<std::string, int> user_index, item_index;
  double prev_ts = -std::numeric_limits<double>::infinity();
  std::size_t line_no = 1;
  while (in.peek() != EOF) {
    const std::string line = read_line(in);
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4)
      throw ConfigError(location(path, line_no) + ": expected 4 fields, got " +
                        std::to_string(fields.size()));
    RawEvent ev;
    ev.timestamp = parse_double(fields[0], path, line_no, "timestamp");
    if (ev.timestamp < prev_ts)
      throw ConfigError(location(path, line_no) + ": timestamps must be nondecreasing");
    prev_ts = ev.timestamp;
    ev.user = intern(fields[1], log.user_ids, user_index);
    ev.item = intern(fields[2], log.item_ids, item_index);
    ev.payoff = parse_payoff(fields[3], path, line_no);
    log.events.push_back(ev);
  }
  return log;
}

ItemCatalog ingest_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open catalog file: " + path);
  const std::string header = read_line(in);
  const auto head_fields = split(header, ',');
  if (head_fields.size() < 2 || head_fields[0] != "item_id")
    throw ConfigError(path + ":1: expected header 'item_id,f0,...'");
  const int d = static_cast<int>(head_fields.size()) - 1;
  for (int i = 0; i < d; ++i)
    if (head_fields[i + 1] != "f" + std::to_string(i))
      throw ConfigError(path + ":1: feature columns must be named f0..f" +
                        std::to_string(d - 1));

  ItemCatalog cat;
  std::vector<Eigen::VectorXd> rows;
  std::size_t line_no = 1;
  while (in.peek() != EOF) {
    const std::string line = read_line(in);
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != d + 1)
      throw ConfigError(location(path, line_no) + ": expected " +
                        std::to_string(d + 1) + " fields");
    if (cat.index.count(fields[0]))
      throw ConfigError(location(path, line_no) + ": duplicate item_id '" +
                        fields[0] + "'");
    Eigen::VectorXd f(d);
    for (int i = 0; i < d; ++i)
      f[i] = parse_double(fields[i + 1], path, line_no, "feature");
    const double norm = f.norm();
    if (norm > 1.0) f /= norm;  // features live in the unit ball
    cat.index.emplace(fields[0], static_cast<int>(cat.ids.size()));
    cat.ids.push_back(fields[0]);
    rows.push_back(std::move(f));
  }
  if (rows.empty()) throw ConfigError(path + ": catalog holds no items");
  cat.features.resize(static_cast<int>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    cat.features.row(static_cast<int>(i)) = rows[i].transpose();
  return cat;
}

ReplayLog ingest_replay(const std::string& path, const ItemCatalog* catalog) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open replay log file: " + path);
  expect_header(read_line(in),
                "timestamp,user_id,served_item_id,payoff,candidates", path);

  struct PendingEvent {
    double timestamp;
    std::string user;
    std::string served;
    double payoff;
    std::vector<std::string> candidates;
  };
  std::vector<PendingEvent> pending;
  double prev_ts = -std::numeric_limits<double>::infinity();
  std::size_t line_no = 1;
  while (in.peek() != EOF) {
    const std::string line = read_line(in);
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5)
      throw ConfigError(location(path, line_no) + ": expected 5 fields, got " +
                        std::to_string(fields.size()));
    PendingEvent ev;
    ev.timestamp = parse_double(fields[0], path, line_no, "timestamp");
    if (ev.timestamp < prev_ts)
      throw ConfigError(location(path, line_no) + ": timestamps must be nondecreasing");
    prev_ts = ev.timestamp;
    ev.user = fields[1];
    ev.served = fields[2];
    ev.payoff = parse_payoff(fields[3], path, line_no);
    ev.candidates = split(fields[4], '|');
    if (ev.candidates.empty() || ev.candidates[0].empty())
      throw ConfigError(location(path, line_no) + ": empty candidate list");
    if (std::find(ev.candidates.begin(), ev.candidates.end(), ev.served) ==
        ev.candidates.end())
      throw ConfigError(location(path, line_no) +
                        ": served item missing from candidate list");
    pending.push_back(std::move(ev));
  }

  ReplayLog log;
  std::unordered_map<std::string, int> user_index;
  if (catalog != nullptr) {
    log.catalog = *catalog;
  } else {
    // One-hot catalog over the items the log mentions, appearance order.
    for (const auto& ev : pending) {
      auto note = [&](const std::string& id) {
        if (!log.catalog.index.count(id)) {
          log.catalog.index.emplace(id, static_cast<int>(log.catalog.ids.size()));
          log.catalog.ids.push_back(id);
        }
      };
      note(ev.served);
      for (const auto& id : ev.candidates) note(id);
    }
    const int d = log.catalog.size();
    log.catalog.features = Eigen::MatrixXd::Identity(d, d);
  }

  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& ev = pending[i];
    LogEvent out;
    out.timestamp = ev.timestamp;
    out.user = intern(ev.user, log.user_ids, user_index);
    auto lookup = [&](const std::string& id) {
      auto it = log.catalog.index.find(id);
      if (it == log.catalog.index.end())
        throw ConfigError(path + ": item '" + id + "' missing from catalog");
      return it->second;
    };
    out.served = lookup(ev.served);
    out.payoff = ev.payoff;
    for (const auto& id : ev.candidates) out.candidates.push_back(lookup(id));
    log.events.push_back(std::move(out));
  }
  return log;
}

void write_replay_csv(const ReplayLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << "timestamp,user_id,served_item_id,payoff,candidates\n";
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& ev : log.events) {
    out << fmt(ev.timestamp) << ',' << log.user_ids[ev.user] << ','
        << log.catalog.ids[ev.served] << ',' << fmt(ev.payoff) << ',';
    for (std::size_t i = 0; i < ev.candidates.size(); ++i) {
      if (i) out << '|';
      out << log.catalog.ids[ev.candidates[i]];
    }
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing output file: " + path);
}

ReplayLog synthesize_random_log(const RawEventLog& raw, const SynthOptions& opts,
                                std::mt19937_64& rng) {
  if (opts.c < 1) throw ConfigError("synth.c must be >= 1");

  ReplayLog log;
  log.user_ids = raw.user_ids;
  log.catalog.ids = raw.item_ids;
  for (int i = 0; i < static_cast<int>(raw.item_ids.size()); ++i)
    log.catalog.index.emplace(raw.item_ids[i], i);
  log.catalog.features = Eigen::MatrixXd::Identity(
      static_cast<int>(raw.item_ids.size()), static_cast<int>(raw.item_ids.size()));

  std::vector<int> seen;                      // distinct items, appearance order
  std::vector<std::uint8_t> item_seen(raw.item_ids.size(), 0);
  std::vector<std::vector<int>> positives(raw.user_ids.size());
  std::vector<std::uint8_t> scratch_in_list(raw.item_ids.size(), 0);

  for (const auto& ev : raw.events) {
    if (!item_seen[ev.item]) {
      item_seen[ev.item] = 1;
      seen.push_back(ev.item);
    }
    const int pool = static_cast<int>(seen.size()) - 1;  // excluding served
    const int want_pad = opts.c - 1;
    if (opts.strict && pool < want_pad)
      throw ConfigError("synth: not enough distinct items for c=" +
                        std::to_string(opts.c) + " in strict mode");
    const int k_pad = std::min(want_pad, pool);

    std::vector<int> pad;
    pad.reserve(k_pad);
    if (k_pad == pool) {
      for (int item : seen)
        if (item != ev.item) pad.push_back(item);
    } else if (k_pad > 0) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(seen.size()) - 1);
      int attempts = 0;
      const int attempt_cap = 1000 * opts.c;
      while (static_cast<int>(pad.size()) < k_pad && attempts < attempt_cap) {
        ++attempts;
        const int item = seen[pick(rng)];
        if (item == ev.item || scratch_in_list[item]) continue;
        scratch_in_list[item] = 1;
        pad.push_back(item);
      }
      if (static_cast<int>(pad.size()) < k_pad) {
        // Dense fallback; only reachable when the pool barely exceeds c.
        std::vector<int> rest;
        for (int item : seen)
          if (item != ev.item && !scratch_in_list[item]) rest.push_back(item);
        std::sample(rest.begin(), rest.end(), std::back_inserter(pad),
                    k_pad - static_cast<int>(pad.size()), rng);
      }
      for (int item : pad) scratch_in_list[item] = 0;  // cheap per-event reset
    }

    LogEvent out;
    out.timestamp = ev.timestamp;
    out.user = ev.user;
    out.served = ev.item;
    out.payoff = ev.payoff;
    out.candidates = std::move(pad);
    std::uniform_int_distribution<int> slot(0, static_cast<int>(out.candidates.size()));
    out.candidates.insert(out.candidates.begin() + slot(rng), ev.item);

    if (opts.force_positive && ev.payoff != 1.0 && !positives[ev.user].empty()) {
      bool has_positive = false;
      for (int item : out.candidates) {
        for (int p : positives[ev.user])
          if (p == item) {
            has_positive = true;
            break;
          }
        if (has_positive) break;
      }
      if (!has_positive && out.candidates.size() > 1) {
        std::uniform_int_distribution<int> pick_pos(
            0, static_cast<int>(positives[ev.user].size()) - 1);
        const int pos_item = positives[ev.user][pick_pos(rng)];
        std::uniform_int_distribution<int> pick_slot(
            0, static_cast<int>(out.candidates.size()) - 1);
        int target = pick_slot(rng);
        while (out.candidates[target] == ev.item) target = pick_slot(rng);
        out.candidates[target] = pos_item;
      }
    }
    if (ev.payoff == 1.0) {
      bool known = false;
      for (int p : positives[ev.user])
        if (p == ev.item) known = true;
      if (!known) positives[ev.user].push_back(ev.item);
    }
    log.events.push_back(std::move(out));
  }
  return log;
}

std::vector<RetainedEvent> replay(Policy& policy, const ReplayLog& log,
                                  std::size_t begin, std::size_t end) {
  if (begin > end || end > log.events.size())
    throw std::invalid_argument("replay: bad event range");
  if (policy.dim() != log.catalog.dim())
    throw std::invalid_argument("replay: policy/catalog dimension mismatch");

  std::vector<RetainedEvent> retained;
  std::int64_t t = 1;
  for (std::size_t idx = begin; idx < end; ++idx) {
    const LogEvent& ev = log.events[idx];
    RoundInput input;
    input.t = t;
    input.user = ev.user;
    input.candidates.reserve(ev.candidates.size());
    for (int ci : ev.candidates)
      input.candidates.push_back(
          {ci, log.catalog.features.row(ci).transpose()});
    const int k = policy.select(input);
    if (ev.candidates[k] != ev.served) continue;  // discarded, no update
    policy.observe(input, {k, ev.payoff});
    retained.push_back({static_cast<std::int64_t>(idx), ev.payoff});
    ++t;
  }
  return retained;
}

std::vector<RetainedEvent> replay(Policy& policy, const ReplayLog& log) {
  return replay(policy, log, 0, log.events.size());
}

TuneOutcome tune(const std::function<std::unique_ptr<Policy>(int)>& make_policy,
                 int n_cells, const ReplayLog& log, double split) {
  if (n_cells < 1) throw std::invalid_argument("tune: need >= 1 grid cell");
  if (!(split > 0.0 && split < 1.0))
    throw ConfigError("tune.split must lie in (0, 1)");

  TuneOutcome out;
  const std::size_t total = log.events.size();
  out.tune_events = static_cast<std::size_t>(
      std::floor(split * static_cast<double>(total)));
  out.cell_scores.resize(n_cells);
  double best_score = -std::numeric_limits<double>::infinity();
  for (int cell = 0; cell < n_cells; ++cell) {
    auto policy = make_policy(cell);
    const auto retained = replay(*policy, log, 0, out.tune_events);
    double score = -std::numeric_limits<double>::infinity();
    if (!retained.empty()) {
      double sum = 0.0;
      for (const auto& r : retained) sum += r.payoff;
      score = sum / static_cast<double>(retained.size());
    }
    out.cell_scores[cell] = score;
    if (score > best_score) {
      best_score = score;
      out.best_cell = cell;
    }
  }
  auto policy = make_policy(out.best_cell);
  out.test_retained = replay(*policy, log, out.tune_events, total);
  return out;
}

}  // namespace cab
