#pragma once

// 2d-Euclidean election sampling and the free-riding risk experiment:
// Q1 (share of voters who can free-ride successfully), Q2 (share who would
// be harmed), Q3 (risk: harmful / (harmful + successful) among voters who
// can do either), swept over the power-decay Thiele and hybrid OWA rule
// families, with CSV/SVG emission and JSON-lines raw records.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "core.hpp"
#include "freeride.hpp"
#include "scoring.hpp"

namespace multivote {

namespace detail {

// SplitMix64, used only to expand (seed, stream) keys into generator state.
struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// xoshiro256++ with one independent stream per (seed, electionIndex) pair,
// so sampled elections never depend on worker scheduling.
class Xoshiro256pp {
 public:
  Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 sm{seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))};
    for (auto& word : s_) word = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace detail

struct GeometryConfig {
  int voters = 20;
  int issues = 20;
  int candidates = 4;  // per issue
  double slack = 1.2;  // approval radius multiplier over the closest candidate
  std::uint64_t seed = 1;
};

inline void require_valid(const GeometryConfig& g) {
  if (g.voters < 1 || g.issues < 1 || g.candidates < 1) {
    throw ValidationError("geometry needs voters, issues and candidates >= 1");
  }
  if (!(g.slack >= 1.0)) throw ValidationError("geometry slack must be >= 1");
}

// Samples voters and per-issue candidates uniformly from the unit square;
// voter points are shared across issues. A voter approves the closest
// candidate plus every candidate within slack times that distance
// (inclusive; compared with squared distances).
inline Election sample_election(const GeometryConfig& g, std::uint64_t election_index) {
  require_valid(g);
  detail::Xoshiro256pp rng(g.seed, election_index);
  std::vector<std::pair<double, double>> voters(static_cast<std::size_t>(g.voters));
  for (auto& p : voters) {
    p.first = rng.uniform01();
    p.second = rng.uniform01();
  }
  std::vector<std::string> labels;
  for (int c = 0; c < g.candidates; ++c) labels.push_back("c" + std::to_string(c));

  const double slack_sq = g.slack * g.slack;
  std::vector<IssueSpec> issues;
  std::vector<std::vector<std::vector<int>>> approvals(
      static_cast<std::size_t>(g.voters));
  std::vector<double> dist_sq(static_cast<std::size_t>(g.candidates));
  for (int i = 0; i < g.issues; ++i) {
    std::vector<std::pair<double, double>> cands(static_cast<std::size_t>(g.candidates));
    for (auto& p : cands) {
      p.first = rng.uniform01();
      p.second = rng.uniform01();
    }
    issues.push_back(IssueSpec{labels, {}});
    for (int v = 0; v < g.voters; ++v) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < g.candidates; ++c) {
        const double dx = voters[static_cast<std::size_t>(v)].first - cands[static_cast<std::size_t>(c)].first;
        const double dy = voters[static_cast<std::size_t>(v)].second - cands[static_cast<std::size_t>(c)].second;
        dist_sq[static_cast<std::size_t>(c)] = dx * dx + dy * dy;
        best = std::min(best, dist_sq[static_cast<std::size_t>(c)]);
      }
      std::vector<int> ballot;
      for (int c = 0; c < g.candidates; ++c) {
        if (dist_sq[static_cast<std::size_t>(c)] <= slack_sq * best) ballot.push_back(c);
      }
      approvals[static_cast<std::size_t>(v)].push_back(std::move(ballot));
    }
  }
  return make_election(std::move(issues), std::move(approvals));
}

// A rule in the experiment sweep, tagged with the (family, x) pair used by
// the metric rows and the plots.
struct SimRule {
  std::string family;
  double x = 0;
  RuleSpec rule = RuleSpec::thiele_rule(ThieleFunction::utilitarian(), RuleMode::sequential);
};

inline SimRule make_sim_rule(RuleSpec rule, int voters) {
  if (rule.mode != RuleMode::sequential) {
    throw ValidationError("simulation rules must be sequential (use @seq)");
  }
  SimRule r;
  if (rule.is_thiele()) {
    switch (rule.thiele().family()) {
      case ThieleFunction::Family::utilitarian:
        r.family = "thiele:util";
        break;
      case ThieleFunction::Family::pav:
        r.family = "thiele:pav";
        r.x = 1;
        break;
      case ThieleFunction::Family::power_decay:
        r.family = "thiele:pow";
        r.x = rule.thiele().exponent();
        break;
      case ThieleFunction::Family::lex_simulated:
        r.family = "thiele:lexsim";
        break;
    }
  } else if (rule.is_comparator()) {
    switch (rule.comparator().kind) {
      case ComparatorKind::egalitarian:
        r.family = "owa:egal";
        break;
      case ComparatorKind::leximin:
        r.family = "owa:leximin";
        r.x = voters - 1;
        break;
      case ComparatorKind::hybrid:
        r.family = "owa:hybrid";
        r.x = rule.comparator().x;
        break;
    }
  } else {
    r.family = "owa:vector";
  }
  r.rule = std::move(rule);
  return r;
}

inline SimRule make_sim_rule(const std::string& text, int voters) {
  return make_sim_rule(parse_rule(text, RuleMode::sequential), voters);
}

// Comma-separated rule strings, e.g. "thiele:pow:1,owa:hybrid:19".
inline std::vector<SimRule> parse_sim_rules(const std::string& text, int voters) {
  std::vector<SimRule> rules;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string piece = text.substr(start, comma - start);
    const auto first = piece.find_first_not_of(" \t");
    if (first != std::string::npos) {
      const auto last = piece.find_last_not_of(" \t");
      rules.push_back(make_sim_rule(piece.substr(first, last - first + 1), voters));
    }
    start = comma + 1;
  }
  if (rules.empty()) throw ParseError("no rules in '" + text + "'");
  return rules;
}

// Default sweep: Thiele f_x for x in {0, 0.25, ..., 3} and hybrid OWA
// alpha_x for x in {0, ..., n-1}.
inline std::vector<SimRule> default_sim_rules(int voters) {
  std::vector<SimRule> rules;
  for (int step = 0; step <= 12; ++step) {
    rules.push_back(make_sim_rule(
        RuleSpec::thiele_rule(ThieleFunction::power_decay(step * 0.25), RuleMode::sequential),
        voters));
  }
  for (int x = 0; x < voters; ++x) {
    rules.push_back(make_sim_rule(
        RuleSpec::comparator_rule(ComparatorKind::hybrid, x, RuleMode::sequential), voters));
  }
  return rules;
}

struct ExperimentConfig {
  GeometryConfig geometry;
  long long elections = 1000;
  std::vector<SimRule> rules;
  int jobs = 1;
  bool pooled_q3 = false;     // pool voters across elections instead of per-election means
  bool collect_records = false;
};

struct MetricsRow {
  std::string family;
  double x = 0;
  double q1 = 0;
  double q2 = 0;
  double q3 = 0;
  long long elections = 0;
  long long eligible_voters = 0;
};

struct SimRecord {
  long long election = 0;
  std::string rule;
  int voter = 0;
  int successful = 0;
  int harmful = 0;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<SimRecord> records;  // eligible voters only, (election, rule, voter) order
};

// Per-voter counts of issues admitting a successful / harmful single-issue
// free-ride under a sequential rule.
inline std::vector<VoterAudit> audit_for_metrics(const Election& e, const RuleSpec& rule) {
  if (rule.mode != RuleMode::sequential) {
    throw ValidationError("metrics audit requires a sequential rule");
  }
  require_valid(e);
  std::vector<VoterAudit> counts(static_cast<std::size_t>(e.voter_count));
  detail::audit_pairs(e, rule, FindOptions{},
                      [&](int v, int /*i*/, std::vector<FreeRideFinding> findings) {
                        bool successful = false;
                        bool harmful = false;
                        for (const FreeRideFinding& f : findings) {
                          successful = successful || f.cls == FreeRideClass::successful;
                          harmful = harmful || f.cls == FreeRideClass::harmful;
                        }
                        if (successful) ++counts[static_cast<std::size_t>(v)].successful_issues;
                        if (harmful) ++counts[static_cast<std::size_t>(v)].harmful_issues;
                      });
  return counts;
}

namespace detail {

struct RuleElectionStats {
  int successful_voters = 0;
  int harmful_voters = 0;
  int eligible_voters = 0;
  double risk_sum = 0;  // sum over eligible voters of harmful / (harmful + successful)
  std::vector<SimRecord> records;
};

}  // namespace detail

// Runs the sweep. Elections are processed by a pool of workers, each owning
// the RNG stream of its election index; per-election statistics are stored
// by index and reduced sequentially, so results do not depend on `jobs`.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  require_valid(cfg.geometry);
  if (cfg.elections < 1) throw ValidationError("experiment needs at least one election");
  if (cfg.jobs < 1) throw ValidationError("experiment needs jobs >= 1");
  if (cfg.rules.empty()) throw ValidationError("experiment needs at least one rule");
  for (const SimRule& r : cfg.rules) {
    if (r.rule.mode != RuleMode::sequential) {
      throw ValidationError("simulation rules must be sequential (use @seq)");
    }
  }

  const std::size_t rule_count = cfg.rules.size();
  const auto election_count = static_cast<std::size_t>(cfg.elections);
  std::vector<std::vector<detail::RuleElectionStats>> stats(
      election_count, std::vector<detail::RuleElectionStats>(rule_count));

  std::atomic<std::uint64_t> next_index{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::uint64_t idx = next_index.fetch_add(1, std::memory_order_relaxed);
      if (idx >= election_count) return;
      try {
        const Election e = sample_election(cfg.geometry, idx);
        for (std::size_t r = 0; r < rule_count; ++r) {
          detail::RuleElectionStats& s = stats[idx][r];
          const std::vector<VoterAudit> counts = audit_for_metrics(e, cfg.rules[r].rule);
          for (int v = 0; v < cfg.geometry.voters; ++v) {
            const VoterAudit& c = counts[static_cast<std::size_t>(v)];
            if (c.successful_issues > 0) ++s.successful_voters;
            if (c.harmful_issues > 0) ++s.harmful_voters;
            const int total = c.successful_issues + c.harmful_issues;
            if (total == 0) continue;
            ++s.eligible_voters;
            s.risk_sum += static_cast<double>(c.harmful_issues) / total;
            if (cfg.collect_records) {
              s.records.push_back(SimRecord{static_cast<long long>(idx),
                                            format_rule(cfg.rules[r].rule), v,
                                            c.successful_issues, c.harmful_issues});
            }
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  const int thread_count = static_cast<int>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg.jobs), election_count));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ExperimentResult result;
  const double n = cfg.geometry.voters;
  for (std::size_t r = 0; r < rule_count; ++r) {
    double q1_sum = 0;
    double q2_sum = 0;
    double q3_sum = 0;
    long long q3_elections = 0;
    long long eligible_total = 0;
    double risk_total = 0;
    for (std::size_t idx = 0; idx < election_count; ++idx) {
      const detail::RuleElectionStats& s = stats[idx][r];
      q1_sum += s.successful_voters / n;
      q2_sum += s.harmful_voters / n;
      eligible_total += s.eligible_voters;
      risk_total += s.risk_sum;
      if (s.eligible_voters > 0) {
        q3_sum += s.risk_sum / s.eligible_voters;
        ++q3_elections;
      }
    }
    MetricsRow row;
    row.family = cfg.rules[r].family;
    row.x = cfg.rules[r].x;
    row.q1 = q1_sum / static_cast<double>(cfg.elections);
    row.q2 = q2_sum / static_cast<double>(cfg.elections);
    row.q3 = cfg.pooled_q3 ? (eligible_total > 0 ? risk_total / static_cast<double>(eligible_total) : 0)
                           : (q3_elections > 0 ? q3_sum / static_cast<double>(q3_elections) : 0);
    row.elections = cfg.elections;
    row.eligible_voters = eligible_total;
    result.rows.push_back(std::move(row));
  }
  if (cfg.collect_records) {
    for (std::size_t idx = 0; idx < election_count; ++idx) {
      for (std::size_t r = 0; r < rule_count; ++r) {
        for (SimRecord& rec : stats[idx][r].records) result.records.push_back(std::move(rec));
      }
    }
  }
  return result;
}

namespace detail {

inline std::string format_g12(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

}  // namespace detail

inline std::string emit_csv(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) throw ValidationError("no metric rows to emit");
  std::string out = "family,x,q1,q2,q3,elections,eligible_voters\n";
  for (const MetricsRow& row : rows) {
    out += row.family;
    out += ',';
    out += detail::format_g12(row.x);
    out += ',';
    out += detail::format_g12(row.q1);
    out += ',';
    out += detail::format_g12(row.q2);
    out += ',';
    out += detail::format_g12(row.q3);
    out += ',';
    out += std::to_string(row.elections);
    out += ',';
    out += std::to_string(row.eligible_voters);
    out += '\n';
  }
  return out;
}

inline std::vector<MetricsRow> parse_csv(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    if (nl > start) lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty() || lines.front() != "family,x,q1,q2,q3,elections,eligible_voters") {
    throw ParseError("missing metrics CSV header");
  }
  std::vector<MetricsRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    const std::string& line = lines[li];
    while (true) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (fields.size() != 7) throw ParseError("bad metrics CSV line: " + line);
    MetricsRow row;
    row.family = fields[0];
    try {
      row.x = std::stod(fields[1]);
      row.q1 = std::stod(fields[2]);
      row.q2 = std::stod(fields[3]);
      row.q3 = std::stod(fields[4]);
      row.elections = std::stoll(fields[5]);
      row.eligible_voters = std::stoll(fields[6]);
    } catch (const std::exception&) {
      throw ParseError("bad metrics CSV line: " + line);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string emit_records_jsonl(const std::vector<SimRecord>& records) {
  std::string out;
  for (const SimRecord& rec : records) {
    out += "{\"election\":" + std::to_string(rec.election) + ",\"rule\":\"" + rec.rule +
           "\",\"voter\":" + std::to_string(rec.voter) +
           ",\"successful\":" + std::to_string(rec.successful) +
           ",\"harmful\":" + std::to_string(rec.harmful) + "}\n";
  }
  return out;
}

// Self-contained SVG: one chart, x on the abscissa, three labeled polylines
// (q1, q2, q3) per rule family.
inline std::string emit_svg_plot(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) throw ValidationError("no metric rows to plot");
  std::vector<std::string> families;
  for (const MetricsRow& row : rows) {
    if (std::find(families.begin(), families.end(), row.family) == families.end()) {
      families.push_back(row.family);
    }
  }
  double x_min = rows.front().x;
  double x_max = rows.front().x;
  double y_max = 0;
  for (const MetricsRow& row : rows) {
    x_min = std::min(x_min, row.x);
    x_max = std::max(x_max, row.x);
    y_max = std::max({y_max, row.q1, row.q2, row.q3});
  }
  if (x_max <= x_min) x_max = x_min + 1;
  if (y_max <= 0) y_max = 1;

  const double width = 800;
  const double height = 460;
  const double left = 60;
  const double right = width - 20;
  const double top = 20;
  const double bottom = height - 50;
  const auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
  const auto sy = [&](double y) { return bottom - y / y_max * (bottom - top); };
  const auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                   "#bcbd22", "#17becf", "#393b79", "#ad494a"};
  const int palette_size = static_cast<int>(sizeof kPalette / sizeof kPalette[0]);

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
         fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(bottom) + "\" x2=\"" + fmt(right) +
         "\" y2=\"" + fmt(bottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) +
         "\" y2=\"" + fmt(bottom) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt(left) + "\" y=\"" + fmt(bottom + 18) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::format_g12(x_min) +
         "</text>\n";
  svg += "<text x=\"" + fmt(right - 30) + "\" y=\"" + fmt(bottom + 18) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::format_g12(x_max) +
         "</text>\n";
  svg += "<text x=\"" + fmt(left - 50) + "\" y=\"" + fmt(top + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::format_g12(y_max) +
         "</text>\n";
  svg += "<text x=\"" + fmt(left - 50) + "\" y=\"" + fmt(bottom) +
         "\" font-family=\"sans-serif\" font-size=\"12\">0</text>\n";
  svg += "<text x=\"" + fmt((left + right) / 2 - 4) + "\" y=\"" + fmt(bottom + 34) +
         "\" font-family=\"sans-serif\" font-size=\"12\">x</text>\n";

  static const char* kMetricNames[] = {"q1", "q2", "q3"};
  int series_index = 0;
  double legend_y = top + 14;
  for (const std::string& family : families) {
    std::vector<const MetricsRow*> family_rows;
    for (const MetricsRow& row : rows) {
      if (row.family == family) family_rows.push_back(&row);
    }
    std::stable_sort(family_rows.begin(), family_rows.end(),
                     [](const MetricsRow* a, const MetricsRow* b) { return a->x < b->x; });
    for (int metric = 0; metric < 3; ++metric) {
      const char* color = kPalette[series_index % palette_size];
      ++series_index;
      std::string points;
      for (const MetricsRow* row : family_rows) {
        const double y = metric == 0 ? row->q1 : metric == 1 ? row->q2 : row->q3;
        points += fmt(sx(row->x)) + "," + fmt(sy(y)) + " ";
      }
      if (!points.empty()) points.pop_back();
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
      svg += "<text x=\"" + fmt(right - 150) + "\" y=\"" + fmt(legend_y) +
             "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color + "\">" +
             family + " " + kMetricNames[metric] + "</text>\n";
      legend_y += 14;
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace multivote
