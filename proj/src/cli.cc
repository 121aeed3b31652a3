#include "ftsdn/cli.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace ftsdn {

namespace {

Scenario load_with_seed(const std::string& path, const CliOptions& opts) {
  auto s = load_scenario(path);
  if (opts.seed) s.seed = *opts.seed;
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << content) || !f.flush()) {
    throw ScenarioError(0, "cannot write '" + path + "'");
  }
}

bool stalled(const Trace& trace) {
  return std::any_of(trace.begin(), trace.end(),
                     [](const TraceRecord& r) { return r.kind == RecordKind::kStall; });
}

std::string anomaly_list(const std::vector<Anomaly>& anomalies) {
  if (anomalies.empty()) return "-";
  std::string out;
  for (auto a : anomalies) {
    if (!out.empty()) out += ',';
    out += to_string(a);
  }
  return out;
}

void print_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << std::left << std::setw(28) << "crash_point" << std::setw(8) << "step" << std::setw(18)
      << "message" << std::setw(8) << "P1..P6" << "anomalies\n";
  for (const auto& row : rows) {
    std::ostringstream point;
    point << to_string(row.crash_point.point.direction) << '#' << row.crash_point.point.occurrence;
    out << std::setw(28) << point.str() << std::setw(8) << row.crash_point.step << std::setw(18)
        << row.crash_point.message_kind << std::setw(8)
        << (row.error.empty() ? verdict_signs(row.verdicts) : "error")
        << (row.error.empty() ? anomaly_list(row.anomalies) : row.error)
        << (row.stalled ? " (stalled)" : "") << '\n';
  }
  out << std::right;
}

struct VariantSummary {
  MetricsReport fault_free;
  std::string fault_free_signs;
  std::size_t sweep_points = 0;
  std::size_t sweep_failures = 0;
  std::string sweep_signs;
  std::set<Anomaly> anomalies;
  bool pass = true;
};

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace

ControllerId parse_crash_target(const std::string& text, std::uint32_t n_controllers) {
  if (text == "leader") return 0;
  const std::string prefix = "replica:";
  if (text.rfind(prefix, 0) == 0) {
    ControllerId id = 0;
    const char* first = text.data() + prefix.size();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, id);
    if (ec == std::errc{} && ptr == last && first != last && id < n_controllers) return id;
  }
  throw ScenarioError(0, "bad --crash value '" + text + "' (leader or replica:<id> below " +
                             std::to_string(n_controllers) + ")");
}

std::vector<SweepRow> sweep(const Scenario& scenario, ControllerId target, unsigned jobs) {
  const auto derived = enumerate_crash_points(scenario, target);
  std::vector<SweepRow> rows(derived.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < derived.size(); i = next++) {
      auto& row = rows[i];
      row.crash_point = derived[i].crash_point;
      row.name = derived[i].scenario.name;
      try {
        const auto result = run(derived[i].scenario);
        row.verdicts = check_all(result.trace);
        row.anomalies = classify_anomalies(row.verdicts);
        row.metrics = result.metrics;
        row.stalled = stalled(result.trace);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(derived.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string sweep_signs(const std::vector<SweepRow>& rows) {
  std::string signs(std::size(kAllProperties), '+');
  for (const auto& row : rows) {
    const auto s = row.error.empty() ? verdict_signs(row.verdicts) : std::string(signs.size(), '-');
    for (std::size_t i = 0; i < signs.size(); ++i) {
      if (s[i] == '-') signs[i] = '-';
    }
  }
  return signs;
}

int cmd_run(const std::string& scenario_path, const CliOptions& opts, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const auto scenario = load_with_seed(scenario_path, opts);
    const auto result = run(scenario);
    if (opts.trace_out) write_file(*opts.trace_out, serialize(result.trace));
    if (opts.metrics_out) write_file(*opts.metrics_out, to_json(result.metrics).dump(2) + "\n");
    const auto verdicts = check_all(result.trace);
    out << "scenario " << scenario.name << " (" << to_string(scenario.variant) << ", seed "
        << scenario.seed << "): " << result.trace.size() << " records, "
        << result.metrics.total_deliveries << " control-message deliveries"
        << (result.quiescent ? "" : ", NOT quiescent") << (stalled(result.trace) ? ", stalled" : "")
        << '\n';
    out << format_report(verdicts);
    return all_pass(verdicts) ? kExitPass : kExitViolation;
  });
}

int cmd_sweep(const std::string& scenario_path, const CliOptions& opts, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const auto scenario = load_with_seed(scenario_path, opts);
    const auto target = parse_crash_target(opts.crash, scenario.n_controllers);
    const auto rows = sweep(scenario, target, opts.jobs);
    const auto failures = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.pass(); });
    out << "sweep " << scenario.name << " (" << to_string(scenario.variant) << "), crash "
        << controller_name(target) << ": " << rows.size() << " crash points, " << failures
        << " failing\n";
    print_sweep_table(out, rows);
    const bool pass = failures == 0;
    out << "RESULT " << (pass ? "pass" : "fail") << " P1..P6=" << sweep_signs(rows) << '\n';
    return pass ? kExitPass : kExitViolation;
  });
}

int cmd_compare(const std::string& scenario_path, const CliOptions& opts, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const auto base = load_with_seed(scenario_path, opts);
    const auto target = parse_crash_target(opts.crash, base.n_controllers);
    constexpr Variant kVariants[] = {Variant::kNaive, Variant::kPaperA, Variant::kPaperB};
    std::vector<VariantSummary> summaries;
    for (auto v : kVariants) {
      Scenario s = base;
      s.variant = v;
      s.faults.clear();
      VariantSummary sum;
      const auto result = run(s);
      const auto verdicts = check_all(result.trace);
      sum.fault_free = result.metrics;
      sum.fault_free_signs = verdict_signs(verdicts);
      sum.pass = all_pass(verdicts);
      const auto rows = sweep(s, target, opts.jobs);
      sum.sweep_points = rows.size();
      for (const auto& row : rows) {
        if (!row.pass()) ++sum.sweep_failures;
        sum.anomalies.insert(row.anomalies.begin(), row.anomalies.end());
      }
      sum.sweep_signs = sweep_signs(rows);
      sum.pass = sum.pass && sum.sweep_failures == 0;
      summaries.push_back(std::move(sum));
    }

    std::set<std::string> kinds;
    for (const auto& s : summaries) {
      for (const auto& [k, n] : s.fault_free.deliveries_by_kind) kinds.insert(k);
    }
    out << "compare " << base.name << ": fault-free deliveries and crash sweep of "
        << controller_name(target) << "\n";
    out << std::left << std::setw(24) << "" << std::right;
    for (auto v : kVariants) out << std::setw(12) << to_string(v);
    out << '\n';
    auto row = [&](const std::string& label, auto&& cell) {
      out << std::left << std::setw(24) << label << std::right;
      for (const auto& s : summaries) out << std::setw(12) << cell(s);
      out << '\n';
    };
    for (const auto& k : kinds) {
      row("  " + k, [&](const VariantSummary& s) {
        auto it = s.fault_free.deliveries_by_kind.find(k);
        return it == s.fault_free.deliveries_by_kind.end() ? std::uint64_t{0} : it->second;
      });
    }
    row("total deliveries", [](const VariantSummary& s) { return s.fault_free.total_deliveries; });
    row("events", [](const VariantSummary& s) { return s.fault_free.events; });
    row("per-event overhead", [](const VariantSummary& s) {
      std::ostringstream o;
      o << std::fixed << std::setprecision(2) << s.fault_free.per_event_overhead();
      return o.str();
    });
    row("fault-free P1..P6", [](const VariantSummary& s) { return s.fault_free_signs; });
    row("sweep points", [](const VariantSummary& s) { return s.sweep_points; });
    row("sweep failures", [](const VariantSummary& s) { return s.sweep_failures; });
    row("sweep P1..P6", [](const VariantSummary& s) { return s.sweep_signs; });
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      const std::vector<Anomaly> found(summaries[i].anomalies.begin(), summaries[i].anomalies.end());
      out << to_string(kVariants[i]) << " anomalies: " << anomaly_list(found) << '\n';
    }
    // The replicated variants are the ones expected to hold; NAIVE is the baseline.
    const bool pass = summaries[1].pass && summaries[2].pass;
    std::string signs = summaries[1].sweep_signs;
    for (std::size_t i = 0; i < signs.size(); ++i) {
      if (summaries[2].sweep_signs[i] == '-') signs[i] = '-';
    }
    out << "RESULT " << (pass ? "pass" : "fail") << " P1..P6=" << signs << '\n';
    return pass ? kExitPass : kExitViolation;
  });
}

int cmd_check(const std::string& trace_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto trace = load_trace(trace_path);
    const auto verdicts = check_all(trace);
    out << format_report(verdicts);
    return all_pass(verdicts) ? kExitPass : kExitViolation;
  });
}

}  // namespace ftsdn
