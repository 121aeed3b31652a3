#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ftsdn/checker.h"
#include "ftsdn/cli.h"
#include "ftsdn/netsim.h"
#include "ftsdn/scenario.h"
#include "ftsdn/trace.h"

namespace py = pybind11;

namespace {

ftsdn::Bytes to_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::dict verdict_dict(const ftsdn::Verdict& v) {
  py::list witnesses;
  for (const auto& w : v.witnesses) {
    py::dict d;
    d["steps"] = w.steps;
    d["description"] = w.description;
    if (w.observed) d["observed"] = *w.observed;
    if (w.expected) d["expected"] = *w.expected;
    witnesses.append(d);
  }
  py::dict d;
  d["property"] = std::string(ftsdn::to_string(v.property));
  d["pass"] = v.pass;
  d["witnesses"] = witnesses;
  d["note"] = v.note;
  return d;
}

py::dict check_dict(const ftsdn::Trace& trace) {
  const auto verdicts = ftsdn::check_all(trace);
  py::list vs;
  for (const auto& v : verdicts) vs.append(verdict_dict(v));
  py::list anomalies;
  for (auto a : ftsdn::classify_anomalies(verdicts)) anomalies.append(std::string(ftsdn::to_string(a)));
  py::dict d;
  d["verdicts"] = vs;
  d["anomalies"] = anomalies;
  d["summary"] = ftsdn::summary_line(verdicts);
  d["pass"] = ftsdn::all_pass(verdicts);
  return d;
}

py::object metrics_obj(const ftsdn::MetricsReport& m) {
  return py::module_::import("json").attr("loads")(ftsdn::to_json(m).dump());
}

}  // namespace

PYBIND11_MODULE(_ftsdn, m) {
  m.doc() = "Replicated SDN controller simulator and trace checker";

  py::register_exception<ftsdn::ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<ftsdn::TraceError>(m, "TraceError", PyExc_ValueError);

  m.def(
      "encode_ack",
      [](std::uint64_t view, std::uint64_t index, std::uint32_t sw) {
        const auto b = ftsdn::encode_ack(view, index, sw);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      },
      py::arg("view"), py::arg("index"), py::arg("switch"));
  m.def(
      "decode_ack",
      [](const py::bytes& payload) -> py::object {
        const auto ack = ftsdn::decode_ack(to_bytes(payload));
        if (!ack) return py::none();
        return py::make_tuple(ack->view, ack->log_index, ack->target_switch);
      },
      py::arg("payload"), "Returns (view, index, switch), or None when the payload is not an ack.");

  m.def(
      "run",
      [](const std::string& scenario_yaml, std::optional<std::uint64_t> seed) {
        auto s = ftsdn::parse_scenario(scenario_yaml);
        if (seed) s.seed = *seed;
        ftsdn::RunResult result;
        {
          py::gil_scoped_release release;
          result = ftsdn::run(s);
        }
        py::dict d;
        d["trace"] = ftsdn::serialize(result.trace);
        d["metrics"] = metrics_obj(result.metrics);
        d["quiescent"] = result.quiescent;
        return d;
      },
      py::arg("scenario_yaml"), py::arg("seed") = py::none(),
      "Runs a scenario given as YAML text; returns the JSON-lines trace, metrics and quiescence.");

  m.def(
      "check", [](const std::string& trace_text) { return check_dict(ftsdn::parse_trace(trace_text)); },
      py::arg("trace_text"));

  m.def(
      "metrics",
      [](const std::string& trace_text) {
        return metrics_obj(ftsdn::metrics_from_trace(ftsdn::parse_trace(trace_text)));
      },
      py::arg("trace_text"));

  m.def(
      "sweep",
      [](const std::string& scenario_yaml, const std::string& crash, unsigned jobs) {
        const auto s = ftsdn::parse_scenario(scenario_yaml);
        const auto target = ftsdn::parse_crash_target(crash, s.n_controllers);
        std::vector<ftsdn::SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = ftsdn::sweep(s, target, jobs);
        }
        py::list out;
        for (const auto& r : rows) {
          py::list anomalies;
          for (auto a : r.anomalies) anomalies.append(std::string(ftsdn::to_string(a)));
          py::dict d;
          d["name"] = r.name;
          d["step"] = r.crash_point.step;
          d["message"] = r.crash_point.message_kind;
          d["signs"] = r.error.empty() ? ftsdn::verdict_signs(r.verdicts) : std::string("error");
          d["anomalies"] = anomalies;
          d["pass"] = r.pass();
          d["error"] = r.error;
          out.append(d);
        }
        return out;
      },
      py::arg("scenario_yaml"), py::arg("crash") = "leader", py::arg("jobs") = 1);
}
