#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "linkemu/cli.hpp"
#include "linkemu/dama.hpp"
#include "linkemu/emulator.hpp"
#include "linkemu/error.hpp"
#include "linkemu/netdesc.hpp"
#include "linkemu/telemetry.hpp"
#include "linkemu/verify.hpp"

namespace py = pybind11;
using namespace linkemu;

namespace {

Direction direction_arg(const std::string& dir) {
  const auto d = parse_direction(dir);
  if (!d) throw std::invalid_argument("direction must be 'forward' or 'reverse'");
  return *d;
}

py::list report_rows(const VerificationReport& r) {
  py::list out;
  for (const auto& c : r.results) {
    out.append(py::dict(py::arg("time_s") = r.timestamp.seconds(), py::arg("constraint") = c.constraint,
                        py::arg("passed") = c.passed, py::arg("witness") = c.witness));
  }
  return out;
}

struct PyEmulator {
  std::unique_ptr<Emulator> emu;
  std::ostringstream trace;
  py::dict summary;

  PyEmulator(const std::string& text, std::uint64_t seed, std::optional<double> until_s, bool keep_trace) {
    EmulatorOptions o;
    o.seed = seed;
    if (until_s) o.horizon = SimTime::from_seconds(*until_s);
    if (keep_trace) o.trace = &trace;
    emu = std::make_unique<Emulator>(parse_description(text), o);
  }

  py::dict run(std::optional<double> realtime_speed) {
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = realtime_speed ? emu->realtime_drive(*realtime_speed) : emu->run();
    }
    py::dict kinds;
    for (std::size_t k = 0; k < kEventKindCount; ++k) kinds[to_string(static_cast<EventKind>(k))] = s.per_kind[k];
    summary = py::dict(py::arg("events") = s.events, py::arg("final_time_s") = s.final_time.seconds(),
                       py::arg("per_kind") = kinds, py::arg("trace_hash") = s.trace_hash,
                       py::arg("runtime_failures") = s.runtime_failures, py::arg("wall_seconds") = s.wall_seconds);
    return summary;
  }

  py::list deliveries() const {
    py::list out;
    for (const auto& d : emu->metrics().deliveries()) {
      out.append(py::make_tuple(d.time.seconds(), d.link, to_string(d.dir), d.echo ? d.flow + ".echo" : d.flow, d.seq,
                                d.frame_bytes, d.payload_bytes, d.one_way_delay.millis()));
    }
    return out;
  }

  py::list throughput(const std::string& link, const std::string& dir, double window_s) const {
    py::list out;
    for (const auto& p : throughput_series(emu->metrics(), link, direction_arg(dir), window_s).points) {
      out.append(py::make_tuple(p.window_start.seconds(), p.wire_mbps, p.payload_mbps));
    }
    return out;
  }

  std::vector<double> delays(const std::string& link, const std::string& dir, std::optional<std::string> flow) const {
    std::optional<std::string_view> f;
    if (flow) f = *flow;
    return delay_samples_ms(emu->metrics(), link, direction_arg(dir), f);
  }

  py::dict counters(const std::string& link, const std::string& dir) const {
    const auto& s = emu->state(link, direction_arg(dir));
    return py::dict(py::arg("bandwidth_bps") = s.params().bandwidth_bps, py::arg("offered") = s.offered(),
                    py::arg("admitted") = s.admitted(), py::arg("dropped") = s.drops(),
                    py::arg("delivered") = s.delivered(), py::arg("in_flight") = s.in_flight());
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "linkemu native core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RunError>(m, "RunError", PyExc_RuntimeError);

  m.def("normalize", [](const std::string& text) { return serialize_description(parse_description(text)); },
        py::arg("text"), "Parse a scenario and return its canonical JSON form.");
  m.def(
      "verify",
      [](const std::string& text) {
        return report_rows(verify_static(parse_description(text, ParseOptions{.resolve_references = false})));
      },
      py::arg("text"), "Static verification rows for a scenario document.");

  m.def("allocate_cap_clip", &allocate_cap_clip, py::arg("demand_bps"), py::arg("cap_bps"));
  m.def(
      "allocate_maxmin", [](const std::vector<double>& d, double pool) { return allocate_maxmin(d, pool); },
      py::arg("demands_bps"), py::arg("pool_bps"));
  m.def(
      "delay_histogram",
      [](const std::vector<double>& samples, double bin_ms) {
        const auto h = delay_histogram(samples, bin_ms);
        py::list bins;
        for (const auto& b : h.bins) bins.append(py::make_tuple(b.center_ms, b.count));
        return py::dict(py::arg("bins") = bins, py::arg("mean_ms") = h.mean_ms, py::arg("std_ms") = h.std_ms,
                        py::arg("samples") = h.samples);
      },
      py::arg("samples_ms"), py::arg("bin_ms") = 10.0);

  m.def(
      "main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "linkemu");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream out;
        std::ostringstream err;
        int rc = 0;
        {
          py::gil_scoped_release release;
          rc = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line interface; returns (exit_code, stdout, stderr).");

  py::class_<PyEmulator>(m, "Emulator")
      .def(py::init<const std::string&, std::uint64_t, std::optional<double>, bool>(), py::arg("text"),
           py::arg("seed") = 0, py::arg("until_s") = py::none(), py::arg("trace") = false)
      .def("run", &PyEmulator::run, py::arg("realtime_speed") = py::none())
      .def("deliveries", &PyEmulator::deliveries)
      .def("throughput", &PyEmulator::throughput, py::arg("link"), py::arg("dir"), py::arg("window_s") = 1.0)
      .def("delays", &PyEmulator::delays, py::arg("link"), py::arg("dir"), py::arg("flow") = py::none())
      .def("counters", &PyEmulator::counters, py::arg("link"), py::arg("dir"))
      .def_property_readonly("trace", [](const PyEmulator& e) { return e.trace.str(); })
      .def_property_readonly("horizon_s", [](const PyEmulator& e) { return e.emu->horizon().seconds(); });
}
