// Copyright 2026 The PyroGrid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "pyrogrid/cli/commands.hpp"
#include "pyrogrid/error.hpp"
#include "pyrogrid/exchange/exchange.hpp"
#include "pyrogrid/metrics/metrics.hpp"
#include "pyrogrid/numerics/checkpoint.hpp"
#include "pyrogrid/trainer/trainer.hpp"

namespace py = pybind11;
using namespace pyrogrid;
using numerics::Tensor;

namespace {

Tensor to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  numerics::Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const Tensor& t) {
  py::array_t<double> out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

std::vector<double> flat(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

py::list table_rows(const metrics::MetricTable& t) {
  py::list rows;
  for (const auto& r : t.rows()) {
    rows.append(py::dict(py::arg("method") = r.method, py::arg("agent") = r.agent, py::arg("horizon") = r.horizon,
                         py::arg("bce") = r.bce, py::arg("auroc") = r.auroc, py::arg("iou") = r.iou));
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-agent wildfire prediction core";

  static py::exception<Error> base(m, "PyrogridError");
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<DataError> data_error(m, "DataError", base.ptr());
  static py::exception<NumericError> numeric_error(m, "NumericError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric_error, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("bce", [](py::array_t<double> target, py::array_t<double> pred) {
    return metrics::bce(to_tensor(target), to_tensor(pred));
  }, py::arg("target"), py::arg("pred"), "Pixel-mean binary cross-entropy.");
  m.def("auroc", [](py::array_t<double> labels, py::array_t<double> scores) {
    const std::vector<double> l = flat(labels), s = flat(scores);
    return metrics::auroc(l, s).value;
  }, py::arg("labels"), py::arg("scores"));
  m.def("iou", [](py::array_t<double> target, py::array_t<double> pred, double threshold) {
    return metrics::iou(to_tensor(target), to_tensor(pred), threshold);
  }, py::arg("target"), py::arg("pred"), py::arg("threshold") = 0.5);

  m.def("step_rates", [](std::uint64_t n, const std::string& config_json) {
    const trainer::TrainConfig cfg = trainer::train_config_from_json(config_json);
    const trainer::Rates r = cfg.schedule.at(n);
    return py::dict(py::arg("pred") = r.pred, py::arg("sys") = r.sys, py::arg("critic") = r.critic,
                    py::arg("actor") = r.actor);
  }, py::arg("n"), py::arg("config_json") = "{}", "Step sizes at tick n.");

  m.def("sample_sources", [](py::array_t<double> action, std::uint64_t seed) {
    numerics::Rng rng(seed);
    return exchange::sample_sources(to_tensor(action), rng);
  }, py::arg("action"), py::arg("seed") = 0);

  m.def("gen_data", [](const std::filesystem::path& out, std::optional<std::filesystem::path> config,
                       std::optional<std::size_t> agents, std::optional<std::size_t> grid,
                       std::optional<std::uint64_t> seed) {
    std::ostringstream log;
    cli::gen_data({config, out, agents, grid, seed}, log);
    return log.str();
  }, py::arg("out"), py::arg("config") = py::none(), py::arg("agents") = py::none(), py::arg("grid") = py::none(),
        py::arg("seed") = py::none(), "Generate a synthetic dataset into `out`; returns the log.");

  m.def("train", [](const std::filesystem::path& data, const std::filesystem::path& out,
                    std::optional<std::filesystem::path> config, std::optional<std::size_t> episodes,
                    std::optional<std::uint64_t> seed, std::optional<std::string> reward, bool no_exchange,
                    bool no_sysid, bool static_model, bool logistic) {
    cli::TrainOptions o;
    o.config = config;
    o.data = data;
    o.out = out;
    o.episodes = episodes;
    o.seed = seed;
    o.reward = reward;
    o.no_exchange = no_exchange;
    o.no_sysid = no_sysid;
    o.static_model = static_model;
    o.logistic = logistic;
    std::ostringstream log;
    {
      py::gil_scoped_release release;
      cli::train(o, log);
    }
    return log.str();
  }, py::arg("data"), py::arg("out"), py::arg("config") = py::none(), py::arg("episodes") = py::none(),
        py::arg("seed") = py::none(), py::arg("reward") = py::none(), py::arg("no_exchange") = false,
        py::arg("no_sysid") = false, py::arg("static") = false, py::arg("logistic") = false);

  m.def("evaluate", [](const std::filesystem::path& checkpoint, const std::filesystem::path& data,
                       const std::filesystem::path& out, const std::string& split) {
    std::ostringstream log;
    return table_rows(cli::evaluate({checkpoint, data, split, out}, log));
  }, py::arg("checkpoint"), py::arg("data"), py::arg("out"), py::arg("split") = "val");

  m.def("predict", [](const std::filesystem::path& checkpoint, const std::filesystem::path& data, std::size_t week,
                      const std::filesystem::path& out) {
    std::ostringstream log;
    return cli::predict({checkpoint, data, week, out}, log);
  }, py::arg("checkpoint"), py::arg("data"), py::arg("week"), py::arg("out"));

  m.def("report", [](const std::filesystem::path& run) {
    py::list rows;
    for (const auto& r : cli::collect_report(run))
      rows.append(py::dict(py::arg("method") = r.method, py::arg("runs") = r.runs, py::arg("bce") = r.bce,
                           py::arg("auroc") = r.auroc, py::arg("iou") = r.iou));
    return rows;
  }, py::arg("run"));

  m.def("load_checkpoint", [](const std::filesystem::path& path) {
    py::dict out;
    for (const auto& r : numerics::load_checkpoint(path)) out[py::str(r.name)] = to_array(r.value);
    return out;
  }, py::arg("path"), "Parameter arrays by name.");

  m.def("read_pgm", [](const std::filesystem::path& path) { return to_array(cli::read_pgm(path)); }, py::arg("path"));
}
