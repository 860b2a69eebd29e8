// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "stitch/cli.hpp"
#include "stitch/cutout.hpp"
#include "stitch/error.hpp"
#include "stitch/geometry.hpp"
#include "stitch/layout.hpp"
#include "stitch/poseval.hpp"
#include "stitch/version.hpp"
#include "stitch/vocab.hpp"

namespace py = pybind11;

namespace {

stitch::Relation relation_arg(const std::string& text) {
  const auto r = stitch::parse_relation(text);
  if (!r) throw stitch::Error(stitch::ErrorCode::kInvalidArgument, "unknown relation \"" + text + "\"");
  return *r;
}

stitch::cutout::GridMask grid_mask(int height, int width, const std::vector<bool>& cells) {
  stitch::cutout::GridMask m(stitch::model::TokenGrid{height, width});
  if (cells.size() != m.selected.size()) {
    throw stitch::Error(stitch::ErrorCode::kShapeMismatch, "mask has " + std::to_string(cells.size()) +
                                                               " cells, grid needs " +
                                                               std::to_string(m.selected.size()));
  }
  m.selected = cells;
  return m;
}

}  // namespace

PYBIND11_MODULE(_stitch, m) {
  m.doc() = "Native core of the stitch package.";
  m.attr("__version__") = stitch::kVersion;

  static py::exception<stitch::Error> error_type(m, "StitchError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const stitch::Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("code") = std::string(stitch::error_code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("select_mask", [](const std::vector<double>& weights, double eta) {
    return stitch::cutout::select_mask(weights, eta);
  }, py::arg("weights"), py::arg("eta"));

  m.def("smooth_mask", [](int height, int width, const std::vector<bool>& cells, int kappa) {
    return stitch::cutout::smooth_mask(grid_mask(height, width, cells), kappa).selected;
  }, py::arg("height"), py::arg("width"), py::arg("cells"), py::arg("kappa"));

  m.def("iou_iot", [](int height, int width, const std::vector<bool>& pred, const std::vector<bool>& target) {
    const auto p = grid_mask(height, width, pred);
    const auto t = grid_mask(height, width, target);
    return std::make_tuple(stitch::cutout::iou(p, t), stitch::cutout::iot(p, t));
  }, py::arg("height"), py::arg("width"), py::arg("pred"), py::arg("target"));

  m.def("center_relation_holds", [](std::pair<double, double> a, const std::string& relation,
                                    std::pair<double, double> b) {
    return stitch::center_relation_holds({a.first, a.second}, relation_arg(relation), {b.first, b.second});
  }, py::arg("a"), py::arg("relation"), py::arg("b"));

  m.def("fallback_plan_json", [](const std::string& prompt, int canvas) {
    const auto plan = stitch::layout::fallback_plan(stitch::layout::parse_scene(prompt), canvas, prompt);
    return stitch::layout::layout_to_json(plan).dump();
  }, py::arg("prompt"), py::arg("canvas") = 32);

  m.def("gen_prompts_jsonl", [](const std::string& task, int n, std::uint64_t seed) {
    std::vector<std::string> lines;
    for (const auto& r : stitch::poseval::gen_prompts(stitch::poseval::parse_task(task), n, seed,
                                                      stitch::Vocabulary::builtin())) {
      lines.push_back(stitch::poseval::record_to_jsonl(r));
    }
    return lines;
  }, py::arg("task"), py::arg("n"), py::arg("seed"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = stitch::cli::run_cli(args, out, err);
    }
    return std::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
