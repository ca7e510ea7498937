// Python bindings for the core operations: data generation, PCA,
// PCA-replicating initializations, training and experiment grids.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pba/bench.hpp"
#include "pba/pca.hpp"
#include "pba/pcainit.hpp"

namespace py = pybind11;
using namespace pba;

PYBIND11_MODULE(_core, m) {
  m.doc() = "PCA-boosted autoencoder core";

  py::class_<Architecture>(m, "Architecture")
      .def(py::init([](const std::string& spec) { return Architecture::parse(spec); }),
           py::arg("spec"))
      .def_readonly("widths", &Architecture::widths)
      .def_readonly("bottleneck_index", &Architecture::bottleneck_index)
      .def_property_readonly("input_dim", &Architecture::input_dim)
      .def_property_readonly("bottleneck_dim", &Architecture::bottleneck_dim)
      .def("__repr__",
           [](const Architecture& a) { return "Architecture('" + a.to_string() + "')"; })
      .def("__str__", &Architecture::to_string);

  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("scale", &PcaModel::scale)
      .def_readonly("v", &PcaModel::v)
      .def_readonly("s", &PcaModel::s)
      .def_readonly("q", &PcaModel::q)
      .def_readonly("rank_warning", &PcaModel::rank_warning);

  py::class_<AeParams>(m, "AeParams")
      .def_readonly("arch", &AeParams::arch)
      .def_readonly("weights", &AeParams::weights)
      .def_readonly("biases", &AeParams::biases)
      .def_readonly("alphas", &AeParams::alphas)
      .def_readonly("rank_warning", &AeParams::rank_warning);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("best", &TrainResult::best)
      .def_readonly("train_history", &TrainResult::train_history)
      .def_readonly("val_history", &TrainResult::val_history)
      .def_readonly("best_epoch", &TrainResult::best_epoch)
      .def_readonly("epochs_trained", &TrainResult::epochs_trained)
      .def_readonly("diverged", &TrainResult::diverged);

  py::class_<InitReport>(m, "InitReport")
      .def_readonly("pca_equivalence_residual", &InitReport::pca_equivalence_residual)
      .def_readonly("prefix_condition_numbers", &InitReport::prefix_condition_numbers)
      .def_readonly("norm_preservation_residual", &InitReport::norm_preservation_residual)
      .def_readonly("passed", &InitReport::pass);

  m.def(
      "gen_power_surface",
      [](Index count, double exponent, std::uint64_t seed) {
        Rng rng(seed);
        return gen_power_surface(count, exponent, rng).x;
      },
      py::arg("count"), py::arg("exponent") = 4.0, py::arg("seed") = 0);

  m.def("pca_fit", &pca_fit, py::arg("x"), py::arg("q"), py::arg("scale") = false);
  m.def("pca_project", &pca_project, py::arg("model"), py::arg("x"));
  m.def("pca_reconstruct", &pca_reconstruct, py::arg("model"), py::arg("codes"));
  m.def("avg_projection_error", &avg_projection_error, py::arg("model"), py::arg("x"));

  m.def(
      "pca_robust_init",
      [](const Matrix& x, const Architecture& arch, std::uint64_t seed,
         bool independent_decoder) {
        Rng rng(seed);
        return pca_robust_init(x, arch, rng, independent_decoder);
      },
      py::arg("x_train"), py::arg("arch"), py::arg("seed") = 0,
      py::arg("independent_decoder") = false);
  m.def(
      "pca_naive_init",
      [](const Matrix& x, const Architecture& arch, std::uint64_t seed) {
        Rng rng(seed);
        return pca_naive_init(x, arch, rng);
      },
      py::arg("x_train"), py::arg("arch"), py::arg("seed") = 0);
  m.def(
      "random_init",
      [](const Architecture& arch, std::uint64_t seed) {
        Rng rng(seed);
        return random_init(arch, rng);
      },
      py::arg("arch"), py::arg("seed") = 0);

  m.def(
      "forward", [](const AeParams& p, const Matrix& x) { return forward(p, x); },
      py::arg("params"), py::arg("x"));
  m.def("encode", &encode, py::arg("params"), py::arg("x"));
  m.def("decode", &decode, py::arg("params"), py::arg("codes"));
  m.def("loss", &loss, py::arg("x"), py::arg("x_hat"));
  m.def("avg_l2", &avg_l2, py::arg("x"), py::arg("x_hat"));
  m.def("prefix_condition_numbers", &prefix_condition_numbers, py::arg("params"));
  m.def("verify_init", &verify_init, py::arg("params"), py::arg("x_probe"),
        py::arg("model"), py::arg("tol") = 1e-6);

  m.def(
      "train",
      [](const AeParams& init, const Matrix& train_x, const Matrix& val_x,
         double learning_rate, int max_epochs, int patience, bool freeze_alphas,
         std::uint64_t seed) {
        TrainConfig tc;
        tc.learning_rate = learning_rate;
        tc.max_epochs = max_epochs;
        tc.patience = patience;
        tc.freeze_alphas = freeze_alphas;
        tc.seed = seed;
        return train(init, train_x, val_x, tc);
      },
      py::arg("init"), py::arg("train_x"), py::arg("val_x"),
      py::arg("learning_rate") = 1e-3, py::arg("max_epochs") = 10000,
      py::arg("patience") = 100, py::arg("freeze_alphas") = false, py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        ExperimentConfig config =
            experiment_from_json(nlohmann::json::parse(config_json));
        ExperimentResult res = run_experiment(config);
        py::list trials;
        for (const auto& t : res.trials) {
          py::dict d;
          d["method"] = method_name(t.method);
          d["sample_size"] = t.sample_size;
          d["repetition"] = t.repetition;
          d["test_error"] = t.test_error;
          d["selected_restart"] = t.selected_restart;
          d["epochs"] = t.epochs;
          d["failed"] = t.failed;
          trials.append(d);
        }
        py::dict cells;
        for (const auto& [key, cell] : res.stats.cells) {
          py::dict c;
          c["mean"] = cell.mean;
          c["sem"] = cell.sem;
          c["n"] = cell.n;
          c["failures"] = cell.failures;
          cells[py::make_tuple(key.first, key.second)] = c;
        }
        py::dict out;
        out["trials"] = trials;
        out["aggregates"] = cells;
        return out;
      },
      py::arg("config_json"));

  m.def("default_experiment_config",
        []() { return default_experiment_json().dump(2); });
}
