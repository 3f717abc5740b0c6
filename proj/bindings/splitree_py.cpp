#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "splitree/constants.hpp"
#include "splitree/experiments.hpp"
#include "splitree/fixpoint.hpp"
#include "splitree/parallel.hpp"
#include "splitree/renewal.hpp"
#include "splitree/tree.hpp"
#include "splitree/version.hpp"

namespace py = pybind11;
using namespace splitree;

namespace {

ModelSpec model_from(const std::string& text) { return parse_model(text); }

}  // namespace

PYBIND11_MODULE(_splitree, m) {
    m.doc() = "split-tree path length laboratory (C++ core)";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<BudgetError>(m, "BudgetError");

    py::class_<SplitParams>(m, "SplitParams")
        .def_readonly("b", &SplitParams::b)
        .def_readonly("s0", &SplitParams::s0)
        .def_readonly("s1", &SplitParams::s1)
        .def_readonly("s", &SplitParams::s);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_readonly("name", &ModelSpec::name)
        .def_readonly("params", &ModelSpec::params)
        .def_readonly("lattice_span", &ModelSpec::lattice_span)
        .def("draw",
             [](const ModelSpec& self, std::uint64_t seed) {
                 RngStream rng(seed);
                 std::vector<double> v;
                 self.draw(rng, v);
                 return v;
             },
             py::arg("seed"))
        .def("__repr__", [](const ModelSpec& self) { return "<ModelSpec " + self.name + ">"; });

    m.def("model", &model_from, py::arg("text"),
          "Build a model preset from its text form, e.g. 'bst' or 'trie:0.5,0.5'.");

    py::class_<ConstantsReport>(m, "ConstantsReport")
        .def_readonly("mu", &ConstantsReport::mu)
        .def_readonly("sigma2", &ConstantsReport::sigma2)
        .def_readonly("contraction_factor", &ConstantsReport::contraction_factor)
        .def_readonly("mean_C", &ConstantsReport::mean_C)
        .def_readonly("second_moment_C", &ConstantsReport::second_moment_C)
        .def_readonly("zeta", &ConstantsReport::zeta)
        .def_property_readonly("method",
                               [](const ConstantsReport& r) { return to_string(r.method); })
        .def_readonly("error_bound", &ConstantsReport::error_bound);

    m.def("constants", [](const std::string& text) { return constants_report(model_from(text)); },
          py::arg("model"));
    m.def("compute_zeta", [](const std::string& text) { return compute_zeta(model_from(text)); },
          py::arg("model"));
    m.def("cost_C", &cost_C, py::arg("draw"), py::arg("mu"));

    m.def(
        "grow_psi",
        [](const std::string& text, std::int64_t n, std::uint64_t seed) {
            const auto model = model_from(text);
            const auto tree = grow_size_tree(n, model, seed);
            return py::make_tuple(path_length_items(tree), path_length_nodes(tree),
                                  static_cast<std::int64_t>(tree.nodes.size()));
        },
        py::arg("model"), py::arg("n"), py::arg("seed"),
        "Grow one tree; returns (psi, upsilon, node_count).");

    m.def(
        "incremental_psi",
        [](const std::string& text, std::int64_t n, std::uint64_t seed) {
            const auto it = build_incremental(n, model_from(text), seed);
            return it.sum_item_depths();
        },
        py::arg("model"), py::arg("n"), py::arg("seed"));

    m.def("last_depth",
          [](const std::string& text, std::int64_t n, std::uint64_t seed) {
              return sample_last_depth(n, model_from(text), seed);
          },
          py::arg("model"), py::arg("n"), py::arg("seed"));

    py::class_<FixpointRun>(m, "FixpointRun")
        .def_readonly("iterations", &FixpointRun::iterations)
        .def_readonly("converged", &FixpointRun::converged)
        .def_readonly("step_sizes", &FixpointRun::step_sizes)
        .def_readonly("mean", &FixpointRun::final_mean)
        .def_readonly("variance", &FixpointRun::final_variance)
        .def_property_readonly("samples", [](const FixpointRun& r) {
            return r.final_distribution.samples();
        });

    m.def(
        "fixpoint",
        [](const std::string& text, std::size_t samples, double tol, int max_iter,
           std::uint64_t seed) {
            return iterate_to_fixpoint(model_from(text), samples, tol, max_iter, seed);
        },
        py::arg("model"), py::arg("samples") = 100000, py::arg("tol") = 5e-3,
        py::arg("max_iter") = 200, py::arg("seed") = 1);

    m.def("wasserstein2", [](std::vector<double> a, std::vector<double> b) {
        return wasserstein2(EmpiricalDistribution(std::move(a)),
                            EmpiricalDistribution(std::move(b)));
    });

    py::class_<RenewalTable>(m, "RenewalTable")
        .def_readonly("t", &RenewalTable::t)
        .def_readonly("U", &RenewalTable::U)
        .def_readonly("Uhat", &RenewalTable::Uhat)
        .def_readonly("se_Uhat", &RenewalTable::se_Uhat);

    m.def(
        "renewal_U",
        [](const std::string& text, double t_max, double grid, const std::string& method,
           std::uint64_t seed, std::int64_t replicas) {
            const auto mm = method == "tilted" ? RenewalMethod::tilted_walk_mc
                                               : RenewalMethod::branching_enumeration;
            return renewal_U(model_from(text), t_max, grid, mm, seed, replicas);
        },
        py::arg("model"), py::arg("t_max") = 12.0, py::arg("grid") = 0.02,
        py::arg("method") = "branching", py::arg("seed") = 1, py::arg("replicas") = 12);

    m.def("vlem_integral",
          [](const std::string& text, double x, const RenewalTable& table) {
              return vlem_integral(model_from(text), x, table);
          });

    m.def("set_threads", &set_worker_threads, py::arg("n"));

    py::class_<ExperimentResult>(m, "ExperimentResult")
        .def_property_readonly("mu", [](const ExperimentResult& r) { return r.mu; })
        .def("mean_psi", [](const ExperimentResult& r, std::size_t i) {
            return r.per_n.at(i).mean_psi;
        })
        .def("var_psi", [](const ExperimentResult& r, std::size_t i) {
            return r.per_n.at(i).var_psi;
        })
        .def("q_hat", [](const ExperimentResult& r, std::size_t i) {
            return r.per_n.at(i).q_hat;
        });

    m.def(
        "simulate",
        [](const std::string& text, std::vector<std::int64_t> ns, std::int64_t replicas,
           std::uint64_t seed) {
            ExperimentConfig cfg;
            cfg.model = text;
            cfg.n_values = std::move(ns);
            cfg.replicas = replicas;
            cfg.master_seed = seed;
            return run(cfg);
        },
        py::arg("model"), py::arg("n"), py::arg("replicas"), py::arg("seed") = 1);
}
