// SPDX-License-Identifier: Apache-2.0
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "walklt/experiment.hpp"
#include "walklt/green.hpp"
#include "walklt/increment_law.hpp"
#include "walklt/knight.hpp"
#include "walklt/ladder.hpp"
#include "walklt/limit_theory.hpp"
#include "walklt/local_time.hpp"
#include "walklt/stats.hpp"

namespace py = pybind11;
using namespace walklt;

namespace {

IncrementLaw validated_law(const std::string& name) {
  IncrementLaw law = bundled_law(name);
  validate(law);
  return law;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "local times of killed and reflected lattice random walks";

  py::class_<IncrementLaw>(m, "IncrementLaw")
      .def_readonly("name", &IncrementLaw::name)
      .def_readonly("alpha", &IncrementLaw::alpha)
      .def_readonly("beta", &IncrementLaw::beta)
      .def_readonly("sigma2", &IncrementLaw::sigma2)
      .def_readonly("period", &IncrementLaw::period)
      .def_readonly("heavy_tail", &IncrementLaw::heavy_tail)
      .def("__repr__",
           [](const IncrementLaw& l) { return "<IncrementLaw " + l.name + ">"; });

  py::class_<LadderLaw>(m, "LadderLaw")
      .def_readonly("pmf", &LadderLaw::pmf)
      .def_property_readonly("zero_atom", &LadderLaw::zero_atom)
      .def_property_readonly("mean", &LadderLaw::mean);

  py::class_<RenewalTable>(m, "RenewalTable")
      .def_readonly("h", &RenewalTable::h)
      .def_readonly("H", &RenewalTable::H)
      .def_readonly("truncation_error", &RenewalTable::truncation_error)
      .def("csv", [](const RenewalTable& t) { return renewal_table_csv(t); });

  py::class_<LocalTimeFieldSample>(m, "LocalTimeFieldSample")
      .def_readonly("start", &LocalTimeFieldSample::start)
      .def_readonly("levels", &LocalTimeFieldSample::levels)
      .def_readonly("counts", &LocalTimeFieldSample::counts)
      .def_readonly("excursion_length", &LocalTimeFieldSample::excursion_length)
      .def_readonly("capped", &LocalTimeFieldSample::capped);

  py::class_<TestReport>(m, "TestReport")
      .def_readonly("name", &TestReport::name)
      .def_readonly("kind", &TestReport::kind)
      .def_readonly("statistic", &TestReport::statistic)
      .def_readonly("reference", &TestReport::reference)
      .def_readonly("p_value", &TestReport::p_value)
      .def_readonly("sigma_distance", &TestReport::sigma_distance)
      .def_readonly("pass_flag", &TestReport::pass)
      .def_readonly("n", &TestReport::n);

  m.def("bundled_law", &validated_law, py::arg("name"));
  m.def("bundled_law_names", &bundled_law_names);
  m.def("parse_law", [](const std::string& text) {
    IncrementLaw law = parse_law(text);
    validate(law);
    return law;
  });
  m.def("validate", [](IncrementLaw& law) {
    ValidationReport rep = validate(law);
    py::dict out;
    out["valid"] = rep.valid;
    out["period"] = rep.period;
    py::list issues;
    for (const auto& i : rep.issues) issues.append(i.what);
    out["issues"] = issues;
    return out;
  });
  m.def("norming", &norming, py::arg("law"), py::arg("n"));
  m.def("inverse_norming", &inverse_norming, py::arg("law"), py::arg("N"));

  m.def(
      "exact_ladder_pmf",
      [](const IncrementLaw& law, const std::string& kind) {
        return exact_ladder_pmf(law, kind == "strict-ascending"
                                         ? LadderKind::StrictAscending
                                         : LadderKind::WeakDescending);
      },
      py::arg("law"), py::arg("kind"));
  m.def(
      "renewal_table",
      [](const LadderLaw& chi, long long x_max, const std::string& convention) {
        return renewal_table(chi, x_max,
                             convention == "le" ? CumConvention::LessEqual
                                                : CumConvention::Less);
      },
      py::arg("chi"), py::arg("x_max"), py::arg("convention") = "le");
  m.def("compute_u", &compute_U, py::arg("x"), py::arg("N"), py::arg("h_plus"),
        py::arg("chi_minus"));

  m.def(
      "green_sum",
      [](const IncrementLaw& law, long long x, long long y, double tol, long long y_max,
         bool include_time_zero) {
        GreenResult g = green_sum(law, x, y, tol, y_max, include_time_zero);
        return py::make_tuple(g.value, g.error_bound);
      },
      py::arg("law"), py::arg("x"), py::arg("y"), py::arg("tolerance") = 1e-8,
      py::arg("y_max") = 0, py::arg("include_time_zero") = false);
  m.def("scaled_green", &scaled_green, py::arg("law"), py::arg("u"), py::arg("v"),
        py::arg("N"));
  m.def("hitting_prob", &hitting_prob, py::arg("law"), py::arg("x"), py::arg("level"));

  m.def(
      "simulate_killed",
      [](const IncrementLaw& law, long long start, const std::vector<long long>& levels,
         std::uint64_t seed, long long cap, long long ceiling) {
        SimOptions opts;
        opts.cap = cap;
        opts.ceiling = ceiling;
        Rng rng(seed);
        return simulate_killed(law, start, levels, opts, rng);
      },
      py::arg("law"), py::arg("start"), py::arg("levels"), py::arg("seed"),
      py::arg("cap") = 100'000'000, py::arg("ceiling") = 0);
  m.def(
      "simulate_reflected_direct",
      [](const IncrementLaw& law, long long M, const std::vector<long long>& levels,
         std::uint64_t seed, long long cap, long long ceiling) {
        SimOptions opts;
        opts.cap = cap;
        opts.ceiling = ceiling;
        Rng rng(seed);
        return simulate_reflected_direct(law, M, levels, opts, rng);
      },
      py::arg("law"), py::arg("M"), py::arg("levels"), py::arg("seed"),
      py::arg("cap") = 100'000'000, py::arg("ceiling") = 0);
  m.def(
      "simulate_reflected_iid",
      [](const IncrementLaw& law, long long M, const std::vector<long long>& levels,
         std::uint64_t seed, long long cap, long long ceiling) {
        SimOptions opts;
        opts.cap = cap;
        opts.ceiling = ceiling;
        Rng rng(seed);
        return simulate_reflected_iid(law, M, levels, opts, rng);
      },
      py::arg("law"), py::arg("M"), py::arg("levels"), py::arg("seed"),
      py::arg("cap") = 100'000'000, py::arg("ceiling") = 0);
  m.def(
      "rescaled_field_values",
      [](const IncrementLaw& law, long long N, const std::vector<double>& u_list,
         long long M, std::uint64_t seed, long long ceiling) {
        SimOptions opts;
        opts.ceiling = ceiling;
        Rng rng(seed);
        return rescaled_field(law, N, u_list, M, opts, rng).values;
      },
      py::arg("law"), py::arg("N"), py::arg("u_list"), py::arg("M"), py::arg("seed"),
      py::arg("ceiling") = 0);

  m.def("a_20_closed", &a_20_closed);
  m.def("a_20_quadrature", &a_20_quadrature, py::arg("u"), py::arg("v"),
        py::arg("tolerance") = 1e-8);
  m.def(
      "kac_moment_value",
      [](double u0, const std::vector<double>& us) {
        return kac_moment_value(u0, us,
                                [](double a, double b) { return a_20_closed(a, b); });
      },
      py::arg("u0"), py::arg("u_list"));
  m.def("exponential_limit_sf", &exponential_limit_sf, py::arg("x"), py::arg("rate"));
  m.def("field_marginal_laplace", &field_marginal_laplace, py::arg("u"), py::arg("lam"),
        py::arg("x0") = 1.0);

  m.def("knight_kernel", &knight_kernel, py::arg("i"), py::arg("j"));
  m.def(
      "exact_q_pmf",
      [](long long mm, long long n, long long cap) { return exact_q_pmf(mm, n, cap).pmf; },
      py::arg("m"), py::arg("n"), py::arg("support_cap") = 1024);
  m.def("gw_extinction_prob", &gw_extinction_prob, py::arg("generations"));

  m.def(
      "fit_geometric",
      [](const std::vector<long long>& samples) {
        GeometricFit f = fit_geometric(samples);
        return py::make_tuple(f.p_hat, f.stderr_);
      },
      py::arg("samples"));
  m.def(
      "tail_slope",
      [](const std::vector<double>& xs, const std::vector<double>& ys) {
        SlopeFit f = tail_slope(xs, ys);
        return py::make_tuple(f.slope, f.stderr_);
      },
      py::arg("x_grid"), py::arg("y_values"));
  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("index"));

  m.def(
      "run_experiment",
      [](const std::string& id, const py::kwargs& kwargs) {
        ExperimentConfig cfg;
        cfg.id = id;
        for (auto item : kwargs) {
          const std::string key = py::cast<std::string>(item.first);
          if (key == "law")
            cfg.law = py::cast<std::string>(item.second);
          else if (key == "seed")
            cfg.seed = py::cast<std::uint64_t>(item.second);
          else if (key == "workers")
            cfg.workers = py::cast<int>(item.second);
          else if (key == "samples")
            cfg.samples = py::cast<long long>(item.second);
          else if (key == "N")
            cfg.N_grid = py::cast<std::vector<long long>>(item.second);
          else if (key == "levels")
            cfg.levels = py::cast<std::vector<long long>>(item.second);
          else if (key == "u")
            cfg.u_list = py::cast<std::vector<double>>(item.second);
          else if (key == "lam")
            cfg.lambda_grid = py::cast<std::vector<double>>(item.second);
          else if (key == "out")
            cfg.out_dir = py::cast<std::string>(item.second);
          else
            throw ConfigError("unknown run_experiment kwarg: " + key);
        }
        ExperimentRecord rec = run_experiment(cfg);
        py::list reports;
        for (const auto& r : rec.reports) reports.append(r);
        py::dict out;
        out["reports"] = reports;
        out["all_pass"] = rec.all_pass();
        out["wall_seconds"] = rec.wall_seconds;
        out["total_samples"] = rec.total_samples;
        out["capped_samples"] = rec.capped_samples;
        return out;
      },
      py::arg("id"));
  m.def("experiment_ids", &experiment_ids);
}
