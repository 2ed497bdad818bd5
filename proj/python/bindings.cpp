#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "elliptow/bench.hpp"
#include "elliptow/dpp.hpp"
#include "elliptow/error.hpp"
#include "elliptow/game.hpp"

namespace py = pybind11;
using namespace elliptow;

namespace {

Vec to_vec(const std::vector<double>& xs) { return Vec::from(xs); }

}  // namespace

PYBIND11_MODULE(_elliptow, m) {
    m.doc() = "Ellipsoid mean-value expansion, DPP grid solver and noisy Tug-of-War simulator";

    py::register_exception<Error>(m, "ElliptowError", PyExc_RuntimeError);

    py::enum_<Branch>(m, "Branch")
        .value("AspectBelowOne", Branch::AspectBelowOne)
        .value("AspectAboveOne", Branch::AspectAboveOne)
        .value("DegenerateAspectZero", Branch::DegenerateAspectZero);

    py::class_<Params>(m, "Params")
        .def_readonly("n", &Params::n)
        .def_readonly("p", &Params::p)
        .def_readonly("gamma", &Params::gamma)
        .def_readonly("a", &Params::a)
        .def_readonly("branch", &Params::branch)
        .def("compat_residual", &Params::compat_residual)
        .def("satisfies_termination", &Params::satisfies_termination)
        .def("__repr__", [](const Params& p) {
            return "Params(n=" + std::to_string(p.n) + ", p=" + std::to_string(p.p) +
                   ", gamma=" + std::to_string(p.gamma) + ", a=" + std::to_string(p.a) + ")";
        });

    m.def("make_params", &make_params, py::arg("n"), py::arg("p"), py::arg("gamma"), py::arg("branch"));
    m.def("make_params_default", &make_params_default, py::arg("n"), py::arg("p"), py::arg("branch"));
    m.def("default_gamma", &default_gamma);
    m.def("feasible_gamma_interval", [](int n, double p, Branch b) {
        GammaInterval iv = feasible_gamma_interval(n, p, b);
        py::dict d;
        d["empty"] = iv.empty;
        if (!iv.empty) {
            d["lo"] = iv.lo;
            d["hi"] = iv.hi;
            d["lo_open"] = iv.lo_open;
            d["hi_open"] = iv.hi_open;
        }
        return d;
    });

    py::class_<Domain>(m, "Domain")
        .def_static("ball", [](const std::vector<double>& c, double r) { return Domain::ball(to_vec(c), r); })
        .def_static("annulus", [](const std::vector<double>& c, double ri, double ro) {
            return Domain::annulus(to_vec(c), ri, ro);
        })
        .def_static("box", [](const std::vector<double>& lo, const std::vector<double>& hi) {
            return Domain::box(BBox{to_vec(lo), to_vec(hi)});
        })
        .def_static("ball_with_corkscrew",
                    [](double radius, double mu, const std::vector<double>& bpt, std::vector<double> scales) {
                        return Domain::ball_with_corkscrew(radius, mu, to_vec(bpt), scales);
                    })
        .def("signed_distance", [](const Domain& d, const std::vector<double>& x) {
            return d.signed_distance(to_vec(x));
        })
        .def("contains", [](const Domain& d, const std::vector<double>& x) { return d.contains(to_vec(x)); })
        .def("inradius", &Domain::inradius)
        .def_property_readonly("dim", &Domain::dim);

    m.def("scaled_distance", [](const Domain& d, const std::vector<double>& x, double eps) {
        return scaled_distance(d, to_vec(x), eps);
    });

    m.def("ellipsoid_map", [](const std::vector<double>& y, const std::vector<double>& center,
                              double radius, double aspect, const std::vector<double>& orientation) {
        Ellipsoid e{to_vec(center), radius, aspect, to_vec(orientation)};
        return ellipsoid_map(to_vec(y), e).to_std();
    });

    m.def("sampling_ellipsoid",
          [](const std::vector<double>& x0, const std::vector<double>& x, double r, const Params& prm) {
              Ellipsoid e = sampling_ellipsoid(to_vec(x0), to_vec(x), r, prm);
              py::dict d;
              d["center"] = e.center.to_std();
              d["radius"] = e.radius;
              d["aspect"] = e.aspect;
              d["orientation"] = e.orientation.to_std();
              return d;
          });

    m.def("game_step", [](const std::vector<double>& x, const std::vector<double>& sigma,
                          const std::vector<double>& w, const Params& prm, double eps) {
        return game_step(to_vec(x), to_vec(sigma), to_vec(w), prm, eps).to_std();
    });

    m.def(
        "minmax_average",
        [](const std::function<double(std::vector<double>)>& u, const std::vector<double>& x0, double r,
           const Params& prm, int quad_radial, int quad_angular, int directions) {
            QuadratureRule q = QuadratureRule::ball_product(prm.n, quad_radial, quad_angular);
            SearchRule s = SearchRule::uniform(prm.n, directions, {0.5, 1.0});
            PointFn fn = [&u](const Vec& x) { return u(x.to_std()); };
            MinMaxAverage mm = minmax_average(fn, to_vec(x0), r, prm, q, s);
            py::dict d;
            d["value"] = mm.value;
            d["lo"] = mm.lo;
            d["hi"] = mm.hi;
            d["arg_lo"] = mm.arg_lo.to_std();
            d["arg_hi"] = mm.arg_hi.to_std();
            return d;
        },
        py::arg("u"), py::arg("x0"), py::arg("r"), py::arg("params"), py::arg("quad_radial") = 4,
        py::arg("quad_angular") = 12, py::arg("directions") = 32);

    py::class_<SmoothTestFunction>(m, "TestFunction")
        .def(py::init([](const std::string& spec, int dim) {
            return test_function_from_json(nlohmann::json::parse(spec), dim);
        }))
        .def("value", [](const SmoothTestFunction& f, const std::vector<double>& x) {
            return f.value(to_vec(x));
        })
        .def("gradient", [](const SmoothTestFunction& f, const std::vector<double>& x) {
            return f.gradient(to_vec(x)).to_std();
        });

    m.def("p_laplacian", [](const SmoothTestFunction& f, const std::vector<double>& x, double p) {
        return p_laplacian(f, to_vec(x), p);
    });
    m.def("expansion_residual",
          [](const SmoothTestFunction& f, const std::vector<double>& x0, double r, const Params& prm,
             int quad_radial, int quad_angular, int directions) {
              QuadratureRule q = QuadratureRule::ball_product(prm.n, quad_radial, quad_angular);
              SearchRule s = SearchRule::uniform(prm.n, directions, {0.25, 0.5, 0.75, 1.0});
              return expansion_residual(f, to_vec(x0), r, prm, q, s);
          },
          py::arg("f"), py::arg("x0"), py::arg("r"), py::arg("params"), py::arg("quad_radial") = 6,
          py::arg("quad_angular") = 24, py::arg("directions") = 64);

    m.def(
        "run_job",
        [](const std::string& kind, const std::string& config_json, std::optional<std::uint64_t> seed) {
            JobResult job = run_job(kind, nlohmann::json::parse(config_json), seed);
            py::dict csv;
            for (const auto& [name, contents] : job.csv_files) csv[py::str(name)] = contents;
            return py::make_tuple(job.manifest.dump(), csv, job.all_passed);
        },
        py::arg("kind"), py::arg("config_json"), py::arg("seed") = std::nullopt);

    m.def("describe_params", [](int n, double p, std::optional<double> gamma, std::optional<std::string> br) {
        return describe_params(n, p, gamma, br).dump();
    });
}
