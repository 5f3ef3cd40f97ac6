#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "levylab/denseness.hpp"
#include "levylab/experiments.hpp"

namespace py = pybind11;
using namespace levylab;

namespace {

LevyTriplet make_triplet_atoms(double drift, double sigma,
                               const std::vector<std::pair<double, double>>& atoms) {
    std::vector<JumpAtom> list;
    list.reserve(atoms.size());
    for (const auto& [x, lam] : atoms) list.push_back(JumpAtom{x, lam});
    return LevyTriplet(drift, sigma, JumpMeasure::from_atoms(std::move(list)));
}

LevyTriplet make_triplet_uniform_density(double drift, double sigma, double scale,
                                         double lo, double hi, int panels) {
    const double c = scale / (hi - lo);
    return LevyTriplet(drift, sigma,
                       JumpMeasure::from_density([c](double) { return c; }, lo, hi,
                                                 panels));
}

py::list result_rows(const ExperimentResult& result) {
    py::list rows;
    for (const auto& row : result.rows) {
        py::dict d;
        d["experiment"] = row.experiment;
        d["params"] = row.params;
        d["estimate"] = row.estimate;
        d["stderr"] = row.stderr_;
        if (row.has_target) d["target"] = row.target;
        d["pass"] = row.pass;
        d["seconds"] = row.seconds;
        rows.append(d);
    }
    return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Malliavin calculus laboratory for finite-activity Levy processes";

    py::class_<Rect>(m, "Rect")
        .def(py::init<double, double, double, double>(), py::arg("t_lo"), py::arg("t_hi"),
             py::arg("x_lo"), py::arg("x_hi"))
        .def_readonly("t_lo", &Rect::t_lo)
        .def_readonly("t_hi", &Rect::t_hi)
        .def_readonly("x_lo", &Rect::x_lo)
        .def_readonly("x_hi", &Rect::x_hi)
        .def_property_readonly("contains_zero", &Rect::contains_zero)
        .def("__repr__", [](const Rect& r) {
            std::ostringstream os;
            os << "Rect((" << r.t_lo << ", " << r.t_hi << "] x (" << r.x_lo << ", "
               << r.x_hi << "])";
            return os.str();
        });

    py::class_<LevyTriplet>(m, "LevyTriplet")
        .def_property_readonly("drift", &LevyTriplet::drift)
        .def_property_readonly("sigma", &LevyTriplet::sigma)
        .def_property_readonly("gamma_truncated", &LevyTriplet::gamma_truncated)
        .def_property_readonly("jump_mass",
                               [](const LevyTriplet& t) { return t.nu().total_mass(); })
        .def_property_readonly("jump_second_moment",
                               [](const LevyTriplet& t) { return t.nu().second_moment(); });

    m.def("triplet_from_atoms", &make_triplet_atoms, py::arg("drift"), py::arg("sigma"),
          py::arg("atoms"), "Levy triplet with an atomic jump measure [(x, intensity)].");
    m.def("triplet_from_uniform_density", &make_triplet_uniform_density, py::arg("drift"),
          py::arg("sigma"), py::arg("scale"), py::arg("lo"), py::arg("hi"),
          py::arg("panels") = 32);

    m.def("mu_measure", &mu_measure, py::arg("triplet"), py::arg("a"), py::arg("b"));
    m.def("m_measure", &m_measure, py::arg("triplet"), py::arg("rect"));
    m.def("m_measure_intersection", &m_measure_intersection, py::arg("triplet"),
          py::arg("a"), py::arg("b"));
    m.def(
        "nu_integral",
        [](const LevyTriplet& tr, const std::function<double(double)>& h) {
            return nu_integral(tr, h);
        },
        py::arg("triplet"), py::arg("h"));

    py::class_<Jump>(m, "Jump")
        .def_readonly("time", &Jump::time)
        .def_readonly("size", &Jump::size);

    py::class_<Path>(m, "Path")
        .def_property_readonly("horizon", &Path::horizon)
        .def("value", &Path::value, py::arg("t"))
        .def("increment", &Path::increment, py::arg("s"), py::arg("t"))
        .def("brownian", &Path::brownian, py::arg("t"))
        .def_property_readonly("jumps",
                               [](const Path& p) {
                                   return std::vector<Jump>(p.jumps().begin(),
                                                            p.jumps().end());
                               })
        .def_property_readonly("grid_times", [](const Path& p) {
            return std::vector<double>(p.grid_times().begin(), p.grid_times().end());
        });

    m.def(
        "simulate_path",
        [](const LevyTriplet& tr, double horizon, const std::vector<double>& required,
           std::uint64_t replicate, std::uint64_t seed) {
            return simulate_path(tr, horizon, required, replicate, seed);
        },
        py::arg("triplet"), py::arg("horizon"), py::arg("required_times"),
        py::arg("replicate_index"), py::arg("seed"));

    py::class_<Profile>(m, "Profile")
        .def("__call__", [](const Profile& p, double x) { return p.value(x); })
        .def("deriv", [](const Profile& p, double x) { return p.deriv(x); })
        .def("psi", &Profile::psi)
        .def_readonly("lo", &Profile::lo)
        .def_readonly("hi", &Profile::hi)
        .def_readonly("sup", &Profile::sup);

    m.def("bump_profile", &bump_profile, py::arg("lo"), py::arg("hi"), py::arg("height"));
    m.def(
        "indicator_profile",
        [](const LevyTriplet& tr, double a, double b, double w) {
            return make_smooth_indicator(tr, a, b, w);
        },
        py::arg("triplet"), py::arg("a"), py::arg("b"), py::arg("ramp_width"));

    py::class_<SmoothIndicator>(m, "SmoothIndicator")
        .def_readonly("slack", &SmoothIndicator::slack)
        .def_readonly("profile", &SmoothIndicator::profile);

    py::class_<StepKernel>(m, "StepKernel")
        .def_static("indicator", &StepKernel::indicator, py::arg("rect"),
                    py::arg("coefficient") = 1.0)
        .def("l2_norm_sq", &StepKernel::l2_norm_sq)
        .def("point_value", &StepKernel::point_value);

    py::class_<SeparableKernel>(m, "SeparableKernel")
        .def(py::init<double, double, Profile>(), py::arg("s"), py::arg("u"),
             py::arg("profile"));

    py::class_<TensorKernel>(m, "TensorKernel")
        .def(py::init<std::vector<StepKernel>>(), py::arg("factors"))
        .def_property_readonly("order", &TensorKernel::order);

    m.def("eval_M", &eval_M, py::arg("path"), py::arg("rect"));
    m.def("eval_I1_step",
          [](const Path& p, const StepKernel& k) { return eval_I1(p, k); });
    m.def("eval_I1_separable",
          [](const Path& p, const SeparableKernel& k) { return eval_I1(p, k); });
    m.def("eval_IN", &eval_IN, py::arg("path"), py::arg("tensor"));
    m.def("derivative_of_elementary", &derivative_of_elementary, py::arg("path"),
          py::arg("tensor"), py::arg("t"), py::arg("x"));

    py::enum_<NormFlavor>(m, "NormFlavor")
        .value("FULL", NormFlavor::Full)
        .value("ZERO_PART", NormFlavor::ZeroPart)
        .value("JUMP_PART", NormFlavor::JumpPart);

    py::class_<ElementaryChaos>(m, "ElementaryChaos")
        .def(py::init([](std::vector<Rect> rects, double coefficient) {
                 return ElementaryChaos{std::move(rects), coefficient};
             }),
             py::arg("rects"), py::arg("coefficient") = 1.0)
        .def_property_readonly("order", &ElementaryChaos::order);

    m.def("inner_product", &inner_product, py::arg("triplet"), py::arg("a"), py::arg("b"));
    m.def(
        "d12_norm_sq",
        [](const LevyTriplet& tr, const std::vector<ElementaryChaos>& terms,
           NormFlavor flavor) { return d12_norm_sq(tr, terms, flavor); },
        py::arg("triplet"), py::arg("terms"), py::arg("flavor") = NormFlavor::Full);
    m.def(
        "l2_norm_sq",
        [](const LevyTriplet& tr, const std::vector<ElementaryChaos>& terms) {
            return l2_norm_sq(tr, terms);
        },
        py::arg("triplet"), py::arg("terms"));
    m.def("s2_norm_formula", &s2_norm_formula, py::arg("m"), py::arg("N"),
          py::arg("T_len"), py::arg("c"));
    m.def(
        "s2_norm_direct",
        [](const LevyTriplet& tr, double t_lo, double t_hi,
           const std::vector<std::pair<double, double>>& a, const std::vector<Rect>& tail,
           int N) {
            SharedTimeProduct spec{t_lo, t_hi, a, tail};
            return s2_norm_direct(tr, spec, N);
        },
        py::arg("triplet"), py::arg("t_lo"), py::arg("t_hi"), py::arg("a_intervals"),
        py::arg("tail"), py::arg("N"));

    py::class_<MCEstimate>(m, "MCEstimate")
        .def_readonly("mean", &MCEstimate::mean)
        .def_property_readonly("stderr", [](const MCEstimate& e) { return e.stderr_; })
        .def_readonly("n", &MCEstimate::n)
        .def("__repr__", [](const MCEstimate& e) {
            std::ostringstream os;
            os << "MCEstimate(mean=" << e.mean << ", stderr=" << e.stderr_
               << ", n=" << e.n << ")";
            return os.str();
        });

    py::class_<BuiltGn>(m, "BuiltGn")
        .def_readonly("expectation", &BuiltGn::expectation)
        .def_readonly("expectation_stderr", &BuiltGn::expectation_stderr)
        .def("value_on",
             [](const BuiltGn& g, const Path& p) { return g.fast.bind(p).value; })
        .def("deriv_on", [](const BuiltGn& g, const Path& p, double t, double x) {
            return g.fast.bind(p).deriv(t, x);
        });

    m.def(
        "build_gn",
        [](const LevyTriplet& tr, const Profile& phi, double s, double u, int cells) {
            return build_Gn(tr, phi, s, u, Partition::uniform(s, u, cells));
        },
        py::arg("triplet"), py::arg("profile"), py::arg("s"), py::arg("u"),
        py::arg("cells"));

    m.def(
        "lemma4_distance",
        [](const LevyTriplet& tr, const Profile& phi, double s, double u, int cells,
           double horizon, std::uint64_t reps, std::uint64_t seed) {
            BuiltGn gn = build_Gn(tr, phi, s, u, Partition::uniform(s, u, cells));
            PathFunctional target = from_separable(SeparableKernel(s, u, phi));
            return d12_distance_sq(target, gn.fast, tr, horizon, reps, seed);
        },
        py::arg("triplet"), py::arg("profile"), py::arg("s"), py::arg("u"),
        py::arg("cells"), py::arg("horizon"), py::arg("reps"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>(),
        "D12 distance^2 between the partition sum and the first integral.");

    m.def("lemma4_pure_jump_oracle", &lemma4_pure_jump_oracle, py::arg("triplet"),
          py::arg("profile"), py::arg("s"), py::arg("u"), py::arg("cells"));

    py::class_<LipschitzFn>(m, "LipschitzFn")
        .def(py::init([](std::function<double(double)> fn, double lipschitz,
                         std::function<double(double)> deriv) {
                 return LipschitzFn(std::move(fn), lipschitz, std::move(deriv));
             }),
             py::arg("fn"), py::arg("lipschitz"), py::arg("deriv") = nullptr)
        .def("__call__", [](const LipschitzFn& g, double y) { return g.fn(y); })
        .def("deriv_at",
             [](const LipschitzFn& g, double y) {
                 if (!g.deriv) throw std::invalid_argument("derivative absent");
                 return g.deriv(y);
             })
        .def_readonly("lipschitz", &LipschitzFn::lipschitz);

    m.def("mollify", &mollify, py::arg("g"), py::arg("N"));

    m.def(
        "run_experiment",
        [](const std::string& config_text) {
            ExperimentConfig cfg =
                load_experiment_config(ConfigFile::parse_string(config_text));
            ExperimentResult result;
            {
                py::gil_scoped_release release;
                result = run_experiment(cfg);
            }
            return result_rows(result);
        },
        py::arg("config_text"),
        "Parses an experiment config document and returns the result rows.");

    m.def("experiment_catalog", [] {
        py::list out;
        for (const auto& [name, description] : experiment_catalog())
            out.append(py::make_tuple(name, description));
        return out;
    });
}
