#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cryocmos/card_file.hpp"
#include "cryocmos/circuits.hpp"
#include "cryocmos/demo.hpp"
#include "cryocmos/device.hpp"
#include "cryocmos/error.hpp"
#include "cryocmos/rf_extract.hpp"
#include "cryocmos/statvar.hpp"
#include "cryocmos/touchstone.hpp"
#include "cryocmos/twoport.hpp"

namespace py = pybind11;
using namespace cryo;

namespace {

using CArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

CArray mats_to_array(const std::vector<Mat2>& mats) {
    CArray out({static_cast<py::ssize_t>(mats.size()), py::ssize_t{2}, py::ssize_t{2}});
    auto a = out.mutable_unchecked<3>();
    for (std::size_t k = 0; k < mats.size(); ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) a(static_cast<py::ssize_t>(k), i, j) = mats[k](i, j);
    return out;
}

std::vector<Mat2> array_to_mats(const CArray& arr) {
    if (arr.ndim() != 3 || arr.shape(1) != 2 || arr.shape(2) != 2)
        throw py::value_error("matrices must have shape (n, 2, 2)");
    auto a = arr.unchecked<3>();
    std::vector<Mat2> out(static_cast<std::size_t>(arr.shape(0)));
    for (py::ssize_t k = 0; k < arr.shape(0); ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out[static_cast<std::size_t>(k)](i, j) = a(k, i, j);
    return out;
}

DeviceSpec spec_of(const ModelCard& card, const DeviceGeometry& g) { return {card, g}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "cryocmos native core";

    auto base = py::register_exception<Error>(m, "CryoError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<SchemaError>(m, "SchemaError", base.ptr());

    py::enum_<Polarity>(m, "Polarity").value("nmos", Polarity::nmos).value("pmos", Polarity::pmos);
    py::enum_<Rep>(m, "Rep")
        .value("S", Rep::S)
        .value("Y", Rep::Y)
        .value("Z", Rep::Z)
        .value("H", Rep::H)
        .value("ABCD", Rep::ABCD);

    py::class_<DeviceGeometry>(m, "DeviceGeometry")
        .def(py::init([](Polarity p, double w_um, double l_um, int nf) {
                 return DeviceGeometry::from_fingers(p, w_um / nf, nf, l_um);
             }),
             py::arg("polarity"), py::arg("w_um"), py::arg("l_um"), py::arg("n_fingers") = 1)
        .def_readonly("polarity", &DeviceGeometry::polarity)
        .def_readonly("w_um", &DeviceGeometry::w_um)
        .def_readonly("l_um", &DeviceGeometry::l_um)
        .def_readonly("n_fingers", &DeviceGeometry::n_fingers)
        .def_readonly("w_finger_um", &DeviceGeometry::w_finger_um);

    py::class_<BiasPoint>(m, "BiasPoint")
        .def(py::init([](double v_gs, double v_ds, double temperature) { return BiasPoint{v_gs, v_ds, 0.0, temperature}; }),
             py::arg("v_gs"), py::arg("v_ds"), py::arg("temperature") = 298.0)
        .def_readwrite("v_gs", &BiasPoint::v_gs)
        .def_readwrite("v_ds", &BiasPoint::v_ds)
        .def_readwrite("temperature", &BiasPoint::temperature);

    py::class_<ModelCard>(m, "ModelCard")
        .def(py::init<>())
        .def_readwrite("polarity", &ModelCard::polarity)
        .def_readwrite("vth0_298", &ModelCard::vth0_298)
        .def_readwrite("kappa_vth", &ModelCard::kappa_vth)
        .def_readwrite("t_sat", &ModelCard::t_sat)
        .def_readwrite("mu0_298", &ModelCard::mu0_298)
        .def_readwrite("gamma_mu", &ModelCard::gamma_mu)
        .def_readwrite("n_ideality", &ModelCard::n_ideality)
        .def_readwrite("cox_areal", &ModelCard::cox_areal)
        .def_readwrite("dibl_eta", &ModelCard::dibl_eta)
        .def_readwrite("theta_mob", &ModelCard::theta_mob)
        .def_readwrite("r_source", &ModelCard::r_source)
        .def_readwrite("r_drain", &ModelCard::r_drain)
        .def("validate", &ModelCard::validate);

    py::class_<EvalResult>(m, "EvalResult")
        .def_readonly("i_d", &EvalResult::i_d)
        .def_readonly("g_m", &EvalResult::g_m)
        .def_readonly("g_ds", &EvalResult::g_ds)
        .def_readonly("ss", &EvalResult::ss)
        .def_readonly("converged", &EvalResult::converged)
        .def_readonly("iterations", &EvalResult::iterations);

    m.def("drain_current", &device::drain_current, py::arg("card"), py::arg("geom"), py::arg("bias"));
    m.def("vth", &device::vth, py::arg("card"), py::arg("geom"), py::arg("bias"));
    m.def("vth_constant_current", &device::vth_constant_current, py::arg("card"), py::arg("geom"), py::arg("t"));
    m.def("subthreshold_swing", &device::subthreshold_swing, py::arg("card"), py::arg("geom"), py::arg("t"));
    m.def("off_current", &device::off_current, py::arg("card"), py::arg("geom"), py::arg("t"), py::arg("v_ds"));
    m.def("demo_card", &device::demo_card, py::arg("polarity"));

    m.def(
        "read_card", [](const std::string& text) { return parse_card_file(text).card; }, py::arg("text"),
        "Core card of a model-card JSON document.");
    m.def(
        "write_card",
        [](const ModelCard& card, const std::string& provenance) {
            ModelCardFile f;
            f.card = card;
            f.provenance = provenance;
            return to_json(f);
        },
        py::arg("card"), py::arg("provenance") = "");

    py::class_<TwoPort>(m, "TwoPort")
        .def(py::init([](std::vector<double> freqs, const CArray& mats, Rep rep, double z0) {
                 TwoPort t;
                 t.freqs = std::move(freqs);
                 t.mats = array_to_mats(mats);
                 t.rep = rep;
                 t.z0 = z0;
                 t.validate();
                 return t;
             }),
             py::arg("freqs"), py::arg("matrices"), py::arg("rep") = Rep::S, py::arg("z0") = 50.0)
        .def_readonly("freqs", &TwoPort::freqs)
        .def_readonly("rep", &TwoPort::rep)
        .def_readonly("z0", &TwoPort::z0)
        .def_property_readonly("matrices", [](const TwoPort& t) { return mats_to_array(t.mats); })
        .def("__len__", &TwoPort::size);

    m.def("convert", &convert, py::arg("net"), py::arg("target"));
    m.def(
        "read_touchstone", [](const std::string& text) { return read_touchstone(text); }, py::arg("text"));
    m.def(
        "write_touchstone", [](const TwoPort& net) { return write_touchstone(net, FreqUnit::Hz); }, py::arg("net"));

    py::class_<SmallSignalSet>(m, "SmallSignalSet")
        .def(py::init<>())
        .def_readwrite("r_g", &SmallSignalSet::r_g)
        .def_readwrite("r_d", &SmallSignalSet::r_d)
        .def_readwrite("r_s", &SmallSignalSet::r_s)
        .def_readwrite("c_gg", &SmallSignalSet::c_gg)
        .def_readwrite("c_gd", &SmallSignalSet::c_gd)
        .def_readwrite("c_gb", &SmallSignalSet::c_gb)
        .def_readwrite("g_m", &SmallSignalSet::g_m)
        .def_readwrite("g_ds", &SmallSignalSet::g_ds)
        .def_readonly("flagged", &SmallSignalSet::flagged)
        .def_readonly("diagnostics", &SmallSignalSet::diagnostics)
        .def_property_readonly("c_gs", &SmallSignalSet::c_gs);

    m.def(
        "synth_small_signal",
        [](const SmallSignalSet& ss, const std::vector<double>& f, double z0) { return synth_small_signal(ss, f, z0); },
        py::arg("elements"), py::arg("freqs"), py::arg("z0") = 50.0);
    m.def(
        "coldfet_extract", [](const TwoPort& net, bool refine) {
            ColdFetOptions o;
            o.refine = refine;
            return coldfet_extract(net, o).elements;
        },
        py::arg("net"), py::arg("refine") = true);
    m.def(
        "ft_extract", [](const TwoPort& net) { return ft_extract(net).f_t; }, py::arg("net"));
    m.def("ft_analytic", &ft_analytic, py::arg("elements"));

    py::class_<MismatchModel>(m, "MismatchModel").def("a_vth", &MismatchModel::a_vth);
    m.def("demo_mismatch_model", &demo_mismatch_model);
    m.def("pelgrom_sigma", &pelgrom_sigma, py::arg("model"), py::arg("geom"), py::arg("t"));
    m.def(
        "fit_pelgrom",
        [](const std::vector<std::pair<DeviceGeometry, double>>& pairs, double t, Polarity p) {
            std::vector<MismatchObservation> obs;
            for (const auto& [g, s] : pairs) obs.push_back({g, s});
            const PelgromFit f = fit_pelgrom(obs, t, p);
            return py::make_tuple(f.a_short, f.a_long);
        },
        py::arg("observations"), py::arg("t"), py::arg("polarity"),
        "Fit (A_short, A_long) in mV um from (geometry, sigma_mV) observations.");

    m.def(
        "ring_oscillator",
        [](double t, int n_stages, double c_load) {
            RoSpec s;
            s.n_stages = n_stages;
            s.c_load = c_load;
            s.inverter = demo::inverter(t);
            const RoResult r = ring_oscillator(s);
            return py::dict(py::arg("frequency") = r.frequency, py::arg("f_estimate") = r.f_estimate,
                            py::arg("stage_delay") = r.stage_delay, py::arg("dt") = r.dt);
        },
        py::arg("t"), py::arg("n_stages") = 3, py::arg("c_load") = 1e-15, "Demo-card ring oscillator.");
    m.def(
        "sram_snm",
        [](double t, const std::string& mode) {
            const SnmResult r = sram_snm(demo::sram_cell(t), mode == "read" ? SramMode::read : SramMode::hold);
            return py::dict(py::arg("snm") = r.snm, py::arg("lobe_upper") = r.lobe_upper,
                            py::arg("lobe_lower") = r.lobe_lower, py::arg("flagged") = r.flagged);
        },
        py::arg("t"), py::arg("mode") = "hold", "Demo 6T cell static noise margin.");
    m.def(
        "iddq", [](double t, std::size_t cells) { return iddq(demo::sram_cell(t), cells, t); }, py::arg("t"),
        py::arg("cells") = 4096);
    m.def(
        "comparator_margin",
        [](double t, double v_cm, double dv, bool preamp) {
            const ComparatorResult r = comparator_margin(demo::comparator(t, preamp), v_cm, dv);
            return py::dict(py::arg("passed") = r.pass, py::arg("margin") = r.margin,
                            py::arg("discharge_time") = r.discharge_time);
        },
        py::arg("t"), py::arg("v_cm"), py::arg("dv") = 0.01, py::arg("preamp") = false);
    m.def(
        "flash_adc",
        [](double t, const std::vector<double>& input, double f_sample, bool preamp) {
            const AdcResult r = flash_adc(demo::comparator(t, preamp), f_sample, input);
            std::vector<int> codes;
            for (const auto& s : r.samples) codes.push_back(s.code);
            return codes;
        },
        py::arg("t"), py::arg("input"), py::arg("f_sample") = 1e9, py::arg("preamp") = true);
}
