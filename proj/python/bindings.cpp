// Python bindings for bplab.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bplab/adainit.hpp"
#include "bplab/dataset.hpp"
#include "bplab/error.hpp"
#include "bplab/experiment.hpp"
#include "bplab/generator.hpp"
#include "bplab/initializers.hpp"
#include "bplab/qnn.hpp"
#include "bplab/state_vector.hpp"
#include "bplab/submartingale.hpp"

namespace py = pybind11;
using namespace bplab;

namespace {

qnn::LabeledData to_data(const std::vector<std::vector<double>>& X, const std::vector<int>& y) {
    if (X.size() != y.size()) throw InvalidArgument("X and y differ in length");
    qnn::LabeledData d;
    d.dim = X.empty() ? 0 : X.front().size();
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].size() != d.dim) throw InvalidArgument("ragged feature rows");
        d.push_back(X[i], y[i]);
    }
    return d;
}

py::dict split_dict(const qnn::LabeledData& d) {
    std::vector<std::vector<double>> X;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = d.row(i);
        X.emplace_back(r.begin(), r.end());
    }
    py::dict out;
    out["X"] = X;
    out["y"] = d.labels;
    return out;
}

py::dict iteration_dict(const adainit::IterationRecord& r) {
    py::dict d;
    d["t"] = r.t;
    d["variance"] = r.variance;
    d["delta"] = r.delta;
    d["threshold"] = r.threshold;
    d["accepted"] = r.accepted;
    d["S"] = r.S;
    d["provenance"] = r.provenance;
    d["note"] = r.note;
    return d;
}

sim::GateOp gate_from_tuple(const py::tuple& t) {
    const auto name = t[0].cast<std::string>();
    if (name == "cnot") return sim::GateOp::cnot(t[1].cast<int>(), t[2].cast<int>());
    const int q = t[1].cast<int>();
    const double a = t[2].cast<double>();
    if (name == "rx") return sim::GateOp::rx(q, a);
    if (name == "ry") return sim::GateOp::ry(q, a);
    if (name == "rz") return sim::GateOp::rz(q, a);
    throw InvalidArgument("unknown gate '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_bplab, m) {
    m.doc() = "Statevector QNN simulator, AdaInit search and submartingale checks";

    // Translators are tried newest first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ShapeMismatch>(m, "ShapeMismatch", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);

    m.def(
        "simulate",
        [](int num_qubits, const std::vector<py::tuple>& gates) {
            auto s = sim::init_zero_state(num_qubits);
            for (const auto& g : gates) s.apply(gate_from_tuple(g));
            const auto a = s.amplitudes();
            return std::vector<sim::Complex>(a.begin(), a.end());
        },
        py::arg("num_qubits"), py::arg("gates"),
        "Apply gates ('rx'|'ry'|'rz', q, angle) or ('cnot', c, t) to |0...0>; returns amplitudes.");

    py::class_<qnn::CircuitSpec>(m, "CircuitSpec")
        .def(py::init([](int L, int N) { return qnn::CircuitSpec{L, N, 3}; }), py::arg("num_layers"),
             py::arg("num_qubits"))
        .def_readonly("num_layers", &qnn::CircuitSpec::num_layers)
        .def_readonly("num_qubits", &qnn::CircuitSpec::num_qubits)
        .def_property_readonly("theta_size", &qnn::CircuitSpec::theta_size);

    py::class_<qnn::QnnParams>(m, "QnnParams")
        .def_readwrite("theta", &qnn::QnnParams::theta)
        .def_readwrite("head_weights", &qnn::QnnParams::head_weights)
        .def_readwrite("head_bias", &qnn::QnnParams::head_bias)
        .def_readonly("num_classes", &qnn::QnnParams::num_classes)
        .def("to_json", [](const qnn::QnnParams& p) { return adainit::params_to_json(p); })
        .def_static("from_json", &adainit::params_from_json);

    m.def(
        "sample_params",
        [](const qnn::CircuitSpec& spec, const std::string& init, std::uint64_t seed, int num_classes) {
            auto s = init::InitSpec::parse(init);
            s.seed = seed;
            return init::sample_params(spec, s, num_classes);
        },
        py::arg("spec"), py::arg("init") = "uniform[0,6.283185307179586]", py::arg("seed") = 0,
        py::arg("num_classes") = 2);

    m.def(
        "circuit_expectations",
        [](const qnn::CircuitSpec& spec, const std::vector<double>& theta, const std::vector<double>& x) {
            return qnn::circuit_expectations(spec, theta, x);
        },
        py::arg("spec"), py::arg("theta"), py::arg("x"));

    m.def(
        "forward",
        [](const qnn::CircuitSpec& spec, const qnn::QnnParams& p, const std::vector<double>& x) {
            return qnn::forward(spec, p, x);
        },
        py::arg("spec"), py::arg("params"), py::arg("x"));

    m.def(
        "gradients",
        [](const qnn::CircuitSpec& spec, const qnn::QnnParams& p, const std::vector<std::vector<double>>& X,
           const std::vector<int>& y) {
            const auto g = qnn::batch_gradients(spec, p, to_data(X, y));
            py::dict d;
            d["loss"] = g.loss;
            d["theta"] = g.theta;
            d["head_weights"] = g.head_weights;
            d["head_bias"] = g.head_bias;
            return d;
        },
        py::arg("spec"), py::arg("params"), py::arg("X"), py::arg("y"));

    m.def(
        "train_and_probe",
        [](const qnn::CircuitSpec& spec, const qnn::QnnParams& p, const std::vector<std::vector<double>>& X,
           const std::vector<int>& y, int epochs, double learning_rate, int batch_size, std::uint64_t seed) {
            qnn::TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.learning_rate = learning_rate;
            cfg.batch_size = batch_size;
            cfg.seed = seed;
            const auto r = qnn::train_and_probe(spec, p, to_data(X, y), cfg);
            py::dict d;
            d["variance"] = r.variance;
            d["gradients"] = r.per_epoch_gradients;
            d["gradient_bound_exceeded"] = r.gradient_bound_exceeded;
            return d;
        },
        py::arg("spec"), py::arg("params"), py::arg("X"), py::arg("y"), py::arg("epochs") = 30,
        py::arg("learning_rate") = 0.01, py::arg("batch_size") = 20, py::arg("seed") = 0);

    m.def(
        "threshold",
        [](const qnn::CircuitSpec& spec, int K, const std::string& poly) {
            if (poly != "N6" && poly != "N3L3") throw InvalidArgument("poly must be N6 or N3L3");
            return adainit::threshold(spec, K, poly == "N6" ? adainit::PolyKind::N6 : adainit::PolyKind::N3L3);
        },
        py::arg("spec"), py::arg("K"), py::arg("poly") = "N6");
    m.def("expected_improvement", &adainit::expected_improvement, py::arg("variance"), py::arg("s_prev"));

    m.def(
        "run_adainit",
        [](const qnn::CircuitSpec& spec, const std::vector<std::vector<double>>& X, const std::vector<int>& y,
           int iterations, int K, int epochs, std::uint64_t seed, double sigma) {
            qnn::TrainConfig tc;
            tc.epochs = epochs;
            tc.seed = derive_seed(seed, 3);
            const auto data = to_data(X, y);
            adainit::AdaInitConfig cfg;
            cfg.iterations = iterations;
            cfg.threshold.K = K > 0 ? K : iterations;
            cfg.prompt.nlayers = spec.num_layers;
            cfg.prompt.nqubits = spec.num_qubits;
            cfg.seed = seed;
            gen::SurrogateGenerator generator({sigma});
            adainit::AdaInitResult r;
            {
                py::gil_scoped_release release;
                r = adainit::run_adainit(spec, generator, adainit::training_evaluator(spec, data, tc), cfg);
            }
            py::list history;
            for (const auto& h : r.state.history) history.append(iteration_dict(h));
            py::dict d;
            d["S"] = r.state.S;
            d["history"] = history;
            d["iterations_used"] = r.iterations_used();
            d["aborted"] = r.aborted;
            if (const auto* best = r.best()) d["best"] = *best;
            else d["best"] = py::none();
            return d;
        },
        py::arg("spec"), py::arg("X"), py::arg("y"), py::arg("iterations") = 50, py::arg("K") = 0,
        py::arg("epochs") = 30, py::arg("seed") = 0, py::arg("sigma") = 0.3,
        "Search loop with the offline surrogate generator.");

    m.def(
        "parse_and_validate",
        [](const std::string& text, const qnn::CircuitSpec& spec, int num_classes) -> py::object {
            auto r = gen::parse_and_validate(text, spec, num_classes);
            if (const auto* e = std::get_if<gen::ParseError>(&r)) throw ShapeMismatch(e->message);
            return py::cast(std::get<gen::GeneratedParams>(r).params);
        },
        py::arg("text"), py::arg("spec"), py::arg("num_classes") = 2);
    m.def("format_params", &gen::format_params_dict, py::arg("params"), py::arg("digits") = 17);

    m.def(
        "hitting_time",
        [](double alpha, double p, double b, int trials, std::uint64_t seed, long max_steps) {
            mart::IncrementProcess proc;
            proc.alpha = alpha;
            proc.law = mart::DeltaLaw::mixture(p, alpha, 2 * alpha);
            proc.seed = seed;
            const auto r = mart::hitting_time(proc, b, max_steps, trials);
            py::dict d;
            d["empirical_mean"] = r.empirical_mean;
            d["lower_confidence"] = r.lower_confidence;
            d["bound"] = r.theorem_bound;
            d["bound_satisfied"] = r.bound_satisfied;
            d["censored"] = r.censored;
            return d;
        },
        py::arg("alpha"), py::arg("p"), py::arg("b"), py::arg("trials") = 1000, py::arg("seed") = 0,
        py::arg("max_steps") = 1'000'000L,
        "Accepted increments ~ U[alpha, 2 alpha] with probability p, otherwise below alpha.");

    m.def(
        "prepare",
        [](const std::string& dataset, const std::string& path, int num_qubits, std::uint64_t seed) {
            auto spec = data::DatasetSpec::standard(data::parse_dataset_name(dataset), path);
            const auto ds = data::prepare(data::load_raw(spec), spec, num_qubits, seed);
            py::dict d;
            d["name"] = ds.name;
            d["train"] = split_dict(ds.train);
            d["val"] = split_dict(ds.val);
            d["test"] = split_dict(ds.test);
            d["hash"] = ds.hash();
            return d;
        },
        py::arg("dataset"), py::arg("path") = "", py::arg("num_qubits") = 2, py::arg("seed") = 0);

    m.def(
        "validate_config",
        [](const std::map<std::string, std::string>& kv) {
            const auto cfg = exp::ExperimentConfig::from_key_values(kv);
            cfg.validate();
            return cfg.to_key_values();
        },
        py::arg("config"), "Parse and validate key/value settings; returns the canonical form.");

    m.def(
        "run_sweep",
        [](const std::map<std::string, std::string>& kv) {
            const auto cfg = exp::ExperimentConfig::from_key_values(kv);
            exp::SweepOutcome o;
            {
                py::gil_scoped_release release;
                o = exp::run_sweep(cfg);
            }
            py::list records;
            for (const auto& r : o.records) {
                py::dict d;
                d["method"] = r.method;
                d["point"] = r.point;
                d["repeat"] = r.repeat;
                d["variance"] = r.variance;
                d["final_S"] = r.final_S ? py::cast(*r.final_S) : py::none();
                d["error"] = r.error;
                records.append(d);
            }
            return py::make_tuple(o.results_file, records);
        },
        py::arg("config"), "Run a sweep; returns (results_file, records).");
}
