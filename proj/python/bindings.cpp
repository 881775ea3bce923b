#include <sstream>
#include <string>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "osc/activation.hpp"
#include "osc/bench.hpp"
#include "osc/data/cifar.hpp"
#include "osc/error.hpp"
#include "osc/nn/model.hpp"
#include "osc/nn/ops.hpp"
#include "osc/properties.hpp"
#include "osc/property_report.hpp"
#include "osc/xor_lab.hpp"

namespace py = pybind11;
using namespace osc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

nn::Tensor to_tensor(const Array& a) {
    nn::Shape shape(a.shape(), a.shape() + a.ndim());
    return nn::Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const nn::Tensor& t) {
    Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

py::dict certificate_dict(const xorlab::XorCertificate& c) {
    py::dict d;
    d["activation"] = std::string(name(c.neuron.activation));
    d["w"] = py::make_tuple(c.neuron.w[0], c.neuron.w[1]);
    d["b"] = c.neuron.b;
    d["margins"] = c.margins;
    d["correct"] = c.correct;
    d["valid"] = c.valid();
    return d;
}

py::dict descriptor_dict(const ActivationDescriptor& d) {
    py::dict out;
    out["name"] = d.name;
    out["formula"] = d.formula;
    out["continuous"] = d.continuous;
    out["nondifferentiable_points"] = d.nondifferentiable_points;
    out["monotonic"] = d.monotonic;
    out["range"] = py::make_tuple(d.range.lo.value, d.range.hi.value);
    out["range_text"] = d.range.to_string();
    if (d.small_value) {
        out["small_value"] = py::make_tuple(d.small_value->c0, d.small_value->c1);
    } else {
        out["small_value"] = py::none();
    }
    out["hyperplanes"] = !d.hyperplane_count.is_infinite() ? py::object(py::int_(d.hyperplane_count.count))
                                                        : py::object(py::str("infinite"));
    out["sign_equivalent_identity"] = d.sign_equivalent_identity;
    out["xor_property"] = d.xor_property;
    return out;
}

py::bytes record_bytes(const data::RecordBytes& r) {
    return py::bytes(reinterpret_cast<const char*>(r.data()), r.size());
}

std::vector<std::uint8_t> bytes_of(const py::bytes& b) {
    const std::string s = b;
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

PYBIND11_MODULE(_osc, m) {
    m.doc() = "Activation catalog, property scans, XOR certificates, CIFAR-10 I/O and a small CNN engine";

    // Translators registered later are tried first, so bases go first.
    auto& base = py::register_exception<Error>(m, "OscError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    auto& domain = py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<KinkError>(m, "KinkError", domain.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<LabelError>(m, "LabelError", base.ptr());
    auto& format = py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<CorruptRecordError>(m, "CorruptRecordError", format.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());

    auto act = py::enum_<ActivationId>(m, "Activation");
    for (ActivationId id : all_activations()) act.value(std::string(name(id)).c_str(), id);

    m.def("activations", [] { return std::vector<ActivationId>(all_activations().begin(), all_activations().end()); });
    m.def("name", [](ActivationId id) { return std::string(name(id)); });
    m.def("parse_activation", [](const std::string& s) { return parse_activation(s); });
    m.def("evaluate", py::vectorize([](ActivationId id, double z) { return evaluate(id, z); }), py::arg("id"),
          py::arg("z"));
    m.def("derivative", py::vectorize([](ActivationId id, double z) { return derivative(id, z); }), py::arg("id"),
          py::arg("z"));
    m.def("subgradient", py::vectorize([](ActivationId id, double z) { return subgradient(id, z); }), py::arg("id"),
          py::arg("z"));
    m.def("sinc", py::vectorize([](double z) { return sinc(z); }));
    m.def("descriptor", [](ActivationId id) { return descriptor_dict(descriptor(id)); });

    m.def(
        "zero_crossings",
        [](ActivationId id, double lo, double hi, double step) {
            const auto zc = zero_crossings(id, Interval{lo, hi, step});
            py::dict d;
            d["crossing_count"] = zc.crossing_count;
            d["zero_count"] = zc.zero_count;
            d["brackets"] = zc.brackets;
            d["exact_zeros"] = zc.exact_zeros;
            return d;
        },
        py::arg("id"), py::arg("lo") = -10.0, py::arg("hi") = 10.0, py::arg("step") = kDefaultScanStep);
    m.def(
        "gradient_check",
        [](ActivationId id, double lo, double hi, std::size_t n, double tol) {
            const auto r = gradient_check(id, Interval{lo, hi, (hi - lo) / static_cast<double>(n)}, n, tol);
            py::dict d;
            d["max_relative_error"] = r.max_relative_error;
            d["worst_point"] = r.worst_point;
            d["samples"] = r.samples;
            d["passed"] = r.passed;
            return d;
        },
        py::arg("id"), py::arg("lo") = -6.0, py::arg("hi") = 6.0, py::arg("n") = 1000, py::arg("tol") = 1e-5);
    m.def("property_report_json", [] {
        std::ostringstream os;
        write_report_json(build_property_report(), os);
        return os.str();
    });
    m.def("property_contradictions", [] { return build_property_report().contradictions(); });

    m.def(
        "certify",
        [](ActivationId id, double w1, double w2, double b) {
            return certificate_dict(xorlab::certify(xorlab::SingleNeuron{{w1, w2}, b, id}));
        },
        py::arg("id"), py::arg("w1"), py::arg("w2"), py::arg("b"));
    m.def(
        "grid_search_certificate",
        [](ActivationId id, double bound, double resolution) {
            py::gil_scoped_release release;
            auto c = xorlab::grid_search_certificate(id, bound, resolution);
            py::gil_scoped_acquire acquire;
            return certificate_dict(c);
        },
        py::arg("id"), py::arg("bound") = 5.0, py::arg("resolution") = 0.1);
    m.def(
        "train_single_neuron",
        [](ActivationId id, double lr, std::size_t epochs, std::size_t restarts, std::uint64_t seed, double init_scale) {
            const auto r = xorlab::train_single_neuron(id, {lr, epochs, restarts, seed, init_scale});
            py::dict d = certificate_dict(r.certificate);
            d["restart"] = r.restart;
            d["restarts_run"] = r.restarts_run;
            d["loss_trace"] = r.loss_trace;
            return d;
        },
        py::arg("id"), py::arg("lr") = 0.05, py::arg("epochs") = 2000, py::arg("restarts") = 20, py::arg("seed") = 7,
        py::arg("init_scale") = 1.0);
    m.def(
        "solve_xor",
        [](ActivationId id) {
            const auto o = bench::solve_xor(id);
            py::dict d = certificate_dict(o.certificate);
            d["method"] = o.method;
            return d;
        },
        py::arg("id"));

    m.def(
        "synthetic_check_image",
        [](const std::string& kind, int label, std::uint8_t value) {
            data::SyntheticKind k;
            if (kind == "constant") {
                k = data::SyntheticKind::Constant;
            } else if (kind == "gradient") {
                k = data::SyntheticKind::Gradient;
            } else {
                throw ConfigError("synthetic kind must be 'constant' or 'gradient'");
            }
            return record_bytes(data::synthetic_check_image(k, label, value));
        },
        py::arg("kind"), py::arg("label"), py::arg("value") = 0);
    m.def(
        "decode_record",
        [](const py::bytes& b) {
            const auto r = data::decode_record(bytes_of(b));
            py::array_t<std::uint8_t> px({data::kChannels, data::kSide, data::kSide});
            std::copy(r.pixels.begin(), r.pixels.end(), px.mutable_data());
            return py::make_tuple(static_cast<int>(r.label), px);
        },
        py::arg("record"));
    m.def(
        "encode_record",
        [](int label, py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> pixels) {
            if (static_cast<std::size_t>(pixels.size()) != data::kImageBytes) {
                throw ShapeError("encode_record: expected 3072 pixel bytes");
            }
            if (label < 0 || label >= data::kClasses) throw LabelError("encode_record: label outside [0, 10)");
            data::Record r;
            r.label = static_cast<std::uint8_t>(label);
            std::copy(pixels.data(), pixels.data() + pixels.size(), r.pixels.begin());
            return record_bytes(data::encode_record(r));
        },
        py::arg("label"), py::arg("pixels"));

    py::class_<data::ImageDataset>(m, "ImageDataset")
        .def("__len__", &data::ImageDataset::size)
        .def_property_readonly("labels", &data::ImageDataset::labels)
        .def("images", [](const data::ImageDataset& ds) { return to_array(ds.images()); })
        .def("label_histogram", &data::ImageDataset::label_histogram)
        .def(
            "stratified_subset",
            [](const data::ImageDataset& ds, std::size_t n, std::uint64_t seed) {
                return data::stratified_subset(ds, n, seed);
            },
            py::arg("n"), py::arg("seed") = 0);
    m.def("parse_records", [](const py::bytes& b) { return data::parse_records(bytes_of(b)); });
    m.def(
        "load_cifar10",
        [](const std::filesystem::path& dir) {
            auto c = data::load_cifar10(dir);
            return py::make_tuple(std::move(c.train), std::move(c.test));
        },
        py::arg("dir"));
    m.def("stratified_indices", &data::stratified_indices, py::arg("dataset"), py::arg("n"), py::arg("seed") = 0);

    m.def(
        "softmax_cross_entropy",
        [](const Array& logits, const std::vector<int>& labels) {
            const auto r = nn::softmax_cross_entropy(to_tensor(logits), labels);
            return py::make_tuple(r.loss, to_array(r.grad));
        },
        py::arg("logits"), py::arg("labels"));

    py::class_<nn::Model>(m, "Model")
        .def(py::init([](int conv_layers, ActivationId activation, std::uint64_t seed, std::size_t in_channels,
                         std::size_t height, std::size_t width, std::size_t classes, std::size_t dense_units,
                         double dropout_rate) {
                 nn::NetworkConfig cfg;
                 cfg.conv_layers = conv_layers;
                 cfg.activation = activation;
                 cfg.seed = seed;
                 cfg.in_channels = in_channels;
                 cfg.height = height;
                 cfg.width = width;
                 cfg.classes = classes;
                 cfg.dense_units = dense_units;
                 cfg.dropout_rate = dropout_rate;
                 return nn::build_model(cfg);
             }),
             py::arg("conv_layers") = 2, py::arg("activation") = ActivationId::ReLU, py::arg("seed") = 0,
             py::arg("in_channels") = 3, py::arg("height") = 32, py::arg("width") = 32, py::arg("classes") = 10,
             py::arg("dense_units") = 64, py::arg("dropout_rate") = 0.5)
        .def("layers",
             [](const nn::Model& model) {
                 std::vector<std::string> out;
                 for (const auto& s : model.specs()) out.push_back(nn::describe(s));
                 return out;
             })
        .def("parameter_count",
             [](const nn::Model& model) {
                 std::size_t n = 0;
                 for (const auto* p : model.parameters()) n += p->value.size();
                 return n;
             })
        .def("forward", [](nn::Model& model, const Array& x) { return to_array(model.forward(to_tensor(x), nn::Mode::Eval)); },
             py::arg("batch"));

    m.def(
        "run_properties",
        [](const std::filesystem::path& out_dir) {
            std::ostringstream log;
            return bench::cmd_properties(out_dir, log);
        },
        py::arg("out_dir"));
}
