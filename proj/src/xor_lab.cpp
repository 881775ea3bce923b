#include "osc/xor_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "osc/error.hpp"
#include "osc/properties.hpp"

namespace osc::xorlab {

Dataset xor_dataset() {
    return {{
        {{-1.0, -1.0}, -1},
        {{1.0, -1.0}, 1},
        {{-1.0, 1.0}, 1},
        {{1.0, 1.0}, -1},
    }};
}

double neuron_forward(const SingleNeuron& n, const Point& x) {
    return evaluate(n.activation, n.preactivation(x));
}

bool XorCertificate::valid() const {
    return correct == 4 &&
           std::all_of(margins.begin(), margins.end(), [](double m) { return std::abs(m) > kMarginThreshold; });
}

double XorCertificate::min_abs_margin() const {
    double m = std::abs(margins[0]);
    for (double v : margins) m = std::min(m, std::abs(v));
    return m;
}

XorCertificate certify(const SingleNeuron& n) {
    XorCertificate c;
    c.neuron = n;
    const auto data = xor_dataset();
    for (std::size_t i = 0; i < data.size(); ++i) {
        c.margins[i] = neuron_forward(n, data[i].x);
        if (sign_of(c.margins[i]) == data[i].label) ++c.correct;
    }
    return c;
}

namespace {

struct Candidate {
    XorCertificate cert;
    std::size_t index = 0;
    bool set = false;
};

// True when a ranks strictly ahead of b.
bool better(const Candidate& a, const Candidate& b) {
    if (!b.set) return a.set;
    if (!a.set) return false;
    if (a.cert.correct != b.cert.correct) return a.cert.correct > b.cert.correct;
    const double ma = a.cert.min_abs_margin();
    const double mb = b.cert.min_abs_margin();
    if (ma != mb) return ma > mb;
    return a.index < b.index;
}

}  // namespace

XorCertificate grid_search_certificate(ActivationId id, double bound, double resolution, unsigned threads) {
    if (!(bound > 0.0) || !(resolution > 0.0)) {
        throw ConfigError("grid_search_certificate: bound and resolution must be positive");
    }
    const std::size_t n = static_cast<std::size_t>(std::llround(2.0 * bound / resolution)) + 1;
    auto coord = [&](std::size_t k) { return -bound + static_cast<double>(k) * resolution; };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

    std::vector<Candidate> best(threads);
    auto work = [&](unsigned t) {
        Candidate local;
        for (std::size_t i = t; i < n; i += threads) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    Candidate c;
                    c.cert = certify(SingleNeuron{{coord(i), coord(j)}, coord(k), id});
                    c.index = (i * n + j) * n + k;
                    c.set = true;
                    if (better(c, local)) local = c;
                }
            }
        }
        best[t] = local;
    };

    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }

    Candidate winner;
    for (const auto& c : best) {
        if (better(c, winner)) winner = c;
    }
    return winner.cert;
}

void TrainSpec::validate() const {
    if (!(learning_rate > 0.0) || epochs == 0 || restarts == 0 || !(init_scale > 0.0)) {
        throw ConfigError("TrainSpec: learning_rate, epochs, restarts and init_scale must be positive");
    }
}

namespace {

double squared_error(const SingleNeuron& n, const Dataset& data) {
    double loss = 0.0;
    for (const auto& s : data) {
        const double e = neuron_forward(n, s.x) - s.label;
        loss += e * e;
    }
    return loss;
}

bool ahead(const XorCertificate& a, const XorCertificate& b) {
    if (a.correct != b.correct) return a.correct > b.correct;
    return a.min_abs_margin() > b.min_abs_margin();
}

}  // namespace

TrainResult train_single_neuron(ActivationId id, const TrainSpec& spec) {
    spec.validate();
    const Dataset data = xor_dataset();
    TrainResult best;
    bool have_best = false;

    for (std::size_t r = 0; r < spec.restarts; ++r) {
        std::mt19937_64 rng(spec.seed + r);
        std::uniform_real_distribution<double> init(-spec.init_scale, spec.init_scale);
        SingleNeuron n;
        n.activation = id;
        n.w[0] = init(rng);
        n.w[1] = init(rng);
        n.b = init(rng);

        std::vector<double> trace;
        trace.reserve(spec.epochs);
        SingleNeuron last_finite = n;
        for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
            double gw0 = 0.0, gw1 = 0.0, gb = 0.0, loss = 0.0;
            for (const auto& s : data) {
                const double z = n.preactivation(s.x);
                const double err = evaluate(id, z) - s.label;
                loss += err * err;
                const double dz = 2.0 * err * subgradient(id, z);
                gw0 += dz * s.x[0];
                gw1 += dz * s.x[1];
                gb += dz;
            }
            trace.push_back(loss);
            n.w[0] -= spec.learning_rate * gw0;
            n.w[1] -= spec.learning_rate * gw1;
            n.b -= spec.learning_rate * gb;
            if (!std::isfinite(n.w[0]) || !std::isfinite(n.w[1]) || !std::isfinite(n.b) ||
                !std::isfinite(squared_error(n, data))) {
                n = last_finite;
                break;
            }
            last_finite = n;
            if (certify(n).valid()) {
                trace.push_back(squared_error(n, data));
                break;
            }
        }

        const XorCertificate cert = certify(n);
        if (!have_best || ahead(cert, best.certificate)) {
            best.certificate = cert;
            best.loss_trace = std::move(trace);
            best.restart = r;
            have_best = true;
        }
        best.restarts_run = r + 1;
        if (cert.valid()) break;
    }
    return best;
}

double BoundaryGrid::coordinate(std::size_t k) const {
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(resolution - 1);
}

int BoundaryGrid::sign_near(const Point& p) const {
    auto index = [&](double v) {
        const double t = (v - lo) / (hi - lo) * static_cast<double>(resolution - 1);
        return static_cast<std::size_t>(std::clamp<long long>(std::llround(t), 0,
                                                              static_cast<long long>(resolution - 1)));
    };
    return at(index(p[0]), index(p[1]));
}

BoundaryGrid decision_boundary_grid(const SingleNeuron& n, double lo, double hi, std::size_t resolution) {
    if (resolution < 2) throw ConfigError("decision_boundary_grid: resolution must be >= 2");
    if (!(lo < hi)) throw ConfigError("decision_boundary_grid: lo must be < hi");
    BoundaryGrid g;
    g.lo = lo;
    g.hi = hi;
    g.resolution = resolution;
    g.signs.resize(resolution * resolution);
    for (std::size_t r = 0; r < resolution; ++r) {
        for (std::size_t c = 0; c < resolution; ++c) {
            g.signs[r * resolution + c] = sign_of(neuron_forward(n, {g.coordinate(c), g.coordinate(r)}));
        }
    }
    return g;
}

void write_boundary_csv(const BoundaryGrid& grid, std::ostream& os) {
    os << "x1,x2,sign\n";
    char buf[64];
    for (std::size_t r = 0; r < grid.resolution; ++r) {
        for (std::size_t c = 0; c < grid.resolution; ++c) {
            std::snprintf(buf, sizeof buf, "%.6g,%.6g,%d\n", grid.coordinate(c), grid.coordinate(r), grid.at(c, r));
            os << buf;
        }
    }
}

void write_certificate_json(const XorCertificate& cert, std::string_view method, std::ostream& os) {
    nlohmann::ordered_json j;
    j["activation"] = name(cert.neuron.activation);
    j["w"] = {cert.neuron.w[0], cert.neuron.w[1]};
    j["b"] = cert.neuron.b;
    j["margins"] = cert.margins;
    j["correct"] = cert.correct;
    j["valid"] = cert.valid();
    j["method"] = method;
    os << j.dump(2) << '\n';
}

}  // namespace osc::xorlab
