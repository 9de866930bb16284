#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "harlog/common.hpp"

namespace harlog {

class NonFiniteGradient : public DomainError {
public:
    NonFiniteGradient() : DomainError("non-finite gradient") {}
};

// Hidden layers are ReLU, the output layer is softmax.
struct MlpSpec {
    std::size_t input_dim = 4;
    std::vector<std::size_t> hidden = {8, 8};
    std::size_t output_dim = 2;

    std::vector<std::size_t> layer_dims() const {
        std::vector<std::size_t> dims = {input_dim};
        dims.insert(dims.end(), hidden.begin(), hidden.end());
        dims.push_back(output_dim);
        return dims;
    }
};

inline std::size_t param_count(const MlpSpec& spec) {
    auto dims = spec.layer_dims();
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) n += (dims[i] + 1) * dims[i + 1];
    return n;
}

struct Layer {
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;
    std::size_t in = 0, out = 0;

    double& weight(std::size_t r, std::size_t c) { return w[r * in + c]; }
    double weight(std::size_t r, std::size_t c) const { return w[r * in + c]; }
};

struct Mlp {
    MlpSpec spec;
    std::vector<Layer> layers;

    std::size_t num_params() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.w.size() + l.b.size();
        return n;
    }
};

// He-style uniform fan-in initialization from the given generator.
inline Mlp make_mlp(const MlpSpec& spec, Rng& rng) {
    Mlp mlp;
    mlp.spec = spec;
    auto dims = spec.layer_dims();
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        l.in = dims[i];
        l.out = dims[i + 1];
        if (l.in < 1 || l.out < 1) throw DomainError("layer widths must be >= 1");
        double limit = std::sqrt(6.0 / static_cast<double>(l.in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        l.w.resize(l.out * l.in);
        l.b.assign(l.out, 0.0);
        for (auto& w : l.w) w = dist(rng);
        mlp.layers.push_back(std::move(l));
    }
    return mlp;
}

// Intermediate activations kept for the backward pass.
struct ForwardTrace {
    std::vector<std::vector<double>> inputs;       // input to each layer
    std::vector<std::vector<double>> pre_act;      // affine outputs per layer
    std::vector<double> output;                    // softmax probabilities
};

inline void softmax_inplace(std::vector<double>& z) {
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : z) v /= sum;
}

inline ForwardTrace forward_trace(const Mlp& mlp, std::span<const double> x) {
    if (x.size() != mlp.spec.input_dim) throw DomainError("forward: input dimension mismatch");
    ForwardTrace tr;
    std::vector<double> cur(x.begin(), x.end());
    for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
        const auto& l = mlp.layers[li];
        tr.inputs.push_back(cur);
        std::vector<double> z(l.out);
        for (std::size_t r = 0; r < l.out; ++r) {
            double acc = l.b[r];
            for (std::size_t c = 0; c < l.in; ++c) acc += l.weight(r, c) * cur[c];
            z[r] = acc;
        }
        tr.pre_act.push_back(z);
        if (li + 1 < mlp.layers.size()) {
            for (auto& v : z) v = std::max(0.0, v);
        } else {
            softmax_inplace(z);
        }
        cur = std::move(z);
    }
    tr.output = cur;
    return tr;
}

inline std::vector<double> forward(const Mlp& mlp, std::span<const double> x) {
    return forward_trace(mlp, x).output;
}

struct Gradients {
    std::vector<Layer> layers;  // same shapes as the model, holding gradients
    std::vector<double> input;  // dL/dx

    void scale(double s) {
        for (auto& l : layers) {
            for (auto& v : l.w) v *= s;
            for (auto& v : l.b) v *= s;
        }
        for (auto& v : input) v *= s;
    }
    void add(const Gradients& other) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            for (std::size_t j = 0; j < layers[i].w.size(); ++j) layers[i].w[j] += other.layers[i].w[j];
            for (std::size_t j = 0; j < layers[i].b.size(); ++j) layers[i].b[j] += other.layers[i].b[j];
        }
    }
};

inline Gradients zero_gradients(const Mlp& mlp) {
    Gradients g;
    for (const auto& l : mlp.layers) {
        Layer gl;
        gl.in = l.in;
        gl.out = l.out;
        gl.w.assign(l.w.size(), 0.0);
        gl.b.assign(l.b.size(), 0.0);
        g.layers.push_back(std::move(gl));
    }
    g.input.assign(mlp.spec.input_dim, 0.0);
    return g;
}

// Exact gradients of the softmax/ReLU/affine composition given dL/d(output).
inline Gradients backward(const Mlp& mlp, const ForwardTrace& tr, std::span<const double> upstream) {
    if (upstream.size() != mlp.spec.output_dim) throw DomainError("backward: upstream dimension mismatch");
    Gradients g = zero_gradients(mlp);

    // softmax backward: dL/dz_j = o_j * (up_j - sum_i up_i o_i)
    const auto& o = tr.output;
    double dot = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) dot += upstream[i] * o[i];
    std::vector<double> dz(o.size());
    for (std::size_t j = 0; j < o.size(); ++j) dz[j] = o[j] * (upstream[j] - dot);

    for (std::size_t li = mlp.layers.size(); li-- > 0;) {
        const auto& l = mlp.layers[li];
        auto& gl = g.layers[li];
        const auto& in = tr.inputs[li];
        for (std::size_t r = 0; r < l.out; ++r) {
            gl.b[r] += dz[r];
            for (std::size_t c = 0; c < l.in; ++c) gl.weight(r, c) += dz[r] * in[c];
        }
        std::vector<double> dprev(l.in, 0.0);
        for (std::size_t c = 0; c < l.in; ++c)
            for (std::size_t r = 0; r < l.out; ++r) dprev[c] += l.weight(r, c) * dz[r];
        if (li > 0) {
            // ReLU gate of the previous layer's pre-activation
            for (std::size_t c = 0; c < dprev.size(); ++c)
                if (tr.pre_act[li - 1][c] <= 0.0) dprev[c] = 0.0;
        }
        dz = std::move(dprev);
    }
    g.input = dz;
    return g;
}

// Adaptive moment estimation with the usual defaults; lr 0.001 unless
// overridden.
struct Adam {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<Layer> m, v;  // first/second moment accumulators
    std::size_t step_count = 0;

    void init(const Mlp& mlp) {
        m.clear();
        v.clear();
        for (const auto& l : mlp.layers) {
            Layer zero;
            zero.in = l.in;
            zero.out = l.out;
            zero.w.assign(l.w.size(), 0.0);
            zero.b.assign(l.b.size(), 0.0);
            m.push_back(zero);
            v.push_back(zero);
        }
    }

    void step(Mlp& mlp, const Gradients& g) {
        if (m.empty()) init(mlp);
        ++step_count;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
            auto update = [&](std::vector<double>& params, const std::vector<double>& grad,
                              std::vector<double>& mm, std::vector<double>& vv) {
                for (std::size_t i = 0; i < params.size(); ++i) {
                    if (!std::isfinite(grad[i])) throw NonFiniteGradient();
                    mm[i] = beta1 * mm[i] + (1.0 - beta1) * grad[i];
                    vv[i] = beta2 * vv[i] + (1.0 - beta2) * grad[i] * grad[i];
                    double mhat = mm[i] / bc1;
                    double vhat = vv[i] / bc2;
                    params[i] -= learning_rate * mhat / (std::sqrt(vhat) + eps);
                }
            };
            update(mlp.layers[li].w, g.layers[li].w, m[li].w, v[li].w);
            update(mlp.layers[li].b, g.layers[li].b, m[li].b, v[li].b);
        }
    }
};

// -- JSON --------------------------------------------------------------------

inline nlohmann::json mlp_to_json(const Mlp& mlp) {
    nlohmann::json spec{{"input_dim", mlp.spec.input_dim},
                        {"hidden", mlp.spec.hidden},
                        {"output_dim", mlp.spec.output_dim}};
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : mlp.layers) {
        nlohmann::json w = nlohmann::json::array();
        for (std::size_t r = 0; r < l.out; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < l.in; ++c) row.push_back(l.weight(r, c));
            w.push_back(row);
        }
        layers.push_back({{"w", w}, {"b", l.b}});
    }
    return nlohmann::json{{"spec", spec}, {"layers", layers}};
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
    Mlp mlp;
    const auto& spec = j.at("spec");
    mlp.spec.input_dim = spec.at("input_dim").get<std::size_t>();
    mlp.spec.hidden = spec.at("hidden").get<std::vector<std::size_t>>();
    mlp.spec.output_dim = spec.at("output_dim").get<std::size_t>();
    auto dims = mlp.spec.layer_dims();
    const auto& layers = j.at("layers");
    if (layers.size() != dims.size() - 1) throw ValidationError("mlp: layer count mismatch");
    for (std::size_t li = 0; li < layers.size(); ++li) {
        Layer l;
        l.in = dims[li];
        l.out = dims[li + 1];
        const auto& w = layers[li].at("w");
        if (w.size() != l.out) throw ValidationError("mlp: weight shape mismatch");
        l.w.resize(l.out * l.in);
        for (std::size_t r = 0; r < l.out; ++r) {
            if (w[r].size() != l.in) throw ValidationError("mlp: weight shape mismatch");
            for (std::size_t c = 0; c < l.in; ++c) l.weight(r, c) = w[r][c].get<double>();
        }
        l.b = layers[li].at("b").get<std::vector<double>>();
        if (l.b.size() != l.out) throw ValidationError("mlp: bias shape mismatch");
        for (double p : l.w)
            if (!std::isfinite(p)) throw ValidationError("mlp: non-finite parameter");
        mlp.layers.push_back(std::move(l));
    }
    return mlp;
}

}  // namespace harlog
