#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "harlog/common.hpp"
#include "harlog/dataset.hpp"
#include "harlog/logic.hpp"
#include "harlog/mlp.hpp"
#include "harlog/tree.hpp"

namespace harlog {

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t epochs = 20;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
    FusionMode mode = FusionMode::DelayedFusing;
    bool z_score = true;
    double train_fraction = 0.8;
};

struct EvalReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::array<std::array<std::size_t, kNumActivities>, kNumActivities> confusion{};  // [true][pred]
    std::array<std::optional<double>, kNumConcepts> per_net_acc{};
};

// Macro-averaged metrics from (true, predicted) pairs.
inline EvalReport metrics_from_pairs(std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    if (pairs.empty()) throw DomainError("evaluate: empty test set");
    EvalReport r;
    for (auto [t, p] : pairs) ++r.confusion[t][p];
    std::size_t correct = 0;
    for (std::size_t c = 0; c < kNumActivities; ++c) correct += r.confusion[c][c];
    r.accuracy = static_cast<double>(correct) / static_cast<double>(pairs.size());
    double prec = 0.0, rec = 0.0, f1 = 0.0;
    for (std::size_t c = 0; c < kNumActivities; ++c) {
        std::size_t tp = r.confusion[c][c], fp = 0, fn = 0;
        for (std::size_t o = 0; o < kNumActivities; ++o) {
            if (o == c) continue;
            fp += r.confusion[o][c];
            fn += r.confusion[c][o];
        }
        double p = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        double q = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        prec += p;
        rec += q;
        f1 += (p + q > 0.0) ? 2.0 * p * q / (p + q) : 0.0;
    }
    r.macro_precision = prec / kNumActivities;
    r.macro_recall = rec / kNumActivities;
    r.macro_f1 = f1 / kNumActivities;
    return r;
}

struct FusedData {
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> y;
};

inline FusedData fuse_dataset(const Dataset& data, FusionMode mode, std::span<const std::size_t> indices) {
    FusedData out;
    out.x.reserve(indices.size());
    out.y.reserve(indices.size());
    for (auto i : indices) {
        out.x.push_back(fuse(data.samples[i], mode));
        out.y.push_back(data.samples[i].label);
    }
    return out;
}

// The six concept networks plus the program that combines them.
struct TrainedModel {
    std::string program_source;
    logic::LogicProgram program;
    std::array<logic::Circuit, kNumActivities> circuits{};  // per activity query
    std::vector<Mlp> nets;                                  // nets[k] drives net<k+1>
    FusionMode mode = FusionMode::DelayedFusing;
    bool z_score = true;
    std::optional<Standardizer> standardizer;
    std::uint64_t seed = 0;
    std::vector<double> loss_curve;       // mean train NLL per epoch
    std::size_t clamp_warnings = 0;       // times P(true query) hit the floor

    std::vector<double> standardized(std::span<const double> x) const {
        if (standardizer) return standardizer->apply(x);
        return std::vector<double>(x.begin(), x.end());
    }
};

namespace detail {

// Map each activity to its query circuit by the query's second argument.
inline std::array<logic::Circuit, kNumActivities> compile_activity_circuits(const logic::LogicProgram& prog) {
    std::array<logic::Circuit, kNumActivities> circuits;
    std::array<bool, kNumActivities> found{};
    for (const auto& q : prog.queries) {
        if (q.pred != "activity" || q.args.size() != 2 || q.args[1].is_var) continue;
        auto a = activity_index(q.args[1].name);
        if (!a) continue;
        circuits[*a] = logic::ground_and_compile(prog, q);
        found[*a] = true;
    }
    for (std::size_t a = 0; a < kNumActivities; ++a)
        if (!found[a])
            throw ValidationError(std::string("program has no query for activity '") + kActivityNames[a] + "'");
    return circuits;
}

inline std::vector<std::size_t> net_var_ids(const logic::LogicProgram& prog) {
    std::vector<std::size_t> ids(kNumConcepts, 0);
    std::array<bool, kNumConcepts> found{};
    for (const auto& nad : prog.nads) {
        if (nad.net_id < 1 || nad.net_id > static_cast<int>(kNumConcepts))
            throw ValidationError("program net ids must be net1..net6");
        ids[nad.net_id - 1] = nad.var_id;
        found[nad.net_id - 1] = true;
    }
    for (std::size_t k = 0; k < kNumConcepts; ++k)
        if (!found[k]) throw ValidationError("program is missing net" + std::to_string(k + 1));
    return ids;
}

}  // namespace detail

// All seven activity query probabilities for one (already standardized) input.
inline std::array<double, kNumActivities> query_probs(const TrainedModel& model, std::span<const double> x) {
    auto var_ids = detail::net_var_ids(model.program);
    std::vector<double> probs = model.program.default_leaf_probs();
    for (std::size_t k = 0; k < kNumConcepts; ++k)
        probs[var_ids[k]] = forward(model.nets[k], x)[0];
    std::array<double, kNumActivities> out{};
    for (std::size_t a = 0; a < kNumActivities; ++a) out[a] = logic::wmc(model.circuits[a], probs);
    return out;
}

inline std::size_t predict(const TrainedModel& model, std::span<const double> raw_x) {
    auto x = model.standardized(raw_x);
    auto p = query_probs(model, x);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

constexpr double kProbFloor = 1e-12;

// End-to-end training from activity labels only: per sample the loss is
// -log P(activity(x, true label)), with P computed by weighted model
// counting over the circuit and each net's softmax output feeding its
// neural AD. Gradients flow wmc_grad -> softmax -> backprop, with one
// optimizer step per mini-batch.
inline TrainedModel train(const std::string& program_source, const FusedData& train_data,
                          const TrainConfig& cfg) {
    if (cfg.epochs < 1 || cfg.learning_rate <= 0.0) throw DomainError("bad training config");
    TrainedModel model;
    model.program_source = program_source;
    model.program = logic::parse_program(program_source);
    model.circuits = detail::compile_activity_circuits(model.program);
    model.mode = cfg.mode;
    model.z_score = cfg.z_score;
    model.seed = cfg.seed;

    const std::size_t dim = train_data.x.empty() ? feature_dim(cfg.mode) : train_data.x[0].size();
    Rng rng(cfg.seed);
    for (std::size_t k = 0; k < kNumConcepts; ++k)
        model.nets.push_back(make_mlp(MlpSpec{dim, {8, 8}, 2}, rng));

    std::vector<std::vector<double>> xs;
    if (cfg.z_score) {
        model.standardizer = Standardizer::fit(train_data.x);
        for (const auto& row : train_data.x) xs.push_back(model.standardizer->apply(row));
    } else {
        xs = train_data.x;
    }

    auto var_ids = detail::net_var_ids(model.program);
    std::vector<Adam> opts(kNumConcepts);
    for (auto& o : opts) o.learning_rate = cfg.learning_rate;

    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<Gradients> batch_grads;
            for (std::size_t k = 0; k < kNumConcepts; ++k) batch_grads.push_back(zero_gradients(model.nets[k]));

            for (std::size_t bi = start; bi < end; ++bi) {
                const auto& x = xs[order[bi]];
                std::size_t label = train_data.y[order[bi]];
                std::vector<ForwardTrace> traces;
                std::vector<double> probs = model.program.default_leaf_probs();
                for (std::size_t k = 0; k < kNumConcepts; ++k) {
                    traces.push_back(forward_trace(model.nets[k], x));
                    probs[var_ids[k]] = traces.back().output[0];
                }
                const auto& circuit = model.circuits[label];
                double p = logic::wmc(circuit, probs);
                if (p < kProbFloor) {
                    p = kProbFloor;
                    ++model.clamp_warnings;
                }
                epoch_loss -= std::log(p);
                auto dP = logic::wmc_grad(circuit, probs);
                for (std::size_t k = 0; k < kNumConcepts; ++k) {
                    double g = -dP[var_ids[k]] / p;  // dNLL / d p_yes
                    if (g == 0.0) continue;
                    std::array<double, 2> upstream = {g, 0.0};
                    batch_grads[k].add(backward(model.nets[k], traces[k], upstream));
                }
            }
            double inv = 1.0 / static_cast<double>(end - start);
            for (std::size_t k = 0; k < kNumConcepts; ++k) {
                batch_grads[k].scale(inv);
                opts[k].step(model.nets[k], batch_grads[k]);
            }
        }
        model.loss_curve.push_back(epoch_loss / static_cast<double>(xs.size()));
    }
    return model;
}

inline EvalReport evaluate(const TrainedModel& model, const FusedData& test) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(test.x.size());
    for (std::size_t i = 0; i < test.x.size(); ++i) pairs.emplace_back(test.y[i], predict(model, test.x[i]));
    return metrics_from_pairs(pairs);
}

// Accuracy of each net's argmax outcome against its ground-truth concept,
// measured on the samples whose true activity routes through that node
// (or on every sample when restrict_to_path is off).
inline std::array<std::optional<double>, kNumConcepts> concept_accuracy(const TrainedModel& model,
                                                                        const FusedData& test,
                                                                        const ConceptTree& tree,
                                                                        bool restrict_to_path = true) {
    std::array<std::size_t, kNumConcepts> hit{}, seen{};
    std::array<std::array<bool, kNumConcepts>, kNumActivities> on_path{};
    for (std::size_t a = 0; a < kNumActivities; ++a)
        for (auto [node, outcome] : activity_path(tree, a)) {
            (void)outcome;
            on_path[a][node] = true;
        }
    for (std::size_t i = 0; i < test.x.size(); ++i) {
        auto x = model.standardized(test.x[i]);
        std::size_t label = test.y[i];
        for (std::size_t k = 0; k < kNumConcepts; ++k) {
            if (restrict_to_path && !on_path[label][k]) continue;
            bool predicted_yes = forward(model.nets[k], x)[0] > 0.5;
            ++seen[k];
            hit[k] += (predicted_yes == kConceptTruth[label][k]) ? 1 : 0;
        }
    }
    std::array<std::optional<double>, kNumConcepts> out{};
    for (std::size_t k = 0; k < kNumConcepts; ++k)
        if (seen[k]) out[k] = static_cast<double>(hit[k]) / static_cast<double>(seen[k]);
    return out;
}

// Predicted overall accuracy under fact independence: per activity the
// product of the accuracies of the nets on its root-to-leaf path, averaged
// uniformly over the seven activities.
inline double independence_analysis(const std::array<double, kNumConcepts>& per_net_acc,
                                    const ConceptTree& tree) {
    double total = 0.0;
    for (std::size_t a = 0; a < kNumActivities; ++a) {
        double p = 1.0;
        for (auto [node, outcome] : activity_path(tree, a)) {
            (void)outcome;
            p *= per_net_acc[node];
        }
        total += p;
    }
    return total / static_cast<double>(kNumActivities);
}

// -- cross-entropy training of plain MLPs (baselines and specialists) ---------

struct PlainModel {
    Mlp net;
    std::optional<Standardizer> standardizer;
    std::vector<double> loss_curve;

    std::vector<double> probs(std::span<const double> raw_x) const {
        auto x = standardizer ? standardizer->apply(raw_x) : std::vector<double>(raw_x.begin(), raw_x.end());
        return forward(net, x);
    }
    std::size_t predict(std::span<const double> raw_x) const {
        auto p = probs(raw_x);
        return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    }
};

inline PlainModel train_plain_mlp(const MlpSpec& spec, const std::vector<std::vector<double>>& x,
                                  const std::vector<std::size_t>& y, const TrainConfig& cfg) {
    if (x.empty()) throw DomainError("train: empty training set");
    PlainModel model;
    Rng rng(cfg.seed);
    model.net = make_mlp(spec, rng);

    std::vector<std::vector<double>> xs;
    if (cfg.z_score) {
        model.standardizer = Standardizer::fit(x);
        for (const auto& row : x) xs.push_back(model.standardizer->apply(row));
    } else {
        xs = x;
    }

    Adam opt;
    opt.learning_rate = cfg.learning_rate;
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            Gradients acc = zero_gradients(model.net);
            for (std::size_t bi = start; bi < end; ++bi) {
                auto tr = forward_trace(model.net, xs[order[bi]]);
                std::size_t label = y[order[bi]];
                double p = std::max(tr.output[label], kProbFloor);
                epoch_loss -= std::log(p);
                std::vector<double> upstream(tr.output.size(), 0.0);
                upstream[label] = -1.0 / p;
                acc.add(backward(model.net, tr, upstream));
            }
            acc.scale(1.0 / static_cast<double>(end - start));
            opt.step(model.net, acc);
        }
        model.loss_curve.push_back(epoch_loss / static_cast<double>(xs.size()));
    }
    return model;
}

enum class BaselineKind { Small, Large };

// Single 7-way softmax MLP on the fused features (8- or 22-neuron layers).
inline PlainModel train_baseline(BaselineKind kind, const FusedData& train_data, const TrainConfig& cfg) {
    std::size_t width = (kind == BaselineKind::Small) ? 8 : 22;
    MlpSpec spec{train_data.x[0].size(), {width, width}, kNumActivities};
    return train_plain_mlp(spec, train_data.x, train_data.y, cfg);
}

// Six independent binary concept nets, each trained with cross-entropy on
// the samples whose activity routes through its node.
inline std::array<PlainModel, kNumConcepts> train_concept_specialists(const FusedData& train_data,
                                                                      const ConceptTree& tree,
                                                                      const TrainConfig& cfg) {
    std::array<std::array<bool, kNumConcepts>, kNumActivities> on_path{};
    for (std::size_t a = 0; a < kNumActivities; ++a)
        for (auto [node, outcome] : activity_path(tree, a)) {
            (void)outcome;
            on_path[a][node] = true;
        }
    std::array<PlainModel, kNumConcepts> out;
    for (std::size_t k = 0; k < kNumConcepts; ++k) {
        std::vector<std::vector<double>> x;
        std::vector<std::size_t> y;
        for (std::size_t i = 0; i < train_data.x.size(); ++i) {
            if (!on_path[train_data.y[i]][k]) continue;
            x.push_back(train_data.x[i]);
            y.push_back(kConceptTruth[train_data.y[i]][k] ? 0 : 1);  // outcome 0 = yes
        }
        if (x.empty()) throw DomainError("specialist " + std::to_string(k + 1) + ": no routed samples");
        MlpSpec spec{x[0].size(), {8, 8}, 2};
        TrainConfig c = cfg;
        c.seed = cfg.seed + k + 1;  // independent initializations
        out[k] = train_plain_mlp(spec, x, y, c);
    }
    return out;
}

// Specialist accuracy against concept ground truth on routed test samples.
inline std::array<std::optional<double>, kNumConcepts> specialist_accuracy(
    const std::array<PlainModel, kNumConcepts>& specialists, const FusedData& test, const ConceptTree& tree) {
    std::array<std::array<bool, kNumConcepts>, kNumActivities> on_path{};
    for (std::size_t a = 0; a < kNumActivities; ++a)
        for (auto [node, outcome] : activity_path(tree, a)) {
            (void)outcome;
            on_path[a][node] = true;
        }
    std::array<std::size_t, kNumConcepts> hit{}, seen{};
    for (std::size_t i = 0; i < test.x.size(); ++i) {
        std::size_t label = test.y[i];
        for (std::size_t k = 0; k < kNumConcepts; ++k) {
            if (!on_path[label][k]) continue;
            bool predicted_yes = specialists[k].predict(test.x[i]) == 0;
            ++seen[k];
            hit[k] += (predicted_yes == kConceptTruth[label][k]) ? 1 : 0;
        }
    }
    std::array<std::optional<double>, kNumConcepts> out{};
    for (std::size_t k = 0; k < kNumConcepts; ++k)
        if (seen[k]) out[k] = static_cast<double>(hit[k]) / static_cast<double>(seen[k]);
    return out;
}

// -- serialization -------------------------------------------------------------

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json confusion = nlohmann::json::array();
    for (const auto& row : r.confusion) confusion.push_back(row);
    nlohmann::json per_net;
    bool any = false;
    for (std::size_t k = 0; k < kNumConcepts; ++k) {
        if (r.per_net_acc[k]) {
            per_net["net" + std::to_string(k + 1)] = *r.per_net_acc[k];
            any = true;
        }
    }
    nlohmann::json j{{"metrics",
                      {{"accuracy", r.accuracy},
                       {"precision", r.macro_precision},
                       {"recall", r.macro_recall},
                       {"f1", r.macro_f1}}},
                     {"confusion", confusion},
                     {"activities", kActivityNames}};
    j["per_net_acc"] = any ? per_net : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json model_to_json(const TrainedModel& model) {
    nlohmann::json nets;
    for (std::size_t k = 0; k < kNumConcepts; ++k) nets["net" + std::to_string(k + 1)] = mlp_to_json(model.nets[k]);
    nlohmann::json j{{"nets", nets},
                     {"program_source", model.program_source},
                     {"fusion_mode", fusion_mode_name(model.mode)},
                     {"seed", model.seed}};
    if (model.standardizer)
        j["standardize"] = {{"mean", model.standardizer->mean}, {"std", model.standardizer->stdev}};
    else
        j["standardize"] = nullptr;
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    TrainedModel model;
    model.program_source = j.at("program_source").get<std::string>();
    model.program = logic::parse_program(model.program_source);
    model.circuits = detail::compile_activity_circuits(model.program);
    auto mode = fusion_mode_from_name(j.at("fusion_mode").get<std::string>());
    if (!mode) throw ValidationError("model: unknown fusion mode");
    model.mode = *mode;
    model.seed = j.at("seed").get<std::uint64_t>();
    for (std::size_t k = 0; k < kNumConcepts; ++k)
        model.nets.push_back(mlp_from_json(j.at("nets").at("net" + std::to_string(k + 1))));
    if (j.contains("standardize") && !j["standardize"].is_null()) {
        Standardizer z;
        z.mean = j["standardize"].at("mean").get<std::vector<double>>();
        z.stdev = j["standardize"].at("std").get<std::vector<double>>();
        model.standardizer = z;
        model.z_score = true;
    } else {
        model.z_score = false;
    }
    return model;
}

}  // namespace harlog
