// harlog command-line driver.
//
// Exit codes: 0 success, 1 validation/input error, 2 usage error.
// Errors are single lines on stderr with a machine-readable prefix:
//   usage-error:   bad flags or subcommands
//   input-error:   missing or unreadable files
//   schema-error:  files that exist but do not match the expected format

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "harlog/dataset.hpp"
#include "harlog/keypoints_synth.hpp"
#include "harlog/logic.hpp"
#include "harlog/mlp.hpp"
#include "harlog/pose.hpp"
#include "harlog/train.hpp"
#include "harlog/tree.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
namespace fs = std::filesystem;

void require_input(const std::string& path) {
    if (!fs::exists(path)) throw harlog::ValidationError("__input__ no such file: " + path);
}

// Every artifact carries the flags that produced it.
struct EffectiveConfig {
    std::string subcommand;
    json values = json::object();

    void set(const std::string& key, const json& v) { values[key] = v; }
    json to_json() const {
        json j = values;
        j["subcommand"] = subcommand;
        j["version"] = kVersion;
        return j;
    }
};

void write_json(const std::string& path, const json& j) {
    harlog::write_text_file_atomic(path, j.dump(2) + "\n");
}

harlog::Dataset load_dataset(const std::string& path) {
    require_input(path);
    return harlog::load_latent_csv(path);
}

harlog::FusionMode parse_mode(const std::string& name) {
    auto mode = harlog::fusion_mode_from_name(name);
    if (!mode)
        throw CLI::ValidationError("--mode", "unknown fusion mode '" + name +
                                                 "' (expected no_fused_1..4, early, delayed)");
    return *mode;
}

struct CommonTrainFlags {
    std::string data;
    std::string mode = "delayed";
    std::uint64_t seed = 0;
    std::size_t epochs = 20;
    double lr = 0.001;
    std::size_t batch = 16;
    double train_fraction = 0.8;
    bool no_zscore = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--data", data, "latent feature CSV")->required();
        cmd->add_option("--mode", mode, "fusion mode (no_fused_1..4, early, delayed)");
        cmd->add_option("--seed", seed, "run seed");
        cmd->add_option("--epochs", epochs, "training epochs");
        cmd->add_option("--lr", lr, "learning rate");
        cmd->add_option("--batch", batch, "mini-batch size");
        cmd->add_option("--train-fraction", train_fraction, "train split fraction");
        cmd->add_flag("--no-zscore", no_zscore, "disable feature standardization");
    }
    harlog::TrainConfig to_config() const {
        harlog::TrainConfig cfg;
        cfg.seed = seed;
        cfg.epochs = epochs;
        cfg.learning_rate = lr;
        cfg.batch_size = batch;
        cfg.train_fraction = train_fraction;
        cfg.z_score = !no_zscore;
        cfg.mode = parse_mode(mode);
        return cfg;
    }
    void record(EffectiveConfig& ec) const {
        ec.set("data", data);
        ec.set("mode", mode);
        ec.set("seed", seed);
        ec.set("epochs", epochs);
        ec.set("learning_rate", lr);
        ec.set("batch_size", batch);
        ec.set("train_fraction", train_fraction);
        ec.set("z_score", !no_zscore);
    }
};

// Split a labelled dataset into fused train/test views with one seed.
std::pair<harlog::FusedData, harlog::FusedData> split_fused(const harlog::Dataset& data,
                                                            const harlog::TrainConfig& cfg) {
    harlog::SplitSpec spec;
    spec.train_fraction = cfg.train_fraction;
    spec.seed = cfg.seed;
    auto [tr, te] = harlog::split(data, spec);
    return {harlog::fuse_dataset(data, cfg.mode, tr), harlog::fuse_dataset(data, cfg.mode, te)};
}

json report_json(const harlog::EvalReport& report, const EffectiveConfig& ec, std::uint64_t seed) {
    json j = harlog::report_to_json(report);
    j["config"] = ec.to_json();
    j["seed"] = seed;
    return j;
}

void print_confusion(const json& report) {
    const auto& names = report.at("activities");
    const auto& confusion = report.at("confusion");
    std::ostringstream out;
    out << "true\\pred";
    for (const auto& n : names) out << '\t' << n.get<std::string>();
    out << '\n';
    for (std::size_t r = 0; r < names.size(); ++r) {
        out << names[r].get<std::string>();
        for (std::size_t c = 0; c < names.size(); ++c) out << '\t' << confusion[r][c].get<std::size_t>();
        out << '\n';
    }
    std::cout << out.str();
}

std::string loss_curve_csv(std::span<const double> curve) {
    std::string out = "epoch,mean_nll\n";
    for (std::size_t e = 0; e < curve.size(); ++e)
        out += std::to_string(e + 1) + "," + harlog::num_str(curve[e]) + "\n";
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"harlog: limb-angle features, a concept decision tree, and a differentiable logic "
                 "program over six tiny neural nets for activity recognition"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file mirroring the flags ([subcommand] sections)");
    app.set_version_flag("--version", std::string("harlog ") + kVersion);

    // ---- synth ----------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate synthetic inputs");
    synth->require_subcommand(1);

    auto* synth_kp = synth->add_subcommand("keypoints", "sinusoidal-archetype pose traces as JSONL");
    std::string kp_activity;
    double kp_seconds = 80.0, kp_fps = 30.0, kp_jitter = 1.0;
    std::uint64_t kp_seed = 0;
    std::string kp_out;
    synth_kp->add_option("--activity", kp_activity, "walk|run|squat|jump|wave|clap|wipe")->required();
    synth_kp->add_option("--seconds", kp_seconds, "trace length in seconds");
    synth_kp->add_option("--fps", kp_fps, "frames per second");
    synth_kp->add_option("--jitter", kp_jitter, "per-keypoint pixel noise sigma");
    synth_kp->add_option("--seed", kp_seed, "rng seed");
    synth_kp->add_option("-o,--out", kp_out, "output JSONL path")->required();
    synth_kp->callback([&] {
        auto activity = harlog::activity_index(kp_activity);
        if (!activity) throw CLI::ValidationError("--activity", "unknown activity '" + kp_activity + "'");
        auto frames = harlog::synth_keypoints(*activity, kp_seconds, kp_fps, kp_seed, kp_jitter);
        harlog::write_text_file_atomic(kp_out, harlog::keypoints_to_jsonl(frames));
        std::cout << "wrote " << frames.size() << " frames to " << kp_out << "\n";
    });

    auto* synth_lat = synth->add_subcommand("latent", "synthetic compressed-CSI latent features as CSV");
    std::string lat_mode = "delayed", lat_out;
    std::size_t lat_per_class = 500;
    double lat_sep = 3.0;
    std::uint64_t lat_seed = 0;
    synth_lat->add_option("--mode", lat_mode, "fusion mode of the generated file");
    synth_lat->add_option("--per-class", lat_per_class, "samples per activity");
    synth_lat->add_option("--sep", lat_sep, "class separation factor");
    synth_lat->add_option("--seed", lat_seed, "rng seed");
    synth_lat->add_option("-o,--out", lat_out, "output CSV path")->required();
    synth_lat->callback([&] {
        auto data = harlog::synth_latent(lat_per_class, parse_mode(lat_mode), lat_sep, lat_seed);
        harlog::write_text_file_atomic(lat_out, harlog::latent_to_csv(data));
        std::cout << "wrote " << data.samples.size() << " samples to " << lat_out << "\n";
    });

    // ---- features -------------------------------------------------------
    auto* features = app.add_subcommand("features", "limb-angle dynamic-range features");
    features->require_subcommand(1);
    auto* fx = features->add_subcommand("extract", "keypoints JSONL -> feature CSV");
    std::string fx_keypoints, fx_limb_map, fx_out, fx_label;
    double fx_window = 3.0, fx_fps = 30.0;
    std::size_t fx_stride = 1;
    fx->add_option("--keypoints", fx_keypoints, "input JSONL")->required();
    fx->add_option("--limb-map", fx_limb_map, "limb->joint index map JSON (default: COCO-17)");
    fx->add_option("--window", fx_window, "window length in seconds");
    fx->add_option("--fps", fx_fps, "frames per second");
    fx->add_option("--stride", fx_stride, "window stride in frames");
    fx->add_option("--label", fx_label, "activity label stamped on every row");
    fx->add_option("-o,--out", fx_out, "output CSV path")->required();
    fx->callback([&] {
        require_input(fx_keypoints);
        auto frames = harlog::load_keypoints_jsonl(fx_keypoints);
        harlog::LimbMap limbs = harlog::default_limb_map();
        if (!fx_limb_map.empty()) {
            require_input(fx_limb_map);
            limbs = harlog::load_limb_map(fx_limb_map);
        }
        harlog::WindowConfig cfg{fx_window, fx_fps, fx_stride};
        harlog::ExtractReport rep;
        std::optional<std::string> label;
        if (!fx_label.empty()) label = fx_label;
        auto rows = harlog::extract_features(frames, limbs, cfg, &rep, label);
        harlog::write_text_file_atomic(fx_out, harlog::features_to_csv(rows));
        std::cout << "windows emitted: " << rep.windows_emitted << ", skipped: " << rep.windows_skipped
                  << "\n";
    });

    // ---- tree -----------------------------------------------------------
    auto* tree_cmd = app.add_subcommand("tree", "concept decision tree");
    tree_cmd->require_subcommand(1);

    auto* tree_fit = tree_cmd->add_subcommand("fit", "fit node thresholds on labelled features");
    std::vector<std::string> tf_features;
    std::string tf_out;
    tree_fit->add_option("--features", tf_features, "labelled feature CSV (repeatable)")->required();
    tree_fit->add_option("-o,--out", tf_out, "output tree JSON")->required();
    tree_fit->callback([&] {
        std::vector<harlog::MotionFeatureVector> rows;
        for (const auto& path : tf_features) {
            require_input(path);
            auto part = harlog::load_features_csv(path);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        auto tree = harlog::fit_thresholds(rows);
        EffectiveConfig ec{"tree fit"};
        ec.set("features", tf_features);
        json j = harlog::tree_to_json(tree);
        j["config"] = ec.to_json();
        write_json(tf_out, j);
        std::cout << "fitted thresholds on " << rows.size() << " windows -> " << tf_out << "\n";
    });

    auto* tree_eval = tree_cmd->add_subcommand("eval", "classify features with a fitted tree");
    std::vector<std::string> te_features;
    std::string te_tree, te_report;
    tree_eval->add_option("--features", te_features, "labelled feature CSV (repeatable)")->required();
    tree_eval->add_option("--tree", te_tree, "tree JSON")->required();
    tree_eval->add_option("--report", te_report, "output report JSON")->required();
    tree_eval->callback([&] {
        require_input(te_tree);
        auto tree = harlog::load_tree(te_tree);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& path : te_features) {
            require_input(path);
            for (const auto& row : harlog::load_features_csv(path)) {
                if (!row.label) throw harlog::ValidationError(path + ": row without label");
                auto truth = harlog::activity_index(*row.label);
                if (!truth) throw harlog::ValidationError(path + ": unknown label '" + *row.label + "'");
                pairs.emplace_back(*truth, harlog::classify_tree(tree, row.delta));
            }
        }
        auto report = harlog::metrics_from_pairs(pairs);
        EffectiveConfig ec{"tree eval"};
        ec.set("features", te_features);
        ec.set("tree", te_tree);
        write_json(te_report, report_json(report, ec, 0));
        std::cout << "accuracy " << report.accuracy << " on " << pairs.size() << " windows\n";
    });

    // ---- program --------------------------------------------------------
    auto* program = app.add_subcommand("program", "logic program emission");
    program->require_subcommand(1);
    auto* emit = program->add_subcommand("emit", "tree JSON -> logic program text");
    std::string pe_tree, pe_out;
    emit->add_option("--tree", pe_tree, "tree JSON")->required();
    emit->add_option("-o,--out", pe_out, "output program path")->required();
    emit->callback([&] {
        require_input(pe_tree);
        auto source = harlog::emit_program(harlog::load_tree(pe_tree));
        harlog::write_text_file_atomic(pe_out, source);
        std::cout << "wrote program to " << pe_out << "\n";
    });

    // ---- logic ----------------------------------------------------------
    auto* logic_cmd = app.add_subcommand("logic", "probabilistic logic engine");
    logic_cmd->require_subcommand(1);

    auto* lcheck = logic_cmd->add_subcommand("check", "parse and validate a program");
    std::string lc_file;
    lcheck->add_option("file", lc_file, "program file")->required();
    lcheck->callback([&] {
        require_input(lc_file);
        auto prog = harlog::logic::parse_program(harlog::read_text_file(lc_file));
        std::cout << "ok: " << prog.facts.size() << " facts, " << prog.nads.size() << " neural ADs, "
                  << prog.rules.size() << " rules, " << prog.queries.size() << " queries\n";
    });

    auto* linfer = logic_cmd->add_subcommand("infer", "exact query probabilities by model counting");
    std::string li_file, li_probs, li_out;
    linfer->add_option("file", li_file, "program file")->required();
    linfer->add_option("--probs", li_probs, "CSV of `variable,probability` overrides (netK or fact atom)");
    linfer->add_option("-o,--out", li_out, "write results as JSON instead of stdout");
    linfer->callback([&] {
        require_input(li_file);
        auto prog = harlog::logic::parse_program(harlog::read_text_file(li_file));
        std::vector<double> probs = prog.default_leaf_probs();
        if (!li_probs.empty()) {
            require_input(li_probs);
            std::istringstream in(harlog::read_text_file(li_probs));
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (line.empty()) continue;
                auto cells = harlog::split_csv_line(line);
                if (cells.size() != 2)
                    throw harlog::ValidationError(li_probs + ":" + std::to_string(line_no) +
                                                  ": expected `variable,probability`");
                auto var = prog.var_by_name(cells[0]);
                if (!var)
                    throw harlog::ValidationError(li_probs + ":" + std::to_string(line_no) +
                                                  ": unknown variable '" + cells[0] + "'");
                double p = std::stod(cells[1]);
                if (!(p >= 0.0 && p <= 1.0))
                    throw harlog::ValidationError(li_probs + ":" + std::to_string(line_no) +
                                                  ": probability out of [0,1]");
                probs[*var] = p;
            }
        }
        json results = json::object();
        for (const auto& q : prog.queries) {
            auto circuit = harlog::logic::ground_and_compile(prog, q);
            results[harlog::logic::atom_to_string(q)] = harlog::logic::wmc(circuit, probs);
        }
        if (li_out.empty()) {
            std::cout << results.dump(2) << "\n";
        } else {
            write_json(li_out, results);
            std::cout << "wrote " << results.size() << " query results to " << li_out << "\n";
        }
    });

    // ---- train ----------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "end-to-end training from activity labels");
    CommonTrainFlags tr_flags;
    tr_flags.attach(train_cmd);
    std::string tr_program, tr_model, tr_report, tr_loss_curve;
    train_cmd->add_option("--program", tr_program, "logic program (default: canonical tree program)");
    train_cmd->add_option("--model", tr_model, "output model bundle JSON")->required();
    train_cmd->add_option("--report", tr_report, "output held-out evaluation report JSON");
    train_cmd->add_option("--loss-curve", tr_loss_curve, "output per-epoch loss CSV");
    train_cmd->callback([&] {
        auto cfg = tr_flags.to_config();
        auto data = load_dataset(tr_flags.data);
        auto [train_set, test_set] = split_fused(data, cfg);
        std::string source;
        if (tr_program.empty()) {
            source = harlog::emit_program(harlog::canonical_tree());
        } else {
            require_input(tr_program);
            source = harlog::read_text_file(tr_program);
        }
        auto model = harlog::train(source, train_set, cfg);

        EffectiveConfig ec{"train"};
        tr_flags.record(ec);
        ec.set("program", tr_program.empty() ? "<canonical>" : tr_program);

        json bundle = harlog::model_to_json(model);
        bundle["config"] = ec.to_json();
        write_json(tr_model, bundle);
        if (!tr_loss_curve.empty())
            harlog::write_text_file_atomic(tr_loss_curve, loss_curve_csv(model.loss_curve));

        auto report = harlog::evaluate(model, test_set);
        report.per_net_acc = harlog::concept_accuracy(model, test_set, harlog::canonical_tree());
        if (!tr_report.empty()) write_json(tr_report, report_json(report, ec, cfg.seed));
        std::cout << "final train NLL " << model.loss_curve.back() << ", held-out accuracy "
                  << report.accuracy << "\n";
        if (model.clamp_warnings)
            std::cerr << "warning: true-query probability clamped " << model.clamp_warnings << " times\n";
    });

    // ---- eval -----------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model bundle");
    std::string ev_model, ev_data, ev_report, ev_mode;
    bool ev_all_samples = false;
    eval_cmd->add_option("--model", ev_model, "model bundle JSON")->required();
    eval_cmd->add_option("--data", ev_data, "latent feature CSV")->required();
    eval_cmd->add_option("--report", ev_report, "output report JSON")->required();
    eval_cmd->add_flag("--all-samples", ev_all_samples,
                       "measure concept accuracy on every sample, not only routed ones");
    eval_cmd->callback([&] {
        require_input(ev_model);
        auto model = harlog::model_from_json(json::parse(harlog::read_text_file(ev_model)));
        auto data = load_dataset(ev_data);
        std::vector<std::size_t> all(data.samples.size());
        std::iota(all.begin(), all.end(), 0);
        auto fused = harlog::fuse_dataset(data, model.mode, all);
        auto report = harlog::evaluate(model, fused);
        report.per_net_acc =
            harlog::concept_accuracy(model, fused, harlog::canonical_tree(), !ev_all_samples);
        EffectiveConfig ec{"eval"};
        ec.set("model", ev_model);
        ec.set("data", ev_data);
        ec.set("all_samples", ev_all_samples);
        write_json(ev_report, report_json(report, ec, model.seed));
        std::cout << "accuracy " << report.accuracy << " on " << fused.x.size() << " samples\n";
    });

    // ---- baseline -------------------------------------------------------
    auto* baseline_cmd = app.add_subcommand("baseline", "plain softmax MLP on fused features");
    CommonTrainFlags bl_flags;
    bl_flags.attach(baseline_cmd);
    std::string bl_kind = "small", bl_report;
    baseline_cmd->add_option("--kind", bl_kind, "small (8-wide) or large (22-wide)");
    baseline_cmd->add_option("--report", bl_report, "output report JSON")->required();
    baseline_cmd->callback([&] {
        harlog::BaselineKind kind;
        if (bl_kind == "small")
            kind = harlog::BaselineKind::Small;
        else if (bl_kind == "large")
            kind = harlog::BaselineKind::Large;
        else
            throw CLI::ValidationError("--kind", "expected 'small' or 'large'");
        auto cfg = bl_flags.to_config();
        auto data = load_dataset(bl_flags.data);
        auto [train_set, test_set] = split_fused(data, cfg);
        auto model = harlog::train_baseline(kind, train_set, cfg);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < test_set.x.size(); ++i)
            pairs.emplace_back(test_set.y[i], model.predict(test_set.x[i]));
        auto report = harlog::metrics_from_pairs(pairs);
        EffectiveConfig ec{"baseline"};
        bl_flags.record(ec);
        ec.set("kind", bl_kind);
        ec.set("param_count", model.net.num_params());
        write_json(bl_report, report_json(report, ec, cfg.seed));
        std::cout << "baseline (" << bl_kind << ", " << model.net.num_params() << " params) accuracy "
                  << report.accuracy << "\n";
    });

    // ---- specialists ----------------------------------------------------
    auto* spec_cmd = app.add_subcommand("specialists", "six independently supervised concept nets");
    CommonTrainFlags sp_flags;
    sp_flags.attach(spec_cmd);
    std::string sp_report;
    spec_cmd->add_option("--report", sp_report, "output report JSON")->required();
    spec_cmd->callback([&] {
        auto cfg = sp_flags.to_config();
        auto data = load_dataset(sp_flags.data);
        auto [train_set, test_set] = split_fused(data, cfg);
        auto tree = harlog::canonical_tree();
        auto specialists = harlog::train_concept_specialists(train_set, tree, cfg);
        auto acc = harlog::specialist_accuracy(specialists, test_set, tree);
        EffectiveConfig ec{"specialists"};
        sp_flags.record(ec);
        json per_net = json::object();
        std::array<double, harlog::kNumConcepts> flat{};
        for (std::size_t k = 0; k < harlog::kNumConcepts; ++k) {
            per_net["net" + std::to_string(k + 1)] = acc[k] ? json(*acc[k]) : json(nullptr);
            flat[k] = acc[k].value_or(0.0);
        }
        json j{{"per_net_acc", per_net},
               {"predicted_overall", harlog::independence_analysis(flat, tree)},
               {"config", ec.to_json()},
               {"seed", cfg.seed}};
        write_json(sp_report, j);
        std::cout << "specialist accuracies written to " << sp_report << "\n";
    });

    // ---- analyze --------------------------------------------------------
    auto* analyze = app.add_subcommand("analyze", "post-hoc analyses of reports");
    analyze->require_subcommand(1);
    auto* indep = analyze->add_subcommand(
        "independence", "predict overall accuracy from per-net accuracies under independence");
    std::string in_report, in_out;
    indep->add_option("--report", in_report, "report JSON containing per_net_acc")->required();
    indep->add_option("-o,--out", in_out, "write analysis JSON instead of stdout");
    indep->callback([&] {
        require_input(in_report);
        json report = json::parse(harlog::read_text_file(in_report));
        if (!report.contains("per_net_acc") || report["per_net_acc"].is_null())
            throw harlog::ValidationError(in_report + ": report has no per_net_acc block");
        std::array<double, harlog::kNumConcepts> acc{};
        for (std::size_t k = 0; k < harlog::kNumConcepts; ++k) {
            std::string key = "net" + std::to_string(k + 1);
            if (!report["per_net_acc"].contains(key))
                throw harlog::ValidationError(in_report + ": per_net_acc is missing " + key);
            acc[k] = report["per_net_acc"][key].get<double>();
        }
        auto tree = harlog::canonical_tree();
        json per_activity = json::object();
        for (std::size_t a = 0; a < harlog::kNumActivities; ++a) {
            double p = 1.0;
            for (auto [node, outcome] : harlog::activity_path(tree, a)) {
                (void)outcome;
                p *= acc[node];
            }
            per_activity[harlog::kActivityNames[a]] = p;
        }
        json j{{"per_activity_product", per_activity},
               {"predicted_overall", harlog::independence_analysis(acc, tree)}};
        if (report.contains("metrics") && report["metrics"].contains("accuracy"))
            j["measured_overall"] = report["metrics"]["accuracy"];
        if (in_out.empty()) {
            std::cout << j.dump(2) << "\n";
        } else {
            write_json(in_out, j);
            std::cout << "wrote analysis to " << in_out << "\n";
        }
    });

    // ---- report ---------------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "render saved reports");
    report_cmd->require_subcommand(1);
    auto* confusion = report_cmd->add_subcommand("confusion", "text-grid confusion matrix");
    std::string rc_report;
    confusion->add_option("--report", rc_report, "report JSON")->required();
    confusion->callback([&] {
        require_input(rc_report);
        print_confusion(json::parse(harlog::read_text_file(rc_report)));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "usage-error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const harlog::ValidationError& e) {
        std::string msg = e.what();
        const std::string marker = "__input__ ";
        if (msg.rfind(marker, 0) == 0) {
            std::cerr << "input-error: " << msg.substr(marker.size()) << "\n";
        } else {
            std::cerr << "schema-error: " << msg << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "input-error: " << e.what() << "\n";
        return 1;
    }
}
