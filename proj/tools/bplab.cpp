// bplab command-line driver.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bplab/chat_client.hpp"
#include "bplab/dataset.hpp"
#include "bplab/error.hpp"
#include "bplab/experiment.hpp"
#include "bplab/generator.hpp"
#include "bplab/log.hpp"
#include "bplab/submartingale.hpp"

namespace fs = std::filesystem;
using namespace bplab;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    std::string out;
    int workers = 0;
    std::string endpoint;
    std::string mock;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Experiment config (key = value per line)");
    cmd->add_option("--set", c.overrides, "Override a config key, key=value (repeatable)");
    cmd->add_option("--seed", c.seed, "Master seed");
    cmd->add_option("--out", c.out, "Output directory");
    cmd->add_option("--workers", c.workers, "Worker threads");
    cmd->add_option("--endpoint", c.endpoint, "Chat-completions URL; selects the llm generator");
    cmd->add_option("--mock", c.mock, "Use the offline mock generator (conforming)")
        ->expected(0, 1)
        ->default_str("conforming");
}

exp::ExperimentConfig load_config(const CLI::App* cmd, const Common& c) {
    exp::KeyValues kv;
    if (!c.config.empty()) kv = exp::read_config_file(c.config);
    for (const auto& o : c.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + o + "'");
        kv[o.substr(0, eq)] = o.substr(eq + 1);
    }
    if (cmd->count("--seed")) kv["seed"] = std::to_string(c.seed);
    if (cmd->count("--out")) kv["output_dir"] = c.out;
    if (cmd->count("--workers")) kv["workers"] = std::to_string(c.workers);
    if (cmd->count("--endpoint")) {
        kv["endpoint"] = c.endpoint;
        kv["generator"] = "llm";
    }
    if (cmd->count("--mock")) kv["generator"] = "mock";
    return exp::ExperimentConfig::from_key_values(kv);
}

void print_sweep(const exp::SweepOutcome& o) {
    int failures = 0;
    for (const auto& r : o.records) failures += r.error.empty() ? 0 : 1;
    std::cout << o.records.size() << " records (" << failures << " failed) -> " << o.results_file.string() << "\n";
}

int cmd_prepare(const std::string& dataset, const std::string& path, const std::string& labels, int qubits,
                std::uint64_t seed, const std::string& out) {
    auto spec = data::DatasetSpec::standard(data::parse_dataset_name(dataset), path);
    spec.labels_path = labels;
    const auto raw = data::load_raw(spec);
    const auto ds = data::prepare(raw, spec, qubits, seed);
    const auto c = ds.counts();
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(ds.hash()));
    std::cout << ds.name << ": train " << c.train << ", val " << c.val << ", test " << c.test << ", dim " << ds.dim()
              << ", hash " << hash << "\n"
              << "reducer: " << ds.reducer_provenance << "\n";
    if (!out.empty()) {
        data::write_cache(out, ds);
        std::cout << "cache -> " << out << "\n";
    }
    return 0;
}

int cmd_lab(std::uint64_t seed, int trials, const std::string& out) {
    std::ofstream file;
    if (!out.empty()) {
        if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
        file.open(out, std::ios::trunc);
        if (!file) throw Error("cannot write " + out);
    }
    auto emit = [&](const std::string& line) {
        if (file) file << line << "\n";
    };
    bool ok = true;

    std::cout << "drift check, 1e5 samples per law\n";
    for (const auto& [name, proc] : mart::drift_laws(seed)) {
        const auto d = mart::drift_lower_bound_check(proc, 100000);
        ok = ok && d.passed;
        auto j = nlohmann::json::parse(mart::to_json(d));
        j["law"] = name;
        emit(j.dump());
        std::printf("  %-24s mean %.6f  bound %.6f  margin %+.6f  %s\n", name.c_str(), d.mean, d.bound, d.margin,
                    d.passed ? "ok" : "VIOLATED");
    }

    std::cout << "hitting-time grid, " << trials << " trials per cell\n";
    for (const auto& c : mart::theorem_grid(trials, derive_seed(seed, 1))) {
        ok = ok && c.report.bound_satisfied;
        emit(mart::to_json(c.report));
        std::printf("  alpha %-6g p %-4g b %-6g mean %-10.4f lcl99 %-10.4f bound %-10.4f %s\n", c.alpha, c.p, c.b,
                    c.report.empirical_mean, c.report.lower_confidence, c.report.theorem_bound,
                    c.report.bound_satisfied ? "ok" : (c.report.conclusive ? "VIOLATED" : "inconclusive"));
    }

    mart::CorollaryConfig cc;
    cc.trials = trials;
    cc.seed = derive_seed(seed, 2);
    const auto cor = mart::corollary_cases({2, 2, 3}, cc);
    for (const auto* r : {&cor.small_target, &cor.supremum}) {
        if (r->trials == 0) continue;
        ok = ok && r->bound_satisfied;
        emit(mart::to_json(*r));
        std::printf("  corollary b %-10g mean %-10.4f bound %-10.4f %s\n", r->b, r->empirical_mean, r->theorem_bound,
                    r->bound_satisfied ? "ok" : "VIOLATED");
    }
    return ok ? 0 : 1;
}

int cmd_validate(const Common& c, const CLI::App* cmd, const std::string& model) {
    gen::TextSource source;
    std::string label;
    if (cmd->count("--mock") || c.endpoint.empty()) {
        const std::string kind = c.mock.empty() ? "conforming" : c.mock;
        if (kind == "conforming") source = gen::conforming_mock(c.seed);
        else if (kind == "mutating") source = gen::shape_mutating_mock(c.seed);
        else throw InvalidArgument("--mock must be 'conforming' or 'mutating'");
        label = "mock:" + kind;
    } else {
        gen::EndpointConfig ec;
        ec.url = c.endpoint;
        if (!model.empty()) ec.model = model;
        source = gen::chat_source(std::make_shared<const gen::ChatClient>(ec));
        label = "llm:" + ec.model;
    }
    const auto report = gen::shape_accuracy(source);
    nlohmann::json j;
    j["generator"] = label;
    j["accuracy"] = report.accuracy;
    for (const auto& cs : report.cases) {
        j["cases"].push_back({{"nlayers", cs.nlayers}, {"nqubits", cs.nqubits}, {"accepted", cs.accepted},
                              {"diagnostic", cs.diagnostic}});
        std::printf("  L=%-3d N=%-3d %s %s\n", cs.nlayers, cs.nqubits, cs.accepted ? "ok      " : "rejected",
                    cs.diagnostic.c_str());
    }
    std::printf("%s shape accuracy %.0f%%\n", label.c_str(), 100.0 * report.accuracy);
    if (!c.out.empty()) {
        std::ofstream(c.out, std::ios::trunc) << j.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Barren-plateau initialisation lab"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    // prepare-data
    auto* prep = app.add_subcommand("prepare-data", "Load, subsample, split and reduce a dataset");
    std::string dataset = "iris", data_path, labels_path, cache_out;
    int qubits = 2;
    std::uint64_t prep_seed = 0;
    prep->add_option("--dataset", dataset, "iris | wine | titanic | mnist");
    prep->add_option("--data-path", data_path, "Source file (MNIST: directory or image file)");
    prep->add_option("--labels-path", labels_path, "MNIST label file");
    prep->add_option("--qubits", qubits, "Target feature dimension");
    prep->add_option("--seed", prep_seed, "Subsampling seed");
    prep->add_option("--out", cache_out, "Write the prepared dataset cache here");

    Common sweep_opts, ablate_opts, validate_opts;
    auto* sweep = app.add_subcommand("run-sweep", "Run every (point, repeat) cell of a sweep");
    add_common(sweep, sweep_opts);
    auto* ablate = app.add_subcommand("ablate-prompts", "Four-armed prompt ablation of an adainit sweep");
    add_common(ablate, ablate_opts);

    auto* lab = app.add_subcommand("submartingale-lab", "Monte Carlo checks of the hitting-time bounds");
    std::uint64_t lab_seed = 0;
    int trials = 1000;
    std::string lab_out;
    lab->add_option("--seed", lab_seed, "Master seed");
    lab->add_option("--trials", trials, "Trials per cell")->check(CLI::Range(100, 1000000));
    lab->add_option("--out", lab_out, "Line-delimited JSON report");

    auto* plots = app.add_subcommand("emit-plots", "Turn result files into plot tables");
    std::vector<std::string> result_files;
    std::string plots_out = "plots";
    plots->add_option("results", result_files, "results.jsonl files")->required();
    plots->add_option("--out", plots_out, "Directory for the CSV tables");

    auto* validate = app.add_subcommand("validate-generator", "Shape accuracy over the 20 circuit configurations");
    add_common(validate, validate_opts);
    std::string model;
    validate->add_option("--model", model, "Model name for --endpoint");

    CLI11_PARSE(app, argc, argv);
    if (verbose) log::set_min_level(log::Level::Info);

    try {
        if (*prep) return cmd_prepare(dataset, data_path, labels_path, qubits, prep_seed, cache_out);
        if (*sweep) {
            print_sweep(exp::run_sweep(load_config(sweep, sweep_opts)));
            return 0;
        }
        if (*ablate) {
            print_sweep(exp::ablate_prompts(load_config(ablate, ablate_opts)));
            return 0;
        }
        if (*lab) return cmd_lab(lab_seed, trials, lab_out);
        if (*plots) {
            std::vector<fs::path> files(result_files.begin(), result_files.end());
            for (const auto& p : exp::emit_plot_data(files, plots_out)) std::cout << p.string() << "\n";
            return 0;
        }
        if (*validate) return cmd_validate(validate_opts, validate, model);
    } catch (const gen::ConfigError& e) {
        std::cerr << "bplab: configuration error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << "bplab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "bplab: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
