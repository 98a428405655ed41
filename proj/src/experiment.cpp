#include "bplab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "bplab/error.hpp"
#include "bplab/log.hpp"
#include "bplab/random.hpp"

namespace bplab::exp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "bplab-results/1";

std::string default_description(const ExperimentConfig& cfg, const data::PreparedDataset& ds) {
    std::ostringstream os;
    os << data::to_string(cfg.dataset) << " subset restricted to classes 0 and 1; " << ds.train.size()
       << " training rows; each row is " << ds.dim() << " features scaled to [0, pi] and angle-encoded, one per qubit.";
    return os.str();
}

std::unique_ptr<gen::ParamGenerator> make_generator(const ExperimentConfig& cfg, std::uint64_t seed) {
    switch (cfg.generator) {
        case GeneratorKind::Surrogate: return std::make_unique<gen::SurrogateGenerator>(gen::SurrogateConfig{cfg.surrogate_sigma});
        case GeneratorKind::Mock: return std::make_unique<gen::TextGenerator>(gen::conforming_mock(seed), "mock");
        case GeneratorKind::Llm: {
            auto client = std::make_shared<const gen::ChatClient>(cfg.endpoint);
            return std::make_unique<gen::TextGenerator>(gen::chat_source(client), "llm:" + cfg.endpoint.model);
        }
    }
    throw InvalidArgument("unknown generator");
}

json record_to_json(const ResultRecord& r) {
    json j;
    j["type"] = "record";
    j["method"] = r.method;
    j["arm"] = r.arm;
    j["axis"] = r.axis;
    j["point"] = r.point;
    j["repeat"] = r.repeat;
    j["seed"] = r.seed;
    j["variance"] = r.error.empty() ? json(r.variance) : json(nullptr);
    j["iterations_used"] = r.iterations_used ? json(*r.iterations_used) : json(nullptr);
    j["final_S"] = r.final_S ? json(*r.final_S) : json(nullptr);
    j["train_size"] = r.train_size;
    j["history_file"] = r.history_file;
    j["error"] = r.error;
    // Timing lives under one key so determinism checks can drop it.
    j["wall_time"] = {{"cell_seconds", r.wall_time}, {"mean_epoch_seconds", r.mean_epoch_seconds}};
    return j;
}

ResultRecord record_from_json(const json& j) {
    ResultRecord r;
    r.method = j.at("method").get<std::string>();
    r.arm = j.value("arm", "");
    r.axis = j.at("axis").get<std::string>();
    r.point = j.at("point").get<int>();
    r.repeat = j.at("repeat").get<int>();
    r.seed = j.value("seed", std::uint64_t{0});
    if (!j.at("variance").is_null()) r.variance = j.at("variance").get<double>();
    if (j.contains("iterations_used") && !j["iterations_used"].is_null()) r.iterations_used = j["iterations_used"].get<int>();
    if (j.contains("final_S") && !j["final_S"].is_null()) r.final_S = j["final_S"].get<double>();
    r.train_size = j.value("train_size", std::size_t{0});
    r.history_file = j.value("history_file", "");
    r.error = j.value("error", "");
    if (j.contains("wall_time")) {
        r.wall_time = j["wall_time"].value("cell_seconds", 0.0);
        r.mean_epoch_seconds = j["wall_time"].value("mean_epoch_seconds", 0.0);
    }
    return r;
}

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
};

// Population standard deviation, the usual band around a mean curve.
Stats stats(const std::vector<double>& v) {
    Stats s;
    s.n = v.size();
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size()));
    return s;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string history_name(const std::string& arm, int point, int repeat) {
    return "histories/" + (arm.empty() ? std::string("cell") : arm) + "_p" + std::to_string(point) + "_r" +
           std::to_string(repeat) + ".jsonl";
}

SweepOutcome run_cells(const ExperimentConfig& cfg, const std::vector<PromptArm>& arms) {
    cfg.validate();
    const auto dspec = data::DatasetSpec::standard(cfg.dataset, cfg.data_path);
    auto dspec_full = dspec;
    dspec_full.labels_path = cfg.labels_path;
    const data::RawTable raw = data::load_raw(dspec_full);

    // Fail at startup, not per cell, when the endpoint or credential is missing.
    if (cfg.method == Method::AdaInit && cfg.generator == GeneratorKind::Llm) gen::ChatClient probe(cfg.endpoint);

    fs::create_directories(cfg.output_dir);
    if (cfg.method == Method::AdaInit) fs::create_directories(cfg.output_dir / "histories");

    const auto points = cfg.sweep_points();
    struct Cell {
        std::size_t arm, point;
        int repeat;
    };
    std::vector<Cell> cells;
    for (std::size_t a = 0; a < arms.size(); ++a) {
        for (std::size_t p = 0; p < points.size(); ++p) {
            for (int r = 0; r < cfg.repeats; ++r) cells.push_back({a, p, r});
        }
    }

    json header;
    header["type"] = "header";
    header["format"] = kFormat;
    header["fingerprint"] = cfg.fingerprint();
    header["sweep_fingerprint"] = cfg.sweep_fingerprint();
    header["method"] = cfg.method_label();
    header["axis"] = to_string(cfg.axis);
    header["config"] = cfg.to_key_values();
    json arm_names = json::array();
    for (const auto& a : arms) arm_names.push_back(a.name);
    header["arms"] = arm_names;

    const fs::path results = cfg.output_dir / "results.jsonl";
    std::ofstream out(results, std::ios::trunc);
    if (!out) throw Error("cannot write " + results.string());
    out << header.dump() << "\n" << std::flush;

    std::vector<std::optional<ResultRecord>> done(cells.size());
    std::mutex writer;
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                const Cell& c = cells[i];
                ExperimentConfig cell_cfg = cfg;
                cell_cfg.arm = arms[c.arm];
                std::vector<adainit::IterationRecord> history;
                ResultRecord rec = run_cell(cell_cfg, raw, c.point, c.repeat, &history);
                if (cfg.method == Method::AdaInit) {
                    rec.history_file = history_name(rec.arm, rec.point, rec.repeat);
                    std::ofstream h(cfg.output_dir / rec.history_file, std::ios::trunc);
                    adainit::write_history(h, history);
                }
                std::lock_guard lock(writer);
                out << record_to_json(rec).dump() << "\n" << std::flush;
                done[i] = std::move(rec);
            } catch (...) {
                std::lock_guard lock(writer);
                if (!fatal) fatal = std::current_exception();
                next = cells.size();
                return;
            }
        }
    };

    const int nthreads = std::max(1, std::min<int>(cfg.workers, static_cast<int>(cells.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    }
    out.close();
    if (fatal) std::rethrow_exception(fatal);

    // Cells are already in canonical order (arm, point, repeat); rewrite the
    // file that way so worker scheduling never shows in its contents.
    SweepOutcome outcome;
    outcome.results_file = results;
    for (auto& d : done) outcome.records.push_back(std::move(*d));
    const fs::path tmp = results.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        f << header.dump() << "\n";
        for (const auto& r : outcome.records) f << record_to_json(r).dump() << "\n";
        if (!f) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, results);

    std::ofstream summary(cfg.output_dir / "summary.csv", std::ios::trunc);
    summary << "method,arm,point,mean_variance,std_variance,repeats,failures\n";
    for (std::size_t a = 0; a < arms.size(); ++a) {
        for (int p : points) {
            std::vector<double> v;
            int failures = 0;
            for (const auto& r : outcome.records) {
                if (r.arm != arms[a].name || r.point != p) continue;
                if (r.error.empty()) v.push_back(r.variance);
                else ++failures;
            }
            const Stats s = stats(v);
            summary << cfg.method_label() << "," << arms[a].name << "," << p << "," << num(s.mean) << ","
                    << num(s.stddev) << "," << s.n << "," << failures << "\n";
        }
    }
    return outcome;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t master, std::size_t point_index, int repeat) {
    return derive_seed(master, point_index, static_cast<std::uint64_t>(repeat));
}

double restart_variance(const qnn::CircuitSpec& spec, const init::InitSpec& init, const qnn::LabeledData& train,
                        int restarts, std::uint64_t seed, std::size_t probe_index) {
    if (restarts < 2) throw InvalidArgument("restart variance needs at least 2 restarts");
    std::vector<double> g(static_cast<std::size_t>(restarts));
    init::InitSpec s = init;
    for (int r = 0; r < restarts; ++r) {
        s.seed = derive_seed(seed, static_cast<std::uint64_t>(r));
        const auto params = init::sample_params(spec, s, 2);
        g[static_cast<std::size_t>(r)] = qnn::probe_gradient(spec, params, train, probe_index);
    }
    return qnn::summarize_gradients(g, probe_index).variance;
}

ResultRecord run_cell(const ExperimentConfig& cfg, const data::RawTable& raw, std::size_t point_index, int repeat,
                      std::vector<adainit::IterationRecord>* history) {
    const auto points = cfg.sweep_points();
    if (point_index >= points.size()) throw IndexError("sweep point index out of range");
    const int point = points[point_index];
    const auto spec = cfg.circuit_at(point);

    ResultRecord rec;
    rec.method = cfg.method_label();
    rec.arm = cfg.arm.name;
    rec.axis = to_string(cfg.axis);
    rec.point = point;
    rec.repeat = repeat;
    rec.seed = cell_seed(cfg.seed, point_index, repeat);

    // Sub-seeds: 1 data split, 2 initial parameters, 3 minibatch order,
    // 4 search loop, 5 mock text source.
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto dspec = data::DatasetSpec::standard(cfg.dataset, cfg.data_path);
        const auto ds = data::prepare(raw, dspec, spec.num_qubits, derive_seed(rec.seed, 1));
        rec.train_size = ds.train.size();
        qnn::TrainConfig tcfg = cfg.train;
        tcfg.seed = derive_seed(rec.seed, 3);

        if (cfg.method == Method::Classic) {
            if (cfg.variance_mode == VarianceMode::Restarts) {
                rec.variance = restart_variance(spec, cfg.init, ds.train, cfg.restarts, derive_seed(rec.seed, 2),
                                                tcfg.probe_index);
            } else {
                init::InitSpec is = cfg.init;
                is.seed = derive_seed(rec.seed, 2);
                const auto report = qnn::train_and_probe(spec, init::sample_params(spec, is, 2), ds.train, tcfg);
                rec.variance = report.variance;
                rec.mean_epoch_seconds = report.mean_epoch_seconds;
                if (report.gradient_bound_exceeded) {
                    log::warn("cell point=" + std::to_string(point) + " repeat=" + std::to_string(repeat) +
                              ": gradient bound exceeded");
                }
            }
        } else {
            auto generator = make_generator(cfg, derive_seed(rec.seed, 5));
            const auto inner = adainit::training_evaluator(spec, ds.train, tcfg);
            double epoch_seconds = 0.0;
            int evaluations = 0;
            adainit::Evaluator evaluate = [&](const qnn::QnnParams& p, int t) {
                auto rep = inner(p, t);
                epoch_seconds += rep.mean_epoch_seconds;
                ++evaluations;
                return rep;
            };
            adainit::AdaInitConfig acfg;
            acfg.iterations = cfg.iterations;
            acfg.threshold.K = cfg.effective_K();
            acfg.threshold.poly = cfg.poly;
            acfg.prompt.nlayers = spec.num_layers;
            acfg.prompt.nqubits = spec.num_qubits;
            acfg.prompt.nrot = spec.num_rotations;
            acfg.prompt.nclasses = 2;
            acfg.prompt.init_family = std::string(init::family_name(cfg.init.family));
            acfg.prompt.data_desc = cfg.data_desc.empty() ? default_description(cfg, ds) : cfg.data_desc;
            acfg.prompt.temperature = cfg.temperature;
            acfg.prompt.top_p = cfg.top_p;
            acfg.seed = derive_seed(rec.seed, 4);
            acfg.use_description = cfg.arm.use_description;
            acfg.use_feedback = cfg.arm.use_feedback;
            const auto result = adainit::run_adainit(spec, *generator, evaluate, acfg);
            rec.variance = result.state.S;
            rec.final_S = result.state.S;
            rec.iterations_used = result.iterations_used();
            rec.mean_epoch_seconds = evaluations ? epoch_seconds / evaluations : 0.0;
            if (result.aborted) rec.error = "aborted: " + result.abort_reason;
            if (history) *history = result.state.history;
        }
    } catch (const gen::ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        rec.error = e.what();
        log::warn("cell point=" + std::to_string(point) + " repeat=" + std::to_string(repeat) + " failed: " + e.what());
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

SweepOutcome run_sweep(const ExperimentConfig& cfg) { return run_cells(cfg, {cfg.arm}); }

SweepOutcome ablate_prompts(const ExperimentConfig& cfg) {
    if (cfg.method != Method::AdaInit) throw InvalidArgument("prompt ablation needs method = adainit");
    return run_cells(cfg, ablation_arms());
}

ResultFile read_results(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open result file " + path.string());
    ResultFile rf;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            // Only a torn final line from an interrupted sweep is tolerated.
            if (in.peek() == std::char_traits<char>::eof()) {
                log::warn("ignoring truncated last line of " + path.string());
                break;
            }
            throw DataError("malformed line in " + path.string());
        }
        const auto type = j.value("type", "");
        if (!have_header) {
            if (type != "header" || j.value("format", "") != kFormat) {
                throw DataError(path.string() + " is not a result file");
            }
            rf.header = j;
            have_header = true;
        } else if (type == "record") {
            rf.records.push_back(record_from_json(j));
        }
    }
    if (!have_header) throw DataError(path.string() + " is empty");
    return rf;
}

std::vector<fs::path> emit_plot_data(const std::vector<fs::path>& result_files, const fs::path& out_dir) {
    if (result_files.empty()) throw InvalidArgument("emit_plot_data needs at least one result file");
    struct Loaded {
        fs::path path;
        ResultFile file;
    };
    std::vector<Loaded> files;
    for (const auto& p : result_files) files.push_back({p, read_results(p)});

    std::map<std::string, std::string> axis_fp;
    for (const auto& f : files) {
        const auto axis = f.file.header.at("axis").get<std::string>();
        const auto fp = f.file.header.at("sweep_fingerprint").get<std::string>();
        auto [it, fresh] = axis_fp.emplace(axis, fp);
        if (!fresh && it->second != fp) {
            throw InvalidArgument("incompatible sweeps on axis '" + axis + "': " + f.path.string() +
                                  " has sweep fingerprint " + fp + ", expected " + it->second);
        }
    }

    fs::create_directories(out_dir);
    std::vector<fs::path> written;
    auto open = [&](const std::string& name, const std::string& columns) {
        written.push_back(out_dir / name);
        std::ofstream o(written.back(), std::ios::trunc);
        if (!o) throw Error("cannot write " + written.back().string());
        o << columns << "\n";
        return o;
    };

    // (method, arm, point) -> variances, per axis.
    using Key = std::tuple<std::string, std::string, int>;
    struct Group {
        std::vector<double> values;
        int failures = 0;
    };
    std::map<std::string, std::map<Key, Group>> by_axis;
    for (const auto& f : files) {
        for (const auto& r : f.file.records) {
            auto& g = by_axis[r.axis][{r.method, r.arm, r.point}];
            if (r.error.empty()) g.values.push_back(r.variance);
            else ++g.failures;
        }
    }

    for (const std::string axis : {"qubits", "layers"}) {
        const std::string col = axis == "qubits" ? "num_qubits" : "num_layers";
        auto o = open("variance_vs_" + axis + ".csv", "method,arm," + col + ",mean_variance,std_variance,repeats,failures");
        for (const auto& [k, g] : by_axis[axis]) {
            const Stats s = stats(g.values);
            o << std::get<0>(k) << "," << std::get<1>(k) << "," << std::get<2>(k) << "," << num(s.mean) << ","
              << num(s.stddev) << "," << s.n << "," << g.failures << "\n";
        }
    }

    {
        auto o = open("prompt_ablation.csv", "axis,point,arm,mean_variance,std_variance,repeats");
        for (const auto& [axis, groups] : by_axis) {
            for (const auto& [k, g] : groups) {
                if (std::get<1>(k).empty()) continue;
                const Stats s = stats(g.values);
                o << axis << "," << std::get<2>(k) << "," << std::get<1>(k) << "," << num(s.mean) << ","
                  << num(s.stddev) << "," << s.n << "\n";
            }
        }
    }

    {
        // Every non-ablation curve next to the classic uniform curve at the same point.
        auto o = open("baseline_comparison.csv", "axis,point,method,mean_variance,std_variance,uniform_mean_variance,ratio_to_uniform");
        for (const auto& [axis, groups] : by_axis) {
            std::map<int, double> uniform;
            for (const auto& [k, g] : groups) {
                if (std::get<0>(k).rfind("classic:uniform", 0) == 0 && std::get<1>(k).empty() && !g.values.empty()) {
                    uniform[std::get<2>(k)] = stats(g.values).mean;
                }
            }
            for (const auto& [k, g] : groups) {
                if (!std::get<1>(k).empty()) continue;
                const Stats s = stats(g.values);
                o << axis << "," << std::get<2>(k) << "," << std::get<0>(k) << "," << num(s.mean) << ","
                  << num(s.stddev) << ",";
                auto it = uniform.find(std::get<2>(k));
                if (it != uniform.end() && it->second > 0.0) o << num(it->second) << "," << num(s.mean / it->second);
                else o << ",";
                o << "\n";
            }
        }
    }

    {
        auto o = open("cost_benefit.csv", "method,arm,axis,point,repeat,iterations_fraction,variance_fraction");
        for (const auto& f : files) {
            for (const auto& r : f.file.records) {
                if (r.history_file.empty()) continue;
                std::ifstream h(f.path.parent_path() / r.history_file);
                if (!h) {
                    log::warn("missing history " + r.history_file);
                    continue;
                }
                for (const auto& c : adainit::cumulative_cost_curve(adainit::read_history(h))) {
                    o << r.method << "," << r.arm << "," << r.axis << "," << r.point << "," << r.repeat << ","
                      << num(c.iterations_fraction) << "," << num(c.variance_fraction) << "\n";
                }
            }
        }
    }

    {
        // Seconds per training epoch, averaged over repeats; covers both the
        // qubit-count and the training-set-size views.
        auto o = open("runtime.csv", "method,dataset,axis,point,train_size,mean_epoch_seconds,repeats");
        std::map<std::tuple<std::string, std::string, std::string, int, std::size_t>, std::vector<double>> t;
        for (const auto& f : files) {
            const auto dataset = f.file.header.at("config").value("dataset", "");
            for (const auto& r : f.file.records) {
                if (!r.error.empty() || r.mean_epoch_seconds <= 0.0) continue;
                t[{r.method, dataset, r.axis, r.point, r.train_size}].push_back(r.mean_epoch_seconds);
            }
        }
        for (const auto& [k, v] : t) {
            const Stats s = stats(v);
            o << std::get<0>(k) << "," << std::get<1>(k) << "," << std::get<2>(k) << "," << std::get<3>(k) << ","
              << std::get<4>(k) << "," << num(s.mean) << "," << s.n << "\n";
        }
    }
    return written;
}

}  // namespace bplab::exp
