#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bplab/adainit.hpp"
#include "bplab/chat_client.hpp"
#include "bplab/dataset.hpp"
#include "bplab/initializers.hpp"
#include "bplab/qnn.hpp"

namespace bplab::exp {

/// Flat key = value document; '#' starts a comment, values may be quoted.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues read_config_file(const std::filesystem::path& path);

enum class SweepAxis { Qubits, Layers };
enum class Method { Classic, AdaInit };
enum class GeneratorKind { Surrogate, Llm, Mock };
/// Training: per-epoch probe gradients of one training run.
/// Restarts: probe gradient at initialisation over many restarts.
enum class VarianceMode { Training, Restarts };

std::string to_string(SweepAxis a);
std::string to_string(Method m);
std::string to_string(GeneratorKind g);
std::string to_string(VarianceMode v);

struct PromptArm {
    std::string name;  // "both", "no_desc", "no_feedback", "neither"; empty outside ablations
    bool use_description = true;
    bool use_feedback = true;
};

std::vector<PromptArm> ablation_arms();

struct ExperimentConfig {
    data::DatasetName dataset = data::DatasetName::Iris;
    std::filesystem::path data_path;  // empty -> bundled default
    std::filesystem::path labels_path;
    SweepAxis axis = SweepAxis::Qubits;
    /// Sweep points; empty means the standard 2..20 (qubits) or 4..40 (layers).
    std::vector<int> points;
    int fixed_layers = 2;
    int fixed_qubits = 2;
    int repeats = 5;
    Method method = Method::Classic;
    init::InitSpec init;
    GeneratorKind generator = GeneratorKind::Surrogate;
    int iterations = 50;
    /// K in the threshold; 0 means K = iterations.
    int K = 0;
    adainit::PolyKind poly = adainit::PolyKind::N6;
    qnn::TrainConfig train;
    double temperature = 0.5;
    double top_p = 0.9;
    std::string data_desc;
    double surrogate_sigma = 0.3;
    PromptArm arm;
    VarianceMode variance_mode = VarianceMode::Training;
    int restarts = 200;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "results";
    int workers = 1;
    gen::EndpointConfig endpoint;

    static ExperimentConfig from_key_values(const KeyValues& kv);
    /// Canonical key = value serialization (everything except output_dir/workers).
    KeyValues to_key_values() const;

    std::vector<int> sweep_points() const;
    qnn::CircuitSpec circuit_at(int point) const;
    int effective_K() const { return K > 0 ? K : iterations; }
    /// Hash of the whole canonical config.
    std::string fingerprint() const;
    /// Hash of what makes two result files comparable on one plot: data,
    /// sweep, repeats, training settings, seed.
    std::string sweep_fingerprint() const;
    /// e.g. "classic:uniform[0,6.28...]" or "adainit:surrogate".
    std::string method_label() const;
    void validate() const;
};

/// Per-cell seed: derive_seed(master, point_index, repeat).
std::uint64_t cell_seed(std::uint64_t master, std::size_t point_index, int repeat);

struct ResultRecord {
    std::string method;
    std::string arm;
    std::string axis;
    int point = 0;
    int repeat = 0;
    std::uint64_t seed = 0;
    double variance = 0.0;
    std::optional<int> iterations_used;
    std::optional<double> final_S;
    double mean_epoch_seconds = 0.0;
    std::size_t train_size = 0;
    double wall_time = 0.0;
    std::string history_file;
    std::string error;
};

struct SweepOutcome {
    std::filesystem::path results_file;
    std::vector<ResultRecord> records;
};

/// Runs every (point, repeat) cell and writes results.jsonl (header line +
/// one record per line, appended as cells finish, sorted at the end) and
/// summary.csv with mean and std per point.
SweepOutcome run_sweep(const ExperimentConfig& cfg);

/// Four prompt arms over the sweep; results carry an "arm" field.
SweepOutcome ablate_prompts(const ExperimentConfig& cfg);

/// Runs a single cell without touching the filesystem (history_file empty).
ResultRecord run_cell(const ExperimentConfig& cfg, const data::RawTable& raw, std::size_t point_index, int repeat,
                      std::vector<adainit::IterationRecord>* history = nullptr);

/// Variance across restarts of the probe gradient at initialisation.
double restart_variance(const qnn::CircuitSpec& spec, const init::InitSpec& init, const qnn::LabeledData& train,
                        int restarts, std::uint64_t seed, std::size_t probe_index = 0);

struct ResultFile {
    nlohmann::json header;
    std::vector<ResultRecord> records;
};

ResultFile read_results(const std::filesystem::path& path);

/// Writes plot tables into out_dir and returns their paths. Files sharing an
/// axis must share a sweep fingerprint.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<std::filesystem::path>& result_files,
                                                  const std::filesystem::path& out_dir);

}  // namespace bplab::exp
