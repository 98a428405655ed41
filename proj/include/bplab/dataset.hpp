#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bplab/qnn.hpp"

namespace bplab::data {

enum class DatasetName { Iris, Wine, Titanic, Mnist };

std::string to_string(DatasetName name);
DatasetName parse_dataset_name(const std::string& text);

struct Splits {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
    std::size_t total() const { return train + val + test; }
    bool operator==(const Splits&) const = default;
};

/// Published shape of a benchmark file plus the subsampling protocol.
struct DatasetSpec {
    DatasetName name = DatasetName::Iris;
    /// Delimited text file, or for MNIST the image file / a directory holding
    /// train-images-idx3-ubyte and train-labels-idx1-ubyte.
    std::filesystem::path source_path;
    std::filesystem::path labels_path;  // MNIST labels; derived when empty
    Splits splits;
    std::size_t expected_rows = 0;
    std::size_t expected_features = 0;
    int expected_classes = 0;

    /// iris 60:20:20, wine 80:20:30, titanic 320:80:179, mnist 320:80:400.
    static DatasetSpec standard(DatasetName name, std::filesystem::path source = {});
};

/// Features as published (titanic after integer encoding / imputation) and
/// labels renumbered 0.. in order of first appearance (numeric labels keep
/// their order).
struct RawTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> features;
    std::vector<int> labels;
    int num_classes = 0;
    /// Feature columns actually retained; equals cols except for titanic.
    std::vector<std::string> column_names;

    /// Stride of `features`.
    std::size_t feature_dim() const { return column_names.size(); }
};

RawTable load_raw(const DatasetSpec& spec);

/// IDX readers. Magic 0x00000803 (images) / 0x00000801 (labels) required.
struct IdxImages {
    std::size_t count = 0, rows = 0, cols = 0;
    std::vector<std::uint8_t> pixels;
};
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

struct PreparedDataset {
    std::string name;
    int num_qubits = 0;
    std::uint64_t seed = 0;
    qnn::LabeledData train, val, test;
    /// Raw-table row of every prepared row, per split.
    std::vector<std::size_t> train_rows, val_rows, test_rows;
    std::string reducer_provenance;

    std::size_t dim() const { return train.dim; }
    Splits counts() const { return {train.size(), val.size(), test.size()}; }
    /// FNV-1a over counts, features and labels.
    std::uint64_t hash() const;
};

/// Keeps classes {0, 1}, stratified subsample to splits.total(), stratified
/// split, PCA to min(d, N) dimensions and min-max scaling to [0, pi]; every
/// fitted statistic comes from the train split only.
PreparedDataset prepare(const RawTable& raw, const DatasetSpec& spec, int num_qubits, std::uint64_t seed);

void write_cache(const std::filesystem::path& path, const PreparedDataset& ds);
PreparedDataset read_cache(const std::filesystem::path& path);

/// Default location of the bundled iris / wine files, if present.
std::filesystem::path default_source(DatasetName name);

}  // namespace bplab::data
