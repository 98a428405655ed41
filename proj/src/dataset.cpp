#include "bplab/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bplab/error.hpp"
#include "bplab/random.hpp"
#include "reducer.hpp"

#ifndef BPLAB_DATA_DIR
#define BPLAB_DATA_DIR "data"
#endif

namespace bplab::data {

namespace fs = std::filesystem;

std::string to_string(DatasetName name) {
    switch (name) {
        case DatasetName::Iris: return "iris";
        case DatasetName::Wine: return "wine";
        case DatasetName::Titanic: return "titanic";
        case DatasetName::Mnist: return "mnist";
    }
    return "?";
}

DatasetName parse_dataset_name(const std::string& text) {
    std::string t;
    for (char c : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "iris") return DatasetName::Iris;
    if (t == "wine") return DatasetName::Wine;
    if (t == "titanic") return DatasetName::Titanic;
    if (t == "mnist") return DatasetName::Mnist;
    throw InvalidArgument("unknown dataset '" + text + "'");
}

fs::path default_source(DatasetName name) {
    fs::path dir = BPLAB_DATA_DIR;
    if (const char* env = std::getenv("BPLAB_DATA_DIR")) dir = env;
    switch (name) {
        case DatasetName::Iris: return dir / "iris.data";
        case DatasetName::Wine: return dir / "wine.data";
        case DatasetName::Titanic: return dir / "titanic.csv";
        case DatasetName::Mnist: return dir / "mnist";
    }
    return dir;
}

DatasetSpec DatasetSpec::standard(DatasetName name, fs::path source) {
    DatasetSpec s;
    s.name = name;
    s.source_path = source.empty() ? default_source(name) : std::move(source);
    switch (name) {
        case DatasetName::Iris:
            s.splits = {60, 20, 20};
            s.expected_rows = 150;
            s.expected_features = 4;
            s.expected_classes = 3;
            break;
        case DatasetName::Wine:
            s.splits = {80, 20, 30};
            s.expected_rows = 178;
            s.expected_features = 13;
            s.expected_classes = 3;
            break;
        case DatasetName::Titanic:
            s.splits = {320, 80, 179};
            s.expected_rows = 891;
            s.expected_features = 11;
            s.expected_classes = 2;
            break;
        case DatasetName::Mnist:
            s.splits = {320, 80, 400};
            s.expected_rows = 60000;
            s.expected_features = 784;
            s.expected_classes = 10;
            break;
    }
    return s;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Splits one CSV record, honouring double quotes.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

/// Comma- or whitespace-delimited fields.
std::vector<std::string> split_fields(const std::string& line) {
    if (line.find(',') != std::string::npos) return split_csv(line);
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string f;
    while (is >> f) out.push_back(f);
    return out;
}

double to_number(const std::string& field, std::size_t row) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v)) {
        throw DataError("row " + std::to_string(row + 1) + ": '" + field + "' is not a number");
    }
    return v;
}

std::ifstream open_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

/// Maps label tokens to 0.. ; all-numeric tokens keep numeric order.
std::vector<int> encode_labels(const std::vector<std::string>& tokens, int& num_classes) {
    bool numeric = true;
    for (const auto& t : tokens) {
        char* end = nullptr;
        std::strtod(t.c_str(), &end);
        if (t.empty() || end != t.c_str() + t.size()) numeric = false;
    }
    std::map<std::string, int> ids;
    std::vector<std::string> order;
    if (numeric) {
        std::vector<std::pair<double, std::string>> uniq;
        for (const auto& t : tokens) uniq.emplace_back(std::strtod(t.c_str(), nullptr), t);
        std::sort(uniq.begin(), uniq.end());
        for (const auto& [v, t] : uniq) {
            if (!ids.count(t)) ids[t] = static_cast<int>(ids.size());
        }
    } else {
        for (const auto& t : tokens) {
            if (!ids.count(t)) ids[t] = static_cast<int>(ids.size());
        }
    }
    num_classes = static_cast<int>(ids.size());
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(ids.at(t));
    return out;
}

RawTable load_delimited(const DatasetSpec& spec, bool label_first) {
    auto in = open_text(spec.source_path);
    RawTable t;
    std::vector<std::string> label_tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto f = split_fields(line);
        if (f.size() < 2) throw DataError("row " + std::to_string(t.rows + 1) + " has too few fields");
        const std::size_t d = f.size() - 1;
        if (t.rows == 0) t.cols = d;
        if (d != t.cols) {
            throw DataError("row " + std::to_string(t.rows + 1) + " has " + std::to_string(d) +
                            " features, expected " + std::to_string(t.cols));
        }
        label_tokens.push_back(label_first ? f.front() : f.back());
        for (std::size_t j = 0; j < d; ++j) t.features.push_back(to_number(f[label_first ? j + 1 : j], t.rows));
        ++t.rows;
    }
    t.labels = encode_labels(label_tokens, t.num_classes);
    for (std::size_t j = 0; j < t.cols; ++j) t.column_names.push_back("f" + std::to_string(j));
    return t;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Kaggle train.csv. Name, Ticket, Cabin and PassengerId are dropped; sex is
// male=0/female=1; embarked S=0/C=1/Q=2 (missing -> S); missing age and
// fare take the column median.
RawTable load_titanic(const DatasetSpec& spec) {
    auto in = open_text(spec.source_path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("titanic file is empty");
    const auto header = split_csv(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    const char* required[] = {"Survived", "Pclass", "Sex", "Age", "SibSp", "Parch", "Fare", "Embarked"};
    for (const char* name : required) {
        if (!col.count(name)) throw DataError(std::string("titanic header lacks column ") + name);
    }

    std::vector<std::vector<std::string>> records;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto f = split_csv(line);
        if (f.size() != header.size()) {
            throw DataError("titanic row " + std::to_string(records.size() + 1) + " has " + std::to_string(f.size()) +
                            " fields, expected " + std::to_string(header.size()));
        }
        records.push_back(std::move(f));
    }

    RawTable t;
    t.rows = records.size();
    // Published feature count excludes only the label column.
    t.cols = header.size() - 1;
    t.column_names = {"Pclass", "Sex", "Age", "SibSp", "Parch", "Fare", "Embarked"};

    auto numeric_col = [&](const char* name) {
        std::vector<double> present;
        for (std::size_t r = 0; r < records.size(); ++r) {
            const auto& v = records[r][col.at(name)];
            if (!v.empty()) present.push_back(to_number(v, r));
        }
        return median(present);
    };
    const double age_median = numeric_col("Age");
    const double fare_median = numeric_col("Fare");

    std::vector<std::string> labels;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& f = records[r];
        auto num = [&](const char* name, double fallback) {
            const auto& v = f[col.at(name)];
            return v.empty() ? fallback : to_number(v, r);
        };
        const auto& sex = f[col.at("Sex")];
        const auto& emb = f[col.at("Embarked")];
        if (sex != "male" && sex != "female") throw DataError("titanic row " + std::to_string(r + 1) + ": bad Sex");
        const double embarked = emb == "C" ? 1.0 : emb == "Q" ? 2.0 : 0.0;
        const double row[] = {num("Pclass", 3.0), sex == "female" ? 1.0 : 0.0, num("Age", age_median),
                              num("SibSp", 0.0), num("Parch", 0.0), num("Fare", fare_median), embarked};
        t.features.insert(t.features.end(), std::begin(row), std::end(row));
        labels.push_back(f[col.at("Survived")]);
    }
    t.labels = encode_labels(labels, t.num_classes);
    return t;
}

std::uint32_t read_be32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError("truncated IDX header");
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

RawTable load_mnist(const DatasetSpec& spec) {
    fs::path images = spec.source_path, labels = spec.labels_path;
    if (fs::is_directory(images)) {
        if (labels.empty()) labels = images / "train-labels-idx1-ubyte";
        images = images / "train-images-idx3-ubyte";
    } else if (labels.empty()) {
        labels = images.parent_path() / "train-labels-idx1-ubyte";
    }
    const auto img = read_idx_images(images);
    const auto lab = read_idx_labels(labels);
    if (lab.size() != img.count) throw DataError("MNIST image and label counts differ");
    RawTable t;
    t.rows = img.count;
    t.cols = img.rows * img.cols;
    t.features.assign(img.pixels.begin(), img.pixels.end());
    std::vector<std::string> tokens;
    tokens.reserve(lab.size());
    for (auto l : lab) tokens.push_back(std::to_string(l));
    t.labels = encode_labels(tokens, t.num_classes);
    for (std::size_t j = 0; j < t.cols; ++j) t.column_names.push_back("px" + std::to_string(j));
    return t;
}

}  // namespace

IdxImages read_idx_images(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    const auto magic = read_be32(in);
    if (magic != 0x00000803) throw DataError("bad IDX image magic in " + path.string());
    IdxImages out;
    out.count = read_be32(in);
    out.rows = read_be32(in);
    out.cols = read_be32(in);
    out.pixels.resize(out.count * out.rows * out.cols);
    if (!in.read(reinterpret_cast<char*>(out.pixels.data()), static_cast<std::streamsize>(out.pixels.size()))) {
        throw DataError("truncated IDX image payload in " + path.string());
    }
    return out;
}

std::vector<std::uint8_t> read_idx_labels(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    const auto magic = read_be32(in);
    if (magic != 0x00000801) throw DataError("bad IDX label magic in " + path.string());
    std::vector<std::uint8_t> out(read_be32(in));
    if (!in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()))) {
        throw DataError("truncated IDX label payload in " + path.string());
    }
    return out;
}

RawTable load_raw(const DatasetSpec& spec) {
    RawTable t;
    switch (spec.name) {
        case DatasetName::Iris: t = load_delimited(spec, false); break;
        case DatasetName::Wine: t = load_delimited(spec, true); break;
        case DatasetName::Titanic: t = load_titanic(spec); break;
        case DatasetName::Mnist: t = load_mnist(spec); break;
    }
    if (spec.expected_rows && t.rows != spec.expected_rows) {
        throw DataError(to_string(spec.name) + ": " + std::to_string(t.rows) + " rows, expected " +
                        std::to_string(spec.expected_rows));
    }
    if (spec.expected_features && t.cols != spec.expected_features) {
        throw DataError(to_string(spec.name) + ": " + std::to_string(t.cols) + " features, expected " +
                        std::to_string(spec.expected_features));
    }
    if (spec.expected_classes && t.num_classes != spec.expected_classes) {
        throw DataError(to_string(spec.name) + ": " + std::to_string(t.num_classes) + " classes, expected " +
                        std::to_string(spec.expected_classes));
    }
    return t;
}

namespace {

/// Largest-remainder apportionment of `total` over `weights`.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& weights) {
    const double sum = static_cast<double>(std::accumulate(weights.begin(), weights.end(), std::size_t{0}));
    std::vector<std::size_t> out(weights.size());
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t used = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = static_cast<double>(total) * static_cast<double>(weights[i]) / sum;
        out[i] = static_cast<std::size_t>(std::floor(exact));
        used += out[i];
        rema.emplace_back(-(exact - std::floor(exact)), i);
    }
    std::sort(rema.begin(), rema.end());
    for (std::size_t k = 0; used < total; ++k, ++used) ++out[rema[k % rema.size()].second];
    return out;
}

}  // namespace

PreparedDataset prepare(const RawTable& raw, const DatasetSpec& spec, int num_qubits, std::uint64_t seed) {
    if (num_qubits < 1) throw InvalidArgument("prepare needs N >= 1");
    if (raw.num_classes < 2) throw DataError("need at least two classes");
    Rng rng(seed);

    std::vector<std::size_t> by_class[2];
    for (std::size_t r = 0; r < raw.rows; ++r) {
        if (raw.labels[r] == 0 || raw.labels[r] == 1) by_class[raw.labels[r]].push_back(r);
    }
    const std::size_t total = spec.splits.total();
    const auto quota = apportion(total, {by_class[0].size(), by_class[1].size()});
    for (int c = 0; c < 2; ++c) {
        if (quota[c] > by_class[c].size()) {
            throw DataError(to_string(spec.name) + ": class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " instances, " + std::to_string(quota[c]) + " needed");
        }
        std::shuffle(by_class[c].begin(), by_class[c].end(), rng);
        by_class[c].resize(quota[c]);
    }

    // Class-ordered sequence dealt to splits by largest running deficit, so
    // each split gets its exact count and a proportional class mix.
    std::vector<std::size_t> seq(by_class[0]);
    seq.insert(seq.end(), by_class[1].begin(), by_class[1].end());
    const std::size_t target[3] = {spec.splits.train, spec.splits.val, spec.splits.test};
    std::vector<std::size_t> rows[3];
    for (std::size_t i = 0; i < seq.size(); ++i) {
        int best = -1;
        double best_deficit = -1e300;
        for (int s = 0; s < 3; ++s) {
            if (rows[s].size() >= target[s]) continue;
            const double deficit = static_cast<double>(target[s]) * static_cast<double>(i + 1) /
                                       static_cast<double>(seq.size()) -
                                   static_cast<double>(rows[s].size());
            if (deficit > best_deficit) {
                best_deficit = deficit;
                best = s;
            }
        }
        rows[best].push_back(seq[i]);
    }
    for (auto& r : rows) std::shuffle(r.begin(), r.end(), rng);

    const std::size_t d = raw.feature_dim();
    auto gather = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> m(idx.size() * d);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::copy_n(raw.features.begin() + static_cast<std::ptrdiff_t>(idx[i] * d), d,
                        m.begin() + static_cast<std::ptrdiff_t>(i * d));
        }
        return m;
    };
    const auto reducer = FeatureReducer::fit(gather(rows[0]), d, static_cast<std::size_t>(num_qubits));

    PreparedDataset out;
    out.name = to_string(spec.name);
    out.num_qubits = num_qubits;
    out.seed = seed;
    out.reducer_provenance = reducer.provenance();
    qnn::LabeledData* targets[3] = {&out.train, &out.val, &out.test};
    std::vector<std::size_t>* row_targets[3] = {&out.train_rows, &out.val_rows, &out.test_rows};
    for (int s = 0; s < 3; ++s) {
        const auto m = reducer.transform(gather(rows[s]), d);
        targets[s]->dim = reducer.output_dim();
        targets[s]->features = m;
        for (auto r : rows[s]) targets[s]->labels.push_back(raw.labels[r]);
        *row_targets[s] = rows[s];
    }
    return out;
}

namespace {

class Fnv1a {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= b[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    template <class T>
    void value(const T& v) { bytes(&v, sizeof v); }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t PreparedDataset::hash() const {
    Fnv1a h;
    for (const auto* s : {&train, &val, &test}) {
        h.value(static_cast<std::uint64_t>(s->size()));
        h.value(static_cast<std::uint64_t>(s->dim));
        h.bytes(s->features.data(), s->features.size() * sizeof(double));
        for (int l : s->labels) h.value(static_cast<std::int32_t>(l));
    }
    return h.digest();
}

namespace {

constexpr char kCacheMagic[8] = {'B', 'P', 'L', 'A', 'B', 'D', 'S', '1'};

template <class T>
void put(std::ostream& out, T v) {
    // Little-endian on every supported target.
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("truncated dataset cache");
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const auto n = get<std::uint32_t>(in);
    std::string s(n, '\0');
    if (!in.read(s.data(), n)) throw DataError("truncated dataset cache");
    return s;
}

}  // namespace

// Layout: magic, name, N (u32), seed (u64), train/val/test counts (u64),
// dim (u32), reducer provenance; then every row's features as f64
// (train, val, test order) and one label byte per row.
void write_cache(const fs::path& path, const PreparedDataset& ds) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(kCacheMagic, sizeof kCacheMagic);
    put_string(out, ds.name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.num_qubits));
    put<std::uint64_t>(out, ds.seed);
    for (const auto* s : {&ds.train, &ds.val, &ds.test}) put<std::uint64_t>(out, s->size());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dim()));
    put_string(out, ds.reducer_provenance);
    for (const auto* s : {&ds.train, &ds.val, &ds.test}) {
        out.write(reinterpret_cast<const char*>(s->features.data()),
                  static_cast<std::streamsize>(s->features.size() * sizeof(double)));
    }
    for (const auto* s : {&ds.train, &ds.val, &ds.test}) {
        for (int l : s->labels) put<std::uint8_t>(out, static_cast<std::uint8_t>(l));
    }
    if (!out) throw DataError("failed writing " + path.string());
}

PreparedDataset read_cache(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    char magic[8];
    if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kCacheMagic)) throw DataError("not a dataset cache");
    PreparedDataset ds;
    ds.name = get_string(in);
    ds.num_qubits = static_cast<int>(get<std::uint32_t>(in));
    ds.seed = get<std::uint64_t>(in);
    std::uint64_t counts[3];
    for (auto& c : counts) c = get<std::uint64_t>(in);
    const auto dim = get<std::uint32_t>(in);
    ds.reducer_provenance = get_string(in);
    qnn::LabeledData* targets[3] = {&ds.train, &ds.val, &ds.test};
    for (int s = 0; s < 3; ++s) {
        targets[s]->dim = dim;
        targets[s]->features.resize(counts[s] * dim);
        if (!in.read(reinterpret_cast<char*>(targets[s]->features.data()),
                     static_cast<std::streamsize>(targets[s]->features.size() * sizeof(double)))) {
            throw DataError("truncated dataset cache");
        }
    }
    for (int s = 0; s < 3; ++s) {
        targets[s]->labels.resize(counts[s]);
        for (auto& l : targets[s]->labels) l = get<std::uint8_t>(in);
    }
    return ds;
}

}  // namespace bplab::data
