#include "cutpipe/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cutpipe {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_number(const std::string& text, std::size_t line_no) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty() || !std::isfinite(v)) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": '" + text + "' is not a finite number");
    }
    return v;
}

}  // namespace

std::vector<Sample> Dataset::samples(const std::vector<std::size_t>& split) const {
    std::vector<Sample> out;
    out.reserve(split.size());
    for (std::size_t i : split) out.push_back({features.at(i), static_cast<double>(labels.at(i))});
    return out;
}

RawTable read_csv_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset " + path.string());
    RawTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("dataset " + path.string() + " is empty");
    auto header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "label") {
        throw std::invalid_argument("dataset header must end with a 'label' column");
    }
    header.pop_back();
    table.feature_names = header;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size() + 1) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size() + 1) + " columns");
        }
        std::vector<double> row;
        for (std::size_t i = 0; i < header.size(); ++i) row.push_back(parse_number(cells[i], line_no));
        const double label = parse_number(cells.back(), line_no);
        if (label == 1.0) {
            table.labels.push_back(1);
        } else if (label == -1.0 || label == 0.0) {
            table.labels.push_back(-1);
        } else {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": label must be -1, 0 or 1");
        }
        table.features.push_back(std::move(row));
    }
    if (table.features.empty()) throw std::invalid_argument("dataset " + path.string() + " has no rows");
    return table;
}

Dataset make_dataset(std::string name, RawTable table, std::uint64_t seed, double train_fraction) {
    const std::size_t n = table.features.size();
    if (n < 2) throw std::invalid_argument("dataset needs at least two samples");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train fraction must be in (0, 1)");
    Dataset d;
    d.name = std::move(name);
    d.seed = seed;
    d.labels = std::move(table.labels);
    d.features = std::move(table.features);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    d.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    d.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(d.train.begin(), d.train.end());
    std::sort(d.test.begin(), d.test.end());

    const std::size_t m = d.n_features();
    for (std::size_t j = 0; j < m; ++j) {
        double mean = 0.0;
        for (std::size_t i : d.train) mean += d.features[i][j];
        mean /= static_cast<double>(d.train.size());
        double var = 0.0;
        for (std::size_t i : d.train) var += (d.features[i][j] - mean) * (d.features[i][j] - mean);
        var /= static_cast<double>(d.train.size());
        const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
        for (auto& row : d.features) row[j] = (row[j] - mean) / sd;
    }
    return d;
}

std::filesystem::path data_directory() {
    if (const char* env = std::getenv("CUTPIPE_DATA")) return env;
#ifdef CUTPIPE_DATA_DIR
    return CUTPIPE_DATA_DIR;
#else
    return "data";
#endif
}

Dataset load_dataset(const std::string& name_or_path, std::uint64_t seed) {
    if (name_or_path == "iris") {
        return make_dataset("iris", read_csv_table(data_directory() / "iris_binary.csv"), seed);
    }
    const std::filesystem::path path(name_or_path);
    return make_dataset(path.stem().string(), read_csv_table(path), seed);
}

}  // namespace cutpipe
