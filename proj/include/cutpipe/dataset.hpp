#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cutpipe {

struct Sample {
    std::vector<double> x;
    double y = 1.0;  // +1 or -1
};

// Features are standardized with train-split statistics (population
// variance). Labels are +/-1.
struct Dataset {
    std::string name;
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;

    std::size_t n_features() const { return features.empty() ? 0 : features.front().size(); }
    std::vector<Sample> samples(const std::vector<std::size_t>& split) const;
};

struct RawTable {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
};

// Header row, feature columns, then a `label` column in {-1,+1} or {0,1}.
RawTable read_csv_table(const std::filesystem::path& path);

Dataset make_dataset(std::string name, RawTable table, std::uint64_t seed, double train_fraction = 0.7);

// "iris" resolves to the bundled setosa-vs-versicolor table; anything else
// is treated as a CSV path.
Dataset load_dataset(const std::string& name_or_path, std::uint64_t seed);

std::filesystem::path data_directory();

}  // namespace cutpipe
