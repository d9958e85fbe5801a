#pragma once

// One JSONL line per estimator call. Field order is fixed for diffability;
// readers must not depend on it.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace cutpipe {

struct QueryRecord {
    std::string run_id;
    std::uint64_t query_idx = 0;
    std::string phase;
    std::string dataset;
    int n_qubits = 0;
    std::string cut_label;
    int n_cuts = 0;
    std::uint64_t n_subexperiments = 0;
    std::uint64_t n_tasks = 0;
    std::uint32_t shots = 0;  // 0 = analytic
    int workers = 0;
    std::string policy_mode;
    std::uint64_t batch_size = 0;
    double inter_batch_delay_s = 0.0;
    double straggler_p = 0.0;
    double straggler_delay_s = 0.0;
    std::uint64_t seed = 0;
    double t_part_s = 0.0;
    double t_gen_s = 0.0;
    double t_exec_s = 0.0;
    double t_rec_s = 0.0;
    double t_total_s = 0.0;
    double t_other_s = 0.0;
    double value = 0.0;  // NaN when the call failed
    std::optional<std::string> error;

    bool operator==(const QueryRecord& other) const;
};

std::string to_jsonl(const QueryRecord& record);

// Throws std::invalid_argument describing the first schema violation.
QueryRecord parse_record_line(const std::string& line);

struct Rejection {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct RecordLoad {
    std::vector<QueryRecord> records;
    std::vector<Rejection> rejections;
};

RecordLoad read_records(std::istream& in);
RecordLoad read_records(const std::filesystem::path& path);

class RecordSink {
public:
    virtual ~RecordSink() = default;
    virtual void append(const QueryRecord& record) = 0;
};

class MemorySink final : public RecordSink {
public:
    void append(const QueryRecord& record) override;
    const std::vector<QueryRecord>& records() const { return records_; }
    void clear() { records_.clear(); }

private:
    std::vector<QueryRecord> records_;
};

class JsonlSink final : public RecordSink {
public:
    explicit JsonlSink(const std::filesystem::path& path);
    void append(const QueryRecord& record) override;
    std::size_t count() const { return count_; }

private:
    std::mutex mutex_;
    std::ofstream out_;
    std::size_t count_ = 0;
};

class NullSink final : public RecordSink {
public:
    void append(const QueryRecord&) override {}
};

}  // namespace cutpipe
