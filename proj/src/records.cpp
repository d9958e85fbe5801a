#include "cutpipe/records.hpp"

#include <cmath>
#include <istream>
#include <stdexcept>

#include <json.hpp>

namespace cutpipe {

using ordered_json = nlohmann::ordered_json;

namespace {

template <typename T>
T require(const nlohmann::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("missing required key '") + key + "'");
    if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::invalid_argument(std::string("key '") + key + "' must be a string");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument(std::string("key '") + key + "' must be a number");
    } else if constexpr (std::is_unsigned_v<T>) {
        if (!it->is_number_unsigned()) {
            throw std::invalid_argument(std::string("key '") + key + "' must be a non-negative integer");
        }
    } else {
        if (!it->is_number_integer()) throw std::invalid_argument(std::string("key '") + key + "' must be an integer");
    }
    return it->get<T>();
}

bool same_double(double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

bool QueryRecord::operator==(const QueryRecord& o) const {
    return run_id == o.run_id && query_idx == o.query_idx && phase == o.phase && dataset == o.dataset &&
           n_qubits == o.n_qubits && cut_label == o.cut_label && n_cuts == o.n_cuts &&
           n_subexperiments == o.n_subexperiments && n_tasks == o.n_tasks && shots == o.shots &&
           workers == o.workers && policy_mode == o.policy_mode && batch_size == o.batch_size &&
           same_double(inter_batch_delay_s, o.inter_batch_delay_s) && same_double(straggler_p, o.straggler_p) &&
           same_double(straggler_delay_s, o.straggler_delay_s) && seed == o.seed &&
           same_double(t_part_s, o.t_part_s) && same_double(t_gen_s, o.t_gen_s) &&
           same_double(t_exec_s, o.t_exec_s) && same_double(t_rec_s, o.t_rec_s) &&
           same_double(t_total_s, o.t_total_s) && same_double(t_other_s, o.t_other_s) &&
           same_double(value, o.value) && error == o.error;
}

std::string to_jsonl(const QueryRecord& r) {
    ordered_json j;
    j["run_id"] = r.run_id;
    j["query_idx"] = r.query_idx;
    j["phase"] = r.phase;
    j["dataset"] = r.dataset;
    j["n_qubits"] = r.n_qubits;
    j["cut_label"] = r.cut_label;
    j["n_cuts"] = r.n_cuts;
    j["n_subexperiments"] = r.n_subexperiments;
    j["n_tasks"] = r.n_tasks;
    j["shots"] = r.shots;
    j["workers"] = r.workers;
    j["policy_mode"] = r.policy_mode;
    j["batch_size"] = r.batch_size;
    j["inter_batch_delay_s"] = r.inter_batch_delay_s;
    j["straggler_p"] = r.straggler_p;
    j["straggler_delay_s"] = r.straggler_delay_s;
    j["seed"] = r.seed;
    j["t_part_s"] = r.t_part_s;
    j["t_gen_s"] = r.t_gen_s;
    j["t_exec_s"] = r.t_exec_s;
    j["t_rec_s"] = r.t_rec_s;
    j["t_total_s"] = r.t_total_s;
    j["t_other_s"] = r.t_other_s;
    if (std::isfinite(r.value)) {
        j["value"] = r.value;
    } else {
        j["value"] = nullptr;
    }
    if (r.error) j["error"] = *r.error;
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

QueryRecord parse_record_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
    QueryRecord r;
    r.run_id = require<std::string>(j, "run_id");
    r.query_idx = require<std::uint64_t>(j, "query_idx");
    r.phase = require<std::string>(j, "phase");
    r.dataset = require<std::string>(j, "dataset");
    r.n_qubits = require<int>(j, "n_qubits");
    r.cut_label = require<std::string>(j, "cut_label");
    r.n_cuts = require<int>(j, "n_cuts");
    r.n_subexperiments = require<std::uint64_t>(j, "n_subexperiments");
    r.n_tasks = require<std::uint64_t>(j, "n_tasks");
    r.shots = require<std::uint32_t>(j, "shots");
    r.workers = require<int>(j, "workers");
    r.policy_mode = require<std::string>(j, "policy_mode");
    r.batch_size = require<std::uint64_t>(j, "batch_size");
    r.inter_batch_delay_s = require<double>(j, "inter_batch_delay_s");
    r.straggler_p = require<double>(j, "straggler_p");
    r.straggler_delay_s = require<double>(j, "straggler_delay_s");
    r.seed = require<std::uint64_t>(j, "seed");
    r.t_part_s = require<double>(j, "t_part_s");
    r.t_gen_s = require<double>(j, "t_gen_s");
    r.t_exec_s = require<double>(j, "t_exec_s");
    r.t_rec_s = require<double>(j, "t_rec_s");
    r.t_total_s = require<double>(j, "t_total_s");
    r.t_other_s = require<double>(j, "t_other_s");
    if (const auto it = j.find("error"); it != j.end()) {
        if (!it->is_string()) throw std::invalid_argument("key 'error' must be a string");
        r.error = it->get<std::string>();
    }
    const auto value = j.find("value");
    if (value == j.end()) throw std::invalid_argument("missing required key 'value'");
    if (value->is_null() && r.error) {
        r.value = std::nan("");
    } else {
        r.value = require<double>(j, "value");
    }
    return r;
}

RecordLoad read_records(std::istream& in) {
    RecordLoad load;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            load.records.push_back(parse_record_line(line));
        } catch (const std::invalid_argument& e) {
            load.rejections.push_back({line_no, e.what()});
        }
    }
    return load;
}

RecordLoad read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_records(in);
}

void MemorySink::append(const QueryRecord& record) { records_.push_back(record); }

JsonlSink::JsonlSink(const std::filesystem::path& path) : out_(path, std::ios::out | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
}

void JsonlSink::append(const QueryRecord& record) {
    std::lock_guard lock(mutex_);
    out_ << to_jsonl(record) << '\n';
    ++count_;
}

}  // namespace cutpipe
