#include "cutpipe/run_summary.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cutpipe {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json to_ordered(const RunSummary& s) {
    ordered_json j;
    j["run_id"] = s.run_id;
    j["status"] = s.status;
    j["error"] = s.error.empty() ? ordered_json(nullptr) : ordered_json(s.error);
    ordered_json cfg;
    cfg["dataset"] = s.dataset;
    cfg["seed"] = s.seed;
    cfg["n_qubits"] = s.n_qubits;
    cfg["cut_label"] = s.cut_label;
    cfg["shots"] = s.shots;
    cfg["analytic"] = s.shots == 0;
    cfg["workers"] = s.workers;
    cfg["maxiter"] = s.maxiter;
    cfg["learning_rate"] = s.learning_rate;
    cfg["policy"] = {{"mode", s.policy_mode},
                     {"batch_size", s.batch_size},
                     {"inter_batch_delay_s", s.inter_batch_delay_s},
                     {"ordering", s.ordering}};
    cfg["straggler"] = {{"p", s.straggler_p}, {"delay_s", s.straggler_delay_s}};
    cfg["feature_map_reps"] = s.feature_map_reps;
    cfg["ansatz_reps"] = s.ansatz_reps;
    cfg["entanglement"] = s.entanglement;
    cfg["robustness"] = {{"magnitudes", s.robust_magnitudes}, {"attacks", s.attacks}, {"trials", s.robust_trials}};
    j["config"] = std::move(cfg);
    j["loss_trace"] = s.loss_trace;
    j["final_params"] = s.final_params;
    j["train_time_s"] = s.train_time_s;
    j["eval_time_s"] = s.eval_time_s;
    j["test_accuracy"] = s.test_accuracy;
    ordered_json rob = ordered_json::object();
    for (const AttackTrace& t : s.robustness) {
        rob[t.attack] = {{"magnitudes", t.magnitudes}, {"accuracies", t.accuracies}};
    }
    j["robustness"] = std::move(rob);
    j["robustness_summary"] = s.robustness_summary;
    j["n_queries"] = s.n_queries;
    return j;
}

}  // namespace

std::string to_json(const RunSummary& summary) { return to_ordered(summary).dump(2) + "\n"; }

std::string to_json_without_timing(const RunSummary& summary) {
    ordered_json j = to_ordered(summary);
    j.erase("train_time_s");
    j.erase("eval_time_s");
    return j.dump(2) + "\n";
}

RunSummary parse_run_summary(const std::string& text) {
    RunSummary s;
    try {
        const auto j = nlohmann::json::parse(text);
        s.run_id = j.at("run_id").get<std::string>();
        s.status = j.at("status").get<std::string>();
        if (j.contains("error") && j.at("error").is_string()) s.error = j.at("error").get<std::string>();
        const auto& cfg = j.at("config");
        s.dataset = cfg.at("dataset").get<std::string>();
        s.seed = cfg.at("seed").get<std::uint64_t>();
        s.n_qubits = cfg.at("n_qubits").get<int>();
        s.cut_label = cfg.at("cut_label").get<std::string>();
        s.shots = cfg.at("shots").get<std::uint32_t>();
        s.workers = cfg.at("workers").get<int>();
        s.maxiter = cfg.at("maxiter").get<std::size_t>();
        s.learning_rate = cfg.at("learning_rate").get<double>();
        const auto& pol = cfg.at("policy");
        s.policy_mode = pol.at("mode").get<std::string>();
        s.batch_size = pol.at("batch_size").get<std::size_t>();
        s.inter_batch_delay_s = pol.at("inter_batch_delay_s").get<double>();
        s.ordering = pol.at("ordering").get<std::string>();
        s.straggler_p = cfg.at("straggler").at("p").get<double>();
        s.straggler_delay_s = cfg.at("straggler").at("delay_s").get<double>();
        s.feature_map_reps = cfg.at("feature_map_reps").get<int>();
        s.ansatz_reps = cfg.at("ansatz_reps").get<int>();
        s.entanglement = cfg.at("entanglement").get<std::string>();
        const auto& rob_cfg = cfg.at("robustness");
        s.robust_magnitudes = rob_cfg.at("magnitudes").get<std::vector<double>>();
        s.attacks = rob_cfg.at("attacks").get<std::vector<std::string>>();
        s.robust_trials = rob_cfg.at("trials").get<std::size_t>();
        s.loss_trace = j.at("loss_trace").get<std::vector<double>>();
        s.final_params = j.at("final_params").get<std::vector<double>>();
        s.train_time_s = j.at("train_time_s").get<double>();
        s.eval_time_s = j.at("eval_time_s").get<double>();
        s.test_accuracy = j.at("test_accuracy").get<double>();
        for (const auto& [attack, trace] : j.at("robustness").items()) {
            s.robustness.push_back({attack, trace.at("magnitudes").get<std::vector<double>>(),
                                    trace.at("accuracies").get<std::vector<double>>()});
        }
        s.robustness_summary = j.at("robustness_summary").get<double>();
        s.n_queries = j.at("n_queries").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("invalid run summary: ") + e.what());
    }
    return s;
}

RunSummary read_run_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_summary(ss.str());
}

void write_run_summary(const RunSummary& summary, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json(summary);
}

}  // namespace cutpipe
