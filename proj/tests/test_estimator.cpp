#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cutpipe/estimator.hpp"
#include "cutpipe/records.hpp"
#include "cutpipe/selftest.hpp"

using namespace cutpipe;

namespace {

ParamCircuit bell() {
    ParamCircuit c;
    c.n_qubits = 2;
    c.gates = {Gate::fixed(GateKind::H, 0), Gate::cx(0, 1)};
    return c;
}

EstimatorQuery bell_query(std::vector<CutPoint> cuts = {}) {
    EstimatorQuery q;
    q.circuit = bell();
    q.observable = PauliObservable::single("ZZ");
    q.cuts = std::move(cuts);
    q.cut_label = q.cuts.empty() ? "cut0" : "cut1@0";
    q.run_id = "testrun00000";
    q.dataset = "fixture";
    return q;
}

void check_stage_sum(const QueryRecord& r) {
    for (double t : {r.t_part_s, r.t_gen_s, r.t_exec_s, r.t_rec_s, r.t_total_s}) CHECK(t >= 0.0);
    CHECK(r.t_other_s >= -0.001);
    CHECK(r.t_part_s + r.t_gen_s + r.t_exec_s + r.t_rec_s <= r.t_total_s + 0.001);
    CHECK(std::abs(r.t_part_s + r.t_gen_s + r.t_exec_s + r.t_rec_s + r.t_other_s - r.t_total_s) < 0.001);
}

}  // namespace

TEST_CASE("no-cut analytic query") {
    MemorySink sink;
    EstimatorQuery q;
    q.circuit.n_qubits = 1;
    q.observable = PauliObservable::single("Z");
    CHECK(estimate(q, sink) == 1.0);
    REQUIRE(sink.records().size() == 1);
    const auto& r = sink.records()[0];
    CHECK(r.n_subexperiments == 1);
    CHECK(r.n_tasks == 1);
    CHECK(r.n_cuts == 0);
    CHECK(r.value == 1.0);
    CHECK_FALSE(r.error.has_value());
    check_stage_sum(r);
}

TEST_CASE("cut Bell query") {
    MemorySink sink;
    const double v = estimate(bell_query({{0, 1}}), sink);
    CHECK(std::abs(v - 1.0) < 1e-9);
    const auto& r = sink.records().at(0);
    CHECK(r.n_subexperiments == 8);
    CHECK(r.n_tasks == 16);
    CHECK(r.n_cuts == 1);
    check_stage_sum(r);
}

TEST_CASE("multi-term observable reconstructs word by word") {
    MemorySink sink;
    auto q = bell_query({{0, 1}});
    q.observable = PauliObservable{{{0.5, "ZZ"}, {-2.0, "XX"}, {1.0, "IZ"}}};
    CHECK(estimate(q, sink) == doctest::Approx(0.5 - 2.0).epsilon(1e-9));
    REQUIRE(sink.records().size() == 1);
    CHECK(sink.records()[0].n_tasks == 3 * 16);
}

TEST_CASE("label-resolved cuts match explicit cuts") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto cc = random_cut_case(4, 1 + trial % 2, rng);
        MemorySink sink;
        EstimatorQuery q;
        q.circuit = cc.circuit;
        q.observable = PauliObservable::single(cc.word);
        q.cuts = cc.plan.cuts;
        q.cut_label = cc.plan.label;
        q.workers = 3;
        CHECK(std::abs(estimate(q, sink) - uncut_expectation(cc.circuit, cc.word)) < 1e-9);
    }
}

TEST_CASE("shot estimates are unbiased") {
    // 200 repetitions at 1024 shots, one cut
    std::mt19937_64 rng(31);
    const auto cc = random_cut_case(3, 1, rng);
    const double oracle = uncut_expectation(cc.circuit, cc.word);
    WorkerPool pool(2);
    NullSink sink;
    std::vector<double> values;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
        EstimatorQuery q;
        q.circuit = cc.circuit;
        q.observable = PauliObservable::single(cc.word);
        q.cuts = cc.plan.cuts;
        q.shots = 1024;
        q.workers = 2;
        q.seed = rep;
        values.push_back(estimate(q, sink, pool));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    const double se = std::sqrt(var / static_cast<double>(values.size()));
    CHECK(std::abs(mean - oracle) < 3.0 * se + 1e-12);
}

TEST_CASE("shot estimates are deterministic per seed") {
    MemorySink sink;
    auto q = bell_query({{0, 1}});
    q.shots = 512;
    q.seed = 99;
    q.workers = 4;
    const double a = estimate(q, sink);
    q.workers = 1;
    const double b = estimate(q, sink);
    CHECK(a == b);
}

TEST_CASE("failures still emit a record") {
    MemorySink sink;
    auto q = bell_query();
    q.observable = PauliObservable::single("ZZZ");
    CHECK_THROWS(estimate(q, sink));
    REQUIRE(sink.records().size() == 1);
    CHECK(sink.records()[0].error.has_value());
    CHECK(std::isnan(sink.records()[0].value));

    auto bad_cut = bell_query({{1, 0}});
    CHECK_THROWS(estimate(bad_cut, sink));
    CHECK(sink.records().size() == 2);
}

TEST_CASE("estimator numbers queries and batches") {
    MemorySink sink;
    EstimatorConfig cfg;
    cfg.run_id = "abc";
    Estimator est(cfg, sink);
    std::vector<Estimator::Item> items(3, {bell(), PauliObservable::single("ZZ")});
    const auto vals = est.estimate_batch(items, Phase::Eval);
    REQUIRE(vals.size() == 3);
    for (double v : vals) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(sink.records().size() == 3);
    for (std::uint64_t i = 0; i < 3; ++i) {
        CHECK(sink.records()[i].query_idx == i);
        CHECK(sink.records()[i].phase == "eval");
    }
    CHECK(est.estimate_batch({}, Phase::Eval).empty());
    CHECK(sink.records().size() == 3);
    CHECK(est.queries_issued() == 3);
}

TEST_CASE("hooks observe every execution") {
    MemorySink sink;
    EstimatorConfig cfg;
    cfg.cut_label = "cut1@0";
    cfg.workers = 2;
    Estimator est(cfg, sink);
    int calls = 0;
    est.hooks().on_execution = [&](std::span<const TaskResult> results, const ExecSummary& s) {
        ++calls;
        CHECK(results.size() == 16);
        CHECK(s.max_task_s <= s.makespan_s);
    };
    est(bell(), PauliObservable::single("ZZ"), Phase::Train);
    CHECK(calls == 1);
}

TEST_CASE("record JSONL round trip") {
    QueryRecord r;
    r.run_id = "0123456789ab";
    r.query_idx = 42;
    r.phase = "grad";
    r.dataset = "iris";
    r.n_qubits = 4;
    r.cut_label = "cut2@1,2";
    r.n_cuts = 2;
    r.n_subexperiments = 64;
    r.n_tasks = 192;
    r.shots = 1024;
    r.workers = 8;
    r.policy_mode = "staggered";
    r.batch_size = 4;
    r.inter_batch_delay_s = 0.01;
    r.straggler_p = 0.2;
    r.straggler_delay_s = 0.1;
    r.seed = 18446744073709551615ULL;
    r.t_part_s = 1e-5;
    r.t_gen_s = 2e-4;
    r.t_exec_s = 0.3;
    r.t_rec_s = 0.1;
    r.t_total_s = 0.41;
    r.t_other_s = 0.41 - (1e-5 + 2e-4 + 0.3 + 0.1);
    r.value = -0.123456789012345;
    const auto line = to_jsonl(r);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.rfind("{\"run_id\":", 0) == 0);
    CHECK(parse_record_line(line) == r);

    r.value = std::nan("");
    r.error = "boom";
    const auto failed = parse_record_line(to_jsonl(r));
    CHECK(failed == r);
    CHECK(to_jsonl(r).find("\"value\":null") != std::string::npos);
}

TEST_CASE("record parsing rejects malformed lines") {
    CHECK_THROWS(parse_record_line("{}"));
    CHECK_THROWS(parse_record_line("{\"run_id\":"));
    QueryRecord r;
    r.run_id = "x";
    r.phase = "train";
    auto line = to_jsonl(r);
    CHECK_NOTHROW(parse_record_line(line));
    auto wrong_type = line;
    wrong_type.replace(wrong_type.find("\"workers\":0"), 11, "\"workers\":\"0\"");
    CHECK_THROWS(parse_record_line(wrong_type));

    std::istringstream in(line + "\n\n" + "{\"run_id\": 1}\n" + line + "\n" + line.substr(0, 20) + "\n");
    const auto load = read_records(in);
    CHECK(load.records.size() == 2);
    REQUIRE(load.rejections.size() == 2);
    CHECK(load.rejections[0].line == 3);
    CHECK(load.rejections[1].line == 5);

    std::istringstream empty("");
    CHECK(read_records(empty).records.empty());
}

TEST_CASE("jsonl sink appends one line per record") {
    const auto dir = std::filesystem::temp_directory_path() / "cutpipe_sink_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto path = dir / "log.jsonl";
    {
        JsonlSink sink(path);
        EstimatorQuery q = bell_query({{0, 1}});
        for (int i = 0; i < 5; ++i) {
            q.query_idx = static_cast<std::uint64_t>(i);
            estimate(q, sink);
        }
        CHECK(sink.count() == 5);
    }
    const auto load = read_records(path);
    CHECK(load.records.size() == 5);
    CHECK(load.rejections.empty());
    CHECK(load.records[4].query_idx == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("schema round trip at scale") {
    const auto res = check_schema_round_trip(2000, 7);
    CHECK_MESSAGE(res.passed, res.detail);
}
