#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <map>

#include "svsr/data.hpp"
#include "svsr/env.hpp"
#include "svsr/oracle.hpp"
#include "svsr/preference.hpp"
#include "svsr/rng.hpp"

using namespace svsr;

namespace {

EnvConfig default_env() {
    EnvConfig cfg;
    cfg.seed = 31;
    return cfg;
}

std::string temp_dir() {
    auto dir = std::filesystem::temp_directory_path() /
               ("svsr_data_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_CASE("estimate_accuracy") {
    EnvConfig cfg = default_env();
    Problem p{"p", "q", {"0", "1", "2", "3", "4"}, "2", 1, {}};
    Rng rng = make_rng(41);

    EnvConfig sure = cfg;
    sure.solver_accuracy = {1, 1, 1, 1, 1};
    SimulatedOracle s1(sure);
    CHECK(estimate_accuracy(p, s1, 8, rng) == doctest::Approx(1.0));

    EnvConfig never = cfg;
    never.solver_accuracy = {0, 0, 0, 0, 0};
    SimulatedOracle s2(never);
    CHECK(estimate_accuracy(p, s2, 8, rng) == doctest::Approx(0.0));

    EnvConfig half = cfg;
    half.solver_accuracy = {0.5, 0.5, 0.5, 0.5, 0.5};
    SimulatedOracle s3(half);
    CHECK(std::abs(estimate_accuracy(p, s3, 10000, rng) - 0.5) < 0.02);
}

TEST_CASE("assign_level thresholds") {
    CHECK(assign_level(1.0) == 1);
    CHECK(assign_level(0.95) == 1);
    CHECK(assign_level(0.8) == 1);
    CHECK(assign_level(0.79) == 2);
    CHECK(assign_level(0.60) == 2);
    CHECK(assign_level(0.59) == 3);
    CHECK(assign_level(0.40) == 3);
    CHECK(assign_level(0.39) == 4);
    CHECK(assign_level(0.20) == 4);
    CHECK(assign_level(0.19) == 5);
    CHECK(assign_level(0.0) == 5);
}

TEST_CASE("target_cycles mapping") {
    CHECK(target_cycles(1) == 0);
    CHECK(target_cycles(2) == 1);
    CHECK(target_cycles(3) == 2);
    CHECK(target_cycles(4) == 3);
    CHECK(target_cycles(5) == 4);
}

TEST_CASE("build_chosen shapes") {
    EnvConfig cfg = default_env();
    SimulatedOracle oracle(cfg);
    Problem p{"p", "q", {"0", "1", "2", "3", "4"}, "3", 3, {}};
    Rng rng = make_rng(43);

    auto r0 = build_chosen(p, oracle, 0, 1, rng);
    REQUIRE(r0.has_value());
    REQUIRE(r0->trajectory.steps.size() == 2);
    CHECK(r0->trajectory.steps[0].kind == StepKind::Solve);
    CHECK(r0->trajectory.steps[0].answer == "3");
    CHECK(r0->trajectory.steps[1].kind == StepKind::Verify);
    CHECK(r0->trajectory.steps[1].verdict == Verdict::Correct);
    CHECK(r0->k == 0);

    auto r2 = build_chosen(p, oracle, 2, 3, rng);
    REQUIRE(r2.has_value());
    const auto& steps = r2->trajectory.steps;
    REQUIRE(steps.size() == 6);
    const StepKind kinds[] = {StepKind::Solve,  StepKind::Verify, StepKind::Rectify,
                              StepKind::Verify, StepKind::Rectify, StepKind::Verify};
    for (int i = 0; i < 6; ++i) CHECK(steps[i].kind == kinds[i]);
    CHECK(steps[1].verdict == Verdict::Incorrect);
    CHECK(steps[3].verdict == Verdict::Incorrect);
    CHECK(steps[5].verdict == Verdict::Correct);
    CHECK(grade(p, r2->trajectory.final_answer()));
    // intermediate answers are deliberately wrong
    CHECK_FALSE(grade(p, *steps[0].answer));
    CHECK_FALSE(grade(p, *steps[2].answer));
    CHECK(r2->k == 2);
    CHECK(r2->trajectory_text == render(r2->trajectory));
}

TEST_CASE("100 chosen records: correct finals, valid, exact cycle counts") {
    EnvConfig cfg = default_env();
    cfg.counts_per_level = {20, 20, 20, 20, 20};
    SimulatedOracle oracle(cfg);
    Rng rng = make_rng(44);
    int built = 0;
    for (const auto& p : gen_problems(cfg)) {
        const int k = target_cycles(p.level);
        auto rec = build_chosen(p, oracle, k, p.level, rng);
        REQUIRE(rec.has_value());
        ++built;
        CHECK(grade(p, rec->trajectory.final_answer()));
        CHECK(static_cast<bool>(validate(rec->trajectory, AutomatonMode::Canonical)));
        CHECK(rec->trajectory.rectify_count() == k);
        CHECK(rec->label == RecordLabel::Chosen);
        auto parsed = parse(rec->trajectory_text, AutomatonMode::Canonical,
                            kDefaultKMax, p.id);
        REQUIRE(std::holds_alternative<Trajectory>(parsed));
        CHECK(std::get<Trajectory>(parsed) == rec->trajectory);
    }
    CHECK(built == 100);
}

TEST_CASE("build_rejected: both modes occur and satisfy their contracts") {
    EnvConfig cfg = default_env();
    SimulatedOracle oracle(cfg);
    Problem p{"p", "q", {"0", "1", "2", "3", "4"}, "1", 4, {}};
    Rng rng = make_rng(45);
    int wrong_final = 0, corrupted = 0;
    for (int i = 0; i < 200; ++i) {
        const SftRecord rec = build_rejected(p, oracle, 4, rng);
        CHECK(rec.label == RecordLabel::Rejected);
        auto parsed = parse(rec.trajectory_text, AutomatonMode::Canonical,
                            kDefaultKMax, p.id);
        if (std::holds_alternative<Trajectory>(parsed)) {
            const auto& y = std::get<Trajectory>(parsed);
            CHECK(static_cast<bool>(validate(y, AutomatonMode::Canonical)));
            CHECK_FALSE(grade(p, y.final_answer()));
            CHECK(y.steps.back().verdict == Verdict::Correct);
            ++wrong_final;
        } else {
            ++corrupted;
        }
    }
    CHECK(wrong_final > 0);
    CHECK(corrupted > 0);
    CHECK(wrong_final + corrupted == 200);
}

TEST_CASE("emit_datasets pairs chosen with rejected per problem") {
    EnvConfig cfg = default_env();
    cfg.counts_per_level = {2, 2, 2, 2, 2};
    SimulatedOracle oracle(cfg);
    Rng rng = make_rng(46);
    const auto problems = gen_problems(cfg);

    std::vector<SftRecord> records;
    for (const auto& p : problems) {
        auto chosen = build_chosen(p, oracle, target_cycles(p.level), p.level, rng);
        REQUIRE(chosen.has_value());
        records.push_back(*chosen);
        records.push_back(build_rejected(p, oracle, p.level, rng));
    }

    const std::string dir = temp_dir();
    DatasetFiles files{dir + "/sft.jsonl", dir + "/seed_pairs.jsonl"};
    emit_datasets(records, problems, files);

    const auto sft = read_sft_records(files.sft_path);
    REQUIRE(sft.size() == 10);
    for (std::size_t i = 0; i < sft.size(); ++i) {
        CHECK(sft[i].label == RecordLabel::Chosen);
        CHECK(sft[i].problem_id == records[2 * i].problem_id);
        CHECK(sft[i].trajectory == records[2 * i].trajectory);
        CHECK(sft[i].level == records[2 * i].level);
        CHECK(sft[i].k == records[2 * i].k);
    }

    const auto rows = read_pair_rows(files.seed_pairs_path);
    REQUIRE(rows.size() == 10);
    std::map<std::string, const SftRecord*> rejected_by_id;
    for (const auto& r : records)
        if (r.label == RecordLabel::Rejected) rejected_by_id[r.problem_id] = &r;
    for (const auto& row : rows) {
        CHECK_FALSE(row.win_text.empty());
        CHECK(row.lose_text == rejected_by_id.at(row.problem_id)->trajectory_text);
        CHECK(row.teacher_margin >= 0.0);
        CHECK(row.source == PairSource::Seed);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("problem with chosen but no rejected is absent from seed pairs") {
    EnvConfig cfg = default_env();
    SimulatedOracle oracle(cfg);
    Problem a{"pa", "q", {"0", "1", "2", "3", "4"}, "0", 1, {}};
    Problem b{"pb", "q", {"0", "1", "2", "3", "4"}, "1", 1, {}};
    Rng rng = make_rng(47);
    std::vector<SftRecord> records;
    records.push_back(*build_chosen(a, oracle, 0, 1, rng));
    records.push_back(*build_chosen(b, oracle, 0, 1, rng));
    records.push_back(build_rejected(b, oracle, 1, rng));

    const std::string dir = temp_dir();
    DatasetFiles files{dir + "/sft.jsonl", dir + "/seed_pairs.jsonl"};
    emit_datasets(records, {a, b}, files);
    CHECK(read_sft_records(files.sft_path).size() == 2);
    const auto rows = read_pair_rows(files.seed_pairs_path);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].problem_id == "pb");
    std::filesystem::remove_all(dir);
}

TEST_CASE("pair rows round trip through read_pairs") {
    EnvConfig cfg = default_env();
    SimulatedOracle oracle(cfg);
    Problem p{"p", "q", {"0", "1", "2", "3", "4"}, "2", 2, {}};
    Rng rng = make_rng(48);
    auto chosen = build_chosen(p, oracle, 1, 2, rng);
    REQUIRE(chosen.has_value());
    Trajectory lose;
    lose.problem_id = "p";
    lose.steps = {solve_step("0"),
                  verify_step(Verdict::Correct, VerifyStrategy::DirectDerivation)};

    const std::string dir = temp_dir();
    const std::string path = dir + "/pairs.jsonl";
    PreferencePair pair{"p", chosen->trajectory, lose, 0.6, PairSource::Seed, 0};
    write_pairs(path, {pair});
    const auto back = read_pairs(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].problem_id == "p");
    CHECK(back[0].y_win == chosen->trajectory);
    CHECK(back[0].y_lose == lose);
    CHECK(back[0].teacher_margin == doctest::Approx(0.6));

    // a row whose lose text cannot be parsed is skipped when asked
    PairRow corrupt{"p", render(chosen->trajectory), "not a trace", 0.8,
                    PairSource::Seed, 0};
    write_pair_rows(path, {corrupt});
    std::size_t skipped = 0;
    const auto kept = read_pairs(path, AutomatonMode::Canonical, kDefaultKMax, true,
                                 &skipped);
    CHECK(kept.empty());
    CHECK(skipped == 1);
    std::filesystem::remove_all(dir);
}
