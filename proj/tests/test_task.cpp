#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "gasp/task.hpp"

using namespace gasp;
using nlohmann::json;

namespace {

std::vector<Example> identity_examples(int n) {
    std::vector<Example> out;
    for (int i = 0; i < n; ++i) out.push_back({json(i), json(i)});
    return out;
}

TaskSpec sample_induction() {
    std::vector<Example> ex;
    for (int i = 1; i <= 5; ++i) ex.push_back({json(i), json(2 * i)});
    TaskSpec t = make_induction_task("t1", "double the input", "(* x 2)",
                                     std::move(ex), 2);
    return t;
}

}  // namespace

TEST_CASE("induction construction and public/private split") {
    TaskSpec t = sample_induction();
    CHECK(t.kind == TaskKind::induction);
    CHECK(t.public_examples().size() == 2);
    CHECK(t.private_examples().size() == 3);
    // Partition: nothing shared, nothing lost.
    CHECK(t.public_examples().size() + t.private_examples().size() ==
          t.examples.size());
    CHECK(values_equal(t.public_examples()[0].input, json(1)));
    CHECK(values_equal(t.private_examples()[0].input, json(3)));
}

TEST_CASE("structural errors") {
    CHECK_THROWS_AS(
        make_induction_task("t", "stmt", "x", identity_examples(1), 1),
        StructuralError);
    CHECK_THROWS_AS(make_induction_task("t", "", "x", identity_examples(3), 1),
                    StructuralError);
    CHECK_THROWS_AS(make_induction_task("t", "stmt", "x", identity_examples(2), -1),
                    StructuralError);
    // Identity function with x -> x examples is fine.
    ExprExecutor ex;
    CHECK_NOTHROW(make_induction_task("t", "stmt", "x", identity_examples(3), 1, &ex));
}

TEST_CASE("executor consistency check") {
    ExprExecutor ex;
    std::vector<Example> good{{json(1), json(2)}, {json(2), json(4)}, {json(3), json(6)}};
    CHECK_NOTHROW(make_induction_task("t", "s", "(* x 2)", good, 1, &ex));
    std::vector<Example> bad{{json(1), json(2)}, {json(2), json(5)}, {json(3), json(6)}};
    CHECK_THROWS_AS(make_induction_task("t", "s", "(* x 2)", bad, 1, &ex),
                    ValidityError);
}

TEST_CASE("deduction conversion hides the output side") {
    TaskSpec t = sample_induction();
    Rng rng(5);
    TaskSpec d = to_deduction(t, rng);
    CHECK(d.kind == TaskKind::deduction);
    CHECK(d.examples.size() == 1);
    // Hidden field round-trips to the source example.
    bool found = false;
    for (const Example& e : t.examples)
        if (values_equal(e.input, d.examples[0].input)) {
            CHECK(values_equal(e.output, d.examples[0].output));
            found = true;
        }
    CHECK(found);

    json view = d.solver_view();
    CHECK(view.contains("function_source"));
    CHECK(view.contains("input"));
    CHECK_FALSE(view.contains("output"));

    // Same seed, same selection.
    Rng r1(9), r2(9);
    CHECK(values_equal(to_deduction(t, r1).examples[0].input,
                       to_deduction(t, r2).examples[0].input));
}

TEST_CASE("abduction conversion exposes the output side") {
    TaskSpec t = sample_induction();
    Rng rng(5);
    TaskSpec a = to_abduction(t, rng);
    CHECK(a.kind == TaskKind::abduction);
    json view = a.solver_view();
    CHECK(view.contains("function_source"));
    CHECK(view.contains("output"));
    CHECK_FALSE(view.contains("input"));
}

TEST_CASE("conversion requires the program") {
    TaskSpec t = sample_induction();
    t.function_source.clear();
    Rng rng(1);
    CHECK_THROWS_AS(to_deduction(t, rng), ConversionError);
    CHECK_THROWS_AS(to_abduction(t, rng), ConversionError);
}

TEST_CASE("format randomization is uniform over the three kinds") {
    TaskSpec t = sample_induction();
    Rng rng(101);
    int counts[3] = {0, 0, 0};
    const int n = 30000;
    for (int i = 0; i < n; ++i) {
        TaskSpec f = randomize_format(t, rng);
        ++counts[static_cast<int>(f.kind)];
    }
    for (int c : counts) {
        const double freq = static_cast<double>(c) / n;
        CHECK(freq > 1.0 / 3.0 - 0.01);
        CHECK(freq < 1.0 / 3.0 + 0.01);
    }
}

TEST_CASE("format randomization degenerates without a program") {
    TaskSpec t = sample_induction();
    t.function_source.clear();
    Rng rng(3);
    for (int i = 0; i < 50; ++i)
        CHECK(randomize_format(t, rng).kind == TaskKind::induction);
}

TEST_CASE("format randomization is seed-deterministic") {
    TaskSpec t = sample_induction();
    Rng r1(77), r2(77);
    for (int i = 0; i < 100; ++i)
        CHECK(randomize_format(t, r1).kind == randomize_format(t, r2).kind);
}

TEST_CASE("axis sampling") {
    Rng rng(13);
    int io = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
        if (sample_axis(rng) == DifficultyAxis::io) ++io;
    const double freq = static_cast<double>(io) / n;
    CHECK(freq >= 0.49);
    CHECK(freq <= 0.51);

    Rng r1(5), r2(5);
    CHECK(sample_axis(r1) == sample_axis(r2));

    for (int i = 0; i < 100; ++i)
        CHECK(sample_axis(rng, AxisMode::f_only) == DifficultyAxis::f);
}

TEST_CASE("task json round trip and corpus IO") {
    TaskSpec t = sample_induction();
    t.stage = TaskStage::lemma;
    t.axis = DifficultyAxis::io;
    t.parent_id = "goalpost-0";
    t.metadata = {{"lab", {{"difficulty", 2.5}}}};

    TaskSpec back = TaskSpec::from_json(t.to_json());
    CHECK(back.id == t.id);
    CHECK(back.kind == t.kind);
    CHECK(back.statement == t.statement);
    CHECK(back.function_source == t.function_source);
    CHECK(back.examples.size() == t.examples.size());
    CHECK(back.public_count == t.public_count);
    CHECK(back.stage == t.stage);
    CHECK(back.axis == t.axis);
    CHECK(back.parent_id == t.parent_id);
    CHECK(back.metadata == t.metadata);

    const auto path = std::filesystem::temp_directory_path() / "gasp_corpus_test.jsonl";
    save_task_corpus(path, std::vector<TaskSpec>{t, sample_induction()});
    auto loaded = load_task_corpus(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].to_json() == t.to_json());
    std::filesystem::remove(path);
}

TEST_CASE("induction solver view shows only public examples") {
    TaskSpec t = sample_induction();
    json view = t.solver_view();
    CHECK(view.at("public_examples").size() == 2);
    CHECK_FALSE(view.contains("function_source"));
}
