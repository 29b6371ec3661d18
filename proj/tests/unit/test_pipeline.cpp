#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "recdata/checksum.hpp"
#include "recdata/errors.hpp"
#include "recdata/io.hpp"
#include "recdata/pipeline.hpp"

using namespace recdata;
using testsupport::TempDir;

namespace {

// The reference pipeline document every parser change is held against.
const char* kReferenceDoc = R"(
pipeline:
- name: load
  operation: MovieLens
  params:
    version: 1m
  checksum: c4d9eecfca2ab87c1945afe126590906
- name: process
  operation: Binarize
  params:
    threshold: 4
  checksum: 0c5a5e05efb79e561a2d9c6b087980ff
- name: process
  operation: UserItemIterativeKCore
  params:
    cores: 2
  checksum: ef1a1bca94111c164d17b03a1a5c1314
- name: split
  operation: RandomHoldOut
  params:
    test_ratio: 0.2
    val_ratio: 0.1
    seed: 42
  checksum:
    test: 81e4150e5230a15d7c0d97b3371ffab1
    val: 65c04aa6c326c832891dfe4815465855
    train: 9a6760e3da74a1984d6d0057739b14ad
- name: export
  operation: Elliot
  params:
    output_path: ./elliot/
)";

errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return errc::io_failure;
}

// A local-fixture variant of the reference pipeline.
std::string fixture_pipeline(const std::string& data_path,
                             const std::string& export_dir) {
  return "pipeline:\n"
         "- name: load\n"
         "  operation: ReadTabular\n"
         "  params:\n"
         "    path: " + data_path + "\n"
         "- name: process\n"
         "  operation: Binarize\n"
         "  params:\n"
         "    threshold: 4\n"
         "- name: process\n"
         "  operation: UserItemIterativeKCore\n"
         "  params:\n"
         "    cores: 2\n"
         "- name: split\n"
         "  operation: RandomHoldOut\n"
         "  params:\n"
         "    test_ratio: 0.2\n"
         "    val_ratio: 0.1\n"
         "    seed: 42\n"
         "- name: export\n"
         "  operation: Elliot\n"
         "  params:\n"
         "    output_path: " + export_dir + "\n";
}

Dataset thousand_rows() {
  return testsupport::random_dataset(
      314, {.max_users = 80,
            .max_items = 120,
            .max_interactions = 1000,
            .min_interactions = 1000});
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("the reference document parses into its five steps") {
  const PipelineConfig config = parse_config(kReferenceDoc);
  REQUIRE(config.steps.size() == 5);

  const auto& load = config.steps[0];
  CHECK(load.category == StepCategory::load);
  CHECK(load.operation == "MovieLens");
  REQUIRE(find_param(load.params, "version"));
  CHECK(std::get<std::string>(*find_param(load.params, "version")) == "1m");
  REQUIRE(load.checksum.is_single());
  CHECK(load.checksum.single() == "c4d9eecfca2ab87c1945afe126590906");

  const auto& binarize = config.steps[1];
  CHECK(binarize.category == StepCategory::process);
  CHECK(binarize.operation == "Binarize");
  CHECK(std::get<std::int64_t>(*find_param(binarize.params, "threshold")) == 4);

  const auto& core = config.steps[2];
  CHECK(core.operation == "UserItemIterativeKCore");
  CHECK(std::get<std::int64_t>(*find_param(core.params, "cores")) == 2);

  const auto& split = config.steps[3];
  CHECK(split.category == StepCategory::split);
  CHECK(split.operation == "RandomHoldOut");
  CHECK(std::get<double>(*find_param(split.params, "test_ratio")) == 0.2);
  CHECK(std::get<double>(*find_param(split.params, "val_ratio")) == 0.1);
  CHECK(std::get<std::int64_t>(*find_param(split.params, "seed")) == 42);
  REQUIRE(split.checksum.is_named());
  REQUIRE(split.checksum.named().size() == 3);
  CHECK(split.checksum.named()[0] ==
        std::pair<std::string, std::string>(
            "test", "81e4150e5230a15d7c0d97b3371ffab1"));
  CHECK(split.checksum.named()[2].first == "train");

  const auto& exp = config.steps[4];
  CHECK(exp.category == StepCategory::export_);
  CHECK(exp.operation == "Elliot");
  CHECK(std::get<std::string>(*find_param(exp.params, "output_path")) ==
        "./elliot/");
  CHECK(exp.checksum.empty());
}

TEST_CASE("scalar sniffing") {
  CHECK(std::holds_alternative<bool>(param_from_text("true")));
  CHECK(std::get<std::int64_t>(param_from_text("42")) == 42);
  CHECK(std::get<std::int64_t>(param_from_text("-7")) == -7);
  CHECK(std::get<double>(param_from_text("0.2")) == 0.2);
  CHECK(std::get<double>(param_from_text("1e3")) == 1000.0);
  CHECK(std::get<std::string>(param_from_text("1m")) == "1m");
  CHECK(std::get<std::string>(param_from_text("./elliot/")) == "./elliot/");
}

TEST_CASE("unknown operations and bad params name the step") {
  std::string doc = kReferenceDoc;
  const auto pos = doc.find("Binarize");
  doc.replace(pos, 8, "FooBarXx");
  try {
    parse_config(doc);
    FAIL("expected unknown_operation");
  } catch (const Error& e) {
    CHECK(e.code() == errc::unknown_operation);
    CHECK(std::string(e.what()).find("step 2") != std::string::npos);
  }

  std::string bad_ratio = kReferenceDoc;
  const auto ratio_pos = bad_ratio.find("test_ratio: 0.2");
  bad_ratio.replace(ratio_pos, 15, "test_ratio: 1.5");
  try {
    parse_config(bad_ratio);
    FAIL("expected bad_params");
  } catch (const Error& e) {
    CHECK(e.code() == errc::bad_params);
    CHECK(std::string(e.what()).find("step 4") != std::string::npos);
  }
}

TEST_CASE("schema violations are rejected") {
  CHECK(code_of([] { parse_config("pipelines:\n- x\n"); }) ==
        errc::schema_error);
  CHECK(code_of([] {
          parse_config("pipeline:\n- name: process\n  operation: Binarize\n"
                       "  params:\n    threshold: 1\n");
        }) == errc::schema_error);  // first step must be load
  CHECK(code_of([] {
          parse_config(
              "pipeline:\n- name: load\n  operation: ReadTabular\n"
              "  params:\n    path: x\n  bogus: 1\n");
        }) == errc::schema_error);  // unknown step key
  CHECK(code_of([] {
          parse_config(
              "pipeline:\n- name: load\n  operation: ReadTabular\n"
              "  params:\n    path: x\n"
              "- name: split\n  operation: RandomHoldOut\n"
              "  params:\n    test_ratio: 0.2\n"
              "- name: split\n  operation: RandomHoldOut\n"
              "  params:\n    test_ratio: 0.2\n");
        }) == errc::schema_error);  // two split steps
  CHECK(code_of([] {
          parse_config(
              "pipeline:\n- name: load\n  operation: ReadTabular\n"
              "  params:\n    path: x\n"
              "- name: export\n  operation: Elliot\n"
              "  params:\n    output_path: out\n");
        }) == errc::schema_error);  // framework export without a split
  CHECK(code_of([] {
          parse_config(
              "pipeline:\n- name: load\n  operation: ReadTabular\n"
              "  params:\n    path: x\n"
              "- name: split\n  operation: RandomHoldOut\n"
              "  params:\n    test_ratio: 0.2\n"
              "- name: process\n  operation: Binarize\n"
              "  params:\n    threshold: 1\n");
        }) == errc::schema_error);  // process after split
  CHECK(code_of([] {
          parse_config("pipeline:\n- name: train\n  operation: X\n");
        }) == errc::schema_error);  // bad category name
  CHECK(code_of([] {
          parse_config(
              "pipeline:\n- name: load\n  operation: ReadTabular\n"
              "  params:\n    path: x\n  checksum: nothex\n");
        }) == errc::schema_error);  // malformed digest
}

TEST_CASE("the k alias for cores is accepted and re-emitted as cores") {
  const std::string doc =
      "pipeline:\n- name: load\n  operation: ReadTabular\n"
      "  params:\n    path: x\n"
      "- name: process\n  operation: UserItemIterativeKCore\n"
      "  params:\n    k: 3\n";
  const PipelineConfig config = parse_config(doc);
  REQUIRE(find_param(config.steps[1].params, "cores"));
  CHECK(std::get<std::int64_t>(*find_param(config.steps[1].params, "cores")) ==
        3);
  CHECK(write_config(config).find("cores: 3") != std::string::npos);
}

TEST_CASE("emission round-trips structurally and is idempotent") {
  const PipelineConfig config = parse_config(kReferenceDoc);
  const std::string emitted = write_config(config);
  const PipelineConfig reparsed = parse_config(emitted);
  CHECK(reparsed == config);
  CHECK(write_config(reparsed) == emitted);
}

TEST_CASE("record mode fills checksums and verify replays them") {
  TempDir tmp;
  const Dataset fixture = thousand_rows();
  write_dataset(fixture, tmp.file("data.tsv"), FormatSpec::tabular());
  const std::string doc = fixture_pipeline("data.tsv", "exported");

  IoContext ctx;
  ctx.base_dir = tmp.path();

  const PipelineConfig config = parse_config(doc);
  const PipelineResult recorded = execute(config, RunMode::record, ctx);
  REQUIRE(recorded.steps.size() == 5);
  for (const auto& outcome : recorded.steps) {
    CHECK_FALSE(outcome.step.checksum.empty());
  }
  CHECK(recorded.steps[0].step.checksum.is_single());
  CHECK(recorded.steps[0].step.checksum.single() == checksum(fixture));
  REQUIRE(recorded.steps[3].step.checksum.is_named());
  CHECK(recorded.steps[3].step.checksum.named().size() == 3);
  REQUIRE(recorded.split.has_value());
  CHECK(recorded.steps[3].step.checksum.named() == recorded.split->checksums);
  // The iterative k-core annotations were recorded.
  CHECK(find_param(recorded.steps[2].step.params, "rounds") != nullptr);
  CHECK(find_param(recorded.steps[2].step.params, "fixpoint") != nullptr);
  REQUIRE(recorded.manifests.size() == 1);
  CHECK(std::filesystem::exists(tmp.file("exported") / "train.tsv"));

  const std::string history = export_history(recorded);
  const PipelineResult verified =
      execute(parse_config(history), RunMode::verify, ctx);
  CHECK(verified.all_match());

  // Determinism: two executions emit identical documents.
  CHECK(export_history(execute(config, RunMode::record, ctx)) == history);
}

TEST_CASE("verify flags each perturbed digest and keeps going") {
  TempDir tmp;
  write_dataset(thousand_rows(), tmp.file("data.tsv"), FormatSpec::tabular());
  IoContext ctx;
  ctx.base_dir = tmp.path();
  const std::string history = export_history(execute(
      parse_config(fixture_pipeline("data.tsv", "exported")), RunMode::record,
      ctx));

  // Flip one digest at a time; exactly that step must mismatch.
  std::vector<std::size_t> digest_positions;
  for (std::size_t pos = history.find(": "); pos != std::string::npos;
       pos = history.find(": ", pos + 1)) {
    const std::string value = history.substr(pos + 2, 32);
    if (value.size() == 32 && is_hex_digest(value) &&
        history[pos + 34] == '\n') {
      digest_positions.push_back(pos + 2);
    }
  }
  REQUIRE(digest_positions.size() >= 4);

  for (const std::size_t pos : digest_positions) {
    std::string perturbed = history;
    perturbed[pos] = perturbed[pos] == '0' ? '1' : '0';
    const PipelineResult result =
        execute(parse_config(perturbed), RunMode::verify, ctx);
    CHECK_FALSE(result.all_match());
    CHECK(result.mismatches().size() == 1);
  }
}

TEST_CASE("pipelines without a split emit a scalar digest per step") {
  TempDir tmp;
  write_dataset(testsupport::d0(), tmp.file("d0.tsv"), FormatSpec::tabular());
  const std::string doc =
      "pipeline:\n- name: load\n  operation: ReadTabular\n"
      "  params:\n    path: d0.tsv\n"
      "- name: process\n  operation: Binarize\n"
      "  params:\n    threshold: 4\n"
      "- name: export\n  operation: WriteJson\n"
      "  params:\n    path: out.jsonl\n";
  IoContext ctx;
  ctx.base_dir = tmp.path();
  const PipelineResult result =
      execute(parse_config(doc), RunMode::record, ctx);
  for (const auto& outcome : result.steps) {
    CHECK(outcome.step.checksum.is_single());
  }
  CHECK(std::filesystem::exists(tmp.file("out.jsonl")));
  CHECK(read_dataset(tmp.file("out.jsonl"), FormatSpec::json()).size() == 3);

  const std::string history = export_history(result);
  CHECK(execute(parse_config(history), RunMode::verify, ctx).all_match());
}

TEST_CASE("source overrides let recorded pipelines run against fixtures") {
  TempDir tmp;
  write_dataset(testsupport::d0(), tmp.file("local.tsv"),
                FormatSpec::tabular());
  IoContext ctx;
  ctx.base_dir = tmp.path();
  ctx.source_overrides["MovieLens"] =
      SourceOverride{tmp.file("local.tsv"), FormatSpec::tabular()};

  const PipelineResult result =
      execute(parse_config(kReferenceDoc), RunMode::record, ctx);
  CHECK(result.steps[0].step.checksum.single() == checksum(testsupport::d0()));
  REQUIRE(result.split.has_value());
}

TEST_CASE("fold-producing splits record per-fold digests and replay") {
  TempDir tmp;
  write_dataset(thousand_rows(), tmp.file("data.tsv"), FormatSpec::tabular());
  const std::string doc =
      "pipeline:\n- name: load\n  operation: ReadTabular\n"
      "  params:\n    path: data.tsv\n"
      "- name: split\n  operation: CrossValidation\n"
      "  params:\n    folds: 3\n    seed: 5\n";
  IoContext ctx;
  ctx.base_dir = tmp.path();
  const PipelineResult result =
      execute(parse_config(doc), RunMode::record, ctx);
  REQUIRE(result.folds.has_value());
  REQUIRE(result.steps[1].step.checksum.is_named());
  CHECK(result.steps[1].step.checksum.named().size() == 6);
  CHECK(result.steps[1].step.checksum.named()[0].first == "fold_0.test");

  const std::string history = export_history(result);
  CHECK(execute(parse_config(history), RunMode::verify, ctx).all_match());
}

TEST_CASE("execution failures carry the step index") {
  TempDir tmp;
  write_dataset(testsupport::d1(), tmp.file("implicit.tsv"),
                FormatSpec::tabular());
  const std::string doc =
      "pipeline:\n- name: load\n  operation: ReadTabular\n"
      "  params:\n    path: implicit.tsv\n"
      "- name: process\n  operation: Binarize\n"
      "  params:\n    threshold: 4\n";
  IoContext ctx;
  ctx.base_dir = tmp.path();
  try {
    execute(parse_config(doc), RunMode::record, ctx);
    FAIL("expected no_ratings");
  } catch (const Error& e) {
    CHECK(e.code() == errc::no_ratings);
    CHECK(std::string(e.what()).find("step 2") != std::string::npos);
  }
}

TEST_CASE("validate_operation mirrors parse-time validation") {
  ParamList params;
  set_param(params, "threshold", std::int64_t{4});
  validate_operation(StepCategory::process, "Binarize", params);

  CHECK(code_of([] {
          validate_operation(StepCategory::process, "Binarize", {});
        }) == errc::bad_params);
  CHECK(code_of([] {
          ParamList list;
          set_param(list, "folds", std::int64_t{1});
          validate_operation(StepCategory::split, "CrossValidation", list);
        }) == errc::bad_params);
  CHECK(code_of([] {
          validate_operation(StepCategory::process, "Nope", {});
        }) == errc::unknown_operation);
  CHECK(code_of([] {
          ParamList list;
          set_param(list, "cutoff", std::int64_t{1});
          set_param(list, "keep", std::string("sideways"));
          validate_operation(StepCategory::process, "FilterByTime", list);
        }) == errc::bad_params);
}

}  // TEST_SUITE
