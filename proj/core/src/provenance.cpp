#include "recdata/provenance.hpp"

#include <string>

#include "recdata/checksum.hpp"
#include "recdata/errors.hpp"

namespace recdata {

std::string_view to_string(StepCategory category) {
  switch (category) {
    case StepCategory::load:
      return "load";
    case StepCategory::process:
      return "process";
    case StepCategory::split:
      return "split";
    case StepCategory::export_:
      return "export";
  }
  return "?";
}

std::optional<StepCategory> parse_step_category(std::string_view name) {
  if (name == "load") return StepCategory::load;
  if (name == "process") return StepCategory::process;
  if (name == "split") return StepCategory::split;
  if (name == "export") return StepCategory::export_;
  return std::nullopt;
}

std::string to_text(const ParamValue& value) {
  switch (value.index()) {
    case 0:
      return std::get<bool>(value) ? "true" : "false";
    case 1:
      return std::to_string(std::get<std::int64_t>(value));
    case 2:
      return render_double(std::get<double>(value));
    default:
      return std::get<std::string>(value);
  }
}

const ParamValue* find_param(const ParamList& params, std::string_view name) {
  for (const auto& [key, value] : params) {
    if (key == name) return &value;
  }
  return nullptr;
}

void set_param(ParamList& params, std::string_view name, ParamValue value) {
  for (auto& [key, existing] : params) {
    if (key == name) {
      existing = std::move(value);
      return;
    }
  }
  params.emplace_back(std::string(name), std::move(value));
}

bool is_hex_digest(std::string_view text) {
  if (text.size() != 32) return false;
  for (char c : text) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) return false;
  }
  return true;
}

ProvenanceStep make_step(std::string_view category_name, std::string operation,
                         ParamList params, StepChecksum checksum) {
  const auto category = parse_step_category(category_name);
  if (!category) {
    fail(errc::bad_step, "invalid step category '" + std::string(category_name) +
                             "' (expected load|process|split|export)");
  }
  ProvenanceStep step{*category, std::move(operation), std::move(params),
                      std::move(checksum)};
  validate_step(step);
  return step;
}

void validate_step(const ProvenanceStep& step) {
  if (step.checksum.is_single()) {
    if (!is_hex_digest(step.checksum.single())) {
      fail(errc::bad_step,
           "step '" + step.operation + "': checksum is not a 32-character "
                                       "lowercase hex digest");
    }
  } else if (step.checksum.is_named()) {
    for (const auto& [name, digest] : step.checksum.named()) {
      if (!is_hex_digest(digest)) {
        fail(errc::bad_step, "step '" + step.operation + "': checksum '" +
                                 name +
                                 "' is not a 32-character lowercase hex "
                                 "digest");
      }
    }
  }
}

}  // namespace recdata
