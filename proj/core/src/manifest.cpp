#include "curate/manifest.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "json.hpp"

namespace curate {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 4> kStatusNames{"pending", "accepted", "rejected", "defective"};
constexpr std::array<std::string_view, 9> kReasonNames{
    "min_size",         "aspect_ratio",      "aesthetic",          "luminance_low",      "luminance_high",
    "ocr_intermediate", "caption_malformed", "caption_repetition", "caption_overlength",
};
constexpr std::array<const char*, kSlotCount> kSlotKeys{"subject", "setting", "aesthetics", "camera"};

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

}  // namespace

DuplicateIdError::DuplicateIdError(std::vector<std::string> ids)
    : DataError("duplicate record ids: " + join_ids(ids)), ids_(std::move(ids)) {}

std::string_view to_string(FilterStatus status) noexcept { return kStatusNames[static_cast<std::size_t>(status)]; }
std::string_view to_string(Reason reason) noexcept { return kReasonNames[static_cast<std::size_t>(reason)]; }

std::optional<FilterStatus> status_from_string(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kStatusNames.size(); ++i) {
    if (kStatusNames[i] == text) return static_cast<FilterStatus>(i);
  }
  return std::nullopt;
}

std::optional<Reason> reason_from_string(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i) {
    if (kReasonNames[i] == text) return static_cast<Reason>(i);
  }
  return std::nullopt;
}

std::vector<std::string> record_violations(const ManifestRecord& r) {
  std::vector<std::string> out;
  if (r.id.empty()) out.push_back("id must be non-empty");
  const bool dims = r.width.has_value() && r.height.has_value();
  if (r.width.has_value() != r.height.has_value()) out.push_back("width and height must be given together");
  if ((r.scores.luminance || r.scores.ocr) && !dims) out.push_back("pixel scores require width and height");
  if (r.scores.luminance && !(*r.scores.luminance >= 0.0 && *r.scores.luminance <= 255.0)) {
    out.push_back("luminance must lie in [0, 255]");
  }
  if (r.scores.ocr && !(*r.scores.ocr >= 0.0 && std::isfinite(*r.scores.ocr))) out.push_back("ocr must be >= 0");
  if (r.scores.aesthetic && !std::isfinite(*r.scores.aesthetic)) out.push_back("aesthetic must be finite");
  if (r.permutation && !r.caption_structured) out.push_back("permutation requires caption_slots");
  if (r.caption_structured) {
    for (auto& v : caption_violations(*r.caption_structured)) out.push_back("caption_slots: " + v);
  }
  switch (r.outcome.status) {
    case FilterStatus::accepted:
      if (!r.outcome.reasons.empty()) out.push_back("accepted records carry no reasons");
      break;
    case FilterStatus::rejected:
    case FilterStatus::defective:
      if (r.outcome.reasons.empty()) out.push_back(std::string(to_string(r.outcome.status)) + " records need reasons");
      break;
    case FilterStatus::pending:
      break;
  }
  return out;
}

std::string serialize_record(const ManifestRecord& r) {
  if (auto v = record_violations(r); !v.empty()) {
    throw DataError("cannot serialize record '" + r.id + "': " + joined(v));
  }
  ordered_json j;
  j["id"] = r.id;
  j["uri"] = r.uri;
  if (r.width) j["width"] = *r.width;
  if (r.height) j["height"] = *r.height;
  if (r.caption_raw) j["caption_raw"] = *r.caption_raw;
  if (r.caption_structured) {
    ordered_json slots;
    for (std::size_t i = 0; i < kSlotCount; ++i) slots[kSlotKeys[i]] = r.caption_structured->slots[i];
    j["caption_slots"] = std::move(slots);
  }
  if (r.permutation) j["permutation"] = r.permutation->mapping();
  ordered_json scores = ordered_json::object();
  if (r.scores.aesthetic) scores["aesthetic"] = *r.scores.aesthetic;
  if (r.scores.luminance) scores["luminance"] = *r.scores.luminance;
  if (r.scores.ocr) scores["ocr"] = *r.scores.ocr;
  if (!scores.empty()) j["scores"] = std::move(scores);
  j["status"] = to_string(r.outcome.status);
  if (!r.outcome.reasons.empty()) {
    ordered_json reasons = ordered_json::array();
    for (Reason reason : r.outcome.reasons) reasons.push_back(to_string(reason));
    j["reasons"] = std::move(reasons);
  }
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw DataError(msg); }

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string get_string(const json& obj, const char* key) {
  const json* v = find(obj, key);
  if (v == nullptr) fail(std::string("missing field '") + key + "'");
  if (!v->is_string()) fail(std::string("field '") + key + "' must be a string");
  return v->get<std::string>();
}

std::optional<std::uint32_t> opt_dimension(const json& obj, const char* key) {
  const json* v = find(obj, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_number_unsigned()) {
    fail(std::string("field '") + key + "' must be a non-negative integer");
  }
  const auto value = v->get<std::uint64_t>();
  if (value > std::numeric_limits<std::uint32_t>::max()) fail(std::string("field '") + key + "' out of range");
  return static_cast<std::uint32_t>(value);
}

std::optional<double> opt_number(const json& obj, const char* key) {
  const json* v = find(obj, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_number()) fail(std::string("score '") + key + "' must be a number");
  return v->get<double>();
}

}  // namespace

ManifestRecord parse_record(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("record must be a JSON object");

  ManifestRecord r;
  r.id = get_string(j, "id");
  r.uri = get_string(j, "uri");
  r.width = opt_dimension(j, "width");
  r.height = opt_dimension(j, "height");
  if (const json* v = find(j, "caption_raw")) {
    if (!v->is_string()) fail("field 'caption_raw' must be a string");
    r.caption_raw = v->get<std::string>();
  }
  if (const json* v = find(j, "caption_slots")) {
    if (!v->is_object()) fail("field 'caption_slots' must be an object");
    StructuredCaption c;
    for (std::size_t i = 0; i < kSlotCount; ++i) c.slots[i] = get_string(*v, kSlotKeys[i]);
    r.caption_structured = std::move(c);
  }
  if (const json* v = find(j, "permutation")) {
    if (!v->is_array() || v->size() != kSlotCount) fail("field 'permutation' must be an array of 4 integers");
    std::array<int, kSlotCount> m{};
    for (std::size_t i = 0; i < kSlotCount; ++i) {
      if (!(*v)[i].is_number_integer()) fail("field 'permutation' must be an array of 4 integers");
      m[i] = (*v)[i].get<int>();
    }
    if (!Permutation4::is_bijection(m)) fail("field 'permutation' must be a bijection on 1..4");
    r.permutation = Permutation4(m);
  }
  if (const json* v = find(j, "scores")) {
    if (!v->is_object()) fail("field 'scores' must be an object");
    r.scores.aesthetic = opt_number(*v, "aesthetic");
    r.scores.luminance = opt_number(*v, "luminance");
    r.scores.ocr = opt_number(*v, "ocr");
  }
  if (const json* v = find(j, "status")) {
    if (!v->is_string()) fail("field 'status' must be a string");
    auto status = status_from_string(v->get<std::string>());
    if (!status) fail("unknown status '" + v->get<std::string>() + "'");
    r.outcome.status = *status;
  }
  if (const json* v = find(j, "reasons")) {
    if (!v->is_array()) fail("field 'reasons' must be an array");
    for (const auto& item : *v) {
      if (!item.is_string()) fail("reasons must be strings");
      auto reason = reason_from_string(item.get<std::string>());
      if (!reason) fail("unknown reason '" + item.get<std::string>() + "'");
      r.outcome.reasons.push_back(*reason);
    }
  }
  if (auto v = record_violations(r); !v.empty()) fail("invalid record: " + joined(v));
  return r;
}

ManifestReader::ManifestReader(std::istream& source, std::size_t error_budget)
    : source_(&source), budget_(error_budget) {}

std::optional<ManifestRecord> ManifestReader::next() {
  while (std::getline(*source_, buffer_)) {
    ++line_;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (buffer_.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      ManifestRecord r = parse_record(buffer_);
      if (!seen_.insert(r.id).second && duplicate_set_.insert(r.id).second) duplicates_.push_back(r.id);
      return r;
    } catch (const DataError& e) {
      constexpr std::size_t kFragment = 80;
      errors_.push_back({line_, e.what(), buffer_.substr(0, kFragment)});
      if (errors_.size() > budget_) {
        throw DataError("manifest line " + std::to_string(line_) + ": " + e.what() + " (error budget " +
                        std::to_string(budget_) + " exceeded)");
      }
    }
  }
  if (source_->bad()) throw IoError("manifest read failed after line " + std::to_string(line_));
  return std::nullopt;
}

LoadedManifest load_manifest(std::istream& source, std::size_t error_budget) {
  ManifestReader reader(source, error_budget);
  LoadedManifest out;
  while (auto r = reader.next()) out.records.push_back(std::move(*r));
  if (!reader.duplicate_ids().empty()) throw DuplicateIdError(reader.duplicate_ids());
  out.errors = reader.errors();
  return out;
}

void ManifestWriter::write(const ManifestRecord& record) {
  const std::string line = serialize_record(record);
  *sink_ << line << '\n';
  if (!*sink_) throw IoError("manifest write failed at record " + std::to_string(count_ + 1));
  ++count_;
}

std::size_t write_manifest(std::span<const ManifestRecord> records, std::ostream& sink) {
  ManifestWriter writer(sink);
  for (const auto& r : records) writer.write(r);
  return writer.count();
}

}  // namespace curate
