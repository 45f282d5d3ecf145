#include "zel/corpus/types.hpp"

#include "zel/common/errors.hpp"

namespace zel::corpus {

const char* to_string(MentionCategory c) {
  switch (c) {
    case MentionCategory::HighOverlap: return "high_overlap";
    case MentionCategory::MultipleCategories: return "multiple_categories";
    case MentionCategory::AmbiguousSubstring: return "ambiguous_substring";
    case MentionCategory::LowOverlap: return "low_overlap";
  }
  return "low_overlap";
}

MentionCategory category_from_string(const std::string& s) {
  if (s == "high_overlap") return MentionCategory::HighOverlap;
  if (s == "multiple_categories") return MentionCategory::MultipleCategories;
  if (s == "ambiguous_substring") return MentionCategory::AmbiguousSubstring;
  if (s == "low_overlap") return MentionCategory::LowOverlap;
  throw ValidationError("unknown mention category: " + s);
}

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw ValidationError("unknown split: " + s);
}

}  // namespace zel::corpus
