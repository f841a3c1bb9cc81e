#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace abscloze {

inline constexpr std::size_t kNumOptions = 5;
inline constexpr std::string_view kPlaceholder = "@placeholder";

struct Sample {
  std::string id;
  std::string article;
  std::string question;  // exactly one kPlaceholder
  std::array<std::string, kNumOptions> options;
  std::optional<int> label;

  bool operator==(const Sample&) const = default;
};

// Throws MalformedSampleError describing the first violated invariant.
void validate(const Sample& sample);

std::size_t count_placeholders(std::string_view question);

}  // namespace abscloze
