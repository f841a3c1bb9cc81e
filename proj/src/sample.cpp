#include "abscloze/sample.hpp"

#include "abscloze/error.hpp"

namespace abscloze {

std::size_t count_placeholders(std::string_view question) {
  std::size_t n = 0;
  for (std::size_t pos = question.find(kPlaceholder); pos != std::string_view::npos;
       pos = question.find(kPlaceholder, pos + kPlaceholder.size())) {
    ++n;
  }
  return n;
}

void validate(const Sample& sample) {
  const std::size_t placeholders = count_placeholders(sample.question);
  if (placeholders != 1) {
    throw MalformedSampleError("question has " + std::to_string(placeholders) +
                               " placeholders, expected exactly 1");
  }
  for (std::size_t i = 0; i < kNumOptions; ++i) {
    if (sample.options[i].empty()) {
      throw MalformedSampleError("option_" + std::to_string(i) + " is empty");
    }
  }
  if (sample.label && (*sample.label < 0 || *sample.label >= static_cast<int>(kNumOptions))) {
    throw MalformedSampleError("label " + std::to_string(*sample.label) + " outside 0-4");
  }
}

}  // namespace abscloze
