#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace docclass {

/// Document classes; the integer codes are fixed and index the DAG order.
enum class ClassLabel : int { Mix = 1, Text = 2, Picture = 3, Receipt = 4, Highlight = 5 };

inline constexpr int kClassCount = 5;
inline constexpr std::array<ClassLabel, kClassCount> kAllClasses = {
    ClassLabel::Mix, ClassLabel::Text, ClassLabel::Picture, ClassLabel::Receipt,
    ClassLabel::Highlight};

constexpr int code(ClassLabel c) { return static_cast<int>(c); }
constexpr std::size_t class_index(ClassLabel c) { return static_cast<std::size_t>(code(c) - 1); }

std::string_view to_string(ClassLabel c);
/// Accepts the lower-case name ("mix", "text", ...) or the numeric code.
std::optional<ClassLabel> parse_class_label(std::string_view text);

}  // namespace docclass
