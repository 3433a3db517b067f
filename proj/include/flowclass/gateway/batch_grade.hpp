#pragma once

#include <filesystem>

#include <json.hpp>

namespace flowclass::gateway {

/// Grades every *.json file in `answers_dir` (sorted by name) against the
/// reference diagram document in `reference_file`.
///
/// An answer file is an object with "paths" (array of node-number arrays)
/// and "diagram" (a diagram document, or null when the student never drew
/// one); "student_id" is echoed when present, other fields are ignored.
/// The reference CC is the structural CC of the reference diagram.
///
/// Result: {"reference_cc", "reports": [{file, student_id, report}],
///          "failures": [{file, error}]}.
/// Throws Error when the reference itself cannot be read.
nlohmann::json batch_grade(const std::filesystem::path& answers_dir, const std::filesystem::path& reference_file);

}  // namespace flowclass::gateway
