#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace campus {

/// Plain-text letter templates with `{{placeholder}}` substitution.
struct LetterTemplates {
    std::string offer;
    std::string decline;

    static LetterTemplates defaults();
    /// Reads `offer.txt` and `decline.txt` from `dir`, falling back to the
    /// built-in template for any file that is absent.
    static LetterTemplates load(const std::filesystem::path& dir);
};

/// Replaces every `{{key}}` with its value; unknown placeholders are left as-is.
std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& values);

}  // namespace campus
