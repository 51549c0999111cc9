#include "campus/letters.hpp"

#include <fstream>
#include <optional>
#include <sstream>

namespace campus {

namespace {

constexpr const char* kOffer =
    "Dear {{name}},\n"
    "\n"
    "We are pleased to offer you a place at the university. Your application has been approved.\n"
    "\n"
    "Your campus information system account:\n"
    "  User name: {{username}}\n"
    "  Password:  {{password}}\n"
    "\n"
    "You will be asked to choose a new password after your first login.\n";

constexpr const char* kDecline =
    "Dear {{name}},\n"
    "\n"
    "Thank you for applying to study at the university. We regret to inform you that your\n"
    "application has been declined for the following reason:\n"
    "\n"
    "  {{reason}}\n";

std::optional<std::string> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

LetterTemplates LetterTemplates::defaults() { return {kOffer, kDecline}; }

LetterTemplates LetterTemplates::load(const std::filesystem::path& dir) {
    auto t = defaults();
    if (auto s = slurp(dir / "offer.txt")) t.offer = *s;
    if (auto s = slurp(dir / "decline.txt")) t.decline = *s;
    return t;
}

std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        auto open = tmpl.find("{{", pos);
        if (open == std::string::npos) break;
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string::npos) break;
        out.append(tmpl, pos, open - pos);
        auto key = tmpl.substr(open + 2, close - open - 2);
        if (auto it = values.find(key); it != values.end()) {
            out += it->second;
        } else {
            out.append(tmpl, open, close + 2 - open);
        }
        pos = close + 2;
    }
    out.append(tmpl, pos);
    return out;
}

}  // namespace campus
