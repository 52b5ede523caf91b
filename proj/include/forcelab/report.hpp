#pragma once

#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace forcelab {

struct Finding {
    std::string clause;
    bool ok = true;
    std::string detail;
};

/// Itemized verdicts. A clause may appear several times; it passes only if
/// every occurrence passes.
class Report {
public:
    void pass(const std::string& clause, std::string detail = {}) {
        items_.push_back({clause, true, std::move(detail)});
    }
    void fail(const std::string& clause, std::string detail) {
        items_.push_back({clause, false, std::move(detail)});
    }
    void check(const std::string& clause, bool ok, std::string detail = {}) {
        items_.push_back({clause, ok, std::move(detail)});
    }
    void merge(const Report& other, const std::string& prefix = {}) {
        for (const auto& f : other.items_) items_.push_back({prefix + f.clause, f.ok, f.detail});
    }

    bool ok() const {
        for (const auto& f : items_)
            if (!f.ok) return false;
        return true;
    }
    bool ok(const std::string& clause) const {
        for (const auto& f : items_)
            if (f.clause == clause && !f.ok) return false;
        return true;
    }
    bool failed(const std::string& clause) const { return !ok(clause); }

    std::vector<Finding> failures() const {
        std::vector<Finding> out;
        for (const auto& f : items_)
            if (!f.ok) out.push_back(f);
        return out;
    }
    const std::vector<Finding>& items() const noexcept { return items_; }

    // Clause names in first-seen order.
    std::vector<std::string> clauses() const {
        std::vector<std::string> out;
        for (const auto& f : items_) {
            bool seen = false;
            for (const auto& c : out) seen = seen || c == f.clause;
            if (!seen) out.push_back(f.clause);
        }
        return out;
    }

    // One line per clause; at most max_details failure details under each.
    std::string text(std::size_t max_details = std::numeric_limits<std::size_t>::max()) const {
        std::ostringstream os;
        for (const auto& c : clauses()) {
            os << (ok(c) ? "PASS " : "FAIL ") << c;
            std::size_t shown = 0, hidden = 0;
            for (const auto& f : items_)
                if (f.clause == c && !f.ok) {
                    if (shown < max_details) {
                        os << "\n    " << f.detail;
                        ++shown;
                    } else {
                        ++hidden;
                    }
                }
            if (hidden > 0) os << "\n    (" << hidden << " more)";
            os << "\n";
        }
        return os.str();
    }

private:
    std::vector<Finding> items_;
};

}  // namespace forcelab
