#pragma once

// Finite sums of c * t^p and c * t^p * ln(1 + t), p >= 0. Closed under the
// limits the density computations need: the ratio of two such sums has a
// limit determined by their leading terms.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "swicert/error.hpp"

namespace swicert {

struct Term {
    double coeff = 0.0;
    double power = 0.0;
    bool log = false; ///< multiply by ln(1 + t)
};

/// Growth order t^power * ln(t)^log_power, compared lexicographically.
struct GrowthOrder {
    double power = 0.0;
    int log_power = 0;
};

inline constexpr double kExponentTol = 1e-12;

/// -1, 0, +1 as a grows slower than, like, or faster than b.
inline int compare_growth(const GrowthOrder& a, const GrowthOrder& b) {
    if (a.power > b.power + kExponentTol) return 1;
    if (a.power < b.power - kExponentTol) return -1;
    return (a.log_power > b.log_power) - (a.log_power < b.log_power);
}

class Expression {
public:
    Expression() = default;
    explicit Expression(std::vector<Term> terms) : terms_(std::move(terms)) {
        for (const Term& t : terms_)
            if (!std::isfinite(t.coeff) || !std::isfinite(t.power) || t.power < 0.0)
                fail(ErrorKind::Configuration, "expression terms need finite coefficients and powers >= 0");
    }

    [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }
    [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }

    [[nodiscard]] double operator()(double t) const {
        double s = 0.0;
        for (const Term& term : terms_) {
            double v = term.coeff * (term.power == 0.0 ? 1.0 : std::pow(t, term.power));
            if (term.log) v *= std::log1p(t);
            s += v;
        }
        return s;
    }

    /// Like terms merged, negligible coefficients dropped, fastest-growing first.
    [[nodiscard]] std::vector<Term> canonical() const {
        std::vector<Term> merged;
        for (const Term& t : terms_) {
            auto it = std::find_if(merged.begin(), merged.end(), [&](const Term& m) {
                return std::abs(m.power - t.power) <= kExponentTol && m.log == t.log;
            });
            if (it == merged.end()) merged.push_back(t);
            else it->coeff += t.coeff;
        }
        double scale = 0.0;
        for (const Term& t : terms_) scale = std::max(scale, std::abs(t.coeff));
        std::erase_if(merged, [&](const Term& t) { return std::abs(t.coeff) <= 1e-14 * scale; });
        std::sort(merged.begin(), merged.end(), [](const Term& a, const Term& b) {
            return compare_growth({a.power, a.log ? 1 : 0}, {b.power, b.log ? 1 : 0}) > 0;
        });
        return merged;
    }

private:
    std::vector<Term> terms_;
};

} // namespace swicert
