#include "recur/calendar.hpp"

#include "recur/errors.hpp"

#include <algorithm>
#include <cmath>

namespace recur {

GamesCalendar::GamesCalendar(std::vector<int> years) : years_(std::move(years)) {
    if (years_.empty()) throw ValidationError("calendar needs at least one Games year");
    for (size_t i = 1; i < years_.size(); ++i) {
        if (years_[i] <= years_[i - 1]) {
            throw ValidationError("calendar years must be strictly increasing");
        }
    }
}

GamesCalendar GamesCalendar::modern() {
    std::vector<int> years = {1896, 1900, 1904, 1906, 1908, 1912};
    for (int y = 1920; y <= 1936; y += 4) years.push_back(y);
    for (int y = 1948; y <= 2008; y += 4) years.push_back(y);
    return GamesCalendar(std::move(years));
}

bool GamesCalendar::contains(int year) const {
    return std::binary_search(years_.begin(), years_.end(), year);
}

std::vector<int> GamesCalendar::games_between(int from, int to) const {
    std::vector<int> out;
    for (int y : years_) {
        if (y > from && y <= to) out.push_back(y);
    }
    return out;
}

std::optional<int> GamesCalendar::next_on_or_after(double year) const {
    auto it = std::lower_bound(years_.begin(), years_.end(), year,
                               [](int y, double v) { return static_cast<double>(y) < v; });
    if (it == years_.end()) return std::nullopt;
    return *it;
}

const std::vector<int>& GamesCalendar::cancelled_years() {
    static const std::vector<int> cancelled = {1916, 1940, 1944};
    return cancelled;
}

std::optional<int> GamesCalendar::first_cancelled_in(int year_set, int year_break) {
    for (int y : cancelled_years()) {
        if (y > year_set && y < year_break) return y;
    }
    return std::nullopt;
}

} // namespace recur
