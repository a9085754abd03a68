#pragma once

#include <optional>
#include <vector>

namespace recur {

// The ordered list of Games years on which records can be set or broken.
// The modern calendar runs 1896..2008 quadrennially with 1906 intercalated
// and the cancelled 1916, 1940, 1944 editions absent.
class GamesCalendar {
  public:
    explicit GamesCalendar(std::vector<int> years);

    static GamesCalendar modern();

    const std::vector<int>& years() const { return years_; }
    bool contains(int year) const;
    int first() const { return years_.front(); }
    int last() const { return years_.back(); }

    // Games strictly after `from`, up to and including `to`.
    std::vector<int> games_between(int from, int to) const;

    // First Games year at or after a (possibly fractional) calendar time;
    // nullopt past the end of the calendar.
    std::optional<int> next_on_or_after(double year) const;

    // Scheduled quadrennial editions that never took place.
    static const std::vector<int>& cancelled_years();
    // First cancelled edition strictly inside (year_set, year_break), if any.
    static std::optional<int> first_cancelled_in(int year_set, int year_break);

  private:
    std::vector<int> years_;
};

} // namespace recur
