#pragma once

#include <string>

#include "gridflex/linalg.hpp"
#include "gridflex/network.hpp"

namespace gridflex {

// System-wide multipliers per step: bus loads scale with load_pu, pv output
// with pv_pu times the unit rating.
struct DayProfile {
    Vector load_pu;
    Vector pv_pu;
    double dt_hours = 1.0;

    std::size_t steps() const { return load_pu.size(); }
};

DayProfile load_profile(const std::string& path);
void save_profile(const DayProfile& profile, const std::string& path);
std::string profile_to_csv(const DayProfile& profile);
DayProfile profile_from_csv(const std::string& text);

// Morning and evening load peaks with a midday pv bell; stands in for
// measured campus data.
DayProfile default_workday_profile();

// Per-bus net injections from loads and pv at the given multipliers
// (generation positive, no storage contribution).
struct BusInjections {
    Vector p;
    Vector q;
};

BusInjections base_injections(const Network& net, double load_pu, double pv_pu);

}  // namespace gridflex
