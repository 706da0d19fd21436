#include "gridflex/profiles.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gridflex {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

DayProfile profile_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("profile csv is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "hour,load_pu,pv_pu")
        throw Error("profile csv header must be 'hour,load_pu,pv_pu', got '" + line + "'");

    DayProfile prof;
    int expected_hour = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 3) throw Error("profile csv row needs 3 columns: '" + line + "'");
        int hour;
        double load, pv;
        try {
            hour = std::stoi(cells[0]);
            load = std::stod(cells[1]);
            pv = std::stod(cells[2]);
        } catch (const std::exception&) {
            throw Error("profile csv row is not numeric: '" + line + "'");
        }
        if (hour != expected_hour)
            throw Error("profile csv hours must run 0,1,2,... without gaps");
        if (load < 0.0 || pv < 0.0) throw Error("profile multipliers must be nonnegative");
        prof.load_pu.push_back(load);
        prof.pv_pu.push_back(pv);
        ++expected_hour;
    }
    if (prof.steps() == 0) throw Error("profile csv has no data rows");
    return prof;
}

DayProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open profile file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return profile_from_csv(buf.str());
}

std::string profile_to_csv(const DayProfile& profile) {
    std::string out = "hour,load_pu,pv_pu\n";
    char line[96];
    for (std::size_t t = 0; t < profile.steps(); ++t) {
        std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f\n", t, profile.load_pu[t],
                      profile.pv_pu[t]);
        out += line;
    }
    return out;
}

void save_profile(const DayProfile& profile, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write profile file '" + path + "'");
    out << profile_to_csv(profile);
}

DayProfile default_workday_profile() {
    DayProfile prof;
    prof.load_pu = {0.58, 0.55, 0.54, 0.54, 0.56, 0.62, 0.72, 0.85, 0.92, 0.95, 0.93, 0.90,
                    0.88, 0.87, 0.88, 0.90, 0.94, 0.98, 1.00, 0.98, 0.92, 0.82, 0.70, 0.62};
    prof.pv_pu = {0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.05, 0.15, 0.35, 0.55, 0.75, 0.90,
                  1.00, 0.97, 0.85, 0.65, 0.45, 0.25, 0.10, 0.02, 0.00, 0.00, 0.00, 0.00};
    return prof;
}

BusInjections base_injections(const Network& net, double load_pu, double pv_pu) {
    const std::size_t n = net.size();
    BusInjections inj{Vector(n, 0.0), Vector(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        inj.p[i] = -load_pu * net.buses[i].p_load;
        inj.q[i] = -load_pu * net.buses[i].q_load;
    }
    for (const PvUnit& u : net.pv) inj.p[u.bus] += pv_pu * u.p_max;
    return inj;
}

}  // namespace gridflex
