#include "gridflex/network.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace gridflex {

using nlohmann::json;

std::size_t Network::slack() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind == BusKind::Slack) return i;
    throw Error("network has no slack bus");
}

std::size_t Network::index_of(int bus_id) const {
    const auto it = std::lower_bound(buses.begin(), buses.end(), bus_id,
                                     [](const Bus& b, int id) { return b.id < id; });
    if (it == buses.end() || it->id != bus_id)
        throw Error("unknown bus id " + std::to_string(bus_id));
    return static_cast<std::size_t>(it - buses.begin());
}

double Network::storage_energy_capacity() const {
    return std::accumulate(storage.begin(), storage.end(), 0.0,
                           [](double acc, const StorageUnit& s) { return acc + s.e_cap; });
}

double Network::storage_power_capacity() const {
    return std::accumulate(storage.begin(), storage.end(), 0.0,
                           [](double acc, const StorageUnit& s) { return acc + s.p_max; });
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    // returns false when a and b were already connected
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

}  // namespace

void validate_network(const Network& net) {
    const std::size_t n = net.buses.size();
    if (n == 0) throw Error("network has no buses");
    if (net.base_mva <= 0.0) throw Error("base_mva must be positive");

    int slack_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Bus& b = net.buses[i];
        if (i > 0 && net.buses[i - 1].id >= b.id) throw Error("duplicate or unsorted bus ids");
        if (b.kind == BusKind::Slack) ++slack_count;
        if (!(b.v_min > 0.0) || !(b.v_max > b.v_min))
            throw Error("bus " + std::to_string(b.id) + ": need 0 < v_min < v_max");
        if (b.p_load < 0.0 || b.q_load < 0.0)
            throw Error("bus " + std::to_string(b.id) + ": negative load");
    }
    if (slack_count == 0) throw Error("no slack bus");
    if (slack_count > 1) throw Error("multiple slack buses");

    UnionFind uf(n);
    for (const Branch& br : net.branches) {
        if (br.from >= n || br.to >= n || br.from == br.to)
            throw Error("branch endpoints out of range");
        if (br.x <= 0.0) throw Error("zero reactance branch");
        if (br.r < 0.0) throw Error("negative branch resistance");
        uf.unite(br.from, br.to);
    }
    const std::size_t root = uf.find(0);
    for (std::size_t i = 1; i < n; ++i)
        if (uf.find(i) != root) throw Error("disconnected graph");

    for (const StorageUnit& s : net.storage) {
        if (s.bus >= n) throw Error("storage bus out of range");
        if (s.p_max <= 0.0 || s.e_cap <= 0.0) throw Error("storage sizes must be positive");
        if (s.soc_init < 0.0 || s.soc_init > 1.0 || s.soc_final < 0.0 || s.soc_final > 1.0)
            throw Error("storage soc targets must lie in [0,1]");
    }
    for (const PvUnit& u : net.pv)
        if (u.bus >= n) throw Error("pv bus out of range");
}

Network network_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("network json parse error: ") + e.what());
    }
    Network net;
    try {
        net.base_mva = doc.value("base_mva", 1.0);
        for (const json& jb : doc.at("buses")) {
            Bus b;
            b.id = jb.at("id").get<int>();
            const std::string kind = jb.at("kind").get<std::string>();
            if (kind == "slack") b.kind = BusKind::Slack;
            else if (kind == "pq") b.kind = BusKind::Pq;
            else throw Error("unknown bus kind '" + kind + "'");
            b.v_min = jb.value("v_min", 0.95);
            b.v_max = jb.value("v_max", 1.05);
            b.p_load = jb.value("p_load", 0.0);
            b.q_load = jb.value("q_load", 0.0);
            net.buses.push_back(b);
        }
        std::sort(net.buses.begin(), net.buses.end(),
                  [](const Bus& a, const Bus& b) { return a.id < b.id; });
        for (std::size_t i = 1; i < net.buses.size(); ++i)
            if (net.buses[i - 1].id == net.buses[i].id) throw Error("duplicate bus ids");

        for (const json& jb : doc.at("branches")) {
            Branch br;
            br.from = net.index_of(jb.at("from").get<int>());
            br.to = net.index_of(jb.at("to").get<int>());
            br.r = jb.at("r").get<double>();
            br.x = jb.at("x").get<double>();
            if (jb.contains("flow_limit")) br.flow_limit = jb.at("flow_limit").get<double>();
            net.branches.push_back(br);
        }
        if (doc.contains("storage")) {
            for (const json& js : doc.at("storage")) {
                StorageUnit s;
                s.bus = net.index_of(js.at("bus").get<int>());
                s.p_max = js.at("p_max").get<double>();
                s.e_cap = js.at("e_cap").get<double>();
                s.soc_init = js.at("soc_init").get<double>();
                s.soc_final = js.at("soc_final").get<double>();
                net.storage.push_back(s);
            }
        }
        if (doc.contains("pv")) {
            for (const json& jp : doc.at("pv")) {
                PvUnit u;
                u.bus = net.index_of(jp.at("bus").get<int>());
                u.p_max = jp.value("p_max", 1.0);
                net.pv.push_back(u);
            }
        }
    } catch (const json::exception& e) {
        throw Error(std::string("network json schema error: ") + e.what());
    }
    validate_network(net);
    return net;
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open network file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return network_from_json(buf.str());
}

std::string network_to_json(const Network& net) {
    json doc;
    doc["base_mva"] = net.base_mva;
    doc["buses"] = json::array();
    for (const Bus& b : net.buses) {
        json jb;
        jb["id"] = b.id;
        jb["kind"] = (b.kind == BusKind::Slack) ? "slack" : "pq";
        jb["v_min"] = b.v_min;
        jb["v_max"] = b.v_max;
        jb["p_load"] = b.p_load;
        jb["q_load"] = b.q_load;
        doc["buses"].push_back(jb);
    }
    doc["branches"] = json::array();
    for (const Branch& br : net.branches) {
        json jb;
        jb["from"] = net.id_of(br.from);
        jb["to"] = net.id_of(br.to);
        jb["r"] = br.r;
        jb["x"] = br.x;
        if (std::isfinite(br.flow_limit)) jb["flow_limit"] = br.flow_limit;
        doc["branches"].push_back(jb);
    }
    doc["storage"] = json::array();
    for (const StorageUnit& s : net.storage) {
        json js;
        js["bus"] = net.id_of(s.bus);
        js["p_max"] = s.p_max;
        js["e_cap"] = s.e_cap;
        js["soc_init"] = s.soc_init;
        js["soc_final"] = s.soc_final;
        doc["storage"].push_back(js);
    }
    doc["pv"] = json::array();
    for (const PvUnit& u : net.pv) {
        json jp;
        jp["bus"] = net.id_of(u.bus);
        jp["p_max"] = u.p_max;
        doc["pv"].push_back(jp);
    }
    return doc.dump(2) + "\n";
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write network file '" + path + "'");
    out << network_to_json(net);
}

AdmittanceMatrix build_ybus(const Network& net) {
    const std::size_t n = net.size();
    ComplexMatrix y(n, n);
    for (const Branch& br : net.branches) {
        const Complex series = 1.0 / Complex(br.r, br.x);
        y(br.from, br.from) += series;
        y(br.to, br.to) += series;
        y(br.from, br.to) -= series;
        y(br.to, br.from) -= series;
    }
    return AdmittanceMatrix(std::move(y));
}

bool check_radial(const Network& net) {
    UnionFind uf(net.size());
    for (const Branch& br : net.branches)
        if (!uf.unite(br.from, br.to)) return false;
    return true;
}

namespace {

double draw_uniform(std::mt19937& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng()) / 4294967296.0);
}

// Calibrated so that a workday profile yields daily AC losses around a third
// of the fleet energy capacity: enough to drag verified SOC visibly under its
// target while every branch flow stays inside the tangent range where
// linearized losses remain positive.
constexpr double kCampusTotalLoad = 0.85;         // p.u. at profile multiplier 1
constexpr double kCampusPowerFactorRatio = 0.35;  // q_load / p_load
constexpr double kCampusPvShare = 0.35;           // pv rating over local load (rooftop style)
constexpr double kCampusStoragePMax = 0.02;       // per unit of the fleet of three
constexpr double kCampusStorageHours = 6.0;       // e_cap / p_max

}  // namespace

Network generate_campus_like(unsigned int seed) {
    std::mt19937 rng(seed);
    Network net;
    net.base_mva = 1.0;

    const std::size_t n = 40;
    for (std::size_t i = 0; i < n; ++i) {
        Bus b;
        b.id = static_cast<int>(i);
        b.kind = (i == 0) ? BusKind::Slack : BusKind::Pq;
        b.v_min = 0.90;
        b.v_max = 1.05;
        net.buses.push_back(b);
    }

    // mostly a feeder line, with occasional laterals branching off earlier buses
    for (std::size_t i = 1; i < n; ++i) {
        std::size_t parent = i - 1;
        if (i >= 2 && draw_uniform(rng, 0.0, 1.0) >= 0.6)
            parent = static_cast<std::size_t>(draw_uniform(rng, 0.0, static_cast<double>(i - 1)));
        Branch br;
        br.from = parent;
        br.to = i;
        br.r = draw_uniform(rng, 0.004, 0.012);
        br.x = draw_uniform(rng, 0.008, 0.024);
        net.branches.push_back(br);
    }

    std::vector<double> weight(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        weight[i] = draw_uniform(rng, 0.5, 1.5);
        total += weight[i];
    }
    for (std::size_t i = 1; i < n; ++i) {
        net.buses[i].p_load = kCampusTotalLoad * weight[i] / total;
        net.buses[i].q_load = kCampusPowerFactorRatio * net.buses[i].p_load;
    }

    for (std::size_t i = 1; i < n; ++i)
        net.pv.push_back({i, kCampusPvShare * net.buses[i].p_load});

    // storage behind the three strongest branches, so cycling at full power
    // never reverses the flow feeding it
    std::vector<double> subtree(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) subtree[i] = net.buses[i].p_load;
    for (std::size_t i = n - 1; i >= 1; --i) subtree[net.branches[i - 1].from] += subtree[i];
    std::vector<std::size_t> order;
    for (std::size_t i = 1; i < n; ++i) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return subtree[a] != subtree[b] ? subtree[a] > subtree[b] : a < b;
    });
    for (std::size_t k = 0; k < 3 && k < order.size(); ++k) {
        StorageUnit s;
        s.bus = order[k];
        s.p_max = kCampusStoragePMax;
        s.e_cap = kCampusStorageHours * s.p_max;
        s.soc_init = 0.5;
        s.soc_final = 0.5;
        net.storage.push_back(s);
    }

    validate_network(net);
    return net;
}

double to_physical_mw(const Network& net, double value_pu) { return value_pu * net.base_mva; }

double to_per_unit(const Network& net, double value_mw) { return value_mw / net.base_mva; }

}  // namespace gridflex
