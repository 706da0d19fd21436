#pragma once

#include <string>
#include <vector>

#include "gridflex/linalg.hpp"

namespace gridflex {

enum class BusKind { Slack, Pq };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::Pq;
    double v_min = 0.95;
    double v_max = 1.05;
    // nominal demand at this bus (p.u., consumption positive); scaled by profiles
    double p_load = 0.0;
    double q_load = 0.0;
};

struct Branch {
    std::size_t from = 0;  // bus indices, not external ids
    std::size_t to = 0;
    double r = 0.0;
    double x = 0.0;
    double flow_limit = kInf;  // |P_ij| cap when finite
};

struct StorageUnit {
    std::size_t bus = 0;
    double p_max = 0.0;   // charge/discharge limit (p.u.)
    double e_cap = 0.0;   // energy capacity (p.u. h)
    double soc_init = 0.5;
    double soc_final = 0.5;
};

struct PvUnit {
    std::size_t bus = 0;
    double p_max = 1.0;  // output at pv_pu = 1
};

struct Network {
    double base_mva = 1.0;
    std::vector<Bus> buses;  // sorted by id; branch/storage/pv reference positions
    std::vector<Branch> branches;
    std::vector<StorageUnit> storage;
    std::vector<PvUnit> pv;

    std::size_t size() const { return buses.size(); }
    std::size_t slack() const;
    int id_of(std::size_t index) const { return buses[index].id; }
    std::size_t index_of(int bus_id) const;

    double storage_energy_capacity() const;  // sum of e_cap
    double storage_power_capacity() const;   // sum of p_max
};

class AdmittanceMatrix {
  public:
    AdmittanceMatrix() = default;
    explicit AdmittanceMatrix(ComplexMatrix y) : y_(std::move(y)) {}

    std::size_t size() const { return y_.rows(); }
    const Complex& at(std::size_t i, std::size_t j) const { return y_(i, j); }
    double g(std::size_t i, std::size_t j) const { return y_(i, j).real(); }
    double b(std::size_t i, std::size_t j) const { return y_(i, j).imag(); }

  private:
    ComplexMatrix y_;
};

// Validates invariants shared by every construction path: unique sorted ids,
// exactly one slack, existing endpoints, x > 0, connectivity.
void validate_network(const Network& net);

Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

AdmittanceMatrix build_ybus(const Network& net);
bool check_radial(const Network& net);

// Radial 40-bus stand-in for a campus-scale medium-voltage feeder: rooftop
// pv on every load bus, storage behind the three strongest branches;
// deterministic in the seed.
Network generate_campus_like(unsigned int seed);

double to_physical_mw(const Network& net, double value_pu);
double to_per_unit(const Network& net, double value_mw);

}  // namespace gridflex
