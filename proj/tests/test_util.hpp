#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridflex/aggregation.hpp"
#include "gridflex/linear_model.hpp"
#include "gridflex/network.hpp"

#ifndef GRIDFLEX_DATA_DIR
#define GRIDFLEX_DATA_DIR "data"
#endif

namespace testutil {

inline std::string data_path(const std::string& rel) {
    return std::string(GRIDFLEX_DATA_DIR) + "/" + rel;
}

// slack -- z=0.01+0.03j -- load bus with storage and pv
inline gridflex::Network two_bus(double p_load = 0.3, double q_load = 0.1) {
    gridflex::Network net;
    net.base_mva = 1.0;
    gridflex::Bus slack;
    slack.id = 0;
    slack.kind = gridflex::BusKind::Slack;
    slack.v_min = 0.9;
    slack.v_max = 1.1;
    gridflex::Bus load = slack;
    load.id = 1;
    load.kind = gridflex::BusKind::Pq;
    load.p_load = p_load;
    load.q_load = q_load;
    net.buses = {slack, load};
    gridflex::Branch br;
    br.from = 0;
    br.to = 1;
    br.r = 0.01;
    br.x = 0.03;
    net.branches = {br};
    net.storage.push_back({1, 0.2, 0.5, 0.5, 0.5});
    net.pv.push_back({1, 0.1});
    return net;
}

// 3-bus chain used across the model and scheduling tests
inline gridflex::Network three_bus() {
    gridflex::Network net;
    net.base_mva = 1.0;
    for (int i = 0; i < 3; ++i) {
        gridflex::Bus b;
        b.id = i;
        b.kind = i == 0 ? gridflex::BusKind::Slack : gridflex::BusKind::Pq;
        b.v_min = 0.9;
        b.v_max = 1.1;
        net.buses.push_back(b);
    }
    net.buses[1].p_load = 0.3;
    net.buses[1].q_load = 0.1;
    net.buses[2].p_load = 0.2;
    net.buses[2].q_load = 0.05;
    net.branches.push_back({0, 1, 0.02, 0.06, gridflex::kInf});
    net.branches.push_back({1, 2, 0.03, 0.08, gridflex::kInf});
    net.storage.push_back({2, 0.1, 0.4, 0.5, 0.5});
    net.pv.push_back({1, 0.15});
    return net;
}

// Appends equality pins for the named columns and solves the remaining
// square system; the model must be fully determined once pinned.
inline gridflex::Vector pinned_point(const gridflex::LinearModel& model,
                                     const std::vector<std::pair<std::string, double>>& pins) {
    gridflex::LinearModel ext = model;
    for (const auto& [name, value] : pins) {
        gridflex::Vector row(ext.cols(), 0.0);
        row[ext.col(name)] = 1.0;
        ext.rows.append_row(row);
        ext.c.push_back(value);
    }
    const gridflex::ReducedModel red = gridflex::reduce_model(ext);
    if (!red.feasible) throw gridflex::Error("pinned model is infeasible");
    return gridflex::reconstruct(red, gridflex::Vector(red.free_cols.size(), 0.0));
}

// Pins every storage column to zero, the natural probe point.
inline gridflex::Vector idle_storage_point(const gridflex::LinearModel& model,
                                           std::size_t fleet_size) {
    std::vector<std::pair<std::string, double>> pins;
    for (std::size_t k = 0; k < fleet_size; ++k)
        pins.emplace_back("sto[" + std::to_string(k) + "]", 0.0);
    return pinned_point(model, pins);
}

}  // namespace testutil
