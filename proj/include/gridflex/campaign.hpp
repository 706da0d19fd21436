#pragma once

#include <string>
#include <vector>

namespace gridflex {

// Batch run over a day: per model, aggregate, schedule, verify; artifacts
// land under out_dir/<model>/ plus the comparison matrix and two figures.
struct CampaignConfig {
    std::string network_path;   // empty: campus-like feeder generated from seed
    std::string profiles_path;  // empty: bundled workday shape
    std::vector<std::string> models;
    std::size_t horizon = 24;
    std::size_t directions = 64;
    double alpha = 1.0;
    double beta = 0.0;
    std::string out_dir = "out";
    unsigned int seed = 1;
};

CampaignConfig campaign_config_from_json(const std::string& text);
std::string campaign_config_to_json(const CampaignConfig& cfg);
CampaignConfig load_campaign_config(const std::string& path);

// Runs every model branch concurrently; a failed branch logs to stderr and
// the rest continue. Returns 0 if at least one branch finished, 1 otherwise.
int run_campaign(const CampaignConfig& cfg);

}  // namespace gridflex
