#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gridflex/campaign.hpp"
#include "gridflex/network.hpp"
#include "gridflex/profiles.hpp"
#include "test_util.hpp"

using namespace gridflex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempTree {
    fs::path root;
    explicit TempTree(const std::string& tag) {
        root = fs::temp_directory_path() / ("gridflex_test_" + tag);
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~TempTree() { fs::remove_all(root); }
};

CampaignConfig mini_config(const TempTree& tree, const std::string& out_name) {
    const Network net = testutil::three_bus();
    save_network(net, (tree.root / "net.json").string());

    DayProfile profile = default_workday_profile();
    profile.load_pu.resize(4);
    profile.pv_pu.resize(4);
    save_profile(profile, (tree.root / "day.csv").string());

    CampaignConfig cfg;
    cfg.network_path = (tree.root / "net.json").string();
    cfg.profiles_path = (tree.root / "day.csv").string();
    cfg.models = {"dc", "lin_ac", "ac"};
    cfg.horizon = 4;
    cfg.directions = 16;
    cfg.out_dir = (tree.root / out_name).string();
    return cfg;
}

}  // namespace

TEST_CASE("campaign config json round trips with defaults") {
    const std::string text = R"({"models": ["dc", "ac"], "horizon": 6})";
    const CampaignConfig cfg = campaign_config_from_json(text);
    CHECK(cfg.models == std::vector<std::string>{"dc", "ac"});
    CHECK(cfg.horizon == 6);
    CHECK(cfg.directions == 64);
    CHECK(cfg.alpha == 1.0);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.network_path.empty());

    const CampaignConfig back = campaign_config_from_json(campaign_config_to_json(cfg));
    CHECK(back.models == cfg.models);
    CHECK(back.horizon == cfg.horizon);
    CHECK(back.directions == cfg.directions);
    CHECK(back.out_dir == cfg.out_dir);

    CHECK_THROWS_AS(campaign_config_from_json(R"({"horizon": 4})"), Error);
    CHECK_THROWS_AS(campaign_config_from_json("not json"), Error);
}

TEST_CASE("a small campaign writes the full artifact tree") {
    TempTree tree("campaign");
    const CampaignConfig cfg = mini_config(tree, "out");
    REQUIRE(run_campaign(cfg) == 0);

    const fs::path out = cfg.out_dir;
    for (const char* model : {"dc", "lin_ac", "ac"}) {
        CAPTURE(model);
        CHECK(fs::exists(out / model / "schedule.csv"));
        CHECK(fs::exists(out / model / "summary.json"));
        CHECK(fs::exists(out / model / "verification.csv"));
        CHECK(fs::exists(out / model / "violations.json"));
    }
    CHECK(fs::exists(out / "dc" / "envelope.json"));
    CHECK(fs::exists(out / "lin_ac" / "envelope.json"));
    CHECK_FALSE(fs::exists(out / "ac" / "envelope.json"));
    CHECK(fs::exists(out / "comparison.csv"));
    CHECK(fs::exists(out / "fig_ppcc.svg"));
    CHECK(fs::exists(out / "fig_soc.svg"));

    // one header line plus one row per model, in config order
    std::istringstream comparison(slurp(out / "comparison.csv"));
    std::string line;
    REQUIRE(std::getline(comparison, line));
    CHECK(line.rfind("model,topology,", 0) == 0);
    std::size_t rows = 0;
    std::string first_model;
    while (std::getline(comparison, line)) {
        if (line.empty()) continue;
        if (rows == 0) first_model = line.substr(0, line.find(','));
        ++rows;
    }
    CHECK(rows == 3);
    CHECK(first_model == "dc");

    // the lossless branch must report a final soc below target
    const nlohmann::json dc_violations =
        nlohmann::json::parse(slurp(out / "dc" / "violations.json"));
    CHECK(dc_violations.at("final_soc_agg").get<double>() <
          dc_violations.at("final_soc_target").get<double>());
    // while the ac benchmark closes on it
    const nlohmann::json ac_violations =
        nlohmann::json::parse(slurp(out / "ac" / "violations.json"));
    CHECK(ac_violations.at("final_soc_agg").get<double>() ==
          doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("the same campaign run twice is byte identical") {
    TempTree tree("determinism");
    CampaignConfig first = mini_config(tree, "a");
    CampaignConfig second = first;
    second.out_dir = (tree.root / "b").string();
    REQUIRE(run_campaign(first) == 0);
    REQUIRE(run_campaign(second) == 0);

    for (const char* rel : {"comparison.csv", "fig_ppcc.svg", "fig_soc.svg", "dc/schedule.csv",
                            "dc/verification.csv", "dc/envelope.json", "lin_ac/schedule.csv",
                            "ac/schedule.csv", "ac/violations.json"}) {
        CAPTURE(rel);
        CHECK(slurp(fs::path(first.out_dir) / rel) == slurp(fs::path(second.out_dir) / rel));
    }
}

TEST_CASE("a campaign for one model skips the comparison matrix") {
    TempTree tree("single");
    CampaignConfig cfg = mini_config(tree, "out");
    cfg.models = {"dc"};
    REQUIRE(run_campaign(cfg) == 0);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "dc" / "schedule.csv"));
    CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "comparison.csv"));
}

TEST_CASE("a missing network file fails loudly") {
    TempTree tree("missing");
    CampaignConfig cfg;
    cfg.models = {"dc"};
    cfg.network_path = (tree.root / "nope.json").string();
    cfg.out_dir = (tree.root / "out").string();
    CHECK_THROWS_AS(run_campaign(cfg), Error);
}

TEST_CASE("model names are canonicalized before branching") {
    TempTree tree("names");
    CampaignConfig cfg = mini_config(tree, "out");
    cfg.models = {"Lin-AC"};
    REQUIRE(run_campaign(cfg) == 0);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "lin_ac" / "schedule.csv"));
}
