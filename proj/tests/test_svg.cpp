#include <doctest.h>

#include <string>
#include <vector>

#include "gridflex/svg.hpp"

using namespace gridflex;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

std::vector<PlotSeries> sample_series() {
    PlotSeries a{"scheduled", {0, 1, 2, 3}, {0.5, 0.8, 0.6, 0.9}};
    PlotSeries b{"verified", {0, 1, 2, 3}, {0.55, 0.85, 0.7, 0.95}};
    return {a, b};
}

}  // namespace

TEST_CASE("svg output is deterministic and one path per series") {
    const std::vector<PlotSeries> series = sample_series();
    const std::string svg = emit_svg(series, "PCC import", "hour", "p.u.");
    CHECK(svg == emit_svg(series, "PCC import", "hour", "p.u."));
    CHECK(count_of(svg, "<path ") == series.size());
    CHECK(svg.find("PCC import") != std::string::npos);
    CHECK(svg.find("hour") != std::string::npos);
    CHECK(svg.find("p.u.") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    // legend respects input order
    CHECK(svg.find("scheduled") < svg.find("verified"));
    // first two palette entries are used
    CHECK(svg.find("#1f77b4") != std::string::npos);
    CHECK(svg.find("#d62728") != std::string::npos);
}

TEST_CASE("labels are xml escaped") {
    PlotSeries s{"P & Q <mixed>", {0, 1}, {1.0, 2.0}};
    const std::string svg = emit_svg({s}, "a < b", "t", "y");
    CHECK(svg.find("P &amp; Q &lt;mixed&gt;") != std::string::npos);
    CHECK(svg.find("a &lt; b") != std::string::npos);
    CHECK(svg.find("<mixed>") == std::string::npos);
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(emit_svg({}, "t", "x", "y"), Error);
    PlotSeries ragged{"r", {0, 1, 2}, {1.0}};
    CHECK_THROWS_AS(emit_svg({ragged}, "t", "x", "y"), Error);
    PlotSeries empty{"e", {}, {}};
    CHECK_THROWS_AS(emit_svg({empty}, "t", "x", "y"), Error);
}

TEST_CASE("flat series still renders with a finite axis range") {
    PlotSeries flat{"constant", {0, 1, 2}, {0.5, 0.5, 0.5}};
    const std::string svg = emit_svg({flat}, "flat", "x", "y");
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(svg.find("inf") == std::string::npos);
    CHECK(count_of(svg, "<path ") == 1);
}
