#include "woc/election.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "woc/errors.hpp"
#include "woc/util.hpp"

namespace woc {

ElectoralTally to_electoral_votes(const std::vector<StatePrediction>& predictions) {
    ElectoralTally tally;
    std::set<std::string> seen;
    for (const auto& p : predictions) {
        if (!seen.insert(p.state).second) {
            throw Error("duplicate state in predictions: " + p.state);
        }
        if (!std::isfinite(p.dem_share_predicted)) {
            throw Error("non-finite predicted share for " + p.state);
        }
        if (p.electoral_votes < 1) {
            throw Error("electoral_votes must be >= 1 for " + p.state);
        }
        if (p.dem_share_predicted == 50.0) {
            throw Error("tie prediction for " + p.state +
                        ": share is exactly 50.0 and ties are not allowed");
        }
        const bool dem_wins = p.dem_share_predicted > 50.0;
        tally.per_state_winner[p.state] = dem_wins ? 'D' : 'R';
        if (dem_wins) tally.dem_votes += p.electoral_votes;
        else tally.rep_votes += p.electoral_votes;
    }
    return tally;
}

std::vector<StateGeometry> load_geometry(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError("geometry file " + path + ": " + e.what());
    }
    if (!doc.contains("states") || !doc["states"].is_array()) {
        throw LoadError("geometry file " + path + " has no states array");
    }
    std::vector<StateGeometry> out;
    for (const auto& s : doc["states"]) {
        StateGeometry g;
        g.name = s.at("name").get<std::string>();
        g.abbr = s.value("abbr", "");
        for (const auto& pt : s.at("polygon")) {
            g.polygon.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
        }
        if (g.polygon.size() < 3) {
            throw LoadError("geometry for " + g.name + " has fewer than 3 points");
        }
        out.push_back(std::move(g));
    }
    return out;
}

namespace {

struct Rgb {
    int r, g, b;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    auto mix = [&](int x, int y) { return static_cast<int>(std::lround(x + (y - x) * t)); };
    return Rgb{mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::string hex(const Rgb& c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

} // namespace

std::string share_color(double dem_share) {
    // 50 is neutral; full saturation at +-25 points.
    const Rgb neutral{247, 247, 247};
    const Rgb blue{33, 102, 172};
    const Rgb red{178, 24, 43};
    const double t = std::clamp((dem_share - 50.0) / 25.0, -1.0, 1.0);
    if (t >= 0.0) return hex(lerp(neutral, blue, t));
    return hex(lerp(neutral, red, -t));
}

std::string render_map(const std::vector<StatePrediction>& predictions,
                       const ElectoralTally& tally, const std::vector<StateGeometry>& geometry,
                       const std::string& title) {
    std::map<std::string, const StatePrediction*> by_state;
    for (const auto& p : predictions) by_state[p.state] = &p;

    std::vector<std::string> missing;
    for (const auto& g : geometry) {
        if (!by_state.count(g.name)) missing.push_back(g.name);
    }
    if (!missing.empty()) {
        std::string msg = "missing prediction for state(s): ";
        for (std::size_t i = 0; i < missing.size(); ++i) {
            if (i > 0) msg += ", ";
            msg += missing[i];
        }
        throw Error(msg);
    }

    double max_x = 0.0, max_y = 0.0;
    for (const auto& g : geometry) {
        for (const auto& [x, y] : g.polygon) {
            max_x = std::max(max_x, x);
            max_y = std::max(max_y, y);
        }
    }
    const int width = static_cast<int>(std::ceil(max_x)) + 20;
    const int height = static_cast<int>(std::ceil(max_y)) + 60;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) + "\">\n";
    svg += "<style>text{font-family:sans-serif;}</style>\n";
    svg += "<text x=\"10\" y=\"20\" font-size=\"14\">" + title + "</text>\n";
    svg += "<text x=\"10\" y=\"38\" font-size=\"12\">Electoral votes: Democrat " +
           std::to_string(tally.dem_votes) + ", Republican " + std::to_string(tally.rep_votes) +
           "</text>\n";
    svg += "<g transform=\"translate(10,48)\">\n";

    for (const auto& g : geometry) {
        const StatePrediction& p = *by_state.at(g.name);
        std::string points;
        double cx = 0.0, cy = 0.0;
        for (const auto& [x, y] : g.polygon) {
            if (!points.empty()) points += ' ';
            points += format_double(x) + "," + format_double(y);
            cx += x;
            cy += y;
        }
        cx /= static_cast<double>(g.polygon.size());
        cy /= static_cast<double>(g.polygon.size());
        svg += "<polygon points=\"" + points + "\" fill=\"" + share_color(p.dem_share_predicted) +
               "\" stroke=\"#333333\" stroke-width=\"1\"><title>" + g.name + ": " +
               format_fixed(p.dem_share_predicted, 1) + " (" +
               format_fixed(p.dem_share_actual, 1) + ")</title></polygon>\n";
        svg += "<text x=\"" + format_double(cx) + "\" y=\"" + format_double(cy - 4.0) +
               "\" font-size=\"10\" text-anchor=\"middle\">" + g.abbr + "</text>\n";
        // Label convention: predicted first, actual in brackets.
        svg += "<text x=\"" + format_double(cx) + "\" y=\"" + format_double(cy + 8.0) +
               "\" font-size=\"7\" text-anchor=\"middle\">" +
               format_fixed(p.dem_share_predicted, 1) + " (" +
               format_fixed(p.dem_share_actual, 1) + ")</text>\n";
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

std::string tally_to_json(const std::vector<StatePrediction>& predictions,
                          const ElectoralTally& tally) {
    nlohmann::json j;
    j["dem_votes"] = tally.dem_votes;
    j["rep_votes"] = tally.rep_votes;
    auto arr = nlohmann::json::array();
    for (const auto& p : predictions) {
        arr.push_back({{"state", p.state},
                       {"dem_share_predicted", p.dem_share_predicted},
                       {"dem_share_actual", p.dem_share_actual},
                       {"electoral_votes", p.electoral_votes},
                       {"winner", std::string(1, tally.per_state_winner.at(p.state))}});
    }
    j["per_state"] = std::move(arr);
    return j.dump(2) + "\n";
}

} // namespace woc
