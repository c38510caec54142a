#pragma once

#include <map>
#include <string>
#include <vector>

namespace woc {

struct StatePrediction {
    std::string state;
    double dem_share_predicted = 0.0; // percent, 0-100
    double dem_share_actual = 0.0;    // percent, 0-100
    int electoral_votes = 0;
};

struct ElectoralTally {
    int dem_votes = 0;
    int rep_votes = 0;
    std::map<std::string, char> per_state_winner; // 'D' or 'R'
};

// Winner-take-all conversion: the Democrat carries a state iff the
// predicted share is strictly above 50.0. A share of exactly 50.0 is a
// tie prediction and is rejected (the prompt forbids ties; surfacing the
// condition beats silently picking a side).
ElectoralTally to_electoral_votes(const std::vector<StatePrediction>& predictions);

struct StateGeometry {
    std::string name;
    std::string abbr;
    std::vector<std::pair<double, double>> polygon;
};

// Geometry asset: {"tile_size": ..., "states": [{name, abbr, polygon}]}.
std::vector<StateGeometry> load_geometry(const std::string& path);

// Diverging-scale interpolation for a Democratic share (blue above 50,
// red below); returns "#rrggbb".
std::string share_color(double dem_share);

// One self-contained SVG: every geometry state filled by predicted share,
// labeled "predicted (actual)", with the tally embedded in the header.
// Byte-deterministic for identical input. Throws when a geometry state has
// no prediction, listing the missing names.
std::string render_map(const std::vector<StatePrediction>& predictions,
                       const ElectoralTally& tally, const std::vector<StateGeometry>& geometry,
                       const std::string& title);

std::string tally_to_json(const std::vector<StatePrediction>& predictions,
                          const ElectoralTally& tally);

} // namespace woc
