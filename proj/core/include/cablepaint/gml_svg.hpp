#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cablepaint/stroke.hpp"

namespace cablepaint {

// GML subset: <gml><tag><drawing><stroke><pt><x/><y/>[<z/>][<t/>].
// Coordinates are normalized to the unit box (y flipped up) and timestamps
// are kept as vertex times. One shape per file.
std::vector<Stroke> load_gml(const std::string& path);

// SVG subset: <path d="..."> restricted to M/L/H/V/C/Q/Z (absolute or
// relative). Curves are flattened to polylines with chord deviation at most
// flatten_tol (in the file's own units). Coordinates are normalized against
// the viewBox (or the content bounding box) to the unit box, y up. Returns
// one named stroke set per path element, named by its id attribute or
// path-<n>.
std::vector<std::pair<std::string, std::vector<Stroke>>> load_svg_paths(
    const std::string& path, double flatten_tol);

}  // namespace cablepaint
