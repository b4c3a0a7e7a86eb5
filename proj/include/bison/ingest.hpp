#pragma once

#include "bison/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace bison {

// dense_csv: header "gene_id,<spot ids...>", then one row per gene.
// triplet:   header "p n nnz", then "gene spot count" lines with 1-based
//            indices separated by whitespace or commas. Unlisted cells are 0.
enum class CountFormat { dense_csv, triplet };

enum class LatticeKind { square, triangular, explicit_edges };

CountFormat parse_count_format(const std::string& name);
LatticeKind parse_lattice_kind(const std::string& name);

CountMatrix read_counts(const std::string& path, CountFormat format);
CountMatrix parse_counts(const std::string& text, CountFormat format);
void write_counts(const CountMatrix& counts, const std::string& path, CountFormat format);
std::string format_counts(const CountMatrix& counts, CountFormat format);

// Coordinates file: header "spot_id,x,y" then one line per spot.
struct SpotCoords {
    std::vector<std::string> ids;
    std::vector<Point> points;
};

SpotCoords read_coords(const std::string& path);
void write_coords(const SpotCoords& coords, const std::string& path);

// Returns coords reordered to follow spot_ids. Throws InputError when a spot
// is missing or the id sets differ.
std::vector<Point> align_coords(const SpotCoords& coords, const std::vector<std::string>& spot_ids);

// Edge file: header "spot_a,spot_b" then one pair of spot ids per line.
std::vector<std::pair<int, int>> read_edges(const std::string& path,
                                            const std::vector<std::string>& spot_ids);

// Relative tolerance on the lattice spacing used by build_adjacency.
inline constexpr double kLatticeTolerance = 0.05;

// Neighbours are spots whose distance lies within unit * (1 +- 5%). Throws
// InputError if a spot collects more than 4 (square) or 6 (triangular)
// neighbours, which points at the wrong lattice kind or spacing.
SpatialLayout build_adjacency(const std::vector<Point>& coords, LatticeKind kind, double unit);

} // namespace bison
