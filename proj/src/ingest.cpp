#include "bison/ingest.hpp"

#include "bison/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace bison {

namespace {

std::vector<std::string_view> lines_of(const std::string& text) {
    std::vector<std::string_view> out;
    std::string_view all(text);
    std::size_t start = 0;
    while (start <= all.size()) {
        std::size_t stop = all.find('\n', start);
        if (stop == std::string_view::npos) stop = all.size();
        std::string_view line = all.substr(start, stop - start);
        if (!trim(line).empty()) out.push_back(line);
        start = stop + 1;
    }
    return out;
}

Count parse_count(std::string_view field, const std::string& where) {
    field = trim(field);
    double v = 0.0;
    try {
        v = parse_real(field, "count");
    } catch (const InputError&) {
        throw InputError("non-numeric count '" + std::string(field) + "' " + where);
    }
    if (v < 0.0) throw InputError("negative count " + std::string(field) + " " + where);
    if (v != std::floor(v) || !std::isfinite(v) || v > 9.0e15)
        throw InputError("non-integer count " + std::string(field) + " " + where);
    return static_cast<Count>(v);
}

CountMatrix parse_dense(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw InputError("empty count file");
    const auto header = split_csv(lines[0]);
    if (header.size() < 3) throw InputError("dense count header needs gene_id plus >= 2 spots");
    std::vector<std::string> spot_ids;
    for (std::size_t c = 1; c < header.size(); ++c) spot_ids.emplace_back(header[c]);
    const std::size_t n = spot_ids.size();

    std::vector<std::string> gene_ids;
    std::vector<Count> values;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto fields = split_csv(lines[l]);
        if (fields.size() != n + 1)
            throw InputError("line " + std::to_string(l + 1) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(n + 1));
        gene_ids.emplace_back(fields[0]);
        for (std::size_t c = 1; c <= n; ++c)
            values.push_back(parse_count(fields[c], "for gene " + gene_ids.back()));
    }
    const std::size_t p = gene_ids.size();
    return CountMatrix(p, n, std::move(values), std::move(gene_ids), std::move(spot_ids));
}

CountMatrix parse_triplet(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw InputError("empty triplet file");
    const auto header = split_fields(lines[0], " \t,");
    if (header.size() != 3) throw InputError("triplet header must be 'p n nnz'");
    const long long p = parse_integer(header[0], "p");
    const long long n = parse_integer(header[1], "n");
    const long long nnz = parse_integer(header[2], "nnz");
    if (p < 1 || n < 2 || nnz < 0) throw InputError("invalid triplet header dimensions");
    if (static_cast<long long>(lines.size()) - 1 != nnz)
        throw InputError("triplet header declares " + std::to_string(nnz) + " entries, found " +
                         std::to_string(lines.size() - 1));

    std::vector<Count> values(static_cast<std::size_t>(p * n), 0);
    std::vector<char> seen(values.size(), 0);
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto f = split_fields(lines[l], " \t,\r");
        const std::string where = "on line " + std::to_string(l + 1);
        if (f.size() != 3) throw InputError("triplet entry must have 3 fields " + where);
        const long long j = parse_integer(f[0], "gene index");
        const long long i = parse_integer(f[1], "spot index");
        if (j < 1 || j > p || i < 1 || i > n) throw InputError("index out of range " + where);
        const auto cell = static_cast<std::size_t>((j - 1) * n + (i - 1));
        if (seen[cell])
            throw InputError("duplicate entry for gene " + std::to_string(j) + ", spot " +
                             std::to_string(i) + " " + where);
        seen[cell] = 1;
        values[cell] = parse_count(f[2], where);
    }
    return CountMatrix(static_cast<std::size_t>(p), static_cast<std::size_t>(n),
                       std::move(values));
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
    if (!out) throw InputError("failed writing " + path);
}

} // namespace

CountFormat parse_count_format(const std::string& name) {
    if (name == "dense-csv" || name == "dense") return CountFormat::dense_csv;
    if (name == "triplet") return CountFormat::triplet;
    throw InputError("unknown count format '" + name + "' (dense-csv or triplet)");
}

LatticeKind parse_lattice_kind(const std::string& name) {
    if (name == "square") return LatticeKind::square;
    if (name == "triangular") return LatticeKind::triangular;
    if (name == "explicit") return LatticeKind::explicit_edges;
    throw InputError("unknown lattice kind '" + name + "'");
}

CountMatrix parse_counts(const std::string& text, CountFormat format) {
    return format == CountFormat::dense_csv ? parse_dense(text) : parse_triplet(text);
}

CountMatrix read_counts(const std::string& path, CountFormat format) {
    try {
        return parse_counts(read_file(path), format);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::string format_counts(const CountMatrix& counts, CountFormat format) {
    std::ostringstream out;
    const std::size_t p = counts.genes(), n = counts.spots();
    if (format == CountFormat::dense_csv) {
        out << "gene_id";
        for (const auto& id : counts.spot_ids()) out << ',' << id;
        out << '\n';
        for (std::size_t j = 0; j < p; ++j) {
            out << counts.gene_ids()[j];
            for (std::size_t i = 0; i < n; ++i) out << ',' << counts(j, i);
            out << '\n';
        }
    } else {
        const auto nnz = std::count_if(counts.values().begin(), counts.values().end(),
                                       [](Count c) { return c != 0; });
        out << p << ' ' << n << ' ' << nnz << '\n';
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t i = 0; i < n; ++i)
                if (counts(j, i) != 0) out << j + 1 << ' ' << i + 1 << ' ' << counts(j, i) << '\n';
    }
    return out.str();
}

void write_counts(const CountMatrix& counts, const std::string& path, CountFormat format) {
    write_text(path, format_counts(counts, format));
}

SpotCoords read_coords(const std::string& path) {
    const std::string text = read_file(path);
    const auto lines = lines_of(text);
    if (lines.empty()) throw InputError(path + ": empty coordinate file");
    SpotCoords out;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto f = split_csv(lines[l]);
        if (f.size() < 3)
            throw InputError(path + ": line " + std::to_string(l + 1) + " needs spot_id,x,y");
        out.ids.emplace_back(f[0]);
        out.points.push_back({parse_real(f[1], "x coordinate"), parse_real(f[2], "y coordinate")});
    }
    return out;
}

void write_coords(const SpotCoords& coords, const std::string& path) {
    std::ostringstream out;
    out << "spot_id,x,y\n";
    for (std::size_t i = 0; i < coords.ids.size(); ++i)
        out << coords.ids[i] << ',' << format_real(coords.points[i].x) << ','
            << format_real(coords.points[i].y) << '\n';
    write_text(path, out.str());
}

std::vector<Point> align_coords(const SpotCoords& coords, const std::vector<std::string>& spot_ids) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < coords.ids.size(); ++i)
        if (!index.emplace(coords.ids[i], i).second)
            throw InputError("duplicate spot id in coordinates: " + coords.ids[i]);
    if (coords.ids.size() != spot_ids.size())
        throw InputError("coordinates list " + std::to_string(coords.ids.size()) +
                         " spots, counts have " + std::to_string(spot_ids.size()));
    std::vector<Point> out;
    out.reserve(spot_ids.size());
    for (const auto& id : spot_ids) {
        auto it = index.find(id);
        if (it == index.end()) throw InputError("no coordinates for spot " + id);
        out.push_back(coords.points[it->second]);
    }
    return out;
}

std::vector<std::pair<int, int>> read_edges(const std::string& path,
                                            const std::vector<std::string>& spot_ids) {
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < spot_ids.size(); ++i) index.emplace(spot_ids[i], static_cast<int>(i));
    const std::string text = read_file(path);
    const auto lines = lines_of(text);
    std::vector<std::pair<int, int>> edges;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto f = split_csv(lines[l]);
        if (f.size() != 2) throw InputError(path + ": line " + std::to_string(l + 1) + " needs two ids");
        auto a = index.find(std::string(f[0]));
        auto b = index.find(std::string(f[1]));
        if (a == index.end() || b == index.end())
            throw InputError(path + ": unknown spot id on line " + std::to_string(l + 1));
        if (a->second == b->second)
            throw InputError(path + ": self edge on line " + std::to_string(l + 1));
        edges.emplace_back(a->second, b->second);
    }
    return edges;
}

SpatialLayout build_adjacency(const std::vector<Point>& coords, LatticeKind kind, double unit) {
    if (kind == LatticeKind::explicit_edges)
        throw std::invalid_argument("explicit adjacency comes from an edge list, not coordinates");
    if (!(unit > 0.0) || !std::isfinite(unit)) throw InputError("lattice unit must be positive");

    const double lo = unit * (1.0 - kLatticeTolerance);
    const double hi = unit * (1.0 + kLatticeTolerance);
    const std::size_t max_degree = kind == LatticeKind::square ? 4 : 6;
    const std::size_t n = coords.size();

    // Bucket spots on a grid of cell size hi so only adjacent cells are scanned.
    std::unordered_map<long long, std::vector<int>> buckets;
    auto cell_of = [&](double v) { return static_cast<long long>(std::floor(v / hi)); };
    auto key = [](long long cx, long long cy) { return cx * 1000003LL + cy; };
    for (std::size_t i = 0; i < n; ++i)
        buckets[key(cell_of(coords[i].x), cell_of(coords[i].y))].push_back(static_cast<int>(i));

    std::vector<std::pair<int, int>> edges;
    std::vector<std::size_t> degree(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const long long cx = cell_of(coords[i].x), cy = cell_of(coords[i].y);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = buckets.find(key(cx + dx, cy + dy));
                if (it == buckets.end()) continue;
                for (int other : it->second) {
                    if (other <= static_cast<int>(i)) continue;
                    const double d = std::hypot(coords[i].x - coords[other].x,
                                                coords[i].y - coords[other].y);
                    if (d == 0.0)
                        throw InputError("spots " + std::to_string(i + 1) + " and " +
                                         std::to_string(other + 1) + " share coordinates");
                    if (d >= lo && d <= hi) {
                        edges.emplace_back(static_cast<int>(i), other);
                        ++degree[i];
                        ++degree[static_cast<std::size_t>(other)];
                    }
                }
            }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (degree[i] > max_degree)
            throw InputError("spot " + std::to_string(i + 1) + " has " + std::to_string(degree[i]) +
                             " neighbours; check the lattice kind and unit");
    return SpatialLayout(coords, edges);
}

} // namespace bison
