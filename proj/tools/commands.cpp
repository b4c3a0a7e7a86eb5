#include "commands.hpp"

#include "bison/evaluate.hpp"
#include "bison/ingest.hpp"
#include "bison/likelihood.hpp"
#include "bison/sampler.hpp"
#include "bison/selection.hpp"
#include "bison/simulate.hpp"
#include "bison/summary.hpp"
#include "bison/text_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace bison::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string sha256_file(const std::string& path) {
    const std::string data = read_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

// Relative output paths are placed under $BISON_OUTPUT_ROOT when it is set.
fs::path resolve_output(const std::string& path) {
    fs::path out(path);
    if (out.is_relative())
        if (const char* root = std::getenv("BISON_OUTPUT_ROOT"); root && *root) out = fs::path(root) / out;
    return out;
}

fs::path prepare_dir(const std::string& path) {
    const fs::path dir = resolve_output(path);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

class Manifest {
public:
    Manifest(const std::string& command, const CLI::App& sub, int argc, char** argv)
        : start_(std::chrono::steady_clock::now()) {
        doc_["command"] = command;
        doc_["software_version"] = kVersion;
        json args = json::array();
        for (int a = 0; a < argc; ++a) args.push_back(argv[a]);
        doc_["argv"] = args;
        doc_["config"] = sub.config_to_str(true, false);
        doc_["started_at"] = utc_now();
        doc_["seeds"] = json::object();
        doc_["inputs"] = json::array();
    }

    void add_input(const std::string& path) {
        if (path.empty()) return;
        doc_["inputs"].push_back({{"path", path}, {"sha256", sha256_file(path)}});
    }

    void set_seed(const std::string& key, std::uint64_t seed) { doc_["seeds"][key] = seed; }
    json& extra() { return doc_; }

    void write(const fs::path& dir) {
        doc_["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_text(dir / "manifest.json", doc_.dump(2) + "\n");
    }

private:
    json doc_;
    std::chrono::steady_clock::time_point start_;
};

// Header-indexed CSV table of strings.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::initializer_list<const char*> names) const {
        for (const char* name : names)
            for (std::size_t c = 0; c < header.size(); ++c)
                if (header[c] == name) return static_cast<int>(c);
        return -1;
    }
};

Table read_table(const std::string& path) {
    std::istringstream in(read_file(path));
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> fields;
        for (auto f : split_csv(line)) fields.emplace_back(f);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != t.header.size())
                throw InputError(path + ": row has " + std::to_string(fields.size()) +
                                 " fields, header has " + std::to_string(t.header.size()));
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw InputError(path + ": empty table");
    return t;
}

struct IdLabels {
    std::vector<std::string> ids;
    std::vector<std::string> labels;
};

IdLabels read_labels(const std::string& path, std::initializer_list<const char*> columns) {
    const Table t = read_table(path);
    const int col = t.column(columns);
    if (col < 0) {
        std::string names;
        for (const char* c : columns) names += std::string(names.empty() ? "" : ", ") + c;
        throw InputError(path + ": no label column (" + names + ")");
    }
    IdLabels out;
    for (const auto& row : t.rows) {
        out.ids.push_back(row[0]);
        out.labels.push_back(row[static_cast<std::size_t>(col)]);
    }
    return out;
}

struct DataOptions {
    std::string counts;
    std::string format = "dense-csv";
    std::string coords;
    std::string edges;
    std::string lattice = "square";
    double unit = 1.0;
};

struct McmcOptions {
    int iterations = 10000;
    int burn_in = 5000;
    int chains = 1;
    int thin = 1;
    std::uint64_t seed = 1;
    int threads = default_threads();

    McmcConfig config() const {
        McmcConfig c;
        c.iterations = iterations;
        c.burn_in = burn_in;
        c.chains = chains;
        c.thin = thin;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
    cmd->add_option("--counts", o.counts, "Count matrix file (genes x spots)")->required();
    cmd->add_option("--format", o.format, "Count file format: dense-csv or triplet")
        ->capture_default_str();
    cmd->add_option("--coords", o.coords, "Spot coordinates CSV (spot_id,x,y)");
    cmd->add_option("--edges", o.edges, "Explicit adjacency CSV (spot_a,spot_b)");
    cmd->add_option("--lattice", o.lattice, "Lattice kind for coordinate adjacency: square or triangular")
        ->capture_default_str();
    cmd->add_option("--unit", o.unit, "Nominal lattice spacing")->capture_default_str();
}

void add_hyper_options(CLI::App* cmd, Hyperparameters& hp) {
    cmd->add_option("--alpha-mu", hp.alpha_mu, "Gamma shape for block rates")->capture_default_str();
    cmd->add_option("--beta-mu", hp.beta_mu, "Gamma rate for block rates")->capture_default_str();
    cmd->add_option("--alpha-0", hp.alpha_0, "Gamma shape for the null rate")->capture_default_str();
    cmd->add_option("--beta-0", hp.beta_0, "Gamma rate for the null rate")->capture_default_str();
    cmd->add_option("--alpha-pi", hp.alpha_pi, "Beta prior on the null proportion")->capture_default_str();
    cmd->add_option("--beta-pi", hp.beta_pi, "Beta prior on the null proportion")->capture_default_str();
    cmd->add_option("--gamma", hp.gamma, "Urn total mass")->capture_default_str();
    cmd->add_option("--b", hp.b, "MRF abundance, one value or K values (default 1)")->delimiter(',');
    cmd->add_option("--h", hp.h, "MRF smoothing strength")->capture_default_str();
}

void add_mcmc_options(CLI::App* cmd, McmcOptions& o) {
    cmd->add_option("--iterations", o.iterations, "MCMC iterations")->capture_default_str();
    cmd->add_option("--burn-in", o.burn_in, "Discarded initial iterations")->capture_default_str();
    cmd->add_option("--chains", o.chains, "Independent chains (pooled in the summary)")->capture_default_str();
    cmd->add_option("--thin", o.thin, "Keep every thin-th draw after burn-in")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads (results do not depend on this)");
}

struct LoadedData {
    CountMatrix counts;
    std::vector<Point> coords;
    SpatialLayout layout;
};

LoadedData load_data(const DataOptions& o, Manifest& manifest) {
    if (o.coords.empty() && o.edges.empty()) throw InputError("--coords or --edges is required");
    LoadedData d;
    d.counts = read_counts(o.counts, parse_count_format(o.format));
    manifest.add_input(o.counts);
    if (!o.coords.empty()) {
        d.coords = align_coords(read_coords(o.coords), d.counts.spot_ids());
        manifest.add_input(o.coords);
    } else {
        d.coords.assign(d.counts.spots(), Point{});
    }
    if (!o.edges.empty()) {
        d.layout = SpatialLayout(d.coords, read_edges(o.edges, d.counts.spot_ids()));
        manifest.add_input(o.edges);
    } else {
        const auto kind = parse_lattice_kind(o.lattice);
        if (kind == LatticeKind::explicit_edges) throw InputError("--lattice explicit requires --edges");
        d.layout = build_adjacency(d.coords, kind, o.unit);
    }
    return d;
}

void write_fit_outputs(const fs::path& dir, const LoadedData& data, const McmcSamples& samples,
                       const FitSummary& fit, double micl, bool write_ppm) {
    for (int c = 0; c < static_cast<int>(samples.chains.size()); ++c)
        write_draws(samples, c, (dir / ("draws_chain" + std::to_string(c + 1) + ".txt")).string());

    std::ostringstream trace;
    trace << "chain,iteration,log_posterior\n";
    for (std::size_t c = 0; c < samples.chains.size(); ++c)
        for (std::size_t t = 0; t < samples.chains[c].trace.size(); ++t)
            trace << c + 1 << ',' << t + 1 << ',' << format_real(samples.chains[c].trace[t]) << '\n';
    write_text(dir / "trace.csv", trace.str());

    write_text(dir / "summary.json", summary_json(fit, micl));
    write_spot_table(fit, data.counts.spot_ids(), data.coords, (dir / "spots.csv").string());
    write_gene_table(fit, data.counts.gene_ids(), (dir / "genes.csv").string());
    write_mu_table(fit, (dir / "mu.csv").string());
    if (write_ppm) {
        bison::write_ppm(fit.ppm_spot, data.counts.spot_ids(), (dir / "ppm_spot.csv").string());
        bison::write_ppm(fit.ppm_gene, data.counts.gene_ids(), (dir / "ppm_gene.csv").string());
    }
}

std::optional<WarmStart> load_warm_start(const std::string& spots, const std::string& genes,
                                         const CountMatrix& counts, int K, int R) {
    if (spots.empty() && genes.empty()) return std::nullopt;
    if (spots.empty() || genes.empty())
        throw InputError("--warm-spots and --warm-genes must be given together");
    auto align = [](const IdLabels& t, const std::vector<std::string>& ids, int offset, int lo,
                    int hi, const std::string& what) {
        std::unordered_map<std::string, int> by_id;
        for (std::size_t r = 0; r < t.ids.size(); ++r)
            by_id[t.ids[r]] = static_cast<int>(parse_integer(t.labels[r], what)) - offset;
        if (by_id.size() != ids.size()) throw InputError(what + " table does not match the data ids");
        Labels out;
        for (const auto& id : ids) {
            auto it = by_id.find(id);
            if (it == by_id.end()) throw InputError(what + " table has no entry for " + id);
            if (it->second < lo || it->second > hi) throw InputError(what + " label out of range for " + id);
            out.push_back(it->second);
        }
        return out;
    };
    WarmStart w;
    w.z = align(read_labels(spots, {"z_hat", "z", "label"}), counts.spot_ids(), 1, 0, K - 1, "warm spot");
    w.rho = align(read_labels(genes, {"rho_hat", "rho", "label"}), counts.gene_ids(), 0, 0, R, "warm gene");
    return w;
}

// ---------------------------------------------------------------- fit

struct FitOptions {
    DataOptions data;
    McmcOptions mcmc;
    Hyperparameters hyper;
    int K = 0;
    int R = 0;
    std::string out = "bison_fit";
    bool write_ppm = false;
    std::string warm_spots;
    std::string warm_genes;
};

int cmd_fit(const FitOptions& o, const CLI::App& sub, int argc, char** argv) {
    Manifest manifest("fit", sub, argc, argv);
    o.hyper.validate(o.K);
    const LoadedData data = load_data(o.data, manifest);
    McmcConfig config = o.mcmc.config();
    config.warm = load_warm_start(o.warm_spots, o.warm_genes, data.counts, o.K, o.R);
    manifest.add_input(o.warm_spots);
    manifest.add_input(o.warm_genes);
    config.validate();
    for (int c = 0; c < config.chains; ++c)
        manifest.set_seed("chain" + std::to_string(c + 1), derive_seed(config.seed, static_cast<std::uint64_t>(c)));

    const ScalingFactors factors = estimate_scaling_factors(data.counts);
    const McmcSamples samples = run_chains(data.counts, data.layout, factors, o.K, o.R, o.hyper, config);
    const FitSummary fit = summarize_fit(samples, data.counts, factors, o.hyper, o.write_ppm);
    std::vector<std::string> warnings;
    const double micl = compute_micl(data.counts, factors, fit, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

    const fs::path dir = prepare_dir(o.out);
    write_fit_outputs(dir, data, samples, fit, micl, o.write_ppm);
    manifest.extra()["micl"] = micl;
    manifest.write(dir);
    std::cout << "fit K=" << o.K << " R=" << o.R << " p0_hat=" << fit.p0_hat
              << " mICL=" << format_real(micl) << " -> " << dir.string() << '\n';
    return 0;
}

// ---------------------------------------------------------------- select

struct SelectOptions {
    DataOptions data;
    McmcOptions mcmc;
    Hyperparameters hyper;
    std::vector<int> Ks;
    std::vector<int> Rs;
    int grid_iterations = 4000;
    int grid_burn_in = 2000;
    bool no_refit = false;
    bool write_ppm = false;
    std::string out = "bison_select";
};

int cmd_select(const SelectOptions& o, const CLI::App& sub, int argc, char** argv) {
    Manifest manifest("select", sub, argc, argv);
    for (int K : o.Ks)
        if (K < 1) throw InputError("K grid values must be positive");
    for (int R : o.Rs)
        if (R < 1) throw InputError("R grid values must be positive");
    for (int K : o.Ks) o.hyper.validate(K);
    const LoadedData data = load_data(o.data, manifest);
    const ScalingFactors factors = estimate_scaling_factors(data.counts);

    McmcConfig grid_config = o.mcmc.config();
    grid_config.iterations = o.grid_iterations;
    grid_config.burn_in = o.grid_burn_in;
    grid_config.validate();
    manifest.set_seed("grid", grid_config.seed);

    const MiclGrid grid = grid_search(data.counts, data.layout, factors, o.Ks, o.Rs, o.hyper,
                                      grid_config, o.mcmc.threads);
    const fs::path dir = prepare_dir(o.out);
    write_text(dir / "grid.csv", format_grid_csv(grid));
    for (const auto& cell : grid.cells)
        if (!cell.ok()) std::cerr << "warning: R=" << cell.R << " K=" << cell.K << " failed: " << cell.error << '\n';
    if (!grid.best) throw std::runtime_error("every grid cell failed");
    const GridCell& best = grid.cells[*grid.best];
    manifest.extra()["selected"] = {{"R", best.R}, {"K", best.K}, {"micl", best.micl}};
    std::cout << "selected R=" << best.R << " K=" << best.K << " mICL=" << format_real(best.micl) << '\n';

    if (!o.no_refit) {
        McmcConfig config = o.mcmc.config();
        config.validate();
        const McmcSamples samples =
            run_chains(data.counts, data.layout, factors, best.K, best.R, o.hyper, config);
        const FitSummary fit = summarize_fit(samples, data.counts, factors, o.hyper, o.write_ppm);
        const double micl = compute_micl(data.counts, factors, fit);
        write_fit_outputs(dir, data, samples, fit, micl, o.write_ppm);
        manifest.set_seed("refit", config.seed);
    }
    manifest.write(dir);
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    SimConfig sim;
    std::string family = "poisson";
    int side = 16;
    std::string domain_map;
    std::string lattice = "square";
    double unit = 1.0;
    std::string format = "dense-csv";
    std::string out = "bison_sim";
};

DomainMap read_domain_map(const std::string& path, const std::string& lattice, double unit) {
    const Table t = read_table(path);
    const int cx = t.column({"x"}), cy = t.column({"y"}), cd = t.column({"domain", "label", "z_true"});
    if (cx < 0 || cy < 0 || cd < 0) throw InputError(path + ": domain map needs spot_id,x,y,domain");
    DomainMap map;
    map.kind = parse_lattice_kind(lattice);
    map.unit = unit;
    for (const auto& row : t.rows) {
        map.spots.ids.push_back(row[0]);
        map.spots.points.push_back({parse_real(row[static_cast<std::size_t>(cx)], "x"),
                                    parse_real(row[static_cast<std::size_t>(cy)], "y")});
        map.domains.push_back(static_cast<int>(parse_integer(row[static_cast<std::size_t>(cd)], "domain")) - 1);
    }
    return map;
}

int cmd_simulate(SimulateOptions o, const CLI::App& sub, int argc, char** argv) {
    Manifest manifest("simulate", sub, argc, argv);
    o.sim.family = parse_count_family(o.family);
    if (!o.domain_map.empty()) {
        o.sim.domain_map = read_domain_map(o.domain_map, o.lattice, o.unit);
        manifest.add_input(o.domain_map);
    } else {
        o.sim.domain_map = banded_lattice(o.side, o.sim.K);
    }
    try {
        o.sim.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    manifest.set_seed("simulation", o.sim.seed);
    const SimDataset data = generate_dataset(o.sim);

    const fs::path dir = prepare_dir(o.out);
    const auto format = parse_count_format(o.format);
    write_counts(data.counts, (dir / (format == CountFormat::dense_csv ? "counts.csv" : "counts.txt")).string(),
                 format);
    write_coords(data.coords, (dir / "coords.csv").string());
    write_truth(data, dir.string());
    manifest.write(dir);
    std::cout << "simulated p=" << data.counts.genes() << " n=" << data.counts.spots() << " -> "
              << dir.string() << '\n';
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
    std::string spots;
    std::string genes;
    std::string truth_spots;
    std::string truth_genes;
    std::vector<std::string> tags;
    std::string out;
};

// Labels compared by id; truth rows labelled NA or empty are skipped.
std::pair<Labels, Labels> matched_labels(const IdLabels& predicted, const IdLabels& truth,
                                         const std::string& what) {
    std::unordered_map<std::string, std::size_t> pred_index;
    for (std::size_t r = 0; r < predicted.ids.size(); ++r) pred_index[predicted.ids[r]] = r;
    if (pred_index.size() != truth.ids.size())
        throw InputError(what + ": prediction and truth list different ids");
    std::map<std::string, int> codes;
    auto code = [&](const std::string& s) { return codes.emplace(s, static_cast<int>(codes.size())).first->second; };
    Labels a, b;
    for (std::size_t r = 0; r < truth.ids.size(); ++r) {
        auto it = pred_index.find(truth.ids[r]);
        if (it == pred_index.end()) throw InputError(what + ": id " + truth.ids[r] + " has no prediction");
        if (truth.labels[r].empty() || truth.labels[r] == "NA") continue;
        a.push_back(code("p:" + predicted.labels[it->second]));
        b.push_back(code("t:" + truth.labels[r]));
    }
    return {a, b};
}

int cmd_evaluate(const EvaluateOptions& o) {
    if ((o.spots.empty() != o.truth_spots.empty()) || (o.genes.empty() != o.truth_genes.empty()))
        throw InputError("each of --spots/--genes needs its matching --truth-* file");
    if (o.spots.empty() && o.genes.empty()) throw InputError("nothing to evaluate");

    std::optional<double> ari_spot, ari_gene;
    DgMetrics dg;
    if (!o.spots.empty()) {
        auto [pred, truth] = matched_labels(read_labels(o.spots, {"z_hat", "label", "domain"}),
                                            read_labels(o.truth_spots, {"z_true", "label", "domain", "annotation"}),
                                            "spots");
        ari_spot = adjusted_rand_index(pred, truth);
    }
    if (!o.genes.empty()) {
        const auto pred = read_labels(o.genes, {"rho_hat", "label"});
        const auto truth = read_labels(o.truth_genes, {"rho_true", "label"});
        auto [a, b] = matched_labels(pred, truth, "genes");
        ari_gene = adjusted_rand_index(a, b);
        // Detection needs the raw 0 / non-0 labels, again aligned by id.
        std::unordered_map<std::string, std::string> by_id;
        for (std::size_t r = 0; r < pred.ids.size(); ++r) by_id[pred.ids[r]] = pred.labels[r];
        Labels hat, tru;
        for (std::size_t r = 0; r < truth.ids.size(); ++r) {
            if (truth.labels[r].empty() || truth.labels[r] == "NA") continue;
            hat.push_back(static_cast<int>(parse_integer(by_id.at(truth.ids[r]), "rho_hat")));
            tru.push_back(static_cast<int>(parse_integer(truth.labels[r], "rho_true")));
        }
        dg = dg_detection_metrics(hat, tru);
    }

    std::ostringstream csv;
    std::vector<std::pair<std::string, std::string>> tags;
    for (const auto& t : o.tags) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw InputError("--tag expects key=value");
        tags.emplace_back(t.substr(0, eq), t.substr(eq + 1));
    }
    for (const auto& [k, v] : tags) csv << k << ',';
    csv << "ari_spot,ari_gene,sensitivity,specificity\n";
    for (const auto& [k, v] : tags) csv << v << ',';
    csv << format_optional(ari_spot) << ',' << format_optional(ari_gene) << ','
        << format_optional(dg.sensitivity) << ',' << format_optional(dg.specificity) << '\n';
    if (o.out.empty()) {
        std::cout << csv.str();
    } else {
        const fs::path path = resolve_output(o.out);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        write_text(path, csv.str());
    }
    return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
    std::string config;
    std::string out = "bison_sweep";
    int replicates = 0; // 0 keeps the config value
    int threads = default_threads();
};

template <typename T>
std::vector<T> ini_list(const boost::property_tree::ptree& pt, const std::string& key, const std::string& fallback) {
    const std::string text = pt.get<std::string>(key, fallback);
    std::vector<T> out;
    for (auto f : split_fields(text, ", ")) {
        if constexpr (std::is_same_v<T, std::string>)
            out.emplace_back(f);
        else if constexpr (std::is_integral_v<T>)
            out.push_back(static_cast<T>(parse_integer(f, key)));
        else
            out.push_back(static_cast<T>(parse_real(f, key)));
    }
    if (out.empty()) throw InputError("config key " + key + " is empty");
    return out;
}

int cmd_sweep(const SweepOptions& o, const CLI::App& sub, int argc, char** argv) {
    Manifest manifest("sweep", sub, argc, argv);
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_ini(o.config, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError(e.what());
    }
    manifest.add_input(o.config);

    const auto ps = ini_list<int>(pt, "scenario.p", "500");
    const auto pi0s = ini_list<double>(pt, "scenario.pi0", "0.2");
    const auto deltas = ini_list<double>(pt, "scenario.delta", "1.5");
    const auto families = ini_list<std::string>(pt, "scenario.family", "poisson");
    const int K = pt.get<int>("scenario.K", 4);
    const int R = pt.get<int>("scenario.R", 3);
    const int side = pt.get<int>("scenario.side", 16);
    const double noise = pt.get<double>("scenario.noise", 0.1);
    const double nb_rate = pt.get<double>("scenario.nb_dispersion_rate", 0.1);
    const int replicates = o.replicates > 0 ? o.replicates : pt.get<int>("scenario.replicates", 50);
    const std::uint64_t seed = pt.get<std::uint64_t>("scenario.seed", 1);

    McmcConfig mcmc;
    mcmc.iterations = pt.get<int>("mcmc.iterations", 10000);
    mcmc.burn_in = pt.get<int>("mcmc.burn_in", 5000);
    mcmc.chains = pt.get<int>("mcmc.chains", 1);
    mcmc.thin = pt.get<int>("mcmc.thin", 1);
    mcmc.threads = 1;
    Hyperparameters hyper;
    hyper.alpha_mu = pt.get<double>("prior.alpha_mu", 1.0);
    hyper.beta_mu = pt.get<double>("prior.beta_mu", 1.0);
    hyper.alpha_0 = pt.get<double>("prior.alpha_0", 1.0);
    hyper.beta_0 = pt.get<double>("prior.beta_0", 1.0);
    hyper.alpha_pi = pt.get<double>("prior.alpha_pi", 1.0);
    hyper.beta_pi = pt.get<double>("prior.beta_pi", 1.0);
    hyper.gamma = pt.get<double>("prior.gamma", 1.0);
    hyper.h = pt.get<double>("prior.h", 1.0);
    hyper.b = {pt.get<double>("prior.b", 1.0)};
    try {
        mcmc.validate();
        hyper.validate(K);
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("sweep config: ") + e.what());
    }
    manifest.set_seed("sweep", seed);

    struct Cell {
        SimConfig sim;
        int replicate = 0;
        std::string row;
    };
    std::vector<Cell> cells;
    for (int p : ps)
        for (double pi0 : pi0s)
            for (double delta : deltas)
                for (const auto& fam : families)
                    for (int rep = 1; rep <= replicates; ++rep) {
                        Cell c;
                        c.sim.p = p;
                        c.sim.pi0 = pi0;
                        c.sim.delta = delta;
                        c.sim.family = parse_count_family(fam);
                        c.sim.K = K;
                        c.sim.R = R;
                        c.sim.noise = noise;
                        c.sim.nb_dispersion_rate = nb_rate;
                        c.sim.domain_map = banded_lattice(side, K);
                        c.sim.seed = derive_seed(seed, 2 * cells.size());
                        c.replicate = rep;
                        c.sim.validate();
                        cells.push_back(std::move(c));
                    }

    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(cells.size());
    auto worker = [&] {
        for (std::size_t idx = next++; idx < cells.size(); idx = next++) {
            Cell& c = cells[idx];
            try {
                const SimDataset data = generate_dataset(c.sim);
                const ScalingFactors factors = estimate_scaling_factors(data.counts);
                McmcConfig cfg = mcmc;
                cfg.seed = derive_seed(seed, 2 * idx + 1);
                const McmcSamples samples = run_chains(data.counts, data.layout, factors, K, R, hyper, cfg);
                const FitSummary fit = summarize_fit(samples, data.counts, factors, hyper, false);
                const MetricReport m = evaluate_fit(fit.z_hat, data.truth.z, fit.rho_hat, data.truth.rho);
                std::ostringstream row;
                row << c.sim.p << ',' << format_real(c.sim.pi0) << ',' << format_real(c.sim.delta) << ','
                    << to_string(c.sim.family) << ',' << c.replicate << ',' << c.sim.seed << ','
                    << format_real(m.ari_spot) << ',' << format_real(m.ari_gene) << ','
                    << format_optional(m.dg.sensitivity) << ',' << format_optional(m.dg.specificity) << ','
                    << fit.p0_hat << ',' << fit.realized_K << ',' << fit.realized_R << '\n';
                c.row = row.str();
            } catch (const std::exception& e) {
                errors[idx] = e.what();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(o.threads, static_cast<int>(cells.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    std::ostringstream csv;
    csv << "p,pi0,delta,family,replicate,seed,ari_spot,ari_gene,sensitivity,specificity,p0_hat,realized_K,realized_R\n";
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
        if (!errors[idx].empty()) {
            std::cerr << "warning: sweep cell " << idx + 1 << " failed: " << errors[idx] << '\n';
            continue;
        }
        csv << cells[idx].row;
    }
    const fs::path dir = prepare_dir(o.out);
    write_text(dir / "metrics.csv", csv.str());
    manifest.write(dir);
    std::cout << "sweep: " << cells.size() << " cells -> " << (dir / "metrics.csv").string() << '\n';
    return 0;
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"Bayesian bi-clustering of spatial count data with discriminating-gene selection"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the model at fixed K and R");
    add_data_options(fit_cmd, fit.data);
    add_hyper_options(fit_cmd, fit.hyper);
    add_mcmc_options(fit_cmd, fit.mcmc);
    fit_cmd->add_option("--K", fit.K, "Number of spot clusters")->required()->check(CLI::PositiveNumber);
    fit_cmd->add_option("--R", fit.R, "Number of discriminating gene groups")->required()->check(CLI::PositiveNumber);
    fit_cmd->add_option("--out", fit.out, "Output directory")->capture_default_str();
    fit_cmd->add_flag("--write-ppm", fit.write_ppm, "Also export both PPM matrices");
    fit_cmd->add_option("--warm-spots", fit.warm_spots, "Initial spot labels (spots.csv from a previous fit)");
    fit_cmd->add_option("--warm-genes", fit.warm_genes, "Initial gene labels (genes.csv from a previous fit)");

    SelectOptions sel;
    auto* sel_cmd = app.add_subcommand("select", "Choose (R, K) by mICL over a grid");
    add_data_options(sel_cmd, sel.data);
    add_hyper_options(sel_cmd, sel.hyper);
    add_mcmc_options(sel_cmd, sel.mcmc);
    sel_cmd->add_option("--K-grid", sel.Ks, "Candidate K values, comma separated")->required()->delimiter(',');
    sel_cmd->add_option("--R-grid", sel.Rs, "Candidate R values, comma separated")->required()->delimiter(',');
    sel_cmd->add_option("--grid-iterations", sel.grid_iterations, "Iterations per grid cell")->capture_default_str();
    sel_cmd->add_option("--grid-burn-in", sel.grid_burn_in, "Burn-in per grid cell")->capture_default_str();
    sel_cmd->add_flag("--no-refit", sel.no_refit, "Skip the full-budget refit of the selected pair");
    sel_cmd->add_flag("--write-ppm", sel.write_ppm, "Export PPMs of the refit");
    sel_cmd->add_option("--out", sel.out, "Output directory")->capture_default_str();

    SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset with ground truth");
    sim_cmd->add_option("--p", sim.sim.p, "Number of genes")->capture_default_str();
    sim_cmd->add_option("--pi0", sim.sim.pi0, "Null gene proportion")->capture_default_str();
    sim_cmd->add_option("--delta", sim.sim.delta, "Signal strength")->capture_default_str();
    sim_cmd->add_option("--K", sim.sim.K, "Spatial domains")->capture_default_str();
    sim_cmd->add_option("--R", sim.sim.R, "Gene groups")->capture_default_str();
    sim_cmd->add_option("--noise", sim.sim.noise, "Half-width of uniform rate noise")->capture_default_str();
    sim_cmd->add_option("--family", sim.family, "poisson or negative-binomial")->capture_default_str();
    sim_cmd->add_option("--nb-dispersion-rate", sim.sim.nb_dispersion_rate, "Rate of the Exp prior on NB dispersion")
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim.sim.seed, "Random seed")->capture_default_str();
    sim_cmd->add_option("--side", sim.side, "Side of the default banded square lattice")->capture_default_str();
    sim_cmd->add_option("--domain-map", sim.domain_map, "CSV spot_id,x,y,domain replacing the default lattice");
    sim_cmd->add_option("--lattice", sim.lattice, "Lattice kind of --domain-map")->capture_default_str();
    sim_cmd->add_option("--unit", sim.unit, "Lattice spacing of --domain-map")->capture_default_str();
    sim_cmd->add_option("--format", sim.format, "dense-csv or triplet")->capture_default_str();
    sim_cmd->add_option("--out", sim.out, "Output directory")->capture_default_str();

    EvaluateOptions ev;
    auto* ev_cmd = app.add_subcommand("evaluate", "Score fitted labels against truth or annotations");
    ev_cmd->add_option("--spots", ev.spots, "Fitted spot table (spot_id,...,z_hat)");
    ev_cmd->add_option("--genes", ev.genes, "Fitted gene table (gene_id,rho_hat)");
    ev_cmd->add_option("--truth-spots", ev.truth_spots, "Reference spot labels (spot_id,...,z_true|label)");
    ev_cmd->add_option("--truth-genes", ev.truth_genes, "Reference gene labels (gene_id,rho_true)");
    ev_cmd->add_option("--tag", ev.tags, "key=value columns prepended to the metrics row");
    ev_cmd->add_option("--out", ev.out, "Metrics CSV path (stdout when omitted)");

    SweepOptions sw;
    auto* sw_cmd = app.add_subcommand("sweep", "Simulate, fit and score a factorial scenario grid");
    sw_cmd->add_option("--config", sw.config, "INI scenario file")->required();
    sw_cmd->add_option("--out", sw.out, "Output directory")->capture_default_str();
    sw_cmd->add_option("--replicates", sw.replicates, "Override the replicate count");
    sw_cmd->add_option("--threads", sw.threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit, *fit_cmd, argc, argv);
        if (sel_cmd->parsed()) return cmd_select(sel, *sel_cmd, argc, argv);
        if (sim_cmd->parsed()) return cmd_simulate(sim, *sim_cmd, argc, argv);
        if (ev_cmd->parsed()) return cmd_evaluate(ev);
        if (sw_cmd->parsed()) return cmd_sweep(sw, *sw_cmd, argc, argv);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace bison::cli
