#include "splitree/io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace splitree {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text_file(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + p.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

void write_csv_column(const std::string& path, const std::string& header,
                      const std::vector<double>& values) {
    std::string body = header + "\n";
    char buf[64];
    for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        body += buf;
    }
    write_text_file(path, body);
}

std::string constants_to_json(const ModelSpec& model, const ConstantsReport& rep) {
    json j;
    j["model"] = model.name;
    j["mu"] = rep.mu;
    j["sigma2"] = rep.sigma2;
    j["contraction_factor"] = rep.contraction_factor;
    j["mean_C"] = rep.mean_C;
    j["second_moment_C"] = rep.second_moment_C;
    j["zeta"] = rep.zeta;
    j["method"] = to_string(rep.method);
    j["error_bound"] = rep.error_bound;
    return j.dump(2) + "\n";
}

std::string fixpoint_to_json(const FixpointRun& run) {
    json j;
    j["model"] = run.model_id;
    j["seed"] = run.seed;
    j["iterations"] = run.iterations;
    j["converged"] = run.converged;
    j["step_sizes"] = run.step_sizes;
    j["samples"] = run.final_distribution.size();
    j["mean"] = run.final_mean;
    j["variance"] = run.final_variance;
    return j.dump(2) + "\n";
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["model"] = c.model;
    j["n"] = c.n_values;
    j["replicas"] = c.replicas;
    j["seed"] = c.master_seed;
    j["threads"] = c.threads;
    j["out"] = c.output_dir;
    j["item_budget"] = c.item_budget;
    j["measures"] = {{"psi", c.measures.psi},
                     {"upsilon", c.measures.upsilon},
                     {"node_count", c.measures.node_count},
                     {"depth_last", c.measures.depth_last},
                     {"L_annotation", c.measures.annotate_lengths}};
    return j.dump(2) + "\n";
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig c) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    try {
        if (j.contains("model")) c.model = j["model"].get<std::string>();
        if (j.contains("n")) {
            if (j["n"].is_array()) c.n_values = j["n"].get<std::vector<std::int64_t>>();
            else c.n_values = {j["n"].get<std::int64_t>()};
        }
        if (j.contains("replicas")) c.replicas = j["replicas"].get<std::int64_t>();
        if (j.contains("seed")) c.master_seed = j["seed"].get<std::uint64_t>();
        if (j.contains("threads")) c.threads = j["threads"].get<int>();
        if (j.contains("out")) c.output_dir = j["out"].get<std::string>();
        if (j.contains("item_budget")) c.item_budget = j["item_budget"].get<std::int64_t>();
        if (j.contains("measures")) {
            const auto& m = j["measures"];
            if (m.contains("psi")) c.measures.psi = m["psi"].get<bool>();
            if (m.contains("upsilon")) c.measures.upsilon = m["upsilon"].get<bool>();
            if (m.contains("node_count")) c.measures.node_count = m["node_count"].get<bool>();
            if (m.contains("depth_last")) c.measures.depth_last = m["depth_last"].get<bool>();
            if (m.contains("L_annotation"))
                c.measures.annotate_lengths = m["L_annotation"].get<bool>();
        }
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    return c;
}

void write_renewal_csv(const std::string& path, const RenewalTable& table) {
    std::string body = "t,U,Uhat,se_Uhat\n";
    char buf[160];
    for (std::size_t i = 0; i < table.t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g\n", table.t[i], table.U[i],
                      table.Uhat[i], table.se_Uhat[i]);
        body += buf;
    }
    write_text_file(path, body);
}

void write_overshoot_csv(const std::string& path, const OvershootHistogram& hist) {
    std::string body = "alpha,mass,se\n";
    char buf[120];
    for (std::size_t i = 0; i < hist.alpha.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", hist.alpha[i], hist.mass[i],
                      hist.se[i]);
        body += buf;
    }
    write_text_file(path, body);
}

std::string experiment_to_json(const ExperimentResult& result) {
    json j;
    j["config"] = json::parse(config_to_json(result.config));
    j["mu"] = result.mu;
    j["timestamp"] = result.timestamp;
    j["code_version"] = result.code_version;
    j["per_n"] = json::array();
    for (const auto& e : result.per_n) {
        json r;
        r["n"] = e.n;
        r["mean_psi"] = e.mean_psi;
        r["se_psi"] = e.se_psi;
        r["var_psi"] = e.var_psi;
        r["se_var_psi"] = e.se_var_psi;
        if (result.config.measures.upsilon) {
            r["mean_upsilon"] = e.mean_upsilon;
            r["se_upsilon"] = e.se_upsilon;
        }
        if (result.config.measures.node_count) {
            r["mean_nodes"] = e.mean_nodes;
            r["se_nodes"] = e.se_nodes;
        }
        r["q_hat"] = e.q_hat;
        r["se_q"] = e.se_q;
        if (!e.sample_file.empty()) r["sample_file"] = e.sample_file;
        j["per_n"].push_back(r);
    }
    return j.dump(2) + "\n";
}

void persist_experiment(const ExperimentResult& result) {
    const fs::path dir(result.config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());

    ExperimentResult annotated = result;
    const ModelSpec model = parse_model(result.config.model);
    for (auto& e : annotated.per_n) {
        char name[160];
        std::snprintf(name, sizeof name, "xn_%s_n%lld_seed%llu.csv", model.id().c_str(),
                      static_cast<long long>(e.n),
                      static_cast<unsigned long long>(result.config.master_seed));
        e.sample_file = name;
        write_csv_column((dir / name).string(), "xn", e.xn);
        if (!e.depth_last.empty()) {
            std::snprintf(name, sizeof name, "depth_%s_n%lld_seed%llu.csv", model.id().c_str(),
                          static_cast<long long>(e.n),
                          static_cast<unsigned long long>(result.config.master_seed));
            write_csv_column((dir / name).string(), "depth_last", e.depth_last);
        }
    }
    write_text_file((dir / "config.json").string(), config_to_json(result.config));
    write_text_file((dir / "result.json").string(), experiment_to_json(annotated));
}

}  // namespace splitree
