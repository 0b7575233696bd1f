#include "relativ/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace relativ {

namespace {

using nlohmann::ordered_json;

void check_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument(std::string(where) +
                                        ": unknown key \"" + it.key() + "\"");
    }
}

const char* geometry_name(Geometry g) {
    switch (g) {
        case Geometry::Line1D: return "line1d";
        case Geometry::RadialN: return "radial";
        default: return "radial3d";
    }
}

Geometry geometry_from(const std::string& name) {
    if (name == "line1d") return Geometry::Line1D;
    if (name == "radial") return Geometry::RadialN;
    if (name == "radial3d") return Geometry::Radial3D;
    throw std::invalid_argument("field sidecar: unknown geometry \"" + name +
                                "\"");
}

ordered_json extension_json(const ExtensionRule& ext) {
    ordered_json j;
    if (const auto* z = std::get_if<ZeroOutside>(&ext)) {
        j["type"] = "zero_outside";
        j["radius"] = z->radius;
    } else if (const auto* c = std::get_if<ConstantLimits>(&ext)) {
        j["type"] = "constant_limits";
        j["left"] = c->left;
        j["right"] = c->right;
    } else if (const auto* d = std::get_if<DecayPower>(&ext)) {
        j["type"] = "decay_power";
        j["exponent"] = d->exponent;
        j["amplitude"] = d->amplitude;
    } else {
        const auto& p = std::get<PeriodicTile>(ext);
        j["type"] = "periodic";
        j["period"] = p.period;
    }
    return j;
}

ExtensionRule extension_from(const ordered_json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "zero_outside") {
        check_keys(j, {"type", "radius"}, "extension");
        return ZeroOutside{j.at("radius").get<double>()};
    }
    if (type == "constant_limits") {
        check_keys(j, {"type", "left", "right"}, "extension");
        return ConstantLimits{j.at("left").get<double>(),
                              j.at("right").get<double>()};
    }
    if (type == "decay_power") {
        check_keys(j, {"type", "exponent", "amplitude"}, "extension");
        return DecayPower{j.at("exponent").get<double>(),
                          j.at("amplitude").get<double>()};
    }
    if (type == "periodic") {
        check_keys(j, {"type", "period"}, "extension");
        return PeriodicTile{j.at("period").get<double>()};
    }
    throw std::invalid_argument("extension: unknown type \"" + type + "\"");
}

}  // namespace

std::string format_sig17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + tmp.string() +
                                     " for writing");
        out.write(content.data(), std::streamsize(content.size()));
        if (!out.flush())
            throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string content_hash(const std::string& data) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::string field_to_csv(const SampledField& field) {
    std::string out = "coordinate,value\r\n";
    for (Eigen::Index i = 0; i < field.nodes.size(); ++i) {
        out += format_sig17(field.nodes[i]);
        out += ',';
        out += format_sig17(field.values[i]);
        out += "\r\n";
    }
    return out;
}

std::string field_sidecar(const SampledField& field) {
    ordered_json j;
    j["geometry"] = geometry_name(field.geometry);
    j["dim"] = field.dim;
    j["extension"] = extension_json(field.extension);
    return j.dump(2) + "\n";
}

SampledField field_from_csv(const std::string& csv,
                            const std::string& sidecar) {
    const ordered_json j = ordered_json::parse(sidecar);
    check_keys(j, {"geometry", "dim", "extension"}, "field sidecar");
    const Geometry geom = geometry_from(j.at("geometry").get<std::string>());
    const int dim = j.at("dim").get<int>();
    const ExtensionRule ext = extension_from(j.at("extension"));

    std::vector<double> xs, vs;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != "coordinate,value")
                throw std::invalid_argument("field CSV: bad header \"" + line +
                                            "\"");
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("field CSV: malformed row \"" + line +
                                        "\"");
        std::size_t p1 = 0, p2 = 0;
        const double x = std::stod(line.substr(0, comma), &p1);
        const double v = std::stod(line.substr(comma + 1), &p2);
        if (p1 != comma || p2 != line.size() - comma - 1)
            throw std::invalid_argument("field CSV: trailing junk in \"" +
                                        line + "\"");
        xs.push_back(x);
        vs.push_back(v);
    }
    if (header) throw std::invalid_argument("field CSV: missing header");
    Eigen::VectorXd nodes = Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
    Eigen::VectorXd values = Eigen::Map<Eigen::VectorXd>(vs.data(), vs.size());
    return make_field(geom, dim, std::move(nodes), std::move(values), ext);
}

void save_field(const std::string& csv_path, const std::string& sidecar_path,
                const SampledField& field) {
    write_text_atomic(csv_path, field_to_csv(field));
    write_text_atomic(sidecar_path, field_sidecar(field));
}

SampledField load_field(const std::string& csv_path,
                        const std::string& sidecar_path) {
    return field_from_csv(read_text(csv_path), read_text(sidecar_path));
}

}  // namespace relativ
