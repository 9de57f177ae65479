#include "aggrolab/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace aggrolab {

static_assert(std::endian::native == std::endian::little, "binary stores assume a little-endian host");

using nlohmann::json;

json to_json(const InnovationSpec& spec) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return {{"type", "gaussian"}, {"sigma", v.sigma}};
            } else if constexpr (std::is_same_v<T, Stable>) {
                return {{"type", "stable"}, {"alpha", v.alpha}, {"skew", v.skew}, {"scale", v.scale}};
            } else if constexpr (std::is_same_v<T, DomainAttraction>) {
                return {{"type", "domain_attraction"}, {"alpha", v.alpha}, {"tail_const", v.tail_const}};
            } else {
                json j{{"type", "id_triplet"}, {"mu", v.mu}, {"sigma", v.sigma}, {"epsilon", v.epsilon}};
                if (v.small_jumps) {
                    const auto& s = *v.small_jumps;
                    j["levy"] = {{"alpha0", s.alpha0}, {"c_plus", s.c_plus}, {"c_minus", s.c_minus}, {"cutoff", s.cutoff}};
                }
                json atoms = json::array();
                for (const auto& a : v.big_jumps) atoms.push_back({{"x", a.x}, {"rate", a.rate}});
                j["big_jumps"] = atoms;
                return j;
            }
        },
        spec);
}

json to_json(const MixingSpec& spec) {
    return std::visit(
        [](const auto& m) -> json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaType>) {
                return {{"type", "beta_type"}, {"p", m.p}, {"q", m.q}};
            } else if constexpr (std::is_same_v<T, CanonicalRegVar>) {
                return {{"type", "canonical_regvar"}, {"beta", m.beta}};
            } else if constexpr (std::is_same_v<T, Farima>) {
                return {{"type", "farima"}, {"d", m.d}};
            } else {
                json j{{"type", "tabulated"}, {"x", m.x}, {"f", m.f}};
                if (m.beta) j["beta"] = *m.beta;
                if (m.c_phi) j["c_phi"] = *m.c_phi;
                return j;
            }
        },
        spec.variant());
}

namespace {

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw std::invalid_argument(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

double req(const json& j, const char* key) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    return num(j, key, 0.0);
}

std::string type_of(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw std::invalid_argument("spec block needs a string 'type'");
    return j.at("type").get<std::string>();
}

}  // namespace

InnovationSpec innovation_from_json(const json& j) {
    const std::string t = type_of(j);
    InnovationSpec spec;
    if (t == "gaussian") {
        spec = Gaussian{num(j, "sigma", 1.0)};
    } else if (t == "stable") {
        spec = Stable{req(j, "alpha"), num(j, "skew", 0.0), num(j, "scale", 1.0)};
    } else if (t == "domain_attraction") {
        spec = DomainAttraction{req(j, "alpha"), num(j, "tail_const", 1.0)};
    } else if (t == "id_triplet") {
        IdTriplet id{num(j, "mu", 0.0), num(j, "sigma", 0.0), std::nullopt, {}, num(j, "epsilon", 1e-3)};
        if (j.contains("levy")) {
            const auto& l = j.at("levy");
            id.small_jumps = LevySmallJumpSpec{req(l, "alpha0"), num(l, "c_plus", 1.0), num(l, "c_minus", 1.0),
                                               num(l, "cutoff", 1.0)};
        }
        if (j.contains("big_jumps"))
            for (const auto& a : j.at("big_jumps")) id.big_jumps.push_back({req(a, "x"), req(a, "rate")});
        spec = id;
    } else {
        throw std::invalid_argument("unknown innovation type: " + t);
    }
    validate(spec);
    return spec;
}

MixingSpec mixing_from_json(const json& j, const std::filesystem::path& base_dir) {
    const std::string t = type_of(j);
    if (t == "beta_type") return MixingSpec(BetaType{req(j, "p"), req(j, "q")});
    if (t == "canonical_regvar") return MixingSpec(CanonicalRegVar{req(j, "beta")});
    if (t == "farima") return MixingSpec(Farima{req(j, "d")});
    if (t == "tabulated") {
        Tabulated tab;
        if (j.contains("csv")) {
            std::filesystem::path p = j.at("csv").get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            tab = load_tabulated_csv(p.string());
        } else {
            tab.x = j.at("x").get<std::vector<double>>();
            tab.f = j.at("f").get<std::vector<double>>();
        }
        if (j.contains("beta")) tab.beta = req(j, "beta");
        if (j.contains("c_phi")) tab.c_phi = req(j, "c_phi");
        return MixingSpec(std::move(tab));
    }
    throw std::invalid_argument("unknown mixing type: " + t);
}

std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
}

void write_f64(const std::filesystem::path& file, std::span<const double> data) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
}

std::vector<double> read_f64(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    const auto bytes = static_cast<std::size_t>(in.tellg());
    std::vector<double> v(bytes / sizeof(double));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    return v;
}

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    std::ostringstream s;
    for (std::size_t c = 0; c < header.size(); ++c) s << (c ? "," : "") << header[c];
    s << "\n";
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) s << (c ? "," : "") << format_double(columns[c].at(r));
        s << "\n";
    }
    write_text(file, s.str());
}

std::string sha256_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

}  // namespace aggrolab
