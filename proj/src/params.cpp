#include "fwrisk/params.hpp"

#include <cmath>

#include <json.hpp>

#include "fwrisk/io.hpp"
#include "fwrisk/rng.hpp"

namespace fwrisk {

using nlohmann::json;

ShallowParams seeded_shallow(std::uint64_t seed, std::size_t k_c,
                             std::size_t k_o, std::size_t d, double gain,
                             double head_bias) {
    const std::size_t input = 3 + k_c + k_o;
    ShallowParams sp;
    sp.w = Mat(d, input);
    sp.bias.assign(d, 0.0);
    sp.head_w.assign(d, 0.0);
    sp.head_bias = head_bias;

    SeedStream ws(seed, 1, StreamPurpose::ShallowInit);
    const double scale = gain / std::sqrt(static_cast<double>(input));
    for (auto& x : sp.w.data) x = scale * ws.next_normal();
    SeedStream bs(seed, 2, StreamPurpose::ShallowInit);
    for (auto& x : sp.bias) x = 0.5 * bs.next_normal();
    SeedStream hs(seed, 3, StreamPurpose::ShallowInit);
    const double head_scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (auto& x : sp.head_w) x = head_scale * hs.next_normal();
    return sp;
}

ShallowParams ParameterSet::shallow() const {
    return seeded_shallow(param_seed, dims.k_c, dims.k_o, dims.d3,
                          shallow_gain, shallow_bias);
}

ParameterSet ParameterSet::seeded(const Dims& dims, std::uint64_t param_seed,
                                  const InitOptions& init) {
    ParameterSet ps;
    ps.param_seed = param_seed;
    ps.dims = dims;
    ps.init = init;
    ps.model = seeded_params(dims, param_seed, init);
    return ps;
}

namespace {

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument("params: matrix must be a non-empty array");
    Mat m(j.size(), j[0].size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (j[r].size() != m.cols)
            throw std::invalid_argument("params: ragged matrix rows");
        for (std::size_t c = 0; c < m.cols; ++c)
            m.at(r, c) = j[r][c].get<double>();
    }
    return m;
}

template <std::size_t N>
std::array<double, N> array_from_json(const json& j) {
    if (!j.is_array() || j.size() != N)
        throw std::invalid_argument("params: expected array of size " +
                                    std::to_string(N));
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<double>();
    return out;
}

}  // namespace

std::string ParameterSet::to_json_text() const {
    json j;
    j["schema_version"] = 1;
    j["name"] = name;
    j["param_seed"] = param_seed;
    j["dims"] = {{"k_c", dims.k_c}, {"k_o", dims.k_o}, {"d1", dims.d1},
                 {"d2", dims.d2},  {"d3", dims.d3}};
    j["init"] = {{"gain1", init.gain1},
                 {"gain2", init.gain2},
                 {"gain3", init.gain3},
                 {"bias1_shift", init.bias1_shift},
                 {"bias2_shift", init.bias2_shift},
                 {"monotone_regime", init.monotone_regime}};
    j["shallow"] = {{"gain", shallow_gain}, {"bias", shallow_bias}};
    j["model"] = {{"w1", mat_to_json(model.w1)},
                  {"b1", model.b1},
                  {"alpha1", model.alpha1},
                  {"beta1", model.beta1},
                  {"w2", mat_to_json(model.w2)},
                  {"b2", model.b2},
                  {"alpha2", model.alpha2},
                  {"a", mat_to_json(model.a)},
                  {"b", mat_to_json(model.b)},
                  {"c3", model.c3},
                  {"gamma", model.gamma},
                  {"delta", model.delta},
                  {"lambda1", model.lambda1},
                  {"lambda2", model.lambda2},
                  {"lambda3", model.lambda3},
                  {"kappa", model.kappa},
                  {"omega", model.omega},
                  {"xi_bias", model.xi_bias},
                  {"risk_scale", model.risk_scale},
                  {"display_shift", model.display_shift}};
    j["cost"] = {{"tau", cost.tau},
                 {"zeta", cost.zeta},
                 {"gpu_coeff", cost.gpu_coeff},
                 {"nu", cost.nu},
                 {"eta", cost.eta},
                 {"rho", cost.rho},
                 {"layer_weights", cost.layer_weights}};
    j["pair_weights"] = pair_weights;
    return j.dump(2) + "\n";
}

ParameterSet ParameterSet::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("params: malformed JSON: ") +
                                    e.what());
    }
    if (j.value("schema_version", 0) != 1)
        throw std::invalid_argument("params: unsupported schema_version");

    ParameterSet ps;
    ps.name = j.value("name", std::string("unnamed"));
    ps.param_seed = j.at("param_seed").get<std::uint64_t>();
    const json& dims = j.at("dims");
    ps.dims.k_c = dims.at("k_c").get<std::size_t>();
    ps.dims.k_o = dims.at("k_o").get<std::size_t>();
    ps.dims.d1 = dims.at("d1").get<std::size_t>();
    ps.dims.d2 = dims.at("d2").get<std::size_t>();
    ps.dims.d3 = dims.at("d3").get<std::size_t>();
    const json& init = j.at("init");
    ps.init.gain1 = init.at("gain1").get<double>();
    ps.init.gain2 = init.at("gain2").get<double>();
    ps.init.gain3 = init.at("gain3").get<double>();
    ps.init.bias1_shift = init.at("bias1_shift").get<double>();
    ps.init.bias2_shift = init.at("bias2_shift").get<double>();
    ps.init.monotone_regime = init.at("monotone_regime").get<bool>();
    ps.shallow_gain = j.at("shallow").at("gain").get<double>();
    ps.shallow_bias = j.at("shallow").at("bias").get<double>();

    const json& m = j.at("model");
    ps.model.w1 = mat_from_json(m.at("w1"));
    ps.model.b1 = m.at("b1").get<Vec>();
    ps.model.alpha1 = m.at("alpha1").get<double>();
    ps.model.beta1 = m.at("beta1").get<double>();
    ps.model.w2 = mat_from_json(m.at("w2"));
    ps.model.b2 = m.at("b2").get<Vec>();
    ps.model.alpha2 = m.at("alpha2").get<double>();
    ps.model.a = mat_from_json(m.at("a"));
    ps.model.b = mat_from_json(m.at("b"));
    ps.model.c3 = m.at("c3").get<Vec>();
    ps.model.gamma = m.at("gamma").get<Vec>();
    ps.model.delta = m.at("delta").get<double>();
    ps.model.lambda1 = m.at("lambda1").get<double>();
    ps.model.lambda2 = m.at("lambda2").get<double>();
    ps.model.lambda3 = m.at("lambda3").get<double>();
    ps.model.kappa = m.at("kappa").get<double>();
    ps.model.omega = m.at("omega").get<double>();
    ps.model.xi_bias = m.at("xi_bias").get<double>();
    ps.model.risk_scale = m.at("risk_scale").get<double>();
    ps.model.display_shift = array_from_json<3>(m.at("display_shift"));

    const json& c = j.at("cost");
    ps.cost.tau = array_from_json<3>(c.at("tau"));
    ps.cost.zeta = array_from_json<3>(c.at("zeta"));
    ps.cost.gpu_coeff = array_from_json<3>(c.at("gpu_coeff"));
    ps.cost.nu = array_from_json<3>(c.at("nu"));
    ps.cost.eta = c.at("eta").get<double>();
    ps.cost.rho = c.at("rho").get<double>();
    ps.cost.layer_weights = array_from_json<3>(c.at("layer_weights"));
    if (j.contains("pair_weights"))
        ps.pair_weights = array_from_json<3>(j.at("pair_weights"));

    ps.model.validate();
    ps.cost.validate();
    if (ps.model.k_c() != ps.dims.k_c || ps.model.k_o() != ps.dims.k_o ||
        ps.model.d1() != ps.dims.d1 || ps.model.d2() != ps.dims.d2 ||
        ps.model.d3() != ps.dims.d3)
        throw std::invalid_argument(
            "params: dims block disagrees with matrix shapes");
    return ps;
}

ParameterSet ParameterSet::load(const std::string& path) {
    return from_json_text(read_file(path));
}

void ParameterSet::save(const std::string& path) const {
    atomic_write_file(path, to_json_text());
}

}  // namespace fwrisk
