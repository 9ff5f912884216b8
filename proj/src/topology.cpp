#include "nicsim/topology.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace nicsim {

void CostModel::validate() const {
    if (loss_prob < 0.0 || loss_prob >= 1.0)
        throw ConfigError(platform_name + ": loss_prob must be in [0,1)");
    if (reliable_network && loss_prob != 0.0)
        throw ConfigError(platform_name +
                          ": reliable network cannot have loss_prob > 0");
}

void CostModel::apply_default_timeouts(int max_hops) {
    SimTime max_transit = c_wire + c_hop * max_hops;
    if (receiver_timeout == SimTime{})
        receiver_timeout = (max_transit + c_nic_recv + c_record) * 4;
    if (sender_timeout == SimTime{})
        sender_timeout = receiver_timeout * 2;
}

namespace {

SimTime us_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("preset missing key ") + key);
    return SimTime::us(j.at(key).get<double>());
}

CostModel parse_preset(const std::string& name, const nlohmann::json& j) {
    CostModel m;
    m.platform_name = name;
    m.c_host_proc = us_field(j, "c_host_proc");
    m.c_host_post = us_field(j, "c_host_post");
    m.c_nic_to_host_event = us_field(j, "c_nic_to_host_event");
    m.c_queue_pass = us_field(j, "c_queue_pass");
    m.c_pkt_alloc = us_field(j, "c_pkt_alloc");
    m.c_nic_send = us_field(j, "c_nic_send");
    m.c_nic_recv = us_field(j, "c_nic_recv");
    m.c_record = us_field(j, "c_record");
    m.c_wire = us_field(j, "c_wire");
    m.c_hop = us_field(j, "c_hop");
    m.loss_prob = j.value("loss_prob", 0.0);
    m.reliable_network = j.value("reliable_network", false);
    if (j.contains("sender_timeout_us"))
        m.sender_timeout = SimTime::us(j.at("sender_timeout_us").get<double>());
    if (j.contains("receiver_timeout_us"))
        m.receiver_timeout = SimTime::us(j.at("receiver_timeout_us").get<double>());
    m.validate();
    return m;
}

nlohmann::json load_preset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open preset file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed preset file " + path + ": " + e.what());
    }
    return j;
}

} // namespace

CostModel load_preset(const std::string& path, const std::string& platform) {
    nlohmann::json j = load_preset_file(path);
    if (!j.contains(platform)) {
        std::string known;
        for (auto& [k, v] : j.items()) {
            if (k == "version") continue;
            if (!known.empty()) known += ", ";
            known += k;
        }
        throw ConfigError("unknown platform '" + platform + "' (known: " + known + ")");
    }
    return parse_preset(platform, j.at(platform));
}

std::vector<std::string> preset_names(const std::string& path) {
    nlohmann::json j = load_preset_file(path);
    std::vector<std::string> names;
    for (auto& [k, v] : j.items())
        if (k != "version") names.push_back(k);
    std::sort(names.begin(), names.end());
    return names;
}

std::string default_preset_path() {
    if (const char* env = std::getenv("NICSIM_PRESETS")) return env;
#ifdef NICSIM_PRESET_FILE
    return NICSIM_PRESET_FILE;
#else
    return "configs/presets.json";
#endif
}

Placement::Placement(int n_ranks, std::vector<int> rank_to_node,
                     int ports_per_switch)
    : n_(n_ranks), ports_(ports_per_switch), rank_to_node_(std::move(rank_to_node)) {
    if (n_ < 1) throw ConfigError("Placement: need at least one rank");
    if (ports_ < 1) throw ConfigError("Placement: need at least one port");
    if (rank_to_node_.size() != static_cast<size_t>(n_))
        throw ConfigError("Placement: table size mismatch");
    std::vector<int> seen(rank_to_node_.size(), 0);
    for (int node : rank_to_node_) {
        if (node < 0 || node >= n_ || seen[static_cast<size_t>(node)]++)
            throw ConfigError("Placement: rank_to_node is not a bijection");
    }
}

Placement Placement::identity(int n_ranks, int ports_per_switch) {
    std::vector<int> table(static_cast<size_t>(n_ranks));
    std::iota(table.begin(), table.end(), 0);
    return Placement(n_ranks, std::move(table), ports_per_switch);
}

int Placement::hop_count(Rank src, Rank dst) const {
    return node_of(src) / ports_ == node_of(dst) / ports_ ? 1 : 3;
}

int Placement::max_hops() const { return n_ > ports_ ? 3 : 1; }

Placement permute_placement(int n, Rng& rng, int ports_per_switch) {
    std::vector<int> table(static_cast<size_t>(n));
    std::iota(table.begin(), table.end(), 0);
    rng.shuffle(table);
    return Placement(n, std::move(table), ports_per_switch);
}

SimTime transit_time(const CostModel& model, const Placement& placement,
                     Rank src, Rank dst) {
    if (src == dst)
        throw std::logic_error("transit_time: src == dst is a protocol bug");
    if (src < 0 || dst < 0 || src >= placement.n_ranks() || dst >= placement.n_ranks())
        throw std::logic_error("transit_time: rank out of range");
    return model.c_wire + model.c_hop * placement.hop_count(src, dst);
}

bool should_drop(const CostModel& model, Rng& rng) {
    if (model.loss_prob == 0.0) return false;
    return rng.next_unit() < model.loss_prob;
}

} // namespace nicsim
