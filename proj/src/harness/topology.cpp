#include "harness/topology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mcx::harness {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

bool parse_u32(const std::string& s, uint32_t& out) {
    if (s.empty()) return false;
    try {
        size_t used = 0;
        unsigned long v = std::stoul(s, &used);
        if (used != s.size() || v > 0xFFFFFFFFul) return false;
        out = static_cast<uint32_t>(v);
        return true;
    } catch (...) {
        return false;
    }
}

bool parse_kind(const std::string& s, mcx_kind& out) {
    if (s == "message") out = MCX_KIND_MESSAGE;
    else if (s == "packet") out = MCX_KIND_PACKET;
    else if (s == "scalar") out = MCX_KIND_SCALAR;
    else return false;
    return true;
}

}  // namespace

bool load_topology(const std::string& path, Topology& out, TopologyError& err) {
    std::ifstream in(path);
    if (!in) {
        err = {0, "cannot open topology file: " + path};
        return false;
    }

    Topology topo;
    enum class Section { None, Nodes, Channel } section = Section::None;
    bool seen_nodes_section = false;
    std::string line;
    int lineno = 0;

    auto finish_channel = [&](int at_line) -> bool {
        // `send`/`recv` are mandatory; sentinel means "never set".
        ChannelSpec& c = topo.channels.back();
        if (c.send_node == UINT32_MAX) {
            err = {at_line, "channel is missing `send`"};
            return false;
        }
        if (c.recv_node == UINT32_MAX) {
            err = {at_line, "channel is missing `recv`"};
            return false;
        }
        return true;
    };

    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;

        if (t.front() == '[') {
            if (t.back() != ']') {
                err = {lineno, "unterminated section header"};
                return false;
            }
            if (section == Section::Channel && !finish_channel(lineno)) return false;
            std::string name = trim(t.substr(1, t.size() - 2));
            if (name == "nodes") {
                if (seen_nodes_section) {
                    err = {lineno, "duplicate [nodes] section"};
                    return false;
                }
                seen_nodes_section = true;
                section = Section::Nodes;
            } else if (name == "channel") {
                section = Section::Channel;
                ChannelSpec c;
                c.send_node = UINT32_MAX;
                c.recv_node = UINT32_MAX;
                c.line = lineno;
                topo.channels.push_back(c);
            } else {
                err = {lineno, "unknown section [" + name + "]"};
                return false;
            }
            continue;
        }

        auto eq = t.find('=');
        if (eq == std::string::npos) {
            err = {lineno, "expected `key = value`"};
            return false;
        }
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));

        if (section == Section::Nodes) {
            if (key != "ids") {
                err = {lineno, "unknown key `" + key + "` in [nodes]"};
                return false;
            }
            std::stringstream ss(val);
            std::string item;
            while (std::getline(ss, item, ',')) {
                uint32_t id = 0;
                if (!parse_u32(trim(item), id)) {
                    err = {lineno, "bad node id `" + trim(item) + "`"};
                    return false;
                }
                topo.nodes.push_back(id);
            }
        } else if (section == Section::Channel) {
            ChannelSpec& c = topo.channels.back();
            uint32_t num = 0;
            if (key == "send" || key == "recv" || key == "priority" ||
                key == "capacity") {
                if (!parse_u32(val, num)) {
                    err = {lineno, "`" + key + "` is not a number: `" + val + "`"};
                    return false;
                }
            }
            if (key == "send") c.send_node = num;
            else if (key == "recv") c.recv_node = num;
            else if (key == "priority") {
                if (num >= MCX_PRIORITIES) {
                    err = {lineno, "priority must be 0.." +
                                       std::to_string(MCX_PRIORITIES - 1)};
                    return false;
                }
                c.priority = num;
            } else if (key == "capacity") {
                if (num != 0 && (num & (num - 1)) != 0) {
                    err = {lineno, "capacity must be a power of two (or 0)"};
                    return false;
                }
                c.ring_capacity = num;
            } else if (key == "kind") {
                if (!parse_kind(val, c.kind)) {
                    err = {lineno, "kind must be message|packet|scalar, got `" +
                                       val + "`"};
                    return false;
                }
            } else {
                err = {lineno, "unknown key `" + key + "` in [channel]"};
                return false;
            }
        } else {
            err = {lineno, "key `" + key + "` outside any section"};
            return false;
        }
    }
    if (section == Section::Channel && !finish_channel(lineno)) return false;

    // Structural validation.
    if (topo.nodes.empty()) {
        err = {0, "no nodes declared"};
        return false;
    }
    {
        auto sorted = topo.nodes;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            err = {0, "duplicate node id"};
            return false;
        }
    }
    if (topo.channels.empty()) {
        err = {0, "no channels declared"};
        return false;
    }
    for (size_t i = 0; i < topo.channels.size(); ++i) {
        const ChannelSpec& c = topo.channels[i];
        auto known = [&](uint32_t id) {
            return std::find(topo.nodes.begin(), topo.nodes.end(), id) !=
                   topo.nodes.end();
        };
        if (!known(c.send_node)) {
            err = {c.line, "channel " + std::to_string(i) +
                               ": send node " + std::to_string(c.send_node) +
                               " is not declared"};
            return false;
        }
        if (!known(c.recv_node)) {
            err = {c.line, "channel " + std::to_string(i) +
                               ": recv node " + std::to_string(c.recv_node) +
                               " is not declared"};
            return false;
        }
    }
    out = std::move(topo);
    return true;
}

}  // namespace mcx::harness
