#include "nvsram/netlist.hpp"

#include <cmath>
#include <queue>

#include "nvsram/errors.hpp"

namespace nvsram {

namespace {

// Core N-device square law, precondition vds >= 0.
double nmos_forward(double vgs, double vds, const MosfetParams& p) {
    const double vov = vgs - p.vth;
    if (vov <= 0.0) return 0.0;
    const double clm = 1.0 + p.lambda * vds;
    if (vds < vov) return p.beta * (vov * vds - 0.5 * vds * vds) * clm;
    return 0.5 * p.beta * vov * vov * clm;
}

} // namespace

double mosfet_current(MosfetPolarity polarity, double vgs, double vds,
                      const MosfetParams& params) {
    if (polarity == MosfetPolarity::p) return -mosfet_current(MosfetPolarity::n, -vgs, -vds, params);
    if (vds < 0.0) {
        // Symmetric device: swap drain and source.
        return -nmos_forward(vgs - vds, -vds, params);
    }
    return nmos_forward(vgs, vds, params);
}

MosfetLinearization mosfet_linearize(const MosfetParams& params, double vg, double vd,
                                     double vs) {
    MosfetLinearization lin;
    lin.id = mosfet_current(params.polarity, vg - vs, vd - vs, params);
    // Central finite differences; the model is piecewise smooth and cheap, and
    // this keeps the Jacobian consistent with the residual by construction.
    const double h = 1e-7;
    const auto at = [&](double g, double d, double s) {
        return mosfet_current(params.polarity, g - s, d - s, params);
    };
    lin.d_vg = (at(vg + h, vd, vs) - at(vg - h, vd, vs)) / (2.0 * h);
    lin.d_vd = (at(vg, vd + h, vs) - at(vg, vd - h, vs)) / (2.0 * h);
    lin.d_vs = (at(vg, vd, vs + h) - at(vg, vd, vs - h)) / (2.0 * h);
    return lin;
}

NodeId Netlist::add_node(const std::string& name) {
    if (auto it = node_index_.find(name); it != node_index_.end()) return it->second;
    const NodeId id = static_cast<NodeId>(node_names_.size());
    node_names_.push_back(name);
    node_index_[name] = id;
    return id;
}

NodeId Netlist::node(const std::string& name) const {
    const auto it = node_index_.find(name);
    if (it == node_index_.end()) throw ParamError("unknown node: " + name);
    return it->second;
}

bool Netlist::has_node(const std::string& name) const {
    return node_index_.count(name) > 0;
}

int Netlist::add_resistor(const std::string& label, NodeId a, NodeId b, double r) {
    elements_.push_back({label, Resistor{a, b, r}});
    return static_cast<int>(elements_.size()) - 1;
}

int Netlist::add_capacitor(const std::string& label, NodeId a, NodeId b, double c) {
    elements_.push_back({label, Capacitor{a, b, c}});
    return static_cast<int>(elements_.size()) - 1;
}

int Netlist::add_voltage_source(const std::string& label, NodeId pos, NodeId neg, Waveform w) {
    elements_.push_back({label, VoltageSource{pos, neg, std::move(w)}});
    source_elements_.push_back(static_cast<int>(elements_.size()) - 1);
    return static_cast<int>(elements_.size()) - 1;
}

int Netlist::add_mosfet(const std::string& label, NodeId gate, NodeId drain, NodeId source,
                        const MosfetParams& p) {
    elements_.push_back({label, Mosfet{gate, drain, source, p}});
    return static_cast<int>(elements_.size()) - 1;
}

int Netlist::add_mtj(const std::string& label, NodeId free, NodeId pinned, MtjDevice device) {
    mtj_devices_.push_back(std::move(device));
    elements_.push_back({label, MtjElement{free, pinned, static_cast<int>(mtj_devices_.size()) - 1}});
    return static_cast<int>(elements_.size()) - 1;
}

void Netlist::set_probe(const std::string& label, NodeId n) {
    if (probes_.count(label)) throw ConstructionError("duplicate probe label: " + label);
    probes_[label] = n;
}

NodeId Netlist::probe(const std::string& label) const {
    const auto it = probes_.find(label);
    if (it == probes_.end()) throw ParamError("unknown probe: " + label);
    return it->second;
}

int Netlist::element_index(const std::string& label) const {
    for (std::size_t i = 0; i < elements_.size(); ++i)
        if (elements_[i].label == label) return static_cast<int>(i);
    throw ParamError("unknown element: " + label);
}

VoltageSource& Netlist::source(const std::string& label) {
    return std::get<VoltageSource>(elements_.at(element_index(label)).payload);
}

int Netlist::source_branch(int element_idx) const {
    for (std::size_t i = 0; i < source_elements_.size(); ++i)
        if (source_elements_[i] == element_idx) return static_cast<int>(i);
    throw ParamError("element is not a voltage source");
}

void Netlist::validate() const {
    const auto check_node = [&](NodeId n, const std::string& label) {
        if (n < 0 || n >= node_count())
            throw ConstructionError("element " + label + " references missing node");
    };
    std::vector<std::vector<int>> adjacency(node_count());
    const auto connect = [&](NodeId a, NodeId b) {
        adjacency[a].push_back(b);
        adjacency[b].push_back(a);
    };
    for (const auto& e : elements_) {
        if (const auto* r = std::get_if<Resistor>(&e.payload)) {
            check_node(r->a, e.label);
            check_node(r->b, e.label);
            if (!(r->resistance > 0)) throw ConstructionError("resistor " + e.label + ": R must be > 0");
            connect(r->a, r->b);
        } else if (const auto* c = std::get_if<Capacitor>(&e.payload)) {
            check_node(c->a, e.label);
            check_node(c->b, e.label);
            if (!(c->capacitance > 0)) throw ConstructionError("capacitor " + e.label + ": C must be > 0");
            connect(c->a, c->b);
        } else if (const auto* v = std::get_if<VoltageSource>(&e.payload)) {
            check_node(v->pos, e.label);
            check_node(v->neg, e.label);
            connect(v->pos, v->neg);
        } else if (const auto* m = std::get_if<Mosfet>(&e.payload)) {
            check_node(m->gate, e.label);
            check_node(m->drain, e.label);
            check_node(m->source, e.label);
            if (!(m->params.beta > 0)) throw ConstructionError("mosfet " + e.label + ": beta must be > 0");
            if (!(m->params.vth > 0)) throw ConstructionError("mosfet " + e.label + ": vth must be > 0");
            connect(m->drain, m->source);
        } else if (const auto* j = std::get_if<MtjElement>(&e.payload)) {
            check_node(j->free, e.label);
            check_node(j->pinned, e.label);
            if (j->device < 0 || j->device >= static_cast<int>(mtj_devices_.size()))
                throw ConstructionError("mtj " + e.label + " references missing device");
            connect(j->free, j->pinned);
        }
    }
    for (const auto& [label, n] : probes_) check_node(n, "probe " + label);

    // Reachability from ground through conducting terminals.
    std::vector<bool> seen(node_count(), false);
    std::queue<NodeId> frontier;
    frontier.push(ground_node);
    seen[ground_node] = true;
    while (!frontier.empty()) {
        const NodeId n = frontier.front();
        frontier.pop();
        for (NodeId next : adjacency[n]) {
            if (!seen[next]) {
                seen[next] = true;
                frontier.push(next);
            }
        }
    }
    for (NodeId n = 0; n < node_count(); ++n)
        if (!seen[n])
            throw ConstructionError("node " + node_names_[n] + " is not connected to ground");
}

} // namespace nvsram
