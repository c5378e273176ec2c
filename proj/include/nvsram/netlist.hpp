#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "nvsram/mtj.hpp"
#include "nvsram/waveform.hpp"

namespace nvsram {

using NodeId = int;
inline constexpr NodeId ground_node = 0;

enum class MosfetPolarity { n, p };

struct MosfetParams {
    MosfetPolarity polarity = MosfetPolarity::n;
    double beta = 1e-3;   // A/V^2
    double vth = 0.25;    // V, magnitude
    double lambda = 0.1;  // 1/V channel-length modulation
};

// Signed drain current of the square-law model. For the N device the current
// flows drain -> source when positive; the P device mirrors by symmetry,
// I_p(vgs, vds) = -I_n(-vgs, -vds). Continuous in value and first derivative
// across region boundaries. `vds < 0` is handled by swapping terminals.
double mosfet_current(MosfetPolarity polarity, double vgs, double vds,
                      const MosfetParams& params);

struct MosfetLinearization {
    double id = 0.0;  // drain->source current at the bias point
    double d_vg = 0.0;
    double d_vd = 0.0;
    double d_vs = 0.0;
};

MosfetLinearization mosfet_linearize(const MosfetParams& params, double vg, double vd,
                                     double vs);

struct Resistor {
    NodeId a = 0, b = 0;
    double resistance = 0.0;
};

struct Capacitor {
    NodeId a = 0, b = 0;
    double capacitance = 0.0;
};

struct VoltageSource {
    NodeId pos = 0, neg = 0;
    Waveform waveform;
};

struct Mosfet {
    NodeId gate = 0, drain = 0, source = 0;
    MosfetParams params;
};

// Two-terminal MTJ element; conductance follows the referenced device's
// magnetization. Positive branch current (free -> pinned) drives AP -> P.
struct MtjElement {
    NodeId free = 0, pinned = 0;
    int device = 0; // index into Netlist::mtj_devices
};

struct Element {
    std::string label;
    std::variant<Resistor, Capacitor, VoltageSource, Mosfet, MtjElement> payload;
};

// Node-indexed circuit graph. Node 0 is ground.
class Netlist {
public:
    NodeId add_node(const std::string& name);
    NodeId node(const std::string& name) const; // throws ParamError if absent
    bool has_node(const std::string& name) const;
    int node_count() const { return static_cast<int>(node_names_.size()); }
    const std::string& node_name(NodeId n) const { return node_names_.at(n); }

    int add_resistor(const std::string& label, NodeId a, NodeId b, double r);
    int add_capacitor(const std::string& label, NodeId a, NodeId b, double c);
    int add_voltage_source(const std::string& label, NodeId pos, NodeId neg, Waveform w);
    int add_mosfet(const std::string& label, NodeId gate, NodeId drain, NodeId source,
                   const MosfetParams& p);
    int add_mtj(const std::string& label, NodeId free, NodeId pinned, MtjDevice device);

    void set_probe(const std::string& label, NodeId n);
    NodeId probe(const std::string& label) const;
    const std::map<std::string, NodeId>& probes() const { return probes_; }

    const std::vector<Element>& elements() const { return elements_; }
    Element& element(int idx) { return elements_.at(idx); }
    int element_index(const std::string& label) const; // throws if absent
    VoltageSource& source(const std::string& label);

    std::vector<MtjDevice>& mtj_devices() { return mtj_devices_; }
    const std::vector<MtjDevice>& mtj_devices() const { return mtj_devices_; }

    // Indices of elements that are voltage sources, in insertion order.
    const std::vector<int>& source_elements() const { return source_elements_; }
    // MNA branch index of a source element (position among sources).
    int source_branch(int element_idx) const;

    // Checks terminal references, positivity of R/C/beta/vth, probe targets,
    // and connectivity from ground through conducting paths (gates do not
    // conduct). Throws ConstructionError on violation.
    void validate() const;

private:
    std::vector<std::string> node_names_{"gnd"};
    std::map<std::string, NodeId> node_index_{{"gnd", 0}};
    std::vector<Element> elements_;
    std::vector<int> source_elements_;
    std::vector<MtjDevice> mtj_devices_;
    std::map<std::string, NodeId> probes_;
};

} // namespace nvsram
