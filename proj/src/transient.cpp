#include "nvsram/transient.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "nvsram/errors.hpp"

namespace nvsram {

namespace {

constexpr double newton_step_limit = 0.4; // V, per-iteration update clamp

struct MnaWorkspace {
    int n_nodes = 0;    // including ground
    int n_sources = 0;
    int dim = 0;        // (n_nodes - 1) + n_sources
    Eigen::MatrixXd jac;
    Eigen::VectorXd residual;
    Eigen::VectorXd state; // [v_1 .. v_{n-1}, i_src_0 ..]

    explicit MnaWorkspace(const Netlist& netlist) {
        n_nodes = netlist.node_count();
        n_sources = static_cast<int>(netlist.source_elements().size());
        dim = n_nodes - 1 + n_sources;
        jac.resize(dim, dim);
        residual.resize(dim);
        state = Eigen::VectorXd::Zero(dim);
    }

    int vrow(NodeId n) const { return n - 1; } // valid for n > 0
    int brow(int source_index) const { return n_nodes - 1 + source_index; }

    double v(NodeId n) const { return n == ground_node ? 0.0 : state[vrow(n)]; }

    std::vector<double> node_voltages() const {
        std::vector<double> out(n_nodes, 0.0);
        for (NodeId n = 1; n < n_nodes; ++n) out[n] = state[vrow(n)];
        return out;
    }

    void set_node_voltages(const std::vector<double>& v) {
        for (NodeId n = 1; n < n_nodes; ++n) state[vrow(n)] = v[n];
    }
};

struct StampContext {
    bool with_capacitors = false;
    double dt = 0.0;
    double t = 0.0;
    double gmin = 0.0;
    const std::vector<double>* prev_v = nullptr; // node voltages at previous step
};

void build_system(const Netlist& netlist, const StampContext& ctx, MnaWorkspace& w) {
    w.jac.setZero();
    w.residual.setZero();

    const auto add_f = [&](NodeId n, double i) {
        if (n != ground_node) w.residual[w.vrow(n)] += i;
    };
    const auto add_j = [&](NodeId row, NodeId col, double g) {
        if (row != ground_node && col != ground_node) w.jac(w.vrow(row), w.vrow(col)) += g;
    };
    const auto stamp_conductance = [&](NodeId a, NodeId b, double g, double i) {
        add_f(a, i);
        add_f(b, -i);
        add_j(a, a, g);
        add_j(a, b, -g);
        add_j(b, a, -g);
        add_j(b, b, g);
    };

    int source_index = 0;
    for (const auto& e : netlist.elements()) {
        if (const auto* r = std::get_if<Resistor>(&e.payload)) {
            const double g = 1.0 / r->resistance;
            stamp_conductance(r->a, r->b, g, g * (w.v(r->a) - w.v(r->b)));
        } else if (const auto* c = std::get_if<Capacitor>(&e.payload)) {
            if (ctx.with_capacitors) {
                const double geq = c->capacitance / ctx.dt;
                const double v_prev = (*ctx.prev_v)[c->a] - (*ctx.prev_v)[c->b];
                const double i = geq * ((w.v(c->a) - w.v(c->b)) - v_prev);
                stamp_conductance(c->a, c->b, geq, i);
            }
        } else if (const auto* s = std::get_if<VoltageSource>(&e.payload)) {
            const int br = w.brow(source_index);
            const double i_br = w.state[br];
            add_f(s->pos, i_br);
            add_f(s->neg, -i_br);
            if (s->pos != ground_node) {
                w.jac(w.vrow(s->pos), br) += 1.0;
                w.jac(br, w.vrow(s->pos)) += 1.0;
            }
            if (s->neg != ground_node) {
                w.jac(w.vrow(s->neg), br) -= 1.0;
                w.jac(br, w.vrow(s->neg)) -= 1.0;
            }
            w.residual[br] = w.v(s->pos) - w.v(s->neg) - s->waveform.value(ctx.t);
            ++source_index;
        } else if (const auto* m = std::get_if<Mosfet>(&e.payload)) {
            const MosfetLinearization lin =
                mosfet_linearize(m->params, w.v(m->gate), w.v(m->drain), w.v(m->source));
            add_f(m->drain, lin.id);
            add_f(m->source, -lin.id);
            add_j(m->drain, m->gate, lin.d_vg);
            add_j(m->drain, m->drain, lin.d_vd);
            add_j(m->drain, m->source, lin.d_vs);
            add_j(m->source, m->gate, -lin.d_vg);
            add_j(m->source, m->drain, -lin.d_vd);
            add_j(m->source, m->source, -lin.d_vs);
        } else if (const auto* mtj = std::get_if<MtjElement>(&e.payload)) {
            const double g = netlist.mtj_devices()[mtj->device].conductance_now();
            stamp_conductance(mtj->free, mtj->pinned, g,
                              g * (w.v(mtj->free) - w.v(mtj->pinned)));
        }
    }

    for (NodeId n = 1; n < w.n_nodes; ++n) {
        w.residual[w.vrow(n)] += ctx.gmin * w.state[w.vrow(n)];
        w.jac(w.vrow(n), w.vrow(n)) += ctx.gmin;
    }
}

double max_node_residual(const MnaWorkspace& w) {
    double worst = 0.0;
    for (int i = 0; i < w.n_nodes - 1; ++i) worst = std::max(worst, std::abs(w.residual[i]));
    return worst;
}

// Newton iteration on the assembled system; returns false on non-convergence.
bool newton_solve(const Netlist& netlist, StampContext ctx, const TransientConfig& config,
                  MnaWorkspace& w, std::string* diag) {
    double last_dv = 0.0;
    for (int iter = 0; iter < config.newton_max_iters; ++iter) {
        build_system(netlist, ctx, w);
        const double res = max_node_residual(w);
        if (iter > 0 && last_dv < config.newton_tol && res < config.current_tol) return true;
        Eigen::VectorXd delta = w.jac.partialPivLu().solve(-w.residual);
        if (!delta.allFinite()) {
            if (diag) *diag = "singular or non-finite Newton update";
            return false;
        }
        double max_dv = 0.0;
        for (int i = 0; i < w.n_nodes - 1; ++i) max_dv = std::max(max_dv, std::abs(delta[i]));
        if (max_dv > newton_step_limit) delta *= newton_step_limit / max_dv;
        w.state += delta;
        last_dv = std::min(max_dv, newton_step_limit);
    }
    if (diag) {
        std::ostringstream os;
        os << "no convergence after " << config.newton_max_iters
           << " iterations (last |dV|=" << last_dv << " V, residual=" << max_node_residual(w)
           << " A)";
        *diag = os.str();
    }
    return false;
}

// Newton with one gmin-stepping retry: ramp a large shunt down to the
// configured gmin, reusing each solution as the next guess.
void solve_with_retry(const Netlist& netlist, const StampContext& ctx,
                      const TransientConfig& config, MnaWorkspace& w) {
    std::string diag;
    if (newton_solve(netlist, ctx, config, w, &diag)) return;
    for (double g : {1e-3, 1e-5, 1e-7, 1e-9, config.gmin}) {
        StampContext relaxed = ctx;
        relaxed.gmin = std::max(g, config.gmin);
        if (!newton_solve(netlist, relaxed, config, w, &diag)) {
            std::ostringstream os;
            os << "newton failed at t=" << ctx.t << " s during gmin stepping (gmin=" << g
               << "): " << diag;
            throw SolverError(os.str());
        }
    }
}

struct ElementCurrents {
    std::vector<double> current;       // per element, associated direction
    std::vector<double> branch_v;      // per element
};

// Branch currents at a solved point. Capacitor currents use the BE formula
// against prev_v; at the initial sample they are zero.
ElementCurrents element_currents(const Netlist& netlist, const MnaWorkspace& w,
                                 const StampContext& ctx) {
    ElementCurrents out;
    out.current.resize(netlist.elements().size(), 0.0);
    out.branch_v.resize(netlist.elements().size(), 0.0);
    int source_index = 0;
    for (std::size_t k = 0; k < netlist.elements().size(); ++k) {
        const auto& e = netlist.elements()[k];
        if (const auto* r = std::get_if<Resistor>(&e.payload)) {
            out.branch_v[k] = w.v(r->a) - w.v(r->b);
            out.current[k] = out.branch_v[k] / r->resistance;
        } else if (const auto* c = std::get_if<Capacitor>(&e.payload)) {
            out.branch_v[k] = w.v(c->a) - w.v(c->b);
            if (ctx.with_capacitors) {
                const double v_prev = (*ctx.prev_v)[c->a] - (*ctx.prev_v)[c->b];
                out.current[k] = c->capacitance / ctx.dt * (out.branch_v[k] - v_prev);
            }
        } else if (const auto* s = std::get_if<VoltageSource>(&e.payload)) {
            out.branch_v[k] = w.v(s->pos) - w.v(s->neg);
            out.current[k] = w.state[w.brow(source_index)];
            ++source_index;
        } else if (const auto* m = std::get_if<Mosfet>(&e.payload)) {
            out.branch_v[k] = w.v(m->drain) - w.v(m->source);
            out.current[k] = mosfet_current(m->params.polarity, w.v(m->gate) - w.v(m->source),
                                            out.branch_v[k], m->params);
        } else if (const auto* mtj = std::get_if<MtjElement>(&e.payload)) {
            out.branch_v[k] = w.v(mtj->free) - w.v(mtj->pinned);
            out.current[k] =
                netlist.mtj_devices()[mtj->device].conductance_now() * out.branch_v[k];
        }
    }
    return out;
}

// Max |sum of element currents| per node, gmin excluded.
double node_current_residual(const Netlist& netlist, const ElementCurrents& cur) {
    std::vector<double> sums(netlist.node_count(), 0.0);
    for (std::size_t k = 0; k < netlist.elements().size(); ++k) {
        const auto& e = netlist.elements()[k];
        NodeId a = ground_node, b = ground_node;
        if (const auto* r = std::get_if<Resistor>(&e.payload)) {
            a = r->a;
            b = r->b;
        } else if (const auto* c = std::get_if<Capacitor>(&e.payload)) {
            a = c->a;
            b = c->b;
        } else if (const auto* s = std::get_if<VoltageSource>(&e.payload)) {
            a = s->pos;
            b = s->neg;
        } else if (const auto* m = std::get_if<Mosfet>(&e.payload)) {
            a = m->drain;
            b = m->source;
        } else if (const auto* mtj = std::get_if<MtjElement>(&e.payload)) {
            a = mtj->free;
            b = mtj->pinned;
        }
        sums[a] += cur.current[k];
        sums[b] -= cur.current[k];
    }
    double worst = 0.0;
    for (NodeId n = 1; n < netlist.node_count(); ++n) worst = std::max(worst, std::abs(sums[n]));
    return worst;
}

} // namespace

void TransientConfig::validate() const {
    if (!(dt > 0)) throw ParamError("transient config: dt must be positive");
    if (t_end < dt) throw ParamError("transient config: t_end must be >= dt");
    if (!(newton_tol > 0)) throw ParamError("transient config: newton_tol must be positive");
    if (newton_max_iters < 1) throw ParamError("transient config: newton_max_iters must be >= 1");
    if (sample_stride < 1) throw ParamError("transient config: sample_stride must be >= 1");
    if (mtj_temperature < 0) throw ParamError("transient config: temperature must be >= 0");
}

double Trace::voltage(const std::string& probe_label, int sample) const {
    const auto it = probes.find(probe_label);
    if (it == probes.end()) throw ParamError("unknown probe: " + probe_label);
    return node_v.at(sample).at(it->second);
}

const std::vector<double>& Trace::voltage_series(const std::string& probe_label,
                                                 std::vector<double>& out) const {
    const auto it = probes.find(probe_label);
    if (it == probes.end()) throw ParamError("unknown probe: " + probe_label);
    out.resize(time.size());
    for (std::size_t k = 0; k < time.size(); ++k) out[k] = node_v[k][it->second];
    return out;
}

int Trace::sample_at_or_after(double t) const {
    for (std::size_t k = 0; k < time.size(); ++k)
        if (time[k] >= t - 1e-18) return static_cast<int>(k);
    throw ParamError("trace does not cover the requested time");
}

std::optional<double> Trace::crossing_time(const std::string& probe_label, double level,
                                           bool rising, double t_from) const {
    const auto it = probes.find(probe_label);
    if (it == probes.end()) throw ParamError("unknown probe: " + probe_label);
    const NodeId n = it->second;
    for (std::size_t k = 1; k < time.size(); ++k) {
        if (time[k] < t_from) continue;
        const double v0 = node_v[k - 1][n];
        const double v1 = node_v[k][n];
        const bool crossed = rising ? (v0 < level && v1 >= level) : (v0 > level && v1 <= level);
        if (crossed) {
            const double frac = (level - v0) / (v1 - v0);
            const double t = time[k - 1] + frac * (time[k] - time[k - 1]);
            if (t >= t_from) return t;
        }
    }
    return std::nullopt;
}

void Trace::check_finite() const {
    for (const auto& row : node_v)
        for (double v : row)
            if (!std::isfinite(v)) throw NumericError("trace contains non-finite voltage");
}

std::vector<double> dc_operating_point(Netlist& netlist, double t,
                                       const TransientConfig& config,
                                       const std::vector<double>* guess) {
    netlist.validate();
    MnaWorkspace w(netlist);
    if (guess) {
        if (static_cast<int>(guess->size()) != w.n_nodes)
            throw ParamError("dc operating point: guess size mismatch");
        w.set_node_voltages(*guess);
    }
    StampContext ctx;
    ctx.with_capacitors = false;
    ctx.t = t;
    ctx.gmin = config.gmin;
    solve_with_retry(netlist, ctx, config, w);
    return w.node_voltages();
}

Trace transient(Netlist& netlist, const TransientConfig& config,
                const std::vector<double>* initial_v,
                std::vector<NormalSampler>* mtj_rngs) {
    config.validate();
    netlist.validate();
    const bool thermal = config.mtj_temperature > 0.0;
    if (thermal &&
        (!mtj_rngs || mtj_rngs->size() != netlist.mtj_devices().size()))
        throw ParamError("transient: one rng stream per MTJ device is required at T > 0");

    MnaWorkspace w(netlist);
    std::vector<double> prev_v;
    if (initial_v) {
        if (static_cast<int>(initial_v->size()) != w.n_nodes)
            throw ParamError("transient: initial state size mismatch");
        prev_v = *initial_v;
    } else {
        prev_v = dc_operating_point(netlist, 0.0, config);
    }
    w.set_node_voltages(prev_v);

    const long n_steps = std::lround(config.t_end / config.dt);
    const int n_elements = static_cast<int>(netlist.elements().size());
    const int n_mtjs = static_cast<int>(netlist.mtj_devices().size());
    const int n_sources = static_cast<int>(netlist.source_elements().size());

    Trace trace;
    trace.dt = config.dt;
    trace.sample_stride = config.sample_stride;
    trace.probes = netlist.probes();
    trace.node_names.resize(netlist.node_count());
    for (NodeId n = 0; n < netlist.node_count(); ++n) trace.node_names[n] = netlist.node_name(n);
    trace.element_labels.resize(n_elements);
    for (int k = 0; k < n_elements; ++k) trace.element_labels[k] = netlist.elements()[k].label;

    StampContext ctx;
    ctx.with_capacitors = true;
    ctx.dt = config.dt;
    ctx.gmin = config.gmin;
    ctx.prev_v = &prev_v;

    // Initial currents: capacitors quiescent; source branches back-computed
    // from the KCL deficit at their positive terminals so the power series
    // starts consistent with the carried state.
    ctx.t = 0.0;
    ElementCurrents cur = element_currents(netlist, w, StampContext{});
    {
        std::vector<double> deficit(netlist.node_count(), 0.0);
        for (std::size_t k = 0; k < netlist.elements().size(); ++k) {
            const auto& e = netlist.elements()[k];
            if (std::holds_alternative<VoltageSource>(e.payload)) continue;
            NodeId a = ground_node, b = ground_node;
            if (const auto* r = std::get_if<Resistor>(&e.payload)) { a = r->a; b = r->b; }
            else if (const auto* c = std::get_if<Capacitor>(&e.payload)) { a = c->a; b = c->b; }
            else if (const auto* m = std::get_if<Mosfet>(&e.payload)) { a = m->drain; b = m->source; }
            else if (const auto* mtj = std::get_if<MtjElement>(&e.payload)) { a = mtj->free; b = mtj->pinned; }
            deficit[a] += cur.current[k];
            deficit[b] -= cur.current[k];
        }
        int source_index = 0;
        for (int el : netlist.source_elements()) {
            const auto& s = std::get<VoltageSource>(netlist.elements()[el].payload);
            if (s.pos != ground_node) cur.current[el] = -deficit[s.pos];
            w.state[w.brow(source_index)] = cur.current[el];
            ++source_index;
        }
    }

    std::vector<double> energy(n_elements, 0.0);
    std::vector<double> prev_power(n_elements, 0.0);
    for (int k = 0; k < n_elements; ++k) prev_power[k] = cur.branch_v[k] * cur.current[k];

    const auto record_sample = [&](double t, const ElementCurrents& c) {
        trace.time.push_back(t);
        trace.node_v.push_back(w.node_voltages());
        trace.element_i.push_back(c.current);
        trace.element_energy.push_back(energy);
        std::vector<double> sp(n_sources, 0.0);
        for (int s = 0; s < n_sources; ++s) {
            const int el = netlist.source_elements()[s];
            sp[s] = -c.branch_v[el] * c.current[el]; // delivered into the circuit
        }
        trace.source_power.push_back(std::move(sp));
        std::vector<double> mz(n_mtjs, 0.0);
        for (int m = 0; m < n_mtjs; ++m) mz[m] = netlist.mtj_devices()[m].state.m.z;
        trace.mtj_mz.push_back(std::move(mz));
    };

    record_sample(0.0, cur);

    for (long step = 1; step <= n_steps; ++step) {
        ctx.t = step * config.dt;
        try {
            solve_with_retry(netlist, ctx, config, w);
        } catch (const SolverError& err) {
            throw SolverError(std::string(err.what()) + " (transient step " +
                              std::to_string(step) + ")");
        }
        cur = element_currents(netlist, w, ctx);
        trace.max_kcl_residual =
            std::max(trace.max_kcl_residual, node_current_residual(netlist, cur));

        for (int k = 0; k < n_elements; ++k) {
            const double p = cur.branch_v[k] * cur.current[k];
            energy[k] += 0.5 * (p + prev_power[k]) * config.dt;
            prev_power[k] = p;
        }

        // Advance magnetization with the currents just solved.
        for (std::size_t k = 0; k < netlist.elements().size(); ++k) {
            if (const auto* mtj = std::get_if<MtjElement>(&netlist.elements()[k].payload)) {
                MtjDevice& dev = netlist.mtj_devices()[mtj->device];
                Vec3 field{};
                if (thermal)
                    field = sample_thermal_field(dev.params, config.mtj_temperature, config.dt,
                                                 (*mtj_rngs)[mtj->device]);
                dev.step(cur.current[k], config.dt, field);
                trace.max_norm_error =
                    std::max(trace.max_norm_error, std::abs(dev.state.m.norm() - 1.0));
            }
        }

        if (step % config.sample_stride == 0 || step == n_steps) record_sample(ctx.t, cur);
        prev_v = w.node_voltages();
    }

    trace.final_node_v = prev_v;
    trace.check_finite();
    return trace;
}

double kcl_residual(const Netlist& netlist, const Trace& trace, int sample) {
    if (sample < 0 || sample >= trace.sample_count())
        throw ParamError("kcl residual: sample index out of range");
    const std::vector<double>& v = trace.node_v[sample];
    const double dt = trace.dt * trace.sample_stride;
    std::vector<double> sums(netlist.node_count(), 0.0);
    int element_index = 0;
    for (const auto& e : netlist.elements()) {
        const int k = element_index++;
        NodeId a = ground_node, b = ground_node;
        double i = 0.0;
        if (const auto* r = std::get_if<Resistor>(&e.payload)) {
            a = r->a;
            b = r->b;
            i = (v[a] - v[b]) / r->resistance;
        } else if (const auto* c = std::get_if<Capacitor>(&e.payload)) {
            a = c->a;
            b = c->b;
            if (sample > 0) {
                const std::vector<double>& vp = trace.node_v[sample - 1];
                i = c->capacitance / dt * ((v[a] - v[b]) - (vp[a] - vp[b]));
            }
        } else if (const auto* s = std::get_if<VoltageSource>(&e.payload)) {
            a = s->pos;
            b = s->neg;
            i = trace.element_i[sample][k];
        } else if (const auto* m = std::get_if<Mosfet>(&e.payload)) {
            a = m->drain;
            b = m->source;
            i = mosfet_current(m->params.polarity, v[m->gate] - v[m->source], v[a] - v[b],
                               m->params);
        } else if (const auto* mtj = std::get_if<MtjElement>(&e.payload)) {
            a = mtj->free;
            b = mtj->pinned;
            // The solve at this sample used the magnetization of the previous
            // step (operator splitting).
            const int mz_sample = sample > 0 ? sample - 1 : 0;
            MagnetizationState s_used{{0.0, 0.0, trace.mtj_mz[mz_sample][mtj->device]}};
            const MtjParams& p = netlist.mtj_devices()[mtj->device].params;
            const double gp = 1.0 / p.r_parallel;
            const double gap = 1.0 / p.r_antiparallel;
            const double g = 0.5 * ((gp + gap) + (gp - gap) * s_used.m.z);
            i = g * (v[a] - v[b]);
        }
        sums[a] += i;
        sums[b] -= i;
    }
    double worst = 0.0;
    for (NodeId n = 1; n < netlist.node_count(); ++n) worst = std::max(worst, std::abs(sums[n]));
    return worst;
}

} // namespace nvsram
