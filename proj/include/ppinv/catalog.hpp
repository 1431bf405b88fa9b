#pragma once

#include "ppinv/malliavin.hpp"
#include "ppinv/pointprocess.hpp"
#include "ppinv/transforms.hpp"

#include <map>
#include <string>

namespace ppinv {

// ---- named measures ------------------------------------------------------------

struct measure_params {
    double lo = 0.0;
    double hi = 1.0;
    double radius = 1.0;
};

inline intensity_measure make_measure(const std::string& name, const measure_params& p = {}) {
    if (name == "lebesgue") return make_lebesgue_interval(p.lo, p.hi);
    if (name == "dx_over_x") return make_dx_over_x(p.lo > 0 ? p.lo : 0.01, p.hi);
    if (name == "lebesgue_disk") return make_lebesgue_disk(p.radius);
    throw config_error("unknown measure: " + name);
}

// ---- named transformations ---------------------------------------------------------

struct transform_params {
    double period = 1.0;          // halfswap
    double shift_u = 0.3;         // hull torus shift
    double shift_v = 0.7;
    double radius = 1.0;          // hull disk radius
    double cutoff = 0.01;         // negmax left endpoint
};

inline transformation make_transform(const std::string& name, const transform_params& p = {}) {
    if (name == "identity") return make_identity(make_lebesgue_interval(0, 1));
    if (name == "identity_disk") return make_identity(make_lebesgue_disk(p.radius));
    if (name == "halfswap") return make_halfswap(p.period);
    if (name == "hull") return make_hull_transform(p.shift_u, p.shift_v, p.radius);
    if (name == "negmax") return make_negative_control(p.cutoff);
    throw config_error("unknown transformation: " + name);
}

// ---- composed processes u = h o tau --------------------------------------------------

// h o halfswap on [0,1] with h(t) = 1 + t.  The default quadrature panels
// align with the swap block boundaries, so the generic power integrals are
// accurate and pathwise constant.
inline point_process make_u4_halfswap() {
    auto tau = make_halfswap(1.0);
    point_process u;
    u.name = "U4";
    u.support = tau.source.domain();
    u.bound = 2.0;
    u.eval = [tau](const configuration& w, const point& t) {
        return 1.0 + tau.prepare(w)(t).x();
    };
    return u;
}

// h o hull-transform on the unit disk with h(p) = 1 + x/2.  Generic
// quadrature cannot see through the hull-boundary discontinuity, so the power
// integrals use the exact change of variables: disk integral minus polygon
// integral plus the square-side integral through the Rosenblatt map (the
// torus shift drops out by translation invariance on the square).
inline point_process make_u4_hull(double shift_u = 0.3, double shift_v = 0.7) {
    auto tau = make_hull_transform(shift_u, shift_v);
    point_process u;
    u.name = "U4_hull";
    u.support = tau.source.domain();
    u.bound = 1.5;
    auto h = [](const point& p) { return 1.0 + 0.5 * p.x(); };
    u.eval = [tau, h](const configuration& w, const point& t) { return h(tau.prepare(w)(t)); };
    u.power_integrals = [h](const intensity_measure& m, const configuration& w,
                            int maxpow) -> std::vector<double> {
        auto base = integrate_powers(m, h, maxpow);
        hull_data hd = hull_of(w);
        if (hd.degenerate) return base;

        quadrature_scheme ps;
        ps.nodes_per_axis = 48;
        auto poly_nodes = detail::build_nodes(region(hd.polygon), ps);
        std::vector<double> poly(maxpow + 1, 0.0);
        for (const auto& nd : poly_nodes) {
            double pw = 1.0;
            const double v = h(nd.x);
            for (int k = 0; k <= maxpow; ++k) {
                poly[k] += nd.w * pw;
                pw *= v;
            }
        }

        // Square-side integral through the transport pair.  Nodes are placed
        // in x along each strip (the inverse has a sqrt singularity in u at
        // chord tips, but is smooth in x) and pushed through marginal_u and
        // inverse; the weight is the chord width.
        rosenblatt_map rb(hd.polygon);
        quadrature_scheme gs;
        gs.nodes_per_axis = 32;
        const auto vaxis = detail::axis_nodes(0.0, 1.0, gs);
        std::vector<double> sq(maxpow + 1, 0.0);
        const auto xb = rb.strip_x_boundaries();
        for (std::size_t si = 0; si + 1 < xb.size(); ++si) {
            if (xb[si + 1] <= xb[si]) continue;
            quadrature_scheme us;
            us.nodes_per_axis = 16;
            for (const auto& [xx, wx] : detail::axis_nodes(xb[si], xb[si + 1], us)) {
                const auto [ylo, yhi] = rb.chord_at(xx);
                const double width = yhi - ylo;
                const double uu = rb.marginal_u(xx);
                for (const auto& [vv, wv] : vaxis) {
                    const double v = h(rb.inverse(uu, vv));
                    double pw = 1.0;
                    for (int k = 0; k <= maxpow; ++k) {
                        sq[k] += wx * wv * width * pw;
                        pw *= v;
                    }
                }
            }
        }

        std::vector<double> out(maxpow + 1);
        for (int k = 0; k <= maxpow; ++k) out[k] = base[k] - poly[k] + sq[k];
        return out;
    };
    return u;
}

inline point_process make_process(const std::string& name) {
    if (name == "U1") return make_u1();
    if (name == "U2") return make_u2();
    if (name == "U3") return make_u3();
    if (name == "U4") return make_u4_halfswap();
    if (name == "U4_hull") return make_u4_hull();
    throw config_error("unknown process: " + name);
}

// Default measure a named process lives on.
inline intensity_measure process_measure(const std::string& name) {
    if (name == "U4_hull") return make_lebesgue_disk(1.0);
    return make_lebesgue_interval(0, 1);
}

} // namespace ppinv
