#include "dremrac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace dremrac {

RefChannel RefChannel::constant(double value) {
    RefChannel ch;
    ch.kind = Kind::constant;
    ch.c = value;
    return ch;
}

RefChannel RefChannel::exp_rise(double amplitude, double rate) {
    RefChannel ch;
    ch.kind = Kind::exp_rise;
    ch.c = amplitude;
    ch.a = rate;
    return ch;
}

Mat eval_reference(const std::vector<RefChannel>& channels, double t) {
    Mat r(static_cast<int>(channels.size()), 1);
    int i = 0;
    for (const auto& ch : channels) {
        switch (ch.kind) {
            case RefChannel::Kind::constant:
                r[i] = ch.c;
                break;
            case RefChannel::Kind::exp_rise:
                r[i] = ch.c * (1.0 - std::exp(-ch.a * t));
                break;
            case RefChannel::Kind::table: {
                const auto& tab = ch.table;
                if (tab.empty()) throw ModelError("reference table channel is empty");
                if (t <= tab.front().first) {
                    r[i] = tab.front().second;
                } else if (t >= tab.back().first) {
                    r[i] = tab.back().second;
                } else {
                    size_t j = 1;
                    while (tab[j].first < t) ++j;
                    const auto& [t0, v0] = tab[j - 1];
                    const auto& [t1, v1] = tab[j];
                    r[i] = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                }
                break;
            }
        }
        ++i;
    }
    return r;
}

FeMonitor FeMonitor::make(int dim, FeConfig cfg) {
    FeMonitor m;
    m.gramian = Mat(dim, dim);
    m.cfg = cfg;
    m.prev_outer = Mat(dim, dim);
    return m;
}

void fe_check(FeMonitor& monitor, const Mat& sample, double t, double dt) {
    if (dt <= 0.0) throw ModelError("fe_check: dt must be positive");
    const Mat outer = sample * sample.transposed();
    monitor.peak_integrand = std::max(monitor.peak_integrand, outer.max_abs());
    if (monitor.has_prev)
        monitor.gramian += (dt / 2.0) * (monitor.prev_outer + outer);
    monitor.prev_outer = outer;
    monitor.has_prev = true;
    if (!monitor.t_e_detected) {
        const double level = (monitor.gramian.rows() == 1) ? monitor.gramian(0, 0)
                                                           : min_eig_sym(monitor.gramian);
        const double threshold = monitor.cfg.relative
                                     ? monitor.cfg.alpha * monitor.peak_integrand
                                     : monitor.cfg.alpha;
        if (threshold > 0.0 && level >= threshold) monitor.t_e_detected = t;
    }
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw ModelError("sim: dt must be positive");
    if (!(T > dt)) throw ModelError("sim: T must exceed dt");
    if (!(filter.l > 0.0)) throw ModelError("sim: filter constant l must be positive");
    if (!(drem.k > 0.0)) throw ModelError("sim: extension constant k must be positive");
    if (!(drem.scaling > 0.0)) throw ModelError("sim: regressor scaling must be positive");
    if (!(memory.sigma > 0.0)) throw ModelError("sim: forgetting rate sigma must be positive");
    if (!(gamma0 >= 1.0)) throw ModelError("sim: gamma0 must be >= 1");
    if (!(gamma1 >= 0.0)) throw ModelError("sim: gamma1 must be >= 0");
    if (!(epsilon_rel > 0.0)) throw ModelError("sim: epsilon_rel must be positive");
    if (!(fe.alpha > 0.0)) throw ModelError("sim: FE threshold alpha must be positive");
    if (reference.empty()) throw ModelError("sim: at least one reference channel required");
    if (baseline.enabled && !(baseline.gamma > 0.0))
        throw ModelError("sim: baseline gain must be positive");
}

DivergenceError::DivergenceError(std::string sig, double t)
    : std::runtime_error("divergence in signal '" + sig + "' at t = " + std::to_string(t)),
      signal(std::move(sig)),
      time(t) {}

namespace {

// All coupled ODE states, advanced by one monolithic RK4 vector field.
struct LoopState {
    Mat x;
    Mat x_ref;
    Mat phi_bar;    // (n+m) x 1
    Mat F;          // q x q
    Mat G;          // q x n
    double Omega = 0.0;
    Mat Upsilon;    // (n+m) x m
    Mat theta_hat;  // (n+m) x m
    Mat theta_b;    // comparison estimator, same shape (unused when disabled)
};

struct LoopDeriv {
    Mat dx, dx_ref, dphi_bar, dF, dG, dUpsilon, dtheta_hat, dtheta_b;
    double dOmega = 0.0;
};

LoopState advanced(const LoopState& s, double h, const LoopDeriv& d, bool baseline) {
    LoopState r = s;
    r.x += h * d.dx;
    r.x_ref += h * d.dx_ref;
    r.phi_bar += h * d.dphi_bar;
    r.F += h * d.dF;
    r.G += h * d.dG;
    r.Omega += h * d.dOmega;
    r.Upsilon += h * d.dUpsilon;
    r.theta_hat += h * d.dtheta_hat;
    if (baseline) r.theta_b += h * d.dtheta_b;
    return r;
}

// Compensated state += h * inc. The mixing step divides by det(F), so the
// F and G accumulations are kept at working precision plus a carry; without
// it, independent rounding of the two running sums leaks into adj(F) G.
void kahan_add(Mat& state, Mat& carry, double h, const Mat& inc) {
    for (int i = 0; i < state.size(); ++i) {
        const double y = h * inc[i] - carry[i];
        const double t = state[i] + y;
        carry[i] = (t - state[i]) - y;
        state[i] = t;
    }
}

struct Regression {
    Mat z;
    double phi = 0.0;
    Mat z_A;
    Mat z_B;
    double Delta = 0.0;
    Mat y_theta;
};

Regression regression_at(const LoopState& s, const PlantModel& plant, const ReferenceModel& ref) {
    Regression r;
    MixResult mr = mix(DremState{s.F, s.G});
    Extracted ex = extract(mr.z, plant.n, plant.m);
    ControllerRegression cr = controller_regression(ex.z_A, ex.z_B, mr.phi, ref);
    r.z = std::move(mr.z);
    r.phi = mr.phi;
    r.z_A = std::move(ex.z_A);
    r.z_B = std::move(ex.z_B);
    r.Delta = cr.Delta;
    r.y_theta = std::move(cr.y_theta);
    return r;
}

struct Derivator {
    const SimConfig& cfg;
    const PlantModel& plant;
    const ReferenceModel& ref;
    GainSchedule sched;  // epsilon frozen at step start

    LoopDeriv operator()(const LoopState& s, double t) const {
        LoopDeriv d;
        const Mat r = eval_reference(cfg.reference, t);
        const Mat u = s.theta_hat.transposed() * vstack(s.x, r);
        d.dx = plant.A * s.x + plant.B * u;
        d.dx_ref = ref.A_ref * s.x_ref + ref.B_ref * r;

        const Mat Phi = vstack(s.x, u);
        const FilterState fs{s.phi_bar, t};
        d.dphi_bar = filter_derivative(fs, Phi, cfg.filter);

        const Mat phi_ext = extended_regressor(fs, cfg.filter);
        const Mat zb = cfg.filter.x0_known ? z_bar_known_x0(fs, s.x, plant.x0, cfg.filter)
                                           : z_bar(fs, s.x, cfg.filter);
        const DremDerivative dd =
            drem_derivative(DremState{s.F, s.G}, phi_ext, zb, cfg.drem);
        d.dF = dd.dF;
        d.dG = dd.dG;

        const Regression reg = regression_at(s, plant, ref);
        const MemoryDerivative md = memory_derivative(MemoryState{s.Omega, s.Upsilon, t},
                                                      reg.Delta, reg.y_theta, cfg.memory);
        d.dOmega = md.dOmega;
        d.dUpsilon = md.dUpsilon;

        const double g = gain(sched, s.Omega, vstack(s.x, r));
        d.dtheta_hat = (-g * s.Omega) * (s.Omega * s.theta_hat - s.Upsilon);
        if (cfg.baseline.enabled) {
            const double flip = (cfg.baseline.sign == BaselineSign::corrected) ? 1.0 : -1.0;
            d.dtheta_b = (-flip * cfg.baseline.gamma * reg.Delta) *
                         (reg.Delta * s.theta_b - reg.y_theta);
        }
        return d;
    }
};

void check_finite(const LoopState& s, double t, bool baseline) {
    const std::pair<const Mat*, const char*> blocks[] = {
        {&s.x, "x"},           {&s.x_ref, "x_ref"},   {&s.phi_bar, "phi_bar"},
        {&s.F, "F"},           {&s.G, "G"},           {&s.Upsilon, "Upsilon"},
        {&s.theta_hat, "theta_hat"}};
    for (const auto& [m, name] : blocks)
        if (!m->all_finite()) throw DivergenceError(name, t);
    if (!std::isfinite(s.Omega)) throw DivergenceError("Omega", t);
    if (baseline && !s.theta_b.all_finite()) throw DivergenceError("theta_baseline", t);
}

SimTrace run_impl(const SimConfig& cfg, const PlantModel& plant, const ReferenceModel& ref,
                  const StepObserver& observer, SimTrace* baseline_out) {
    cfg.validate();
    const int n = plant.n;
    const int m = plant.m;
    if (static_cast<int>(cfg.reference.size()) != m)
        throw ModelError("sim: reference channel count must equal input dimension m");
    if (ref.A_ref.rows() != n || ref.B_ref.cols() != m)
        throw ModelError("sim: plant and reference model dimensions disagree");
    const int q = cfg.filter.x0_known ? n + m : n + m + 1;
    const bool with_baseline = cfg.baseline.enabled;

    LoopState s;
    s.x = plant.x0;
    s.x_ref = ref.x0_ref;
    s.phi_bar = Mat(n + m, 1);
    s.F = Mat(q, q);
    s.G = Mat(q, n);
    s.Upsilon = Mat(n + m, m);
    s.theta_hat = cfg.theta_hat0 ? ControllerState::make(*cfg.theta_hat0, n, m).theta_hat
                                 : ControllerState::default_init(n, m).theta_hat;
    if (with_baseline) s.theta_b = s.theta_hat;

    std::optional<Mat> theta_true;
    if (cfg.oracle) theta_true = ideal_gains(plant, ref).theta();

    SimTrace trace;
    trace.n = n;
    trace.m = m;
    trace.oracle = cfg.oracle;
    trace.min_Omega_after_te = std::numeric_limits<double>::infinity();
    if (baseline_out) {
        *baseline_out = SimTrace{};
        baseline_out->n = n;
        baseline_out->m = m;
        baseline_out->oracle = cfg.oracle;
        baseline_out->min_Omega_after_te = std::numeric_limits<double>::infinity();
    }

    FeMonitor fe = FeMonitor::make(1, cfg.fe);
    Mat carry_F(q, q);
    Mat carry_G(q, n);
    double max_Omega = 0.0;
    double prev_gamma = 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    const auto log_row = [&](double t) {
        const Mat r = eval_reference(cfg.reference, t);
        const Mat u = s.theta_hat.transposed() * vstack(s.x, r);
        const Regression reg = regression_at(s, plant, ref);

        Mat delta_sample(1, 1);
        delta_sample(0, 0) = reg.Delta;
        fe_check(fe, delta_sample, t, cfg.dt);
        trace.t_e_detected = fe.t_e_detected;

        max_Omega = std::max(max_Omega, s.Omega);
        trace.max_Omega = max_Omega;
        const GainSchedule sched{cfg.gamma0, cfg.gamma1, cfg.epsilon_rel * (1.0 + max_Omega)};
        const double g = gain(sched, s.Omega, vstack(s.x, r));

        TraceRow row;
        row.t = t;
        row.x = s.x;
        row.x_ref = s.x_ref;
        row.u = u;
        row.eref_norm = tracking_error(s.x, s.x_ref).norm();
        row.Delta = reg.Delta;
        row.Omega = s.Omega;
        row.gamma = g;
        row.theta_hat = s.theta_hat;
        if (theta_true) {
            const double tt = (s.theta_hat - *theta_true).norm();
            row.theta_tilde_norm = tt;
            row.xi_norm = std::sqrt(row.eref_norm * row.eref_norm + tt * tt);
            trace.max_xi = std::max(trace.max_xi, row.xi_norm);
        } else {
            row.theta_tilde_norm = nan;
            row.xi_norm = nan;
        }
        if (prev_gamma == 0.0 && g > 0.0) {
            row.switch_flag = 1;
            ++trace.switch_count;
        }
        prev_gamma = g;
        if (trace.t_e_detected && t >= *trace.t_e_detected)
            trace.min_Omega_after_te = std::min(trace.min_Omega_after_te, s.Omega);

        if (observer) {
            const FilterState fs{s.phi_bar, t};
            const Mat phi_ext = extended_regressor(fs, cfg.filter);
            const Mat zb = cfg.filter.x0_known ? z_bar_known_x0(fs, s.x, plant.x0, cfg.filter)
                                               : z_bar(fs, s.x, cfg.filter);
            observer(StepInternals{t, s.x, s.x_ref, u, phi_ext, zb, reg.z, reg.phi, reg.z_A,
                                   reg.z_B, reg.Delta, reg.y_theta, s.Omega, s.Upsilon, g,
                                   s.theta_hat});
        }
        trace.rows.push_back(std::move(row));

        if (baseline_out) {
            TraceRow brow = trace.rows.back();
            brow.gamma = cfg.baseline.gamma;
            brow.switch_flag = 0;
            brow.theta_hat = s.theta_b;
            if (theta_true) {
                const double tt = (s.theta_b - *theta_true).norm();
                brow.theta_tilde_norm = tt;
                brow.xi_norm = std::sqrt(brow.eref_norm * brow.eref_norm + tt * tt);
                baseline_out->max_xi = std::max(baseline_out->max_xi, brow.xi_norm);
            }
            baseline_out->rows.push_back(std::move(brow));
            baseline_out->t_e_detected = trace.t_e_detected;
            baseline_out->max_Omega = trace.max_Omega;
        }
    };

    const long steps = static_cast<long>(std::llround(cfg.T / cfg.dt));
    log_row(0.0);
    for (long i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * cfg.dt;
        const Derivator f{cfg, plant, ref,
                          GainSchedule{cfg.gamma0, cfg.gamma1,
                                       cfg.epsilon_rel * (1.0 + max_Omega)}};
        const LoopDeriv k1 = f(s, t);
        const LoopDeriv k2 = f(advanced(s, cfg.dt / 2.0, k1, with_baseline), t + cfg.dt / 2.0);
        const LoopDeriv k3 = f(advanced(s, cfg.dt / 2.0, k2, with_baseline), t + cfg.dt / 2.0);
        const LoopDeriv k4 = f(advanced(s, cfg.dt, k3, with_baseline), t + cfg.dt);

        LoopDeriv sum = k1;
        const auto acc = [&](LoopDeriv& a, const LoopDeriv& b, double w) {
            a.dx += w * b.dx;
            a.dx_ref += w * b.dx_ref;
            a.dphi_bar += w * b.dphi_bar;
            a.dF += w * b.dF;
            a.dG += w * b.dG;
            a.dOmega += w * b.dOmega;
            a.dUpsilon += w * b.dUpsilon;
            a.dtheta_hat += w * b.dtheta_hat;
            if (with_baseline) a.dtheta_b += w * b.dtheta_b;
        };
        acc(sum, k2, 2.0);
        acc(sum, k3, 2.0);
        acc(sum, k4, 1.0);
        {
            const Mat dF = sum.dF;
            const Mat dG = sum.dG;
            sum.dF = Mat(q, q);
            sum.dG = Mat(q, plant.n);
            s = advanced(s, cfg.dt / 6.0, sum, with_baseline);
            kahan_add(s.F, carry_F, cfg.dt / 6.0, dF);
            kahan_add(s.G, carry_G, cfg.dt / 6.0, dG);
        }
        for (int a = 0; a < q; ++a)
            for (int b = a + 1; b < q; ++b) {
                const double avg = 0.5 * (s.F(a, b) + s.F(b, a));
                s.F(a, b) = avg;
                s.F(b, a) = avg;
                const double cavg = 0.5 * (carry_F(a, b) + carry_F(b, a));
                carry_F(a, b) = cavg;
                carry_F(b, a) = cavg;
            }
        const double t_next = static_cast<double>(i + 1) * cfg.dt;
        check_finite(s, t_next, with_baseline);
        log_row(t_next);
    }
    return trace;
}

}  // namespace

SimTrace run(const SimConfig& cfg, const PlantModel& plant, const ReferenceModel& ref,
             const StepObserver& observer) {
    return run_impl(cfg, plant, ref, observer, nullptr);
}

ComparisonResult compare_laws(const SimConfig& cfg, const PlantModel& plant,
                              const ReferenceModel& ref) {
    SimConfig paired = cfg;
    paired.baseline.enabled = true;
    ComparisonResult result;
    result.memory_law = run_impl(paired, plant, ref, nullptr, &result.memoryless_law);
    return result;
}

}  // namespace dremrac
