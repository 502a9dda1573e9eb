#include "lambda_memory/solver.hpp"

#include "lambda_memory/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmem {

namespace {

double excitation(const SpaceGrid& g, std::span<const cplx> p, std::span<const cplx> s) {
    const auto w = g.weights();
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        acc += w[k] * (std::norm(p[k]) + std::norm(s[k]));
    return acc;
}

double weighted_norm2(const SpaceGrid& g, std::span<const cplx> v) {
    const auto w = g.weights();
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        acc += w[k] * std::norm(v[k]);
    return acc;
}

} // namespace

double default_dt(double omega_max) noexcept {
    return std::min(0.02, 0.1 / (1.0 + omega_max * omega_max));
}

StageGrids stage_grids_for(const Envelope& control, const SolverOptions& opts) {
    const double dt = opts.dt.value_or(default_dt(control.max_abs()));
    const auto& g = control.grid();
    return {SpaceGrid(opts.n_z), TimeGrid::with_max_step(g.t_start(), g.t_end(), dt)};
}

StageRecord propagate_stage(const MediumParams& medium, const Envelope& control, const SpinWave& initial_spin,
                            const std::optional<Envelope>& input, const StageGrids& grids,
                            const SolverOptions& opts) {
    const SpaceGrid& space = grids.space;
    const TimeGrid& time = grids.time;
    const std::size_t nz = space.size();
    const std::size_t nt = time.size();
    const double dt = time.dt();
    const auto exec = opts.exec;

    const SpinWave s_init = resample(initial_spin, space);
    const kernels::MbCoefficients coeff{std::sqrt(medium.d()), cplx(1.0, medium.delta()), medium.gamma_s_tilde()};

    auto omega_at = [&](double t) { return control.at(t); };
    auto e0_at = [&](double t) { return input ? input->at(t) : cplx{}; };

    // State y = [P ; S].
    std::vector<cplx> y(2 * nz), tmp(2 * nz), k1(2 * nz), k2(2 * nz), k3(2 * nz), k4(2 * nz), e(nz);
    std::copy(s_init.samples().begin(), s_init.samples().end(), y.begin() + static_cast<std::ptrdiff_t>(nz));

    auto P = [nz](std::span<cplx> v) { return v.subspan(0, nz); };
    auto S = [nz](std::span<cplx> v) { return v.subspan(nz, nz); };
    auto cP = [nz](std::span<const cplx> v) { return v.subspan(0, nz); };
    auto cS = [nz](std::span<const cplx> v) { return v.subspan(nz, nz); };

    auto rhs = [&](double t, std::span<const cplx> state, std::span<cplx> out) {
        kernels::integrate_field(space.points(), coeff.sqrt_d, e0_at(t), cP(state), e);
        kernels::mb_derivatives(coeff, omega_at(t), e, cP(state), cS(state), P(out), S(out), exec);
    };

    const std::size_t stride =
        std::max<std::size_t>(1, (time.n_steps() + opts.max_snapshots - 2) / std::max<std::size_t>(1, opts.max_snapshots - 1));

    StageRecord rec{grids,
                    {}, {}, {}, {},
                    resample(control, time).with_kind(EnvelopeKind::control),
                    Envelope::zeros(time),
                    Envelope::zeros(time),
                    s_init,
                    s_init,
                    {}};
    std::vector<cplx> e_in(nt), e_out(nt), ctrl(nt);
    std::vector<double> pol(nt), spin(nt);

    const double initial = excitation(space, cP(y), cS(y));
    double fed = 0.0; // running upper bound on input energy for the stability check

    auto observe = [&](std::size_t i) {
        const double t = time.at(i);
        kernels::integrate_field(space.points(), coeff.sqrt_d, e0_at(t), cP(y), e);
        e_in[i] = e.front();
        e_out[i] = e.back();
        pol[i] = 2.0 * weighted_norm2(space, cP(y));
        spin[i] = 2.0 * coeff.spin_rate * weighted_norm2(space, cS(y));
        if (i % stride == 0 || i + 1 == nt) {
            rec.snapshot_times.push_back(t);
            rec.E.emplace_back(e.begin(), e.end());
            rec.P.emplace_back(cP(y).begin(), cP(y).end());
            rec.S.emplace_back(cS(y).begin(), cS(y).end());
        }
    };

    observe(0);
    for (std::size_t i = 0; i < time.n_steps(); ++i) {
        const double t = time.at(i);
        rhs(t, y, k1);
        kernels::axpy(y, 0.5 * dt, k1, tmp, exec);
        rhs(t + 0.5 * dt, tmp, k2);
        kernels::axpy(y, 0.5 * dt, k2, tmp, exec);
        rhs(t + 0.5 * dt, tmp, k3);
        kernels::axpy(y, dt, k3, tmp, exec);
        rhs(t + dt, tmp, k4);
        kernels::rk4_combine(y, dt, k1, k2, k3, k4, exec);

        const double in_now = std::norm(e0_at(t + dt));
        fed += 0.5 * dt * (std::norm(e0_at(t)) + in_now);
        const double level = excitation(space, cP(y), cS(y));
        const double budget = initial + fed + in_now;
        if (!std::isfinite(level) || (budget > 0.0 && level > opts.instability_factor * budget) ||
            (budget == 0.0 && level > 0.0)) {
            std::ostringstream msg;
            msg << "numerical instability at t = " << t + dt << " with dt = " << dt
                << " (excitation grew beyond " << opts.instability_factor << "x the injected energy)";
            throw NumericalInstability(msg.str(), dt);
        }
        observe(i + 1);
    }

    rec.in_envelope = Envelope(time, e_in);
    rec.out_envelope = Envelope(time, e_out);
    rec.final_spin = SpinWave(space, std::vector<cplx>(cS(y).begin(), cS(y).end()));
    rec.final_polarization.assign(cP(y).begin(), cP(y).end());
    rec.input_energy = rec.in_envelope.energy();
    rec.output_energy = rec.out_envelope.energy();
    rec.polarization_loss = trapezoid(pol, dt);
    rec.spin_decay_loss = trapezoid(spin, dt);
    rec.initial_excitation = initial;
    rec.final_excitation = excitation(space, cP(y), cS(y));
    return rec;
}

double energy_balance(const StageRecord& r) noexcept {
    const double scale = std::max(r.input_energy, r.initial_excitation);
    if (!(scale > 0.0))
        return 0.0;
    const double residual = r.input_energy - r.output_energy - r.polarization_loss - r.spin_decay_loss -
                            (r.final_excitation - r.initial_excitation);
    return std::abs(residual) / scale;
}

StoreResult store(const MediumParams& medium, const Envelope& input, const Envelope& writing_control,
                  const SolverOptions& opts) {
    const StageGrids grids = stage_grids_for(writing_control, opts);
    StageRecord rec = propagate_stage(medium, writing_control, SpinWave::zeros(grids.space), input, grids, opts);
    SpinWave s = rec.final_spin;
    const double leak = rec.output_energy;
    return {std::move(s), leak, std::move(rec)};
}

SpinWave dark_storage(const SpinWave& s, double tau, double gamma_s_tilde) {
    if (!(tau >= 0.0))
        throw InvalidParameter("storage time must be non-negative");
    if (!(gamma_s_tilde >= 0.0))
        throw InvalidParameter("spin decay rate must be non-negative");
    if (tau == 0.0 || gamma_s_tilde == 0.0)
        return s;
    return s.scaled(std::exp(-gamma_s_tilde * tau));
}

StageRecord retrieve_record(const MediumParams& medium, const SpinWave& s, const Envelope& retrieval_control,
                            const SolverOptions& opts) {
    const StageGrids grids = stage_grids_for(retrieval_control, opts);
    return propagate_stage(medium, retrieval_control, s, std::nullopt, grids, opts);
}

Envelope retrieve(const MediumParams& medium, const SpinWave& s, const Envelope& retrieval_control,
                  const SolverOptions& opts) {
    return retrieve_record(medium, s, retrieval_control, opts).out_envelope;
}

} // namespace lmem
