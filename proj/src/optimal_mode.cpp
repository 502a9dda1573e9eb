#include "lambda_memory/optimal_mode.hpp"

#include "lambda_memory/errors.hpp"
#include "lambda_memory/pulses.hpp"
#include "lambda_memory/shaping.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmem {

SpinWave canonical_mode(const SpinWave& s) {
    const SpinWave n = s.normalized();
    std::size_t best = 0;
    for (std::size_t k = 1; k < n.size(); ++k)
        if (std::abs(n[k]) > std::abs(n[best]))
            best = k;
    return n.scaled(std::conj(n[best]) / std::abs(n[best]));
}

double reference_control_amplitude(double d, double write_window) {
    if (!(d > 0.0) || !(write_window > 0.0))
        throw InvalidParameter("reference control needs d > 0 and a positive window");
    return std::sqrt(2.0 * d / write_window);
}

OptimalModeResult optimal_mode(const MediumParams& medium, const std::optional<Envelope>& seed,
                               const IterationOptions& opts) {
    if (!(medium.d() > 0.0))
        throw InvalidParameter("optimal mode requires a non-zero optical depth");
    if (!(opts.write_window > 0.0) || !(opts.read_window > 0.0))
        throw InvalidParameter("iteration windows must be positive");
    const MediumParams m = medium.with_gamma_s(0.0);
    const double amp = reference_control_amplitude(m.d(), opts.write_window);

    const TimeGrid in_grid = TimeGrid::with_max_step(-opts.write_window, 0.0, opts.envelope_dt);
    const TimeGrid out_grid = TimeGrid::with_max_step(0.0, opts.read_window, opts.envelope_dt);
    const Envelope write_ctrl(in_grid, std::vector<cplx>(in_grid.size(), amp), EnvelopeKind::control);
    const Envelope read_ctrl(out_grid, std::vector<cplx>(out_grid.size(), amp), EnvelopeKind::control);

    Envelope input = seed ? resample(*seed, in_grid).normalized()
                          : make_gaussian(-0.5 * opts.write_window, opts.write_window / 8.0, in_grid);

    std::vector<double> history;
    for (std::size_t k = 0; k < opts.max_iter; ++k) {
        const StoreResult st = store(m, input, write_ctrl, opts.solver);
        const Envelope out = retrieve(m, st.spin, read_ctrl, opts.solver);
        const double eta = out.energy() / input.energy();
        history.push_back(eta);
        if (k > 0 && std::abs(eta - history[k - 1]) < opts.tol)
            return {canonical_mode(st.spin), eta, k + 1, std::move(history)};
        if (!(out.energy() > 0.0))
            throw NumericalError("retrieved output vanished during the optimal-mode iteration");
        input = resample(conjugated(time_reverse(out, 0.0)), in_grid).normalized();
    }
    std::ostringstream msg;
    msg << "optimal-mode iteration did not converge to " << opts.tol << " in " << opts.max_iter << " iterations";
    throw ConvergenceFailure(msg.str(), std::move(history));
}

OptimalModeResult kernel_oracle(const MediumParams& medium, std::size_t n_z, const OracleOptions& opts) {
    const SpaceGrid grid(n_z);
    const double d = medium.d();
    if (d == 0.0) {
        const SpinWave flat(grid, std::vector<cplx>(n_z, cplx{1.0}));
        return {flat.normalized(), 0.0, 0, {0.0}};
    }
    const double u_max = opts.u_max.value_or(std::max(30.0, 3.0 * d));
    const auto n_u = static_cast<std::size_t>(std::ceil(u_max / opts.du - 1e-9));
    const double du = u_max / static_cast<double>(n_u);
    const std::size_t n_nodes = n_u + 1;
    const kernels::ControlFreeSystem sys(d, grid);

    // Retrieval: one nodal spin wave per column.
    std::vector<std::vector<cplx>> spins(n_z, std::vector<cplx>(n_z));
    for (std::size_t k = 0; k < n_z; ++k)
        spins[k][k] = 1.0;
    const auto retrieval = kernels::propagate_control_free_batch(sys, spins, {}, du, n_u, opts.exec);

    // Storage: one temporal hat input per column, empty medium.
    std::vector<std::vector<cplx>> empty(n_nodes, std::vector<cplx>(n_z));
    std::vector<std::vector<cplx>> hats(n_nodes, std::vector<cplx>(n_nodes));
    for (std::size_t j = 0; j < n_nodes; ++j)
        hats[j][j] = 1.0;
    const auto storage = kernels::propagate_control_free_batch(sys, empty, hats, du, n_u, opts.exec);

    Eigen::VectorXd sqrt_wu = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_nodes), std::sqrt(du));
    sqrt_wu(0) = sqrt_wu(static_cast<Eigen::Index>(n_u)) = std::sqrt(0.5 * du);

    // X = W_u^{1/2} R  (n_u x n_z),  Y = Sto W_u^{-1/2}  (n_z x n_u).
    Eigen::MatrixXcd X(n_nodes, n_z), Y(n_z, n_nodes);
    for (std::size_t k = 0; k < n_z; ++k)
        for (std::size_t i = 0; i < n_nodes; ++i)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = sqrt_wu(static_cast<Eigen::Index>(i)) * retrieval[k].output[i];
    for (std::size_t j = 0; j < n_nodes; ++j)
        for (std::size_t k = 0; k < n_z; ++k)
            Y(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = storage[j].final_spin[k] / sqrt_wu(static_cast<Eigen::Index>(j));

    // Leading singular triplet of X Y through the small factor R_x Y.
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(X);
    const Eigen::MatrixXcd rx = qr.matrixQR().topRows(static_cast<Eigen::Index>(n_z)).triangularView<Eigen::Upper>();
    const Eigen::MatrixXcd B = rx * Y;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(B, Eigen::ComputeThinV);
    const double sigma = svd.singularValues()(0);
    const Eigen::VectorXcd stored = Y * svd.matrixV().col(0);

    SpinWave mode(grid, std::vector<cplx>(stored.data(), stored.data() + stored.size()));
    return {canonical_mode(mode), sigma * sigma, 0, {sigma * sigma}};
}

} // namespace lmem
