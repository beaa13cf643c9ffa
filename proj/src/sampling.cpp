#include "uqtraj/sampling.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace uqtraj {

Eigen::VectorXd sample_multivariate_normal(const Eigen::VectorXd& mean,
                                           const Eigen::MatrixXd& cov, Rng& rng) {
    const auto n = mean.size();
    if (cov.rows() != n || cov.cols() != n)
        throw InvalidArgument("sample_multivariate_normal: shape mismatch");
    if (!cov.allFinite()) throw InvalidCovariance("sample_multivariate_normal: non-finite covariance");

    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = gauss(rng);

    if (cov.isZero(0.0)) return mean;

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return mean + llt.matrixL() * z;

    // semidefinite fallback: eigen factor with clamped spectrum
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-8 * std::max(1.0, ev.cwiseAbs().maxCoeff()))
        throw InvalidCovariance("sample_multivariate_normal: covariance indefinite");
    Eigen::VectorXd sqrt_ev = ev.cwiseMax(0.0).cwiseSqrt();
    return mean + es.eigenvectors() * sqrt_ev.asDiagonal() * z;
}

namespace {

Eigen::Matrix4d sqrtm_psd(const Eigen::Matrix4d& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

// pseudo-inverse square root; directions with (near-)zero spread are dropped
Eigen::Matrix4d inv_sqrtm_psd(const Eigen::Matrix4d& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
    const double tol = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::Vector4d inv;
    for (int i = 0; i < 4; ++i) {
        const double ev = es.eigenvalues()(i);
        inv(i) = ev > tol ? 1.0 / std::sqrt(ev) : 0.0;
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::vector<Trajectory> sample_trajectories(const KfPosterior& post, const CtsConfig& cfg) {
    if (post.size() == 0) throw InvalidArgument("sample_trajectories: empty posterior");
    if (cfg.m < 1 || cfg.lambda < 0.0 || cfg.lambda >= 1.0)
        throw InvalidArgument("sample_trajectories: bad CtsConfig");

    KfConfig fcfg;
    fcfg.dt = cfg.dt;
    const Eigen::Matrix4d f = fcfg.transition();
    const double lam = cfg.lambda;
    const double step_var = 1.0 - lam * lam;

    // Deviation recursion: d_k = lambda * T_k * F * d_{k-1} + eps_k with
    // T_k = sqrt(P_k) * pinv(sqrt(F P_{k-1} F')) and eps_k ~ N(0, (1-l^2) P_k).
    // The whitening keeps every marginal at exactly N(0, P_k) — the sample
    // tracks the posterior at each step — while the dynamics-propagated
    // deviation carries lambda-persistence between steps. Without it, a
    // velocity deviation drawn from the uninformative initial prior would be
    // integrated into positions far outside the posterior.
    std::vector<Eigen::Matrix4d> transfer(post.size(), Eigen::Matrix4d::Identity());
    std::vector<Eigen::Matrix4d> covs(post.size());
    for (std::size_t k = 0; k < post.size(); ++k) {
        covs[k] = psd_clamp(post.covs[k], 0.0).m;
        if (k > 0)
            transfer[k] =
                sqrtm_psd(covs[k]) * inv_sqrtm_psd(f * covs[k - 1] * f.transpose()) * f;
    }

    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(cfg.m));

    for (int i = 0; i < cfg.m; ++i) {
        Rng rng(substream_seed(cfg.rng_seed, static_cast<std::uint64_t>(i)));
        Trajectory traj;
        traj.states.reserve(post.size());
        traj.covs = std::vector<Cov2>();
        traj.covs->reserve(post.size());

        Eigen::Vector4d dev;
        {
            Eigen::Vector4d x0 =
                sample_multivariate_normal(post.states[0].vec(), covs[0], rng);
            dev = x0 - post.states[0].vec();
        }
        for (std::size_t k = 0; k < post.size(); ++k) {
            if (k > 0) {
                Eigen::Vector4d eps = sample_multivariate_normal(
                    Eigen::Vector4d::Zero(), step_var * covs[k], rng);
                dev = lam * (transfer[k] * dev) + eps;
            }
            const TrackState& mu = post.states[k];
            // positions are sampled; velocities carried from the posterior mean
            traj.states.push_back({mu.x + dev(0), mu.y + dev(1), mu.u, mu.v, mu.t});
            traj.covs->push_back(post.covs[k].posBlock());
        }
        out.push_back(std::move(traj));
    }
    return out;
}

}  // namespace uqtraj
