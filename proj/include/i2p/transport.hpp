#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "i2p/attention.hpp"

namespace i2p {

struct ScoreMatrix {
    Eigen::MatrixXd values;
    bool has_slack = false;

    // non-slack extent
    Eigen::Index rows() const { return has_slack ? values.rows() - 1 : values.rows(); }
    Eigen::Index cols() const { return has_slack ? values.cols() - 1 : values.cols(); }
};

// D = F_rows F_cols^T / sqrt(scale_dim), optionally masked by the outer
// product of binary row/col masks (exact zeros at masked positions)
inline ScoreMatrix pairwise_scores(const FeatureMatrix& f_rows, const FeatureMatrix& f_cols,
                                   Eigen::Index scale_dim,
                                   const std::optional<Eigen::VectorXd>& row_mask = std::nullopt,
                                   const std::optional<Eigen::VectorXd>& col_mask = std::nullopt) {
    if (f_rows.cols() != f_cols.cols()) throw std::invalid_argument("pairwise_scores: channel mismatch");
    if (scale_dim <= 0) throw std::invalid_argument("pairwise_scores: scale_dim must be positive");
    ScoreMatrix s;
    s.values = f_rows * f_cols.transpose() / std::sqrt(double(scale_dim));
    if (row_mask) {
        if (row_mask->size() != s.values.rows()) throw std::invalid_argument("pairwise_scores: row mask length");
        s.values = (s.values.array().colwise() * row_mask->array()).matrix();
    }
    if (col_mask) {
        if (col_mask->size() != s.values.cols()) throw std::invalid_argument("pairwise_scores: col mask length");
        s.values = (s.values.array().rowwise() * col_mask->transpose().array()).matrix();
    }
    return s;
}

// append one slack row and column, all entries slack_value
inline ScoreMatrix add_slack(const ScoreMatrix& d, double slack_value) {
    if (d.has_slack) throw std::invalid_argument("add_slack: already slacked");
    ScoreMatrix out;
    out.has_slack = true;
    out.values.setConstant(d.values.rows() + 1, d.values.cols() + 1, slack_value);
    out.values.topLeftCorner(d.values.rows(), d.values.cols()) = d.values;
    return out;
}

namespace detail {

// target log-marginals: unit mass per non-slack row/column, the slack row
// absorbs up to C and the slack column up to R
inline void slack_log_marginals(Eigen::Index r, Eigen::Index c, Eigen::VectorXd& log_r, Eigen::VectorXd& log_c) {
    log_r = Eigen::VectorXd::Zero(r + 1);
    log_c = Eigen::VectorXd::Zero(c + 1);
    log_r(r) = std::log(double(c));
    log_c(c) = std::log(double(r));
}

inline Eigen::VectorXd lse_rows(const Eigen::MatrixXd& m) {
    const Eigen::VectorXd mx = m.rowwise().maxCoeff();
    return (mx.array() + (m.colwise() - mx).array().exp().rowwise().sum().log()).matrix();
}

inline Eigen::VectorXd lse_cols(const Eigen::MatrixXd& m) {
    const Eigen::RowVectorXd mx = m.colwise().maxCoeff();
    return ((m.rowwise() - mx).array().exp().colwise().sum().log() + mx.array()).matrix().transpose();
}

struct SinkhornPotentials {
    Eigen::VectorXd u, v;                     // final log-potentials
    std::vector<Eigen::VectorXd> u_hist;      // u after each iteration, 1..T
    std::vector<Eigen::VectorXd> v_hist;      // v before each iteration, 0..T-1
};

inline SinkhornPotentials sinkhorn_log_potentials(const Eigen::MatrixXd& d, Eigen::Index iterations,
                                                  bool keep_history) {
    const Eigen::Index r = d.rows() - 1, c = d.cols() - 1;
    Eigen::VectorXd log_r, log_c;
    slack_log_marginals(r, c, log_r, log_c);

    SinkhornPotentials p;
    p.u = Eigen::VectorXd::Zero(r + 1);
    p.v = Eigen::VectorXd::Zero(c + 1);
    for (Eigen::Index t = 0; t < iterations; ++t) {
        if (keep_history) p.v_hist.push_back(p.v);
        p.u = log_r - lse_rows(d.rowwise() + p.v.transpose());
        if (keep_history) p.u_hist.push_back(p.u);
        p.v = log_c - lse_cols(d.colwise() + p.u);
    }
    return p;
}

}  // namespace detail

// log-domain Sinkhorn over an augmented score matrix; the returned plan is
// strictly positive and keeps the slack row/column
inline ScoreMatrix sinkhorn(const ScoreMatrix& d_aug, Eigen::Index iterations = 100) {
    if (!d_aug.has_slack) throw std::invalid_argument("sinkhorn: expects a slack-augmented matrix");
    if (iterations < 1) throw std::invalid_argument("sinkhorn: iterations must be >= 1");
    if (!d_aug.values.allFinite()) throw std::invalid_argument("sinkhorn: non-finite input");

    const auto p = detail::sinkhorn_log_potentials(d_aug.values, iterations, false);
    ScoreMatrix plan;
    plan.has_slack = true;
    plan.values = ((d_aug.values.colwise() + p.u).rowwise() + p.v.transpose()).array().exp().matrix();
    return plan;
}

// remove the slack row/column and zero entries below tau_c
inline ScoreMatrix strip_slack_and_threshold(const ScoreMatrix& plan, double tau_c) {
    if (!plan.has_slack) throw std::invalid_argument("strip_slack_and_threshold: no slack to strip");
    ScoreMatrix out;
    out.has_slack = false;
    out.values = plan.values.topLeftCorner(plan.values.rows() - 1, plan.values.cols() - 1);
    for (Eigen::Index i = 0; i < out.values.rows(); ++i)
        for (Eigen::Index j = 0; j < out.values.cols(); ++j)
            if (out.values(i, j) < tau_c) out.values(i, j) = 0.0;
    return out;
}

// reverse-mode gradient through the unrolled Sinkhorn iterations: given
// dL/dlog(plan) over the augmented plan, returns dL/dD over the augmented
// pre-transport scores (log plan = D + u (+) v, so the chain runs through
// the potentials only)
inline Eigen::MatrixXd sinkhorn_log_plan_vjp(const ScoreMatrix& d_aug, Eigen::Index iterations,
                                             const Eigen::MatrixXd& grad_log_plan) {
    if (!d_aug.has_slack) throw std::invalid_argument("sinkhorn_log_plan_vjp: expects slack");
    if (grad_log_plan.rows() != d_aug.values.rows() || grad_log_plan.cols() != d_aug.values.cols())
        throw std::invalid_argument("sinkhorn_log_plan_vjp: gradient shape mismatch");
    const Eigen::MatrixXd& d = d_aug.values;

    const auto p = detail::sinkhorn_log_potentials(d, iterations, true);

    Eigen::MatrixXd grad_d = grad_log_plan;
    Eigen::VectorXd gu = grad_log_plan.rowwise().sum();
    Eigen::VectorXd gv = grad_log_plan.colwise().sum().transpose();

    for (Eigen::Index t = iterations - 1; t >= 0; --t) {
        // v(t) = log_c - lse_cols(D + u(t)); column-stochastic weights
        {
            Eigen::MatrixXd logits = d.colwise() + p.u_hist[t];
            Eigen::MatrixXd b =
                (logits.rowwise() - logits.colwise().maxCoeff()).array().exp().matrix();
            b = b.array().rowwise() / b.colwise().sum().array();
            grad_d.noalias() -= b * gv.asDiagonal();
            gu.noalias() -= b * gv;
        }
        // u(t) = log_r - lse_rows(D + v(t-1)); row-stochastic weights
        {
            Eigen::MatrixXd logits = d.rowwise() + p.v_hist[t].transpose();
            const Eigen::MatrixXd a = row_softmax(logits);
            grad_d.noalias() -= gu.asDiagonal() * a;
            gv.noalias() = -(a.transpose() * gu);
        }
        gu.setZero();
    }
    return grad_d;
}

}  // namespace i2p
