#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "i2p/cloud.hpp"
#include "i2p/rng.hpp"

namespace i2p {

using FeatureMatrix = Eigen::MatrixXd;  // rows = tokens, cols = channels

enum class Activation { Identity, ReLU };

struct MlpParams {
    std::vector<Eigen::MatrixXd> weights;  // in x out per layer
    std::vector<Eigen::VectorXd> biases;
    Activation activation = Activation::ReLU;

    Eigen::Index in_dim() const { return weights.front().rows(); }
    Eigen::Index out_dim() const { return weights.back().cols(); }

    static MlpParams linear(Eigen::MatrixXd w, Eigen::VectorXd b) {
        MlpParams p;
        if (w.cols() != b.size()) throw std::invalid_argument("mlp: bias size must match layer output");
        p.weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
        return p;
    }

    static MlpParams identity(Eigen::Index d) {
        return linear(Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d));
    }

    static MlpParams zero(Eigen::Index in, Eigen::Index out) {
        return linear(Eigen::MatrixXd::Zero(in, out), Eigen::VectorXd::Zero(out));
    }

    // seeded Gaussian layers, zero biases
    static MlpParams gaussian(Rng& rng, const std::vector<Eigen::Index>& dims, double scale) {
        if (dims.size() < 2) throw std::invalid_argument("mlp: need at least one layer");
        MlpParams p;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            Eigen::MatrixXd w(dims[l], dims[l + 1]);
            for (Eigen::Index i = 0; i < w.rows(); ++i)
                for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = scale * rng.normal();
            p.weights.push_back(std::move(w));
            p.biases.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
        }
        return p;
    }
};

// row-wise application; ReLU between layers, none after the last
inline FeatureMatrix mlp_apply(const MlpParams& params, const FeatureMatrix& x) {
    if (x.cols() != params.in_dim()) throw std::invalid_argument("mlp_apply: input channel mismatch");
    FeatureMatrix h = x;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        h = (h * params.weights[l]).rowwise() + params.biases[l].transpose();
        if (l + 1 < params.weights.size() && params.activation == Activation::ReLU) h = h.cwiseMax(0.0);
    }
    return h;
}

struct AttentionParams {
    Eigen::MatrixXd w_q, w_k, w_v;  // d x d

    AttentionParams(Eigen::MatrixXd q, Eigen::MatrixXd k, Eigen::MatrixXd v)
        : w_q(std::move(q)), w_k(std::move(k)), w_v(std::move(v)) {
        const Eigen::Index d = w_q.rows();
        if (w_q.cols() != d || w_k.rows() != d || w_k.cols() != d || w_v.rows() != d || w_v.cols() != d)
            throw std::invalid_argument("attention params: projections must be square and same side");
    }

    static AttentionParams gaussian(Rng& rng, Eigen::Index d, double scale) {
        auto mat = [&] {
            Eigen::MatrixXd m(d, d);
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j) m(i, j) = scale * rng.normal();
            return m;
        };
        return AttentionParams(mat(), mat(), mat());
    }

    // zero value projection: residual attention becomes the identity map
    static AttentionParams pass_through(Eigen::Index d) {
        return AttentionParams(Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d),
                               Eigen::MatrixXd::Zero(d, d));
    }
};

// row-wise softmax with max subtraction
inline Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd w = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
    return (w.array().colwise() / w.rowwise().sum().array()).matrix();
}

// the gamma/phi/psi/alpha/theta bundle of the vector-attention kernels
struct VectorAttentionParams {
    MlpParams gamma;  // logit mlp, d_p -> d_p
    MlpParams phi;    // query projection, d_f -> d_p
    MlpParams psi;    // key projection, d_f -> d_p
    MlpParams alpha;  // value projection, d_f -> d_p
    MlpParams theta;  // position embedding, 3 -> d_p

    // uniform weights, values passed through: the aggregate is the per-group mean
    static VectorAttentionParams pass_through(Eigen::Index d) {
        VectorAttentionParams p{MlpParams::zero(d, d), MlpParams::identity(d), MlpParams::identity(d),
                                MlpParams::identity(d), MlpParams::zero(3, d)};
        return p;
    }

    static VectorAttentionParams gaussian(Rng& rng, Eigen::Index d_f, Eigen::Index d_p, double scale) {
        VectorAttentionParams p{MlpParams::gaussian(rng, {d_p, d_p, d_p}, scale),
                                MlpParams::gaussian(rng, {d_f, d_p}, scale),
                                MlpParams::gaussian(rng, {d_f, d_p}, scale),
                                MlpParams::gaussian(rng, {d_f, d_p}, scale),
                                MlpParams::gaussian(rng, {3, d_p, d_p}, scale)};
        return p;
    }
};

namespace detail {

// channel-wise softmax over a group block (rows = members), max subtracted per channel
inline Eigen::MatrixXd group_softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd w = (logits.rowwise() - logits.colwise().maxCoeff()).array().exp().matrix();
    return (w.array().rowwise() / w.colwise().sum().array()).matrix();
}

// shared vector-attention body: one output row per group
// rows of `member_*` cover all groups; `group_of[i]` maps a member row to its group
inline FeatureMatrix vector_attention_pool(const std::vector<std::vector<Eigen::Index>>& groups,
                                           const FeatureMatrix& query_proj,   // n_groups x d_p (phi output)
                                           const FeatureMatrix& key_proj,     // members x d_p (psi output)
                                           const FeatureMatrix& value_proj,   // members x d_p (alpha output)
                                           const FeatureMatrix& pos_embed,    // members x d_p (theta output)
                                           const MlpParams& gamma) {
    const Eigen::Index d = query_proj.cols();
    FeatureMatrix out(static_cast<Eigen::Index>(groups.size()), d);
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const auto& members = groups[j];
        const Eigen::Index g = static_cast<Eigen::Index>(members.size());
        Eigen::MatrixXd pre(g, d), values(g, d);
        for (Eigen::Index r = 0; r < g; ++r) {
            pre.row(r) = query_proj.row(static_cast<Eigen::Index>(j)) - key_proj.row(members[r]) +
                         pos_embed.row(members[r]);
            values.row(r) = value_proj.row(members[r]) + pos_embed.row(members[r]);
        }
        const Eigen::MatrixXd weights = group_softmax(mlp_apply(gamma, pre));
        out.row(static_cast<Eigen::Index>(j)) = weights.cwiseProduct(values).colwise().sum();
    }
    return out;
}

}  // namespace detail

// point proxies from grouped per-point features (vector attention pooling)
inline FeatureMatrix attentive_aggregate(const ProxyDecomposition& decomp, const Points3& center_coords,
                                         const Points3& point_coords, const FeatureMatrix& center_feats,
                                         const FeatureMatrix& point_feats, const VectorAttentionParams& params) {
    const Eigen::Index n = point_coords.rows();
    if (static_cast<Eigen::Index>(decomp.assignment.size()) != n)
        throw std::invalid_argument("attentive_aggregate: decomposition inconsistent with points");
    if (center_feats.rows() != center_coords.rows() || point_feats.rows() != n)
        throw std::invalid_argument("attentive_aggregate: feature rows mismatch");

    const FeatureMatrix query_proj = mlp_apply(params.phi, center_feats);
    const FeatureMatrix key_proj = mlp_apply(params.psi, point_feats);
    const FeatureMatrix value_proj = mlp_apply(params.alpha, point_feats);

    Eigen::MatrixXd rel(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
        rel.row(i) = center_coords.row(decomp.assignment[i]) - point_coords.row(i);
    const FeatureMatrix pos_embed = mlp_apply(params.theta, rel);

    return detail::vector_attention_pool(decomp.groups(), query_proj, key_proj, value_proj, pos_embed,
                                         params.gamma);
}

// residual scalar dot-product attention; self-attention is x_kv == x_q
inline FeatureMatrix scalar_attention(const AttentionParams& params, const FeatureMatrix& x_q,
                                      const FeatureMatrix& x_kv) {
    const Eigen::Index d = params.w_q.rows();
    if (x_q.cols() != d || x_kv.cols() != d) throw std::invalid_argument("scalar_attention: channel mismatch");
    const Eigen::MatrixXd logits = (x_q * params.w_q) * (x_kv * params.w_k).transpose() / std::sqrt(double(d));
    return x_q + row_softmax(logits) * (x_kv * params.w_v);
}

// embedding of one (possibly fractional) position; channels must be even
inline Eigen::RowVectorXd sinusoidal_embedding(double position, Eigen::Index channels) {
    if (channels <= 0 || channels % 2 != 0) throw std::invalid_argument("sinusoidal embedding: channels must be even");
    Eigen::RowVectorXd row(channels);
    for (Eigen::Index i = 0; i < channels / 2; ++i) {
        const double freq = std::pow(10000.0, 2.0 * double(i) / double(channels));
        row(2 * i) = std::sin(position / freq);
        row(2 * i + 1) = std::cos(position / freq);
    }
    return row;
}

inline FeatureMatrix sinusoidal_pe(Eigen::Index count, Eigen::Index channels) {
    FeatureMatrix pe(count, channels);
    for (Eigen::Index p = 0; p < count; ++p) pe.row(p) = sinusoidal_embedding(double(p), channels);
    return pe;
}

// one point-transformer layer: residual vector attention over the k nearest
// centers (self included, distance ties by lowest index)
inline FeatureMatrix point_transformer_layer(const Points3& center_coords, const FeatureMatrix& feats,
                                             Eigen::Index k, const VectorAttentionParams& params) {
    const Eigen::Index n = center_coords.rows();
    if (k < 1 || k > n) throw std::invalid_argument("point_transformer_layer: k must be in [1, N_q]");
    if (feats.rows() != n) throw std::invalid_argument("point_transformer_layer: feature rows mismatch");

    // explicit neighbor lists; member row t*k+r is neighbor r of center t
    std::vector<std::vector<Eigen::Index>> neighborhoods(n);
    Eigen::MatrixXd rel(n * k, 3);
    std::vector<Eigen::Index> member_src(n * k);
    std::vector<std::pair<double, Eigen::Index>> dist(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i)
            dist[i] = {(center_coords.row(i) - center_coords.row(j)).squaredNorm(), i};
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        neighborhoods[j].resize(k);
        for (Eigen::Index r = 0; r < k; ++r) {
            neighborhoods[j][r] = j * k + r;
            member_src[j * k + r] = dist[r].second;
            rel.row(j * k + r) = center_coords.row(j) - center_coords.row(dist[r].second);
        }
    }

    const FeatureMatrix query_proj = mlp_apply(params.phi, feats);
    const FeatureMatrix key_all = mlp_apply(params.psi, feats);
    const FeatureMatrix value_all = mlp_apply(params.alpha, feats);
    FeatureMatrix key_proj(n * k, key_all.cols()), value_proj(n * k, value_all.cols());
    for (Eigen::Index r = 0; r < n * k; ++r) {
        key_proj.row(r) = key_all.row(member_src[r]);
        value_proj.row(r) = value_all.row(member_src[r]);
    }
    const FeatureMatrix pos_embed = mlp_apply(params.theta, rel);

    return feats + detail::vector_attention_pool(neighborhoods, query_proj, key_proj, value_proj, pos_embed,
                                                 params.gamma);
}

// cross attention with binary sampling masks; masked rows are zeroed before
// use (they keep softmax mass exp(0), as defined), never set to -inf
inline FeatureMatrix masked_cross_attention(const AttentionParams& params, const FeatureMatrix& f_i,
                                            const FeatureMatrix& f_p, const Eigen::VectorXd& mask_i,
                                            const Eigen::VectorXd& mask_p) {
    const Eigen::Index d = params.w_q.rows();
    if (f_i.cols() != d || f_p.cols() != d) throw std::invalid_argument("masked_cross_attention: channel mismatch");
    if (mask_i.size() != f_i.rows() || mask_p.size() != f_p.rows())
        throw std::invalid_argument("masked_cross_attention: mask length mismatch");
    auto binary = [](const Eigen::VectorXd& m) {
        return ((m.array() == 0.0) || (m.array() == 1.0)).all();
    };
    if (!binary(mask_i) || !binary(mask_p)) throw std::invalid_argument("masked_cross_attention: masks must be binary");

    const Eigen::MatrixXd q = ((f_i * params.w_q).array().colwise() * mask_i.array()).matrix();
    const Eigen::MatrixXd kmat = ((f_p * params.w_k).array().colwise() * mask_p.array()).matrix();
    const Eigen::MatrixXd v = ((f_p * params.w_v).array().colwise() * mask_p.array()).matrix();
    const Eigen::MatrixXd w_a = row_softmax(q * kmat.transpose() / std::sqrt(double(d)));
    return f_i + w_a * v;
}

// central differences (f(x+eps e_i) - f(x-eps e_i)) / 2eps
inline Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                                  const Eigen::VectorXd& x, double eps) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + eps;
        const double hi = f(probe);
        probe(i) = x(i) - eps;
        const double lo = f(probe);
        probe(i) = x(i);
        if (!std::isfinite(hi) || !std::isfinite(lo))
            throw std::domain_error("finite_difference_gradient: non-finite evaluation");
        g(i) = (hi - lo) / (2.0 * eps);
    }
    return g;
}

}  // namespace i2p
