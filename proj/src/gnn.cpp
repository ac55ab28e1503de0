// Copyright 2026 The graphcondense Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "graphcondense/gnn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "graphcondense/io.hpp"

namespace graphcondense::gnn {

std::string to_string(ArchKind kind) {
    switch (kind) {
        case ArchKind::GCN: return "GCN";
        case ArchKind::SGC: return "SGC";
        case ArchKind::MLP: return "MLP";
    }
    return "?";
}

ArchKind parse_arch(const std::string &name) {
    std::string up = name;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "GCN") { return ArchKind::GCN; }
    if (up == "SGC") { return ArchKind::SGC; }
    if (up == "MLP") { return ArchKind::MLP; }
    throw ConfigError("unknown architecture '" + name + "' (expected GCN, SGC or MLP)");
}

std::string to_string(Optimizer opt) { return opt == Optimizer::Adam ? "adam" : "gd"; }

Optimizer parse_optimizer(const std::string &name) {
    if (name == "adam") { return Optimizer::Adam; }
    if (name == "gd" || name == "plain-gd" || name == "sgd") { return Optimizer::GradientDescent; }
    throw ConfigError("unknown optimizer '" + name + "' (expected adam or gd)");
}

int GnnArch::input_hops() const {
    switch (kind) {
        case ArchKind::GCN: return 1;
        case ArchKind::SGC: return std::max(0, sgc_depth - 1);
        case ArchKind::MLP: return 0;
    }
    return 0;
}

WeightMap first_weight(const GnnArch &arch, const ParamVector &params) {
    return {params.data(), static_cast<Eigen::Index>(arch.input_dim), static_cast<Eigen::Index>(arch.hidden)};
}

WeightMap second_weight(const GnnArch &arch, const ParamVector &params) {
    return {params.data() + arch.input_dim * arch.hidden, static_cast<Eigen::Index>(arch.hidden),
            static_cast<Eigen::Index>(arch.num_classes)};
}

ParamVector flatten(const Matrix &w1, const Matrix &w2) {
    ParamVector v(w1.size() + w2.size());
    std::copy(w1.data(), w1.data() + w1.size(), v.data());
    std::copy(w2.data(), w2.data() + w2.size(), v.data() + w1.size());
    return v;
}

Matrix Topology::apply(const Matrix &x, int hops) const {
    if (is_identity() || hops == 0) { return x; }
    return graph::propagate(*adj, x, hops);
}

PreparedInput prepare_input(const GnnArch &arch, Topology topology, const Matrix &features) {
    if (static_cast<std::size_t>(features.cols()) != arch.input_dim) {
        throw std::invalid_argument("feature width " + std::to_string(features.cols()) + " != arch input " +
                                    std::to_string(arch.input_dim));
    }
    if (!topology.is_identity() && topology.adj->size() != static_cast<std::size_t>(features.rows())) {
        throw std::invalid_argument("adjacency size does not match feature rows");
    }
    return {topology, topology.apply(features, arch.input_hops())};
}

namespace {

void check_params(const GnnArch &arch, const ParamVector &params) {
    if (static_cast<std::size_t>(params.size()) != arch.param_count()) {
        throw std::invalid_argument("parameter vector has " + std::to_string(params.size()) + " entries, arch needs " +
                                    std::to_string(arch.param_count()));
    }
}

struct Activations {
    Matrix pre;        // input · W1
    Matrix hidden;     // act(pre)
    Matrix mixed;      // hidden after output-side propagation
    Matrix logits;     // mixed · W2
};

Activations run_forward(const GnnArch &arch, const PreparedInput &in, const ParamVector &params) {
    check_params(arch, params);
    Activations a;
    a.pre = in.input * first_weight(arch, params);
    a.hidden = arch.uses_relu() ? Matrix(a.pre.cwiseMax(0.0)) : a.pre;
    a.mixed = in.topology.apply(a.hidden, arch.output_hops());
    a.logits = a.mixed * second_weight(arch, params);
    return a;
}

}  // namespace

Matrix forward(const GnnArch &arch, const PreparedInput &in, const ParamVector &params) {
    return run_forward(arch, in, params).logits;
}

Matrix forward(const GnnArch &arch, Topology topology, const Matrix &features, const ParamVector &params) {
    return forward(arch, prepare_input(arch, topology, features), params);
}

Matrix softmax_rows(const Matrix &logits) {
    Matrix p(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double m = logits.row(r).maxCoeff();
        p.row(r) = (logits.row(r).array() - m).exp();
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

LossGrad loss_and_grad(const GnnArch &arch, const PreparedInput &in, std::span<const ClassId> labels,
                       std::span<const NodeId> mask, const ParamVector &params, double weight_decay) {
    if (mask.empty()) { throw std::invalid_argument("loss_and_grad: empty mask"); }
    if (labels.size() != in.rows()) { throw std::invalid_argument("loss_and_grad: label count != rows"); }
    Activations a = run_forward(arch, in, params);

    const double inv_n = 1.0 / static_cast<double>(mask.size());
    Matrix dlogits = Matrix::Zero(a.logits.rows(), a.logits.cols());
    double loss = 0.0;
    for (NodeId i : mask) {
        const auto row = a.logits.row(i);
        const double m = row.maxCoeff();
        const double lse = m + std::log((row.array() - m).exp().sum());
        loss += lse - row(labels[i]);
        dlogits.row(i) += (row.array() - lse).exp().matrix() * inv_n;
        dlogits(i, labels[i]) -= inv_n;
    }
    loss *= inv_n;

    const Matrix dw2 = a.mixed.transpose() * dlogits;
    const Matrix dmixed = dlogits * second_weight(arch, params).transpose();
    // Â is symmetric, so its transpose is itself.
    Matrix dpre = in.topology.apply(dmixed, arch.output_hops());
    if (arch.uses_relu()) { dpre = dpre.cwiseProduct((a.pre.array() > 0.0).cast<double>().matrix()); }
    const Matrix dw1 = in.input.transpose() * dpre;

    LossGrad out;
    out.grad = flatten(dw1, dw2);
    if (weight_decay > 0.0) {
        loss += 0.5 * weight_decay * params.squaredNorm();
        out.grad += weight_decay * params;
    }
    out.loss = loss;
    out.logits = std::move(a.logits);
    return out;
}

double accuracy(const Matrix &logits, std::span<const ClassId> labels, std::span<const NodeId> idx) {
    if (idx.empty()) { throw std::invalid_argument("accuracy: empty index set"); }
    std::size_t correct = 0;
    for (NodeId i : idx) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < logits.cols(); ++c) {
            if (logits(i, c) > logits(i, best)) { best = c; }
        }
        if (static_cast<ClassId>(best) == labels[i]) { ++correct; }
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

void TrainConfig::validate() const {
    if (!(step_size >= 0.0)) { throw ConfigError("step size must be non-negative"); }
    if (epochs < 0) { throw ConfigError("epochs must be >= 0"); }
    if (weight_decay < 0.0) { throw ConfigError("weight decay must be >= 0"); }
}

ParamVector init_params(const GnnArch &arch, std::uint64_t seed, double init_scale) {
    Rng rng(seed);
    auto glorot = [&](std::size_t fan_in, std::size_t fan_out) {
        const double s = init_scale * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-s, s);
        Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
        for (Eigen::Index k = 0; k < w.size(); ++k) { w.data()[k] = dist(rng); }
        return w;
    };
    const Matrix w1 = glorot(arch.input_dim, arch.hidden);
    const Matrix w2 = glorot(arch.hidden, arch.num_classes);
    return flatten(w1, w2);
}

TrainResult train(const GnnArch &arch, const TrainTask &task, const TrainConfig &cfg,
                  const std::optional<ParamVector> &initial, const EpochCallback &on_epoch) {
    cfg.validate();
    if (task.input == nullptr) { throw std::invalid_argument("train: missing input"); }
    const PreparedInput &eval_in = task.eval_input != nullptr ? *task.eval_input : *task.input;
    const bool same_eval = task.eval_input == nullptr || task.eval_input == task.input;
    std::span<const ClassId> eval_labels = task.eval_labels.empty() ? task.labels : task.eval_labels;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    ParamVector params = initial ? *initial : init_params(arch, cfg.seed, cfg.init_scale);
    check_params(arch, params);

    TrainResult res;
    res.best_val_acc = -1.0;
    res.test_acc_at_best = nan;
    Vector m1 = Vector::Zero(params.size());
    Vector m2 = Vector::Zero(params.size());
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;

    for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
        if (on_epoch) { on_epoch(epoch, params); }
        LossGrad lg = loss_and_grad(arch, *task.input, task.labels, task.mask, params, cfg.weight_decay);
        if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
            throw NumericalError("train", "non-finite loss at epoch " + std::to_string(epoch));
        }
        EpochLog row{epoch, lg.loss, accuracy(lg.logits, task.labels, task.mask), nan};
        if (!task.val_idx.empty()) {
            const Matrix eval_logits = same_eval ? Matrix() : forward(arch, eval_in, params);
            const Matrix &logits = same_eval ? lg.logits : eval_logits;
            row.val_acc = accuracy(logits, eval_labels, task.val_idx);
            if (row.val_acc > res.best_val_acc) {
                res.best_val_acc = row.val_acc;
                res.best_epoch = epoch;
                res.best_params = params;
                if (!task.test_idx.empty()) { res.test_acc_at_best = accuracy(logits, eval_labels, task.test_idx); }
            }
        }
        res.log.push_back(row);
        if (epoch == cfg.epochs) { break; }

        if (cfg.optimizer == Optimizer::GradientDescent) {
            params -= cfg.step_size * lg.grad;
        } else {
            const int t = epoch + 1;
            m1 = beta1 * m1 + (1.0 - beta1) * lg.grad;
            m2 = beta2 * m2 + (1.0 - beta2) * lg.grad.cwiseProduct(lg.grad);
            const double c1 = 1.0 - std::pow(beta1, t);
            const double c2 = 1.0 - std::pow(beta2, t);
            params.array() -= cfg.step_size * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
        }
    }
    res.final_params = params;
    if (task.val_idx.empty()) {
        res.best_params = params;
        res.best_epoch = cfg.epochs;
        res.best_val_acc = nan;
    }
    return res;
}

std::string format_train_log(std::span<const EpochLog> log) {
    std::ostringstream out;
    out << "epoch,loss,train_acc,val_acc\n";
    for (const EpochLog &row : log) {
        out << row.epoch << ',' << io::format_double(row.loss) << ',' << io::format_double(row.train_acc) << ','
            << io::format_double(row.val_acc) << '\n';
    }
    return out.str();
}

}  // namespace graphcondense::gnn
