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

#include <doctest.h>

#include <map>

#include "fixtures.hpp"
#include "graphcondense/trajectory.hpp"

using namespace graphcondense;
using trajectory::ExpertConfig;
using trajectory::TrajectoryBank;

namespace {

/// Bank whose snapshot values encode (trajectory, snapshot, index).
TrajectoryBank synthetic_bank(std::size_t k, int epochs, int interval) {
    TrajectoryBank bank;
    bank.arch = gnn::GnnArch{gnn::ArchKind::GCN, 2, 3, 2, 2};
    bank.epochs = epochs;
    bank.interval = interval;
    bank.trajectories.resize(k);
    for (std::size_t t = 0; t < k; ++t) {
        auto &traj = bank.trajectories[t];
        traj.train_acc = 0.5;
        traj.val_acc = 0.25;
        for (int s = 0; s <= epochs / interval; ++s) {
            Eigen::VectorXf v(static_cast<Eigen::Index>(bank.param_len()));
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                v(i) = static_cast<float>(1000 * t + 10 * s) + static_cast<float>(i) * 0.125F;
            }
            traj.snapshots.push_back(v);
        }
    }
    return bank;
}

struct Small {
    graph::GraphDataset ds = fixture::random_dataset(30, 4, 3, 0.15, 21);
    gnn::GnnArch arch{gnn::ArchKind::GCN, 4, 8, 3, 2};
};

}  // namespace

TEST_CASE("experts differ, snapshot counts and determinism") {
    const Small s;
    ExpertConfig cfg;
    cfg.num_experts = 2;
    cfg.epochs = 100;
    cfg.interval = 10;
    cfg.step_size = 0.2;
    const auto bank = trajectory::train_experts(s.ds, s.arch, cfg);
    REQUIRE(bank.size() == 2);
    CHECK(bank.trajectories[0].snapshots.size() == 11);
    CHECK(bank.trajectories[1].snapshots.size() == 11);
    CHECK(bank.trajectories[0].snapshots[0] != bank.trajectories[1].snapshots[0]);
    CHECK(bank.trajectories[0].snapshots[0] == gnn::init_params(s.arch, 0).cast<float>());
    CHECK(bank.trajectories[1].snapshots[0] == gnn::init_params(s.arch, 1).cast<float>());

    const auto again = trajectory::train_experts(s.ds, s.arch, cfg);
    CHECK(trajectory::encode_bank(bank) == trajectory::encode_bank(again));
}

TEST_CASE("retraining reproduces a middle snapshot") {
    const Small s;
    ExpertConfig cfg;
    cfg.num_experts = 1;
    cfg.epochs = 40;
    cfg.interval = 5;
    cfg.step_size = 0.2;
    cfg.seed_base = 9;
    const auto bank = trajectory::train_experts(s.ds, s.arch, cfg);

    const auto adj = graph::normalize_adjacency(s.ds.edges, s.ds.num_nodes);
    const auto in = gnn::prepare_input(s.arch, gnn::Topology{&adj}, s.ds.features);
    gnn::TrainConfig tc;
    tc.optimizer = gnn::Optimizer::GradientDescent;
    tc.step_size = 0.2;
    tc.weight_decay = 0.0;
    tc.epochs = 20;
    tc.seed = 9;
    const auto res = gnn::train(s.arch, gnn::TrainTask{&in, s.ds.labels, s.ds.splits.train}, tc);
    CHECK(bank.snapshot(0, 20) == res.final_params.cast<float>().cast<double>());
}

TEST_CASE("expert configuration errors") {
    ExpertConfig cfg;
    cfg.epochs = 100;
    cfg.interval = 30;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.interval = 10;
    cfg.num_experts = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.num_experts = 1;
    cfg.step_size = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("segment sampling") {
    const auto bank = synthetic_bank(2, 100, 10);
    Rng rng(3);

    SUBCASE("max start zero always starts at zero") {
        for (int i = 0; i < 200; ++i) {
            const auto seg = trajectory::sample_segment(bank, rng, 30, 0);
            CHECK(seg.start_epoch == 0);
            CHECK(seg.target_epoch == 30);
        }
    }
    SUBCASE("start and target come from the same trajectory") {
        for (int i = 0; i < 200; ++i) {
            const auto seg = trajectory::sample_segment(bank, rng, 20, 1000);
            CHECK(seg.start == bank.snapshot(seg.trajectory, seg.start_epoch));
            CHECK(seg.target == bank.snapshot(seg.trajectory, seg.target_epoch));
            CHECK(seg.target_epoch <= 100);
        }
    }
    SUBCASE("p equal to T uses the first snapshot") {
        const auto seg = trajectory::sample_segment(bank, rng, 100, 1000);
        CHECK(seg.start_epoch == 0);
        CHECK(seg.target_epoch == 100);
    }
    SUBCASE("uniform over admissible cells") {
        // Starts 0..50 on two trajectories: 12 cells.
        std::map<std::pair<std::size_t, int>, int> counts;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const auto seg = trajectory::sample_segment(bank, rng, 20, 50);
            ++counts[{seg.trajectory, seg.start_epoch}];
        }
        CHECK(counts.size() == 12);
        const double expected = n / 12.0;
        double chi2 = 0.0;
        for (const auto &[cell, c] : counts) {
            CHECK(cell.second <= 50);
            chi2 += (c - expected) * (c - expected) / expected;
        }
        // 11 degrees of freedom, 0.1% critical value.
        CHECK(chi2 < 31.26);
    }
    SUBCASE("invalid lengths") {
        CHECK_THROWS_AS(trajectory::sample_segment(bank, rng, 15, 100), ConfigError);
        CHECK_THROWS_AS(trajectory::sample_segment(bank, rng, 0, 100), ConfigError);
        CHECK_THROWS_AS(trajectory::sample_segment(bank, rng, 110, 100), ConfigError);
        CHECK_THROWS_AS(trajectory::sample_segment(bank, rng, 10, -1), ConfigError);
    }
}

TEST_CASE("bank serialization") {
    const auto bank = synthetic_bank(3, 40, 10);
    const std::string bytes = trajectory::encode_bank(bank);

    SUBCASE("round trip") {
        const auto back = trajectory::decode_bank(bytes);
        CHECK(back.arch == bank.arch);
        CHECK(back.epochs == 40);
        CHECK(back.interval == 10);
        REQUIRE(back.size() == 3);
        for (std::size_t t = 0; t < 3; ++t) {
            CHECK(back.trajectories[t].snapshots == bank.trajectories[t].snapshots);
            CHECK(back.trajectories[t].val_acc == 0.25);
        }
        CHECK(trajectory::encode_bank(back) == bytes);
    }
    SUBCASE("payload size is exact") {
        const auto eol = bytes.find('\n');
        CHECK(bytes.size() - eol - 1 == 3U * 5U * bank.param_len() * 4U);
        CHECK_THROWS_AS(trajectory::decode_bank(bytes.substr(0, bytes.size() - 1)), FormatError);
        CHECK_THROWS_AS(trajectory::decode_bank(bytes + "x"), FormatError);
    }
    SUBCASE("corrupted header") {
        std::string bad = bytes;
        bad[1] = '#';
        CHECK_THROWS_AS(trajectory::decode_bank(bad), FormatError);
        CHECK_THROWS_AS(trajectory::decode_bank("no newline"), FormatError);
    }
    SUBCASE("architecture mismatch") {
        auto other = bank.arch;
        other.hidden = 4;
        CHECK_THROWS_AS(trajectory::decode_bank(bytes, other), FormatError);
        CHECK_NOTHROW(trajectory::decode_bank(bytes, bank.arch));
    }
    SUBCASE("file round trip") {
        fixture::TempDir tmp("bank");
        trajectory::save_bank(bank, tmp / "bank.bin");
        CHECK(fixture::read_bytes(tmp / "bank.bin") == bytes);
        CHECK_THROWS_AS(trajectory::load_bank(tmp / "missing.bin"), FormatError);
    }
}

TEST_CASE("snapshot lookup bounds") {
    const auto bank = synthetic_bank(1, 20, 10);
    CHECK(bank.snapshot(0, 10)(0) == 10.0);
    CHECK_THROWS_AS(bank.snapshot(0, 15), std::out_of_range);
    CHECK_THROWS_AS(bank.snapshot(1, 0), std::out_of_range);
    CHECK_THROWS_AS(bank.snapshot(0, 30), std::out_of_range);
}
