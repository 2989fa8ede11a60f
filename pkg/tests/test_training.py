import math

import numpy as np
import pytest

from archtext.autodiff import Tensor
from archtext.checkpoint import save_checkpoint
from archtext.datagen import ACSample, AQASample, BiModalSample, GenConfig, gen_architecture
from archtext.graph import MASK_NODE_ID, ArchGraph
from archtext.model import Model, ModelConfig
from archtext.text import TextVocab, build_vocab
from archtext.training import (
    MaskPlan,
    TrainConfig,
    aqa_loss,
    decoder_loss,
    finetune_ac,
    finetune_aqa,
    mam_loss,
    mask_count,
    mask_nodes,
    pretrain,
    sim_loss,
    total_loss,
)


class TestMaskNodes:
    def test_count_20_nodes(self, rng):
        g = ArchGraph(nodes=[3] * 20, edges=[(i, i + 1) for i in range(19)],
                      shapes=[(0, 0, 0, 0)] * 20)
        _, plan = mask_nodes(g, 0.15, rng)
        assert len(plan.positions) == 3

    def test_single_node_forced_to_one(self, rng):
        g = ArchGraph(nodes=[3], edges=[], shapes=[(0, 0, 0, 0)])
        masked, plan = mask_nodes(g, 0.15, rng)
        assert plan.positions == (0,)
        assert masked.nodes == (MASK_NODE_ID,)

    def test_unmasked_positions_keep_ids(self, gen_cfg, rng):
        g = gen_architecture(gen_cfg, rng)
        masked, plan = mask_nodes(g, 0.15, rng)
        for i in range(g.num_nodes):
            if i in plan.positions:
                assert masked.nodes[i] == MASK_NODE_ID
            else:
                assert masked.nodes[i] == g.nodes[i]
        assert masked.edges == g.edges
        assert masked.shapes == g.shapes

    def test_counts_and_uniqueness_over_many_sizes(self, rng):
        for m in range(1, 60):
            g = ArchGraph(nodes=[3] * m, edges=[], shapes=[(0, 0, 0, 0)] * m)
            _, plan = mask_nodes(g, 0.15, rng)
            assert len(plan.positions) == len(set(plan.positions)) == mask_count(m, 0.15)

    def test_mask_count_half_up(self):
        # 0.15*10 = 1.5 rounds up; 0.15*3 = 0.45 rounds down but floors at 1
        assert mask_count(10, 0.15) == 2
        assert mask_count(3, 0.15) == 1
        assert mask_count(20, 0.15) == 3


class TestSimLoss:
    def test_matching_pair_zero(self):
        v = Tensor(np.array([[1.0, 2.0]]))
        assert sim_loss(v, v, 1.0).item() == pytest.approx(0.0)

    def test_orthogonal_negative_zero(self):
        a = Tensor(np.array([[1.0, 0.0]]))
        b = Tensor(np.array([[0.0, 1.0]]))
        assert sim_loss(a, b, 0.0).item() == pytest.approx(0.0)

    def test_false_positive_costs_one(self):
        v = Tensor(np.array([[0.3, -0.7]]))
        assert sim_loss(v, v, 0.0).item() == pytest.approx(1.0)


class TestMamLoss:
    def test_peaked_logits_near_zero(self):
        logits = np.zeros((4, 8))
        logits[1, 5] = 20.0
        loss = mam_loss(Tensor(logits), MaskPlan(positions=(1,), original_ids=(5,)))
        assert loss.item() < 1e-6

    def test_uniform_is_log_vocab(self):
        loss = mam_loss(Tensor(np.zeros((3, 8))), MaskPlan(positions=(0, 2), original_ids=(1, 7)))
        assert loss.item() == pytest.approx(math.log(8))

    def test_two_mask_hand_computation(self):
        logits = np.array([[1.0, 2.0, 0.5],
                           [0.0, 0.0, 0.0],
                           [3.0, -1.0, 0.2]])
        plan = MaskPlan(positions=(0, 2), original_ids=(1, 0))
        # -log p computed by hand for each masked row, then averaged
        def logp(row, idx):
            z = sum(math.exp(v) for v in row)
            return math.log(math.exp(row[idx]) / z)
        want = -(logp(logits[0], 1) + logp(logits[2], 0)) / 2
        assert mam_loss(Tensor(logits), plan).item() == pytest.approx(want, rel=1e-12)

    def test_empty_plan_rejected(self):
        with pytest.raises(ValueError):
            mam_loss(Tensor(np.zeros((2, 4))), MaskPlan(positions=(), original_ids=()))


class TestTotalLoss:
    def test_weighted_sum(self):
        out = total_loss(Tensor(0.4), Tensor(2.0), alpha=0.05, no_mam=False)
        assert out.item() == pytest.approx(0.5)

    def test_no_mam_flag(self):
        out = total_loss(Tensor(0.4), Tensor(2.0), alpha=0.05, no_mam=True)
        assert out.item() == pytest.approx(0.4)

    def test_alpha_zero_equals_no_mam(self):
        with_mam = total_loss(Tensor(0.4), Tensor(2.0), alpha=0.0, no_mam=False)
        without = total_loss(Tensor(0.4), Tensor(2.0), alpha=0.0, no_mam=True)
        assert with_mam.item() == pytest.approx(without.item())


class TestAqaLoss:
    def test_confident_correct_near_zero(self):
        logits = Tensor(np.array([[20.0, -20.0, 20.0]]))
        loss = aqa_loss(logits, np.array([1.0, 0.0, 1.0]))
        assert loss.item() < 1e-6

    def test_zero_logits_log_two(self):
        loss = aqa_loss(Tensor(np.zeros((1, 5))), np.zeros(5))
        assert loss.item() == pytest.approx(math.log(2))

    def test_three_slot_hand_computation(self):
        logits = [0.5, -1.0, 2.0]
        targets = [1.0, 0.0, 1.0]
        def sigma(x):
            return 1 / (1 + math.exp(-x))
        want = -(math.log(sigma(0.5)) + math.log(1 - sigma(-1.0)) + math.log(sigma(2.0))) / 3
        loss = aqa_loss(Tensor(np.array([logits])), np.array(targets))
        assert loss.item() == pytest.approx(want, rel=1e-12)

    def test_targets_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            aqa_loss(Tensor(np.zeros((1, 2))), np.array([0.5, 1.5]))


class TestDecoderLoss:
    def test_peaked_near_zero(self):
        logits = np.full((3, 16), -10.0)
        targets = [4, 7, 3]
        for i, t in enumerate(targets):
            logits[i, t] = 10.0
        loss = decoder_loss(Tensor(logits), targets, [True] * 3)
        assert loss.item() < 1e-6

    def test_uniform_is_log_vocab(self):
        loss = decoder_loss(Tensor(np.zeros((4, 16))), [1, 2, 3, 4], [True] * 4)
        assert loss.item() == pytest.approx(math.log(16))

    def test_pad_targets_do_not_change_loss(self):
        rng = np.random.default_rng(0)
        logits = rng.standard_normal((3, 8))
        base = decoder_loss(Tensor(logits), [1, 2, 3], [True, True, True])
        padded_logits = np.concatenate([logits, rng.standard_normal((2, 8))], axis=0)
        padded = decoder_loss(Tensor(padded_logits), [1, 2, 3, 0, 0],
                              [True, True, True, False, False])
        assert padded.item() == pytest.approx(base.item(), rel=1e-15)

    def test_all_pad_rejected(self):
        with pytest.raises(ValueError):
            decoder_loss(Tensor(np.zeros((2, 4))), [0, 0], [False, False])


# ---------------------------------------------------------------------------
# loops


def _toy_bimodal(small_ops, n_graphs=4):
    gcfg = GenConfig(rng_seed=2, ops=small_ops, min_nodes=3, max_nodes=5)
    graphs, texts = [], []
    for i in range(n_graphs):
        rng = np.random.default_rng([77, i])
        g = gen_architecture(gcfg, rng, name=f"g{i}")
        graphs.append(g)
        texts.append(f"net {i} alpha beta gamma{i}")
    samples = [BiModalSample(graph=graphs[i], text=texts[i], y=1.0) for i in range(n_graphs)]
    samples += [BiModalSample(graph=graphs[i], text=texts[(i + 1) % n_graphs], y=0.0)
                for i in range(n_graphs)]
    return gcfg, samples


def _toy_model(gcfg, text_vocab, **overrides):
    kwargs = dict(node_vocab_size=len(gcfg.node_vocab()), text_vocab_size=len(text_vocab),
                  d=16, gat_layers=1, gat_heads=2, cross_layers=1, cross_heads=2,
                  dec_heads=2, max_nodes=8, max_tokens=16, shape_buckets=8)
    kwargs.update(overrides)
    return Model.initialized(ModelConfig(**kwargs), seed=0)


class TestPretrain:
    def test_loss_decreases_and_logs(self, small_ops):
        gcfg, samples = _toy_bimodal(small_ops)
        vocab = build_vocab([s.text for s in samples], 64)
        model = _toy_model(gcfg, vocab)
        tcfg = TrainConfig(task="pretrain", lr=5e-3, batch_size=8, epochs=20, seed=0)
        log = pretrain(samples, model, tcfg, vocab)
        assert log[-1]["l_total"] <= log[0]["l_total"]
        assert all({"epoch", "step", "l_sim", "l_mam", "l_total"} <= set(r) for r in log)

    def test_same_seed_bit_identical_checkpoint(self, small_ops, tmp_path):
        gcfg, samples = _toy_bimodal(small_ops)
        vocab = build_vocab([s.text for s in samples], 64)
        paths = []
        for run in range(2):
            model = _toy_model(gcfg, vocab)
            tcfg = TrainConfig(task="pretrain", lr=5e-3, batch_size=4, epochs=3, seed=9)
            pretrain(samples, model, tcfg, vocab)
            path = tmp_path / f"run{run}.abkt"
            save_checkpoint(model.params, str(path))
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_empty_dataset_rejected(self, small_ops):
        gcfg, _ = _toy_bimodal(small_ops)
        vocab = TextVocab(["a"])
        model = _toy_model(gcfg, vocab)
        with pytest.raises(ValueError):
            pretrain([], model, TrainConfig(task="pretrain"), vocab)

    def test_no_mam_drops_term_from_total(self, small_ops):
        gcfg, samples = _toy_bimodal(small_ops)
        vocab = build_vocab([s.text for s in samples], 64)
        model = _toy_model(gcfg, vocab, no_mam=True)
        log = pretrain(samples, model, TrainConfig(task="pretrain", epochs=1, seed=0), vocab)
        for rec in log:
            assert rec["l_mam"] is None
            assert rec["l_total"] == pytest.approx(rec["l_sim"])

    def test_text_only_freezes_arch_params(self, small_ops):
        gcfg, samples = _toy_bimodal(small_ops)
        vocab = build_vocab([s.text for s in samples], 64)
        model = _toy_model(gcfg, vocab, text_only=True)
        before = {k: v.data.copy() for k, v in model.params.items()
                  if k.startswith(("arch.", "gat."))}
        pretrain(samples, model, TrainConfig(task="pretrain", lr=1e-2, epochs=2, seed=0), vocab)
        for name, arr in before.items():
            assert model.params[name].grad is None
            np.testing.assert_array_equal(model.params[name].data, arr)

    def test_arch_only_freezes_text_params(self, small_ops):
        gcfg, samples = _toy_bimodal(small_ops)
        vocab = build_vocab([s.text for s in samples], 64)
        model = _toy_model(gcfg, vocab, arch_only=True)
        before = {k: v.data.copy() for k, v in model.params.items()
                  if k.startswith("text.")}
        pretrain(samples, model, TrainConfig(task="pretrain", lr=1e-2, epochs=2, seed=0), vocab)
        for name, arr in before.items():
            assert model.params[name].grad is None
            np.testing.assert_array_equal(model.params[name].data, arr)

    def test_no_cross_encoder_gets_zero_gradient(self, small_ops):
        gcfg, samples = _toy_bimodal(small_ops)
        vocab = build_vocab([s.text for s in samples], 64)
        model = _toy_model(gcfg, vocab, no_cross_encoder=True)
        before = {k: v.data.copy() for k, v in model.params.items()
                  if k.startswith("cross.")}
        pretrain(samples, model, TrainConfig(task="pretrain", lr=1e-2, epochs=2, seed=0), vocab)
        for name, arr in before.items():
            assert model.params[name].grad is None
            np.testing.assert_array_equal(model.params[name].data, arr)


class TestFinetuneAqa:
    def test_runs_and_is_deterministic(self, small_ops, tmp_path):
        gcfg = GenConfig(rng_seed=2, ops=small_ops, min_nodes=3, max_nodes=5)
        rng = np.random.default_rng(0)
        g = gen_architecture(gcfg, rng)
        samples = [AQASample(graph=g, question=f"question number {i} here",
                             answers=frozenset({i, i + 1})) for i in range(4)]
        vocab = build_vocab([s.question for s in samples], 64)
        paths = []
        for run in range(2):
            model = _toy_model(gcfg, vocab)
            finetune_aqa(samples, model, TrainConfig(task="aqa", lr=1e-3, epochs=3, seed=1),
                         vocab)
            p = tmp_path / f"aqa{run}.abkt"
            save_checkpoint(model.params, str(p))
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestFinetuneAc:
    def test_initial_loss_near_log_vocab(self, small_ops):
        gcfg = GenConfig(rng_seed=2, ops=small_ops, min_nodes=3, max_nodes=5)
        rng = np.random.default_rng(0)
        samples = [ACSample(graph=gen_architecture(gcfg, rng),
                            text=f"caption {i} with words") for i in range(4)]
        vocab = build_vocab([s.text for s in samples], 64)
        model = _toy_model(gcfg, vocab)
        log = finetune_ac(samples, model, TrainConfig(task="ac", lr=1e-4, epochs=1, seed=0),
                          vocab)
        expected = math.log(len(vocab))
        assert abs(log[0]["l_total"] - expected) / expected < 0.10

    def test_determinism(self, small_ops, tmp_path):
        gcfg = GenConfig(rng_seed=2, ops=small_ops, min_nodes=3, max_nodes=5)
        rng = np.random.default_rng(0)
        samples = [ACSample(graph=gen_architecture(gcfg, rng), text="tiny caption here")]
        vocab = build_vocab([s.text for s in samples], 64)
        paths = []
        for run in range(2):
            model = _toy_model(gcfg, vocab)
            finetune_ac(samples, model, TrainConfig(task="ac", lr=1e-3, epochs=3, seed=4),
                        vocab)
            p = tmp_path / f"ac{run}.abkt"
            save_checkpoint(model.params, str(p))
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(task="nope")
    with pytest.raises(ValueError):
        TrainConfig(task="pretrain", batch_size=0)
