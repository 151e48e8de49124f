import math

import numpy as np
import pytest

from dstlab.exceptions import ConfigError
from dstlab.models.base import MAIN_HEAD
from dstlab.models.builder import build_model
from dstlab.models.heads import HeadKind
from dstlab.nn.ema import EmaShadow
from dstlab.nn.functional import softmax
from dstlab.nn.optim import SgdOptimizer
from dstlab.nn.tensor import Tape
from dstlab.schemas.run_config import parse_run_config
from dstlab.selftrain.algorithms import SupervisedTrainer
from dstlab.selftrain.flexmatch import LearningStatus, flexmatch_lite_thresholds
from dstlab.selftrain.kinds import AlgorithmKind
from dstlab.selftrain.noisy_student import NoisyStudentTrainer, noisy_student_run, round_tag
from dstlab.selftrain.pseudo import (PseudoBatchRecord, PseudoLabelPolicy, pseudo_label,
                                     pseudo_label_from_probs, supervised_loss, unlabeled_loss)
from dstlab.selftrain.registry import build_trainer
from dstlab.selftrain.rounds import RoundSpan, round_schedule
from dstlab.selftrain.steps import (descend, fixmatch_step, mean_teacher_step,
                                    mutual_learning_step, supervised_step)

LINEAR = {MAIN_HEAD: HeadKind.LINEAR}


def _optimizer(model, lr=0.1):
    return SgdOptimizer(model.parameters(), lr0=lr, momentum=0.9)


def _assert_same_params(a, b):
    left, right = a.state_dict(), b.state_dict()
    assert left.keys() == right.keys()
    for name in left:
        np.testing.assert_array_equal(left[name], right[name], err_msg=name)


def test_confident_prediction_is_retained():
    record = pseudo_label_from_probs(np.array([[0.8, 0.1, 0.1]]), PseudoLabelPolicy(0.7))
    assert record.predicted_class.tolist() == [0]
    assert record.targets.tolist() == [0]


def test_unconfident_prediction_is_ignored():
    record = pseudo_label_from_probs(np.array([[0.5, 0.3, 0.2]]), PseudoLabelPolicy(0.7))
    assert record.targets.tolist() == [-1]
    assert record.retained_count == 0


def test_pseudo_labels_are_shift_invariant():
    logits = np.random.default_rng(0).standard_normal((20, 3)) * 3
    policy = PseudoLabelPolicy(0.7)
    a = pseudo_label_from_probs(softmax(logits), policy)
    b = pseudo_label_from_probs(softmax(logits + 10.0), policy)
    np.testing.assert_array_equal(a.predicted_class, b.predicted_class)
    np.testing.assert_array_equal(a.retained, b.retained)


def test_policy_rejects_tau_outside_unit_interval():
    with pytest.raises(ConfigError):
        PseudoLabelPolicy(1.5)


def test_labeling_records_nothing_on_the_tape(small_arch, make_views):
    model = build_model(small_arch, LINEAR, seed=0)
    with Tape() as tape:
        pseudo_label(model, make_views().unlabeled_weak, PseudoLabelPolicy(0.5))
    assert len(tape) == 0


def _zero_head_model(small_arch, bias=(0.0, 0.0)):
    model = build_model(small_arch, LINEAR, seed=0)
    model.h.layers[0].weight.data[...] = 0.0
    model.h.layers[0].bias.data[...] = bias
    return model


def test_unlabeled_loss_masked_mean(small_arch):
    model = _zero_head_model(small_arch)
    x = np.zeros((4, 2))
    record = PseudoBatchRecord(np.array([1, 0, 0, 0]), np.ones(4),
                               np.array([True, False, False, False]), 2)
    assert unlabeled_loss(model, MAIN_HEAD, record, x).item() == pytest.approx(math.log(2) / 4)
    record.retained[:] = False
    assert unlabeled_loss(model, MAIN_HEAD, record, x).item() == 0.0


def test_supervised_loss_uniform_and_confident(small_arch):
    x = np.zeros((1, 2))
    assert supervised_loss(_zero_head_model(small_arch), x, [1]).item() == pytest.approx(math.log(2))
    confident = _zero_head_model(small_arch, bias=(20.0, -20.0))
    assert supervised_loss(confident, x, [0]).item() < 1e-6


@pytest.mark.parametrize("lam,tau", [(0.0, 0.5), (1.0, 1.0)])
def test_fixmatch_without_unlabeled_term_is_supervised(small_arch, make_views, lam, tau):
    views = make_views()
    ssl_model = build_model(small_arch, LINEAR, seed=0)
    sup_model = build_model(small_arch, LINEAR, seed=0)
    metrics = fixmatch_step(ssl_model, views, PseudoLabelPolicy(tau), lam, _optimizer(ssl_model), 0)
    supervised_step(sup_model, views, _optimizer(sup_model), 0)
    _assert_same_params(ssl_model, sup_model)
    assert metrics.loss_pseudo == 0.0


def test_fixmatch_trains_on_retained_labels(small_arch, make_views):
    views = make_views()
    ssl_model = build_model(small_arch, LINEAR, seed=0)
    sup_model = build_model(small_arch, LINEAR, seed=0)
    metrics = fixmatch_step(ssl_model, views, PseudoLabelPolicy(0.5), 1.0, _optimizer(ssl_model), 0)
    supervised_step(sup_model, views, _optimizer(sup_model), 0)
    assert metrics.retained_count > 0
    assert not np.array_equal(ssl_model.h.layers[0].weight.data, sup_model.h.layers[0].weight.data)


def test_mean_teacher_starts_with_fixmatch_labels(small_arch, make_views):
    views = make_views()
    student = build_model(small_arch, LINEAR, seed=0)
    twin = build_model(small_arch, LINEAR, seed=0)
    policy = PseudoLabelPolicy(0.6)
    teacher = EmaShadow(student, decay=0.9)
    mt = mean_teacher_step(student, teacher, views, policy, 1.0, _optimizer(student), 0)
    fm = fixmatch_step(twin, views, policy, 1.0, _optimizer(twin), 0)
    np.testing.assert_array_equal(mt.record.predicted_class, fm.record.predicted_class)
    np.testing.assert_array_equal(mt.record.retained, fm.record.retained)


def test_mean_teacher_tracks_ema_of_student_trajectory(small_arch, make_views):
    decay = 0.9
    student = build_model(small_arch, LINEAR, seed=0)
    teacher = EmaShadow(student, decay=decay)
    optimizer = _optimizer(student, lr=0.05)
    replay = [p.data.copy() for p in student.parameters()]
    for step, views in enumerate(make_views(count=50)):
        mean_teacher_step(student, teacher, views, PseudoLabelPolicy(0.7), 1.0, optimizer, step)
        replay = [decay * r + (1 - decay) * p.data for r, p in zip(replay, student.parameters())]
    for expected, param in zip(replay, teacher.parameters()):
        np.testing.assert_allclose(param.data, expected, rtol=1e-10, atol=1e-12)


def test_flexmatch_thresholds():
    np.testing.assert_allclose(flexmatch_lite_thresholds([0, 1] * 10, 0.8, 2), [0.8, 0.8])
    np.testing.assert_allclose(flexmatch_lite_thresholds([0] * 30 + [1] * 10, 0.8, 2), [0.8, 0.4])
    np.testing.assert_allclose(flexmatch_lite_thresholds([0] * 40 + [1] * 30, 1.0, 2), [1.0, 0.6])
    np.testing.assert_allclose(flexmatch_lite_thresholds([], 0.7, 3), [0.7, 0.7, 0.7])


def test_learning_status_window_drops_old_batches():
    status = LearningStatus(num_classes=2, window=2)
    for cls in (0, 1, 1):
        status.update(PseudoBatchRecord(np.array([cls, cls]), np.ones(2), np.array([True, False]), 2))
    assert sorted(status.history().tolist()) == [1, 1]
    np.testing.assert_allclose(status.policy(PseudoLabelPolicy(0.9)).per_class_tau, [0.45, 0.9])


def _mutual_model(small_arch, symmetric=True):
    model = build_model(small_arch, {MAIN_HEAD: HeadKind.LINEAR, "h_b": HeadKind.LINEAR}, seed=0)
    if symmetric:
        for a, b in zip(model.h.parameters(), model.head("h_b").parameters()):
            b.data[...] = a.data
    return model


def test_mutual_learning_symmetric_heads_stay_identical(small_arch, make_views):
    model = _mutual_model(small_arch)
    optimizer = _optimizer(model)
    for step, views in enumerate(make_views(count=3)):
        mutual_learning_step(model, views, PseudoLabelPolicy(0.5), 1.0, optimizer, step)
    for a, b in zip(model.h.parameters(), model.head("h_b").parameters()):
        np.testing.assert_allclose(a.data, b.data, atol=1e-12)


def test_mutual_learning_without_unlabeled_weight(small_arch, make_views):
    views = make_views()
    model, twin = _mutual_model(small_arch, False), _mutual_model(small_arch, False)
    mutual_learning_step(model, views, PseudoLabelPolicy(0.5), 0.0, _optimizer(model), 0)
    optimizer = _optimizer(twin)
    with Tape():
        total = (supervised_loss(twin, views.labeled_weak, views.labeled_y, MAIN_HEAD)
                 + supervised_loss(twin, views.labeled_weak, views.labeled_y, "h_b"))
        descend(optimizer, total, 0)
    _assert_same_params(model, twin)


def test_round_schedule_puts_remainder_last():
    spans = round_schedule(10, 3)
    assert [(s.start, s.end) for s in spans] == [(0, 3), (3, 6), (6, 10)]
    with pytest.raises(ConfigError):
        round_schedule(2, 3)


def _config(base_config, **algorithm):
    data = dict(base_config)
    data["algorithm"] = {**base_config["algorithm"], **algorithm}
    return parse_run_config(data)


def test_single_round_noisy_student_is_supervised(base_config, moons_split, make_views):
    config = _config(base_config, kind="noisy_student", rounds=1)
    noisy = NoisyStudentTrainer(config, moons_split)
    supervised = SupervisedTrainer(config, moons_split)
    for step, views in enumerate(make_views(count=config.total_steps)):
        noisy.train_step(views, step)
        supervised.train_step(views, step)
    _assert_same_params(noisy.model, supervised.model)


def test_noisy_student_teacher_is_frozen_within_round(base_config, moons_split, make_views):
    config = _config(base_config, kind="noisy_student", rounds=2)
    trainer = NoisyStudentTrainer(config, moons_split)
    sample = moons_split.eval.features[:10]
    all_views = make_views(count=config.total_steps)
    for step, views in enumerate(all_views[:10]):
        trainer.train_step(views, step)
    round_zero = trainer.model.predict(sample)
    trainer.train_step(all_views[10], 10)
    teacher_probs = trainer.teacher.predict_proba(sample)
    np.testing.assert_array_equal(trainer.teacher.predict(sample), round_zero)
    for step in range(11, config.total_steps):
        trainer.train_step(all_views[step], step)
    np.testing.assert_array_equal(trainer.teacher.predict_proba(sample), teacher_probs)


def test_noisy_student_run_reports_every_round(base_config, moons_split):
    reports = noisy_student_run(_config(base_config), moons_split, rounds=3, per_round_steps=4)
    assert [r.round for r in reports] == [0, 1, 2]
    assert [r.end_step for r in reports] == [4, 8, 12]
    assert all(0.0 <= r.accuracy <= 1.0 for r in reports)


@pytest.mark.parametrize("kind", [k.value for k in AlgorithmKind])
def test_every_trainer_takes_finite_steps(base_config, moons_split, make_views, kind):
    trainer = build_trainer(_config(base_config, kind=kind, tau=0.5), moons_split)
    for step, views in enumerate(make_views(count=6)):
        metrics = trainer.train_step(views, step)
        assert math.isfinite(metrics.loss_sup)
        assert metrics.step == step
    assert trainer.inference_model().predict(moons_split.eval.features).shape == (len(moons_split.eval),)


def test_round_spans_are_declared_by_every_trainer(base_config, moons_split):
    fixmatch = build_trainer(_config(base_config), moons_split)
    assert fixmatch.round_spans() == ()
    assert fixmatch.round_end_steps() == ()
    noisy = build_trainer(_config(base_config, kind="noisy_student", rounds=2), moons_split)
    assert [(s.start, s.end) for s in noisy.round_spans()] == [(0, 10), (10, 20)]
    assert noisy.round_end_steps() == (9, 19)


SUPERVISED_WHEN_NOTHING_IS_RETAINED = [
    ("pseudo_label", False), ("fixmatch", False), ("flexmatch_lite", False),
    ("mean_teacher", False), ("noisy_student", False),
    ("fixmatch", True), ("flexmatch_lite", True), ("mean_teacher", True), ("noisy_student", True),
]


@pytest.mark.parametrize("kind,debiased", SUPERVISED_WHEN_NOTHING_IS_RETAINED)
def test_unreachable_threshold_gives_the_supervised_trajectory(base_config, moons_split, make_views,
                                                               kind, debiased):
    config = _config(base_config, kind=kind, debiased=debiased, tau=1.0, rounds=2)
    trainer = build_trainer(config, moons_split)
    spans = trainer.round_spans() or (RoundSpan(0, 0, config.total_steps),)
    twin = optimizer = None
    for step, views in enumerate(make_views(count=config.total_steps)):
        span = next(s for s in spans if step in s)
        if step == span.start:
            dropout = config.algorithm.student_dropout if span.index else None
            twin = trainer.build_model(round_tag(span.index), dropout)
            optimizer = trainer.build_optimizer(twin.parameters(), span.length)
        metrics = trainer.train_step(views, step)
        supervised_step(twin, views, optimizer, step - span.start, trainer.clamp_eps)
        assert metrics.retained_count == 0
        _assert_same_params(trainer.model, twin)


@pytest.mark.parametrize("debiased", [False, True])
def test_prediction_leaves_the_mean_teacher_alone(base_config, moons_split, make_views, debiased):
    trainer = build_trainer(_config(base_config, kind="mean_teacher", debiased=debiased, tau=0.5),
                            moons_split)
    for step, views in enumerate(make_views(count=5)):
        trainer.train_step(views, step)
    teacher = trainer.teacher.module
    student, shadow = trainer.model.state_dict(), teacher.state_dict()
    x = moons_split.eval.features
    for model in (trainer.inference_model(), teacher):
        np.testing.assert_array_equal(model.predict_proba(x), model.predict_proba(x))
    for model, before in ((teacher, shadow), (trainer.model, student)):
        for name, array in model.state_dict().items():
            np.testing.assert_array_equal(array, before[name], err_msg=name)
